#include "fracasym/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fracasym/error.hpp"

namespace fracasym {

json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double read_number(const json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
        if (s == "nan") return NAN;
    }
    throw ParseError(std::string("expected a number for ") + what);
}

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

TailModel envelope_from_json(const json& e) {
    if (!e.is_object()) throw ParseError("envelope must be an object");
    for (const char* k : {"A", "p"}) {
        if (!e.contains(k)) throw ParseError(std::string("envelope needs \"") + k + "\"");
    }
    const double A = read_number(e["A"], "envelope.A");
    const double p = read_number(e["p"], "envelope.p");
    const double from = e.contains("valid_from") ? read_number(e["valid_from"], "envelope.valid_from") : 0.0;
    if (!(A >= 0) || !std::isfinite(A) || !std::isfinite(p) || !(from >= 0) || !std::isfinite(from)) {
        throw ParseError("envelope needs finite A >= 0, p and valid_from >= 0");
    }
    return TailModel::power(A, p, from);
}

}  // namespace

Coefficient coefficient_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("coefficient must be a JSON object");
    std::optional<TailModel> env;
    if (j.contains("envelope")) env = envelope_from_json(j["envelope"]);
    const bool has_expr = j.contains("expr"), has_samples = j.contains("samples");
    if (has_expr == has_samples) throw ParseError("coefficient needs exactly one of \"expr\" and \"samples\"");
    if (has_expr) {
        if (!j["expr"].is_string()) throw ParseError("\"expr\" must be a string");
        return Coefficient::from_expression(j["expr"].get<std::string>(), env);
    }
    const auto& s = j["samples"];
    if (!s.is_array()) throw ParseError("\"samples\" must be an array of [t, v] pairs");
    std::vector<std::pair<double, double>> rows;
    rows.reserve(s.size());
    for (const auto& r : s) {
        if (!r.is_array() || r.size() != 2) throw ParseError("each sample must be a [t, v] pair");
        rows.emplace_back(read_number(r[0], "sample t"), read_number(r[1], "sample value"));
    }
    return Coefficient::from_samples(std::move(rows), env);
}

json coefficient_summary(const Coefficient& c) {
    json j{{"source", c.source()}};
    j["envelope"] = c.envelope() ? to_json(*c.envelope()) : json(nullptr);
    return j;
}

json coefficient_to_json(const Coefficient& c) {
    json j;
    if (c.is_expression()) {
        j["expr"] = c.source();
    } else {
        if (c.source().rfind("samples[", 0) != 0) {
            throw DomainError("coefficient_to_json: scaled sample tables are not serializable");
        }
        json rows = json::array();
        for (const auto& [t, v] : c.samples()) rows.push_back({number(t), number(v)});
        j["samples"] = std::move(rows);
    }
    if (const auto& e = c.envelope(); e && e->kind == TailModel::Kind::power) {
        j["envelope"] = {{"A", number(e->amplitude)}, {"p", number(e->exponent)}, {"valid_from", number(e->valid_from)}};
    }
    return j;
}

Coefficient load_coefficient(const std::filesystem::path& path) {
    return coefficient_from_json(read_json(path));
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t c = 0; c < table.header.size(); ++c) out << (c ? "," : "") << table.header[c];
    out << '\n';
    const std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            out << (c ? "," : "") << format_full(table.columns[c][r]);
        }
        out << '\n';
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw ParseError(path.string() + ": missing header");
    if (line.back() == '\r') line.pop_back();
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    table.columns.resize(table.header.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= table.header.size()) throw ParseError(path.string() + ": too many cells", row);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || *end != '\0') {
                throw ParseError(path.string() + ": bad number '" + cell + "'", row);
            }
            table.columns[c++].push_back(v);
        }
        if (c != table.header.size()) throw ParseError(path.string() + ": too few cells", row);
    }
    return table;
}

GridPtr infer_grid(std::span<const double> t) {
    if (t.size() < 17) throw ParseError("grid needs at least 17 nodes");
    const std::size_t n = t.size() - 1;
    const double tmax = t.back();
    if (t[0] != 0.0 || !(tmax > 0.0) || !(t[1] > 0.0)) throw ParseError("grid must start at 0 and increase");
    const double g = std::log(t[1] / tmax) / std::log(1.0 / static_cast<double>(n));
    GridPtr grid;
    try {
        grid = make_graded_grid(tmax, n, g);
    } catch (const std::exception& e) {
        throw ParseError(std::string("not a graded grid: ") + e.what());
    }
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (std::fabs(t[j] - (*grid)[j]) > 1e-9 * (*grid)[j]) {
            throw ParseError("node " + std::to_string(j) + " is off the graded grid");
        }
    }
    // Snap to the canonical grading when the recovered one is a rounding away.
    const double rg = std::round(g * 1e6) / 1e6;
    if (rg != g) {
        auto snapped = make_graded_grid(tmax, n, rg);
        bool same = true;
        for (std::size_t j = 0; j < t.size() && same; ++j) same = std::fabs(t[j] - (*snapped)[j]) <= 1e-9 * t[j];
        if (same) grid = snapped;
    }
    return grid;
}

CsvTable grid_function_table(const GridFunction& f, const std::string& name) {
    CsvTable t;
    t.header = {"t", name};
    const auto nodes = f.grid().nodes();
    t.columns.emplace_back(nodes.begin(), nodes.end());
    t.columns.emplace_back(f.values().begin(), f.values().end());
    return t;
}

GridFunction read_grid_function(const std::filesystem::path& path,
                                std::optional<double> singular_exponent, const std::string& column) {
    auto table = read_csv(path);
    if (table.header.size() < 2 || table.header[0] != "t") {
        throw ParseError(path.string() + ": expected a 't' column followed by values");
    }
    std::size_t c = 1;
    if (!column.empty()) {
        c = 0;
        for (std::size_t i = 1; i < table.header.size(); ++i) {
            if (table.header[i] == column) c = i;
        }
        if (c == 0) throw ParseError(path.string() + ": no column '" + column + "'");
    }
    auto grid = infer_grid(table.columns[0]);
    for (double v : table.columns[c]) {
        if (!std::isfinite(v)) throw ParseError(path.string() + ": non-finite value");
    }
    GridFunction f(grid, std::move(table.columns[c]), TailModel::zero(), singular_exponent);
    return f.with_tail(fit_power_tail(f));
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), e.byte);
    }
}

json to_json(const TailModel& m) {
    if (m.kind == TailModel::Kind::zero) return json{{"kind", "zero"}};
    return json{{"kind", "power"}, {"A", number(m.amplitude)}, {"p", number(m.exponent)},
                {"valid_from", number(m.valid_from)}};
}

json to_json(const Thm1Report& r) {
    return json{{"T", number(r.T)},   {"C0", number(r.C0)},           {"C1", number(r.C1)},
                {"k", number(r.k)},   {"tail_ok", r.tail_ok},         {"verdict", to_string(r.verdict)},
                {"pass", r.pass()}};
}

json to_json(const Thm2Report& r) {
    return json{{"T", number(r.T)},
                {"k4", number(r.k4)},
                {"tail_ok", r.tail_ok},
                {"near_zero_ok", r.near_zero_ok},
                {"local_exponent", number(r.local_exponent)},
                {"verdict", to_string(r.verdict)},
                {"pass", r.pass()}};
}

json to_json(const Thm3Report& r) {
    return json{{"chi", number(r.chi)},
                {"chi_argmax", number(r.chi_argmax)},
                {"singular_moment", number(r.singular_moment)},
                {"k3", number(r.k3)},
                {"moment_ok", r.moment_ok},
                {"sup_ok", r.sup_ok},
                {"verdict", to_string(r.verdict)},
                {"pass", r.pass()}};
}

json to_json(const Lemma1Profile& p) {
    json j{{"normalization", p.normalization == KernelNormalization::plain ? "plain" : "rescaled"},
           {"B_L1", number(p.B_L1)},
           {"B_L2", number(p.B_L2)},
           {"B_Linf", number(p.B_Linf)},
           {"B_star_L1", number(p.B_star_L1)},
           {"C_L1", number(p.C_L1)},
           {"C_L2", number(p.C_L2)},
           {"C_Linf", number(p.C_Linf)},
           {"C_star_L1", number(p.C_star_L1)},
           {"E_L1", number(p.E_L1)},
           {"C_tail_exponent", number(p.C_tail_exponent)},
           {"intermed0", p.intermed0},
           {"intermed1", p.intermed1},
           {"intermed2", p.intermed2},
           {"sign_changes", p.sign_changes},
           {"unique_zero", p.unique_zero},
           {"T0", number(p.T0)},
           {"mean", number(p.mean)},
           {"mean_zero", p.mean_zero},
           {"first_moment_abs", number(p.first_moment_abs)},
           {"alpha_moment_abs", number(p.alpha_moment_abs)},
           {"d_bound_holds", p.d_bound_holds},
           {"d_bound_worst_ratio", number(p.d_bound_worst_ratio)},
           {"d_bound_corrected_holds", p.d_bound_corrected_holds},
           {"d_bound_corrected_worst_ratio", number(p.d_bound_corrected_worst_ratio)}};
    j["t0"] = p.t0 ? number(*p.t0) : json(nullptr);
    return j;
}

json to_json(const Lemma2Report& r) {
    return json{{"k1", number(r.k1)},
                {"k2", number(r.k2)},
                {"gamma", number(r.gamma)},
                {"gamma_feasible", r.gamma_feasible},
                {"verdict_k1", to_string(r.verdict_k1)},
                {"verdict_k2", to_string(r.verdict_k2)},
                {"pass", r.pass()}};
}

json to_json(const FDivergence& d) {
    json rows = json::array();
    for (const auto& r : d.rows) {
        rows.push_back({{"t", number(r.t)}, {"running", number(r.running)}, {"lower_bound", number(r.lower_bound)}});
    }
    return json{{"vacuous", d.vacuous}, {"rows", rows}};
}

json to_json(const SolveResult& r) {
    json dist = json::array();
    for (double d : r.distances) dist.push_back(number(d));
    return json{{"case", to_string(r.which)},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"distances", dist},
                {"observed_ratio", number(r.observed_ratio)},
                {"predicted_k", number(r.predicted_k)},
                {"ratio_exceeded", r.ratio_exceeded},
                {"hypotheses_pass", r.hypotheses_pass},
                {"tail_budget", number(r.tail_budget)},
                {"gamma", number(r.gamma)},
                {"head", number(r.solution.head())},
                {"singular_exponent",
                 r.solution.is_singular() ? number(r.solution.singular_exponent()) : json(nullptr)}};
}

json to_json(const ResidualReport& r) {
    return json{{"operator_case", static_cast<int>(r.which)},
                {"sup", number(r.sup)},
                {"argmax", number(r.argmax)},
                {"nodes", r.end - r.begin}};
}

json to_json(const AsymptoticReport& r) {
    return json{{"case", to_string(r.which)},
                {"a_hat", number(r.a_hat)},
                {"b_hat", number(r.b_hat)},
                {"R", number(r.R)},
                {"R_quarter_to_half", number(r.R_quarter_to_half)},
                {"R_half_to_end", number(r.R_half_to_end)},
                {"bounded", r.bounded},
                {"max_abs_remainder", number(r.max_abs_remainder)},
                {"vanishing_bound", number(r.vanishing_bound)}};
}

json to_json(const BoundaryLimits& b) {
    json j = json::object();
    j["at_zero"] = b.at_zero ? number(*b.at_zero) : json(nullptr);
    j["at_zero_converged"] = b.at_zero_converged;
    j["at_infinity"] = b.at_infinity ? number(*b.at_infinity) : json(nullptr);
    j["infinity_node"] = number(b.infinity_node);
    return j;
}

json to_json(const Prop1Certificate& c) {
    json j{{"y0_abs", number(c.y0_abs)},
           {"y_L1", number(c.y_L1)},
           {"y_Linf", number(c.y_Linf)},
           {"x_prime_L1", number(c.x_prime_L1)},
           {"x_prime_Linf", number(c.x_prime_Linf)},
           {"tail_sup", number(c.tail_sup)},
           {"identity_lhs", number(c.identity_lhs)},
           {"finite", c.finite()}};
    j["identity_rhs"] = c.identity_rhs ? number(*c.identity_rhs) : json(nullptr);
    return j;
}

}  // namespace fracasym
