#include "fracasym/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "fracasym/error.hpp"
#include "fracasym/hypotheses.hpp"
#include "fracasym/serialize.hpp"
#include "fracasym/verify.hpp"

namespace fracasym {

#ifndef FRACASYM_VERSION
#define FRACASYM_VERSION "0.0.0"
#endif

std::vector<double> SweepAxis::values() const {
    std::vector<double> v;
    for (int i = 0; i < steps; ++i) {
        const double f = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        v.push_back(log ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
    }
    return v;
}

SweepAxis parse_sweep_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("sweep axis needs param=lo:hi:steps");
    SweepAxis ax;
    ax.param = text.substr(0, eq);
    if (ax.param != "alpha" && ax.param != "amplitude" && ax.param != "T") {
        throw ParseError("sweep param must be alpha, amplitude or T, got '" + ax.param + "'");
    }
    std::vector<std::string> parts;
    std::size_t pos = eq + 1;
    while (true) {
        const auto c = text.find(':', pos);
        parts.push_back(text.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (parts.size() != 3 && !(parts.size() == 4 && parts[3] == "log")) {
        throw ParseError("sweep axis '" + text + "' is not lo:hi:steps[:log]");
    }
    try {
        std::size_t used = 0;
        ax.lo = std::stod(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("lo");
        ax.hi = std::stod(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("hi");
        ax.steps = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument("steps");
    } catch (const std::logic_error&) {
        throw ParseError("sweep axis '" + text + "' has a malformed number");
    }
    ax.log = parts.size() == 4;
    if (ax.steps < 0 || !std::isfinite(ax.lo) || !std::isfinite(ax.hi)) {
        throw ParseError("sweep axis '" + text + "' has a bad range");
    }
    if (ax.log && ax.steps > 0 && !(ax.lo > 0.0 && ax.hi > 0.0)) {
        throw ParseError("log sweep needs positive bounds");
    }
    return ax;
}

void RunConfig::validate() const {
    Alpha check(alpha);
    (void)check;
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("--tmax must be positive");
    if (nodes < 256) throw DomainError("--nodes must be at least 256");
    if (!(grading >= 1.0) || !std::isfinite(grading)) throw DomainError("--grading must be >= 1");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("--T must be positive");
    if (!(residual_tolerance > 0.0)) throw DomainError("residual tolerance must be positive");
}

SolveSpec RunConfig::solve_spec() const {
    SolveSpec s;
    s.which = which.value_or(SolveCase::thm1);
    s.alpha = Alpha(alpha);
    s.a = a;
    s.b = b;
    s.T = T;
    s.coeff = coeff.value_or(Coefficient::zero());
    s.grid = make_graded_grid(t_max, nodes, grading);
    s.max_iterations = max_iterations;
    s.tolerance = tolerance;
    s.override_hypotheses = override_hypotheses;
    return s;
}

namespace {

json config_json(const RunConfig& c) {
    json j{{"alpha", number(c.alpha)},
           {"a", number(c.a)},
           {"b", number(c.b)},
           {"T", number(c.T)},
           {"grid", {{"t_max", number(c.t_max)}, {"nodes", c.nodes}, {"grading", number(c.grading)}}}};
    j["case"] = c.which ? json(to_string(*c.which)) : json(nullptr);
    j["coefficient"] = c.coeff ? coefficient_summary(*c.coeff) : json(nullptr);
    return j;
}

void prepare_out(const RunConfig& c) {
    if (c.out) std::filesystem::create_directories(*c.out);
}

void emit(std::ostream& os, const json& report) { os << report.dump(2) << '\n'; }

const Coefficient& require_coeff(const RunConfig& c) {
    if (!c.coeff) throw ParseError(c.command + " needs --coeff");
    return *c.coeff;
}

struct CaseCheck {
    json report;
    bool pass = false;
    double k = NAN;
    double k_aux = NAN;
};

CaseCheck check_case(SolveCase which, const Coefficient& a, Alpha alpha, double T,
                     const GridPtr& grid) {
    CaseCheck out;
    try {
        switch (which) {
            case SolveCase::thm1: {
                const auto r = thm1_constants(a, alpha, T);
                out = {to_json(r), r.pass(), r.k, NAN};
                break;
            }
            case SolveCase::thm2: {
                const auto r = thm2_constants(a, alpha, T, *grid);
                out = {to_json(r), r.pass(), r.k4, NAN};
                break;
            }
            case SolveCase::thm3: {
                const auto r = thm3_constants(a, alpha, grid->t_max());
                out = {to_json(r), r.pass(), r.k3, NAN};
                break;
            }
            case SolveCase::lemma2: {
                const auto p = lemma1_profile(a, alpha, grid);
                const auto r = lemma2_constants(p);
                out.report = {{"lemma1", to_json(p)}, {"lemma2", to_json(r)}};
                out.pass = r.pass();
                out.k = r.k1;
                out.k_aux = r.k2;
                break;
            }
        }
    } catch (const DivergenceError& e) {
        out.report = {{"error", e.what()}, {"pass", false}};
        out.pass = false;
    }
    return out;
}

constexpr SolveCase kAllCases[] = {SolveCase::thm1, SolveCase::thm2, SolveCase::thm3,
                                   SolveCase::lemma2};

}  // namespace

int cmd_check(const RunConfig& config, std::ostream& os) {
    config.validate();
    const auto& a = require_coeff(config);
    const auto grid = make_graded_grid(config.t_max, config.nodes, config.grading);
    const Alpha alpha(config.alpha);

    json report{{"command", "check"}, {"config", config_json(config)}};
    bool all = true;
    std::vector<SolveCase> cases;
    if (config.which) cases.push_back(*config.which);
    else cases.assign(std::begin(kAllCases), std::end(kAllCases));
    for (auto c : cases) {
        auto r = check_case(c, a, alpha, config.T, grid);
        report[to_string(c)] = std::move(r.report);
        all = all && r.pass;
    }
    report["pass"] = all;
    prepare_out(config);
    if (config.out) write_json(*config.out / "check.json", report);
    emit(os, report);
    return all ? kExitOk : kExitHypothesis;
}

int cmd_solve(const RunConfig& config, std::ostream& os) {
    config.validate();
    require_coeff(config);
    const auto spec = config.solve_spec();
    const auto res = solve(spec);

    json report{{"command", "solve"}, {"config", config_json(config)}, {"result", to_json(res)}};
    prepare_out(config);
    if (config.out) {
        write_json(*config.out / "solve.json", report);
        write_csv(*config.out / "solution.csv", grid_function_table(res.solution, "x"));
        write_json(*config.out / "coefficient.json", coefficient_to_json(spec.coeff));
        if (res.y) write_csv(*config.out / "y.csv", grid_function_table(*res.y, "y"));
        if (res.C) write_csv(*config.out / "C.csv", grid_function_table(*res.C, "C"));
    }
    emit(os, report);
    return res.converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(const RunConfig& config, std::ostream& os) {
    config.validate();
    const auto which = config.which.value_or(SolveCase::thm1);
    std::filesystem::path input;
    if (config.input) input = *config.input;
    else if (config.out) input = *config.out / "solution.csv";
    else throw ParseError("verify needs --input or --out");

    const Alpha alpha(config.alpha);
    const bool singular = which == SolveCase::thm2 || which == SolveCase::thm3;
    const auto x = read_grid_function(input, singular ? std::optional<double>(alpha - 1.0) : std::nullopt);
    // Without --coeff, use the coefficient a solve left next to the solution;
    // failing that, the homogeneous equation.
    std::string coeff_from = "--coeff";
    std::optional<Coefficient> found = config.coeff;
    if (!found) {
        const auto side = input.parent_path() / "coefficient.json";
        if (std::filesystem::exists(side)) {
            found = load_coefficient(side);
            coeff_from = side.generic_string();
        } else {
            coeff_from = "none (homogeneous)";
        }
    }
    const auto coeff = found.value_or(Coefficient::zero());

    const auto res = residual(x, operator_case(which), coeff, alpha);
    const double a_true = which == SolveCase::lemma2 ? 1.0 : config.a;
    const double b_true = which == SolveCase::lemma2 ? 0.0 : config.b;
    const auto fit = asymptotic_fit(x, which, alpha, a_true, b_true);
    const auto limits = boundary_limits(x, which, alpha);
    const bool pass = res.sup <= config.residual_tolerance;

    json report{{"command", "verify"},
                {"config", config_json(config)},
                {"input", input.generic_string()},
                {"coefficient", found ? coefficient_summary(coeff) : json(nullptr)},
                {"coefficient_from", coeff_from},
                {"residual", to_json(res)},
                {"residual_tolerance", number(config.residual_tolerance)},
                {"asymptotic", to_json(fit)},
                {"boundary_limits", to_json(limits)},
                {"pass", pass}};
    if (which == SolveCase::lemma2) {
        const auto ypath = input.parent_path() / "y.csv";
        const auto cpath = input.parent_path() / "C.csv";
        if (std::filesystem::exists(ypath)) {
            const auto y = read_grid_function(ypath);
            report["prop1"] = to_json(std::filesystem::exists(cpath)
                                          ? prop1_certify(y, read_grid_function(cpath))
                                          : prop1_certify(y));
        }
    }

    prepare_out(config);
    if (config.out) {
        write_json(*config.out / "verify.json", report);
        CsvTable curves;
        curves.header = {"t", "x", "head", "weighted_remainder", "residual"};
        const auto t = x.grid().nodes();
        curves.columns = {{t.begin(), t.end()},
                          {x.values().begin(), x.values().end()},
                          {fit.head.values().begin(), fit.head.values().end()},
                          {fit.weighted_remainder.values().begin(), fit.weighted_remainder.values().end()},
                          {res.curve.values().begin(), res.curve.values().end()}};
        write_csv(*config.out / "curves.csv", curves);
    }
    emit(os, report);
    return pass ? kExitOk : kExitVerification;
}

namespace {

struct SweepCell {
    double alpha = 0.5, amplitude = 1.0, T = 1.0;
    double k = NAN, k_aux = NAN, observed_ratio = NAN;
    bool pass = false;
    std::string status = "ok";
};

void run_cell(SweepCell& cell, const RunConfig& config, const Coefficient& base, SolveCase which,
              const GridPtr& grid) {
    try {
        const Alpha alpha(cell.alpha);
        const auto a = base.scaled(cell.amplitude);
        const auto r = check_case(which, a, alpha, cell.T, grid);
        cell.k = r.k;
        cell.k_aux = r.k_aux;
        cell.pass = r.pass;
        if (r.report.contains("error")) cell.status = r.report["error"].get<std::string>();
        if (config.sweep_solve && (r.pass || config.override_hypotheses)) {
            auto spec = config.solve_spec();
            spec.which = which;
            spec.alpha = alpha;
            spec.coeff = a;
            spec.T = cell.T;
            spec.grid = grid;
            spec.override_hypotheses = true;
            const auto res = solve(spec);
            cell.observed_ratio = res.observed_ratio;
            if (!res.converged) cell.status = "not converged";
        }
    } catch (const std::exception& e) {
        cell.status = e.what();
    }
    for (auto& ch : cell.status) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
}

}  // namespace

int cmd_sweep(const RunConfig& config, std::ostream& os) {
    config.validate();
    const auto& base = require_coeff(config);
    const auto which = config.which.value_or(SolveCase::thm1);
    const auto grid = make_graded_grid(config.t_max, config.nodes, config.grading);

    std::map<std::string, std::vector<double>> axes{
        {"alpha", {config.alpha}}, {"amplitude", {1.0}}, {"T", {config.T}}};
    for (const auto& ax : config.sweep) axes[ax.param] = ax.values();

    // Alpha outermost, then amplitude, then T.
    std::vector<SweepCell> cells;
    for (double al : axes["alpha"]) {
        for (double lam : axes["amplitude"]) {
            for (double T : axes["T"]) {
                SweepCell c;
                c.alpha = al;
                c.amplitude = lam;
                c.T = T;
                cells.push_back(c);
            }
        }
    }

    std::atomic<std::size_t> next{0};
    const std::size_t workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), cells.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
                run_cell(cells[i], config, base, which, grid);
            }
        });
    }
    for (auto& th : pool) th.join();

    json rows = json::array();
    std::size_t failures = 0;
    for (const auto& c : cells) {
        if (c.status != "ok") ++failures;
        rows.push_back({{"alpha", number(c.alpha)},
                        {"amplitude", number(c.amplitude)},
                        {"T", number(c.T)},
                        {"k", number(c.k)},
                        {"k_aux", number(c.k_aux)},
                        {"pass", c.pass},
                        {"observed_ratio", number(c.observed_ratio)},
                        {"status", c.status}});
    }
    json report{{"command", "sweep"},
                {"config", config_json(config)},
                {"case", to_string(which)},
                {"cells", cells.size()},
                {"failures", failures},
                {"rows", rows}};

    prepare_out(config);
    if (config.out) {
        write_json(*config.out / "sweep.json", report);
        std::ofstream csv(*config.out / "sweep.csv", std::ios::binary);
        csv << "alpha,amplitude,T,k,k_aux,pass,observed_ratio,status\n";
        for (const auto& c : cells) {
            csv << format_full(c.alpha) << ',' << format_full(c.amplitude) << ',' << format_full(c.T) << ','
                << format_full(c.k) << ',' << format_full(c.k_aux) << ',' << (c.pass ? 1 : 0) << ','
                << format_full(c.observed_ratio) << ',' << c.status << '\n';
        }
    }
    emit(os, report);
    return kExitOk;
}

namespace {

struct Flags {
    std::string config, coeff, which, out, input;
    double alpha = 0, a = 0, b = 0, T = 0, tmax = 0, grading = 0, tolerance = 0, residual_tolerance = 0;
    std::size_t nodes = 0;
    int max_iterations = 0;
    bool override_hypotheses = false, sweep_solve = false;
    std::vector<std::string> sweep;
    std::map<std::string, CLI::Option*> opts;

    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }
};

void add_flags(CLI::App* app, Flags& f) {
    f.opts["config"] = app->add_option("--config", f.config, "JSON run configuration");
    f.opts["coeff"] = app->add_option("--coeff", f.coeff, "coefficient JSON file");
    f.opts["alpha"] = app->add_option("--alpha", f.alpha, "fractional order in [0.05, 0.95]");
    f.opts["case"] = app->add_option("--case", f.which, "thm1, thm2, thm3 or lemma2");
    f.opts["a"] = app->add_option("--a", f.a, "coefficient of the eventually small solution");
    f.opts["b"] = app->add_option("--b", f.b, "coefficient of the eventually large solution");
    f.opts["T"] = app->add_option("--T", f.T, "split point of the weighted metric");
    f.opts["tmax"] = app->add_option("--tmax", f.tmax, "truncation horizon");
    f.opts["nodes"] = app->add_option("--nodes", f.nodes, "grid intervals");
    f.opts["grading"] = app->add_option("--grading", f.grading, "grid grading exponent");
    f.opts["tolerance"] = app->add_option("--tolerance", f.tolerance, "Picard stopping distance");
    f.opts["max_iterations"] = app->add_option("--max-iterations", f.max_iterations, "Picard iteration cap");
    f.opts["residual_tolerance"] =
        app->add_option("--residual-tolerance", f.residual_tolerance, "verify: residual bound");
    f.opts["out"] = app->add_option("--out", f.out, "output directory");
    f.opts["input"] = app->add_option("--input", f.input, "verify: solution CSV");
    f.opts["override_hypotheses"] =
        app->add_flag("--override-hypotheses", f.override_hypotheses, "solve even when hypotheses fail");
    f.opts["sweep_solve"] = app->add_flag("--sweep-solve", f.sweep_solve, "sweep: also solve passing cells");
    f.opts["sweep"] = app->add_option("--sweep", f.sweep, "param=lo:hi:steps[:log]");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
    const auto j = read_json(path);
    if (!j.is_object()) throw ParseError(path.string() + ": configuration must be an object");
    const auto dir = path.parent_path();
    for (const auto& [key, v] : j.items()) {
        const char* k = key.c_str();
        if (key == "coeff") {
            c.coeff = v.is_string() ? load_coefficient(resolve(dir, v.get<std::string>()))
                                    : coefficient_from_json(v);
        } else if (key == "alpha") c.alpha = read_number(v, k);
        else if (key == "case") {
            if (!v.is_string()) throw ParseError("\"case\" must be a string");
            c.which = solve_case_from_string(v.get<std::string>());
        } else if (key == "a") c.a = read_number(v, k);
        else if (key == "b") c.b = read_number(v, k);
        else if (key == "T") c.T = read_number(v, k);
        else if (key == "tmax") c.t_max = read_number(v, k);
        else if (key == "nodes") {
            if (!v.is_number_unsigned()) throw ParseError("\"nodes\" must be a positive integer");
            c.nodes = v.get<std::size_t>();
        } else if (key == "grading") c.grading = read_number(v, k);
        else if (key == "tolerance") c.tolerance = read_number(v, k);
        else if (key == "residual_tolerance") c.residual_tolerance = read_number(v, k);
        else if (key == "max_iterations") {
            if (!v.is_number_integer()) throw ParseError("\"max_iterations\" must be an integer");
            c.max_iterations = v.get<int>();
        } else if (key == "override_hypotheses") {
            if (!v.is_boolean()) throw ParseError("\"override_hypotheses\" must be a boolean");
            c.override_hypotheses = v.get<bool>();
        } else if (key == "out") c.out = resolve(dir, v.get<std::string>());
        else if (key == "input") c.input = resolve(dir, v.get<std::string>());
        else if (key == "sweep") {
            if (v.is_string()) c.sweep.push_back(parse_sweep_axis(v.get<std::string>()));
            else if (v.is_array()) {
                for (const auto& s : v) {
                    if (!s.is_string()) throw ParseError("\"sweep\" entries must be strings");
                    c.sweep.push_back(parse_sweep_axis(s.get<std::string>()));
                }
            } else throw ParseError("\"sweep\" must be a string or an array of strings");
        } else {
            throw ParseError(path.string() + ": unknown key \"" + key + "\"");
        }
    }
}

RunConfig build_config(const std::string& command, const Flags& f) {
    RunConfig c;
    c.command = command;
    if (f.given("config")) apply_config_file(c, f.config);
    if (f.given("coeff")) c.coeff = load_coefficient(f.coeff);
    if (f.given("alpha")) c.alpha = f.alpha;
    if (f.given("case")) c.which = solve_case_from_string(f.which);
    if (f.given("a")) c.a = f.a;
    if (f.given("b")) c.b = f.b;
    if (f.given("T")) c.T = f.T;
    if (f.given("tmax")) c.t_max = f.tmax;
    if (f.given("nodes")) c.nodes = f.nodes;
    if (f.given("grading")) c.grading = f.grading;
    if (f.given("tolerance")) c.tolerance = f.tolerance;
    if (f.given("max_iterations")) c.max_iterations = f.max_iterations;
    if (f.given("residual_tolerance")) c.residual_tolerance = f.residual_tolerance;
    if (f.given("out")) c.out = f.out;
    if (f.given("input")) c.input = f.input;
    if (f.override_hypotheses) c.override_hypotheses = true;
    if (f.sweep_solve) c.sweep_solve = true;
    if (f.given("sweep")) {
        c.sweep.clear();
        for (const auto& s : f.sweep) c.sweep.push_back(parse_sweep_axis(s));
    }
    return c;
}

void write_meta(const RunConfig& c, int argc, char** argv) {
    if (!c.out) return;
    json args = json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    write_json(*c.out / "meta.json",
               {{"tool", "fracasym"}, {"version", FRACASYM_VERSION}, {"argv", args}, {"utc", stamp}});
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Asymptotic integration of fractional differential equations"};
    app.require_subcommand(1);
    std::map<std::string, int (*)(const RunConfig&, std::ostream&)> commands{
        {"check", cmd_check}, {"solve", cmd_solve}, {"verify", cmd_verify}, {"sweep", cmd_sweep}};
    const std::map<std::string, std::string> help{
        {"check", "evaluate the contraction hypotheses"},
        {"solve", "iterate the integral operator to its fixed point"},
        {"verify", "residual, asymptotic fit and boundary limits of a solution"},
        {"sweep", "hypothesis constants over a parameter grid"}};
    std::map<std::string, Flags> per;
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        add_flags(sub, per[name]);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    for (const auto& [name, fn] : commands) {
        if (!app.got_subcommand(name)) continue;
        try {
            const auto config = build_config(name, per[name]);
            if (config.out) std::filesystem::create_directories(*config.out);
            const int code = fn(config, std::cout);
            write_meta(config, argc, argv);
            return code;
        } catch (const HypothesisError& e) {
            std::cerr << "hypothesis failure: " << e.what() << '\n';
            return kExitHypothesis;
        } catch (const DivergenceError& e) {
            std::cerr << "divergence: " << e.what() << '\n';
            return kExitHypothesis;
        } catch (const std::exception& e) {
            std::cerr << "input error: " << e.what() << '\n';
            return kExitInput;
        }
    }
    return kExitInput;
}

}  // namespace fracasym
