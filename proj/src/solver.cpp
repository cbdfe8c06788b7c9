#include "fracasym/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracasym/error.hpp"
#include "fracasym/quadrature.hpp"
#include "fracasym/specialfn.hpp"

namespace fracasym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Decay exponent used when the envelope declares a vanishing tail.
constexpr double kSteepTail = 50.0;

TailModel anchored_or_zero(double tmax, double last, double exponent) {
    if (last == 0.0 || !std::isfinite(last)) return TailModel::zero();
    return TailModel::anchored(tmax, last, exponent);
}

double envelope_exponent(const Coefficient& c) {
    if (!c.envelope()) {
        throw DomainError("coefficient has no declared envelope; the solver cannot close tails");
    }
    const TailModel& env = *c.envelope();
    if (env.kind == TailModel::Kind::zero || env.amplitude == 0.0) return kSteepTail;
    return env.exponent;
}

// a * x at the nodes; a singular head survives only when a(0) != 0.
GridFunction times_coefficient(const GridFunction& x, const SolveContext& ctx, double tail_exp) {
    const auto& av = ctx.coeff_nodes;
    const auto xv = x.values();
    std::vector<double> v(xv.size());
    for (std::size_t j = 1; j < v.size(); ++j) v[j] = av[j] * xv[j];
    std::optional<double> e;
    if (x.is_singular()) {
        if (av[0] != 0.0 && x.head() != 0.0) {
            v[0] = av[0] * x.head();
            e = x.singular_exponent();
        } else {
            v[0] = av[0] * x.regular_part()[0];
        }
    } else {
        v[0] = av[0] * xv[0];
    }
    const double tmax = x.grid().t_max();
    const double last = v.back();
    return GridFunction(x.grid_ptr(), std::move(v), anchored_or_zero(tmax, last, tail_exp), e);
}

void build_panel_moments(SolveContext& ctx) {
    const auto& a = ctx.spec.coeff;
    const auto t = ctx.spec.grid->nodes();
    const double al = ctx.spec.alpha.value();
    const std::size_t n = t.size() - 1;
    ctx.panel_lo.resize(n);
    ctx.panel_hi.resize(n);
    ctx.panel_head.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lo = t[k], hi = t[k + 1], h = hi - lo;
        ctx.panel_lo[k] = integrate_gk([&](double s) { return a(s) * (hi - s) / h; }, lo, hi).value;
        ctx.panel_hi[k] = integrate_gk([&](double s) { return a(s) * (s - lo) / h; }, lo, hi).value;
        if (k == 0) {
            // s = w^{1/alpha} absorbs s^{alpha-1}.
            ctx.panel_head[k] = integrate_gk([&](double w) { return a(std::pow(w, 1.0 / al)) / al; },
                                             0.0, std::pow(hi, al))
                                    .value;
        } else {
            ctx.panel_head[k] =
                integrate_gk([&](double s) { return a(s) * std::pow(s, al - 1.0); }, lo, hi).value;
        }
    }
}

// I^alpha ( int_s^inf a x ), shared by thm1 and thm2. The inner integral is
// exact for the coefficient against the piecewise-linear regular part of x.
GridFunction integral_part(const GridFunction& x, const SolveContext& ctx) {
    const auto t = x.grid().nodes();
    const std::size_t n = t.size() - 1;
    const auto r = x.regular_part();
    const double c = x.head();
    std::vector<double> phi(t.size());
    // x beyond t_max continues as the two-term fit through t_max / 2 and t_max.
    {
        const double al = ctx.spec.alpha.value();
        const double e0 = ctx.spec.which == SolveCase::thm2 ? al - 1.0 : 0.0;
        const std::size_t m = x.grid().lower_index(0.5 * t[n]);
        const double u0m = std::pow(t[m], e0), u0n = std::pow(t[n], e0);
        const double u1m = std::pow(t[m], al), u1n = std::pow(t[n], al);
        const double det = u0m * u1n - u0n * u1m;
        const double xm = x.values()[m], xn = x.values()[n];
        const double p = (xm * u1n - xn * u1m) / det;
        const double q = (u0m * xn - u0n * xm) / det;
        phi[n] = p * ctx.beyond_moment[0] + q * ctx.beyond_moment[1];
    }
    for (std::size_t k = n; k-- > 0;) {
        phi[k] = phi[k + 1] + r[k] * ctx.panel_lo[k] + r[k + 1] * ctx.panel_hi[k] +
                 c * ctx.panel_head[k];
    }
    return frac_integral(GridFunction(x.grid_ptr(), std::move(phi)), ctx.spec.alpha.value());
}

}  // namespace

const char* to_string(SolveCase c) {
    switch (c) {
        case SolveCase::thm1: return "thm1";
        case SolveCase::thm2: return "thm2";
        case SolveCase::thm3: return "thm3";
        case SolveCase::lemma2: return "lemma2";
    }
    return "thm1";
}

SolveCase solve_case_from_string(const std::string& s) {
    if (s == "thm1") return SolveCase::thm1;
    if (s == "thm2") return SolveCase::thm2;
    if (s == "thm3") return SolveCase::thm3;
    if (s == "lemma2") return SolveCase::lemma2;
    throw DomainError("unknown case '" + s + "' (expected thm1, thm2, thm3 or lemma2)");
}

void validate(const SolveSpec& spec) {
    if (!spec.grid) throw DomainError("solve: no grid");
    if (!std::isfinite(spec.a) || !std::isfinite(spec.b)) throw DomainError("solve: a, b must be finite");
    if (!(spec.T > 0.0) || !std::isfinite(spec.T)) throw DomainError("solve: T must be positive");
    if (spec.max_iterations < 1) throw DomainError("solve: iteration cap must be >= 1");
    if (!(spec.tolerance > 0.0)) throw DomainError("solve: tolerance must be positive");
    switch (spec.which) {
        case SolveCase::thm1:
        case SolveCase::thm2:
            if (spec.a == 0.0 && spec.b == 0.0) throw DomainError("solve: need a^2 + b^2 > 0");
            break;
        case SolveCase::thm3:
            if (spec.b == 0.0) throw DomainError("solve: thm3 needs b != 0");
            break;
        case SolveCase::lemma2:
            break;
    }
}

WeightedMetric case_metric(const SolveSpec& spec) {
    WeightedMetric m;
    m.alpha = spec.alpha.value();
    m.split = spec.T;
    switch (spec.which) {
        case SolveCase::thm1: m.kind = WeightedMetric::Kind::sup_over_t_alpha_after_T; break;
        case SolveCase::thm2: m.kind = WeightedMetric::Kind::rl_split; break;
        case SolveCase::thm3: m.kind = WeightedMetric::Kind::sup_t_one_minus_alpha; break;
        case SolveCase::lemma2: m.kind = WeightedMetric::Kind::max_sup_and_L1; break;
    }
    return m;
}

SolveContext make_context(const SolveSpec& spec) {
    validate(spec);
    SolveContext ctx;
    ctx.spec = spec;
    ctx.coeff_nodes = sample_coefficient(spec.coeff, *spec.grid);
    const double al = spec.alpha.value();
    switch (spec.which) {
        case SolveCase::thm1:
        case SolveCase::thm2:
            ctx.ax_tail_exponent = envelope_exponent(spec.coeff) - al;
            build_panel_moments(ctx);
            ctx.beyond_moment[0] = signed_moment(
                spec.coeff, spec.which == SolveCase::thm2 ? al - 1.0 : 0.0, spec.grid->t_max(), kInf);
            ctx.beyond_moment[1] = signed_moment(spec.coeff, al, spec.grid->t_max(), kInf);
            break;
        case SolveCase::thm3: {
            const double p = envelope_exponent(spec.coeff);
            ctx.ax_tail_exponent = p + 1.0 - al;
            ctx.first_moment = signed_moment(spec.coeff, 1.0, 0.0, kInf);
            const auto t = spec.grid->nodes();
            std::vector<double> sa(t.size());
            for (std::size_t j = 0; j < t.size(); ++j) sa[j] = t[j] * ctx.coeff_nodes[j];
            ctx.weighted_conv = frac_integral(GridFunction(spec.grid, std::move(sa)), al);
            break;
        }
        case SolveCase::lemma2:
            ctx.profile = lemma1_profile(spec.coeff, spec.alpha, spec.grid, spec.lemma_normalization);
            break;
    }
    return ctx;
}

GridFunction step_thm1(const GridFunction& x, const SolveContext& ctx) {
    const auto I = integral_part(x, ctx);
    const auto t = x.grid().nodes();
    const double al = ctx.spec.alpha.value();
    std::vector<double> v(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        v[j] = ctx.spec.a + ctx.spec.b * std::pow(t[j], al) + I.values()[j];
    }
    const double last = v.back();
    return GridFunction(x.grid_ptr(), std::move(v), anchored_or_zero(t.back(), last, -al));
}

GridFunction step_thm2(const GridFunction& x, const SolveContext& ctx) {
    const auto I = integral_part(x, ctx);
    const auto t = x.grid().nodes();
    const double al = ctx.spec.alpha.value();
    std::vector<double> v(t.size());
    v[0] = ctx.spec.a;
    for (std::size_t j = 1; j < t.size(); ++j) {
        v[j] = ctx.spec.a * std::pow(t[j], al - 1.0) + ctx.spec.b * std::pow(t[j], al) +
               I.values()[j];
    }
    const double last = v.back();
    return GridFunction(x.grid_ptr(), std::move(v), anchored_or_zero(t.back(), last, -al),
                        al - 1.0);
}

std::vector<double> inverse_square_tail(const GridFunction& y) {
    const auto t = y.grid().nodes();
    const std::size_t n = t.size() - 1;
    const auto r = y.regular_part();
    const double c = y.head();
    const double e = y.singular_exponent();
    auto head_part = [&](double tj) {
        return c == 0.0 ? 0.0 : c * std::pow(tj, e - 1.0) / (1.0 - e);
    };

    double beyond = 0.0;
    const TailModel& tail = y.tail();
    if (tail.kind == TailModel::Kind::power && tail.amplitude > 0.0) {
        // y ~ y(t_max) (t / t_max)^{-q} beyond the last node.
        beyond = y.values()[n] / (t[n] * (1.0 + tail.exponent));
    }
    std::vector<double> Y(t.size(), 0.0);
    double reg = beyond - head_part(t[n]);
    Y[n] = beyond;
    for (std::size_t k = n - 1; k >= 1; --k) {
        const double h = t[k + 1] - t[k];
        const double s = (r[k + 1] - r[k]) / h;
        reg += (r[k] - s * t[k]) * h / (t[k] * t[k + 1]) + s * std::log1p(h / t[k]);
        Y[k] = reg + head_part(t[k]);
    }
    return Y;
}

GridFunction step_thm3(const GridFunction& y, const SolveContext& ctx) {
    const auto t = y.grid().nodes();
    const std::size_t N = t.size();
    const double al = ctx.spec.alpha.value();
    const double ga = gamma(al);
    const auto& av = ctx.coeff_nodes;
    const auto Y = inverse_square_tail(y);

    std::vector<double> z(N);
    for (std::size_t j = 1; j < N; ++j) z[j] = av[j] * t[j] * Y[j];
    std::optional<double> ze;
    const double c = y.head();
    if (y.is_singular() && c != 0.0 && av[0] != 0.0) {
        ze = y.singular_exponent();
        z[0] = c * av[0] / (1.0 - y.singular_exponent());
    } else {
        z[0] = av[0] * y.regular_part()[0];
    }
    const double zlast = z.back();
    const GridFunction zf(y.grid_ptr(), std::move(z),
                          anchored_or_zero(t.back(), zlast, ctx.ax_tail_exponent), ze);
    const double zint = integrate(zf, 0.0);
    const auto Iz = frac_integral(zf, al);

    const double head = ctx.spec.a + ctx.spec.b * ctx.first_moment / ga - zint / ga;
    std::vector<double> v(N);
    v[0] = head;
    for (std::size_t j = 1; j < N; ++j) {
        v[j] = head * std::pow(t[j], al - 1.0) - ctx.spec.b * ctx.weighted_conv.values()[j] +
               Iz.values()[j];
    }
    const double last = v.back();
    return GridFunction(y.grid_ptr(), std::move(v), anchored_or_zero(t.back(), last, 1.0 - al),
                        al - 1.0);
}

GridFunction step_lemma2(const GridFunction& y, const GridFunction& C) {
    require_same_grid(y, C);
    const auto t = y.grid().nodes();
    const std::size_t N = t.size();
    const auto Ty = tail_integrals(y);
    std::vector<double> cy(N);
    for (std::size_t j = 0; j < N; ++j) cy[j] = C.values()[j] * y.values()[j];
    const double cexp = C.tail().kind == TailModel::Kind::power ? C.tail().exponent : kSteepTail;
    const double yexp = y.tail().kind == TailModel::Kind::power ? y.tail().exponent : kSteepTail;
    const double cylast = cy.back();
    const auto Tcy =
        tail_integrals(GridFunction(y.grid_ptr(), std::move(cy),
                                    anchored_or_zero(t.back(), cylast, cexp + yexp)));
    std::vector<double> v(N);
    for (std::size_t j = 0; j < N; ++j) v[j] = -C.values()[j] * (1.0 - Ty[j]) - Tcy[j];
    const double last = v.back();
    return GridFunction(y.grid_ptr(), std::move(v), anchored_or_zero(t.back(), last, cexp));
}

GridFunction apply_step(const GridFunction& v, const SolveContext& ctx) {
    switch (ctx.spec.which) {
        case SolveCase::thm1: return step_thm1(v, ctx);
        case SolveCase::thm2: return step_thm2(v, ctx);
        case SolveCase::thm3: return step_thm3(v, ctx);
        case SolveCase::lemma2: return step_lemma2(v, ctx.profile->C);
    }
    throw DomainError("unknown case");
}

GridFunction seed(const SolveContext& ctx) {
    const auto& grid = ctx.spec.grid;
    const double al = ctx.spec.alpha.value();
    const double a = ctx.spec.a, b = ctx.spec.b;
    switch (ctx.spec.which) {
        case SolveCase::thm1: {
            auto x = GridFunction::sample(grid, [&](double t) { return a + b * std::pow(t, al); });
            return x.with_tail(anchored_or_zero(grid->t_max(), x.values().back(), -al));
        }
        case SolveCase::thm2: {
            auto x = GridFunction::sample_singular(
                grid, [&](double t) { return a * std::pow(t, al - 1.0) + b * std::pow(t, al); },
                al - 1.0, a);
            return x.with_tail(anchored_or_zero(grid->t_max(), x.values().back(), -al));
        }
        case SolveCase::thm3:
            return GridFunction(grid, std::vector<double>(grid->size(), 0.0), TailModel::zero(),
                                al - 1.0);
        case SolveCase::lemma2:
            return linear_combination(-1.0, ctx.profile->C, 0.0, ctx.profile->C);
    }
    throw DomainError("unknown case");
}

GridFunction reconstruct_thm3(const GridFunction& y, double b) {
    const auto t = y.grid().nodes();
    const std::size_t N = t.size();
    const auto Y = inverse_square_tail(y);
    std::vector<double> x(N);
    for (std::size_t j = 1; j < N; ++j) x[j] = b * t[j] - t[j] * Y[j];
    std::optional<double> e;
    if (y.is_singular() && y.head() != 0.0) {
        e = y.singular_exponent();
        x[0] = -y.head() / (1.0 - *e);
    } else {
        x[0] = -y.regular_part()[0];
    }
    const double last = x.back();
    return GridFunction(y.grid_ptr(), std::move(x), anchored_or_zero(t.back(), last, -1.0), e);
}

Prop1Reconstruction reconstruct_prop1(const GridFunction& y) {
    Prop1Reconstruction out;
    const auto Ty = tail_integrals(y);
    std::vector<double> x(Ty.size());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = 1.0 - Ty[j];
    out.x = GridFunction(y.grid_ptr(), std::move(x));
    out.y0 = y.at(0);
    double sup = 0.0;
    for (double v : y.values()) sup = std::max(sup, std::fabs(v));
    out.x_prime_Linf = y.is_singular() && y.head() != 0.0 ? kInf : sup;
    std::vector<double> absy(y.size());
    for (std::size_t j = 0; j < absy.size(); ++j) absy[j] = std::fabs(y.values()[j]);
    const double last = absy.back();
    const double p = y.tail().kind == TailModel::Kind::power ? y.tail().exponent : kSteepTail;
    try {
        out.x_prime_L1 = integrate(
            GridFunction(y.grid_ptr(), std::move(absy), anchored_or_zero(y.grid().t_max(), last, p)),
            0.0);
    } catch (const DivergenceError&) {
        out.x_prime_L1 = kInf;
    }
    return out;
}

double observed_ratio(const std::vector<double>& distances, double floor) {
    double r = 0.0;
    for (std::size_t i = 3; i < distances.size(); ++i) {
        if (distances[i - 1] > floor && distances[i] > floor) {
            r = std::max(r, distances[i] / distances[i - 1]);
        }
    }
    return r;
}

SolveResult solve(const SolveSpec& spec) {
    const SolveContext ctx = make_context(spec);
    SolveResult res;
    res.which = spec.which;
    res.metric = case_metric(spec);
    const double al = spec.alpha.value();

    switch (spec.which) {
        case SolveCase::thm1: {
            const auto h = thm1_constants(spec.coeff, spec.alpha, spec.T);
            res.predicted_k = h.k;
            res.hypotheses_pass = h.pass();
            break;
        }
        case SolveCase::thm2: {
            const auto h = thm2_constants(spec.coeff, spec.alpha, spec.T, *spec.grid);
            res.predicted_k = h.k4;
            res.hypotheses_pass = h.pass();
            break;
        }
        case SolveCase::thm3: {
            const auto h = thm3_constants(spec.coeff, spec.alpha, spec.grid->t_max());
            res.predicted_k = h.k3;
            res.hypotheses_pass = h.pass();
            break;
        }
        case SolveCase::lemma2: {
            const auto h = lemma2_constants(*ctx.profile);
            res.predicted_k = h.pass_k1() ? h.k1 : h.k2;
            res.hypotheses_pass = h.pass();
            res.gamma = h.gamma;
            res.C = ctx.profile->C;
            break;
        }
    }
    if (!res.hypotheses_pass && !spec.override_hypotheses) {
        throw HypothesisError(std::string("hypotheses for ") + to_string(spec.which) +
                              " fail (k = " + std::to_string(res.predicted_k) + ")");
    }

    GridFunction cur = seed(ctx);
    for (int it = 0; it < spec.max_iterations; ++it) {
        GridFunction next = apply_step(cur, ctx);
        const double d = metric_distance(res.metric, next, cur);
        res.distances.push_back(d);
        cur = std::move(next);
        res.iterations = it + 1;
        if (d < spec.tolerance) {
            res.converged = true;
            break;
        }
        if (!std::isfinite(d) || d > 1e300) break;
    }

    const GridFunction zero = linear_combination(0.0, cur, 0.0, cur);
    const double scale = std::max(metric_distance(res.metric, cur, zero), 1.0);
    res.observed_ratio = observed_ratio(res.distances, 1e-12 * scale);
    res.ratio_exceeded = res.observed_ratio > res.predicted_k + 0.05;

    const double tmax = spec.grid->t_max();
    switch (spec.which) {
        case SolveCase::thm1:
        case SolveCase::thm2: {
            const auto ax = times_coefficient(cur, ctx, ctx.ax_tail_exponent);
            double tail = 0.0;
            try {
                tail = std::fabs(integrate(ax, tmax));
            } catch (const DivergenceError&) {
                tail = kInf;
            }
            res.tail_budget = tail / gamma(1.0 + al);
            res.solution = cur;
            break;
        }
        case SolveCase::thm3: {
            res.y = cur;
            res.solution = reconstruct_thm3(cur, spec.b);
            const auto Y = inverse_square_tail(cur);
            const double zlast = ctx.coeff_nodes.back() * tmax * Y.back();
            const double p = ctx.ax_tail_exponent;
            res.tail_budget = p > 1.0 ? std::fabs(zlast) * tmax / (p - 1.0) / gamma(al) : kInf;
            break;
        }
        case SolveCase::lemma2: {
            res.y = cur;
            res.solution = reconstruct_prop1(cur).x;
            double tail = 0.0;
            try {
                tail = std::fabs(integrate(cur, tmax));
            } catch (const DivergenceError&) {
                tail = kInf;
            }
            res.tail_budget = tail * (1.0 + ctx.profile->C_Linf);
            break;
        }
    }
    return res;
}

}  // namespace fracasym
