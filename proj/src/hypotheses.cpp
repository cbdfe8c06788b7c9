#include "fracasym/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fracasym/error.hpp"
#include "fracasym/quadrature.hpp"
#include "fracasym/specialfn.hpp"

namespace fracasym {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-13;
constexpr double kMeanZeroTol = 1e-10;

std::vector<double> breaks_inside(const Coefficient& a, double lo, double hi) {
    std::vector<double> out;
    if (a.is_expression()) return out;
    for (const auto& [t, v] : a.samples()) {
        if (t > lo && t < hi) out.push_back(t);
    }
    return out;
}

QuadResult integrate_pieces(const ScalarFn& f, double lo, double hi, std::vector<double> breaks,
                            double rel_tol = kQuadTol) {
    std::sort(breaks.begin(), breaks.end());
    QuadResult total;
    double left = lo;
    breaks.push_back(hi);
    for (double right : breaks) {
        if (right <= left) continue;
        const auto part = integrate_gk(f, left, right, rel_tol);
        total.value += part.value;
        total.abs_value += part.abs_value;
        total.error += part.error;
        total.intervals += part.intervals;
        left = right;
    }
    return total;
}

const TailModel& require_envelope(const Coefficient& a) {
    if (!a.envelope()) {
        throw DomainError("coefficient has no declared envelope; tail integrals refused");
    }
    return *a.envelope();
}

// int_lo^hi s^q g(a(s)) ds on a finite interval, with s^q absorbed by the
// substitution w = s^{q+1} on [0, 1] when -1 < q < 0.
double finite_moment(const Coefficient& a, double q, double lo, double hi, bool absolute) {
    if (!(hi > lo)) return 0.0;
    auto g = [&](double s) { return absolute ? std::fabs(a(s)) : a(s); };
    double sum = 0.0;
    double start = lo;
    if (q < 0.0 && q > -1.0 && lo == 0.0) {
        const double cut = std::min(hi, 1.0);
        const double r = q + 1.0;
        auto f = [&](double w) { return g(std::pow(w, 1.0 / r)) / r; };
        std::vector<double> wb;
        for (double b : breaks_inside(a, 0.0, cut)) wb.push_back(std::pow(b, r));
        sum += integrate_pieces(f, 0.0, std::pow(cut, r), wb).value;
        start = cut;
    }
    if (hi > start) {
        auto f = [&](double s) { return std::pow(s, q) * g(s); };
        sum += integrate_pieces(f, start, hi, breaks_inside(a, start, hi)).value;
    }
    return sum;
}

double moment(const Coefficient& a, double q, double lo, double hi, bool absolute) {
    if (!(lo >= 0.0) || !(hi >= lo)) throw DomainError("moment: bad interval");
    if (std::isfinite(hi)) return finite_moment(a, q, lo, hi, absolute);
    const TailModel& env = require_envelope(a);
    if (env.kind != TailModel::Kind::zero && env.amplitude != 0.0 && env.exponent - q <= 1.0) {
        throw DivergenceError("envelope exponent " + std::to_string(env.exponent) +
                              " cannot close the moment of order " + std::to_string(q));
    }
    const double split = std::max({lo, 1.0, env.valid_from});
    const double head = finite_moment(a, q, lo, split, absolute);
    auto bound = [&](double R) {
        if (R < env.valid_from) return kInf;
        if (env.kind == TailModel::Kind::zero || env.amplitude == 0.0) return 0.0;
        return env.amplitude * std::pow(R, q + 1.0 - env.exponent) / (env.exponent - q - 1.0);
    };
    // |f| integrals close with the envelope bound itself (an upper bound);
    // signed integrals only use it as the truncation criterion.
    auto tail_value = [&](double R) { return absolute ? bound(R) : 0.0; };
    auto f = [&](double s) {
        const double v = a(s);
        return std::pow(s, q) * (absolute ? std::fabs(v) : v);
    };
    const double limit = a.eval_limit();
    if (limit <= split) return head + tail_value(split);
    const auto rest = integrate_gk_semi_infinite(f, split, bound, tail_value, kQuadTol, limit);
    return head + rest.value;
}

double fitted_local_exponent(const Coefficient& a, const GradedGrid& grid) {
    const auto t = grid.nodes();
    std::vector<double> x, y;
    for (std::size_t j = 1; j < t.size() && t[j] <= 10.0 * t[1] * (1.0 + 1e-12); ++j) {
        const double v = std::fabs(a(t[j]));
        if (v > 0.0) {
            x.push_back(std::log(t[j]));
            y.push_back(std::log(v));
        }
    }
    if (x.empty()) return kInf;
    if (x.size() == 1) return 0.0;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

template <class F>
double golden_max(F&& f, double lo, double hi, double& arg) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-10 * std::max(1.0, std::fabs(a) + std::fabs(b))) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if (fc >= fd) {
        arg = c;
        return fc;
    }
    arg = d;
    return fd;
}

std::vector<double> sup_from_right(std::span<const double> v, double beyond) {
    std::vector<double> out(v.size());
    double m = beyond;
    for (std::size_t j = v.size(); j-- > 0;) {
        m = std::max(m, v[j]);
        out[j] = m;
    }
    return out;
}

// Trapezoid over the nodes plus a power tail; +inf when the tail diverges.
double norm_with_tail(const GridPtr& grid, std::vector<double> values, double tail_exponent) {
    const double last = values.back();
    GridFunction f(grid, std::move(values),
                   last == 0.0 ? TailModel::zero()
                               : TailModel::anchored(grid->t_max(), last, tail_exponent));
    try {
        return integrate(f, 0.0);
    } catch (const DivergenceError&) {
        return kInf;
    }
}

}  // namespace

Verdict judge_contraction(double k) {
    if (!(k <= 1.0 - kContractionMargin)) {
        return (k < 1.0 + kContractionMargin) ? Verdict::inconclusive : Verdict::fail;
    }
    return Verdict::pass;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "fail";
}

double abs_moment(const Coefficient& a, double q, double lo, double hi) {
    return moment(a, q, lo, hi, true);
}

double signed_moment(const Coefficient& a, double q, double lo, double hi) {
    return moment(a, q, lo, hi, false);
}

Thm1Report thm1_constants(const Coefficient& a, Alpha alpha, double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("thm1: T must be positive");
    const double al = alpha.value();
    Thm1Report r;
    r.T = T;
    r.C0 = abs_moment(a, 0.0, 0.0, T) + abs_moment(a, al, T, kInf);
    try {
        r.C1 = abs_moment(a, 1.0, 0.0, T) + abs_moment(a, 1.0 + al, T, kInf);
    } catch (const DivergenceError&) {
        r.C1 = kInf;
        r.tail_ok = false;
    }
    r.k = std::max(1.0, std::pow(T, al)) * r.C0 / gamma(1.0 + al);
    r.verdict = judge_contraction(r.k);
    return r;
}

Thm2Report thm2_constants(const Coefficient& a, Alpha alpha, double T, const GradedGrid& grid) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("thm2: T must be positive");
    const double al = alpha.value();
    Thm2Report r;
    r.T = T;
    r.local_exponent = fitted_local_exponent(a, grid);
    r.near_zero_ok = r.local_exponent > al;
    try {
        abs_moment(a, 1.0 + al, T, kInf);
    } catch (const DivergenceError&) {
        r.tail_ok = false;
    }
    if (!r.near_zero_ok) {
        r.k4 = kInf;
        r.verdict = Verdict::fail;
        return r;
    }
    r.k4 = std::max(1.0, T) / gamma(1.0 + al) *
           (abs_moment(a, -1.0 - al, 0.0, T) + abs_moment(a, al, T, kInf));
    r.verdict = judge_contraction(r.k4);
    return r;
}

double chi_functional(const Coefficient& a, Alpha alpha, double t) {
    if (!(t > 0.0)) return 0.0;
    const double al = alpha.value();
    const double half = std::pow(0.5 * t, al);
    const double inv = 1.0 / al;
    // s = w^{1/alpha} near s = 0, s = t - v^{1/alpha} near s = t.
    auto left = [&](double w) {
        const double s = std::pow(w, inv);
        return std::fabs(a(s)) * std::pow(t - s, al - 1.0) * inv;
    };
    auto right = [&](double v) {
        const double s = t - std::pow(v, inv);
        return std::fabs(a(s)) * std::pow(s, al - 1.0) * inv;
    };
    std::vector<double> lb, rb;
    for (double b : breaks_inside(a, 0.0, t)) {
        if (b < 0.5 * t) lb.push_back(std::pow(b, al));
        else if (b > 0.5 * t) rb.push_back(std::pow(t - b, al));
    }
    const double J = integrate_pieces(left, 0.0, half, lb).value +
                     integrate_pieces(right, 0.0, half, rb).value;
    return std::pow(t, 1.0 - al) * J;
}

Thm3Report thm3_constants(const Coefficient& a, Alpha alpha, double t_max) {
    const double al = alpha.value();
    Thm3Report r;
    try {
        abs_moment(a, 1.0, 0.0, kInf);
    } catch (const DivergenceError&) {
        r.moment_ok = false;
        r.sup_ok = false;
    }
    r.singular_moment = abs_moment(a, al - 1.0, 0.0, kInf);

    constexpr double kScanFrom = 1e-4;
    constexpr int kPerDecade = 128;
    const double top = std::min(t_max, a.eval_limit());
    const int count =
        std::max(2, static_cast<int>(std::ceil(kPerDecade * std::log10(top / kScanFrom))) + 1);
    std::vector<double> lt(count), val(count);
    const double l0 = std::log(kScanFrom), l1 = std::log(top);
    for (int i = 0; i < count; ++i) {
        lt[i] = l0 + (l1 - l0) * i / (count - 1);
        val[i] = chi_functional(a, alpha, std::exp(lt[i]));
    }
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + std::min(3, count), order.end(),
                      [&](int x, int y) { return val[x] > val[y] || (val[x] == val[y] && x < y); });
    double best = 0.0;
    double arg = 0.0;
    for (int c = 0; c < std::min(3, count); ++c) {
        const int i = order[c];
        const double lo = lt[std::max(0, i - 1)];
        const double hi = lt[std::min(count - 1, i + 1)];
        double la = lt[i];
        double v = golden_max([&](double l) { return chi_functional(a, alpha, std::exp(l)); }, lo,
                              hi, la);
        if (val[i] > v) {
            v = val[i];
            la = lt[i];
        }
        if (v > best) {
            best = v;
            arg = std::exp(la);
        }
    }
    if (r.singular_moment > best) {
        best = r.singular_moment;
        arg = kInf;
    }
    r.chi = best;
    r.chi_argmax = arg;
    r.k3 = (r.singular_moment + r.chi) / gamma(al);
    r.verdict = judge_contraction(r.k3);
    return r;
}

Lemma1Profile lemma1_profile(const Coefficient& a, Alpha alpha, const GridPtr& grid,
                             KernelNormalization norm) {
    const double al = alpha.value();
    const auto t = grid->nodes();
    const std::size_t N = t.size();
    const double tmax = grid->t_max();
    const TailModel& env = require_envelope(a);
    const auto av = sample_coefficient(a, *grid);

    Lemma1Profile p;
    p.normalization = norm;

    // Sign structure and mean.
    {
        double prev = 0.0;
        std::size_t prev_j = 0;
        for (std::size_t j = 0; j < N; ++j) {
            if (av[j] == 0.0) continue;
            if (prev != 0.0 && (av[j] > 0.0) != (prev > 0.0)) {
                ++p.sign_changes;
                if (p.sign_changes == 1) {
                    double lo = t[prev_j], hi = t[j];
                    const bool lo_pos = prev > 0.0;
                    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const double v = a(mid);
                        if (v == 0.0) {
                            lo = hi = mid;
                            break;
                        }
                        ((v > 0.0) == lo_pos ? lo : hi) = mid;
                    }
                    p.t0 = 0.5 * (lo + hi);
                }
            }
            prev = av[j];
            prev_j = j;
        }
        p.unique_zero = p.sign_changes == 1;
        if (!p.unique_zero) p.t0.reset();
        p.T0 = std::max(1.0, p.t0.value_or(1.0));
    }
    const double abs0 = abs_moment(a, 0.0, 0.0, kInf);
    p.mean = signed_moment(a, 0.0, 0.0, kInf);
    p.mean_zero = std::fabs(p.mean) <= kMeanZeroTol * abs0;
    try {
        p.first_moment_abs = abs_moment(a, 1.0, 0.0, kInf);
    } catch (const DivergenceError&) {
        p.first_moment_abs = kInf;
    }
    try {
        p.alpha_moment_abs = abs_moment(a, 1.0 + al, 0.0, kInf);
    } catch (const DivergenceError&) {
        p.alpha_moment_abs = kInf;
    }

    // B(t) = t^alpha sup_{s >= t} |a(s)|, closed beyond t_max by the envelope.
    {
        std::vector<double> absa(N);
        for (std::size_t j = 0; j < N; ++j) absa[j] = std::fabs(av[j]);
        const double beyond = env.valid_from <= tmax ? env.bound(tmax) : absa.back();
        const auto M = sup_from_right(absa, beyond);
        std::vector<double> B(N);
        for (std::size_t j = 0; j < N; ++j) B[j] = std::pow(t[j], al) * M[j];
        const double Bexp = env.kind == TailModel::Kind::zero ? 2.0 : env.exponent - al;
        const double Bbeyond = Bexp >= 0.0 ? B.back() : kInf;
        const auto Bs = sup_from_right(B, Bbeyond);
        p.B_Linf = Bs.front();
        p.B_L1 = norm_with_tail(grid, B, Bexp);
        std::vector<double> B2(N);
        for (std::size_t j = 0; j < N; ++j) B2[j] = B[j] * B[j];
        p.B_L2 = std::sqrt(norm_with_tail(grid, B2, 2.0 * Bexp));
        p.B_star_L1 = norm_with_tail(grid, Bs, Bexp);
        const TailModel Btail =
            B.back() == 0.0 ? TailModel::zero() : TailModel::anchored(tmax, B.back(), Bexp);
        p.B = GridFunction(grid, B, Btail);
        p.B_star = GridFunction(grid, Bs, Btail);
    }

    // C and its decay rate: the first non-vanishing moment of a sets the power.
    {
        const auto ag = GridFunction(grid, av, env);
        const auto C = conv_C(ag, alpha, norm);
        double pc = 1.0 - al;
        if (p.mean_zero) {
            pc = 2.0 - al;
            if (std::isfinite(p.first_moment_abs)) {
                const double m1 = signed_moment(a, 1.0, 0.0, kInf);
                if (std::fabs(m1) <= kMeanZeroTol * p.first_moment_abs) pc = 3.0 - al;
            }
        }
        if (env.kind == TailModel::Kind::power && env.amplitude > 0.0) {
            pc = std::min(pc, env.exponent - al);
        }
        p.C_tail_exponent = pc;
        std::vector<double> absC(N), C2(N);
        for (std::size_t j = 0; j < N; ++j) {
            absC[j] = std::fabs(C.values()[j]);
            C2[j] = absC[j] * absC[j];
        }
        const double last = absC.back();
        const TailModel Ctail = last == 0.0 ? TailModel::zero() : TailModel::anchored(tmax, last, pc);
        p.C = GridFunction(grid, std::vector<double>(C.values().begin(), C.values().end()), Ctail);
        const auto Cs = sup_from_right(absC, last);
        p.C_star = GridFunction(grid, Cs, Ctail);
        p.C_Linf = Cs.front();
        p.C_L1 = norm_with_tail(grid, absC, pc);
        p.C_star_L1 = norm_with_tail(grid, Cs, pc);

        // E(t)^2 = int_t^inf C^2, right to left.
        std::vector<double> E2(N);
        E2[N - 1] = last == 0.0 ? 0.0 : (2.0 * pc > 1.0 ? Ctail.amplitude * Ctail.amplitude *
                                                              std::pow(tmax, 1.0 - 2.0 * pc) /
                                                              (2.0 * pc - 1.0)
                                                        : kInf);
        for (std::size_t j = N - 1; j-- > 0;) {
            E2[j] = E2[j + 1] + 0.5 * (t[j + 1] - t[j]) * (C2[j] + C2[j + 1]);
        }
        std::vector<double> E(N);
        for (std::size_t j = 0; j < N; ++j) E[j] = std::sqrt(E2[j]);
        p.C_L2 = E.front();
        const double Eexp = pc - 0.5;
        p.E_L1 = std::isfinite(E.back()) ? norm_with_tail(grid, E, Eexp) : kInf;
        p.E = GridFunction(grid, E,
                           E.back() == 0.0 || !std::isfinite(E.back())
                               ? TailModel::zero()
                               : TailModel::anchored(tmax, E.back(), Eexp));
    }
    p.intermed1 = std::isfinite(p.C_L1) && std::isfinite(p.C_Linf);
    p.intermed0 = std::isfinite(p.C_star_L1);
    p.intermed2 = std::isfinite(p.E_L1);

    // D(t) = |int_0^t a(s) (2t - s)^{alpha-1} ds| and the bounds at t >= T0.
    {
        std::vector<double> D(N, 0.0);
        for (std::size_t j = 1; j < N; ++j) {
            D[j] = std::fabs(kernel_integral(av, *grid, j, 2.0 * t[j], al));
        }
        p.D = GridFunction(grid, D);
        p.D_star = GridFunction(grid, sup_from_right(D, D.back()));

        std::vector<double> tail_first(N, 0.0);
        double acc = 0.0;
        try {
            acc = abs_moment(a, 1.0, tmax, kInf);
        } catch (const DivergenceError&) {
            acc = kInf;
        }
        tail_first[N - 1] = acc;
        for (std::size_t j = N - 1; j-- > 0;) {
            acc += finite_moment(a, 1.0, t[j], t[j + 1], true);
            tail_first[j] = acc;
        }
        for (std::size_t j = 1; j < N; ++j) {
            if (t[j] < p.T0) continue;
            const double w = std::pow(t[j], al - 2.0);
            const double stated = 2.0 * w * tail_first[j];
            const double corrected = (2.0 - al) * w * p.first_moment_abs;
            const double r1 = stated > 0.0 ? D[j] / stated : (D[j] > 0.0 ? kInf : 0.0);
            const double r2 = corrected > 0.0 ? D[j] / corrected : (D[j] > 0.0 ? kInf : 0.0);
            p.d_bound_worst_ratio = std::max(p.d_bound_worst_ratio, r1);
            p.d_bound_corrected_worst_ratio = std::max(p.d_bound_corrected_worst_ratio, r2);
        }
        p.d_bound_holds = p.d_bound_worst_ratio <= 1.0 + 1e-6;
        p.d_bound_corrected_holds = p.d_bound_corrected_worst_ratio <= 1.0 + 1e-6;
    }
    return p;
}

Lemma2Report lemma2_constants(const Lemma1Profile& p) {
    Lemma2Report r;
    r.k1 = p.C_Linf + 2.0 * p.C_star_L1;
    r.verdict_k1 = judge_contraction(r.k1);
    const double twice = 2.0 * p.C_star_L1;
    r.gamma_feasible = twice < 1.0;
    r.gamma = r.gamma_feasible ? 2.0 / (1.0 - twice) : kInf;
    r.k2 = std::max(p.C_Linf + p.C_L2, p.C_L1 + p.E_L1);
    r.verdict_k2 = r.gamma_feasible ? judge_contraction(r.k2) : Verdict::fail;
    return r;
}

FDivergence f_l1_divergence(const Coefficient& a, Alpha alpha, double T,
                            const std::vector<double>& t_samples) {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("f divergence: T must be positive");
    const double al = alpha.value();
    FDivergence out;
    const double mass = abs_moment(a, 0.0, 0.5 * T, 2.0 * T);
    out.vacuous = mass == 0.0;

    auto F = [&](double tau) {
        const double inv = 1.0 / al;
        auto near0 = [&](double s) { return std::fabs(a(s)) * std::pow(tau - s, al - 1.0); };
        auto neart = [&](double v) { return std::fabs(a(tau - std::pow(v, inv))) * inv; };
        std::vector<double> lb, rb;
        for (double b : breaks_inside(a, 0.0, tau)) {
            if (b < 0.5 * tau) lb.push_back(b);
            else if (b > 0.5 * tau) rb.push_back(std::pow(tau - b, al));
        }
        return integrate_pieces(near0, 0.0, 0.5 * tau, lb, 1e-12).value +
               integrate_pieces(neart, 0.0, std::pow(0.5 * tau, al), rb, 1e-12).value;
    };

    double prev_t = T;
    double running = 0.0;
    for (double t : t_samples) {
        if (!(t >= prev_t)) throw DomainError("f divergence: samples must be increasing and >= T");
        if (!out.vacuous && t > prev_t) {
            running += integrate_gk([&](double s) { return F(2.0 * s); }, prev_t, t, 1e-10).value;
        }
        const double lower =
            mass * (std::pow(2.0 * t - 0.5 * T, al) - std::pow(1.5 * T, al)) / (2.0 * al);
        out.rows.push_back({t, out.vacuous ? 0.0 : running, out.vacuous ? 0.0 : lower});
        prev_t = t;
    }
    return out;
}

}  // namespace fracasym
