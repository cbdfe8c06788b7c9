#include "fracasym/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracasym/error.hpp"

namespace fracasym {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sup_abs_over(const GridFunction& f, double lo, double hi) {
    const auto t = f.grid().nodes();
    double s = 0.0;
    for (std::size_t j = 1; j < t.size(); ++j) {
        if (t[j] >= lo && t[j] <= hi) s = std::max(s, std::fabs(f.values()[j]));
    }
    return s;
}

struct HeadBasis {
    double e0, e1;  // exponents of the two basis powers
};

HeadBasis head_basis(SolveCase c, double alpha) {
    switch (c) {
        case SolveCase::thm2: return {alpha - 1.0, alpha};
        case SolveCase::thm3: return {alpha - 1.0, 1.0};
        case SolveCase::thm1:
        case SolveCase::lemma2: break;
    }
    return {0.0, alpha};
}

}  // namespace

OperatorCase operator_case(SolveCase c) {
    switch (c) {
        case SolveCase::thm2: return OperatorCase::two;
        case SolveCase::thm3: return OperatorCase::three;
        case SolveCase::thm1:
        case SolveCase::lemma2: break;
    }
    return OperatorCase::one;
}

ResidualReport residual(const GridFunction& x, OperatorCase which, const Coefficient& a,
                        Alpha alpha) {
    const auto op = apply_operator(which, x, alpha);
    const auto t = x.grid().nodes();
    ResidualReport rep;
    rep.which = which;
    rep.begin = std::max(op.trusted_begin, x.grid().lower_index(kResidualFrom));
    std::size_t last = x.grid().lower_index(kResidualToFraction * t.back());
    if (last < t.size() && t[last] == kResidualToFraction * t.back()) ++last;
    rep.end = std::min(op.trusted_end, last);

    std::vector<double> curve(t.size(), 0.0);
    for (std::size_t j = rep.begin; j < rep.end; ++j) {
        const double r = std::fabs(op.value.values()[j] + a(t[j]) * x.at(j));
        curve[j] = r;
        if (!(r <= rep.sup)) {
            rep.sup = r;
            rep.argmax = t[j];
        }
    }
    rep.curve = GridFunction(x.grid_ptr(), std::move(curve));
    return rep;
}

AsymptoticReport asymptotic_fit(const GridFunction& x, SolveCase which, Alpha alpha,
                                double a_true, double b_true) {
    const auto t = x.grid().nodes();
    const double tmax = t.back();
    const double al = alpha;
    const std::size_t first = x.grid().lower_index(0.1 * tmax);
    if (t.size() - first < 8) throw DomainError("asymptotic_fit: last decade is under-resolved");

    // Normal equations on unit-scaled columns.
    const auto [e0, e1] = head_basis(which, al);
    const double s0 = std::pow(tmax, e0), s1 = std::pow(tmax, e1);
    double g00 = 0, g01 = 0, g11 = 0, r0 = 0, r1 = 0;
    for (std::size_t j = first; j < t.size(); ++j) {
        const double u = std::pow(t[j], e0) / s0, v = std::pow(t[j], e1) / s1;
        const double xj = x.at(j);
        g00 += u * u;
        g01 += u * v;
        g11 += v * v;
        r0 += u * xj;
        r1 += v * xj;
    }
    const double det = g00 * g11 - g01 * g01;
    AsymptoticReport rep;
    rep.which = which;
    rep.a_hat = (r0 * g11 - r1 * g01) / det / s0;
    rep.b_hat = (g00 * r1 - g01 * r0) / det / s1;

    std::vector<double> head(t.size()), wrem(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) {
        double h = 0.0;
        switch (which) {
            case SolveCase::thm1:
            case SolveCase::lemma2: h = a_true + b_true * std::pow(t[j], al); break;
            case SolveCase::thm2: h = b_true * std::pow(t[j], al); break;
            case SolveCase::thm3: h = b_true * t[j]; break;
        }
        head[j] = h;
        wrem[j] = j == 0 ? 0.0 : std::pow(t[j], 1.0 - al) * std::fabs(x.at(j) - h);
    }
    rep.head = GridFunction(x.grid_ptr(), std::move(head));
    rep.weighted_remainder = GridFunction(x.grid_ptr(), std::move(wrem));

    rep.R = sup_abs_over(rep.weighted_remainder, 0.1 * tmax, tmax);
    rep.R_quarter_to_half = sup_abs_over(rep.weighted_remainder, 0.25 * tmax, 0.5 * tmax);
    rep.R_half_to_end = sup_abs_over(rep.weighted_remainder, 0.5 * tmax, tmax);
    rep.bounded = std::isfinite(rep.R) &&
                  rep.R_half_to_end <= rep.R_quarter_to_half * (1.0 + kTrendSlack);

    for (std::size_t j = first; j < t.size(); ++j) {
        rep.max_abs_remainder =
            std::max(rep.max_abs_remainder, std::fabs(x.at(j) - rep.head.values()[j]));
    }
    rep.vanishing_bound = rep.R * std::pow(0.1 * tmax, al - 1.0);
    return rep;
}

BoundaryLimits boundary_limits(const GridFunction& x, SolveCase which, Alpha alpha) {
    BoundaryLimits out;
    const auto t = x.grid().nodes();
    const double al = alpha;
    if (which == SolveCase::thm2 || which == SolveCase::thm3) {
        double s[3], v[3];
        for (int i = 0; i < 3; ++i) {
            s[i] = std::pow(t[i + 1], 1.0 - al);
            v[i] = s[i] * x.at(i + 1);
        }
        const double p01 = (s[1] * v[0] - s[0] * v[1]) / (s[1] - s[0]);
        const double p12 = (s[2] * v[1] - s[1] * v[2]) / (s[2] - s[1]);
        const double p012 = (s[2] * p01 - s[0] * p12) / (s[2] - s[0]);
        out.at_zero = p012;
        out.at_zero_converged =
            std::isfinite(p012) && std::fabs(p012 - p01) <= 1e-3 * std::max(1.0, std::fabs(p012));
    }
    if (which != SolveCase::thm3) {
        const auto d = rl_derivative(x, alpha);
        std::size_t j = x.grid().lower_index(kResidualToFraction * t.back());
        if (t[j] > kResidualToFraction * t.back()) --j;
        out.at_infinity = d.value.at(j);
        out.infinity_node = t[j];
    }
    return out;
}

bool Prop1Certificate::finite() const {
    return std::isfinite(y0_abs) && std::isfinite(y_L1) && std::isfinite(y_Linf) &&
           std::isfinite(x_prime_L1) && std::isfinite(x_prime_Linf) && std::isfinite(tail_sup);
}

Prop1Certificate prop1_certify(const GridFunction& y) {
    const auto rec = reconstruct_prop1(y);
    Prop1Certificate c;
    c.identity_lhs = rec.y0;
    c.y0_abs = std::fabs(rec.y0);
    c.x_prime_L1 = c.y_L1 = rec.x_prime_L1;
    c.x_prime_Linf = c.y_Linf = rec.x_prime_Linf;
    const auto t = y.grid().nodes();
    const double half = 0.5 * t.back();
    for (std::size_t j = 0; j < t.size(); ++j) {
        if (t[j] >= half) c.tail_sup = std::max(c.tail_sup, std::fabs(rec.x.values()[j] - 1.0));
    }
    return c;
}

Prop1Certificate prop1_certify(const GridFunction& y, const GridFunction& C) {
    require_same_grid(y, C);
    auto c = prop1_certify(y);
    std::vector<double> cy(y.size());
    for (std::size_t j = 1; j < cy.size(); ++j) cy[j] = C.at(j) * y.at(j);
    cy[0] = y.is_singular() ? 0.0 : C.at(0) * y.at(0);
    GridFunction prod(y.grid_ptr(), std::move(cy));
    prod = prod.with_tail(fit_power_tail(prod));
    double int_cy = kInf, int_y = kInf;
    try {
        int_cy = integrate(prod, 0.0);
        int_y = integrate(y, 0.0);
    } catch (const DivergenceError&) {
    }
    c.identity_rhs = -C.at(0) * (1.0 - int_y) - int_cy;
    return c;
}

}  // namespace fracasym
