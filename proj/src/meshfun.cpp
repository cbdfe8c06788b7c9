#include "fracasym/meshfun.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracasym/error.hpp"

namespace fracasym {

GradedGrid::GradedGrid(double t_max, std::size_t n, double grading)
    : t_max_(t_max), n_(n), grading_(grading), nodes_(n + 1) {
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j <= n; ++j) {
        nodes_[j] = t_max * std::pow(static_cast<double>(j) / dn, grading);
    }
    nodes_.front() = 0.0;
    nodes_.back() = t_max;
}

std::size_t GradedGrid::lower_index(double t) const {
    return static_cast<std::size_t>(std::lower_bound(nodes_.begin(), nodes_.end(), t) -
                                    nodes_.begin());
}

bool GradedGrid::same_as(const GradedGrid& other) const noexcept {
    return this == &other ||
           (t_max_ == other.t_max_ && n_ == other.n_ && grading_ == other.grading_);
}

GridPtr make_graded_grid(double t_max, std::size_t n, double grading) {
    if (!(std::isfinite(t_max) && t_max > 0.0)) throw DomainError("grid: t_max must be positive");
    if (n < 16) throw DomainError("grid: need at least 16 intervals");
    if (!(std::isfinite(grading) && grading >= 1.0)) throw DomainError("grid: grading must be >= 1");
    return std::make_shared<const GradedGrid>(t_max, n, grading);
}

TailModel TailModel::power(double amplitude, double exponent, double valid_from) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
        throw DomainError("tail: amplitude must be finite and >= 0");
    }
    if (!std::isfinite(exponent)) throw DomainError("tail: exponent must be finite");
    return {Kind::power, amplitude, exponent, valid_from};
}

double TailModel::bound(double t) const {
    if (kind == Kind::zero || amplitude == 0.0) return 0.0;
    return amplitude * std::pow(t, -exponent);
}

bool TailModel::integrable() const {
    return kind == Kind::zero || amplitude == 0.0 || exponent > 1.0;
}

double TailModel::integral_from(double t) const {
    if (kind == Kind::zero || amplitude == 0.0) return 0.0;
    if (exponent <= 1.0) {
        throw DivergenceError("tail integral diverges: exponent " + std::to_string(exponent) +
                              " <= 1");
    }
    return amplitude * std::pow(t, 1.0 - exponent) / (exponent - 1.0);
}

TailModel TailModel::anchored(double t, double value, double exponent) {
    return power(std::fabs(value) * std::pow(t, exponent), exponent, t);
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values, TailModel tail,
                           std::optional<double> singular_exponent)
    : grid_(std::move(grid)), values_(std::move(values)), tail_(tail),
      exponent_(singular_exponent) {
    if (!grid_) throw DomainError("grid function: null grid");
    if (values_.size() != grid_->size()) {
        throw GridMismatch("grid function: " + std::to_string(values_.size()) +
                           " values for " + std::to_string(grid_->size()) + " nodes");
    }
    if (exponent_ && !(*exponent_ < 0.0 && *exponent_ > -1.0)) {
        throw DomainError("grid function: singular exponent must lie in (-1, 0)");
    }
}

GridFunction GridFunction::sample(GridPtr grid, const std::function<double(double)>& f,
                                  TailModel tail) {
    std::vector<double> v(grid->size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f((*grid)[j]);
    return GridFunction(std::move(grid), std::move(v), tail);
}

GridFunction GridFunction::sample_singular(GridPtr grid, const std::function<double(double)>& f,
                                           double exponent, double head, TailModel tail) {
    std::vector<double> v(grid->size());
    v[0] = head;
    for (std::size_t j = 1; j < v.size(); ++j) v[j] = f((*grid)[j]);
    return GridFunction(std::move(grid), std::move(v), tail, exponent);
}

GridFunction GridFunction::zeros(GridPtr grid) {
    std::vector<double> v(grid->size(), 0.0);
    return GridFunction(std::move(grid), std::move(v));
}

double GridFunction::at(std::size_t j) const {
    if (j == 0 && exponent_) {
        if (values_[0] == 0.0) return 0.0;
        return std::copysign(std::numeric_limits<double>::infinity(), values_[0]);
    }
    return values_[j];
}

std::vector<double> GridFunction::regular_part() const {
    std::vector<double> r(values_);
    if (!exponent_) return r;
    const auto t = grid_->nodes();
    const double c = values_[0];
    for (std::size_t j = 1; j < r.size(); ++j) r[j] = values_[j] - c * std::pow(t[j], *exponent_);
    r[0] = r[1] - (r[2] - r[1]) * t[1] / (t[2] - t[1]);
    return r;
}

GridFunction GridFunction::with_tail(TailModel tail) const {
    GridFunction out(*this);
    out.tail_ = tail;
    return out;
}

TailModel fit_power_tail(const GridFunction& f) {
    const auto t = f.grid().nodes();
    const auto v = f.values();
    const std::size_t n = t.size() - 1;
    const double last = v[n];
    if (last == 0.0) return TailModel::zero();
    const std::size_t k = f.grid().lower_index(t[n] / 10.0);
    if (k >= n || v[k] == 0.0 || (v[k] > 0.0) != (last > 0.0)) {
        return TailModel::anchored(t[n], last, 0.0);
    }
    const double p = -std::log(std::fabs(last / v[k])) / std::log(t[n] / t[k]);
    return TailModel::anchored(t[n], last, p);
}

void require_same_grid(const GridFunction& f, const GridFunction& g) {
    if (!f.grid().same_as(g.grid())) throw GridMismatch("grid functions live on different grids");
}

namespace {

TailModel combine_tails(const TailModel& a, const TailModel& b, double t_max, double last) {
    const bool za = a.kind == TailModel::Kind::zero;
    const bool zb = b.kind == TailModel::Kind::zero;
    if (za && zb) return TailModel::zero();
    double p = za ? b.exponent : (zb ? a.exponent : std::min(a.exponent, b.exponent));
    return TailModel::anchored(t_max, last, p);
}

// Linear interpolant of r on the panel containing t.
double interp(std::span<const double> t, const std::vector<double>& r, std::size_t k, double x) {
    const double h = t[k + 1] - t[k];
    return r[k] + (r[k + 1] - r[k]) * (x - t[k]) / h;
}

double head_integral(double c, double e, double a, double b) {
    if (c == 0.0) return 0.0;
    return c * (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0);
}

// Trapezoid of the regular part over [from, to] within [0, t_max].
double trapezoid_regular(const GridFunction& f, const std::vector<double>& r, double from,
                         double to) {
    const auto t = f.grid().nodes();
    if (!(to > from)) return 0.0;
    std::size_t k = f.grid().lower_index(from);
    if (k > 0 && t[k] > from) --k;
    if (k >= t.size() - 1) k = t.size() - 2;
    double sum = 0.0;
    for (; k + 1 < t.size() && t[k] < to; ++k) {
        const double lo = std::max(from, t[k]);
        const double hi = std::min(to, t[k + 1]);
        if (hi <= lo) continue;
        const double flo = (lo == t[k]) ? r[k] : interp(t, r, k, lo);
        const double fhi = (hi == t[k + 1]) ? r[k + 1] : interp(t, r, k, hi);
        sum += 0.5 * (hi - lo) * (flo + fhi);
    }
    return sum;
}

double signed_tail(const GridFunction& f, double from, double to) {
    const TailModel& tail = f.tail();
    if (tail.kind == TailModel::Kind::zero || tail.amplitude == 0.0) return 0.0;
    const double sign = f.values().back() < 0.0 ? -1.0 : 1.0;
    if (std::isinf(to)) return sign * tail.integral_from(from);
    const double p = tail.exponent;
    if (p == 1.0) return sign * tail.amplitude * std::log(to / from);
    return sign * tail.amplitude * (std::pow(from, 1.0 - p) - std::pow(to, 1.0 - p)) / (p - 1.0);
}

}  // namespace

GridFunction linear_combination(double alpha, const GridFunction& f, double beta,
                                const GridFunction& g) {
    require_same_grid(f, g);
    std::optional<double> e;
    if (f.is_singular() && g.is_singular()) {
        if (std::fabs(f.singular_exponent() - g.singular_exponent()) > 1e-14) {
            throw DomainError("linear_combination: singular heads with different exponents");
        }
        e = f.singular_exponent();
    } else if (f.is_singular()) {
        e = f.singular_exponent();
    } else if (g.is_singular()) {
        e = g.singular_exponent();
    }
    const auto fv = f.values();
    const auto gv = g.values();
    std::vector<double> v(fv.size());
    for (std::size_t j = 1; j < v.size(); ++j) v[j] = alpha * fv[j] + beta * gv[j];
    v[0] = e ? alpha * f.head() + beta * g.head() : alpha * fv[0] + beta * gv[0];
    const double tmax = f.grid().t_max();
    TailModel tail = combine_tails(f.tail(), g.tail(), tmax, v.back());
    return GridFunction(f.grid_ptr(), std::move(v), tail, e);
}

double integrate(const GridFunction& f, double from, double to) {
    if (!(from <= to) || from < 0.0) throw DomainError("integrate: need 0 <= from <= to");
    const double tmax = f.grid().t_max();
    double sum = 0.0;
    const double hi = std::min(to, tmax);
    if (from < hi) {
        const auto r = f.regular_part();
        sum += trapezoid_regular(f, r, from, hi);
        if (f.is_singular()) sum += head_integral(f.head(), f.singular_exponent(), from, hi);
    }
    if (to > tmax) sum += signed_tail(f, std::max(from, tmax), to);
    return sum;
}

std::vector<double> tail_integrals(const GridFunction& f) {
    const auto t = f.grid().nodes();
    const auto r = f.regular_part();
    const std::size_t n = t.size() - 1;
    std::vector<double> F(t.size());
    F[n] = signed_tail(f, t[n], std::numeric_limits<double>::infinity());
    const double c = f.head();
    const double e = f.singular_exponent();
    for (std::size_t k = n; k-- > 0;) {
        double panel = 0.5 * (t[k + 1] - t[k]) * (r[k] + r[k + 1]);
        if (f.is_singular()) panel += head_integral(c, e, t[k], t[k + 1]);
        F[k] = F[k + 1] + panel;
    }
    return F;
}

std::vector<double> cumulative_integrals(const GridFunction& f) {
    const auto t = f.grid().nodes();
    const auto r = f.regular_part();
    std::vector<double> F(t.size(), 0.0);
    const double c = f.head();
    const double e = f.singular_exponent();
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        double panel = 0.5 * (t[k + 1] - t[k]) * (r[k] + r[k + 1]);
        if (f.is_singular()) panel += head_integral(c, e, t[k], t[k + 1]);
        F[k + 1] = F[k] + panel;
    }
    return F;
}

namespace {

// Limit of t^w * |c| t^e as t -> 0.
double head_limit(double c, double e, double w) {
    if (c == 0.0) return 0.0;
    const double s = w + e;
    if (s > 1e-12) return 0.0;
    if (s >= -1e-12) return std::fabs(c);
    return std::numeric_limits<double>::infinity();
}

}  // namespace

double metric_distance(const WeightedMetric& m, const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    const GridFunction d = linear_combination(1.0, f, -1.0, g);
    const auto t = d.grid().nodes();
    const auto v = d.values();
    const double a = m.alpha;
    const double T = m.split;
    using K = WeightedMetric::Kind;

    auto weight = [&](double tj) -> double {
        switch (m.kind) {
            case K::sup_plain:
            case K::max_sup_and_L1:
                return 1.0;
            case K::sup_t_one_minus_alpha:
                return std::pow(tj, 1.0 - a);
            case K::sup_over_t_alpha_after_T: {
                double w = 0.0;
                if (tj <= T) w = 1.0;
                if (tj >= T) w = std::max(w, std::pow(tj, -a));
                return w;
            }
            case K::rl_split: {
                double w = 0.0;
                if (tj <= T) w = std::pow(tj, 1.0 - a);
                if (tj >= T) w = std::max(w, std::pow(tj, -a));
                return w;
            }
        }
        return 1.0;
    };
    const double w0 = (m.kind == K::sup_t_one_minus_alpha || (m.kind == K::rl_split && T > 0.0))
                          ? 1.0 - a
                          : 0.0;

    double sup = d.is_singular() ? head_limit(d.head(), d.singular_exponent(), w0)
                                 : (w0 > 0.0 ? 0.0 : std::fabs(v[0]));
    for (std::size_t j = 1; j < v.size(); ++j) sup = std::max(sup, weight(t[j]) * std::fabs(v[j]));
    if (m.kind != K::max_sup_and_L1) return sup;

    double l1 = 0.0;
    if (d.is_singular()) {
        const double e = d.singular_exponent();
        const auto r = d.regular_part();
        l1 += std::fabs(d.head()) * std::pow(t[1], e + 1.0) / (e + 1.0) +
              0.5 * t[1] * (std::fabs(r[0]) + std::fabs(r[1]));
    } else {
        l1 += 0.5 * t[1] * (std::fabs(v[0]) + std::fabs(v[1]));
    }
    for (std::size_t j = 1; j + 1 < v.size(); ++j) {
        l1 += 0.5 * (t[j + 1] - t[j]) * (std::fabs(v[j]) + std::fabs(v[j + 1]));
    }
    if (d.tail().kind == TailModel::Kind::power && d.tail().amplitude > 0.0) {
        if (!d.tail().integrable()) return std::numeric_limits<double>::infinity();
        l1 += d.tail().integral_from(t.back());
    }
    return std::max(sup, l1);
}

}  // namespace fracasym
