#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace fracasym {

/// Nodes t_j = t_max * (j/n)^grading, j = 0..n, clustered toward t = 0.
class GradedGrid {
public:
    GradedGrid(double t_max, std::size_t n, double grading);

    double t_max() const noexcept { return t_max_; }
    std::size_t intervals() const noexcept { return n_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double grading() const noexcept { return grading_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    double operator[](std::size_t j) const noexcept { return nodes_[j]; }

    /// Index of the first node with t_j >= t (size() if none).
    std::size_t lower_index(double t) const;

    bool same_as(const GradedGrid& other) const noexcept;

private:
    double t_max_;
    std::size_t n_;
    double grading_;
    std::vector<double> nodes_;
};

using GridPtr = std::shared_ptr<const GradedGrid>;

/// Checked construction; requires t_max > 0, n >= 16, grading >= 1.
GridPtr make_graded_grid(double t_max, std::size_t n, double grading);

/// Default resolution used across the tools.
inline constexpr double kDefaultTMax = 100.0;
inline constexpr std::size_t kDefaultNodes = 4096;
inline constexpr double kDefaultGrading = 2.0;

/// Power-law model of a function beyond the last node: |f(t)| <= A t^{-p}.
struct TailModel {
    enum class Kind { zero, power };

    Kind kind = Kind::zero;
    double amplitude = 0.0;
    double exponent = 0.0;
    double valid_from = 0.0;

    static TailModel zero() { return {}; }
    static TailModel power(double amplitude, double exponent, double valid_from);

    /// A * t^{-p} (0 for the zero model).
    double bound(double t) const;
    /// True when int_t^inf A s^{-p} ds is finite.
    bool integrable() const;
    /// A * t^{1-p} / (p - 1); throws DivergenceError when not integrable.
    double integral_from(double t) const;
    /// Model anchored so that A * t^{-p} = |value| at t.
    static TailModel anchored(double t, double value, double exponent);
};

/// Real function sampled on a graded grid.
///
/// A function may carry a singular head c * t^e with -1 < e < 0 (the RL class
/// uses e = alpha - 1). For such functions values()[0] stores the finite limit
/// c = lim_{t->0} t^{-e} f(t) and values()[j], j >= 1, are plain samples.
class GridFunction {
public:
    GridFunction() = default;
    GridFunction(GridPtr grid, std::vector<double> values, TailModel tail = TailModel::zero(),
                 std::optional<double> singular_exponent = std::nullopt);

    static GridFunction sample(GridPtr grid, const std::function<double(double)>& f,
                               TailModel tail = TailModel::zero());
    /// Samples f at t > 0 and stores head as the limit at t = 0.
    static GridFunction sample_singular(GridPtr grid, const std::function<double(double)>& f,
                                        double exponent, double head,
                                        TailModel tail = TailModel::zero());
    static GridFunction zeros(GridPtr grid);

    const GradedGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    const TailModel& tail() const noexcept { return tail_; }

    bool is_singular() const noexcept { return exponent_.has_value(); }
    double singular_exponent() const { return exponent_.value_or(0.0); }
    /// Head coefficient c (0 for regular functions).
    double head() const noexcept { return exponent_ ? values_[0] : 0.0; }

    /// f(t_j); +-inf at j = 0 for a nonzero singular head.
    double at(std::size_t j) const;
    /// f - c t^e at nodes, with the j = 0 entry linearly extrapolated from j = 1, 2.
    std::vector<double> regular_part() const;

    GridFunction with_tail(TailModel tail) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
    TailModel tail_;
    std::optional<double> exponent_;
};

/// Power tail anchored at the last node with the exponent read off the
/// log-log slope over the last decade of nodes (zero model for a zero tail).
TailModel fit_power_tail(const GridFunction& f);

void require_same_grid(const GridFunction& f, const GridFunction& g);

/// alpha * f + beta * g; singular heads must share their exponent.
GridFunction linear_combination(double alpha, const GridFunction& f, double beta,
                                const GridFunction& g);

/// Trapezoid over nodes (plus exact head integral) on [from, to]; to may be +inf,
/// in which case the tail model closes the integral.
double integrate(const GridFunction& f, double from,
                 double to = std::numeric_limits<double>::infinity());

/// F_j = int_{t_j}^{+inf} f, computed right to left in one sweep.
std::vector<double> tail_integrals(const GridFunction& f);
/// F_j = int_0^{t_j} f.
std::vector<double> cumulative_integrals(const GridFunction& f);

/// Metrics of the weighted function spaces used by the fixed-point maps.
struct WeightedMetric {
    enum class Kind {
        sup_plain,                 // sup_t |f - g|
        sup_over_t_alpha_after_T,  // max{ sup_[0,T] |f-g|, sup_{t>=T} |f-g| / t^alpha }
        sup_t_one_minus_alpha,     // sup_t t^{1-alpha} |f - g|
        max_sup_and_L1,            // max{ sup |f-g|, int |f-g| }
        rl_split,                  // max{ sup_(0,T] t^{1-alpha}|f-g|, sup_{t>=T} |f-g| / t^alpha }
    };

    Kind kind = Kind::sup_plain;
    double split = 1.0;
    double alpha = 0.5;
};

double metric_distance(const WeightedMetric& m, const GridFunction& f, const GridFunction& g);

}  // namespace fracasym
