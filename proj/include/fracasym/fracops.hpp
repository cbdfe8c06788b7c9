#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "fracasym/meshfun.hpp"

namespace fracasym {

/// Fractional order restricted to [0.05, 0.95].
class Alpha {
public:
    explicit Alpha(double value);
    double value() const noexcept { return value_; }
    operator double() const noexcept { return value_; }

    static constexpr double kMin = 0.05;
    static constexpr double kMax = 0.95;

private:
    double value_;
};

/// Composite operators built from the Riemann-Liouville derivative D^alpha:
///   one:   D^alpha (x')
///   two:   (D^alpha x)'
///   three: D^alpha (t x' - x)
enum class OperatorCase { one = 1, two = 2, three = 3 };

/// Exact moments of the kernel (tau - s)^{mu-1} against the linear hat
/// functions of the panel [a, b], tau >= b:
///   at_a = int_a^b (tau-s)^{mu-1} (b-s)/(b-a) ds,
///   at_b = int_a^b (tau-s)^{mu-1} (s-a)/(b-a) ds.
struct PanelWeights {
    double at_a;
    double at_b;
};
PanelWeights panel_weights(double tau, double a, double b, double mu);

/// Per-panel kernel moments for every node of a grid (no 1/Gamma factor):
/// the two hat moments plus the moment of the bubble (s-a)(s-b), which
/// carries the quadratic correction of each panel.
///
/// Rows are packed: node i owns panels k = 0..i-1. Plans are immutable and
/// shared through a bounded cache keyed on (grid, order).
class KernelPlan {
public:
    KernelPlan(const GradedGrid& grid, double order);

    double order() const noexcept { return order_; }
    std::size_t size() const noexcept { return n_ + 1; }
    const double* row_a(std::size_t i) const { return wa_.data() + offset(i); }
    const double* row_b(std::size_t i) const { return wb_.data() + offset(i); }
    const double* row_c(std::size_t i) const { return wc_.data() + offset(i); }
    std::size_t bytes() const noexcept { return (wa_.size() + wb_.size() + wc_.size()) * sizeof(double); }

private:
    static std::size_t offset(std::size_t i) noexcept { return i * (i - 1) / 2; }

    double order_;
    std::size_t n_;
    std::vector<double> wa_;
    std::vector<double> wb_;
    std::vector<double> wc_;
};

std::shared_ptr<const KernelPlan> kernel_plan(const GradedGrid& grid, double order);

/// int_0^{t_m} (tau - s)^{mu-1} r(s) ds for the piecewise quadratic interpolant
/// of node values r (panel k uses nodes k-1, k, k+1), evaluated at any tau >= t_m (no 1/Gamma factor).
double kernel_integral(std::span<const double> r, const GradedGrid& grid, std::size_t m,
                       double tau, double mu);

/// Riemann-Liouville integral I^mu f for any order mu > 0. A singular head is
/// integrated exactly; the result keeps a head while its exponent stays negative.
GridFunction frac_integral(const GridFunction& f, double order);

/// Node derivative with three-point nonuniform stencils (one-sided at the ends).
std::vector<double> differentiate(std::span<const double> v, const GradedGrid& grid);
std::vector<double> second_derivative(std::span<const double> v, const GradedGrid& grid);

struct DerivativeResult {
    GridFunction value;
    /// Nodes where the stencil cancels more than three digits.
    std::vector<std::size_t> unstable_nodes;
};

/// D^alpha f = d/dt I^{1-alpha} f. Constant and singular parts are handled in
/// closed form; throws DomainError if the result leaves the admissible class.
DerivativeResult rl_derivative(const GridFunction& f, Alpha alpha);

/// Kernel normalization for C = a * t^{alpha-1}.
enum class KernelNormalization {
    plain,     // int_0^t (t-s)^{alpha-1} a(s) ds
    rescaled,  // I^alpha a, i.e. the plain convolution divided by Gamma(alpha)
};

GridFunction conv_C(const GridFunction& a, Alpha alpha, KernelNormalization norm);

struct OperatorResult {
    GridFunction value;
    /// Nodes [trusted_begin, trusted_end) exclude the first and last 2 %.
    std::size_t trusted_begin = 0;
    std::size_t trusted_end = 0;
};

/// Applies a composite operator to x; node 0 of the result is not meaningful.
OperatorResult apply_operator(OperatorCase which, const GridFunction& x, Alpha alpha);

/// 1 / Gamma(x) for any real x (0 at the poles).
double recip_gamma(double x);

}  // namespace fracasym
