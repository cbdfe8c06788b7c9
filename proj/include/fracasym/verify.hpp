#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fracasym/coeffexpr.hpp"
#include "fracasym/fracops.hpp"
#include "fracasym/meshfun.hpp"
#include "fracasym/solver.hpp"

namespace fracasym {

/// Nodes with t in [0.1, 0.98 t_max], intersected with the operator's trusted range.
inline constexpr double kResidualFrom = 0.1;
inline constexpr double kResidualToFraction = 0.98;

struct ResidualReport {
    OperatorCase which = OperatorCase::one;
    double sup = 0.0;
    double argmax = 0.0;
    std::size_t begin = 0, end = 0;   // node range [begin, end) the sup runs over
    /// |O x + a x| at every node; 0 outside [begin, end).
    GridFunction curve;
};

ResidualReport residual(const GridFunction& x, OperatorCase which, const Coefficient& a,
                        Alpha alpha);

/// Operator case of the equation each solve case targets (lemma2 maps to one).
OperatorCase operator_case(SolveCase c);

struct AsymptoticReport {
    SolveCase which = SolveCase::thm1;
    double a_hat = 0.0;
    double b_hat = 0.0;
    /// sup over the last decade of t^{1-alpha} |x - head|.
    double R = 0.0;
    double R_quarter_to_half = 0.0;   // same sup over [t_max/4, t_max/2]
    double R_half_to_end = 0.0;       // and over [t_max/2, t_max]
    bool bounded = false;             // R finite and not growing
    /// sup over the last decade of |x - head|, and R (t_max/10)^{alpha-1}.
    double max_abs_remainder = 0.0;
    double vanishing_bound = 0.0;
    GridFunction head;
    GridFunction weighted_remainder;
};

/// Relative growth of the weighted remainder still read as "not increasing".
inline constexpr double kTrendSlack = 1e-3;

/// Least-squares fit of x against the case's two-term basis over the last
/// decade of nodes:
///   thm1, lemma2: 1, t^alpha      head a + b t^alpha
///   thm2:         t^{alpha-1}, t^alpha   head b t^alpha
///   thm3:         t^{alpha-1}, t          head b t
/// The remainder is measured against the supplied (a, b), not the fitted ones.
/// Throws DomainError when the last decade holds fewer than 8 nodes.
AsymptoticReport asymptotic_fit(const GridFunction& x, SolveCase which, Alpha alpha,
                                double a_true, double b_true);

struct BoundaryLimits {
    /// lim_{t->0} t^{1-alpha} x (thm2, thm3).
    std::optional<double> at_zero;
    bool at_zero_converged = true;
    /// D^alpha x at the last node with t <= 0.98 t_max (thm1, thm2, lemma2).
    std::optional<double> at_infinity;
    double infinity_node = 0.0;
};

/// Extrapolation to 0 runs Neville's scheme in s = t^{1-alpha} over the three
/// smallest positive nodes; it is flagged when the two- and three-point values
/// differ by more than 1e-3 relative.
BoundaryLimits boundary_limits(const GridFunction& x, SolveCase which, Alpha alpha);

struct Prop1Certificate {
    double y0_abs = 0.0;
    double y_L1 = 0.0;
    double y_Linf = 0.0;
    double x_prime_L1 = 0.0;
    double x_prime_Linf = 0.0;
    /// sup_{t >= t_max/2} |x - 1| for x = 1 - int_t^inf y.
    double tail_sup = 0.0;
    /// y(0) and -C(0)(1 - int_0^inf y) - int_0^inf C y (when C is given).
    double identity_lhs = 0.0;
    std::optional<double> identity_rhs;
    bool finite() const;
};

Prop1Certificate prop1_certify(const GridFunction& y);
Prop1Certificate prop1_certify(const GridFunction& y, const GridFunction& C);

}  // namespace fracasym
