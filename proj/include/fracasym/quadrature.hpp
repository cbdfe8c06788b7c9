#pragma once

#include <functional>
#include <limits>

namespace fracasym {

struct QuadResult {
    double value = 0.0;
    double abs_value = 0.0;  // integral of |f|, same rule
    double error = 0.0;      // estimated absolute error
    int intervals = 0;
};

using ScalarFn = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (7/15) on [a, b]. The stopping test is
/// relative to the integral of |f|, so results scale exactly under f -> c*f.
QuadResult integrate_gk(const ScalarFn& f, double a, double b, double rel_tol = 1e-13,
                        int max_intervals = 4000);

/// Integral over [a, +inf) by doubling panels until the caller's tail bound
/// tail_bound(R) >= |int_R^inf f| drops below rel_tol * int_a^R |f|, or R
/// reaches eval_limit. The remaining closed-form tail is added as
/// tail_value(R).
QuadResult integrate_gk_semi_infinite(const ScalarFn& f, double a,
                                      const ScalarFn& tail_bound, const ScalarFn& tail_value,
                                      double rel_tol = 1e-13,
                                      double eval_limit = std::numeric_limits<double>::infinity());

}  // namespace fracasym
