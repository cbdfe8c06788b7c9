#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fracasym/coeffexpr.hpp"
#include "fracasym/fracops.hpp"
#include "fracasym/hypotheses.hpp"
#include "fracasym/meshfun.hpp"

namespace fracasym {

/// Fixed-point problems:
///   thm1   x = a + b t^alpha + I^alpha( int_s^inf a x )
///   thm2   x = a t^{alpha-1} + b t^alpha + I^alpha( int_s^inf a x )
///   thm3   y = t x' - x, with the operator on y whose fixed point gives x = b t + O(t^{alpha-1})
///   lemma2 y = -C (1 - int_t^inf y) - int_t^inf C y, x = 1 - int_t^inf y
enum class SolveCase { thm1, thm2, thm3, lemma2 };

const char* to_string(SolveCase c);
SolveCase solve_case_from_string(const std::string& s);

struct SolveSpec {
    SolveCase which = SolveCase::thm1;
    Alpha alpha{0.5};
    double a = 1.0;
    double b = 1.0;
    double T = 1.0;
    Coefficient coeff = Coefficient::zero();
    GridPtr grid;
    int max_iterations = 60;
    double tolerance = 1e-10;
    bool override_hypotheses = false;
    KernelNormalization lemma_normalization = KernelNormalization::rescaled;
};

/// Throws DomainError when the scalars violate the case's constraints.
void validate(const SolveSpec& spec);

/// The metric each case iterates in.
WeightedMetric case_metric(const SolveSpec& spec);

/// Everything a step needs that does not depend on the iterate.
struct SolveContext {
    SolveSpec spec;
    std::vector<double> coeff_nodes;
    double ax_tail_exponent = 0.0;        // decay exponent of a * x beyond t_max
    // Per-panel moments of the coefficient against the linear hats and t^{alpha-1}:
    // int a (t_{k+1}-s)/h, int a (s-t_k)/h, int a s^{alpha-1} over [t_k, t_{k+1}].
    std::vector<double> panel_lo, panel_hi, panel_head;
    // int_{t_max}^inf u a for the two basis functions u that model x beyond t_max
    // (thm1: 1, t^alpha; thm2: t^{alpha-1}, t^alpha).
    double beyond_moment[2] = {0.0, 0.0};
    // thm3
    double first_moment = 0.0;            // int_0^inf s a(s) ds
    GridFunction weighted_conv;           // I^alpha (s a(s))
    // lemma2
    std::optional<Lemma1Profile> profile;
};
SolveContext make_context(const SolveSpec& spec);

GridFunction step_thm1(const GridFunction& x, const SolveContext& ctx);
GridFunction step_thm2(const GridFunction& x, const SolveContext& ctx);
GridFunction step_thm3(const GridFunction& y, const SolveContext& ctx);
GridFunction step_lemma2(const GridFunction& y, const GridFunction& C);
/// Dispatches on ctx.spec.which.
GridFunction apply_step(const GridFunction& v, const SolveContext& ctx);
/// The affine head of the case's operator (thm3: 0, lemma2: -C).
GridFunction seed(const SolveContext& ctx);

/// Y(t) = int_t^inf y(u) / u^2 du at the nodes t_j, j >= 1 (entry 0 unused);
/// exact on the piecewise-linear regular part, closed form on the head and tail.
std::vector<double> inverse_square_tail(const GridFunction& y);

/// x = b t - t int_t^inf y / u^2.
GridFunction reconstruct_thm3(const GridFunction& y, double b);

struct Prop1Reconstruction {
    GridFunction x;       // 1 - int_t^inf y
    double y0 = 0.0;      // y(0)
    double x_prime_L1 = 0.0;
    double x_prime_Linf = 0.0;
};
Prop1Reconstruction reconstruct_prop1(const GridFunction& y);

struct SolveResult {
    SolveCase which = SolveCase::thm1;
    GridFunction solution;        // x
    std::optional<GridFunction> y;
    std::optional<GridFunction> C;
    int iterations = 0;
    std::vector<double> distances;
    double observed_ratio = 0.0;
    double predicted_k = 0.0;
    bool hypotheses_pass = true;
    bool converged = false;
    bool ratio_exceeded = false;
    /// Effect of truncating int_s^inf a x at t_max, in the case metric.
    double tail_budget = 0.0;
    double gamma = 0.0;           // lemma2 ball radius factor
    WeightedMetric metric;
};

/// Max of successive distance quotients after iteration 3, ignoring pairs
/// whose distances fall below floor.
double observed_ratio(const std::vector<double>& distances, double floor);

/// Throws HypothesisError when the case's hypotheses fail without override.
SolveResult solve(const SolveSpec& spec);

}  // namespace fracasym
