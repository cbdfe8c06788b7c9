#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fracasym/meshfun.hpp"

namespace fracasym {

/// Immutable expression tree in the single variable t.
struct ExprNode {
    enum class Kind { constant, variable, add, sub, mul, div, pow, neg, exp, sin, cos, abs };

    Kind kind = Kind::constant;
    double value = 0.0;
    std::vector<std::shared_ptr<const ExprNode>> children;
};

using Expr = std::shared_ptr<const ExprNode>;

/// Recursive-descent parse. Precedence: ^ (right assoc) > unary minus > * / > + -.
/// Throws ParseError carrying the byte offset of the failure.
Expr parse_coefficient(std::string_view text);

/// Fully parenthesized text that parses back to the same tree.
std::string print_expr(const Expr& e);

/// Throws DomainError on a zero denominator or a non-finite result.
double eval_expr(const Expr& e, double t);

bool structurally_equal(const Expr& a, const Expr& b);

/// True when every division node has a nonzero denominator at each t.
bool denominators_nonzero(const Expr& e, std::span<const double> ts);

/// The functional coefficient a(t) together with its declared decay envelope.
class Coefficient {
public:
    static Coefficient from_expression(std::string_view text,
                                       std::optional<TailModel> envelope = std::nullopt);
    /// Table of (t, value) pairs with strictly increasing t; linear interpolation.
    static Coefficient from_samples(std::vector<std::pair<double, double>> samples,
                                    std::optional<TailModel> envelope = std::nullopt);
    static Coefficient zero();

    double operator()(double t) const;

    /// lambda * a(t), envelope amplitude scaled by |lambda|.
    Coefficient scaled(double lambda) const;
    /// t^q * a(t), envelope (A, p - q).
    Coefficient with_power_weight(double q) const;

    const std::optional<TailModel>& envelope() const noexcept { return envelope_; }
    Coefficient with_envelope(TailModel envelope) const;
    /// Largest t at which the coefficient can be evaluated.
    double eval_limit() const;
    bool is_expression() const noexcept { return static_cast<bool>(expr_); }
    bool continuous() const noexcept { return true; }
    const Expr& expression() const noexcept { return expr_; }
    const std::vector<std::pair<double, double>>& samples() const noexcept { return samples_; }
    /// Printable source: the expression text or a sample-table summary.
    std::string source() const;
    /// True when the coefficient is structurally the zero function.
    bool is_identically_zero() const;

private:
    Expr expr_;
    std::vector<std::pair<double, double>> samples_;
    std::optional<TailModel> envelope_;
    double scale_ = 1.0;
    double power_weight_ = 0.0;
};

double eval_coefficient(const Coefficient& c, double t);

struct EnvelopeCheck {
    bool ok = true;
    double max_violation = 0.0;  // max over checked nodes of |a| - A t^{-p}, clipped at 0
    std::size_t nodes_checked = 0;
};

/// |a(t_j)| <= A t_j^{-p} at every node with t_j >= valid_from (relative slack 1e-12).
EnvelopeCheck check_envelope(const Coefficient& c, const GradedGrid& grid);

/// a sampled at the grid nodes.
std::vector<double> sample_coefficient(const Coefficient& c, const GradedGrid& grid);

}  // namespace fracasym
