#pragma once

namespace fracasym {

/// Euler Gamma for positive finite arguments (Lanczos, g = 7, 9 terms).
/// Throws DomainError for x <= 0 or non-finite x.
double gamma(double x);

/// log Gamma for positive finite arguments.
double lgamma_pos(double x);

/// Beta function B(q, r) = Gamma(q) Gamma(r) / Gamma(q + r) for q, r in (0, 1).
double beta(double q, double r);

}  // namespace fracasym
