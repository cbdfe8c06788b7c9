#include "fracasym/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <mutex>
#include <string>
#include <tuple>

#include "fracasym/error.hpp"
#include "fracasym/specialfn.hpp"

namespace fracasym {

namespace {

constexpr double kExponentSnap = 1e-12;
constexpr double kUnstableSpread = 1e3;
constexpr std::size_t kPlanCacheBytes = std::size_t{768} << 20;

// U^mu - L^mu for U = L + h without cancellation when h << L.
double power_difference(double L, double h, double Lmu, double Umu, double mu) {
    if (L > 0.0 && h <= 0.5 * L) return Lmu * std::expm1(mu * std::log1p(h / L));
    return Umu - Lmu;
}

PanelWeights weights_from(double U, double L, double h, double Lmu, double Umu, double mu) {
    const double D = power_difference(L, h, Lmu, Umu, mu);
    const double wb = (U * D / mu - h * Lmu) / ((mu + 1.0) * h);
    return {D / mu - wb, wb};
}

// int_L^U u^{mu-1} (U-u)(L-u) du with U = L + h: the kernel moment of the
// panel bubble (s-a)(s-b). Far panels use the binomial series in h/L.
double bubble_moment(double U, double L, double h, double mu) {
    if (L > 2.0 * h) {
        const double r = h / L;
        double b = 1.0, rn = 1.0, sum = 0.0;
        for (int n = 0; n < 200; ++n) {
            const double term = b * rn / ((n + 2.0) * (n + 3.0));
            sum += term;
            if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
            b *= (mu - 1.0 - n) / (n + 1.0);
            rn *= r;
        }
        return -h * h * h * std::pow(L, mu - 1.0) * sum;
    }
    const double Lm = L > 0.0 ? std::pow(L, mu) : 0.0;
    const double Um = std::pow(U, mu);
    return U * L * (Um - Lm) / mu - (U + L) * (Um * U - Lm * L) / (mu + 1.0) +
           (Um * U * U - Lm * L * L) / (mu + 2.0);
}

// Bubble coefficient of each panel: the mean of the second divided
// differences over nodes k-1..k+1 and k..k+2 (one-sided at the ends).
std::vector<double> bubble_coefficients(std::span<const double> r, std::span<const double> t) {
    const std::size_t n = t.size() - 1;
    std::vector<double> dd(n - 1);
    for (std::size_t m = 1; m < n; ++m) {
        const double s1 = (r[m] - r[m - 1]) / (t[m] - t[m - 1]);
        const double s2 = (r[m + 1] - r[m]) / (t[m + 1] - t[m]);
        dd[m - 1] = (s2 - s1) / (t[m + 1] - t[m - 1]);
    }
    std::vector<double> d(n);
    d[0] = dd[0];
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = 0.5 * (dd[k - 1] + dd[k]);
    d[n - 1] = dd[n - 2];
    return d;
}

struct PlanKey {
    double t_max;
    std::size_t n;
    double grading;
    double order;
    bool operator==(const PlanKey&) const = default;
};

struct PlanCache {
    std::mutex mu;
    std::list<std::pair<PlanKey, std::shared_ptr<const KernelPlan>>> entries;
    std::size_t bytes = 0;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

std::vector<double> apply_plan(const KernelPlan& plan, const GradedGrid& grid, std::span<const double> r,
                               double scale) {
    const std::size_t N = plan.size();
    const auto q = bubble_coefficients(r, grid.nodes());
    std::vector<double> out(N, 0.0);
    for (std::size_t i = 1; i < N; ++i) {
        const double* wa = plan.row_a(i);
        const double* wb = plan.row_b(i);
        const double* wc = plan.row_c(i);
        double s = 0.0;
        for (std::size_t k = 0; k < i; ++k) s += wa[k] * r[k] + wb[k] * r[k + 1] + wc[k] * q[k];
        out[i] = scale * s;
    }
    return out;
}

std::vector<double> slopes_of(std::span<const double> r, std::span<const double> t) {
    std::vector<double> s(t.size() - 1);
    for (std::size_t k = 0; k + 1 < t.size(); ++k) s[k] = (r[k + 1] - r[k]) / (t[k + 1] - t[k]);
    return s;
}

struct PowerTerm {
    double coef;
    double exponent;
};

void add_terms(std::vector<double>& v, std::span<const double> t, std::initializer_list<PowerTerm> terms) {
    for (const auto& term : terms) {
        if (term.coef == 0.0) continue;
        for (std::size_t j = 1; j < v.size(); ++j) v[j] += term.coef * std::pow(t[j], term.exponent);
    }
}

void require_resolved(const GradedGrid& grid) {
    if (grid.intervals() < 256) {
        throw DomainError("operator: grid under-resolved (" + std::to_string(grid.intervals()) +
                          " < 256 intervals)");
    }
}

}  // namespace

Alpha::Alpha(double value) : value_(value) {
    if (!(value >= kMin && value <= kMax)) {
        throw DomainError("alpha must lie in [0.05, 0.95], got " + std::to_string(value));
    }
}

double recip_gamma(double x) {
    if (x > 0.0) return 1.0 / gamma(x);
    if (!std::isfinite(x)) throw DomainError("recip_gamma: non-finite argument");
    if (std::fabs(x - std::round(x)) < 1e-14) return 0.0;
    return x * recip_gamma(x + 1.0);
}

PanelWeights panel_weights(double tau, double a, double b, double mu) {
    if (!(mu > 0.0) || !(b > a) || tau < b) throw DomainError("panel_weights: bad arguments");
    const double U = tau - a;
    const double L = tau - b;
    const double Lmu = L > 0.0 ? std::pow(L, mu) : 0.0;
    return weights_from(U, L, b - a, Lmu, std::pow(U, mu), mu);
}

KernelPlan::KernelPlan(const GradedGrid& grid, double order)
    : order_(order), n_(grid.intervals()) {
    if (!(order > 0.0)) throw DomainError("kernel plan: order must be positive");
    const std::size_t total = n_ * (n_ + 1) / 2;
    wa_.resize(total);
    wb_.resize(total);
    wc_.resize(total);
    const auto t = grid.nodes();
    std::vector<double> pw(n_ + 1);
    for (std::size_t i = 1; i <= n_; ++i) {
        const double tau = t[i];
        for (std::size_t k = 0; k < i; ++k) pw[k] = std::pow(tau - t[k], order);
        pw[i] = 0.0;
        double* wa = wa_.data() + offset(i);
        double* wb = wb_.data() + offset(i);
        double* wc = wc_.data() + offset(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double h = t[k + 1] - t[k];
            const auto w = weights_from(tau - t[k], tau - t[k + 1], h, pw[k + 1], pw[k], order);
            wa[k] = w.at_a;
            wb[k] = w.at_b;
            wc[k] = bubble_moment(tau - t[k], tau - t[k + 1], h, order);
        }
    }
}

std::shared_ptr<const KernelPlan> kernel_plan(const GradedGrid& grid, double order) {
    const PlanKey key{grid.t_max(), grid.intervals(), grid.grading(), order};
    auto& cache = plan_cache();
    {
        std::lock_guard lock(cache.mu);
        for (auto it = cache.entries.begin(); it != cache.entries.end(); ++it) {
            if (it->first == key) {
                cache.entries.splice(cache.entries.begin(), cache.entries, it);
                return it->second;
            }
        }
    }
    auto plan = std::make_shared<const KernelPlan>(grid, order);
    std::lock_guard lock(cache.mu);
    cache.entries.emplace_front(key, plan);
    cache.bytes += plan->bytes();
    while (cache.bytes > kPlanCacheBytes && cache.entries.size() > 1) {
        cache.bytes -= cache.entries.back().second->bytes();
        cache.entries.pop_back();
    }
    return plan;
}

double kernel_integral(std::span<const double> r, const GradedGrid& grid, std::size_t m,
                       double tau, double mu) {
    const auto t = grid.nodes();
    if (m >= t.size() || r.size() != t.size() || tau < t[m]) {
        throw DomainError("kernel_integral: bad arguments");
    }
    const auto q = bubble_coefficients(r, t);
    double s = 0.0;
    double Umu = std::pow(tau - t[0], mu);
    for (std::size_t k = 0; k < m; ++k) {
        const double L = tau - t[k + 1];
        const double h = t[k + 1] - t[k];
        const double Lmu = L > 0.0 ? std::pow(L, mu) : 0.0;
        const auto w = weights_from(tau - t[k], L, h, Lmu, Umu, mu);
        s += w.at_a * r[k] + w.at_b * r[k + 1] + bubble_moment(tau - t[k], L, h, mu) * q[k];
        Umu = Lmu;
    }
    return s;
}

GridFunction frac_integral(const GridFunction& f, double order) {
    if (!(order > 0.0) || !std::isfinite(order)) {
        throw DomainError("frac_integral: order must be positive");
    }
    const auto& grid = f.grid();
    const auto t = grid.nodes();
    const auto plan = kernel_plan(grid, order);
    auto out = apply_plan(*plan, grid, f.regular_part(), 1.0 / gamma(order));

    std::optional<double> exponent;
    if (f.is_singular() && f.head() != 0.0) {
        const double e = f.singular_exponent();
        const double cc = f.head() * gamma(e + 1.0) / gamma(e + 1.0 + order);
        double ne = e + order;
        if (std::fabs(ne) < kExponentSnap) ne = 0.0;
        add_terms(out, t, {{cc, ne}});
        if (ne < 0.0) {
            out[0] = cc;
            exponent = ne;
        } else if (ne == 0.0) {
            out[0] += cc;
        }
    }
    GridFunction g(f.grid_ptr(), std::move(out), TailModel::zero(), exponent);
    return g.with_tail(fit_power_tail(g));
}

std::vector<double> differentiate(std::span<const double> v, const GradedGrid& grid) {
    const auto t = grid.nodes();
    const std::size_t n = t.size() - 1;
    if (v.size() != t.size()) throw GridMismatch("differentiate: size mismatch");
    std::vector<double> d(v.size());
    {
        const double h1 = t[1] - t[0], h2 = t[2] - t[1];
        d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * v[0] + (h1 + h2) / (h1 * h2) * v[1] -
               h1 / (h2 * (h1 + h2)) * v[2];
    }
    for (std::size_t j = 1; j < n; ++j) {
        const double h1 = t[j] - t[j - 1], h2 = t[j + 1] - t[j];
        d[j] = -h2 / (h1 * (h1 + h2)) * v[j - 1] + (h2 - h1) / (h1 * h2) * v[j] +
               h1 / (h2 * (h1 + h2)) * v[j + 1];
    }
    {
        const double h1 = t[n - 1] - t[n - 2], h2 = t[n] - t[n - 1];
        d[n] = h2 / (h1 * (h1 + h2)) * v[n - 2] - (h1 + h2) / (h1 * h2) * v[n - 1] +
               (2 * h2 + h1) / (h2 * (h1 + h2)) * v[n];
    }
    return d;
}

std::vector<double> second_derivative(std::span<const double> v, const GradedGrid& grid) {
    const auto t = grid.nodes();
    const std::size_t n = t.size() - 1;
    if (v.size() != t.size()) throw GridMismatch("second_derivative: size mismatch");
    std::vector<double> d(v.size());
    for (std::size_t j = 1; j < n; ++j) {
        const double h1 = t[j] - t[j - 1], h2 = t[j + 1] - t[j];
        d[j] = 2.0 * (v[j - 1] / (h1 * (h1 + h2)) - v[j] / (h1 * h2) + v[j + 1] / (h2 * (h1 + h2)));
    }
    d[0] = d[1];
    d[n] = d[n - 1];
    return d;
}

DerivativeResult rl_derivative(const GridFunction& f, Alpha alpha) {
    const auto& grid = f.grid();
    const auto t = grid.nodes();
    const double mu = 1.0 - alpha;
    auto r = f.regular_part();
    const double r0 = r[0];
    for (auto& x : r) x -= r0;
    const auto G = apply_plan(*kernel_plan(grid, mu), grid, r, 1.0 / gamma(mu));
    auto d = differentiate(G, grid);

    DerivativeResult res;
    for (std::size_t j = 1; j + 1 < t.size(); ++j) {
        const double h1 = t[j] - t[j - 1], h2 = t[j + 1] - t[j];
        const double spread = std::fabs(h2 / (h1 * (h1 + h2)) * G[j - 1]) +
                              std::fabs((h2 - h1) / (h1 * h2) * G[j]) +
                              std::fabs(h1 / (h2 * (h1 + h2)) * G[j + 1]);
        // Cancellation measured against the local relative step h / t.
        const double rel_step = 0.5 * (h1 + h2) / t[j];
        if (spread * rel_step > kUnstableSpread * std::fabs(d[j]) && spread > 0.0) {
            res.unstable_nodes.push_back(j);
        }
    }

    PowerTerm from_const{r0 * recip_gamma(mu), -alpha.value()};
    PowerTerm from_head{0.0, 0.0};
    if (f.is_singular() && f.head() != 0.0) {
        const double e = f.singular_exponent();
        const double shifted = e + 1.0 - alpha;
        const double coef =
            std::fabs(shifted) < kExponentSnap ? 0.0 : f.head() * gamma(e + 1.0) * recip_gamma(shifted);
        from_head = {coef, e - alpha};
        if (coef != 0.0 && !(from_head.exponent > -1.0)) {
            throw DomainError("rl_derivative: result is not locally integrable at 0");
        }
    }

    std::optional<double> exponent;
    double head = 0.0;
    if (from_const.coef != 0.0 || from_head.coef != 0.0) {
        PowerTerm lead = from_const.coef != 0.0 ? from_const : from_head;
        PowerTerm other = from_const.coef != 0.0 ? from_head : PowerTerm{0.0, 0.0};
        if (other.coef != 0.0 && std::fabs(other.exponent - lead.exponent) < kExponentSnap) {
            lead.coef += other.coef;
            other.coef = 0.0;
        } else if (other.coef != 0.0 && other.exponent < lead.exponent) {
            std::swap(lead, other);
        }
        add_terms(d, t, {lead, other});
        exponent = lead.exponent;
        head = lead.coef;
    }
    if (exponent) d[0] = head;
    GridFunction g(f.grid_ptr(), std::move(d), TailModel::zero(), exponent);
    res.value = g.with_tail(fit_power_tail(g));
    return res;
}

GridFunction conv_C(const GridFunction& a, Alpha alpha, KernelNormalization norm) {
    auto c = frac_integral(a, alpha.value());
    if (norm == KernelNormalization::rescaled) return c;
    const double g = gamma(alpha.value());
    return linear_combination(g, c, 0.0, c);
}

OperatorResult apply_operator(OperatorCase which, const GridFunction& x, Alpha alpha) {
    const auto& grid = x.grid();
    require_resolved(grid);
    const auto t = grid.nodes();
    const std::size_t N = t.size();
    const double a = alpha.value();
    const double mu = 1.0 - a;
    const double scale = 1.0 / gamma(mu);
    const auto plan = kernel_plan(grid, mu);

    std::vector<double> out;
    switch (which) {
        case OperatorCase::one:
            if (x.is_singular() && x.head() != 0.0) {
                throw DomainError("operator one: x must be absolutely continuous at 0");
            }
            [[fallthrough]];
        case OperatorCase::two: {
            auto r = x.regular_part();
            const double r0 = r[0];
            for (auto& v : r) v -= r0;
            out = second_derivative(apply_plan(*plan, grid, r, scale), grid);
            // case one acts on x - x(0), so only case two sees the constant.
            if (which == OperatorCase::two) add_terms(out, t, {{r0 * (-a) * recip_gamma(mu), -1.0 - a}});
            if (x.is_singular()) {
                const double e = x.singular_exponent();
                add_terms(out, t, {{x.head() * gamma(e + 1.0) * recip_gamma(e - a), e - a - 1.0}});
            }
            break;
        }
        case OperatorCase::three: {
            auto r = x.regular_part();
            const double r0 = r[0];
            for (auto& v : r) v -= r0;
            const auto s = slopes_of(r, t);
            std::vector<double> G(N, 0.0);
            for (std::size_t i = 1; i < N; ++i) {
                const double* wa = plan->row_a(i);
                const double* wb = plan->row_b(i);
                double acc = 0.0;
                for (std::size_t k = 0; k < i; ++k) {
                    const double h = t[k + 1] - t[k];
                    acc += s[k] * (t[k] * (wa[k] + wb[k]) + h * wb[k]);
                    acc -= wa[k] * r[k] + wb[k] * r[k + 1];
                }
                G[i] = scale * acc;
            }
            out = differentiate(G, grid);
            add_terms(out, t, {{-r0 * recip_gamma(mu), -a}});
            if (x.is_singular()) {
                const double e = x.singular_exponent();
                const double shifted = e + 1.0 - a;
                const double coef = std::fabs(shifted) < kExponentSnap
                                        ? 0.0
                                        : x.head() * (e - 1.0) * gamma(e + 1.0) * recip_gamma(shifted);
                add_terms(out, t, {{coef, e - a}});
            }
            break;
        }
        default:
            throw DomainError("operator: unknown case");
    }
    out[0] = 0.0;
    const std::size_t margin = (grid.intervals() * 2 + 99) / 100;
    OperatorResult res;
    res.value = GridFunction(x.grid_ptr(), std::move(out));
    res.trusted_begin = margin;
    res.trusted_end = N - margin;
    return res;
}

}  // namespace fracasym
