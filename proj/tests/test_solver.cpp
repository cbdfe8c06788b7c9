#include <doctest.h>

#include <cmath>
#include <random>

#include "fracasym/error.hpp"
#include "fracasym/solver.hpp"
#include "oracle.hpp"

using namespace fracasym;

namespace {

GridPtr default_grid() { return make_graded_grid(kDefaultTMax, kDefaultNodes, kDefaultGrading); }
// 4000 intervals put a node exactly at t = 1: 100 (400/4000)^2 = 1.
GridPtr grid_with_one() { return make_graded_grid(100, 4000, 2.0); }

SolveSpec spec_for(SolveCase c, const char* expr, TailModel env, double a = 1, double b = 1,
                   GridPtr g = default_grid()) {
    SolveSpec s;
    s.which = c;
    s.alpha = Alpha(0.5);
    s.a = a;
    s.b = b;
    s.T = 1.0;
    s.coeff = Coefficient::from_expression(expr, env);
    s.grid = std::move(g);
    return s;
}

SolveSpec thm1_ref(double a = 1, double b = 1, GridPtr g = default_grid()) {
    return spec_for(SolveCase::thm1, "0.01/(1+t)^3.5", TailModel::power(0.01, 3.5, 0), a, b, std::move(g));
}

double node_value_at_one(const GridFunction& f) {
    const std::size_t j = f.grid().lower_index(1.0);
    REQUIRE(std::fabs(f.grid()[j] - 1.0) < 1e-14);
    return f.at(j);
}

}  // namespace

TEST_CASE("validate rejects degenerate scalars") {
    auto s = thm1_ref(0, 0);
    CHECK_THROWS_AS(validate(s), DomainError);
    s = thm1_ref();
    s.T = 0;
    CHECK_THROWS_AS(validate(s), DomainError);
    auto t3 = spec_for(SolveCase::thm3, "0", TailModel::zero(), 1, 0);
    CHECK_THROWS_AS(validate(t3), DomainError);
}

TEST_CASE("thm1 step with a zero coefficient is the head") {
    auto s = spec_for(SolveCase::thm1, "0", TailModel::zero(), 1, 2);
    auto ctx = make_context(s);
    auto x = step_thm1(GridFunction::zeros(s.grid), ctx);
    const auto t = s.grid->nodes();
    for (std::size_t j = 0; j < t.size(); j += 101) CHECK(x.values()[j] == doctest::Approx(1 + 2 * std::sqrt(t[j])).epsilon(1e-15));
}

TEST_CASE("thm1 first Picard iterate against nested quadrature") {
    auto s = thm1_ref(1, 1, grid_with_one());
    auto ctx = make_context(s);
    auto x1 = step_thm1(seed(ctx), ctx);
    auto a = [](double u) { return 0.01 / std::pow(1 + u, 3.5); };
    auto phi = [&](double v) { return oracle::quad_inf([&](double u) { return a(u) * (1 + std::sqrt(u)); }, v, 1e-12); };
    const double want = 2.0 + oracle::frac_integral(phi, 0.5, 1.0);
    CHECK(oracle::rel_err(node_value_at_one(x1), want) < 1e-8);
}

TEST_CASE("thm2 first Picard iterate against nested quadrature") {
    auto s = spec_for(SolveCase::thm2, "0.01*t^2/(1+t)^6", TailModel::power(0.01, 4, 0), 1, 0, grid_with_one());
    auto ctx = make_context(s);
    auto x1 = step_thm2(seed(ctx), ctx);
    auto a = [](double u) { return 0.01 * u * u / std::pow(1 + u, 6); };
    auto phi = [&](double v) { return oracle::quad_inf([&](double u) { return a(u) / std::sqrt(u); }, v, 1e-12); };
    const double want = 1.0 + oracle::frac_integral(phi, 0.5, 1.0);
    CHECK(oracle::rel_err(node_value_at_one(x1), want) < 1e-8);
}

TEST_CASE("thm2 step with a zero coefficient") {
    auto s = spec_for(SolveCase::thm2, "0", TailModel::zero(), 2, 3);
    auto ctx = make_context(s);
    auto x = step_thm2(GridFunction::zeros(s.grid), ctx);
    CHECK(x.head() == 2.0);
    const auto t = s.grid->nodes();
    for (std::size_t j = 1; j < t.size(); j += 101) {
        CHECK(x.at(j) == doctest::Approx(2 / std::sqrt(t[j]) + 3 * std::sqrt(t[j])).epsilon(1e-14));
    }
}

TEST_CASE("thm3 step head") {
    auto z = spec_for(SolveCase::thm3, "0", TailModel::zero(), 1.5, 1);
    auto zc = make_context(z);
    auto y = step_thm3(seed(zc), zc);
    CHECK(y.head() == 1.5);
    for (std::size_t j = 1; j < y.size(); j += 101) CHECK(y.at(j) == doctest::Approx(1.5 / std::sqrt(z.grid->nodes()[j])).epsilon(1e-14));

    auto s = spec_for(SolveCase::thm3, "0.005/(1+t)^2.5", TailModel::power(0.005, 2.5, 0), 1, 1);
    auto ctx = make_context(s);
    auto y1 = step_thm3(seed(ctx), ctx);
    const double M1 = oracle::quad_inf_split([](double u) { return u * 0.005 / std::pow(1 + u, 2.5); }, 0, {1, 10});
    CHECK(oracle::rel_err(ctx.first_moment, M1) < 1e-9);
    CHECK(oracle::rel_err(y1.head(), 1.0 + M1 / oracle::tgamma(0.5)) < 1e-9);
}

TEST_CASE("weighted tail inequality for the inverse-square tail") {
    const double al = 0.5;
    auto g = default_grid();
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    WeightedMetric m{WeightedMetric::Kind::sup_t_one_minus_alpha, 1.0, al};
    for (int i = 0; i < 20; ++i) {
        const double c = nd(rng), w = 1 + std::fabs(nd(rng)), d = nd(rng);
        auto y = GridFunction::sample_singular(
            g, [&](double t) { return std::fabs((c + std::sin(w * t) + d * std::exp(-t)) / std::sqrt(t)); }, al - 1,
            std::fabs(c + d));
        y = y.with_tail(TailModel::power(std::fabs(c) + 1 + std::fabs(d), 1 - al, 0));
        const auto Y = inverse_square_tail(y);
        const double bound = metric_distance(m, y, GridFunction::zeros(g)) / (2 - al);
        double sup = 0.0;
        for (std::size_t j = 1; j < g->size(); ++j) sup = std::max(sup, std::pow((*g)[j], 2 - al) * Y[j]);
        CHECK(sup <= bound * (1 + 1e-9));
    }
}

TEST_CASE("thm3 reconstruction") {
    const double al = 0.5;
    auto g = default_grid();
    auto x0 = reconstruct_thm3(GridFunction::zeros(g), 2.0);
    for (std::size_t j = 0; j < g->size(); j += 101) CHECK(x0.at(j) == doctest::Approx(2 * (*g)[j]).epsilon(1e-15));

    auto y = GridFunction::sample_singular(g, [&](double t) { return std::pow(t, al - 1); }, al - 1, 1.0,
                                           TailModel::power(1.0, 1 - al, 0));
    auto x = reconstruct_thm3(y, 2.0);
    const auto t = g->nodes();
    for (std::size_t j = 1; j < t.size(); j += 53) {
        const double want = 2 * t[j] - std::pow(t[j], al - 1) / (2 - al);
        CHECK(std::fabs(x.at(j) - want) <= 1e-9 * std::max(1.0, std::fabs(want)));
    }
}

TEST_CASE("reconstruction of x from a zero y") {
    auto g = default_grid();
    const auto r = reconstruct_prop1(GridFunction::zeros(g));
    for (double v : r.x.values()) CHECK(v == 1.0);
    CHECK(r.y0 == 0.0);
    CHECK(r.x_prime_L1 == 0.0);
    CHECK(r.x_prime_Linf == 0.0);
}

TEST_CASE("lemma2 step") {
    auto s = spec_for(SolveCase::lemma2, "0.01*(1-t)*exp(-t)", TailModel::power(0.3, 3, 10));
    auto ctx = make_context(s);
    const auto& C = ctx.profile->C;
    auto g = s.grid;
    auto zc = GridFunction::zeros(g);
    auto y = GridFunction::sample(g, [](double t) { return std::exp(-t); }, TailModel::power(1, 10, 20));
    for (double v : step_lemma2(y, zc).values()) CHECK(v == 0.0);
    auto m = step_lemma2(GridFunction::zeros(g), C);
    for (std::size_t j = 0; j < g->size(); ++j) CHECK(m.values()[j] == -C.values()[j]);

    // the ball |y| <= gamma C* is mapped into itself
    const auto l = lemma2_constants(*ctx.profile);
    REQUIRE(l.gamma_feasible);
    const auto& Cs = ctx.profile->C_star;
    std::vector<double> v(g->size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = l.gamma * Cs.values()[j] * std::cos(3 * (*g)[j]);
    auto yb = GridFunction(g, std::move(v));
    REQUIRE(Cs.tail().kind == TailModel::Kind::power);
    yb = yb.with_tail(TailModel::anchored(g->t_max(), yb.values().back(), Cs.tail().exponent));
    auto out = step_lemma2(yb, C);
    for (std::size_t j = 0; j < g->size(); ++j) CHECK(std::fabs(out.values()[j]) <= l.gamma * Cs.values()[j] * (1 + 1e-9));
}

TEST_CASE("solve with a zero coefficient converges at once") {
    auto s = spec_for(SolveCase::thm1, "0", TailModel::zero(), 1, 2);
    const auto r = solve(s);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    REQUIRE(r.distances.size() == 1);
    CHECK(r.distances[0] == 0.0);
}

TEST_CASE("solve thm1 reference instance") {
    const auto r = solve(thm1_ref());
    CHECK(r.converged);
    CHECK(r.hypotheses_pass);
    CHECK(r.observed_ratio <= r.predicted_k + 0.05);
    CHECK_FALSE(r.ratio_exceeded);
    CHECK(r.distances.back() <= 1e-10);
}

TEST_CASE("solution map is linear in the scalars") {
    const double lam = -2.5;
    const auto r1 = solve(thm1_ref(1, 1));
    const auto r2 = solve(thm1_ref(lam, lam));
    for (std::size_t j = 0; j < r1.solution.size(); ++j) {
        CHECK(std::fabs(r2.solution.values()[j] - lam * r1.solution.values()[j]) <=
              1e-8 * std::max(1.0, std::fabs(r2.solution.values()[j])));
    }
}

TEST_CASE("failing hypotheses stop the solve unless overridden") {
    auto s = spec_for(SolveCase::thm1, "3/(1+t)^3.5", TailModel::power(3, 3.5, 0));
    CHECK_THROWS_AS(solve(s), HypothesisError);
    s.override_hypotheses = true;
    s.max_iterations = 5;
    const auto r = solve(s);
    CHECK_FALSE(r.hypotheses_pass);
    CHECK(r.iterations <= 5);
}

TEST_CASE("every case converges on its reference coefficient") {
    auto t2 = spec_for(SolveCase::thm2, "0.01*t^2/(1+t)^6", TailModel::power(0.01, 4, 0));
    auto t3 = spec_for(SolveCase::thm3, "0.005/(1+t)^2.5", TailModel::power(0.005, 2.5, 0));
    auto l2 = spec_for(SolveCase::lemma2, "0.01*(1-t)*exp(-t)", TailModel::power(0.3, 3, 10));
    for (const auto& s : {t2, t3, l2}) {
        const auto r = solve(s);
        CHECK(r.converged);
        CHECK(r.observed_ratio <= r.predicted_k + 0.05);
        CHECK(std::isfinite(r.tail_budget));
    }
}
