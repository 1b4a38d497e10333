#include <doctest.h>

#include <cmath>

#include "resuniv/dynsys.hpp"

using namespace resuniv;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

StateMap linear(double a, double b, double c = 0.0) {
    return [a, b, c](const Vec& x, const Vec& u) { return Vec(a * x + b * u + Vec::Constant(x.size(), c)); };
}

TargetSystem wrap(StateMap g, double P, double L) {
    TargetSystem s;
    s.state_map = std::move(g);
    s.P = P;
    s.L = L;
    return s;
}

}  // namespace

TEST_CASE("recursion") {
    const auto xs = run_filter(linear(0.5, 0.5), v1(0), {v1(1), v1(1)});
    REQUIRE(xs.size() == 2);
    CHECK(xs[0][0] == doctest::Approx(0.5));
    CHECK(xs[1][0] == doctest::Approx(0.75));
    CHECK(run_filter(linear(0.5, 0.5), v1(0), {}).empty());
    for (const auto& x : run_filter(linear(0, 0), v1(0.3), {v1(1), v1(-1), v1(0.2)})) CHECK(x[0] == 0.0);
}

TEST_CASE("domain escape is signalled") {
    DomainSpec dom;
    CHECK_THROWS_AS(run_filter(linear(1.0, 1.0), v1(0.5), {v1(1), v1(1)}, &dom), DomainViolation);
    CHECK_THROWS_AS(run_filter(linear(0.0, 0.0), v1(2.0), {v1(1)}, &dom), DomainViolation);
    CHECK_NOTHROW(run_filter(linear(1.0, 0.0), v1(1.0 + 1e-10), {v1(1)}, &dom));
}

TEST_CASE("filter distance") {
    const DomainSpec dom;
    InputSampler s;
    s.n_random = 8;
    const auto seqs = sample_input_sequences(dom, 5, s);
    CHECK(filter_distance(linear(0.5, 0.2), v1(0), linear(0.5, 0.2), v1(0), seqs, kInf) == 0.0);
    CHECK(filter_distance(linear(0, 0, 0.3), v1(0), linear(0, 0, -0.1), v1(0), seqs, kInf) == doctest::Approx(0.4));
    const auto ab = filter_distance(linear(0.5, 0.2), v1(0), linear(0.3, 0.4), v1(0), seqs, kInf);
    const auto ba = filter_distance(linear(0.3, 0.4), v1(0), linear(0.5, 0.2), v1(0), seqs, kInf);
    CHECK(ab == ba);
}

TEST_CASE("exhaustive corners match a brute-force enumeration") {
    const DomainSpec dom;
    InputSampler s;
    s.n_random = 0;
    s.constant_corners = false;
    s.exhaustive_corners = true;
    const auto seqs = sample_input_sequences(dom, 4, s);
    REQUIRE(seqs.size() == 16);
    // closed form for linear maps from x = 0: x_t = sum_k a^{t-1-k} b u_k
    const double a1 = 0.6, b1 = 0.3, a2 = 0.4, b2 = 0.35;
    double brute = 0;
    for (int mask = 0; mask < 16; ++mask) {
        double x1 = 0, x2 = 0;
        for (int t = 0; t < 4; ++t) {
            const double u = (mask >> t & 1) ? 1.0 : -1.0;
            x1 = a1 * x1 + b1 * u;
            x2 = a2 * x2 + b2 * u;
            brute = std::max(brute, std::abs(x1 - x2));
        }
    }
    CHECK(filter_distance(linear(a1, b1), v1(0), linear(a2, b2), v1(0), seqs, kInf) == doctest::Approx(brute).epsilon(1e-14));
}

TEST_CASE("internal approximation bound on sampled sequences") {
    const DomainSpec dom;
    // g contracts with L = 0.5; f = g + 0.05 sin(3x + u) is within eps = 0.05
    const auto g = linear(0.5, 0.25);
    const StateMap f = [](const Vec& x, const Vec& u) {
        return Vec(0.5 * x + 0.25 * u + 0.05 * (3 * x + u).array().sin().matrix());
    };
    InputSampler s;
    s.n_random = 64;
    for (int T : {2, 4, 8}) {
        const auto seqs = sample_input_sequences(dom, static_cast<std::size_t>(T), s);
        CHECK(filter_distance(f, v1(0), g, v1(0), seqs, kInf) <= internal_error_bound(0.05, 0.5, T));
    }
}

TEST_CASE("Lipschitz estimates") {
    const DomainSpec dom;
    const double L = estimate_lipschitz(linear(0.5, 1.0), dom, 200, 1);
    CHECK(L <= 0.5 + 1e-12);
    CHECK(L >= 0.5 - 1e-9);
    CHECK(estimate_lipschitz(linear(0, 0, 0.2), dom, 100, 1) == 0.0);

    DomainSpec d2;
    d2.D = 2;
    Mat A(2, 2);
    A << 0.3, -0.2, 0.1, 0.4;
    const StateMap g = [A](const Vec& x, const Vec&) { return Vec(A * x); };
    // induced inf-norm is the maximal absolute row sum
    const double est = estimate_lipschitz(g, d2, 5000, 2);
    CHECK(est <= 0.5 + 1e-12);
    CHECK(est >= 0.4);
}

TEST_CASE("assumption checks") {
    auto zero = wrap(linear(0, 0), 0.1, 0.0);
    zero.domain = DomainSpec{};
    auto r = check_assumptions(zero, 20);
    CHECK(r.domain_preserving);
    CHECK(r.lipschitz);

    auto id = wrap(linear(1, 0), 0.9, 1.0);
    id.domain = DomainSpec{};
    r = check_assumptions(id, 20);
    CHECK_FALSE(r.domain_preserving);
    CHECK(r.measured_range == doctest::Approx(1.0));

    const DomainSpec dom;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto g = make_strictly_contracting(dom, 0.5, 3, seed);
        CHECK(check_assumptions(g, 30).ok());
        const auto prof = contraction_profile(g, 6, 32, seed);
        for (int t = 1; t <= 6; ++t) CHECK(prof[static_cast<std::size_t>(t - 1)] <= 2 * dom.S * std::pow(0.5, t));
    }
    const auto c = make_strictly_contracting(dom, 0.5, 0, 3);
    CHECK(c.L == 0.0);
}

TEST_CASE("contraction profiles") {
    auto g = wrap(linear(0.5, 0.25), 0.75, 0.5);
    g.domain = DomainSpec{};
    const auto p = contraction_profile(g, 5, 16, 1);
    for (int t = 1; t <= 5; ++t) CHECK(p[static_cast<std::size_t>(t - 1)] <= 2 * std::pow(0.5, t) + 1e-12);
    auto c = wrap(linear(0, 0, 0.1), 0.1, 0);
    c.domain = DomainSpec{};
    for (double d : contraction_profile(c, 4, 8, 1)) CHECK(d == 0.0);
    auto id = wrap(linear(1, 0), 1, 1);
    id.domain = DomainSpec{};
    const auto q = contraction_profile(id, 6, 16, 1);
    CHECK(q.back() == doctest::Approx(2.0));
}

TEST_CASE("vector approximation") {
    DomainSpec dom;
    const auto g = make_strictly_contracting(dom, 0.5, 3, 9);
    const auto f = approximate_system(g, 8, ApproxOptions{}, 5);
    const auto f1 = approximate_relu(g.components[0], 8, derive_seed(5, 0xa5, 0));
    CHECK(f.components[0] == f1);

    DomainSpec d2;
    d2.D = 2;
    d2.p = 2.0;
    auto sys = make_strictly_contracting(d2, 0.5, 2, 4);
    sys.components[1] = sys.components[0];
    const std::uint64_t seeds[] = {17, 17};
    const auto fv = approximate_system(sys, 4, ApproxOptions{}, seeds);
    CHECK(fv.components[0] == fv.components[1]);

    const auto fv2 = approximate_system(sys, 6, ApproxOptions{}, 3);
    const auto grid = make_eval_grid(d2, 2000, 200, 1);
    double worst = 0;
    for (int i = 0; i < 2; ++i)
        worst = std::max(worst, measured_gap(fv2.components[static_cast<std::size_t>(i)], sys.components[static_cast<std::size_t>(i)], grid));
    CHECK(measured_gap(fv2, sys, grid) <= std::sqrt(2.0) * worst + 1e-12);
}

TEST_CASE("evaluation grid") {
    DomainSpec dom;
    dom.D = 2;
    dom.p = 1.0;
    const auto g = make_eval_grid(dom, 10000, 1000, 3);
    CHECK(g.size() >= 11000);
    for (Eigen::Index j = 0; j < g.states.cols(); ++j) {
        CHECK(in_ball(g.states.col(j), dom.S, dom.p));
        CHECK(in_ball(g.inputs.col(j), dom.I, dom.p));
    }
}
