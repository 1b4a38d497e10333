#include <doctest.h>

#include <cmath>

#include "resuniv/diagnostics.hpp"

using namespace resuniv;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

HypothesisSet from_rows(std::vector<std::vector<double>> rows) {
    HypothesisSet H;
    H.values = std::move(rows);
    return H;
}

}  // namespace

TEST_CASE("fixed points") {
    const DomainSpec dom;
    const StateMap g = [](const Vec& x, const Vec&) { return Vec(0.5 * x + Vec::Constant(x.size(), 0.25)); };
    CHECK(find_fixed_point(g, dom, v1(0))[0] == doctest::Approx(0.5).epsilon(1e-11));
    const StateMap c = [](const Vec&, const Vec&) { return v1(-0.3); };
    CHECK(find_fixed_point(c, dom, v1(0))[0] == -0.3);
    const StateMap id = [](const Vec& x, const Vec&) { return x; };
    CHECK_THROWS_AS(find_fixed_point(id, dom, v1(0)), NonConvergence);
}

TEST_CASE("bump") {
    const Vec z = v1(0);
    CHECK(bump(z, z, 0.2, kInf) == 1.0);
    CHECK(bump(v1(0.2), z, 0.2, kInf) == 0.0);
    CHECK(bump(v1(0.1), v1(0.05), 0.2, kInf) == doctest::Approx(0.5));
    CHECK(bump(v1(0.09), z, 0.2, kInf) == 1.0);
    double prev = 1.0;
    for (int k = 0; k <= 100; ++k) {
        const double b = bump(v1(0.2 * k / 100), z, 0.2, kInf);
        CHECK(b <= prev);
        CHECK(b >= 0.0);
        prev = b;
    }
    CHECK_THROWS(bump(z, z, 0.0, kInf));
}

TEST_CASE("pseudo-dimension by enumeration") {
    CHECK(pdim_bruteforce(from_rows({{0.1, 0.1, 0.1}, {0.4, 0.4, 0.4}, {0.2, 0.2, 0.2}, {0.9, 0.9, 0.9}}), 2) == 1);
    CHECK(pdim_bruteforce(from_rows({{0.5, 0.2}}), 2) == 0);
    CHECK(pdim_bruteforce(from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}}), 2) == 2);
    CHECK(pdim_bruteforce(from_rows({{0, 0}, {0, 1}, {1, 0}, {2, 2}}), 2) == 2);
    // nested chain h_1 <= h_2 <= ... cannot realise opposite patterns
    CHECK(pdim_bruteforce(from_rows({{0, 0}, {0, 1}, {1, 1}, {2, 2}}), 2) == 1);
    CHECK_THROWS(pdim_bruteforce(from_rows({{0, 0}, {1}}), 1));
}

TEST_CASE("linear feasibility") {
    Mat A(2, 1);
    A << 1, -1;
    CHECK(lp_feasible(A, Vec((Vec(2) << 1, 0).finished())));
    CHECK_FALSE(lp_feasible(A, Vec((Vec(2) << 1, -2).finished())));
    CHECK(lp_feasible(A, Vec((Vec(2) << -0.5, 1).finished())));
    Mat Z = Mat::Zero(1, 2);
    CHECK_FALSE(lp_feasible(Z, v1(-1)));
    CHECK(lp_feasible(Z, v1(0)));
    Mat B(3, 2);
    B << 1, 1, -1, 0, 0, -1;
    CHECK(lp_feasible(B, Vec((Vec(3) << 1, 0, 0).finished())));
    CHECK_FALSE(lp_feasible(B, Vec((Vec(3) << 1, -0.6, -0.6).finished())));
}

TEST_CASE("linear pseudo-dimension equals the feature rank") {
    Rng rng(6);
    for (int r : {1, 2, 3}) {
        Mat L(8, r), R(r, 3);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < r; ++j) L(i, j) = rng.normal();
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < 3; ++j) R(i, j) = rng.normal();
        const Mat Phi = L * R;
        CHECK(pdim_linear_bruteforce(Phi, 4) == r);
    }
}

TEST_CASE("graft") {
    const DomainSpec dom;
    const auto g = make_strictly_contracting(dom, 0.5, 3, 2);
    for (double tau : {0.1, 0.01}) {
        const auto gm = graft_non_esp(g, v1(0), tau, 1);
        CHECK(std::abs(lp_norm(gm.z - gm.x0, kInf) - tau) <= 1e-12);
        const auto c = check_graft(gm, 2000, 3);
        CHECK(c.residual_x0 <= 1e-9);
        CHECK(c.residual_z <= 1e-9);
        CHECK(c.outside_gap == 0.0);
        CHECK(c.sup_gap <= 2 * c.eps);
        // both points are fixed, so trajectories from them never meet under the constant input
        const auto a = run_filter(gm.as_map(), gm.x0, InputSequence(20, v1(0)));
        const auto b = run_filter(gm.as_map(), gm.z, InputSequence(20, v1(0)));
        CHECK(lp_norm(a.back() - b.back(), kInf) == doctest::Approx(tau));
    }
    CHECK_THROWS(graft_non_esp(g, v1(0), 5.0, 1));
}
