#include <doctest.h>

#include <cmath>

#include "resuniv/covering.hpp"
#include "resuniv/fnn.hpp"

using namespace resuniv;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

// direct summation, written independently of eval_batch
double direct(const ScalarFnn& f, const Vec& s, const Vec& u) {
    double out = f.e;
    for (int n = 0; n < f.hidden_count(); ++n) {
        double z = f.d[n];
        for (int j = 0; j < s.size(); ++j) z += f.b(n, j) * s[j];
        for (int j = 0; j < u.size(); ++j) z += f.c(n, j) * u[j];
        out += f.a[n] * f.act(z);
    }
    return out;
}

}  // namespace

TEST_CASE("evaluation") {
    auto f = ScalarFnn::zeros(3, 1, 1);
    f.e = 0.7;
    CHECK(f(v1(0.3), v1(-0.2)) == 0.7);

    auto g = ScalarFnn::zeros(1, 1, 1);
    g.a[0] = 1;
    g.b(0, 0) = 1;
    CHECK(g(v1(-1), v1(0)) == 0.0);
    CHECK(g(v1(2), v1(0)) == 2.0);

    Rng rng(3);
    auto h = ScalarFnn::zeros(7, 2, 3);
    h.a = Vec::Random(7);
    h.b = Mat::Random(7, 2);
    h.c = Mat::Random(7, 3);
    h.d = Vec::Random(7);
    h.e = -0.1;
    Mat S(2, 50), U(3, 50);
    for (int j = 0; j < 50; ++j) {
        S.col(j) = sample_in_ball(2, 2.0, 1.0, rng);
        U.col(j) = sample_in_ball(3, 2.0, 1.0, rng);
    }
    const Vec batch = h.eval_batch(S, U);
    for (int j = 0; j < 50; ++j) {
        CHECK(std::abs(h(S.col(j), U.col(j)) - direct(h, S.col(j), U.col(j))) <= 1e-12);
        CHECK(std::abs(batch[j] - direct(h, S.col(j), U.col(j))) <= 1e-12);
    }
    auto hs = h;
    hs.act = Activation::sig(SigmoidSpec::logistic());
    CHECK(std::abs(hs(S.col(0), U.col(0)) - direct(hs, S.col(0), U.col(0))) <= 1e-12);
    CHECK_THROWS(h(v1(0), Vec::Zero(3)));
}

TEST_CASE("flat parameter record") {
    auto f = ScalarFnn::zeros(2, 2, 1);
    f.a << 1, 2;
    f.b << 3, 4, 5, 6;
    f.c << 7, 8;
    f.d << 9, 10;
    f.e = 11;
    const std::vector<double> expect{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    CHECK(f.flatten() == expect);
}

TEST_CASE("table sigmoid") {
    const auto s = SigmoidSpec::table(-2, 2, {0.0, 0.25, 0.5, 0.75, 1.0}, 0.25);
    CHECK(s(-5) == 0.0);
    CHECK(s(0) == doctest::Approx(0.5));
    CHECK(s(0.5) == doctest::Approx(0.625));
    CHECK(s(9) == 1.0);
    CHECK_THROWS(SigmoidSpec::table(-1, 1, {0.0, 0.8, 0.6, 1.0}, 5.0));
    CHECK_THROWS(SigmoidSpec::table(-1, 1, {0.0, 1.0}, 0.1));
}

TEST_CASE("family membership") {
    const DomainSpec dom;
    auto f = ScalarFnn::zeros(4, 1, 1);
    CHECK(family_membership(f, 1.0, 1, dom));
    f.a[2] = 2.0 + 0.001;
    CHECK_FALSE(family_membership(f, 1.0, 1, dom));
    f.a[2] = 2.0;
    CHECK(family_membership(f, 1.0, 1, dom));
    f.e = 1.5;
    CHECK_FALSE(family_membership(f, 1.0, 1, dom));
    CHECK_FALSE(family_membership(ScalarFnn::zeros(5, 1, 1), 1.0, 1, dom));
}

TEST_CASE("perturbation bound") {
    const DomainSpec dom;
    auto f = ScalarFnn::zeros(4, 1, 1);
    CHECK(param_perturbation_bound(f, f, 1.0, dom) == 0.0);
    auto g = f;
    g.e = 0.3;
    CHECK(param_perturbation_bound(f, g, 1.0, dom) == doctest::Approx(0.3));

    const auto spec = CoveringSpec::make(dom, 1.0, 1, 0.5);
    Rng rng(19);
    Mat S(1, 401), U(1, 401);
    for (int j = 0; j < 401; ++j) {
        S(0, j) = -1 + j / 200.0;
        U(0, j) = std::sin(7.0 * j);
    }
    for (int k = 0; k < 100; ++k) {
        const auto a = random_family_member(spec, rng);
        const auto b = random_family_member(spec, rng);
        const double gap = (a.eval_batch(S, U) - b.eval_batch(S, U)).cwiseAbs().maxCoeff();
        CHECK(gap <= param_perturbation_bound(a, b, 1.0, dom) + 1e-12);
    }
}

TEST_CASE("internal error bound") {
    CHECK(internal_error_bound(0.3, 0.7, 1) == doctest::Approx(0.3));
    CHECK(internal_error_bound(0.1, 0.5, 3) == doctest::Approx(0.175).epsilon(1e-14));
    CHECK(internal_error_bound(0.2, 1.0, 5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(internal_error_bound(0.1, 1.0 + 1e-12, 4) == doctest::Approx(0.4).epsilon(1e-9));
    CHECK_THROWS(internal_error_bound(0.1, 0.5, 0));
}

TEST_CASE("state Lipschitz bound dominates sampled slopes") {
    auto f = ScalarFnn::zeros(5, 2, 1, Activation::sig(SigmoidSpec::logistic()));
    f.a = Vec::Random(5);
    f.b = Mat::Random(5, 2);
    f.c = Mat::Random(5, 1);
    f.d = Vec::Random(5);
    const double L = state_lipschitz_bound(f, kInf);
    Rng rng(4);
    for (int k = 0; k < 500; ++k) {
        const Vec x = sample_in_ball(2, kInf, 1.0, rng), y = sample_in_ball(2, kInf, 1.0, rng);
        const Vec u = sample_in_ball(1, kInf, 1.0, rng);
        CHECK(std::abs(f(x, u) - f(y, u)) <= L * lp_norm(x - y, kInf) + 1e-12);
    }
}
