#include <doctest.h>

#include <cmath>

#include "resuniv/covering.hpp"
#include "resuniv/dynsys.hpp"

using namespace resuniv;

TEST_CASE("interval coverings") {
    CHECK(interval_covering(-1, 1, 0.5) == std::vector<double>{-0.5, 0.5});
    CHECK(interval_covering(-1, 1, 1) == std::vector<double>{0.0});
    for (double r : {0.3, 0.07, 0.011}) {
        const auto g = interval_covering(-2, 3, r);
        CHECK(static_cast<double>(g.size()) <= 5 / (2 * r) + 1);
        CHECK(g.back() <= 3.0);
        for (int k = 0; k <= 1000; ++k) {
            const double x = -2 + 5 * k / 1000.0;
            double best = kInf;
            for (double y : g) best = std::min(best, std::abs(x - y));
            CHECK(best <= r * (1 + 1e-12));
        }
    }
}

TEST_CASE("ball grids") {
    const BallGrid g1(1.0, 1, kInf, 0.25);
    CHECK(g1.points().size() == interval_covering(-1, 1, 0.25).size());

    for (double q : {1.0, 2.0, kInf}) {
        const BallGrid g(1.0, 2, q, 1.0 / 3);
        Rng rng(8);
        for (int k = 0; k < 10000; ++k) {
            const Vec x = sample_in_ball(2, q, 1.0, rng);
            const auto idx = g.snap(x);
            CHECK(g.valid(idx.data()));
            const Vec y = g.decode(idx.data());
            CHECK(lp_norm(y - x, q) <= 1.0 / 3 + 1e-12);
            CHECK(lp_norm(y, q) <= 1.0 + 1e-12);
            CHECK(g.snap(y) == idx);
        }
        CHECK(g.size() == BigInt(g.points().size()));
    }
    const BallGrid lat(1.0, 2, 1.0, 1.0);
    CHECK(lat.lattice());
    CHECK(lat.size() >= 1);
}

TEST_CASE("cardinality") {
    CHECK(covering_existence_bound(1, 1, 1, 1, kInf, 160) == BigInt(131072));
    DomainSpec dom;
    const auto triv = covering_cardinality(CoveringSpec::make(dom, 1.0, 1, 1e6));
    CHECK(triv.constructive == 1);
    const auto spec = CoveringSpec::make(dom, 1.0, 2, 0.7);
    const auto r = covering_cardinality(spec);
    CHECK(r.constructive >= 1);
    CHECK(r.size_a.convert_to<double>() <= r.bound_a);
    CHECK(r.size_d.convert_to<double>() <= r.bound_d);
    CHECK(r.size_e.convert_to<double>() <= r.bound_e);
    // per node (a, b, c, d), 4 D N nodes, then e
    const auto per = r.size_a * r.size_b * r.size_c * r.size_d;
    BigInt prod = 1;
    for (int i = 0; i < 8; ++i) prod *= per;
    CHECK(r.constructive == prod * r.size_e);
    CHECK(covering_cardinality(spec).constructive == r.constructive);
}

TEST_CASE("snap soundness") {
    for (double p : {kInf, 2.0}) {
        for (int D : {1, 2}) {
            DomainSpec dom;
            dom.p = p;
            dom.D = D;
            const double Gamma = 0.4;
            const auto spec = CoveringSpec::make(dom, 1.0, 1, Gamma);
            const auto grid = make_eval_grid(dom, 3000, 300, 2);
            Rng rng(10 + D);
            for (int k = 0; k < 30; ++k) {
                const auto f = random_family_vector(spec, rng);
                const auto s = snap_vector(f, spec);
                CHECK(family_membership(s.net, 1.0, 1, dom));
                CHECK(measured_gap(f, s.net, grid, p) <= Gamma);
                for (int i = 0; i < D; ++i) {
                    const auto& fi = f.components[static_cast<std::size_t>(i)];
                    const auto& si = s.net.components[static_cast<std::size_t>(i)];
                    const double gap = (fi.eval_batch(grid.states, grid.inputs) - si.eval_batch(grid.states, grid.inputs))
                                           .cwiseAbs()
                                           .maxCoeff();
                    const auto t = param_perturbation_terms(fi, si, 1.0, dom);
                    CHECK(gap <= Gamma / dim_root(D, p));
                    CHECK(gap <= t.total() + 1e-12);
                    for (double term : {t.a, t.b, t.c, t.d, t.e}) CHECK(term <= Gamma / (5 * dim_root(D, p)) * (1 + 1e-12));
                }
                CHECK(materialize(s.index, spec) == s.net);
                CHECK(snap_vector(s.net, spec).index == s.index);
            }
        }
    }
}

TEST_CASE("identical components snap identically and decoding is injective") {
    DomainSpec dom;
    dom.D = 2;
    const auto spec = CoveringSpec::make(dom, 1.0, 1, 0.5);
    Rng rng(1);
    auto f = random_family_vector(spec, rng);
    f.components[1] = f.components[0];
    const auto s = snap_vector(f, spec);
    const auto len = spec.component_length();
    CHECK(std::equal(s.index.flat.begin(), s.index.flat.begin() + static_cast<long>(len), s.index.flat.begin() + static_cast<long>(len)));
    auto other = s.index;
    other.flat[0] = other.flat[0] == 0 ? 1 : 0;
    CHECK_FALSE(materialize(other, spec) == s.net);

    // product grids in one dimension: index 0 decodes to the first point of every axis
    const auto spec1 = CoveringSpec::make(DomainSpec{}, 1.0, 1, 0.5);
    CoverIndex zero;
    zero.flat.assign(spec1.component_length(), 0);
    const auto z = materialize(zero, spec1);
    CHECK(z.components[0].a[0] == spec1.grid_a.front());
    CHECK(z.components[0].e == spec1.grid_e.front());
    auto bad = zero;
    bad.flat[0] = static_cast<std::uint32_t>(spec1.grid_a.size());
    CHECK_FALSE(index_valid(bad, spec1));
    CHECK_THROWS_AS(materialize(bad, spec1), std::out_of_range);
    bad.flat.pop_back();
    CHECK_FALSE(index_valid(bad, spec1));
}

TEST_CASE("snap of an on-grid network is exact") {
    DomainSpec dom;
    const auto spec = CoveringSpec::make(dom, 1.0, 1, 0.5);
    Rng rng(2);
    const auto f = snap_vector(random_family_vector(spec, rng), spec).net;
    const auto again = snap_vector(f, spec);
    CHECK(again.net == f);
}

TEST_CASE("p bound") {
    CHECK(p_bound(1, 1, 1, 4, 0.1, 1, kInf) == doctest::Approx(0.80710678118654752).epsilon(1e-14));
    CHECK(p_bound(1, 1, 1, 1 << 20, 0.1, 1, kInf) == doctest::Approx(0.1).epsilon(0.02));
    CHECK(p_bound(1, 1, 1, 16, 0.1, 1, kInf) < p_bound(1, 1, 1, 4, 0.1, 1, kInf));
    CHECK(p_bound(1, 1, 1, 4, 0.2, 1, kInf) > p_bound(1, 1, 1, 4, 0.1, 1, kInf));
}
