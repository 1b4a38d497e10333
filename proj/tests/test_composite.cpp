#include <doctest.h>

#include <cmath>

#include "resuniv/composite.hpp"

using namespace resuniv;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

StateMap linear(double a, double b) {
    return [a, b](const Vec& x, const Vec& u) { return Vec(a * x + b * u); };
}

InputSequence seq_of(std::initializer_list<double> us) {
    InputSequence s;
    for (double u : us) s.push_back(v1(u));
    return s;
}

}  // namespace

TEST_CASE("block-diagonal network matches the per-component runs") {
    for (int D : {1, 2}) {
        DomainSpec dom;
        dom.D = D;
        ConcatenatedReservoir res(CoveringSpec::make(dom, 1.0, 1, 0.5));
        Rng rng(static_cast<std::uint64_t>(D));
        for (int k = 0; k < 3; ++k) res.add(snap_vector(random_family_vector(res.spec, rng), res.spec).index);
        const std::vector<std::size_t> ids{0, 1, 2};
        const auto net = block_diagonal(res, ids);
        InputSequence seq;
        for (int t = 0; t < 12; ++t) seq.push_back(sample_in_ball(1, kInf, 1.0, rng));
        const auto per = concat_run(res, ids, seq);
        const auto mono = block_diagonal_run(net, Vec::Zero(3 * D), seq);
        for (std::size_t t = 0; t < seq.size(); ++t)
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const Vec w = one_hot_readout(ids.size(), D, i) * mono[t];
                CHECK((w - per[i][t]).cwiseAbs().maxCoeff() <= 1e-12);
            }
    }
    DomainSpec dom;
    ConcatenatedReservoir res(CoveringSpec::make(dom, 1.0, 1, 0.5));
    CoverIndex bad;
    CHECK_THROWS_AS(res.add(bad), std::out_of_range);
    CHECK_THROWS_AS(one_hot_readout(2, 1, 2), std::out_of_range);
}

TEST_CASE("cascade recursion") {
    const auto g = linear(0.5, 1.0);
    const auto u = seq_of({0.2, -0.4, 0.8, 0.1});
    const CascadeReservoir c1{g, 1, v1(0)};
    const auto y1 = cascade_run(c1, u);
    for (std::size_t t = 0; t < u.size(); ++t) CHECK(y1[t][0] == doctest::Approx(u[t][0]));

    const CascadeReservoir c2{g, 2, v1(0)};
    const auto y2 = cascade_run(c2, u);
    CHECK(y2[0][0] == doctest::Approx(0.2));
    for (std::size_t t = 1; t < u.size(); ++t) CHECK(y2[t][0] == doctest::Approx(0.5 * u[t - 1][0] + u[t][0]));

    const auto rows = cascade_rows(c2, u);
    CHECK(rows[1][0] == doctest::Approx(y2.back()[0]));
    CHECK(rows[0][0] == doctest::Approx(0.1));
    CHECK_THROWS(cascade_run(c2, {}));
}

TEST_CASE("cascade forgets its initial block after T steps") {
    const StateMap g = [](const Vec& x, const Vec& u) { return Vec((0.3 * x + 0.6 * u).array().tanh().matrix()); };
    for (int T : {1, 3, 5}) {
        const CascadeReservoir c{g, T, v1(0)};
        InputSequence u;
        for (int t = 0; t < 2 * T + 2; ++t) u.push_back(v1(std::sin(1.3 * t)));
        const auto a = cascade_run(c, u, Vec(Vec::Constant(T, 0.9)));
        const auto b = cascade_run(c, u, Vec(Vec::Constant(T, -0.7)));
        for (std::size_t t = static_cast<std::size_t>(T) - 1; t < u.size(); ++t) CHECK(a[t] == b[t]);
    }
}

TEST_CASE("finite memory gap of a linear contraction") {
    TargetSystem g;
    g.state_map = linear(0.5, 0.5);
    g.P = 0.5;
    g.L = 0.5;
    InputSampler s;
    for (int T : {1, 2, 4}) {
        const double gap = finite_memory_gap(g, T, default_burn_in(T, 0.5, 1.0), s, 32, 3);
        CHECK(gap <= 2 * std::pow(0.5, T));
    }
    CHECK(default_burn_in(2, 0.5, 1.0, 0.25) == 5);
}

TEST_CASE("error bounds") {
    CHECK(cascade_error_bound(0.01, 0.1, 0.5, 3) == doctest::Approx(0.185).epsilon(1e-14));
    CHECK(cascade_error_bound(0, 0.1, 0.5, 1) == doctest::Approx(0.1));
    CHECK_THROWS(cascade_error_bound(-1, 0.1, 0.5, 1));
}

TEST_CASE("scale report") {
    const auto r1 = scale_report(1, 1, 1, 1.0, 0.5, kInf);
    CHECK(r1.T == 1);
    CHECK(r1.Gamma == 1.0);
    CHECK(scale_report(4, 1, 1, 1.0, 0.5, kInf).T == 1);
    CHECK(scale_report(16, 1, 1, 1.0, 0.5, kInf).T == 2);
    CHECK(scale_report(17, 1, 1, 1.0, 0.5, kInf).T == 3);
    const auto r = scale_report(4, 1, 1, 1.0, 0.5, kInf);
    CHECK(r.node_count == BigInt(r.T) * 16 * r.covering_bound);
}

TEST_CASE("worst error") {
    DomainSpec dom;
    const auto spec = CoveringSpec::make(dom, 1.0, 4, 0.1);
    const auto empty = worst_error(spec, {}, InputSampler{}, 4, ApproxOptions{}, 1);
    CHECK(empty.werr_hat == 0.0);
    CHECK(empty.rows.empty());

    std::vector<TargetSystem> ts;
    for (std::uint64_t k = 0; k < 3; ++k) ts.push_back(make_strictly_contracting(dom, 0.5, 2, k));
    InputSampler s;
    s.n_random = 16;
    const auto rep = worst_error(spec, ts, s, 4, ApproxOptions{}, 7);
    REQUIRE(rep.rows.size() == 3);
    for (const auto& row : rep.rows) {
        CHECK(row.werr <= row.bound);
        CHECK(row.cover_gap <= row.eps_hat + spec.Gamma + 1e-12);
    }
    CHECK(rep.werr_hat <= rep.bound);
    const auto again = worst_error(spec, ts, s, 4, ApproxOptions{}, 7);
    CHECK(again.werr_hat == rep.werr_hat);
}

TEST_CASE("cascade reduction") {
    InputSampler s;
    s.n_random = 20;
    const auto seqs = sample_input_sequences(DomainSpec{}, 10, s);
    const Mat W = Mat::Identity(1, 1);
    for (int T : {1, 2, 4}) {
        const auto r = cascade_reduction_check(linear(0.5, 0.5), linear(0.4, 0.6), W, W, v1(0), T, seqs, kInf);
        CHECK(r.holds());
        CHECK(r.cascade_gap > 0);
    }
    const auto same = cascade_reduction_check(linear(0.5, 0.5), linear(0.5, 0.5), W, W, v1(0), 3, seqs, kInf);
    CHECK(same.cascade_gap == 0.0);
}
