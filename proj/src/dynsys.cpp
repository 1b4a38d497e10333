#include "resuniv/dynsys.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace resuniv {

StateMap as_state_map(const VectorFnn& f) {
    auto shared = std::make_shared<const VectorFnn>(f);
    return [shared](const Vec& x, const Vec& u) { return (*shared)(x, u); };
}

StateMap as_state_map(std::vector<BarronTarget> comps) {
    auto shared = std::make_shared<const std::vector<BarronTarget>>(std::move(comps));
    return [shared](const Vec& x, const Vec& u) {
        Vec xu(x.size() + u.size());
        xu << x, u;
        Vec out(static_cast<Eigen::Index>(shared->size()));
        for (std::size_t i = 0; i < shared->size(); ++i) out[static_cast<Eigen::Index>(i)] = (*shared)[i].eval_unchecked(xu);
        return out;
    };
}

TargetSystem barron_system(std::vector<BarronTarget> comps, double P, double L) {
    if (comps.empty()) throw std::invalid_argument("barron_system needs at least one component");
    TargetSystem sys;
    sys.domain = comps.front().domain;
    if (static_cast<int>(comps.size()) != sys.domain.D) throw std::invalid_argument("need one component per state coordinate");
    for (const auto& c : comps) sys.M = std::max(sys.M, c.barron_M);
    sys.P = P;
    sys.L = L;
    sys.x_init = Vec::Zero(sys.domain.D);
    sys.components = comps;
    sys.state_map = as_state_map(std::move(comps));
    return sys;
}

StateSequence run_filter(const StateMap& g, const Vec& x_init, const InputSequence& inputs, const DomainSpec* check) {
    StateSequence out;
    out.reserve(inputs.size());
    Vec x = x_init;
    if (check && lp_norm(x, check->p) > check->S + 1e-9)
        throw DomainViolation("initial state outside the state ball");
    for (const auto& u : inputs) {
        x = g(x, u);
        if (check && lp_norm(x, check->p) > check->S + 1e-9)
            throw DomainViolation("state escaped the state ball");
        out.push_back(x);
    }
    return out;
}

StateSequence run_filter(const TargetSystem& sys, const InputSequence& inputs) {
    return run_filter(sys.state_map, sys.initial_state(), inputs, &sys.domain);
}

std::vector<Vec> input_corners(const DomainSpec& dom) {
    std::vector<Vec> out;
    if (std::isinf(dom.p)) {
        if (dom.E > 16) throw std::invalid_argument("too many input corners");
        for (std::uint32_t mask = 0; mask < (1u << dom.E); ++mask) {
            Vec c(dom.E);
            for (int i = 0; i < dom.E; ++i) c[i] = (mask >> i & 1u) ? dom.I : -dom.I;
            out.push_back(c);
        }
    } else {
        for (int i = 0; i < dom.E; ++i)
            for (double s : {-1.0, 1.0}) {
                Vec c = Vec::Zero(dom.E);
                c[i] = s * dom.I;
                out.push_back(c);
            }
    }
    return out;
}

std::vector<InputSequence> sample_input_sequences(const DomainSpec& dom, std::size_t T, const InputSampler& s) {
    std::vector<InputSequence> out;
    const auto corners = input_corners(dom);
    if (s.constant_corners)
        for (const auto& c : corners) out.emplace_back(T, c);
    if (s.exhaustive_corners) {
        const double count = std::pow(static_cast<double>(corners.size()), static_cast<double>(T));
        if (count > 1 << 20) throw std::invalid_argument("exhaustive corner enumeration too large");
        for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
            InputSequence seq(T);
            std::size_t r = k;
            for (std::size_t t = 0; t < T; ++t) {
                seq[t] = corners[r % corners.size()];
                r /= corners.size();
            }
            out.push_back(std::move(seq));
        }
    }
    Rng rng(s.seed);
    for (std::size_t k = 0; k < s.n_random; ++k) {
        InputSequence seq(T);
        for (auto& u : seq) u = sample_in_ball(dom.E, dom.p, dom.I, rng);
        out.push_back(std::move(seq));
    }
    return out;
}

double filter_distance(const StateMap& A, const Vec& initA, const StateMap& B, const Vec& initB,
                       const std::vector<InputSequence>& inputs, double p) {
    double best = 0.0;
    for (const auto& seq : inputs) {
        const auto xa = run_filter(A, initA, seq);
        const auto xb = run_filter(B, initB, seq);
        for (std::size_t t = 0; t < seq.size(); ++t) best = std::max(best, lp_norm(xa[t] - xb[t], p));
    }
    return best;
}

Mat EvalGrid::stacked() const {
    Mat X(states.rows() + inputs.rows(), states.cols());
    X << states, inputs;
    return X;
}

EvalGrid make_eval_grid(const DomainSpec& dom, std::size_t min_grid_points, std::size_t n_random, std::uint64_t seed) {
    dom.validate();
    const int Q = dom.Q();
    auto k = static_cast<long>(std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(min_grid_points, 1)), 1.0 / Q)));
    k = std::max(k, 2L);
    while (k > 2 && std::pow(static_cast<double>(k), Q) > 4e5) --k;
    const auto n_tensor = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(k), Q)));
    const std::size_t n = n_tensor + 1 + n_random;
    EvalGrid g;
    g.states.resize(dom.D, static_cast<Eigen::Index>(n));
    g.inputs.resize(dom.E, static_cast<Eigen::Index>(n));
    Vec pt(Q);
    for (std::size_t m = 0; m < n_tensor; ++m) {
        std::size_t r = m;
        for (int j = 0; j < Q; ++j) {
            const long i = static_cast<long>(r % static_cast<std::size_t>(k));
            r /= static_cast<std::size_t>(k);
            pt[j] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(k - 1);
        }
        const auto col = static_cast<Eigen::Index>(m);
        g.states.col(col) = project_to_ball(dom.S * pt.head(dom.D), dom.S, dom.p);
        g.inputs.col(col) = project_to_ball(dom.I * pt.tail(dom.E), dom.I, dom.p);
    }
    g.states.col(static_cast<Eigen::Index>(n_tensor)).setZero();
    g.inputs.col(static_cast<Eigen::Index>(n_tensor)).setZero();
    Rng rng(seed);
    for (std::size_t m = 0; m < n_random; ++m) {
        const auto col = static_cast<Eigen::Index>(n_tensor + 1 + m);
        g.states.col(col) = sample_in_ball(dom.D, dom.p, dom.S, rng);
        g.inputs.col(col) = sample_in_ball(dom.E, dom.p, dom.I, rng);
    }
    return g;
}

namespace {

double max_column_norm(const Mat& diff, double p) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < diff.cols(); ++j) best = std::max(best, lp_norm(diff.col(j), p));
    return best;
}

}  // namespace

double measured_gap(const StateMap& f, const StateMap& g, const EvalGrid& grid, double p) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < grid.states.cols(); ++j) {
        const Vec x = grid.states.col(j), u = grid.inputs.col(j);
        best = std::max(best, lp_norm(f(x, u) - g(x, u), p));
    }
    return best;
}

double measured_gap(const VectorFnn& f, const TargetSystem& g, const EvalGrid& grid) {
    if (g.components.empty()) return measured_gap(as_state_map(f), g.state_map, grid, g.domain.p);
    const Mat X = grid.stacked();
    Mat diff = f.eval_batch(grid.states, grid.inputs);
    for (std::size_t i = 0; i < g.components.size(); ++i)
        diff.row(static_cast<Eigen::Index>(i)) -= g.components[i].eval_batch(X).transpose();
    return max_column_norm(diff, g.domain.p);
}

double measured_gap(const VectorFnn& f, const VectorFnn& g, const EvalGrid& grid, double p) {
    return max_column_norm(f.eval_batch(grid.states, grid.inputs) - g.eval_batch(grid.states, grid.inputs), p);
}

double measured_gap(const ScalarFnn& f, const BarronTarget& g, const EvalGrid& grid) {
    return (f.eval_batch(grid.states, grid.inputs) - g.eval_batch(grid.stacked())).cwiseAbs().maxCoeff();
}

double estimate_lipschitz(const StateMap& g, const DomainSpec& dom, std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
    Rng rng(seed);
    double best = 0.0;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const Vec x = sample_in_ball(dom.D, dom.p, dom.S, rng);
        const Vec y = sample_in_ball(dom.D, dom.p, dom.S, rng);
        const Vec u = sample_in_ball(dom.E, dom.p, dom.I, rng);
        const double den = lp_norm(x - y, dom.p);
        if (den == 0.0) continue;
        best = std::max(best, lp_norm(g(x, u) - g(y, u), dom.p) / den);
    }
    return best;
}

double estimate_lipschitz(const TargetSystem& g, std::size_t n_pairs, std::uint64_t seed) {
    return estimate_lipschitz(g.state_map, g.domain, n_pairs, seed);
}

AssumptionReport check_assumptions(const TargetSystem& sys, std::size_t grid_density) {
    constexpr double slack = 1e-12;
    AssumptionReport r;
    const auto grid = make_eval_grid(sys.domain, grid_density * grid_density, 1000, 0x9a1dULL);
    for (Eigen::Index j = 0; j < grid.states.cols(); ++j)
        r.measured_range = std::max(r.measured_range, lp_norm(sys(grid.states.col(j), grid.inputs.col(j)), sys.domain.p));
    r.domain_preserving = r.measured_range <= sys.P * (1 + slack) + slack && sys.P < sys.domain.S;
    r.measured_L = estimate_lipschitz(sys, grid.size(), 0x11b5ULL);
    r.lipschitz = r.measured_L <= sys.L * (1 + slack) + slack;
    r.barron_certified = static_cast<int>(sys.components.size()) == sys.domain.D;
    for (const auto& c : sys.components) {
        r.certified_M = std::max(r.certified_M, c.barron_M);
        if (c.barron_M > sys.M * (1 + slack) + slack) r.barron_certified = false;
    }
    return r;
}

std::vector<double> contraction_profile(const TargetSystem& g, int T_max, std::size_t trials, std::uint64_t seed) {
    if (T_max < 1) throw std::invalid_argument("T_max must be >= 1");
    const auto& dom = g.domain;
    std::vector<double> out(static_cast<std::size_t>(T_max), 0.0);
    for (int t = 1; t <= T_max; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        double best = 0.0;
        for (std::size_t k = 0; k < trials; ++k) {
            Vec x = sample_in_ball(dom.D, dom.p, dom.S, rng);
            Vec y;
            if (k % 2 == 1 && lp_norm(x, dom.p) > 0) {
                // antipodal boundary pair
                x = x * (dom.S / lp_norm(x, dom.p));
                y = -x;
            } else {
                y = sample_in_ball(dom.D, dom.p, dom.S, rng);
            }
            InputSequence seq(static_cast<std::size_t>(t));
            for (auto& u : seq) u = sample_in_ball(dom.E, dom.p, dom.I, rng);
            const auto a = run_filter(g.state_map, x, seq);
            const auto b = run_filter(g.state_map, y, seq);
            best = std::max(best, lp_norm(a.back() - b.back(), dom.p));
        }
        out[static_cast<std::size_t>(t - 1)] = best;
    }
    return out;
}

TargetSystem make_strictly_contracting(const DomainSpec& spec, double L_target, int n_atoms, std::uint64_t seed) {
    spec.validate();
    if (!(L_target > 0.0 && L_target < 1.0)) throw std::invalid_argument("L_target must lie in (0, 1)");
    if (n_atoms < 0) throw std::invalid_argument("n_atoms must be >= 0");
    constexpr double safety = 1.25;
    const double P = L_target * spec.S;
    const double q = spec.q();
    Rng rng(seed);
    std::vector<std::vector<FourierAtom>> atoms(static_cast<std::size_t>(spec.D));
    std::vector<double> g0(static_cast<std::size_t>(spec.D));
    Vec lip(spec.D), range(spec.D);
    for (int i = 0; i < spec.D; ++i) {
        auto& list = atoms[static_cast<std::size_t>(i)];
        g0[static_cast<std::size_t>(i)] = rng.uniform(-0.3, 0.3);
        lip[i] = 0.0;
        range[i] = std::abs(g0[static_cast<std::size_t>(i)]);
        for (int k = 0; k < n_atoms; ++k) {
            FourierAtom at;
            at.omega.resize(spec.Q());
            for (int j = 0; j < spec.Q(); ++j) at.omega[j] = rng.uniform(-1.5, 1.5);
            at.alpha = rng.uniform(0.2, 1.0);
            at.phi = rng.uniform(0.0, 2.0 * M_PI);
            // |d/dx| <= alpha ||omega_s||_q and |cos(z + phi) - cos(phi)| <= min(2, |z|)
            lip[i] += at.alpha * lp_norm(at.omega.head(spec.D), q);
            range[i] += at.alpha * std::min(2.0, omega_ball_norm(spec, at.omega));
            list.push_back(at);
        }
    }
    const double L_cert = lp_norm(lip, spec.p);
    const double R_cert = lp_norm(range, spec.p);
    double kappa = 1.0;
    if (L_cert > 0) kappa = L_target / (safety * L_cert);
    if (R_cert > 0) kappa = std::min(kappa, P / R_cert);
    std::vector<BarronTarget> comps;
    for (int i = 0; i < spec.D; ++i) {
        auto list = atoms[static_cast<std::size_t>(i)];
        for (auto& at : list) at.alpha *= kappa;
        comps.push_back(fourier_mixture(std::move(list), kappa * g0[static_cast<std::size_t>(i)], spec));
    }
    return barron_system(std::move(comps), P, kappa * L_cert);
}

VectorFnn approximate_system(const TargetSystem& g, int N, const ApproxOptions& opt, std::span<const std::uint64_t> seeds) {
    if (static_cast<int>(g.components.size()) != g.domain.D)
        throw std::invalid_argument("target system lacks a Barron representation per coordinate");
    if (seeds.size() != g.components.size()) throw std::invalid_argument("need one seed per component");
    VectorFnn f;
    for (std::size_t i = 0; i < g.components.size(); ++i) {
        if (opt.flavor == Flavor::relu) {
            f.components.push_back(approximate_relu(g.components[i], N, seeds[i]));
        } else {
            const double lam = opt.Lambda > 0 ? opt.Lambda : std::sqrt(static_cast<double>(N));
            f.components.push_back(approximate_sigmoid(g.components[i], N, lam, opt.sigma, seeds[i]));
        }
    }
    return f;
}

VectorFnn approximate_system(const TargetSystem& g, int N, const ApproxOptions& opt, std::uint64_t seed) {
    std::vector<std::uint64_t> seeds(g.components.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(seed, 0xa5, i);
    return approximate_system(g, N, opt, seeds);
}

}  // namespace resuniv
