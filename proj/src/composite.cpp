#include "resuniv/composite.hpp"

#include <algorithm>
#include <cmath>

namespace resuniv {

ConcatenatedReservoir::ConcatenatedReservoir(CoveringSpec s) : spec(std::move(s)), x_init(Vec::Zero(spec.domain.D)) {}

std::size_t ConcatenatedReservoir::add(const CoverIndex& idx) {
    if (!index_valid(idx, spec)) throw std::out_of_range("cover index invalid for this reservoir");
    active.push_back(idx);
    return active.size() - 1;
}

std::vector<StateSequence> concat_run(const ConcatenatedReservoir& res, const std::vector<std::size_t>& ids,
                                      const InputSequence& inputs) {
    std::vector<StateSequence> out;
    for (auto id : ids) {
        if (id >= res.active.size()) throw std::out_of_range("unknown component id");
        out.push_back(run_filter(as_state_map(materialize(res.active[id], res.spec)), res.x_init, inputs));
    }
    return out;
}

BlockDiagonalNet block_diagonal(const ConcatenatedReservoir& res, const std::vector<std::size_t>& ids) {
    const int D = res.spec.domain.D, E = res.spec.domain.E;
    const int h = res.spec.hidden();
    const auto n = static_cast<int>(ids.size());
    const int H = D * h;
    BlockDiagonalNet net;
    net.A = Mat::Zero(n * D, n * H);
    net.B = Mat::Zero(n * H, n * D);
    net.C = Mat::Zero(n * H, E);
    net.d = Vec::Zero(n * H);
    net.e = Vec::Zero(n * D);
    for (int i = 0; i < n; ++i) {
        if (ids[static_cast<std::size_t>(i)] >= res.active.size()) throw std::out_of_range("unknown component id");
        const auto f = materialize(res.active[ids[static_cast<std::size_t>(i)]], res.spec);
        for (int j = 0; j < D; ++j) {
            const auto& fc = f.components[static_cast<std::size_t>(j)];
            const int row = i * H + j * h;
            net.A.block(i * D + j, row, 1, h) = fc.a.transpose();
            net.B.block(row, i * D, h, D) = fc.b;
            net.C.block(row, 0, h, E) = fc.c;
            net.d.segment(row, h) = fc.d;
            net.e[i * D + j] = fc.e;
        }
    }
    return net;
}

StateSequence block_diagonal_run(const BlockDiagonalNet& net, const Vec& s_init, const InputSequence& inputs) {
    StateSequence out;
    Vec s = s_init;
    for (const auto& u : inputs) {
        const Vec z = (net.B * s + net.C * u + net.d).cwiseMax(0.0);
        s = net.A * z + net.e;
        out.push_back(s);
    }
    return out;
}

Mat one_hot_readout(std::size_t n_components, int D, std::size_t selected) {
    if (selected >= n_components) throw std::out_of_range("selected block out of range");
    Mat W = Mat::Zero(D, static_cast<Eigen::Index>(n_components) * D);
    W.block(0, static_cast<Eigen::Index>(selected) * D, D, D).setIdentity();
    return W;
}

Selection select_component(const TargetSystem& g, const CoveringSpec& spec, const ApproxOptions& opt, std::uint64_t seed) {
    if (opt.flavor != Flavor::relu) throw std::invalid_argument("covering selection is defined for the ReLU family");
    Selection s;
    s.approx = approximate_system(g, spec.N, opt, seed);
    s.cover = snap_vector(s.approx, spec);
    return s;
}

CoverIndex select_readout(const TargetSystem& g, const CoveringSpec& spec, const ApproxOptions& opt, std::uint64_t seed) {
    return select_component(g, spec, opt, seed).cover.index;
}

bool WorstErrorReport::ok() const {
    return werr_hat <= bound && std::all_of(rows.begin(), rows.end(), [](const TargetErrorRow& r) {
               return r.precondition_ok && r.werr <= r.bound;
           });
}

WorstErrorReport worst_error(const CoveringSpec& spec, const std::vector<TargetSystem>& targets,
                             const InputSampler& sampler, int T, const ApproxOptions& opt, std::uint64_t seed,
                             const EvalGrid* grid) {
    if (T < 1) throw std::invalid_argument("horizon T must be >= 1");
    WorstErrorReport rep;
    if (targets.empty()) return rep;
    const auto& dom = spec.domain;
    EvalGrid local;
    if (!grid) {
        local = make_eval_grid(dom, 10000, 1000, derive_seed(seed, 0x6d));
        grid = &local;
    }
    double L_max = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const auto& g = targets[k];
        const auto sel = select_component(g, spec, opt, derive_seed(seed, 0x5e, k));
        const StateMap cover = as_state_map(sel.cover.net);
        InputSampler s = sampler;
        s.seed = derive_seed(seed, 0x1a, k);
        const auto seqs = sample_input_sequences(dom, static_cast<std::size_t>(T), s);
        // points (x(t-1), u(t)) visited by the covering component
        EvalGrid visited;
        const auto n_pts = static_cast<Eigen::Index>(seqs.size() * static_cast<std::size_t>(T));
        visited.states.resize(dom.D, n_pts);
        visited.inputs.resize(dom.E, n_pts);
        Eigen::Index col = 0;
        TargetErrorRow row;
        for (const auto& seq : seqs) {
            Vec xf = g.initial_state();
            Vec xg = xf;
            for (const auto& u : seq) {
                visited.states.col(col) = xf;
                visited.inputs.col(col) = u;
                ++col;
                xf = cover(xf, u);
                xg = g(xg, u);
                row.werr = std::max(row.werr, lp_norm(xf - xg, dom.p));
            }
        }
        row.eps_hat = std::max(measured_gap(sel.approx, g, *grid), measured_gap(sel.approx, g, visited));
        row.cover_gap = measured_gap(sel.cover.net, g, *grid);
        row.bound = internal_error_bound(row.eps_hat + spec.Gamma, g.L, T);
        row.precondition_ok = row.eps_hat + spec.Gamma <= dom.S - g.P;
        rep.werr_hat = std::max(rep.werr_hat, row.werr);
        rep.eps_hat_max = std::max(rep.eps_hat_max, row.eps_hat);
        L_max = std::max(L_max, g.L);
        rep.rows.push_back(row);
    }
    rep.bound = internal_error_bound(rep.eps_hat_max + spec.Gamma, L_max, T);
    return rep;
}

std::vector<Vec> cascade_rows(const CascadeReservoir& cas, const InputSequence& inputs) {
    if (cas.order_T < 1) throw std::invalid_argument("cascade order must be >= 1");
    std::vector<Vec> rows(static_cast<std::size_t>(cas.order_T), cas.x_init);
    for (const auto& u : inputs) {
        for (int k = cas.order_T - 1; k >= 1; --k)
            rows[static_cast<std::size_t>(k)] = cas.base(rows[static_cast<std::size_t>(k - 1)], u);
        rows[0] = cas.base(cas.x_init, u);
    }
    return rows;
}

StateSequence cascade_run(const CascadeReservoir& cas, const InputSequence& inputs, const std::optional<Vec>& initial_block) {
    if (cas.order_T < 1) throw std::invalid_argument("cascade order must be >= 1");
    if (inputs.empty()) throw std::invalid_argument("cascade_run needs at least one input");
    const auto D = cas.x_init.size();
    const auto T = static_cast<std::size_t>(cas.order_T);
    std::vector<Vec> rows(T, cas.x_init);
    if (initial_block) {
        if (initial_block->size() != static_cast<Eigen::Index>(T) * D) throw std::invalid_argument("initial block has wrong size");
        for (std::size_t k = 0; k < T; ++k) rows[k] = initial_block->segment(static_cast<Eigen::Index>(k) * D, D);
    }
    StateSequence out;
    out.reserve(inputs.size());
    for (const auto& u : inputs) {
        for (std::size_t k = T - 1; k >= 1; --k) rows[k] = cas.base(rows[k - 1], u);
        rows[0] = cas.base(cas.x_init, u);
        out.push_back(rows[T - 1]);
    }
    return out;
}

int default_burn_in(int T_order, double L_sc, double S, double tol) {
    if (!(L_sc > 0 && L_sc < 1)) throw std::invalid_argument("L_sc must lie in (0,1)");
    const double extra = std::ceil(std::log(tol / (2 * S)) / std::log(L_sc));
    return T_order + std::max(0, static_cast<int>(extra));
}

double finite_memory_gap(const TargetSystem& g, int T_order, int burn_in, const InputSampler& sampler,
                         std::size_t trials, std::uint64_t seed) {
    if (T_order < 1 || burn_in < 0) throw std::invalid_argument("finite_memory_gap: bad horizon");
    const auto& dom = g.domain;
    const auto profile = contraction_profile(g, std::max(T_order, 8), 32, derive_seed(seed, 0xc0));
    if (profile.front() > 0 && !(profile.back() < profile.front()))
        throw std::invalid_argument("finite_memory_gap: map is not uniformly state contracting");
    InputSampler s = sampler;
    s.n_random = trials;
    s.seed = derive_seed(seed, 0x1b);
    const auto seqs = sample_input_sequences(dom, static_cast<std::size_t>(burn_in + T_order), s);
    Rng rng(derive_seed(seed, 0x1c));
    CascadeReservoir cas{g.state_map, T_order, g.initial_state()};
    double best = 0.0;
    for (const auto& seq : seqs) {
        const Vec start = sample_in_ball(dom.D, dom.p, dom.S, rng);
        const auto long_run = run_filter(g.state_map, start, seq);
        const auto out = cascade_run(cas, seq);
        best = std::max(best, lp_norm(long_run.back() - out.back(), dom.p));
    }
    return best;
}

double cascade_error_bound(double Delta_cT, double p_val, double L, int T) {
    if (Delta_cT < 0) throw std::invalid_argument("Delta must be non-negative");
    return Delta_cT + internal_error_bound(p_val, L, T);
}

ReductionCheck cascade_reduction_check(const StateMap& g1, const StateMap& g2, const Mat& W1, const Mat& W2,
                                       const Vec& x_init, int T, const std::vector<InputSequence>& inputs, double p) {
    if (W1.rows() != W2.rows()) throw std::invalid_argument("readouts are not conformable");
    ReductionCheck r;
    const CascadeReservoir c1{g1, T, x_init}, c2{g2, T, x_init};
    for (const auto& seq : inputs) {
        if (seq.size() < static_cast<std::size_t>(T)) continue;
        const auto y1 = cascade_run(c1, seq);
        const auto y2 = cascade_run(c2, seq);
        for (std::size_t t = static_cast<std::size_t>(T) - 1; t < seq.size(); ++t) {
            r.cascade_gap = std::max(r.cascade_gap, lp_norm(W1 * y1[t] - W2 * y2[t], p));
            const InputSequence window(seq.begin() + static_cast<long>(t + 1) - T, seq.begin() + static_cast<long>(t + 1));
            const auto s1 = run_filter(g1, x_init, window);
            const auto s2 = run_filter(g2, x_init, window);
            for (std::size_t k = 0; k < window.size(); ++k)
                r.filter_gap = std::max(r.filter_gap, lp_norm(W1 * s1[k] - W2 * s2[k], p));
        }
    }
    return r;
}

ScaleReport scale_report(int N, int D, int E, double M, double L_sc, double p, double S, double gamma_coeff, double kappa) {
    if (!(L_sc > 0 && L_sc < 1)) throw std::invalid_argument("L_sc must lie in (0,1)");
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    ScaleReport r;
    r.N = N;
    r.Gamma = gamma_coeff / std::sqrt(static_cast<double>(N));
    const double raw = -0.5 * std::log(static_cast<double>(N)) / std::log(L_sc);
    r.T = std::max(1, static_cast<int>(std::ceil(raw - 1e-12)));
    r.covering_bound = covering_existence_bound(M, N, D, E, p, r.Gamma);
    r.node_count = BigInt(r.T) * 4 * D * N * r.covering_bound;
    r.error_bound = 2 * S * std::pow(L_sc, r.T) + internal_error_bound(p_bound(D, E, M, N, r.Gamma, kappa, p), L_sc, r.T);
    return r;
}

}  // namespace resuniv
