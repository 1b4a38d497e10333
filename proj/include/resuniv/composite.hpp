#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resuniv/covering.hpp"
#include "resuniv/dynsys.hpp"

namespace resuniv {

// Parallel concatenation kept virtual: only instantiated components are stored.
struct ConcatenatedReservoir {
    CoveringSpec spec;
    std::vector<CoverIndex> active;
    Vec x_init;

    explicit ConcatenatedReservoir(CoveringSpec s);
    std::size_t add(const CoverIndex& idx);
    std::size_t size() const { return active.size(); }
};

std::vector<StateSequence> concat_run(const ConcatenatedReservoir& res, const std::vector<std::size_t>& ids,
                                      const InputSequence& inputs);

// Monolithic block-diagonal network s(t) = A rho(B s(t-1) + C u(t) + d) + e for small oracle cases.
struct BlockDiagonalNet {
    Mat A, B, C;
    Vec d, e;
};
BlockDiagonalNet block_diagonal(const ConcatenatedReservoir& res, const std::vector<std::size_t>& ids);
StateSequence block_diagonal_run(const BlockDiagonalNet& net, const Vec& s_init, const InputSequence& inputs);
// D x (n D) matrix passing block `selected` through
Mat one_hot_readout(std::size_t n_components, int D, std::size_t selected);

struct Selection {
    VectorFnn approx;
    VectorSnap cover;
};

Selection select_component(const TargetSystem& g, const CoveringSpec& spec, const ApproxOptions& opt, std::uint64_t seed);
CoverIndex select_readout(const TargetSystem& g, const CoveringSpec& spec, const ApproxOptions& opt, std::uint64_t seed);

struct TargetErrorRow {
    double eps_hat = 0;   // measured target-to-approximating-FNN gap
    double cover_gap = 0; // measured target-to-covering-FNN gap
    double werr = 0;
    double bound = 0;
    bool precondition_ok = false;
};

struct WorstErrorReport {
    double werr_hat = 0;
    double bound = 0;
    double eps_hat_max = 0;
    std::vector<TargetErrorRow> rows;
    bool ok() const;
};

// Grid for the measured gap; trajectory points of the covering component are added to it so the
// measured epsilon dominates every one-step error the filter recursion actually sees.
WorstErrorReport worst_error(const CoveringSpec& spec, const std::vector<TargetSystem>& targets,
                             const InputSampler& sampler, int T, const ApproxOptions& opt, std::uint64_t seed,
                             const EvalGrid* grid = nullptr);

struct CascadeReservoir {
    StateMap base;
    int order_T = 1;
    Vec x_init;
};

// Output at step t is the last block; blocks start at x_init unless initial_block (T*D) is given.
StateSequence cascade_run(const CascadeReservoir& cas, const InputSequence& inputs,
                          const std::optional<Vec>& initial_block = std::nullopt);
// All T rows of the cascade state after the inputs.
std::vector<Vec> cascade_rows(const CascadeReservoir& cas, const InputSequence& inputs);

double finite_memory_gap(const TargetSystem& g, int T_order, int burn_in, const InputSampler& sampler,
                         std::size_t trials, std::uint64_t seed);
// default burn-in T_order + ceil(log_{L_sc}(tol / 2S))
int default_burn_in(int T_order, double L_sc, double S, double tol = 1e-9);

double cascade_error_bound(double Delta_cT, double p_val, double L, int T);

struct ReductionCheck {
    double cascade_gap = 0;
    double filter_gap = 0;
    bool holds() const { return cascade_gap <= filter_gap; }
};

ReductionCheck cascade_reduction_check(const StateMap& g1, const StateMap& g2, const Mat& W1, const Mat& W2,
                                       const Vec& x_init, int T, const std::vector<InputSequence>& inputs, double p);

struct ScaleReport {
    int N = 1;
    double Gamma = 0;
    int T = 1;
    BigInt covering_bound;
    BigInt node_count;
    double error_bound = 0;
};

// Gamma = gamma_coeff / sqrt(N), T = max(1, ceil(log_{L_sc}(N^{-1/2})))
ScaleReport scale_report(int N, int D, int E, double M, double L_sc, double p, double S = 1.0,
                         double gamma_coeff = 1.0, double kappa = 1.0);

}  // namespace resuniv
