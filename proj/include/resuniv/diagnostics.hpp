#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "resuniv/dynsys.hpp"

namespace resuniv {

// Hypotheses are stored by their values on a finite pool: values[h][i] = h(pool_i).
struct HypothesisSet {
    enum class Kind { all_readouts, one_hot };
    Kind kind = Kind::one_hot;
    std::vector<std::vector<double>> values;

    template <class Pool, class F>
    static HypothesisSet from_callables(const std::vector<F>& hs, const Pool& pool, Kind kind = Kind::one_hot) {
        HypothesisSet H;
        H.kind = kind;
        for (const auto& h : hs) {
            std::vector<double> row;
            row.reserve(pool.size());
            for (const auto& x : pool) row.push_back(h(x));
            H.values.push_back(std::move(row));
        }
        return H;
    }

    std::size_t size() const { return values.size(); }
    std::size_t pool_size() const { return values.empty() ? 0 : values.front().size(); }
};

// Largest K <= K_max such that some K-subset of the pool is pseudo-shattered.
int pdim_bruteforce(const HypothesisSet& H, int K_max);

// Feasibility of A x <= b with x free (dense two-phase simplex, Bland's rule).
bool lp_feasible(const Mat& A, const Vec& b);

// Pseudo-dimension of {x -> w . phi(x) : w in R^n} on the rows of Phi (pool x n), by LP per subset.
int pdim_linear_bruteforce(const Mat& Phi, int K_max);

// Banach iteration from the origin; throws NonConvergence when the map does not contract at v0.
Vec find_fixed_point(const StateMap& g, const DomainSpec& dom, const Vec& v0, double tol = 1e-12,
                     long max_iter = 100000, const Vec* start = nullptr);

double bump(const Vec& x_off, const Vec& v_off, double tau, double p);

struct GraftedMap {
    TargetSystem base;
    Vec v0, x0, z;
    double tau = 0;

    Vec operator()(const Vec& x, const Vec& v) const;
    StateMap as_map() const;
};

GraftedMap graft_non_esp(const TargetSystem& g, const Vec& v0, double tau, std::uint64_t seed);

struct GraftCheck {
    double residual_x0 = 0;
    double residual_z = 0;
    double sup_gap = 0;     // sup ||g_tau - g|| over samples in the graft ball
    double modulus = 0;     // sup ||g - x0|| over samples within 2 tau of (x0, v0)
    double eps = 0;         // max(tau, modulus); the construction gives sup_gap <= tau + modulus <= 2 eps
    double outside_gap = 0; // max ||g_tau - g|| over samples with r > tau (exactly 0)
};

GraftCheck check_graft(const GraftedMap& gm, std::size_t samples, std::uint64_t seed);

}  // namespace resuniv
