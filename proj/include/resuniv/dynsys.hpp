#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "resuniv/barron.hpp"
#include "resuniv/domain.hpp"
#include "resuniv/fnn.hpp"

namespace resuniv {

using StateMap = std::function<Vec(const Vec& x, const Vec& u)>;
// entry 0 is the oldest input (t = -T+1), the last entry is t = 0
using InputSequence = std::vector<Vec>;
using StateSequence = std::vector<Vec>;

struct TargetSystem {
    StateMap state_map;
    DomainSpec domain;
    double P = 0.0;
    double L = 0.0;
    double M = 0.0;
    std::vector<BarronTarget> components;
    Vec x_init;

    Vec operator()(const Vec& x, const Vec& u) const { return state_map(x, u); }
    Vec initial_state() const { return x_init.size() ? x_init : Vec(Vec::Zero(domain.D)); }
};

StateMap as_state_map(const VectorFnn& f);
// state map whose coordinates are the given Barron targets evaluated at (x, u)
StateMap as_state_map(std::vector<BarronTarget> comps);
TargetSystem barron_system(std::vector<BarronTarget> comps, double P, double L);

// Forward recursion x(t) = g(x(t-1), u(t)). With a domain, states leaving the S-ball by more
// than 1e-9 raise DomainViolation.
StateSequence run_filter(const StateMap& g, const Vec& x_init, const InputSequence& inputs,
                         const DomainSpec* check = nullptr);
StateSequence run_filter(const TargetSystem& sys, const InputSequence& inputs);

struct InputSampler {
    std::size_t n_random = 64;
    bool constant_corners = true;
    bool exhaustive_corners = false;
    std::uint64_t seed = 0;
};

// corner points of the input ball: sign vectors for p = inf, +-I e_i otherwise
std::vector<Vec> input_corners(const DomainSpec& dom);
std::vector<InputSequence> sample_input_sequences(const DomainSpec& dom, std::size_t T, const InputSampler& s);

double filter_distance(const StateMap& A, const Vec& initA, const StateMap& B, const Vec& initB,
                       const std::vector<InputSequence>& inputs, double p);

// Evaluation points for sup norms: tensor grid (projected into the balls) plus random points.
struct EvalGrid {
    Mat states;  // D x n
    Mat inputs;  // E x n
    std::size_t size() const { return static_cast<std::size_t>(states.cols()); }
    Mat stacked() const;  // (D+E) x n
};

EvalGrid make_eval_grid(const DomainSpec& dom, std::size_t min_grid_points = 10000, std::size_t n_random = 1000,
                        std::uint64_t seed = 0);

// max over grid points of ||f(x,u) - g(x,u)||_p
double measured_gap(const StateMap& f, const StateMap& g, const EvalGrid& grid, double p);
double measured_gap(const VectorFnn& f, const TargetSystem& g, const EvalGrid& grid);
double measured_gap(const VectorFnn& f, const VectorFnn& g, const EvalGrid& grid, double p);
double measured_gap(const ScalarFnn& f, const BarronTarget& g, const EvalGrid& grid);

double estimate_lipschitz(const TargetSystem& g, std::size_t n_pairs, std::uint64_t seed);
double estimate_lipschitz(const StateMap& g, const DomainSpec& dom, std::size_t n_pairs, std::uint64_t seed);

struct AssumptionReport {
    bool domain_preserving = false;
    double measured_range = 0.0;
    bool lipschitz = false;
    double measured_L = 0.0;
    bool barron_certified = false;
    double certified_M = 0.0;
    bool ok() const { return domain_preserving && lipschitz && barron_certified; }
};

AssumptionReport check_assumptions(const TargetSystem& sys, std::size_t grid_density = 100);

std::vector<double> contraction_profile(const TargetSystem& g, int T_max, std::size_t trials, std::uint64_t seed);

TargetSystem make_strictly_contracting(const DomainSpec& spec, double L_target, int n_atoms, std::uint64_t seed);

enum class Flavor { relu, sigmoid };

struct ApproxOptions {
    Flavor flavor = Flavor::relu;
    double Lambda = 0.0;  // sigmoid scale; 0 means sqrt(N)
    SigmoidSpec sigma = SigmoidSpec::logistic();
};

VectorFnn approximate_system(const TargetSystem& g, int N, const ApproxOptions& opt, std::span<const std::uint64_t> seeds);
// component i uses derive_seed(seed, 0xa5, i)
VectorFnn approximate_system(const TargetSystem& g, int N, const ApproxOptions& opt, std::uint64_t seed);

}  // namespace resuniv
