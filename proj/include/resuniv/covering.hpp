#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "resuniv/domain.hpp"
#include "resuniv/fnn.hpp"

namespace resuniv {

using BigInt = boost::multiprecision::cpp_int;

// x_i = lo + (2i-1) r, i = 1..ceil((hi-lo)/(2r)); the last point is clamped to hi so the grid stays inside.
std::vector<double> interval_covering(double lo, double hi, double radius);

// Covering of the closed q-ball of radius R in R^dim with cover radius gamma (q-norm).
// q = inf or dim = 1: product of interval coverings (nearest-point snap).
// otherwise: the lattice h Z^dim inside the ball, h = gamma / dim^{1/q}, with snap by truncation toward zero,
// which never leaves the ball and moves each coordinate by less than h.
class BallGrid {
public:
    BallGrid() = default;
    BallGrid(double R, int dim, double q, double gamma);

    int dim() const { return dim_; }
    bool lattice() const { return lattice_; }
    std::uint32_t axis_size() const;

    std::vector<std::uint32_t> snap(const Vec& x) const;
    Vec decode(const std::uint32_t* idx) const;
    bool valid(const std::uint32_t* idx) const;
    BigInt size() const;
    // existence bound (2R/gamma + 1)^dim
    double existence_bound() const;
    std::vector<Vec> points(std::size_t max_points = 1000000) const;

private:
    double R_ = 1, q_ = 1, gamma_ = 1;
    int dim_ = 1;
    bool lattice_ = false;
    std::vector<double> axis_;
    double h_ = 1;
    long K_ = 0;
    long bound_ = 0;  // sum |k| <= bound (q = 1) or sum k^2 <= bound (q = 2)
};

std::vector<Vec> ball_covering_q(double radius, int dim, double q, double gamma);

struct CoveringSpec {
    DomainSpec domain;
    double M = 1;
    int N = 1;
    double Gamma = 1;
    double r_a = 0, r_b = 0, r_c = 0, r_d = 0, r_e = 0;
    std::vector<double> grid_a, grid_d, grid_e;
    BallGrid grid_b, grid_c;

    static CoveringSpec make(const DomainSpec& dom, double M, int N, double Gamma);

    int hidden() const { return 4 * N; }
    std::size_t node_stride() const { return static_cast<std::size_t>(2 + domain.D + domain.E); }
    std::size_t component_length() const { return static_cast<std::size_t>(hidden()) * node_stride() + 1; }
};

// Flat coordinates: per component, per node (a, b..., c..., d), then e.
struct CoverIndex {
    std::vector<std::uint32_t> flat;
    bool operator==(const CoverIndex& o) const { return flat == o.flat; }
    bool operator<(const CoverIndex& o) const { return flat < o.flat; }
};

struct CardinalityReport {
    BigInt constructive;
    BigInt existence_bound;  // floor(base)^exponent, base = 8M*20N*D^{1/p}/Gamma + 1
    double existence_base = 0;
    long existence_exponent = 0;
    BigInt size_a, size_b, size_c, size_d, size_e;
    double bound_a = 0, bound_d = 0, bound_e = 0;  // per-set existence bounds
};

CardinalityReport covering_cardinality(const CoveringSpec& spec);
BigInt covering_existence_bound(double M, int N, int D, int E, double p, double Gamma);

struct ScalarSnap {
    std::vector<std::uint32_t> index;
    ScalarFnn net;
};
struct VectorSnap {
    CoverIndex index;
    VectorFnn net;
};

ScalarSnap snap(const ScalarFnn& f, const CoveringSpec& spec);
VectorSnap snap_vector(const VectorFnn& f, const CoveringSpec& spec);
ScalarFnn materialize_component(const std::uint32_t* idx, const CoveringSpec& spec);
VectorFnn materialize(const CoverIndex& index, const CoveringSpec& spec);
bool index_valid(const CoverIndex& index, const CoveringSpec& spec);

ScalarFnn random_family_member(const CoveringSpec& spec, Rng& rng);
VectorFnn random_family_vector(const CoveringSpec& spec, Rng& rng);

double p_bound(int D, int E, double M, int N, double Gamma, double kappa, double p);

}  // namespace resuniv
