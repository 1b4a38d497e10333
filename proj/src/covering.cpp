#include "resuniv/covering.hpp"

#include <algorithm>
#include <cmath>

namespace resuniv {

namespace {

std::uint32_t nearest_index(const std::vector<double>& grid, double x) {
    auto it = std::lower_bound(grid.begin(), grid.end(), x);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return static_cast<std::uint32_t>(grid.size() - 1);
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    const double dlo = x - grid[hi - 1];
    const double dhi = grid[hi] - x;
    return static_cast<std::uint32_t>(dhi < dlo ? hi : hi - 1);
}

double checked_at(const std::vector<double>& grid, std::uint32_t i) {
    if (i >= grid.size()) throw std::out_of_range("cover index coordinate out of range");
    return grid[i];
}

}  // namespace

std::vector<double> interval_covering(double lo, double hi, double radius) {
    if (!(lo < hi)) throw std::invalid_argument("interval_covering needs lo < hi");
    if (!(radius > 0)) throw std::invalid_argument("interval_covering needs radius > 0");
    const double ratio = (hi - lo) / (2.0 * radius);
    if (ratio > 1e8) throw std::invalid_argument("interval covering too large");
    const auto L = static_cast<std::size_t>(std::max(1.0, std::ceil(ratio * (1.0 - 1e-15))));
    std::vector<double> out(L);
    for (std::size_t i = 0; i < L; ++i) out[i] = std::min(hi, lo + (2.0 * static_cast<double>(i + 1) - 1.0) * radius);
    return out;
}

BallGrid::BallGrid(double R, int dim, double q, double gamma) : R_(R), q_(q), gamma_(gamma), dim_(dim) {
    if (!(R > 0) || !(gamma > 0) || dim < 1) throw std::invalid_argument("ball covering needs R, gamma > 0 and dim >= 1");
    if (!is_supported_p(q)) throw std::invalid_argument("q must be 1, 2 or inf");
    lattice_ = dim > 1 && !std::isinf(q);
    if (!lattice_) {
        axis_ = interval_covering(-R, R, gamma);
        return;
    }
    h_ = gamma / dim_root(dim, q);
    const double ratio = R / h_;
    if (ratio > 1e6) throw std::invalid_argument("ball covering too large");
    if (q == 1.0) {
        bound_ = static_cast<long>(std::floor(ratio * (1.0 + 1e-12)));
        K_ = bound_;
    } else {
        bound_ = static_cast<long>(std::floor(ratio * ratio * (1.0 + 1e-12)));
        K_ = static_cast<long>(std::floor(std::sqrt(static_cast<double>(bound_))));
        while ((K_ + 1) * (K_ + 1) <= bound_) ++K_;
        while (K_ * K_ > bound_) --K_;
    }
}

std::uint32_t BallGrid::axis_size() const {
    return lattice_ ? static_cast<std::uint32_t>(2 * K_ + 1) : static_cast<std::uint32_t>(axis_.size());
}

bool BallGrid::valid(const std::uint32_t* idx) const {
    const std::uint32_t n = axis_size();
    long acc = 0;
    for (int i = 0; i < dim_; ++i) {
        if (idx[i] >= n) return false;
        if (lattice_) {
            const long k = static_cast<long>(idx[i]) - K_;
            acc += q_ == 1.0 ? std::labs(k) : k * k;
        }
    }
    return !lattice_ || acc <= bound_;
}

Vec BallGrid::decode(const std::uint32_t* idx) const {
    if (!valid(idx)) throw std::out_of_range("cover index outside the ball grid");
    Vec x(dim_);
    for (int i = 0; i < dim_; ++i)
        x[i] = lattice_ ? static_cast<double>(static_cast<long>(idx[i]) - K_) * h_ : axis_[idx[i]];
    return x;
}

std::vector<std::uint32_t> BallGrid::snap(const Vec& x) const {
    if (x.size() != dim_) throw std::invalid_argument("snap: wrong dimension");
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(dim_));
    if (!lattice_) {
        for (int i = 0; i < dim_; ++i) idx[static_cast<std::size_t>(i)] = nearest_index(axis_, x[i]);
        return idx;
    }
    std::vector<long> k(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
        const long m = std::min(K_, static_cast<long>(std::floor(std::abs(x[i]) / h_ + 1e-9)));
        k[static_cast<std::size_t>(i)] = x[i] < 0 ? -m : m;
    }
    auto to_idx = [&] {
        for (int i = 0; i < dim_; ++i) idx[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(k[static_cast<std::size_t>(i)] + K_);
    };
    to_idx();
    // rounding slack at the sphere: shrink the largest coordinate until inside
    while (!valid(idx.data())) {
        auto it = std::max_element(k.begin(), k.end(), [](long a, long b) { return std::labs(a) < std::labs(b); });
        *it += *it > 0 ? -1 : 1;
        to_idx();
    }
    return idx;
}

BigInt BallGrid::size() const {
    if (!lattice_) return boost::multiprecision::pow(BigInt(axis_.size()), static_cast<unsigned>(dim_));
    // ways[s]: number of partial index vectors with cost s
    std::vector<BigInt> ways(static_cast<std::size_t>(bound_ + 1), 0);
    ways[0] = 1;
    for (int i = 0; i < dim_; ++i) {
        std::vector<BigInt> next(ways.size(), 0);
        for (long s = 0; s <= bound_; ++s) {
            if (ways[static_cast<std::size_t>(s)] == 0) continue;
            for (long k = 0; k <= K_; ++k) {
                const long cost = q_ == 1.0 ? k : k * k;
                if (s + cost > bound_) break;
                next[static_cast<std::size_t>(s + cost)] += ways[static_cast<std::size_t>(s)] * (k == 0 ? 1 : 2);
            }
        }
        ways.swap(next);
    }
    BigInt total = 0;
    for (const auto& w : ways) total += w;
    return total;
}

double BallGrid::existence_bound() const { return std::pow(2.0 * R_ / gamma_ + 1.0, dim_); }

std::vector<Vec> BallGrid::points(std::size_t max_points) const {
    const std::uint32_t n = axis_size();
    const double total = std::pow(static_cast<double>(n), dim_);
    if (total > static_cast<double>(max_points) * 64) throw std::invalid_argument("ball grid too large to enumerate");
    std::vector<Vec> out;
    std::vector<std::uint32_t> idx(static_cast<std::size_t>(dim_), 0);
    for (;;) {
        if (valid(idx.data())) {
            out.push_back(decode(idx.data()));
            if (out.size() > max_points) throw std::invalid_argument("ball grid too large to enumerate");
        }
        int i = 0;
        while (i < dim_ && ++idx[static_cast<std::size_t>(i)] == n) idx[static_cast<std::size_t>(i++)] = 0;
        if (i == dim_) break;
    }
    return out;
}

std::vector<Vec> ball_covering_q(double radius, int dim, double q, double gamma) {
    return BallGrid(radius, dim, q, gamma).points();
}

CoveringSpec CoveringSpec::make(const DomainSpec& dom, double M, int N, double Gamma) {
    dom.validate();
    if (!(M > 0) || N < 1 || !(Gamma > 0)) throw std::invalid_argument("covering needs M > 0, N >= 1, Gamma > 0");
    CoveringSpec s;
    s.domain = dom;
    s.M = M;
    s.N = N;
    s.Gamma = Gamma;
    const double rm = std::sqrt(M);
    const double base = 20.0 * N * dim_root(dom.D, dom.p);
    s.r_a = Gamma / (4 * rm * base);
    s.r_b = Gamma / (2 * dom.S * rm * base);
    s.r_c = Gamma / (2 * dom.I * rm * base);
    s.r_d = Gamma / (2 * rm * base);
    s.r_e = Gamma / (5 * dim_root(dom.D, dom.p));
    s.grid_a = interval_covering(-2 * rm, 2 * rm, s.r_a);
    s.grid_d = interval_covering(-2 * rm, 2 * rm, s.r_d);
    s.grid_e = interval_covering(-M, M, s.r_e);
    s.grid_b = BallGrid(rm / dom.S, dom.D, dom.q(), s.r_b);
    s.grid_c = BallGrid(rm / dom.I, dom.E, dom.q(), s.r_c);
    return s;
}

BigInt covering_existence_bound(double M, int N, int D, int E, double p, double Gamma) {
    const double base = 8.0 * M * 20.0 * N * dim_root(D, p) / Gamma + 1.0;
    const long exponent = 4L * D * (D + E + 2) * N + D;
    // exact when base is an integer; otherwise its floor
    BigInt b(static_cast<long long>(std::floor(base * (1.0 + 1e-15))));
    return boost::multiprecision::pow(b, static_cast<unsigned>(exponent));
}

CardinalityReport covering_cardinality(const CoveringSpec& spec) {
    const auto& dom = spec.domain;
    CardinalityReport r;
    r.size_a = spec.grid_a.size();
    r.size_b = spec.grid_b.size();
    r.size_c = spec.grid_c.size();
    r.size_d = spec.grid_d.size();
    r.size_e = spec.grid_e.size();
    const auto per_node = r.size_a * r.size_b * r.size_c * r.size_d;
    r.constructive = boost::multiprecision::pow(per_node, static_cast<unsigned>(4 * dom.D * spec.N)) *
                     boost::multiprecision::pow(r.size_e, static_cast<unsigned>(dom.D));
    const double x = spec.M * 20.0 * spec.N * dim_root(dom.D, dom.p) / spec.Gamma;
    r.existence_base = 8.0 * x + 1.0;
    r.existence_exponent = 4L * dom.D * (dom.D + dom.E + 2) * spec.N + dom.D;
    r.existence_bound = covering_existence_bound(spec.M, spec.N, dom.D, dom.E, dom.p, spec.Gamma);
    r.bound_a = 8.0 * x + 1.0;
    r.bound_d = 4.0 * x + 1.0;
    r.bound_e = spec.M * 5.0 * dim_root(dom.D, dom.p) / spec.Gamma + 1.0;
    return r;
}

ScalarSnap snap(const ScalarFnn& f, const CoveringSpec& spec) {
    const auto& dom = spec.domain;
    if (!family_membership(f, spec.M, spec.N, dom)) throw std::invalid_argument("snap: network outside the family");
    ScalarSnap out;
    out.index.reserve(spec.component_length());
    for (int n = 0; n < f.hidden_count(); ++n) {
        out.index.push_back(nearest_index(spec.grid_a, f.a[n]));
        for (auto i : spec.grid_b.snap(f.b.row(n).transpose())) out.index.push_back(i);
        for (auto i : spec.grid_c.snap(f.c.row(n).transpose())) out.index.push_back(i);
        out.index.push_back(nearest_index(spec.grid_d, f.d[n]));
    }
    out.index.push_back(nearest_index(spec.grid_e, f.e));
    out.net = materialize_component(out.index.data(), spec);
    return out;
}

VectorSnap snap_vector(const VectorFnn& f, const CoveringSpec& spec) {
    if (f.dim() != spec.domain.D) throw std::invalid_argument("snap_vector: wrong output dimension");
    VectorSnap out;
    for (const auto& comp : f.components) {
        auto s = snap(comp, spec);
        out.index.flat.insert(out.index.flat.end(), s.index.begin(), s.index.end());
        out.net.components.push_back(std::move(s.net));
    }
    return out;
}

ScalarFnn materialize_component(const std::uint32_t* idx, const CoveringSpec& spec) {
    const auto& dom = spec.domain;
    ScalarFnn f = ScalarFnn::zeros(spec.hidden(), dom.D, dom.E);
    const std::uint32_t* p = idx;
    for (int n = 0; n < spec.hidden(); ++n) {
        f.a[n] = checked_at(spec.grid_a, *p++);
        f.b.row(n) = spec.grid_b.decode(p).transpose();
        p += dom.D;
        f.c.row(n) = spec.grid_c.decode(p).transpose();
        p += dom.E;
        f.d[n] = checked_at(spec.grid_d, *p++);
    }
    f.e = checked_at(spec.grid_e, *p);
    return f;
}

VectorFnn materialize(const CoverIndex& index, const CoveringSpec& spec) {
    const std::size_t len = spec.component_length();
    if (index.flat.size() != len * static_cast<std::size_t>(spec.domain.D))
        throw std::out_of_range("cover index has wrong length");
    VectorFnn f;
    for (int i = 0; i < spec.domain.D; ++i)
        f.components.push_back(materialize_component(index.flat.data() + static_cast<std::size_t>(i) * len, spec));
    return f;
}

bool index_valid(const CoverIndex& index, const CoveringSpec& spec) {
    try {
        materialize(index, spec);
        return true;
    } catch (const std::out_of_range&) {
        return false;
    }
}

ScalarFnn random_family_member(const CoveringSpec& spec, Rng& rng) {
    const auto& dom = spec.domain;
    const double rm = std::sqrt(spec.M);
    ScalarFnn f = ScalarFnn::zeros(spec.hidden(), dom.D, dom.E);
    for (int n = 0; n < spec.hidden(); ++n) {
        f.a[n] = rng.uniform(-2 * rm, 2 * rm);
        f.b.row(n) = sample_in_ball(dom.D, dom.q(), rm / dom.S, rng).transpose();
        f.c.row(n) = sample_in_ball(dom.E, dom.q(), rm / dom.I, rng).transpose();
        f.d[n] = rng.uniform(-2 * rm, 2 * rm);
    }
    f.e = rng.uniform(-spec.M, spec.M);
    return f;
}

VectorFnn random_family_vector(const CoveringSpec& spec, Rng& rng) {
    VectorFnn f;
    for (int i = 0; i < spec.domain.D; ++i) f.components.push_back(random_family_member(spec, rng));
    return f;
}

double p_bound(int D, int E, double M, int N, double Gamma, double kappa, double p) {
    if (D < 1 || E < 1 || !(M > 0) || N < 1 || !(Gamma > 0) || !(kappa > 0))
        throw std::invalid_argument("p_bound arguments must be positive");
    return dim_root(D, p) * kappa * std::sqrt(static_cast<double>(D + E)) * M / std::sqrt(static_cast<double>(N)) + Gamma;
}

}  // namespace resuniv
