#include "resuniv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace resuniv {

namespace {

// Calls f on every K-subset of {0..n-1} in lexicographic order until f returns true.
template <class F>
bool any_subset(int n, int K, F&& f) {
    std::vector<int> idx(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (;;) {
        if (f(idx)) return true;
        int i = K - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - K + i) --i;
        if (i < 0) return false;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < K; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

// distinct labelings {h : h(x) >= t} over midpoints t of the sorted distinct values at one pool point
std::vector<std::uint64_t> threshold_masks(const HypothesisSet& H, std::size_t point) {
    std::vector<double> vals;
    for (const auto& row : H.values) vals.push_back(row[point]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::set<std::uint64_t> masks;
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
        const double t = 0.5 * (vals[k] + vals[k + 1]);
        std::uint64_t m = 0;
        for (std::size_t h = 0; h < H.size(); ++h)
            if (H.values[h][point] >= t) m |= std::uint64_t{1} << h;
        masks.insert(m);
    }
    return {masks.begin(), masks.end()};
}

bool shatters(const HypothesisSet& H, const std::vector<std::vector<std::uint64_t>>& masks,
              const std::vector<int>& subset) {
    const std::size_t K = subset.size();
    const std::size_t need = std::size_t{1} << K;
    std::vector<std::size_t> choice(K, 0);
    for (int i : subset)
        if (masks[static_cast<std::size_t>(i)].empty()) return false;
    for (;;) {
        std::vector<bool> seen(need, false);
        std::size_t count = 0;
        for (std::size_t h = 0; h < H.size() && count < need; ++h) {
            std::size_t code = 0;
            for (std::size_t i = 0; i < K; ++i)
                if (masks[static_cast<std::size_t>(subset[i])][choice[i]] >> h & 1u) code |= std::size_t{1} << i;
            if (!seen[code]) {
                seen[code] = true;
                ++count;
            }
        }
        if (count == need) return true;
        std::size_t i = 0;
        while (i < K && ++choice[i] == masks[static_cast<std::size_t>(subset[i])].size()) choice[i++] = 0;
        if (i == K) return false;
    }
}

}  // namespace

int pdim_bruteforce(const HypothesisSet& H, int K_max) {
    if (K_max < 0 || K_max > 20) throw std::invalid_argument("K_max must lie in [0, 20]");
    if (H.pool_size() < static_cast<std::size_t>(K_max)) throw std::invalid_argument("pool smaller than K_max");
    if (H.size() > 64) throw std::invalid_argument("pdim_bruteforce supports at most 64 hypotheses");
    for (const auto& row : H.values)
        if (row.size() != H.pool_size()) throw std::invalid_argument("hypothesis values have ragged length");
    if (H.size() < 2) return 0;
    std::vector<std::vector<std::uint64_t>> masks;
    for (std::size_t i = 0; i < H.pool_size(); ++i) masks.push_back(threshold_masks(H, i));
    const int n = static_cast<int>(H.pool_size());
    int best = 0;
    for (int K = 1; K <= K_max; ++K) {
        if ((std::size_t{1} << K) > H.size()) break;
        if (!any_subset(n, K, [&](const std::vector<int>& s) { return shatters(H, masks, s); })) break;
        best = K;
    }
    return best;
}

bool lp_feasible(const Mat& A, const Vec& b) {
    constexpr double eps = 1e-9;
    const auto r = A.rows(), n = A.cols();
    if (b.size() != r) throw std::invalid_argument("lp_feasible: dimension mismatch");
    Eigen::Index n_art = 0;
    for (Eigen::Index i = 0; i < r; ++i)
        if (b[i] < 0) ++n_art;
    const Eigen::Index nv = 2 * n + r + n_art;
    Mat T = Mat::Zero(r + 1, nv + 1);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(r));
    Eigen::Index art = 2 * n + r;
    for (Eigen::Index i = 0; i < r; ++i) {
        const double sg = b[i] < 0 ? -1.0 : 1.0;
        T.block(i, 0, 1, n) = sg * A.row(i);
        T.block(i, n, 1, n) = -sg * A.row(i);
        T(i, 2 * n + i) = sg;
        T(i, nv) = sg * b[i];
        if (b[i] < 0) {
            T(i, art) = 1.0;
            basis[static_cast<std::size_t>(i)] = art++;
            T.row(r) -= T.row(i);
            T(r, basis[static_cast<std::size_t>(i)]) = 0.0;
        } else {
            basis[static_cast<std::size_t>(i)] = 2 * n + i;
        }
    }
    for (long iter = 0; iter < 100000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < nv; ++j)
            if (T(r, j) < -eps) {
                enter = j;
                break;
            }
        if (enter < 0) break;
        Eigen::Index leave = -1;
        double best = kInf;
        for (Eigen::Index i = 0; i < r; ++i) {
            if (T(i, enter) <= eps) continue;
            const double ratio = T(i, nv) / T(i, enter);
            if (ratio < best - 1e-12 ||
                (ratio <= best + 1e-12 && leave >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                best = std::min(best, ratio);
                leave = i;
            }
        }
        if (leave < 0) break;
        T.row(leave) /= T(leave, enter);
        for (Eigen::Index i = 0; i <= r; ++i)
            if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
        basis[static_cast<std::size_t>(leave)] = enter;
    }
    return -T(r, nv) <= 1e-7;
}

int pdim_linear_bruteforce(const Mat& Phi, int K_max) {
    if (K_max < 0 || K_max > 6) throw std::invalid_argument("linear pseudo-dimension search limited to K <= 6");
    const auto P = static_cast<int>(Phi.rows());
    const auto n = Phi.cols();
    int best = 0;
    for (int K = 1; K <= std::min(K_max, P); ++K) {
        const Eigen::Index n_pat = Eigen::Index{1} << K;
        auto feasible = [&](const std::vector<int>& subset) {
            // variables: W_s (n each) then thresholds t (K); constraints per pattern and point
            Mat A = Mat::Zero(n_pat * K, n_pat * n + K);
            Vec b = Vec::Zero(n_pat * K);
            for (Eigen::Index s = 0; s < n_pat; ++s)
                for (int i = 0; i < K; ++i) {
                    const Eigen::Index row = s * K + i;
                    const auto phi = Phi.row(subset[static_cast<std::size_t>(i)]);
                    if (s >> i & 1) {
                        A.block(row, s * n, 1, n) = -phi;
                        A(row, n_pat * n + i) = 1.0;
                    } else {
                        A.block(row, s * n, 1, n) = phi;
                        A(row, n_pat * n + i) = -1.0;
                        b[row] = -1.0;
                    }
                }
            return lp_feasible(A, b);
        };
        if (!any_subset(P, K, feasible)) break;
        best = K;
    }
    return best;
}

Vec find_fixed_point(const StateMap& g, const DomainSpec& dom, const Vec& v0, double tol, long max_iter, const Vec* start) {
    const double L = estimate_lipschitz([&](const Vec& x, const Vec&) { return g(x, v0); }, dom, 512, 0xf1eeULL);
    if (!(L < 1.0)) throw NonConvergence("map is not contracting at the given input");
    Vec x = start ? *start : Vec(Vec::Zero(dom.D));
    for (long k = 0; k < max_iter; ++k) {
        Vec y = g(x, v0);
        const double step = lp_norm(y - x, dom.p);
        x = std::move(y);
        if (step < tol) return x;
    }
    throw NonConvergence("fixed-point iteration did not converge");
}

double bump(const Vec& x_off, const Vec& v_off, double tau, double p) {
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    const double r = lp_norm(x_off, p) + lp_norm(v_off, p);
    if (r <= 0.5 * tau) return 1.0;
    if (r >= tau) return 0.0;
    const double s = (tau - r) / (0.5 * tau);
    auto h = [](double t) { return t > 0 ? std::exp(-1.0 / t) : 0.0; };
    const double hs = h(s), hc = h(1.0 - s);
    return hs / (hs + hc);
}

Vec GraftedMap::operator()(const Vec& x, const Vec& v) const {
    const double w = bump(x - z, v - v0, tau, base.domain.p);
    if (w == 0.0) return base(x, v);
    if (w == 1.0) return z;
    return (1.0 - w) * base(x, v) + w * z;
}

StateMap GraftedMap::as_map() const {
    auto shared = std::make_shared<const GraftedMap>(*this);
    return [shared](const Vec& x, const Vec& v) { return (*shared)(x, v); };
}

GraftedMap graft_non_esp(const TargetSystem& g, const Vec& v0, double tau, std::uint64_t seed) {
    const auto& dom = g.domain;
    if (!(tau > 0)) throw std::invalid_argument("tau must be positive");
    GraftedMap gm;
    gm.base = g;
    gm.v0 = v0;
    gm.tau = tau;
    gm.x0 = find_fixed_point(g.state_map, dom, v0);
    Vec e1 = Vec::Zero(dom.D);
    e1[0] = dom.S;
    Vec z0 = lp_norm(e1 - gm.x0, dom.p) >= lp_norm(-e1 - gm.x0, dom.p) ? e1 : Vec(-e1);
    double dist = lp_norm(z0 - gm.x0, dom.p);
    if (dist == 0.0) {
        Rng rng(seed);
        Vec dir = sample_in_ball(dom.D, dom.p, 1.0, rng);
        z0 = project_to_ball(gm.x0 + dom.S * dir / std::max(lp_norm(dir, dom.p), 1e-300), dom.S, dom.p);
        dist = lp_norm(z0 - gm.x0, dom.p);
    }
    if (tau > dist) throw std::invalid_argument("tau exceeds the distance to the chosen boundary point");
    gm.z = gm.x0 + tau * (z0 - gm.x0) / dist;
    if (lp_norm(gm(gm.x0, v0) - gm.x0, dom.p) >= 1e-9 || lp_norm(gm(gm.z, v0) - gm.z, dom.p) >= 1e-9)
        throw NonConvergence("grafted map does not fix both points");
    return gm;
}

namespace {

// uniform-ish sample of (x, v) with ||x - cx|| + ||v - cv|| <= rho inside the domain
bool sample_product_ball(const DomainSpec& dom, const Vec& cx, const Vec& cv, double rho, Rng& rng, Vec& x, Vec& v) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Vec dx = sample_in_ball(dom.D, dom.p, rho, rng);
        const Vec dv = sample_in_ball(dom.E, dom.p, rho, rng);
        if (lp_norm(dx, dom.p) + lp_norm(dv, dom.p) > rho) continue;
        x = cx + dx;
        v = cv + dv;
        if (lp_norm(x, dom.p) <= dom.S && lp_norm(v, dom.p) <= dom.I) return true;
    }
    return false;
}

}  // namespace

GraftCheck check_graft(const GraftedMap& gm, std::size_t samples, std::uint64_t seed) {
    const auto& dom = gm.base.domain;
    GraftCheck c;
    c.residual_x0 = lp_norm(gm(gm.x0, gm.v0) - gm.x0, dom.p);
    c.residual_z = lp_norm(gm(gm.z, gm.v0) - gm.z, dom.p);
    Rng rng(seed);
    Vec x, v;
    // the graft ball around (z, v0) lies within 2 tau of (x0, v0)
    for (std::size_t k = 0; k < samples; ++k) {
        if (sample_product_ball(dom, gm.z, gm.v0, gm.tau, rng, x, v)) {
            const Vec gx = gm.base(x, v);
            c.sup_gap = std::max(c.sup_gap, lp_norm(gm(x, v) - gx, dom.p));
            c.modulus = std::max(c.modulus, lp_norm(gx - gm.x0, dom.p));
        }
        if (sample_product_ball(dom, gm.x0, gm.v0, 2 * gm.tau, rng, x, v))
            c.modulus = std::max(c.modulus, lp_norm(gm.base(x, v) - gm.x0, dom.p));
        x = sample_in_ball(dom.D, dom.p, dom.S, rng);
        v = sample_in_ball(dom.E, dom.p, dom.I, rng);
        if (lp_norm(x - gm.z, dom.p) + lp_norm(v - gm.v0, dom.p) > gm.tau)
            c.outside_gap = std::max(c.outside_gap, lp_norm(gm(x, v) - gm.base(x, v), dom.p));
    }
    c.eps = std::max(gm.tau, c.modulus);
    return c;
}

}  // namespace resuniv
