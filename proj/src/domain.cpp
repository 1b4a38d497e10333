#include "resuniv/domain.hpp"

#include <cmath>

namespace resuniv {

bool is_supported_p(double p) { return p == 1.0 || p == 2.0 || std::isinf(p); }

double conjugate_exponent(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    if (p == 2.0) return 2.0;
    throw std::invalid_argument("p must be 1, 2 or inf");
}

double DomainSpec::q() const { return conjugate_exponent(p); }

void DomainSpec::validate() const {
    if (!is_supported_p(p)) throw std::invalid_argument("p must be 1, 2 or inf");
    if (!(S > 0.0) || !std::isfinite(S)) throw std::invalid_argument("state radius S must be positive");
    if (!(I > 0.0) || !std::isfinite(I)) throw std::invalid_argument("input radius I must be positive");
    if (D < 1 || E < 1) throw std::invalid_argument("dimensions D, E must be >= 1");
}

std::string p_to_string(double p) {
    if (std::isinf(p)) return "inf";
    return p == 1.0 ? "1" : "2";
}

double parse_p(const std::string& s) {
    if (s == "inf" || s == "Inf" || s == "INF") return kInf;
    if (s == "1") return 1.0;
    if (s == "2") return 2.0;
    throw std::invalid_argument("unsupported norm degree: " + s);
}

double lp_norm(const Vec& v, double p) {
    if (v.size() == 0) return 0.0;
    if (std::isinf(p)) return v.cwiseAbs().maxCoeff();
    if (p == 1.0) return v.cwiseAbs().sum();
    if (p == 2.0) return v.norm();
    throw std::invalid_argument("p must be 1, 2 or inf");
}

double dim_root(int dim, double p) {
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return static_cast<double>(dim);
    return std::sqrt(static_cast<double>(dim));
}

double omega_ball_norm(const DomainSpec& dom, const Vec& omega) {
    if (omega.size() != dom.Q()) throw std::invalid_argument("omega has wrong dimension");
    const double q = dom.q();
    return dom.S * lp_norm(omega.head(dom.D), q) + dom.I * lp_norm(omega.tail(dom.E), q);
}

bool in_ball(const Vec& v, double radius, double p, double tol) {
    return lp_norm(v, p) <= radius * (1.0 + tol) + tol;
}

bool in_domain(const DomainSpec& dom, const Vec& s, const Vec& u, double tol) {
    return s.size() == dom.D && u.size() == dom.E && in_ball(s, dom.S, dom.p, tol) &&
           in_ball(u, dom.I, dom.p, tol);
}

Vec project_to_ball(const Vec& v, double radius, double p) {
    const double n = lp_norm(v, p);
    if (n <= radius) return v;
    return v * (radius / n);
}

double Rng::open_uniform() {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return u;
}

double Rng::normal() {
    // Box-Muller, one value per call
    const double u1 = open_uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::laplace() {
    const double u = uniform() - 0.5;
    const double a = 1.0 - 2.0 * std::abs(u);
    if (a <= 0.0) return 0.0;
    return (u < 0 ? 1.0 : -1.0) * std::log(a);
}

double Rng::exponential() { return -std::log(open_uniform()); }

std::size_t Rng::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("index: empty range");
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index) {
    return mix64(mix64(mix64(root) ^ (stream * 0xd1342543de82ef95ULL)) ^ (index + 0x632be59bd9b4e019ULL));
}

Vec sample_in_ball(int dim, double p, double radius, Rng& rng) {
    Vec y(dim);
    if (std::isinf(p)) {
        for (int i = 0; i < dim; ++i) y[i] = rng.uniform(-radius, radius);
        return y;
    }
    // y_i ~ exp(-|y|^p), z ~ Exp(1): y / (||y||_p^p + z)^{1/p} is uniform in the unit ball
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
        y[i] = (p == 1.0) ? rng.laplace() : rng.normal() / std::sqrt(2.0);
        s += std::pow(std::abs(y[i]), p);
    }
    const double z = rng.exponential();
    return y * (radius / std::pow(s + z, 1.0 / p));
}

}  // namespace resuniv
