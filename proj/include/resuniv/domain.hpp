#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace resuniv {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

class DomainViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// p in {1, 2, inf}; stored as a double with kInf for the sup norm.
struct DomainSpec {
    double p = kInf;
    double S = 1.0;
    double I = 1.0;
    int D = 1;
    int E = 1;

    double q() const;
    int Q() const { return D + E; }
    void validate() const;
};

double conjugate_exponent(double p);
bool is_supported_p(double p);
std::string p_to_string(double p);
double parse_p(const std::string& s);

double lp_norm(const Vec& v, double p);
// dim^{1/p}, with the convention dim^{1/inf} = 1
double dim_root(int dim, double p);

// ||omega||_B = sup over the product ball of |omega . x| = S||w_s||_q + I||w_u||_q
double omega_ball_norm(const DomainSpec& dom, const Vec& omega);

bool in_ball(const Vec& v, double radius, double p, double tol = 1e-12);
bool in_domain(const DomainSpec& dom, const Vec& s, const Vec& u, double tol = 1e-12);

// Radial projection onto the closed p-ball.
Vec project_to_ball(const Vec& v, double radius, double p);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }
    // uniform on [0,1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // uniform on (0,1)
    double open_uniform();
    double normal();
    double laplace();
    double exponential();
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 eng_;
};

// Counter-based seed derivation (splitmix64 finaliser chain).
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0);

// Uniform sample from the closed p-ball in R^dim (generalised-Gaussian method).
Vec sample_in_ball(int dim, double p, double radius, Rng& rng);

}  // namespace resuniv
