#pragma once

#include <cstdint>
#include <vector>

#include "resuniv/domain.hpp"
#include "resuniv/fnn.hpp"

namespace resuniv {

struct FourierAtom {
    Vec omega;
    double alpha = 0.0;
    double phi = 0.0;
};

// One point of the discrete Fourier measure: an atom contributes (omega, phi) and its mirror (-omega, -phi),
// each carrying mass alpha/2.
struct SupportPoint {
    int atom = 0;
    bool mirrored = false;
    Vec omega;
    double mass = 0.0;
    double Y = 0.0;  // ||omega||_B
    double theta = 0.0;
    double pos = 0.0;  // integral over [0,1] of the positive part of sin(Y t + theta)
    double neg = 0.0;  // ... and of the negative part
};

// g(x) = g0 + sum_k alpha_k [cos(omega_k.x + phi_k) - cos(phi_k)]
struct BarronTarget {
    std::vector<FourierAtom> atoms;
    double g0 = 0.0;
    DomainSpec domain;
    double barron_M = 0.0;
    double v = 0.0;
    double Vplus = 0.0;
    double Vminus = 0.0;
    std::vector<SupportPoint> support;

    double operator()(const Vec& x) const;
    double eval_unchecked(const Vec& x) const;
    // columns of X are points of R^{D+E}
    Vec eval_batch(const Mat& X) const;
};

struct MuSample {
    int atom_index = 0;
    bool mirrored = false;
    double t = 0.0;
    int sign = 1;
};

BarronTarget fourier_mixture(std::vector<FourierAtom> atoms, double g0, const DomainSpec& domain);
double eval_target(const BarronTarget& g, const Vec& x);

// integral over [a,b] of max(0, sign * sin(Y t + theta)), exact
double sin_sign_mass(double Y, double theta, int sign, double a, double b);

double integral_rep_residual(const BarronTarget& g, const Vec& x);

std::vector<MuSample> sample_mu(const BarronTarget& g, int sign, std::size_t n, std::uint64_t seed);

ScalarFnn approximate_sigmoid(const BarronTarget& g, int N, double Lambda, const SigmoidSpec& sigma,
                              std::uint64_t seed);
ScalarFnn approximate_relu(const BarronTarget& g, int N, std::uint64_t seed);

double delta_sigmoid(const SigmoidSpec& sigma, double Lambda);
double delta_sigmoid_quadrature(const SigmoidSpec& sigma, double Lambda);

// |a_i| <= 2M/N, ||(b_i,c_i)||_B <= Lambda, |d_i| <= Lambda, |e| <= M
bool satisfies_sigmoid_bounds(const ScalarFnn& f, double M, int N, double Lambda, const DomainSpec& dom);
// |a_i| <= 2 sqrt(M/N), ||(b_i,c_i)||_B <= sqrt(M), |d_i| <= 2 sqrt(M), |e| <= M
bool satisfies_relu_coeff_bounds(const ScalarFnn& f, double M, int N, const DomainSpec& dom);

}  // namespace resuniv
