#include "resuniv/barron.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace resuniv {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr std::size_t kCdfGrid = 4096;

// integral over [0, phi] of max(0, sin)
double pos_sin_primitive(double phi) {
    const double k = std::floor(phi / kTwoPi);
    const double r = phi - k * kTwoPi;
    const double part = r <= M_PI ? 1.0 - std::cos(r) : 2.0;
    return 2.0 * k + part;
}

bool within(double x, double bound) { return x <= bound * (1.0 + 1e-12) + 1e-12; }

void check_finite(const Vec& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string("non-finite ") + what);
}

// Inverse-CDF sampler for t on [0,1] with density proportional to max(0, sign sin(Y t + theta)).
class TSampler {
public:
    TSampler(double Y, double theta, int sign) : Y_(Y), theta_(theta), sign_(sign), cdf_(kCdfGrid) {
        for (std::size_t i = 0; i < kCdfGrid; ++i)
            cdf_[i] = sin_sign_mass(Y, theta, sign, 0.0, static_cast<double>(i) / (kCdfGrid - 1));
    }

    double draw(Rng& rng) const {
        const double total = cdf_.back();
        for (;;) {
            const double target = rng.open_uniform() * total;
            auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
            std::size_t hi = static_cast<std::size_t>(it - cdf_.begin());
            if (hi == 0) hi = 1;
            if (hi >= kCdfGrid) hi = kCdfGrid - 1;
            double lo_t = static_cast<double>(hi - 1) / (kCdfGrid - 1);
            double hi_t = static_cast<double>(hi) / (kCdfGrid - 1);
            for (int it2 = 0; it2 < 60 && hi_t - lo_t > 1e-15; ++it2) {
                const double mid = 0.5 * (lo_t + hi_t);
                if (sin_sign_mass(Y_, theta_, sign_, 0.0, mid) < target)
                    lo_t = mid;
                else
                    hi_t = mid;
            }
            const double t = hi_t;
            if (sign_ * std::sin(Y_ * t + theta_) > 0.0) return t;
        }
    }

private:
    double Y_, theta_;
    int sign_;
    std::vector<double> cdf_;
};

}  // namespace

double sin_sign_mass(double Y, double theta, int sign, double a, double b) {
    if (b <= a) return 0.0;
    const double shift = sign > 0 ? 0.0 : M_PI;
    if (Y == 0.0) return (b - a) * std::max(0.0, sign * std::sin(theta));
    const double lo = Y * a + theta + shift;
    const double hi = Y * b + theta + shift;
    return (pos_sin_primitive(hi) - pos_sin_primitive(lo)) / Y;
}

BarronTarget fourier_mixture(std::vector<FourierAtom> atoms, double g0, const DomainSpec& domain) {
    domain.validate();
    if (!std::isfinite(g0)) throw std::invalid_argument("non-finite g0");
    BarronTarget g;
    g.g0 = g0;
    g.domain = domain;
    double sum = 0.0;
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        auto& at = atoms[k];
        if (at.omega.size() != domain.Q()) throw std::invalid_argument("atom frequency has wrong dimension");
        check_finite(at.omega, "atom frequency");
        if (!std::isfinite(at.alpha) || !std::isfinite(at.phi)) throw std::invalid_argument("non-finite atom");
        if (at.alpha < 0) throw std::invalid_argument("atom amplitude must be >= 0");
        if (at.phi < 0 || at.phi >= kTwoPi) throw std::invalid_argument("atom phase must lie in [0, 2pi)");
        const double Y = omega_ball_norm(domain, at.omega);
        if (Y == 0.0 && at.alpha != 0.0) throw std::invalid_argument("zero frequency with nonzero amplitude");
        sum += at.alpha * Y;
        if (at.alpha == 0.0) continue;
        for (int m = 0; m < 2; ++m) {
            SupportPoint sp;
            sp.atom = static_cast<int>(k);
            sp.mirrored = m == 1;
            sp.omega = m == 0 ? at.omega : Vec(-at.omega);
            sp.mass = 0.5 * at.alpha;
            sp.Y = Y;
            sp.theta = m == 0 ? at.phi : -at.phi;
            sp.pos = sin_sign_mass(Y, sp.theta, 1, 0.0, 1.0);
            sp.neg = sin_sign_mass(Y, sp.theta, -1, 0.0, 1.0);
            g.support.push_back(sp);
        }
    }
    g.atoms = std::move(atoms);
    g.barron_M = std::max(std::abs(g0), sum);
    double vp = 0.0, vm = 0.0;
    for (const auto& sp : g.support) {
        vp += sp.mass * sp.Y * sp.pos;
        vm += sp.mass * sp.Y * sp.neg;
    }
    g.v = vp + vm;
    if (g.v > 0) {
        g.Vplus = vp / g.v;
        g.Vminus = vm / g.v;
    }
    return g;
}

double BarronTarget::eval_unchecked(const Vec& x) const {
    double out = g0;
    for (const auto& at : atoms) out += at.alpha * (std::cos(at.omega.dot(x) + at.phi) - std::cos(at.phi));
    return out;
}

double BarronTarget::operator()(const Vec& x) const {
    if (x.size() != domain.Q()) throw std::invalid_argument("point has wrong dimension");
    if (!in_domain(domain, x.head(domain.D), x.tail(domain.E)))
        throw DomainViolation("point outside the domain ball");
    return eval_unchecked(x);
}

Vec BarronTarget::eval_batch(const Mat& X) const {
    Vec out = Vec::Constant(X.cols(), g0);
    for (const auto& at : atoms) {
        Vec z = X.transpose() * at.omega;
        out.array() += at.alpha * ((z.array() + at.phi).cos() - std::cos(at.phi));
    }
    return out;
}

double eval_target(const BarronTarget& g, const Vec& x) { return g(x); }

double integral_rep_residual(const BarronTarget& g, const Vec& x) {
    if (!(g.v > 0)) throw std::invalid_argument("integral representation needs v > 0");
    const double lhs = g(x) - g.g0;
    double rhs = 0.0;
    for (const auto& sp : g.support) {
        const double z = sp.omega.dot(x);
        if (z <= 0) continue;
        const double upper = std::min(1.0, z / sp.Y);
        const double Y = sp.Y, th = sp.theta;
        auto f = [Y, th](double t) { return std::sin(Y * t + th); };
        const double integral =
            boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, upper, 15, 1e-13);
        rhs += sp.mass * sp.Y * integral;
    }
    rhs *= -2.0;
    return std::abs(lhs - rhs);
}

std::vector<MuSample> sample_mu(const BarronTarget& g, int sign, std::size_t n, std::uint64_t seed) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    const double V = sign > 0 ? g.Vplus : g.Vminus;
    std::vector<MuSample> out;
    if (n == 0) return out;
    if (!(g.v > 0) || !(V > 0)) throw std::domain_error("requested sign component has zero mass");
    std::vector<double> cum(g.support.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < g.support.size(); ++j) {
        const auto& sp = g.support[j];
        acc += sp.mass * sp.Y * (sign > 0 ? sp.pos : sp.neg);
        cum[j] = acc;
    }
    std::vector<std::unique_ptr<TSampler>> samplers(g.support.size());
    Rng rng(seed);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        auto j = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
        if (j >= cum.size()) j = cum.size() - 1;
        const auto& sp = g.support[j];
        if (!samplers[j]) samplers[j] = std::make_unique<TSampler>(sp.Y, sp.theta, sign);
        MuSample s;
        s.atom_index = sp.atom;
        s.mirrored = sp.mirrored;
        s.t = samplers[j]->draw(rng);
        s.sign = sign;
        out.push_back(s);
    }
    return out;
}

namespace {

const SupportPoint& support_of(const BarronTarget& g, const MuSample& s) {
    for (const auto& sp : g.support)
        if (sp.atom == s.atom_index && sp.mirrored == s.mirrored) return sp;
    throw std::logic_error("sample refers to an unknown support point");
}

void set_direction(ScalarFnn& f, int n, const DomainSpec& dom, const Vec& w) {
    f.b.row(n) = w.head(dom.D).transpose();
    f.c.row(n) = w.tail(dom.E).transpose();
}

}  // namespace

ScalarFnn approximate_sigmoid(const BarronTarget& g, int N, double Lambda, const SigmoidSpec& sigma,
                              std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (!(Lambda > 0)) throw std::invalid_argument("Lambda must be positive");
    sigma.validate();
    const auto& dom = g.domain;
    ScalarFnn f = ScalarFnn::zeros(2 * N, dom.D, dom.E, Activation::sig(sigma));
    f.e = g.g0;
    if (!(g.v > 0)) return f;
    for (int si = 0; si < 2; ++si) {
        const int sign = si == 0 ? 1 : -1;
        const double V = sign > 0 ? g.Vplus : g.Vminus;
        if (!(V > 0)) continue;
        const double coef = (sign > 0 ? -2.0 : 2.0) * g.v * V / N;
        const auto samples = sample_mu(g, sign, static_cast<std::size_t>(N), derive_seed(seed, 1 + si));
        for (int i = 0; i < N; ++i) {
            const auto& sp = support_of(g, samples[static_cast<std::size_t>(i)]);
            const int n = si * N + i;
            f.a[n] = coef;
            set_direction(f, n, dom, Lambda * sp.omega / sp.Y);
            f.d[n] = -Lambda * samples[static_cast<std::size_t>(i)].t;
        }
    }
    return f;
}

ScalarFnn approximate_relu(const BarronTarget& g, int N, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    const auto& dom = g.domain;
    ScalarFnn f = ScalarFnn::zeros(4 * N, dom.D, dom.E);
    f.e = g.g0;
    if (!(g.v > 0)) return f;
    // each step 1{y > 0}, y = omega.x/Y - t, is replaced by the ramp (relu(y + w) - relu(y))/w with w = 1/sqrt(N);
    // the pair is then rescaled by lam = sqrt(M) using relu(k y) = k relu(y)
    const double w = 1.0 / std::sqrt(static_cast<double>(N));
    const double lam = std::sqrt(g.barron_M);
    for (int si = 0; si < 2; ++si) {
        const int sign = si == 0 ? 1 : -1;
        const double V = sign > 0 ? g.Vplus : g.Vminus;
        if (!(V > 0)) continue;
        const double coef = (sign > 0 ? -2.0 : 2.0) * g.v * V / N;
        const auto samples = sample_mu(g, sign, static_cast<std::size_t>(N), derive_seed(seed, 1 + si));
        for (int i = 0; i < N; ++i) {
            const auto& s = samples[static_cast<std::size_t>(i)];
            const auto& sp = support_of(g, s);
            const Vec dir = lam * sp.omega / sp.Y;
            const int n = 2 * (si * N + i);
            f.a[n] = coef / (w * lam);
            f.a[n + 1] = -coef / (w * lam);
            set_direction(f, n, dom, dir);
            set_direction(f, n + 1, dom, dir);
            f.d[n] = lam * (w - s.t);
            f.d[n + 1] = -lam * s.t;
        }
    }
    return f;
}

double delta_sigmoid_quadrature(const SigmoidSpec& sigma, double Lambda) {
    if (!(Lambda > 0)) throw std::invalid_argument("Lambda must be positive");
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    // in y = Lambda x the transition has unit width; split so each piece is smooth on its own scale
    auto left = [&](double y) { return sigma(-y); };
    auto right = [&](double y) { return 1.0 - sigma(y); };
    double total = 0.0;
    double a = 0.0;
    for (double b : {4.0, 16.0, 64.0, Lambda}) {
        b = std::min(b, Lambda);
        if (b <= a) continue;
        total += GK::integrate(left, a, b, 15, 1e-13) + GK::integrate(right, a, b, 15, 1e-13);
        a = b;
    }
    return total / Lambda;
}

double delta_sigmoid(const SigmoidSpec& sigma, double Lambda) {
    if (!(Lambda > 0)) throw std::invalid_argument("Lambda must be positive");
    if (sigma.kind == SigmoidSpec::Kind::logistic)
        return 2.0 / Lambda * (std::log(2.0) - std::log1p(std::exp(-Lambda)));
    return delta_sigmoid_quadrature(sigma, Lambda);
}

bool satisfies_sigmoid_bounds(const ScalarFnn& f, double M, int N, double Lambda, const DomainSpec& dom) {
    const double q = dom.q();
    for (int n = 0; n < f.hidden_count(); ++n) {
        if (!within(std::abs(f.a[n]), 2 * M / N)) return false;
        const double bn = dom.S * lp_norm(f.b.row(n).transpose(), q) + dom.I * lp_norm(f.c.row(n).transpose(), q);
        if (!within(bn, Lambda)) return false;
        if (!within(std::abs(f.d[n]), Lambda)) return false;
    }
    return within(std::abs(f.e), M);
}

bool satisfies_relu_coeff_bounds(const ScalarFnn& f, double M, int N, const DomainSpec& dom) {
    const double q = dom.q();
    const double rm = std::sqrt(M);
    for (int n = 0; n < f.hidden_count(); ++n) {
        if (!within(std::abs(f.a[n]), 2 * std::sqrt(M / N))) return false;
        const double bn = dom.S * lp_norm(f.b.row(n).transpose(), q) + dom.I * lp_norm(f.c.row(n).transpose(), q);
        if (!within(bn, rm)) return false;
        if (!within(std::abs(f.d[n]), 2 * rm)) return false;
    }
    return within(std::abs(f.e), M);
}

}  // namespace resuniv
