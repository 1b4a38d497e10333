#include "resuniv/fnn.hpp"

#include <algorithm>
#include <cmath>

namespace resuniv {

namespace {

constexpr double kSlack = 1e-12;

bool within(double x, double bound) { return x <= bound * (1.0 + kSlack) + kSlack; }

void check_same_shape(const ScalarFnn& f, const ScalarFnn& g) {
    if (f.hidden_count() != g.hidden_count() || f.state_dim() != g.state_dim() ||
        f.input_dim() != g.input_dim())
        throw std::invalid_argument("networks differ in shape");
}

}  // namespace

SigmoidSpec SigmoidSpec::logistic() { return {}; }

SigmoidSpec SigmoidSpec::table(double x_lo, double x_hi, std::vector<double> values, double lipschitz) {
    SigmoidSpec s;
    s.kind = Kind::table;
    s.x_lo = x_lo;
    s.x_hi = x_hi;
    s.values = std::move(values);
    s.lipschitz = lipschitz;
    s.validate();
    return s;
}

double SigmoidSpec::operator()(double x) const {
    if (kind == Kind::logistic) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double ex = std::exp(x);
        return ex / (1.0 + ex);
    }
    if (x <= x_lo) return values.front();
    if (x >= x_hi) return values.back();
    const double h = (x_hi - x_lo) / static_cast<double>(values.size() - 1);
    const double pos = (x - x_lo) / h;
    auto i = static_cast<std::size_t>(pos);
    if (i >= values.size() - 1) i = values.size() - 2;
    const double w = pos - static_cast<double>(i);
    return values[i] + w * (values[i + 1] - values[i]);
}

void SigmoidSpec::validate() const {
    if (kind == Kind::logistic) return;
    if (values.size() < 2 || !(x_hi > x_lo)) throw std::invalid_argument("sigmoid table needs >= 2 values");
    const double h = (x_hi - x_lo) / static_cast<double>(values.size() - 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw std::invalid_argument("sigmoid table outside [0,1]");
        if (i > 0) {
            if (values[i] < values[i - 1]) throw std::invalid_argument("sigmoid table not monotone");
            if ((values[i] - values[i - 1]) / h > lipschitz * (1.0 + 1e-12))
                throw std::invalid_argument("sigmoid table slope exceeds declared Lipschitz constant");
        }
    }
}

bool Activation::operator==(const Activation& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::relu) return true;
    return sigmoid.kind == o.sigmoid.kind && sigmoid.x_lo == o.sigmoid.x_lo && sigmoid.x_hi == o.sigmoid.x_hi &&
           sigmoid.values == o.sigmoid.values && sigmoid.lipschitz == o.sigmoid.lipschitz;
}

ScalarFnn ScalarFnn::zeros(int hidden, int D, int E, Activation act) {
    ScalarFnn f;
    f.a = Vec::Zero(hidden);
    f.b = Mat::Zero(hidden, D);
    f.c = Mat::Zero(hidden, E);
    f.d = Vec::Zero(hidden);
    f.act = std::move(act);
    return f;
}

void ScalarFnn::validate() const {
    const auto h = a.size();
    if (b.rows() != h || c.rows() != h || d.size() != h) throw std::invalid_argument("parameter blocks differ in length");
    if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite() || !std::isfinite(e))
        throw std::invalid_argument("non-finite network parameter");
}

double ScalarFnn::operator()(const Vec& s, const Vec& u) const {
    if (s.size() != b.cols() || u.size() != c.cols()) throw std::invalid_argument("dimension mismatch in network evaluation");
    double out = e;
    for (int n = 0; n < hidden_count(); ++n) {
        const double z = b.row(n).dot(s) + c.row(n).dot(u) + d[n];
        out += a[n] * act(z);
    }
    return out;
}

Vec ScalarFnn::eval_batch(const Mat& S, const Mat& U) const {
    if (S.rows() != b.cols() || U.rows() != c.cols() || S.cols() != U.cols())
        throw std::invalid_argument("dimension mismatch in batch evaluation");
    Mat Z = b * S + c * U;
    Z.colwise() += d;
    if (act.kind == Activation::Kind::relu) {
        Z = Z.cwiseMax(0.0);
    } else {
        Z = Z.unaryExpr([this](double z) { return act.sigmoid(z); });
    }
    Vec out = Z.transpose() * a;
    out.array() += e;
    return out;
}

std::vector<double> ScalarFnn::flatten() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(a.size() * (2 + b.cols() + c.cols()) + 1));
    for (int n = 0; n < a.size(); ++n) out.push_back(a[n]);
    for (int n = 0; n < b.rows(); ++n)
        for (int j = 0; j < b.cols(); ++j) out.push_back(b(n, j));
    for (int n = 0; n < c.rows(); ++n)
        for (int j = 0; j < c.cols(); ++j) out.push_back(c(n, j));
    for (int n = 0; n < d.size(); ++n) out.push_back(d[n]);
    out.push_back(e);
    return out;
}

bool ScalarFnn::operator==(const ScalarFnn& o) const {
    return act == o.act && a.size() == o.a.size() && b.cols() == o.b.cols() && c.cols() == o.c.cols() &&
           flatten() == o.flatten();
}

void VectorFnn::validate() const {
    for (const auto& f : components) {
        f.validate();
        if (f.hidden_count() != components.front().hidden_count() || !(f.act == components.front().act))
            throw std::invalid_argument("vector network components differ in shape or activation");
    }
}

Vec VectorFnn::operator()(const Vec& s, const Vec& u) const {
    Vec out(dim());
    for (int i = 0; i < dim(); ++i) out[i] = components[static_cast<std::size_t>(i)](s, u);
    return out;
}

Mat VectorFnn::eval_batch(const Mat& S, const Mat& U) const {
    Mat out(dim(), S.cols());
    for (int i = 0; i < dim(); ++i) out.row(i) = components[static_cast<std::size_t>(i)].eval_batch(S, U).transpose();
    return out;
}

bool VectorFnn::operator==(const VectorFnn& o) const { return components == o.components; }

Vec eval_fnn(const VectorFnn& f, const Vec& s, const Vec& u) { return f(s, u); }

bool family_membership(const ScalarFnn& f, double M, int N, const DomainSpec& dom) {
    if (f.act.kind != Activation::Kind::relu) return false;
    if (f.hidden_count() != 4 * N || f.state_dim() != dom.D || f.input_dim() != dom.E) return false;
    const double rm = std::sqrt(M);
    const double q = dom.q();
    for (int n = 0; n < f.hidden_count(); ++n) {
        if (!within(std::abs(f.a[n]), 2 * rm)) return false;
        if (!within(dom.S * lp_norm(f.b.row(n).transpose(), q), rm)) return false;
        if (!within(dom.I * lp_norm(f.c.row(n).transpose(), q), rm)) return false;
        if (!within(std::abs(f.d[n]), 2 * rm)) return false;
    }
    return within(std::abs(f.e), M);
}

bool family_membership(const VectorFnn& f, double M, int N, const DomainSpec& dom) {
    if (f.dim() != dom.D) return false;
    return std::all_of(f.components.begin(), f.components.end(),
                       [&](const ScalarFnn& c) { return family_membership(c, M, N, dom); });
}

PerturbationTerms param_perturbation_terms(const ScalarFnn& f, const ScalarFnn& g, double M,
                                           const DomainSpec& dom) {
    check_same_shape(f, g);
    const double rm = std::sqrt(M);
    const double q = dom.q();
    PerturbationTerms t;
    for (int n = 0; n < f.hidden_count(); ++n) {
        t.a += std::abs(f.a[n] - g.a[n]);
        t.b += lp_norm((f.b.row(n) - g.b.row(n)).transpose(), q);
        t.c += lp_norm((f.c.row(n) - g.c.row(n)).transpose(), q);
        t.d += std::abs(f.d[n] - g.d[n]);
    }
    t.a *= 4 * rm;
    t.b *= 2 * dom.S * rm;
    t.c *= 2 * dom.I * rm;
    t.d *= 2 * rm;
    t.e = std::abs(f.e - g.e);
    return t;
}

double param_perturbation_bound(const ScalarFnn& f, const ScalarFnn& g, double M, const DomainSpec& dom) {
    return param_perturbation_terms(f, g, M, dom).total();
}

double internal_error_bound(double eps, double L, int T) {
    if (eps < 0 || L < 0 || T < 1) throw std::invalid_argument("internal_error_bound: need eps >= 0, L >= 0, T >= 1");
    if (L == 1.0) return eps * T;
    // (L^T - 1)/(L - 1) via expm1/log1p; L - 1 is exact near 1
    return eps * (std::expm1(T * std::log1p(L - 1.0)) / (L - 1.0));
}

double state_lipschitz_bound(const ScalarFnn& f, double p) {
    const double q = conjugate_exponent(p);
    double sum = 0.0;
    for (int n = 0; n < f.hidden_count(); ++n) sum += std::abs(f.a[n]) * lp_norm(f.b.row(n).transpose(), q);
    return sum * f.act.lipschitz();
}

double state_lipschitz_bound(const VectorFnn& f, double p) {
    Vec l(f.dim());
    for (int i = 0; i < f.dim(); ++i) l[i] = state_lipschitz_bound(f.components[static_cast<std::size_t>(i)], p);
    return lp_norm(l, p);
}

}  // namespace resuniv
