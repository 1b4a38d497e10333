#pragma once

#include <vector>

#include "resuniv/domain.hpp"

namespace resuniv {

struct SigmoidSpec {
    enum class Kind { logistic, table };
    Kind kind = Kind::logistic;
    // table: piecewise-linear on a uniform grid over [x_lo, x_hi], held constant outside
    double x_lo = -1.0;
    double x_hi = 1.0;
    std::vector<double> values;
    double lipschitz = 0.25;

    static SigmoidSpec logistic();
    static SigmoidSpec table(double x_lo, double x_hi, std::vector<double> values, double lipschitz);

    double operator()(double x) const;
    void validate() const;
};

struct Activation {
    enum class Kind { relu, sigmoid };
    Kind kind = Kind::relu;
    SigmoidSpec sigmoid;

    static Activation relu() { return {}; }
    static Activation sig(SigmoidSpec s) { return {Kind::sigmoid, std::move(s)}; }

    double operator()(double x) const { return kind == Kind::relu ? (x > 0.0 ? x : 0.0) : sigmoid(x); }
    double lipschitz() const { return kind == Kind::relu ? 1.0 : sigmoid.lipschitz; }
    bool operator==(const Activation& o) const;
};

// f(s,u) = sum_n a_n act(b_n.s + c_n.u + d_n) + e. Rows of b and c are the per-node weights.
struct ScalarFnn {
    Vec a;
    Mat b;
    Mat c;
    Vec d;
    double e = 0.0;
    Activation act;

    static ScalarFnn zeros(int hidden, int D, int E, Activation act = Activation::relu());

    int hidden_count() const { return static_cast<int>(a.size()); }
    int state_dim() const { return static_cast<int>(b.cols()); }
    int input_dim() const { return static_cast<int>(c.cols()); }
    void validate() const;

    double operator()(const Vec& s, const Vec& u) const;
    // columns of S and U are evaluation points
    Vec eval_batch(const Mat& S, const Mat& U) const;

    // flat record: a, b row-major, c row-major, d, e
    std::vector<double> flatten() const;
    bool operator==(const ScalarFnn& o) const;
};

struct VectorFnn {
    std::vector<ScalarFnn> components;

    int dim() const { return static_cast<int>(components.size()); }
    int hidden_count() const { return components.empty() ? 0 : components.front().hidden_count(); }
    void validate() const;

    Vec operator()(const Vec& s, const Vec& u) const;
    Mat eval_batch(const Mat& S, const Mat& U) const;
    bool operator==(const VectorFnn& o) const;
};

Vec eval_fnn(const VectorFnn& f, const Vec& s, const Vec& u);

// Membership in the bounded-parameter ReLU family with 4N hidden nodes.
bool family_membership(const ScalarFnn& f, double M, int N, const DomainSpec& dom);
bool family_membership(const VectorFnn& f, double M, int N, const DomainSpec& dom);

struct PerturbationTerms {
    double a = 0, b = 0, c = 0, d = 0, e = 0;
    double total() const { return a + b + c + d + e; }
};

PerturbationTerms param_perturbation_terms(const ScalarFnn& f, const ScalarFnn& g, double M,
                                           const DomainSpec& dom);
double param_perturbation_bound(const ScalarFnn& f, const ScalarFnn& g, double M, const DomainSpec& dom);

// eps * sum_{i<T} L^i
double internal_error_bound(double eps, double L, int T);

// Lipschitz constant in the state argument w.r.t. the p-norm.
double state_lipschitz_bound(const ScalarFnn& f, double p);
double state_lipschitz_bound(const VectorFnn& f, double p);

}  // namespace resuniv
