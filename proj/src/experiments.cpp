#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "resuniv/composite.hpp"
#include "resuniv/covering.hpp"
#include "resuniv/diagnostics.hpp"
#include "resuniv/harness.hpp"

namespace resuniv {

namespace {

constexpr std::uint64_t kDefaultSeed = 20240611ULL;

const std::vector<std::string> kDomainKeys{"seed", "p", "S", "I", "D", "E"};

std::vector<std::string> with_domain(std::vector<std::string> keys) {
    keys.insert(keys.end(), kDomainKeys.begin(), kDomainKeys.end());
    return keys;
}

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// "k1=v1;k2=v2"
class Params {
public:
    Params& operator()(const std::string& k, double v) { return add(k, short_num(v)); }
    Params& operator()(const std::string& k, const std::string& v) { return add(k, v); }
    std::string str() const { return s_; }
    operator std::string() const { return s_; }

private:
    Params& add(const std::string& k, const std::string& v) {
        if (!s_.empty()) s_ += ';';
        s_ += k + '=' + v;
        return *this;
    }
    std::string s_;
};

double to_double(const BigInt& x) { return x.convert_to<double>(); }

int checked_int(long v, long lo, long hi, const char* key) {
    if (v < lo || v > hi)
        throw std::invalid_argument(std::string("config key '") + key + "' out of range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
    return static_cast<int>(v);
}

std::size_t checked_count(long v, long lo, long hi, const char* key) {
    return static_cast<std::size_t>(checked_int(v, lo, hi, key));
}

std::vector<TargetSystem> make_targets(const DomainSpec& dom, int n, double L_target, int n_atoms, std::uint64_t seed) {
    std::vector<TargetSystem> out;
    for (int k = 0; k < n; ++k)
        out.push_back(make_strictly_contracting(dom, L_target, n_atoms, derive_seed(seed, 0x7a, static_cast<std::uint64_t>(k))));
    return out;
}

double max_barron_M(const std::vector<TargetSystem>& targets) {
    double M = 0.0;
    for (const auto& g : targets) M = std::max(M, g.M);
    return M;
}

BarronTarget rate_target(const std::string& kind, const DomainSpec& dom) {
    if (kind == "constant") return fourier_mixture({}, 0.2, dom);
    if (kind != "default") throw std::invalid_argument("config key 'target' must be default or constant");
    if (dom.Q() != 2) throw std::invalid_argument("the default rate target needs D + E = 2");
    auto atom = [](double w0, double w1, double a, double ph) {
        FourierAtom at;
        at.omega = Vec(2);
        at.omega << w0, w1;
        at.alpha = a;
        at.phi = ph;
        return at;
    };
    return fourier_mixture({atom(1.0, 0.5, 0.6, 0.3), atom(-0.7, 1.2, 0.4, 1.9), atom(2.0, -0.4, 0.3, 4.0)}, 0.2, dom);
}

struct LineFit {
    double slope = 0, intercept = 0, half_width = 0;
};

// ordinary least squares y = a + b x with a 95% interval for b
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        const double se = std::sqrt(rss / (n - 2) / sxx);
        boost::math::students_t dist(n - 2);
        f.half_width = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
    }
    return f;
}

}  // namespace

ExperimentResult cmd_approx_rate(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"N_list", "n_seeds", "flavor", "target", "grid_points", "grid_random", "slope_center",
                                   "slope_tol", "c_ratio"}));
    const auto dom = cfg.domain();
    ExperimentResult res;
    res.experiment = "approx-rate";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    const auto Ns = cfg.get_int_list("N_list", {4, 16, 64, 256});
    if (Ns.size() < 2) throw std::invalid_argument("N_list needs at least two entries");
    for (long N : Ns) checked_int(N, 1, 1 << 16, "N_list");
    const auto n_seeds = checked_count(cfg.get_int("n_seeds", 10), 1, 10000, "n_seeds");
    const std::string flavor = cfg.get("flavor", "both");
    std::vector<Flavor> flavors;
    if (flavor == "both" || flavor == "relu") flavors.push_back(Flavor::relu);
    if (flavor == "both" || flavor == "sigmoid") flavors.push_back(Flavor::sigmoid);
    if (flavors.empty()) throw std::invalid_argument("config key 'flavor' must be both, relu or sigmoid");
    const auto g = rate_target(cfg.get("target", "default"), dom);
    const auto grid = make_eval_grid(dom, checked_count(cfg.get_int("grid_points", 10000), 1, 400000, "grid_points"),
                                     checked_count(cfg.get_int("grid_random", 1000), 0, 1000000, "grid_random"),
                                     derive_seed(res.seed, 0x91));
    const double slope_center = cfg.get_double("slope_center", -0.5);
    const double slope_tol = cfg.get_double("slope_tol", 0.2);
    const double c_ratio = cfg.get_double("c_ratio", 2.0);
    const bool constant = !(g.v > 0);
    const auto sigma = SigmoidSpec::logistic();

    for (Flavor fl : flavors) {
        const std::string name = fl == Flavor::relu ? "relu" : "sigmoid";
        const auto nN = Ns.size();
        std::vector<double> err(nN * n_seeds, 0.0);
        std::vector<int> bad(nN * n_seeds, 0);
        parallel_for(nN * n_seeds, threads, [&](std::size_t job) {
            const auto N = static_cast<int>(Ns[job / n_seeds]);
            const auto s = job % n_seeds;
            const auto seed = derive_seed(derive_seed(res.seed, fl == Flavor::relu ? 1 : 2), static_cast<std::uint64_t>(N), s);
            if (fl == Flavor::relu) {
                const auto f = approximate_relu(g, N, seed);
                bad[job] = !(family_membership(f, g.barron_M, N, dom) && satisfies_relu_coeff_bounds(f, g.barron_M, N, dom));
                err[job] = measured_gap(f, g, grid);
            } else {
                const double lam = std::sqrt(static_cast<double>(N));
                const auto f = approximate_sigmoid(g, N, lam, sigma, seed);
                bad[job] = !satisfies_sigmoid_bounds(f, g.barron_M, N, lam, dom);
                err[job] = measured_gap(f, g, grid);
            }
        });
        std::vector<double> logN, logE, mean(nN, 0.0);
        for (std::size_t i = 0; i < nN; ++i) {
            for (std::size_t s = 0; s < n_seeds; ++s) {
                const double e = err[i * n_seeds + s];
                mean[i] += e / static_cast<double>(n_seeds);
                res.add("sup_error", name, Params()("N", static_cast<double>(Ns[i]))("seed_index", static_cast<double>(s)), e,
                        kInf);
            }
            res.add("mean_sup_error", name, Params()("N", static_cast<double>(Ns[i]))("n_seeds", static_cast<double>(n_seeds)),
                    mean[i], kInf);
            logN.push_back(std::log(static_cast<double>(Ns[i])));
            logE.push_back(std::log(mean[i]));
        }
        const int violations = std::accumulate(bad.begin(), bad.end(), 0);
        res.add("param_bound_violations", name, Params()("networks", static_cast<double>(bad.size())),
                static_cast<double>(violations), 0.0,
                fl == Flavor::relu ? "family boxes and per-node coefficient bounds" : "sigmoid coefficient bounds");
        if (constant) {
            const double worst = *std::max_element(err.begin(), err.end());
            res.add("constant_target_error", name, Params()("g0", g.g0), worst, 0.0, "constant target");
            res.add("slope", name, Params()("center", slope_center), 0.0, 0.0, "degenerate: constant target");
            continue;
        }
        const auto fit = fit_line(logN, logE);
        res.add("slope", name, Params()("center", slope_center)("tol", slope_tol), std::abs(fit.slope - slope_center),
                slope_tol,
                "slope=" + short_num(fit.slope) + " ci95=[" + short_num(fit.slope - fit.half_width) + " " +
                    short_num(fit.slope + fit.half_width) + "]");
        res.add("error_decreases", name,
                Params()("N_first", static_cast<double>(Ns.front()))("N_last", static_cast<double>(Ns.back())),
                mean.back() / mean.front(), std::nextafter(1.0, 0.0), "ratio of mean errors last/first");
        if (fl == Flavor::sigmoid) {
            // C_N = mean error / (M (4 delta(sqrt N) + sqrt(Q/N)))
            double cmin = kInf, cmax = 0;
            for (std::size_t i = 0; i < nN; ++i) {
                const double N = static_cast<double>(Ns[i]);
                const double form = g.barron_M * (4 * delta_sigmoid(sigma, std::sqrt(N)) + std::sqrt(dom.Q() / N));
                const double C = mean[i] / form;
                cmin = std::min(cmin, C);
                cmax = std::max(cmax, C);
            }
            res.add("fitted_C_stability", name, Params()("ratio_bound", c_ratio), cmax / cmin, c_ratio,
                    "C_fit=" + short_num(cmax) + " C_min=" + short_num(cmin));
        }
    }
    return res;
}

ExperimentResult cmd_covering(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"p_list", "D_list", "N", "M", "Gamma", "n_members", "grid_points", "grid_random",
                                   "ref_Gamma", "n_box_points"}));
    const auto base = cfg.domain();
    ExperimentResult res;
    res.experiment = "covering";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    const int N = checked_int(cfg.get_int("N", 1), 1, 64, "N");
    const double M = cfg.get_double("M", 1.0);
    const double Gamma = cfg.get_double("Gamma", 0.5);
    const auto n_members = checked_count(cfg.get_int("n_members", 100), 1, 100000, "n_members");
    const auto n_box = checked_count(cfg.get_int("n_box_points", 10000), 0, 10000000, "n_box_points");
    const auto grid_points = checked_count(cfg.get_int("grid_points", 10000), 1, 400000, "grid_points");
    const auto grid_random = checked_count(cfg.get_int("grid_random", 1000), 0, 1000000, "grid_random");
    std::vector<double> ps;
    if (cfg.has("p_list")) {
        for (const auto& s : cfg.get_double_list("p_list", {})) ps.push_back(s);
    } else {
        ps.push_back(base.p);
    }
    const auto Ds = cfg.get_int_list("D_list", {1, 2});

    // reference rows
    {
        const auto g1 = interval_covering(-1.0, 1.0, 0.5);
        res.add("interval_example", "reference", Params()("lo", -1.0)("hi", 1.0)("r", 0.5),
                g1 == std::vector<double>{-0.5, 0.5} ? 0.0 : 1.0, 0.0, "expect {-0.5 0.5}");
        const auto g2 = interval_covering(-1.0, 1.0, 1.0);
        res.add("interval_single", "reference", Params()("lo", -1.0)("hi", 1.0)("r", 1.0),
                g2 == std::vector<double>{0.0} ? 0.0 : 1.0, 0.0, "expect {0}");
        const double refG = cfg.get_double("ref_Gamma", 160.0);
        const BigInt ref = covering_existence_bound(1.0, 1, 1, 1, kInf, refG);
        res.add("existence_cardinality", "reference", Params()("D", 1.0)("E", 1.0)("N", 1.0)("M", 1.0)("p", "inf")("Gamma", refG),
                std::abs(to_double(ref) - 131072.0), 0.0, "bound=" + ref.str());
        DomainSpec one;
        const auto triv = covering_cardinality(CoveringSpec::make(one, 1.0, 1, 1e6));
        res.add("trivial_cardinality", "reference", Params()("Gamma", 1e6), to_double(triv.constructive) - 1.0, 0.0,
                "every grid has one point");
    }

    for (double p : ps) {
        for (long Dl : Ds) {
            DomainSpec dom = base;
            dom.p = p;
            dom.D = checked_int(Dl, 1, 8, "D_list");
            dom.validate();
            const auto spec = CoveringSpec::make(dom, M, N, Gamma);
            const std::string cs = "D" + std::to_string(dom.D) + "_p" + p_to_string(p);
            const std::string prm = Params()("D", static_cast<double>(dom.D))("E", static_cast<double>(dom.E))(
                "N", static_cast<double>(N))("M", M)("Gamma", Gamma)("p", p_to_string(p));
            const auto card = covering_cardinality(spec);
            res.add("grid_size_a", cs, prm, to_double(card.size_a), card.bound_a);
            res.add("grid_size_d", cs, prm, to_double(card.size_d), card.bound_d);
            res.add("grid_size_e", cs, prm, to_double(card.size_e), card.bound_e);
            res.add("grid_size_b", cs, prm, to_double(card.size_b), kInf,
                    "existence bound " + short_num(spec.grid_b.existence_bound()));
            res.add("grid_size_c", cs, prm, to_double(card.size_c), kInf,
                    "existence bound " + short_num(spec.grid_c.existence_bound()));
            res.add("constructive_vs_existence", cs, prm, to_double(card.constructive), to_double(card.existence_bound),
                    "constructive digits=" + std::to_string(card.constructive.str().size()));

            // ball grid validity on random ball points
            {
                Rng rng(derive_seed(res.seed, 0xb0, static_cast<std::uint64_t>(dom.D)));
                double worst_b = 0, worst_c = 0;
                for (std::size_t k = 0; k < n_box; ++k) {
                    const Vec xb = sample_in_ball(dom.D, dom.q(), std::sqrt(M) / dom.S, rng);
                    const auto ib = spec.grid_b.snap(xb);
                    worst_b = std::max(worst_b, lp_norm(spec.grid_b.decode(ib.data()) - xb, dom.q()));
                    const Vec xc = sample_in_ball(dom.E, dom.q(), std::sqrt(M) / dom.I, rng);
                    const auto ic = spec.grid_c.snap(xc);
                    worst_c = std::max(worst_c, lp_norm(spec.grid_c.decode(ic.data()) - xc, dom.q()));
                }
                res.add("ball_grid_radius_b", cs, prm, worst_b, spec.r_b, "points=" + std::to_string(n_box));
                res.add("ball_grid_radius_c", cs, prm, worst_c, spec.r_c, "points=" + std::to_string(n_box));
            }

            const auto grid = make_eval_grid(dom, grid_points, grid_random, derive_seed(res.seed, 0x92, static_cast<std::uint64_t>(dom.D)));
            const double droot = dim_root(dom.D, p);
            struct Slot {
                double scalar_gap = 0, vector_gap = 0, excess = -kInf;
                PerturbationTerms terms;
                int roundtrip_bad = 0;
            };
            std::vector<Slot> slots(n_members);
            parallel_for(n_members, threads, [&](std::size_t m) {
                Rng rng(derive_seed(res.seed, 0xc5, static_cast<std::uint64_t>(dom.D) * 1000003ULL + m));
                const auto f = random_family_vector(spec, rng);
                const auto sn = snap_vector(f, spec);
                auto& sl = slots[m];
                const Mat diff = f.eval_batch(grid.states, grid.inputs) - sn.net.eval_batch(grid.states, grid.inputs);
                for (Eigen::Index j = 0; j < diff.cols(); ++j) sl.vector_gap = std::max(sl.vector_gap, lp_norm(diff.col(j), p));
                for (int i = 0; i < dom.D; ++i) {
                    const double gap = diff.row(i).cwiseAbs().maxCoeff();
                    const auto& fi = f.components[static_cast<std::size_t>(i)];
                    const auto& si = sn.net.components[static_cast<std::size_t>(i)];
                    const auto t = param_perturbation_terms(fi, si, M, dom);
                    sl.scalar_gap = std::max(sl.scalar_gap, gap);
                    sl.excess = std::max(sl.excess, gap - t.total());
                    sl.terms.a = std::max(sl.terms.a, t.a);
                    sl.terms.b = std::max(sl.terms.b, t.b);
                    sl.terms.c = std::max(sl.terms.c, t.c);
                    sl.terms.d = std::max(sl.terms.d, t.d);
                    sl.terms.e = std::max(sl.terms.e, t.e);
                }
                const auto again = snap_vector(sn.net, spec);
                sl.roundtrip_bad = !(materialize(sn.index, spec) == sn.net && again.index == sn.index);
            });
            Slot agg;
            for (const auto& sl : slots) {
                agg.scalar_gap = std::max(agg.scalar_gap, sl.scalar_gap);
                agg.vector_gap = std::max(agg.vector_gap, sl.vector_gap);
                agg.excess = std::max(agg.excess, sl.excess);
                agg.terms.a = std::max(agg.terms.a, sl.terms.a);
                agg.terms.b = std::max(agg.terms.b, sl.terms.b);
                agg.terms.c = std::max(agg.terms.c, sl.terms.c);
                agg.terms.d = std::max(agg.terms.d, sl.terms.d);
                agg.terms.e = std::max(agg.terms.e, sl.terms.e);
                agg.roundtrip_bad += sl.roundtrip_bad;
            }
            const std::string members = "members=" + std::to_string(n_members) + " grid=" + std::to_string(grid.size());
            res.add("snap_gap_scalar", cs, prm, agg.scalar_gap, Gamma / droot, members);
            res.add("snap_gap_vector", cs, prm, agg.vector_gap, Gamma, members);
            res.add("gap_minus_perturbation_bound", cs, prm, agg.excess, 0.0, members);
            const double share = Gamma / (5 * droot);
            res.add("term_a", cs, prm, agg.terms.a, share);
            res.add("term_b", cs, prm, agg.terms.b, share);
            res.add("term_c", cs, prm, agg.terms.c, share);
            res.add("term_d", cs, prm, agg.terms.d, share);
            res.add("term_e", cs, prm, agg.terms.e, share);
            res.add("snap_roundtrip_failures", cs, prm, agg.roundtrip_bad, 0.0, members);
        }
    }
    return res;
}

ExperimentResult cmd_concat_error(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"n_targets", "n_atoms", "L_target", "N", "Gamma", "T", "n_random", "grid_points",
                                   "grid_random", "constant_case"}));
    const auto dom = cfg.domain();
    ExperimentResult res;
    res.experiment = "concat-error";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    const int n_targets = checked_int(cfg.get_int("n_targets", 8), 1, 1000, "n_targets");
    const int n_atoms = checked_int(cfg.get_int("n_atoms", 3), 0, 64, "n_atoms");
    const double L_target = cfg.get_double("L_target", 0.5);
    const int N = checked_int(cfg.get_int("N", 16), 1, 4096, "N");
    const double Gamma = cfg.get_double("Gamma", 0.05);
    const int T = checked_int(cfg.get_int("T", 6), 1, 1000, "T");
    InputSampler sampler;
    sampler.n_random = checked_count(cfg.get_int("n_random", 64), 0, 100000, "n_random");
    const auto grid = make_eval_grid(dom, checked_count(cfg.get_int("grid_points", 10000), 1, 400000, "grid_points"),
                                     checked_count(cfg.get_int("grid_random", 1000), 0, 1000000, "grid_random"),
                                     derive_seed(res.seed, 0x93));
    const ApproxOptions opt;

    auto run_batch = [&](const std::vector<TargetSystem>& targets, const std::string& batch, std::uint64_t seed) {
        const auto spec = CoveringSpec::make(dom, std::max(max_barron_M(targets), 1e-12), N, Gamma);
        // one report per target keeps per-target seeds independent of the thread schedule
        std::vector<WorstErrorReport> reps(targets.size());
        parallel_for(targets.size(), threads, [&](std::size_t k) {
            reps[k] = worst_error(spec, {targets[k]}, sampler, T, opt, derive_seed(seed, k), &grid);
        });
        WorstErrorReport all;
        double L_max = 0;
        double ratio = 0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const auto& row = reps[k].rows.front();
            const std::string prm = Params()("N", static_cast<double>(N))("Gamma", Gamma)("T", static_cast<double>(T))(
                "L", targets[k].L)("P", targets[k].P)("M", targets[k].M);
            const std::string cs = batch + "_" + std::to_string(k);
            res.add("precondition", cs, prm, row.eps_hat + Gamma, dom.S - targets[k].P,
                    "eps_hat=" + short_num(row.eps_hat));
            res.add("cover_gap", cs, prm, row.cover_gap, row.eps_hat + Gamma, "grid gap of the selected component");
            res.add("werr", cs, prm, row.werr, row.bound, "eps_hat=" + short_num(row.eps_hat));
            all.werr_hat = std::max(all.werr_hat, row.werr);
            all.eps_hat_max = std::max(all.eps_hat_max, row.eps_hat);
            L_max = std::max(L_max, targets[k].L);
            ratio = std::max(ratio, row.bound > 0 ? row.werr / row.bound : (row.werr > 0 ? kInf : 0.0));
        }
        all.bound = internal_error_bound(all.eps_hat_max + Gamma, L_max, T);
        const std::string prm = Params()("N", static_cast<double>(N))("Gamma", Gamma)("T", static_cast<double>(T))(
            "targets", static_cast<double>(targets.size()));
        res.add("werr_hat", batch, prm, all.werr_hat, all.bound, "eps_hat_max=" + short_num(all.eps_hat_max));
        res.add("max_ratio", batch, prm, ratio, 1.0);
    };

    run_batch(make_targets(dom, n_targets, L_target, n_atoms, derive_seed(res.seed, 1)), "batch", derive_seed(res.seed, 2));
    if (cfg.get_int("constant_case", 1) != 0)
        run_batch(make_targets(dom, 1, L_target, 0, derive_seed(res.seed, 3)), "constant", derive_seed(res.seed, 4));
    return res;
}

ExperimentResult cmd_cascade_error(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"n_targets", "n_atoms", "L_target", "L_sc", "T_orders", "trials", "burn_in", "N",
                                   "Gamma", "grid_points", "grid_random"}));
    const auto dom = cfg.domain();
    ExperimentResult res;
    res.experiment = "cascade-error";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    const int n_targets = checked_int(cfg.get_int("n_targets", 8), 1, 1000, "n_targets");
    const int n_atoms = checked_int(cfg.get_int("n_atoms", 3), 0, 64, "n_atoms");
    const double L_target = cfg.get_double("L_target", 0.5);
    const double L_sc = cfg.get_double("L_sc", L_target);
    if (!(L_sc >= L_target && L_sc < 1)) throw std::invalid_argument("L_sc must lie in [L_target, 1)");
    const auto orders = cfg.get_int_list("T_orders", {2, 4, 8});
    const auto trials = checked_count(cfg.get_int("trials", 64), 1, 100000, "trials");
    const long burn_cfg = cfg.get_int("burn_in", -1);
    const int N = checked_int(cfg.get_int("N", 16), 1, 4096, "N");
    const double Gamma = cfg.get_double("Gamma", 0.05);
    const auto grid = make_eval_grid(dom, checked_count(cfg.get_int("grid_points", 10000), 1, 400000, "grid_points"),
                                     checked_count(cfg.get_int("grid_random", 1000), 0, 1000000, "grid_random"),
                                     derive_seed(res.seed, 0x94));
    const auto targets = make_targets(dom, n_targets, L_target, n_atoms, derive_seed(res.seed, 1));
    const auto spec = CoveringSpec::make(dom, std::max(max_barron_M(targets), 1e-12), N, Gamma);
    const ApproxOptions opt;

    struct Out {
        std::vector<ResultRow> rows;
    };
    const auto nT = orders.size();
    std::vector<Out> outs(targets.size());
    parallel_for(targets.size(), threads, [&](std::size_t k) {
        const auto& g = targets[k];
        const auto sel = select_component(g, spec, opt, derive_seed(res.seed, 0x5e, k));
        const StateMap cover = as_state_map(sel.cover.net);
        auto& rows = outs[k].rows;
        for (std::size_t oi = 0; oi < nT; ++oi) {
            const int T = checked_int(orders[oi], 1, 64, "T_orders");
            const int burn = burn_cfg >= 0 ? static_cast<int>(burn_cfg) : default_burn_in(T, L_sc, dom.S);
            const std::string cs = "target_" + std::to_string(k);
            const std::string prm = Params()("T_order", static_cast<double>(T))("L_sc", L_sc)("burn_in", static_cast<double>(burn))(
                "N", static_cast<double>(N))("Gamma", Gamma);
            const auto seed = derive_seed(res.seed, 0xca, k * 1000 + oi);
            InputSampler sampler;
            sampler.n_random = trials;
            const double gap = finite_memory_gap(g, T, burn, sampler, trials, seed);
            rows.push_back({"finite_memory_gap", cs, prm, gap, 2 * dom.S * std::pow(L_sc, T), ""});

            sampler.seed = derive_seed(seed, 0x1d);
            const auto seqs = sample_input_sequences(dom, static_cast<std::size_t>(burn + T), sampler);
            Rng rng(derive_seed(seed, 0x1e));
            const CascadeReservoir cas{cover, T, g.initial_state()};
            double esp = 0, err = 0;
            EvalGrid visited;
            visited.states.resize(dom.D, static_cast<Eigen::Index>(seqs.size()) * T);
            visited.inputs.resize(dom.E, static_cast<Eigen::Index>(seqs.size()) * T);
            Eigen::Index col = 0;
            for (const auto& seq : seqs) {
                Vec blockA(T * dom.D), blockB(T * dom.D);
                for (int r = 0; r < T; ++r) {
                    blockA.segment(r * dom.D, dom.D) = sample_in_ball(dom.D, dom.p, dom.S, rng);
                    blockB.segment(r * dom.D, dom.D) = sample_in_ball(dom.D, dom.p, dom.S, rng);
                }
                const auto ya = cascade_run(cas, seq, blockA);
                const auto yb = cascade_run(cas, seq, blockB);
                for (std::size_t t = static_cast<std::size_t>(T) - 1; t < seq.size(); ++t)
                    esp = std::max(esp, lp_norm(ya[t] - yb[t], dom.p));
                // left-infinite target output approximated by a long run from a random state
                const Vec start = sample_in_ball(dom.D, dom.p, dom.S, rng);
                const auto target_run = run_filter(g.state_map, start, seq);
                const auto out = cascade_run(cas, seq);
                err = std::max(err, lp_norm(target_run.back() - out.back(), dom.p));
                Vec x = g.initial_state();
                for (std::size_t t = seq.size() - static_cast<std::size_t>(T); t < seq.size(); ++t) {
                    visited.states.col(col) = x;
                    visited.inputs.col(col) = seq[t];
                    ++col;
                    x = cover(x, seq[t]);
                }
            }
            rows.push_back({"esp_initial_blocks", cs, prm, esp, 0.0, "two random initial blocks"});
            const double eps_hat = std::max(measured_gap(sel.approx, g, grid), measured_gap(sel.approx, g, visited));
            rows.push_back({"precondition", cs, prm, eps_hat + Gamma, dom.S - g.P, "eps_hat=" + short_num(eps_hat)});
            const double bound = cascade_error_bound(2 * dom.S * std::pow(L_sc, T), eps_hat + Gamma, L_sc, T);
            rows.push_back({"cascade_error", cs, prm, err, bound, "eps_hat=" + short_num(eps_hat)});
        }
    });
    for (const auto& o : outs)
        for (const auto& r : o.rows) res.rows.push_back(r);
    return res;
}

ExperimentResult cmd_pdim(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"n_components", "pool", "T", "N", "M", "Gamma", "K_max", "n_linear", "linear_pool"}));
    (void)threads;
    const auto dom = cfg.domain();
    ExperimentResult res;
    res.experiment = "pdim";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    const int n_comp = checked_int(cfg.get_int("n_components", 4), 1, 64, "n_components");
    const auto pool_n = checked_count(cfg.get_int("pool", 12), 1, 64, "pool");
    const int T = checked_int(cfg.get_int("T", 4), 1, 1000, "T");
    const int N = checked_int(cfg.get_int("N", 1), 1, 64, "N");
    const double M = cfg.get_double("M", 1.0);
    const double Gamma = cfg.get_double("Gamma", 0.5);
    const int K_max = checked_int(cfg.get_int("K_max", 4), 1, 20, "K_max");
    if (pool_n < static_cast<std::size_t>(K_max)) throw std::invalid_argument("pool must be at least K_max");

    ConcatenatedReservoir reservoir(CoveringSpec::make(dom, M, N, Gamma));
    Rng rng(derive_seed(res.seed, 0xd1));
    // distinct covering components, each read out through its first state coordinate
    std::vector<std::size_t> ids;
    while (static_cast<int>(ids.size()) < n_comp) {
        const auto idx = snap_vector(random_family_vector(reservoir.spec, rng), reservoir.spec).index;
        if (std::find(reservoir.active.begin(), reservoir.active.end(), idx) != reservoir.active.end()) continue;
        ids.push_back(reservoir.add(idx));
    }
    InputSampler sampler;
    sampler.constant_corners = false;
    sampler.n_random = pool_n;
    sampler.seed = derive_seed(res.seed, 0xd2);
    const auto pool = sample_input_sequences(dom, static_cast<std::size_t>(T), sampler);
    HypothesisSet H;
    std::vector<std::vector<Vec>> finals(ids.size());
    for (const auto& seq : pool) {
        const auto runs = concat_run(reservoir, ids, seq);
        for (std::size_t c = 0; c < ids.size(); ++c) finals[c].push_back(runs[c].back());
    }
    for (std::size_t c = 0; c < ids.size(); ++c) {
        std::vector<double> row;
        for (const auto& x : finals[c]) row.push_back(x[0]);
        H.values.push_back(std::move(row));
    }
    const double log_bound = std::ceil(std::log2(static_cast<double>(n_comp)));
    const std::string prm = Params()("components", static_cast<double>(n_comp))("pool", static_cast<double>(pool_n))(
        "T", static_cast<double>(T))("K_max", static_cast<double>(K_max));
    const int pd = pdim_bruteforce(H, K_max);
    res.add("pdim_one_hot", "covering_components", prm, pd, log_bound, "ceil(log2 |H_one|)");
    {
        HypothesisSet sub;
        sub.values.assign(H.values.begin(), H.values.begin() + std::max<std::ptrdiff_t>(1, n_comp / 2));
        res.add("inclusion_monotone", "covering_components", prm, pdim_bruteforce(sub, K_max) - pd, 0.0,
                "pdim(subset) - pdim(set)");
    }
    {
        HypothesisSet consts;
        for (double c : {-0.75, -0.25, 0.25, 0.75}) consts.values.emplace_back(pool_n, c);
        res.add("constant_functions", "oracle", Params()("functions", 4.0), std::abs(pdim_bruteforce(consts, K_max) - 1.0), 0.0,
                "expect exactly 1");
        HypothesisSet single;
        single.values.push_back(H.values.front());
        res.add("single_hypothesis", "oracle", Params()("functions", 1.0), pdim_bruteforce(single, K_max), 0.0, "expect 0");
    }
    // all linear readouts over the concatenated states of a few components
    {
        const int n_lin = checked_int(cfg.get_int("n_linear", 3), 1, 6, "n_linear");
        const auto lin_pool = checked_count(cfg.get_int("linear_pool", 8), 1, 16, "linear_pool");
        const int width = n_lin * dom.D;
        if (width > 6) throw std::invalid_argument("linear readout dimension must be at most 6");
        Mat Phi(static_cast<Eigen::Index>(lin_pool), width);
        for (std::size_t i = 0; i < lin_pool; ++i)
            for (int c = 0; c < n_lin; ++c)
                Phi.block(static_cast<Eigen::Index>(i), c * dom.D, 1, dom.D) =
                    finals[static_cast<std::size_t>(c) % finals.size()][i % pool.size()].transpose();
        const int K = std::min<int>(6, static_cast<int>(lin_pool));
        const int pl = pdim_linear_bruteforce(Phi, K);
        const auto rank = static_cast<int>(Eigen::FullPivLU<Mat>(Phi).rank());
        const std::string lp = Params()("readout_dim", static_cast<double>(width))("pool", static_cast<double>(lin_pool));
        res.add("pdim_all_readouts", "linear", lp, pl, width, "pdim <= readout dimension");
        res.add("pdim_all_equals_rank", "linear", lp, std::abs(pl - rank), 0.0, "rank=" + std::to_string(rank));
    }
    return res;
}

ExperimentResult cmd_esp_graft(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"taus", "n_atoms", "L_target", "samples", "v0", "steps"}));
    const auto dom = cfg.domain();
    ExperimentResult res;
    res.experiment = "esp-graft";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    auto taus = cfg.get_double_list("taus", {0.1, 0.01, 0.001});
    std::sort(taus.begin(), taus.end(), std::greater<>());
    const int n_atoms = checked_int(cfg.get_int("n_atoms", 3), 0, 64, "n_atoms");
    const double L_target = cfg.get_double("L_target", 0.5);
    const auto samples = checked_count(cfg.get_int("samples", 20000), 1, 10000000, "samples");
    const int steps = checked_int(cfg.get_int("steps", 50), 1, 100000, "steps");
    const Vec v0 = Vec::Constant(dom.E, cfg.get_double("v0", 0.0));
    if (!in_ball(v0, dom.I, dom.p)) throw std::invalid_argument("v0 outside the input ball");
    const auto g = make_strictly_contracting(dom, L_target, n_atoms, derive_seed(res.seed, 1));

    std::vector<GraftCheck> checks(taus.size());
    std::vector<std::vector<ResultRow>> rows(taus.size());
    parallel_for(taus.size(), threads, [&](std::size_t i) {
        const double tau = taus[i];
        const auto gm = graft_non_esp(g, v0, tau, derive_seed(res.seed, 2, i));
        const auto c = check_graft(gm, samples, derive_seed(res.seed, 3, i));
        checks[i] = c;
        const std::string cs = "tau_" + short_num(tau);
        const std::string prm = Params()("tau", tau)("samples", static_cast<double>(samples));
        auto& r = rows[i];
        r.push_back({"residual_x0", cs, prm, c.residual_x0, 1e-9, ""});
        r.push_back({"residual_z", cs, prm, c.residual_z, 1e-9, ""});
        r.push_back({"graft_distance", cs, prm, std::abs(lp_norm(gm.x0 - gm.z, dom.p) - tau), 1e-12, "| ||x0 - z|| - tau |"});
        r.push_back({"sup_gap", cs, prm, c.sup_gap, 2 * c.eps, "eps=" + short_num(c.eps)});
        r.push_back({"outside_gap", cs, prm, c.outside_gap, 0.0, "samples outside the graft ball"});
        const InputSequence seq(static_cast<std::size_t>(steps), v0);
        const auto a = run_filter(gm.as_map(), gm.x0, seq, &dom);
        const auto b = run_filter(gm.as_map(), gm.z, seq, &dom);
        double drift = 0, sep = kInf;
        for (std::size_t t = 0; t < seq.size(); ++t) {
            drift = std::max({drift, lp_norm(a[t] - gm.x0, dom.p), lp_norm(b[t] - gm.z, dom.p)});
            sep = std::min(sep, lp_norm(a[t] - b[t], dom.p));
        }
        r.push_back({"trajectory_drift", cs, prm, drift, 1e-9, "constant input from both fixed points"});
        r.push_back({"trajectory_separation", cs, prm, sep > 0 ? tau / sep : kInf, 1.0 + 1e-9, "tau / min separation"});
    });
    for (const auto& r : rows) res.rows.insert(res.rows.end(), r.begin(), r.end());
    for (std::size_t i = 1; i < taus.size(); ++i)
        res.add("sup_gap_monotone", "tau_" + short_num(taus[i]), Params()("tau_prev", taus[i - 1])("tau", taus[i]),
                checks[i].sup_gap - checks[i - 1].sup_gap, 0.0, "sup_gap(tau) - sup_gap(previous tau)");
    return res;
}

ExperimentResult cmd_scale(const Config& cfg, int threads) {
    cfg.require_known(with_domain({"N_list", "M", "L_sc", "gamma_coeff", "kappa"}));
    (void)threads;
    const auto dom = cfg.domain();
    ExperimentResult res;
    res.experiment = "scale";
    res.seed = cfg.get_seed("seed", kDefaultSeed);
    const auto Ns = cfg.get_int_list("N_list", {1, 4, 16});
    const double M = cfg.get_double("M", 1.0);
    const double L_sc = cfg.get_double("L_sc", 0.5);
    const double gc = cfg.get_double("gamma_coeff", 1.0);
    const double kappa = cfg.get_double("kappa", 1.0);
    for (long Nl : Ns) {
        const int N = checked_int(Nl, 1, 1 << 20, "N_list");
        const auto rep = scale_report(N, dom.D, dom.E, M, L_sc, dom.p, dom.S, gc, kappa);
        // oracle: smallest T >= 1 with L_sc^T <= N^{-1/2}, then repeated multiplication
        int T = 0;
        while (std::pow(L_sc, T) > 1.0 / std::sqrt(static_cast<double>(N))) ++T;
        T = std::max(T, 1);
        const double Gamma = gc / std::sqrt(static_cast<double>(N));
        const auto base = static_cast<long long>(std::floor(8.0 * M * 20.0 * N * dim_root(dom.D, dom.p) / Gamma + 1.0 + 1e-9));
        const long exponent = 4L * dom.D * (dom.D + dom.E + 2) * N + dom.D;
        BigInt prod = 1;
        for (long i = 0; i < exponent; ++i) prod *= base;
        const BigInt oracle = prod * T * 4 * dom.D * N;
        const std::string prm = Params()("N", static_cast<double>(N))("D", static_cast<double>(dom.D))(
            "E", static_cast<double>(dom.E))("M", M)("L_sc", L_sc)("gamma_coeff", gc);
        res.add("horizon_T", "N_" + std::to_string(N), prm, std::abs(rep.T - T), 0.0, "T=" + std::to_string(rep.T));
        res.add("node_count", "N_" + std::to_string(N), prm, rep.node_count == oracle ? 0.0 : 1.0, 0.0,
                "digits=" + std::to_string(rep.node_count.str().size()));
        res.add("error_bound", "N_" + std::to_string(N), prm, rep.error_bound, kInf, "Gamma=" + short_num(rep.Gamma));
    }
    return res;
}

}  // namespace resuniv
