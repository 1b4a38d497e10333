#include <doctest.h>

#include <atomic>
#include <sstream>

#include "resuniv/harness.hpp"

using namespace resuniv;

TEST_CASE("config parsing") {
    const auto c = Config::parse("# header\nN_list = 4, 16,64\n  p=2  # trailing\n\nGamma=0.25\nseed=42\n");
    CHECK(c.get_int_list("N_list", {}) == std::vector<long>{4, 16, 64});
    CHECK(c.get_double("Gamma", 1) == 0.25);
    CHECK(c.get_double("missing", 3.5) == 3.5);
    CHECK(c.get_seed("seed", 0) == 42);
    CHECK(c.domain().p == 2.0);
    CHECK(Config::parse("p = inf").domain().p == kInf);
    CHECK(Config::parse("x=inf").get_double_list("x", {}) == std::vector<double>{kInf});

    CHECK_THROWS_AS(Config::parse("no equals sign"), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("= 3"), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("N=1.5").get_int("N", 0), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("G=abc").get_double("G", 0), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("p=3").domain(), std::invalid_argument);
    CHECK_THROWS_AS(Config::parse("D=0").domain(), std::invalid_argument);
    CHECK_THROWS_AS(Config::load("/nonexistent/cfg"), std::runtime_error);
    CHECK_THROWS_AS(Config::parse("Nlist=4").require_known({"N_list"}), std::invalid_argument);
    CHECK_NOTHROW(Config::parse("N_list=4").require_known({"N_list"}));
}

TEST_CASE("unknown keys are rejected by every experiment") {
    const auto c = Config::parse("bogus_key=1");
    for (const auto& name : experiment_names()) CHECK_THROWS_AS(run_experiment(name, c), std::invalid_argument);
    CHECK_THROWS_AS(run_experiment("nope", Config{}), std::invalid_argument);
}

TEST_CASE("csv format") {
    ExperimentResult r;
    r.experiment = "demo";
    r.seed = 7;
    r.add("chk", "c1", "N=4;p=inf", 0.5, 1.0, "ok");
    r.add("chk", "c2", "", 2.0, 1.0);
    r.add("info", "c3", "", 0.1, kInf);
    CHECK_FALSE(r.all_pass());
    const std::string expect =
        "# resuniv-results v1 experiment=demo seed=7\n"
        "experiment,check,case,params,measured,bound,pass,detail\n"
        "demo,chk,c1,N=4;p=inf,0.5,1,1,ok\n"
        "demo,chk,c2,,2,1,0,\n"
        "demo,info,c3,,0.10000000000000001,inf,1,\n";
    CHECK(to_csv(r) == expect);
    CHECK(format_double(-kInf) == "-inf");
}

TEST_CASE("parallel_for covers every index once and propagates errors") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
}

TEST_CASE("experiments are deterministic across reruns and thread counts") {
    const std::vector<std::pair<std::string, std::string>> cases{
        {"approx-rate", "N_list=4,16\nn_seeds=3\ngrid_points=400\ngrid_random=50"},
        {"concat-error", "n_targets=3\nN=4\nn_random=8\ngrid_points=400\ngrid_random=50"},
        {"cascade-error", "n_targets=2\nT_orders=2,4\ntrials=8\nN=4\ngrid_points=400\ngrid_random=50"},
        {"covering", "n_members=10\nn_box_points=500"},
        {"pdim", ""},
        {"esp-graft", "taus=0.1\nsamples=500"},
        {"scale", ""},
    };
    for (const auto& [name, text] : cases) {
        CAPTURE(name);
        const auto cfg = Config::parse(text);
        const auto a = to_csv(run_experiment(name, cfg, 1));
        const auto b = to_csv(run_experiment(name, cfg, 1));
        const auto c = to_csv(run_experiment(name, cfg, 4));
        CHECK(a == b);
        CHECK(a == c);
        auto other = cfg;
        other.set("seed", "99");
        if (name != "scale" && name != "pdim" && name != "covering") CHECK(to_csv(run_experiment(name, other, 1)) != a);
        // every detail field is comma free: eight columns per data line
        std::istringstream in(a);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
}

TEST_CASE("cli exit codes") {
    const char* bad[] = {"resuniv", "no-such-command"};
    CHECK(cli_main(2, const_cast<char**>(bad)) == 2);
    const char* ok[] = {"resuniv", "scale", "--out", "/tmp/resuniv_harness_scale.csv"};
    CHECK(cli_main(4, const_cast<char**>(ok)) == 0);
}
