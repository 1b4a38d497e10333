#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "resuniv/domain.hpp"

namespace resuniv {

// Flat key = value configuration; '#' starts a comment.
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }
    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    long get_int(const std::string& key, long def) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;
    std::vector<long> get_int_list(const std::string& key, const std::vector<long>& def) const;
    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& def) const;

    DomainSpec domain() const;
    // keys not in `allowed` are rejected
    void require_known(const std::vector<std::string>& allowed) const;

private:
    std::map<std::string, std::string> kv_;
};

struct ResultRow {
    std::string check;
    std::string case_id;
    std::string params;
    double measured = 0;
    double bound = 0;
    std::string detail;
    bool pass() const { return measured <= bound; }
};

struct ExperimentResult {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<ResultRow> rows;

    bool all_pass() const;
    void add(std::string check, std::string case_id, std::string params, double measured, double bound,
             std::string detail = "");
};

constexpr const char* kCsvVersion = "resuniv-results v1";

std::string format_double(double x);
std::string to_csv(const ExperimentResult& r);

// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

const std::vector<std::string>& experiment_names();
ExperimentResult run_experiment(const std::string& kind, const Config& cfg, int threads = 1);

ExperimentResult cmd_approx_rate(const Config& cfg, int threads);
ExperimentResult cmd_covering(const Config& cfg, int threads);
ExperimentResult cmd_concat_error(const Config& cfg, int threads);
ExperimentResult cmd_cascade_error(const Config& cfg, int threads);
ExperimentResult cmd_pdim(const Config& cfg, int threads);
ExperimentResult cmd_esp_graft(const Config& cfg, int threads);
ExperimentResult cmd_scale(const Config& cfg, int threads);

// CLI entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace resuniv
