#include "resuniv/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace resuniv {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf") return kInf;
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a number: " + v);
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not an integer: " + v);
    }
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        c.kv_[key] = trim(line.substr(eq + 1));
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string Config::get(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : parse_double(key, it->second);
}

long Config::get_int(const std::string& key, long def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : parse_long(key, it->second);
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    try {
        std::size_t pos = 0;
        const auto x = std::stoull(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument(it->second);
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': not a seed: " + it->second);
    }
}

std::vector<long> Config::get_int_list(const std::string& key, const std::vector<long>& def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    std::vector<long> out;
    for (const auto& s : split_list(it->second)) out.push_back(parse_long(key, s));
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key, const std::vector<double>& def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    std::vector<double> out;
    for (const auto& s : split_list(it->second)) out.push_back(parse_double(key, s));
    return out;
}

DomainSpec Config::domain() const {
    DomainSpec d;
    d.p = parse_p(get("p", "inf"));
    d.S = get_double("S", 1.0);
    d.I = get_double("I", 1.0);
    d.D = static_cast<int>(get_int("D", 1));
    d.E = static_cast<int>(get_int("E", 1));
    d.validate();
    return d;
}

void Config::require_known(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : kv_)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw std::invalid_argument("unknown config key: " + k);
}

bool ExperimentResult::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.pass(); });
}

void ExperimentResult::add(std::string check, std::string case_id, std::string params, double measured, double bound,
                           std::string detail) {
    rows.push_back({std::move(check), std::move(case_id), std::move(params), measured, bound, std::move(detail)});
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string to_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "# " << kCsvVersion << " experiment=" << r.experiment << " seed=" << r.seed << "\n";
    out << "experiment,check,case,params,measured,bound,pass,detail\n";
    for (const auto& row : r.rows) {
        out << r.experiment << ',' << row.check << ',' << row.case_id << ',' << row.params << ','
            << format_double(row.measured) << ',' << format_double(row.bound) << ',' << (row.pass() ? 1 : 0) << ','
            << row.detail << "\n";
    }
    return out.str();
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"approx-rate", "covering", "concat-error", "cascade-error",
                                                "pdim",        "esp-graft", "scale"};
    return names;
}

ExperimentResult run_experiment(const std::string& kind, const Config& cfg, int threads) {
    if (kind == "approx-rate") return cmd_approx_rate(cfg, threads);
    if (kind == "covering") return cmd_covering(cfg, threads);
    if (kind == "concat-error") return cmd_concat_error(cfg, threads);
    if (kind == "cascade-error") return cmd_cascade_error(cfg, threads);
    if (kind == "pdim") return cmd_pdim(cfg, threads);
    if (kind == "esp-graft") return cmd_esp_graft(cfg, threads);
    if (kind == "scale") return cmd_scale(cfg, threads);
    throw std::invalid_argument("unknown experiment: " + kind);
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Bound-verification experiments for covering-based reservoir constructions"};
    app.require_subcommand(1);
    std::string config_path, out_path;
    long long seed = -1;
    int threads = 1;
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--out", out_path, "CSV output path (stdout if omitted)");
        sub->add_option("--seed", seed, "root seed, overrides the config");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        Config cfg = config_path.empty() ? Config{} : Config::load(config_path);
        if (seed >= 0) cfg.set("seed", std::to_string(seed));
        const auto t0 = std::chrono::steady_clock::now();
        const auto result = run_experiment(kind, cfg, threads);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto csv = to_csv(result);
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + out_path);
            out << csv;
        }
        std::size_t failed = 0;
        for (const auto& r : result.rows) failed += r.pass() ? 0 : 1;
        std::cerr << kind << ": " << result.rows.size() << " rows, " << failed << " failed, " << secs << " s\n";
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace resuniv
