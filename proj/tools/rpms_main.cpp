// Command-line front end: simulate | fit | summarize | predict | evaluate |
// diagnose. Every command reads plain delimited text or the line-delimited
// trace format and writes UTF-8 CSV tables with a header row. A --config
// file holds flat key=value pairs for the chosen command; explicit
// command-line flags always win over the file.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "presets.hpp"
#include "rpms/data_io.hpp"
#include "rpms/evaluation.hpp"
#include "rpms/summaries.hpp"
#include "rpms/trace_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rpms;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(s);
    while (std::getline(ss, field, delim)) out.push_back(field);
    if (!s.empty() && s.back() == delim) out.push_back("");
    return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
    throw std::runtime_error("configuration key '" + key + "': '" + value +
                             "' is not " + expected);
}

std::size_t parse_size(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (...) {
        bad_value(key, value, "a nonnegative integer");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (...) {
        bad_value(key, value, "an integer");
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size() || !std::isfinite(v))
            throw std::invalid_argument(value);
        return v;
    } catch (...) {
        bad_value(key, value, "a finite number");
    }
}

bool parse_flag_value(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes" || value == "on")
        return true;
    if (value == "0" || value == "false" || value == "no" || value == "off")
        return false;
    bad_value(key, value, "a boolean (true/false)");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key,
                                           const std::string& value) {
    std::vector<std::uint64_t> out;
    for (const std::string& piece : split(value, ',')) {
        const std::string v = trim(piece);
        try {
            std::size_t pos = 0;
            out.push_back(std::stoull(v, &pos));
            if (pos != v.size()) throw std::invalid_argument(v);
        } catch (...) {
            bad_value(key, v, "a seed (nonnegative integer)");
        }
    }
    if (out.empty()) bad_value(key, value, "a comma-separated seed list");
    return out;
}

// Maps flat key=value configuration lines onto one command's options.
// Command-line values (option count > 0) always take precedence.
class ConfigMap {
public:
    void track(CLI::Option* opt, std::string key,
               std::function<void(const std::string&)> apply) {
        entries_[std::move(key)] = Entry{opt, std::move(apply)};
    }

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (trim(line).empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                         ": expected key=value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            const auto it = entries_.find(key);
            if (it == entries_.end())
                throw std::runtime_error(path + ": unknown configuration key '" +
                                         key + "'");
            if (it->second.opt->count() > 0) continue; // command line wins
            it->second.apply(value);
            applied_.insert(key);
        }
    }

    bool specified(const std::string& key) const {
        const auto it = entries_.find(key);
        return (it != entries_.end() && it->second.opt->count() > 0) ||
               applied_.count(key) > 0;
    }

private:
    struct Entry {
        CLI::Option* opt = nullptr;
        std::function<void(const std::string&)> apply;
    };
    std::map<std::string, Entry> entries_;
    std::set<std::string> applied_;
};

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write output file: " + path.string());
    return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out.good())
        throw std::runtime_error("failed while writing output file: " +
                                 path.string());
    std::cout << "wrote " << path.string() << "\n";
}

void ensure_directory(const fs::path& dir) {
    if (dir.empty()) return;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " +
                                 dir.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// shared chain-configuration options (fit and the summarize inclusion chain)

struct ChainFlags {
    std::size_t iterations = 10000;
    std::size_t burn_in = 1000;
    std::size_t thinning = 1;
    int grid_size = 1000;
    std::string mode = "rpms";
};

void add_chain_flags(CLI::App* cmd, ConfigMap& cm, ChainFlags& flags,
                     bool with_mode) {
    CLI::Option* o;
    o = cmd->add_option("--iterations", flags.iterations,
                        "Total Gibbs sweeps (default 10000)");
    cm.track(o, "iterations", [&flags](const std::string& v) {
        flags.iterations = parse_size("iterations", v);
    });
    o = cmd->add_option("--burn-in", flags.burn_in,
                        "Sweeps discarded before retention (default 1000)");
    cm.track(o, "burn-in", [&flags](const std::string& v) {
        flags.burn_in = parse_size("burn-in", v);
    });
    o = cmd->add_option("--thin", flags.thinning,
                        "Keep every thin-th post-burn-in sweep (default 1)");
    cm.track(o, "thin", [&flags](const std::string& v) {
        flags.thinning = parse_size("thin", v);
    });
    o = cmd->add_option("--grid-size", flags.grid_size,
                        "Grid resolution for the spike-weight draw (default 1000)");
    cm.track(o, "grid-size", [&flags](const std::string& v) {
        flags.grid_size = parse_int("grid-size", v);
    });
    if (with_mode) {
        o = cmd->add_option("--mode", flags.mode,
                            "Model variant: rpms (covariates inform the "
                            "partition) or ssp (response only)");
        cm.track(o, "mode",
                 [&flags](const std::string& v) { flags.mode = v; });
    }
}

struct HyperFlags {
    Hyperparameters hyper;
    double slab_mean_value = 0.0;
    CLI::Option* slab_mean_opt = nullptr;
};

void add_hyper_flags(CLI::App* cmd, ConfigMap& cm, HyperFlags& flags) {
    struct Field {
        const char* name;
        double* target;
    };
    Hyperparameters& h = flags.hyper;
    const Field fields[] = {
        {"a-omega", &h.a_omega},   {"b-omega", &h.b_omega},
        {"a-pi", &h.a_pi},         {"b-pi", &h.b_pi},
        {"a-tau", &h.a_tau},       {"b-tau", &h.b_tau},
        {"a-zeta", &h.a_zeta},     {"b-zeta", &h.b_zeta},
        {"a-lambda", &h.a_lambda}, {"b-lambda", &h.b_lambda},
        {"a-alpha", &h.a_alpha},   {"b-alpha", &h.b_alpha},
    };
    for (const Field& f : fields) {
        const std::string key = f.name;
        CLI::Option* o = cmd->add_option("--" + key, *f.target,
                                         "Prior hyperparameter " + key);
        cm.track(o, key, [key, target = f.target](const std::string& v) {
            *target = parse_real(key, v);
        });
    }
    CLI::Option* o = cmd->add_option("--n-aux", h.n_aux,
                                     "Auxiliary components per membership draw "
                                     "(default 100)");
    cm.track(o, "n-aux",
             [&h](const std::string& v) { h.n_aux = parse_int("n-aux", v); });
    flags.slab_mean_opt =
        cmd->add_option("--slab-mean", flags.slab_mean_value,
                        "Common slab mean for every coordinate (default 0)");
    cm.track(flags.slab_mean_opt, "slab-mean", [&flags](const std::string& v) {
        flags.slab_mean_value = parse_real("slab-mean", v);
    });
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    CLI::App* cmd = nullptr;
    ConfigMap cm;
    std::string config_path;
    std::string preset;
    std::string spec_path;
    std::string out;
    std::string labels_out;
    std::string response = "y";
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

std::vector<double> flat_matrix(const json& j, const char* key) {
    std::vector<double> out;
    if (!j.is_array()) throw std::runtime_error(std::string(key) + " must be an array");
    for (const json& row : j) {
        if (row.is_array())
            for (const json& v : row) out.push_back(v.get<double>());
        else
            out.push_back(row.get<double>());
    }
    return out;
}

GeneratorSpec spec_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file: " + path);
    try {
        const json j = json::parse(in);
        GeneratorSpec spec;
        spec.n = j.at("n").get<std::size_t>();
        spec.n_covariates = j.at("n_covariates").get<std::size_t>();
        spec.k_true = j.at("k_true").get<std::size_t>();
        spec.cluster_weights = j.at("cluster_weights").get<std::vector<double>>();
        spec.zeta_true = flat_matrix(j.at("zeta_true"), "zeta_true");
        spec.beta_true = flat_matrix(j.at("beta_true"), "beta_true");
        spec.lambda_true = j.at("lambda_true").get<double>();
        if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
        return spec;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::unique_ptr<SimulateArgs> add_simulate(CLI::App& app) {
    auto a = std::make_unique<SimulateArgs>();
    CLI::App* cmd = app.add_subcommand(
        "simulate", "Generate a synthetic dataset with known structure");
    a->cmd = cmd;
    CLI::Option* o;
    o = cmd->add_option("--preset", a->preset,
                        "Built-in design: recovery (3 separated clusters, 8 "
                        "covariates), contrast (2 clusters separated only "
                        "through covariate prevalence), mimic (34 independent "
                        "binary symptoms, mixture response)");
    a->cm.track(o, "preset",
                [p = a.get()](const std::string& v) { p->preset = v; });
    o = cmd->add_option("--spec", a->spec_path,
                        "JSON file with a full generator specification");
    a->cm.track(o, "spec",
                [p = a.get()](const std::string& v) { p->spec_path = v; });
    o = cmd->add_option("--n", a->n, "Override the number of observations");
    a->cm.track(o, "n", [p = a.get()](const std::string& v) {
        p->n = parse_size("n", v);
    });
    o = cmd->add_option("--seed", a->seed, "Override the generator seed");
    a->cm.track(o, "seed", [p = a.get()](const std::string& v) {
        p->seed = parse_size("seed", v);
    });
    o = cmd->add_option("--out", a->out, "Output dataset file (CSV)")
            ->required();
    a->cm.track(o, "out", [p = a.get()](const std::string& v) { p->out = v; });
    o = cmd->add_option("--labels-out", a->labels_out,
                        "Also write the true cluster of each row");
    a->cm.track(o, "labels-out",
                [p = a.get()](const std::string& v) { p->labels_out = v; });
    o = cmd->add_option("--response", a->response,
                        "Name for the response column (default y)");
    a->cm.track(o, "response",
                [p = a.get()](const std::string& v) { p->response = v; });
    cmd->add_option("--config", a->config_path,
                    "Flat key=value configuration file");
    return a;
}

void run_simulate(SimulateArgs& a) {
    if (!a.config_path.empty()) a.cm.load(a.config_path);
    const bool has_preset = a.cm.specified("preset");
    const bool has_spec = a.cm.specified("spec");
    if (has_preset == has_spec)
        throw std::runtime_error(
            "simulate needs exactly one of --preset or --spec");

    ensure_directory(fs::path(a.out).parent_path());

    if (a.preset == "mimic") {
        if (a.cm.specified("labels-out"))
            throw std::runtime_error(
                "the mimic preset draws covariates independently and has no "
                "true labels");
        const std::size_t n = a.cm.specified("n") ? a.n : 500;
        const std::uint64_t seed = a.cm.specified("seed") ? a.seed : 626262;
        const Dataset data = generate_luts_mimic(n, seed);
        write_dataset(data, a.out, a.response);
        std::cout << "wrote " << a.out << "\n";
        return;
    }

    GeneratorSpec spec;
    if (has_spec) {
        spec = spec_from_file(a.spec_path);
    } else if (a.preset == "recovery") {
        spec = presets::recovery_spec();
    } else if (a.preset == "contrast") {
        spec = presets::contrast_spec();
    } else {
        throw std::runtime_error("unknown preset '" + a.preset +
                                 "' (expected recovery, contrast or mimic)");
    }
    if (a.cm.specified("n")) spec.n = a.n;
    if (a.cm.specified("seed")) spec.seed = a.seed;

    const LabeledDataset generated = generate_synthetic(spec);
    write_dataset(generated.data, a.out, a.response);
    std::cout << "wrote " << a.out << "\n";
    if (a.cm.specified("labels-out")) {
        ensure_directory(fs::path(a.labels_out).parent_path());
        std::ofstream out = open_output(a.labels_out);
        out << "observation,cluster\n";
        for (std::size_t i = 0; i < generated.labels.size(); ++i)
            out << i + 1 << "," << generated.labels[i] + 1 << "\n";
        finish_output(out, a.labels_out);
    }
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
    CLI::App* cmd = nullptr;
    ConfigMap cm;
    std::string config_path;
    std::string data_path;
    std::string response = "y";
    bool log_transform = false;
    std::vector<std::uint64_t> seeds;
    ChainFlags chain;
    HyperFlags hyper;
    std::string out;
    std::string prefix = "fit";
};

std::unique_ptr<FitArgs> add_fit(CLI::App& app) {
    auto a = std::make_unique<FitArgs>();
    CLI::App* cmd = app.add_subcommand(
        "fit", "Run the Gibbs sampler on a dataset and write a trace");
    a->cmd = cmd;
    CLI::Option* o;
    o = cmd->add_option("--data", a->data_path, "Input dataset (CSV)")
            ->required();
    a->cm.track(o, "data",
                [p = a.get()](const std::string& v) { p->data_path = v; });
    o = cmd->add_option("--response", a->response,
                        "Response column name (default y)");
    a->cm.track(o, "response",
                [p = a.get()](const std::string& v) { p->response = v; });
    o = cmd->add_flag("--log-transform", a->log_transform,
                      "Model the natural log of the response (raw values "
                      "must be >= 1)");
    a->cm.track(o, "log-transform", [p = a.get()](const std::string& v) {
        p->log_transform = parse_flag_value("log-transform", v);
    });
    o = cmd->add_option("--seed", a->seeds,
                        "Chain seed; repeat (or comma-separate) for multiple "
                        "independent chains (default 0)")
            ->delimiter(',');
    a->cm.track(o, "seed", [p = a.get()](const std::string& v) {
        p->seeds = parse_seed_list("seed", v);
    });
    add_chain_flags(cmd, a->cm, a->chain, true);
    add_hyper_flags(cmd, a->cm, a->hyper);
    o = cmd->add_option("--out", a->out, "Output directory")->required();
    a->cm.track(o, "out", [p = a.get()](const std::string& v) { p->out = v; });
    o = cmd->add_option("--prefix", a->prefix,
                        "Stem for the output file names (default fit)");
    a->cm.track(o, "prefix",
                [p = a.get()](const std::string& v) { p->prefix = v; });
    cmd->add_option("--config", a->config_path,
                    "Flat key=value configuration file");
    return a;
}

void run_fit(FitArgs& a) {
    if (!a.config_path.empty()) a.cm.load(a.config_path);
    const Dataset data = load_dataset(a.data_path, a.response, a.log_transform);

    SamplerConfig config;
    config.iterations = a.chain.iterations;
    config.burn_in = a.chain.burn_in;
    config.thinning = a.chain.thinning;
    config.grid_size = a.chain.grid_size;
    config.mode = mode_from_string(a.chain.mode);

    Hyperparameters hyper = a.hyper.hyper;
    if (a.cm.specified("slab-mean"))
        hyper.slab_mean.assign(data.n_covariates, a.hyper.slab_mean_value);

    std::vector<std::uint64_t> seeds = a.seeds;
    if (seeds.empty()) seeds.push_back(0);

    ensure_directory(a.out);
    for (const std::uint64_t seed : seeds) {
        config.seed = seed;
        const auto t0 = std::chrono::steady_clock::now();
        const Trace trace = run_chain(data, hyper, config);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();

        const std::string stem =
            seeds.size() == 1 ? a.prefix
                              : a.prefix + "_seed" + std::to_string(seed);
        const fs::path trace_path = fs::path(a.out) / (stem + "_trace.jsonl");
        const fs::path manifest_path =
            fs::path(a.out) / (stem + "_manifest.json");
        write_trace(trace, trace_path.string());
        std::cout << "wrote " << trace_path.string() << "\n";

        RunManifest manifest;
        manifest.config = config;
        manifest.hyper = hyper;
        manifest.dataset_path = a.data_path;
        manifest.dataset_hash = trace.dataset_hash;
        manifest.response_column = a.response;
        manifest.log_transform = a.log_transform;
        manifest.trace_path = trace_path.string();
        manifest.snapshots = trace.samples.size();
        manifest.wall_seconds = wall;
        write_manifest(manifest, manifest_path.string());
        std::cout << "wrote " << manifest_path.string() << "\n";
    }
}

// ---------------------------------------------------------------------------
// summarize

struct SummarizeArgs {
    CLI::App* cmd = nullptr;
    ConfigMap cm;
    std::string config_path;
    std::string trace_path;
    std::string data_path;
    std::string response = "y";
    bool log_transform = false;
    std::string out;
    ChainFlags chain; // overrides for the inclusion chain
    std::uint64_t seed = 0;
};

std::unique_ptr<SummarizeArgs> add_summarize(CLI::App& app) {
    auto a = std::make_unique<SummarizeArgs>();
    CLI::App* cmd = app.add_subcommand(
        "summarize",
        "Partition point estimate, co-clustering, selection summaries");
    a->cmd = cmd;
    CLI::Option* o;
    o = cmd->add_option("--trace", a->trace_path, "Trace file from fit")
            ->required();
    a->cm.track(o, "trace",
                [p = a.get()](const std::string& v) { p->trace_path = v; });
    o = cmd->add_option("--data", a->data_path,
                        "Dataset the trace was fitted on")
            ->required();
    a->cm.track(o, "data",
                [p = a.get()](const std::string& v) { p->data_path = v; });
    o = cmd->add_option("--response", a->response,
                        "Response column name (default y)");
    a->cm.track(o, "response",
                [p = a.get()](const std::string& v) { p->response = v; });
    o = cmd->add_flag("--log-transform", a->log_transform,
                      "Apply the same log transform used for the fit");
    a->cm.track(o, "log-transform", [p = a.get()](const std::string& v) {
        p->log_transform = parse_flag_value("log-transform", v);
    });
    add_chain_flags(cmd, a->cm, a->chain, false);
    o = cmd->add_option("--seed", a->seed,
                        "Seed for the conditional inclusion chain (default: "
                        "the trace's seed)");
    a->cm.track(o, "seed", [p = a.get()](const std::string& v) {
        p->seed = parse_size("seed", v);
    });
    o = cmd->add_option("--out", a->out, "Output directory")->required();
    a->cm.track(o, "out", [p = a.get()](const std::string& v) { p->out = v; });
    cmd->add_option("--config", a->config_path,
                    "Flat key=value configuration file");
    return a;
}

void require_matching_checksum(const Trace& trace, const Dataset& data,
                               const std::string& data_path) {
    const std::string actual = dataset_checksum(data);
    if (actual != trace.dataset_hash)
        throw std::runtime_error(
            "dataset checksum mismatch: " + data_path + " hashes to " + actual +
            " but the trace records " + trace.dataset_hash +
            " (was the trace fitted on different data, a different response "
            "column, or a different transform?)");
}

void run_summarize(SummarizeArgs& a) {
    if (!a.config_path.empty()) a.cm.load(a.config_path);
    const Trace trace = read_trace(a.trace_path);
    const Dataset data = load_dataset(a.data_path, a.response, a.log_transform);
    if (data.n() != trace.n || data.n_covariates != trace.n_covariates)
        throw std::runtime_error("dataset dimensions do not match the trace");
    require_matching_checksum(trace, data, a.data_path);

    ensure_directory(a.out);
    const fs::path out_dir(a.out);

    // posterior over the number of clusters
    std::map<std::size_t, std::size_t> k_counts;
    for (const ChainState& snap : trace.samples) ++k_counts[snap.n_clusters()];
    {
        const fs::path path = out_dir / "k_posterior.csv";
        std::ofstream out = open_output(path);
        out << "k,probability\n";
        for (const auto& kv : k_counts)
            out << kv.first << ","
                << fmt(static_cast<double>(kv.second) /
                       static_cast<double>(trace.samples.size()))
                << "\n";
        finish_output(out, path);
    }

    const CoClusteringMatrix gamma = coclustering(trace);
    {
        const fs::path path = out_dir / "coclustering.csv";
        std::ofstream out = open_output(path);
        out << "i,j,gamma\n";
        for (std::size_t i = 0; i < gamma.n; ++i)
            for (std::size_t j = i + 1; j < gamma.n; ++j)
                out << i + 1 << "," << j + 1 << "," << fmt(gamma(i, j)) << "\n";
        finish_output(out, path);
    }

    const Partition part = binder_partition(trace, gamma);
    {
        const fs::path path = out_dir / "binder.csv";
        std::ofstream out = open_output(path);
        out << "observation,cluster\n";
        for (std::size_t i = 0; i < part.labels.size(); ++i)
            out << i + 1 << "," << part.labels[i] + 1 << "\n";
        finish_output(out, path);
    }

    {
        // empirical covariate prevalence within each point-estimate cluster
        const fs::path path = out_dir / "cluster_profiles.csv";
        std::ofstream out = open_output(path);
        out << "cluster,size,coordinate,covariate_rate\n";
        for (std::size_t j = 0; j < part.n_blocks; ++j) {
            for (std::size_t d = 0; d < data.n_covariates; ++d) {
                double active = 0.0;
                for (std::size_t i = 0; i < data.n(); ++i)
                    if (part.labels[i] == static_cast<int>(j))
                        active += data.covariate(i, d);
                out << j + 1 << "," << part.sizes[j] << "," << d + 1 << ","
                    << fmt(active / static_cast<double>(part.sizes[j])) << "\n";
            }
        }
        finish_output(out, path);
    }

    {
        SamplerConfig inc = trace.config;
        if (a.cm.specified("iterations")) inc.iterations = a.chain.iterations;
        if (a.cm.specified("burn-in")) inc.burn_in = a.chain.burn_in;
        if (a.cm.specified("thin")) inc.thinning = a.chain.thinning;
        if (a.cm.specified("grid-size")) inc.grid_size = a.chain.grid_size;
        inc.seed = a.cm.specified("seed") ? a.seed : trace.config.seed;
        const std::vector<double> inclusion =
            inclusion_probabilities(data, trace.hyper, part, inc);
        const fs::path path = out_dir / "inclusion.csv";
        std::ofstream out = open_output(path);
        out << "cluster,coordinate,probability\n";
        for (std::size_t j = 0; j < part.n_blocks; ++j)
            for (std::size_t d = 0; d < data.n_covariates; ++d)
                out << j + 1 << "," << d + 1 << ","
                    << fmt(inclusion[j * data.n_covariates + d]) << "\n";
        finish_output(out, path);
    }

    {
        const fs::path path = out_dir / "global_exclusion.csv";
        std::ofstream out = open_output(path);
        out << "coordinate,probability\n";
        for (std::size_t d = 0; d < trace.n_covariates; ++d)
            out << d + 1 << "," << fmt(global_exclusion_probability(trace, d))
                << "\n";
        finish_output(out, path);
    }
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
    CLI::App* cmd = nullptr;
    ConfigMap cm;
    std::string config_path;
    std::string trace_path;
    std::vector<std::string> profiles;
    std::string out;
    std::uint64_t seed = 1;
};

std::unique_ptr<PredictArgs> add_predict(CLI::App& app) {
    auto a = std::make_unique<PredictArgs>();
    CLI::App* cmd = app.add_subcommand(
        "predict", "Posterior predictive draws for covariate profiles");
    a->cmd = cmd;
    CLI::Option* o;
    o = cmd->add_option("--trace", a->trace_path, "Trace file from fit")
            ->required();
    a->cm.track(o, "trace",
                [p = a.get()](const std::string& v) { p->trace_path = v; });
    o = cmd->add_option("--profile", a->profiles,
                        "Covariate profile as comma-separated 0/1 values, or "
                        "a file with one profile per line; repeatable")
            ->required();
    a->cm.track(o, "profile", [p = a.get()](const std::string& v) {
        p->profiles.push_back(v);
    });
    o = cmd->add_option("--seed", a->seed,
                        "Seed for the predictive draws (default 1)");
    a->cm.track(o, "seed", [p = a.get()](const std::string& v) {
        p->seed = parse_size("seed", v);
    });
    o = cmd->add_option("--out", a->out, "Output directory")->required();
    a->cm.track(o, "out", [p = a.get()](const std::string& v) { p->out = v; });
    cmd->add_option("--config", a->config_path,
                    "Flat key=value configuration file");
    return a;
}

std::vector<std::uint8_t> parse_profile(const std::string& text,
                                        std::size_t n_covariates) {
    const std::vector<std::string> fields = split(text, ',');
    std::vector<std::uint8_t> profile;
    profile.reserve(fields.size());
    for (const std::string& f : fields) {
        const std::string v = trim(f);
        if (v == "0")
            profile.push_back(0);
        else if (v == "1")
            profile.push_back(1);
        else
            throw std::runtime_error("profile '" + text + "': '" + v +
                                     "' is not 0 or 1");
    }
    if (profile.size() != n_covariates)
        throw std::runtime_error(
            "profile '" + text + "' has " + std::to_string(profile.size()) +
            " entries, expected " + std::to_string(n_covariates));
    return profile;
}

void run_predict(PredictArgs& a) {
    if (!a.config_path.empty()) a.cm.load(a.config_path);
    const Trace trace = read_trace(a.trace_path);

    std::vector<std::vector<std::uint8_t>> profiles;
    for (const std::string& arg : a.profiles) {
        if (fs::exists(fs::path(arg)) && fs::is_regular_file(fs::path(arg))) {
            std::ifstream in(arg);
            if (!in)
                throw std::runtime_error("cannot open profile file: " + arg);
            std::string line;
            while (std::getline(in, line)) {
                if (trim(line).empty()) continue;
                profiles.push_back(parse_profile(line, trace.n_covariates));
            }
        } else {
            profiles.push_back(parse_profile(arg, trace.n_covariates));
        }
    }
    if (profiles.empty()) throw std::runtime_error("no profiles given");

    ensure_directory(a.out);
    const fs::path draws_path = fs::path(a.out) / "draws.csv";
    const fs::path summary_path = fs::path(a.out) / "summary.csv";
    std::ofstream draws = open_output(draws_path);
    std::ofstream summary = open_output(summary_path);
    draws << "profile,snapshot,cluster,y";
    for (std::size_t d = 0; d < trace.n_covariates; ++d)
        draws << ",beta" << d + 1;
    draws << "\n";
    summary << "profile,draws,mean_y,sd_y,fresh_rate\n";

    Rng rng(a.seed);
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        const PredictiveDraws result = predict_coefficients_and_response(
            profiles[p], trace, trace.hyper, rng);
        double sum = 0.0, sum_sq = 0.0;
        std::size_t fresh = 0;
        for (std::size_t t = 0; t < result.y.size(); ++t) {
            const std::size_t k_t = trace.samples[t].n_clusters();
            const bool is_fresh =
                result.cluster[t] == static_cast<int>(k_t);
            fresh += is_fresh;
            draws << p + 1 << "," << t + 1 << ","
                  << (is_fresh ? 0 : result.cluster[t] + 1) << ","
                  << fmt(result.y[t]);
            for (double b : result.beta_row(t)) draws << "," << fmt(b);
            draws << "\n";
            sum += result.y[t];
            sum_sq += result.y[t] * result.y[t];
        }
        const double n = static_cast<double>(result.y.size());
        const double mean = sum / n;
        const double var =
            n > 1.0 ? (sum_sq - n * mean * mean) / (n - 1.0) : 0.0;
        summary << p + 1 << "," << result.y.size() << "," << fmt(mean) << ","
                << fmt(std::sqrt(std::max(0.0, var))) << ","
                << fmt(static_cast<double>(fresh) / n) << "\n";
    }
    finish_output(draws, draws_path);
    finish_output(summary, summary_path);
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    CLI::App* cmd = nullptr;
    ConfigMap cm;
    std::string config_path;
    std::vector<std::string> traces;
    std::string data_path;
    std::string response = "y";
    bool log_transform = false;
    std::vector<std::string> quartiles;
    std::string out;
};

std::unique_ptr<EvaluateArgs> add_evaluate(CLI::App& app) {
    auto a = std::make_unique<EvaluateArgs>();
    CLI::App* cmd = app.add_subcommand(
        "evaluate",
        "Posterior Brier scores for exceeding response quartiles");
    a->cmd = cmd;
    CLI::Option* o;
    o = cmd->add_option("--trace", a->traces,
                        "Trace file from fit; repeatable to compare models")
            ->required();
    a->cm.track(o, "trace", [p = a.get()](const std::string& v) {
        p->traces.push_back(v);
    });
    o = cmd->add_option("--data", a->data_path,
                        "Dataset the traces were fitted on")
            ->required();
    a->cm.track(o, "data",
                [p = a.get()](const std::string& v) { p->data_path = v; });
    o = cmd->add_option("--response", a->response,
                        "Response column name (default y)");
    a->cm.track(o, "response",
                [p = a.get()](const std::string& v) { p->response = v; });
    o = cmd->add_flag("--log-transform", a->log_transform,
                      "Apply the same log transform used for the fits");
    a->cm.track(o, "log-transform", [p = a.get()](const std::string& v) {
        p->log_transform = parse_flag_value("log-transform", v);
    });
    o = cmd->add_option("--quartile", a->quartiles,
                        "Quartile threshold q1, q2 or q3; repeatable "
                        "(default: all three)")
            ->delimiter(',');
    a->cm.track(o, "quartile", [p = a.get()](const std::string& v) {
        for (const std::string& q : split(v, ','))
            p->quartiles.push_back(trim(q));
    });
    o = cmd->add_option("--out", a->out, "Output directory")->required();
    a->cm.track(o, "out", [p = a.get()](const std::string& v) { p->out = v; });
    cmd->add_option("--config", a->config_path,
                    "Flat key=value configuration file");
    return a;
}

void run_evaluate(EvaluateArgs& a) {
    if (!a.config_path.empty()) a.cm.load(a.config_path);
    const Dataset data = load_dataset(a.data_path, a.response, a.log_transform);

    std::vector<Quartile> quartiles;
    if (a.quartiles.empty()) {
        quartiles = {Quartile::q1, Quartile::q2, Quartile::q3};
    } else {
        for (const std::string& q : a.quartiles)
            quartiles.push_back(quartile_from_string(q));
    }

    ensure_directory(a.out);
    const fs::path brier_path = fs::path(a.out) / "brier.csv";
    const fs::path scores_path = fs::path(a.out) / "scores.csv";
    std::ofstream brier = open_output(brier_path);
    std::ofstream scores = open_output(scores_path);
    brier << "trace,quartile,threshold,mean,p025,p25,p50,p75,p975,snapshots\n";
    scores << "trace,quartile,snapshot,score\n";

    for (const std::string& trace_path : a.traces) {
        const Trace trace = read_trace(trace_path);
        if (data.n() != trace.n || data.n_covariates != trace.n_covariates)
            throw std::runtime_error("dataset dimensions do not match trace " +
                                     trace_path);
        require_matching_checksum(trace, data, a.data_path);
        for (const Quartile q : quartiles) {
            const BrierResult r = brier_statistic(trace, data, q);
            brier << trace_path << "," << to_string(q) << ","
                  << fmt(r.threshold) << "," << fmt(r.mean) << ","
                  << fmt(empirical_quantile(r.per_sample_scores, 0.025)) << ","
                  << fmt(empirical_quantile(r.per_sample_scores, 0.25)) << ","
                  << fmt(empirical_quantile(r.per_sample_scores, 0.5)) << ","
                  << fmt(empirical_quantile(r.per_sample_scores, 0.75)) << ","
                  << fmt(empirical_quantile(r.per_sample_scores, 0.975)) << ","
                  << r.per_sample_scores.size() << "\n";
            for (std::size_t s = 0; s < r.per_sample_scores.size(); ++s)
                scores << trace_path << "," << to_string(q) << "," << s + 1
                       << "," << fmt(r.per_sample_scores[s]) << "\n";
        }
    }
    finish_output(brier, brier_path);
    finish_output(scores, scores_path);
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
    CLI::App* cmd = nullptr;
    ConfigMap cm;
    std::string config_path;
    std::vector<std::string> traces;
    std::string out;
};

std::unique_ptr<DiagnoseArgs> add_diagnose(CLI::App& app) {
    auto a = std::make_unique<DiagnoseArgs>();
    CLI::App* cmd = app.add_subcommand(
        "diagnose",
        "Potential scale reduction across independent chains");
    a->cmd = cmd;
    CLI::Option* o;
    o = cmd->add_option("--trace", a->traces,
                        "Trace file from fit; give one per chain (at least 2)")
            ->required();
    a->cm.track(o, "trace", [p = a.get()](const std::string& v) {
        p->traces.push_back(v);
    });
    o = cmd->add_option("--out", a->out, "Output directory")->required();
    a->cm.track(o, "out", [p = a.get()](const std::string& v) { p->out = v; });
    cmd->add_option("--config", a->config_path,
                    "Flat key=value configuration file");
    return a;
}

void run_diagnose(DiagnoseArgs& a) {
    if (!a.config_path.empty()) a.cm.load(a.config_path);
    if (a.traces.size() < 2)
        throw std::runtime_error("diagnose requires at least two traces");

    const char* names[] = {"lambda", "alpha", "k", "mean_abs_beta"};
    std::vector<std::vector<std::vector<double>>> chains(4);
    for (const std::string& path : a.traces) {
        const Trace trace = read_trace(path);
        std::vector<double> lambda, alpha, k_series, mean_abs;
        lambda.reserve(trace.samples.size());
        for (const ChainState& snap : trace.samples) {
            lambda.push_back(snap.lambda);
            alpha.push_back(snap.alpha);
            k_series.push_back(static_cast<double>(snap.n_clusters()));
            double total = 0.0;
            std::size_t count = 0;
            for (const ClusterParams& cl : snap.clusters)
                for (double b : cl.beta) {
                    total += std::abs(b);
                    ++count;
                }
            mean_abs.push_back(count ? total / static_cast<double>(count) : 0.0);
        }
        chains[0].push_back(std::move(lambda));
        chains[1].push_back(std::move(alpha));
        chains[2].push_back(std::move(k_series));
        chains[3].push_back(std::move(mean_abs));
    }

    ensure_directory(a.out);
    const fs::path path = fs::path(a.out) / "rhat.csv";
    std::ofstream out = open_output(path);
    out << "statistic,rhat\n";
    for (std::size_t s = 0; s < 4; ++s) {
        double rhat;
        try {
            rhat = gelman_rubin(chains[s]);
        } catch (const std::domain_error&) {
            // every chain constant at the same value: no spread to compare
            rhat = std::numeric_limits<double>::quiet_NaN();
        }
        out << names[s] << "," << fmt(rhat) << "\n";
    }
    finish_output(out, path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Dirichlet-process mixture of regressions on binary covariates with "
        "spike-and-slab variable selection within clusters"};
    app.require_subcommand(1);

    auto simulate_args = add_simulate(app);
    auto fit_args = add_fit(app);
    auto summarize_args = add_summarize(app);
    auto predict_args = add_predict(app);
    auto evaluate_args = add_evaluate(app);
    auto diagnose_args = add_diagnose(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (simulate_args->cmd->parsed()) run_simulate(*simulate_args);
        else if (fit_args->cmd->parsed()) run_fit(*fit_args);
        else if (summarize_args->cmd->parsed()) run_summarize(*summarize_args);
        else if (predict_args->cmd->parsed()) run_predict(*predict_args);
        else if (evaluate_args->cmd->parsed()) run_evaluate(*evaluate_args);
        else if (diagnose_args->cmd->parsed()) run_diagnose(*diagnose_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
