#include "rpms/trace_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace rpms {

namespace {

using json = nlohmann::json;

json config_to_json(const SamplerConfig& c) {
    return json{{"iterations", c.iterations}, {"burn_in", c.burn_in},
                {"thinning", c.thinning},     {"seed", c.seed},
                {"mode", to_string(c.mode)},  {"grid_size", c.grid_size}};
}

SamplerConfig config_from_json(const json& j) {
    SamplerConfig c;
    c.iterations = j.at("iterations").get<std::size_t>();
    c.burn_in = j.at("burn_in").get<std::size_t>();
    c.thinning = j.at("thinning").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.grid_size = j.at("grid_size").get<int>();
    return c;
}

json hyper_to_json(const Hyperparameters& h) {
    return json{{"a_omega", h.a_omega},   {"b_omega", h.b_omega},
                {"a_pi", h.a_pi},         {"b_pi", h.b_pi},
                {"a_tau", h.a_tau},       {"b_tau", h.b_tau},
                {"a_zeta", h.a_zeta},     {"b_zeta", h.b_zeta},
                {"a_lambda", h.a_lambda}, {"b_lambda", h.b_lambda},
                {"a_alpha", h.a_alpha},   {"b_alpha", h.b_alpha},
                {"slab_mean", h.slab_mean}, {"n_aux", h.n_aux}};
}

Hyperparameters hyper_from_json(const json& j) {
    Hyperparameters h;
    h.a_omega = j.at("a_omega").get<double>();
    h.b_omega = j.at("b_omega").get<double>();
    h.a_pi = j.at("a_pi").get<double>();
    h.b_pi = j.at("b_pi").get<double>();
    h.a_tau = j.at("a_tau").get<double>();
    h.b_tau = j.at("b_tau").get<double>();
    h.a_zeta = j.at("a_zeta").get<double>();
    h.b_zeta = j.at("b_zeta").get<double>();
    h.a_lambda = j.at("a_lambda").get<double>();
    h.b_lambda = j.at("b_lambda").get<double>();
    h.a_alpha = j.at("a_alpha").get<double>();
    h.b_alpha = j.at("b_alpha").get<double>();
    h.slab_mean = j.at("slab_mean").get<std::vector<double>>();
    h.n_aux = j.at("n_aux").get<int>();
    return h;
}

} // namespace

void write_trace(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trace file: " + path);
    json header{{"schema_version", trace_schema_version},
                {"kind", "rpms-trace"},
                {"n", trace.n},
                {"n_covariates", trace.n_covariates},
                {"dataset_hash", trace.dataset_hash},
                {"config", config_to_json(trace.config)},
                {"hyper", hyper_to_json(trace.hyper)}};
    out << header.dump() << "\n";
    const bool rpms_mode = trace.mode() == Mode::rpms;
    for (const ChainState& snap : trace.samples) {
        json clusters = json::array();
        for (const ClusterParams& cl : snap.clusters) {
            json c{{"beta", cl.beta}};
            if (rpms_mode) c["zeta"] = cl.zeta;
            clusters.push_back(std::move(c));
        }
        json rec{{"s", snap.labels}, {"clusters", std::move(clusters)},
                 {"lambda", snap.lambda}, {"alpha", snap.alpha},
                 {"pi", snap.pi},         {"tau", snap.tau}};
        out << rec.dump() << "\n";
    }
    if (!out.good())
        throw std::runtime_error("failed while writing trace file: " + path);
}

Trace read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty trace file, expected a header record");
    Trace trace;
    try {
        const json header = json::parse(line);
        const int version = header.at("schema_version").get<int>();
        if (version != trace_schema_version)
            throw std::runtime_error("unsupported schema_version " + std::to_string(version));
        if (header.at("kind").get<std::string>() != "rpms-trace")
            throw std::runtime_error("not a trace file (kind mismatch)");
        trace.n = header.at("n").get<std::size_t>();
        trace.n_covariates = header.at("n_covariates").get<std::size_t>();
        trace.dataset_hash = header.at("dataset_hash").get<std::string>();
        trace.config = config_from_json(header.at("config"));
        trace.hyper = hyper_from_json(header.at("hyper"));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": header record: " + e.what());
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path + ": header record: " + e.what());
    }
    const bool rpms_mode = trace.mode() == Mode::rpms;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++record;
        try {
            const json rec = json::parse(line);
            ChainState snap;
            snap.labels = rec.at("s").get<std::vector<int>>();
            for (const json& c : rec.at("clusters")) {
                ClusterParams cl;
                cl.beta = c.at("beta").get<std::vector<double>>();
                if (rpms_mode) cl.zeta = c.at("zeta").get<std::vector<double>>();
                snap.clusters.push_back(std::move(cl));
            }
            snap.lambda = rec.at("lambda").get<double>();
            snap.alpha = rec.at("alpha").get<double>();
            snap.pi = rec.at("pi").get<std::vector<double>>();
            snap.tau = rec.at("tau").get<std::vector<double>>();
            snap.validate(trace.n, trace.n_covariates, trace.mode());
            trace.samples.push_back(std::move(snap));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ": trace record " + std::to_string(record) +
                                     ": " + e.what());
        }
    }
    const std::size_t expected = retained_snapshots(trace.config);
    if (trace.samples.size() != expected)
        throw std::runtime_error(path + ": expected " + std::to_string(expected) +
                                 " snapshots per the header config, found " +
                                 std::to_string(trace.samples.size()));
    return trace;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest file: " + path);
    json j{{"schema_version", trace_schema_version},
           {"kind", "rpms-run-manifest"},
           {"config", config_to_json(manifest.config)},
           {"hyper", hyper_to_json(manifest.hyper)},
           {"dataset_path", manifest.dataset_path},
           {"dataset_hash", manifest.dataset_hash},
           {"response_column", manifest.response_column},
           {"log_transform", manifest.log_transform},
           {"trace_path", manifest.trace_path},
           {"snapshots", manifest.snapshots},
           {"wall_seconds", manifest.wall_seconds}};
    out << j.dump(2) << "\n";
    if (!out.good())
        throw std::runtime_error("failed while writing manifest file: " + path);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open manifest file: " + path);
    RunManifest m;
    try {
        const json j = json::parse(in);
        if (j.at("kind").get<std::string>() != "rpms-run-manifest")
            throw std::runtime_error("not a run manifest (kind mismatch)");
        m.config = config_from_json(j.at("config"));
        m.hyper = hyper_from_json(j.at("hyper"));
        m.dataset_path = j.at("dataset_path").get<std::string>();
        m.dataset_hash = j.at("dataset_hash").get<std::string>();
        m.response_column = j.at("response_column").get<std::string>();
        m.log_transform = j.at("log_transform").get<bool>();
        m.trace_path = j.at("trace_path").get<std::string>();
        m.snapshots = j.at("snapshots").get<std::size_t>();
        m.wall_seconds = j.at("wall_seconds").get<double>();
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return m;
}

} // namespace rpms
