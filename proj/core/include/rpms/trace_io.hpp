#pragma once

#include <string>

#include "rpms/sampler.hpp"

namespace rpms {

inline constexpr int trace_schema_version = 1;

// Line-delimited record format: the first line is a header object carrying
// the schema version, dimensions, dataset checksum, sampler config and
// hyperparameters; each following line is one retained snapshot with keys
// s, clusters (beta and, in RPMS mode only, zeta), lambda, alpha, pi, tau.
// Serialization is deterministic, so equal traces produce byte-equal files.
void write_trace(const Trace& trace, const std::string& path);

// Inverse of write_trace. Structural problems raise std::runtime_error; a
// corrupt snapshot line reports its 1-based record index. The snapshot count
// must match what the header's config retains.
Trace read_trace(const std::string& path);

// Companion metadata for one fit.
struct RunManifest {
    SamplerConfig config;
    Hyperparameters hyper;
    std::string dataset_path;
    std::string dataset_hash;
    std::string response_column;
    bool log_transform = false;
    std::string trace_path;
    std::size_t snapshots = 0;
    double wall_seconds = 0.0;
};

void write_manifest(const RunManifest& manifest, const std::string& path);
RunManifest read_manifest(const std::string& path);

} // namespace rpms
