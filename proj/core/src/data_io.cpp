#include "rpms/data_io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rpms/rng.hpp"

namespace rpms {

namespace {

std::vector<std::string> split(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delimiter)) fields.push_back(field);
    if (!line.empty() && line.back() == delimiter) fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t row,
                             const std::string& column, const std::string& what) {
    throw std::runtime_error(path + ": row " + std::to_string(row) +
                             ", column '" + column + "': " + what);
}

constexpr std::array<double, 34> luts_frequencies = {
    0.4146, 0.4280, 0.2304, 0.5496, 0.2595, 0.2901, 0.1365, 0.0515, 0.1462,
    0.1536, 0.0783, 0.0850, 0.0895, 0.1104, 0.1797, 0.1909, 0.1514, 0.0828,
    0.1641, 0.0820, 0.1193, 0.1611, 0.2148, 0.0567, 0.0723, 0.0634, 0.1260,
    0.0164, 0.2081, 0.0895, 0.0865, 0.0649, 0.1484, 0.0507};

} // namespace

Dataset load_dataset(const std::string& path, const std::string& response_column,
                     bool log_transform, char delimiter) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path + ": empty file, expected a header row");
    const std::vector<std::string> raw_header = split(line, delimiter);
    std::vector<std::string> header;
    header.reserve(raw_header.size());
    for (const std::string& h : raw_header) header.push_back(trim(h));

    std::size_t response_index = header.size();
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == response_column) {
            response_index = c;
            break;
        }
    if (response_index == header.size())
        throw std::runtime_error(path + ": response column '" + response_column +
                                 "' not found in header");
    if (header.size() < 2)
        throw std::runtime_error(path + ": need at least one covariate column");

    Dataset data;
    data.n_covariates = header.size() - 1;
    std::size_t row = 1; // header is row 1
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> fields = split(line, delimiter);
        if (fields.size() != header.size())
            throw std::runtime_error(path + ": row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const std::string value = trim(fields[c]);
            if (c == response_index) {
                char* end = nullptr;
                const double v = std::strtod(value.c_str(), &end);
                if (value.empty() || end != value.c_str() + value.size() || !std::isfinite(v))
                    parse_fail(path, row, header[c], "'" + value + "' is not a finite number");
                if (log_transform) {
                    if (v < 1.0)
                        throw std::domain_error(
                            path + ": row " + std::to_string(row) +
                            ": log transform requires a response >= 1, found " + value);
                    data.y.push_back(std::log(v));
                } else {
                    data.y.push_back(v);
                }
            } else {
                if (value == "0")
                    data.x.push_back(0);
                else if (value == "1")
                    data.x.push_back(1);
                else
                    parse_fail(path, row, header[c],
                               "'" + value + "' is not a binary covariate (expected 0 or 1)");
            }
        }
    }
    if (data.y.empty())
        throw std::runtime_error(path + ": no data rows");
    data.validate();
    return data;
}

void write_dataset(const Dataset& data, const std::string& path,
                   const std::string& response_column, char delimiter) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    out << response_column;
    for (std::size_t d = 1; d <= data.n_covariates; ++d)
        out << delimiter << "x" << d;
    out << "\n";
    char buf[40];
    for (std::size_t i = 0; i < data.n(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", data.y[i]);
        out << buf;
        for (std::size_t d = 0; d < data.n_covariates; ++d)
            out << delimiter << static_cast<int>(data.covariate(i, d));
        out << "\n";
    }
    if (!out.good())
        throw std::runtime_error("failed while writing dataset file: " + path);
}

void GeneratorSpec::validate() const {
    auto fail = [](const char* msg) { throw std::invalid_argument(msg); };
    if (n < 1) fail("GeneratorSpec: n must be at least 1");
    if (n_covariates < 1) fail("GeneratorSpec: n_covariates must be at least 1");
    if (k_true < 1) fail("GeneratorSpec: k_true must be at least 1");
    if (cluster_weights.size() != k_true)
        fail("GeneratorSpec: cluster_weights must have k_true entries");
    for (double w : cluster_weights)
        if (!(w > 0.0) || !std::isfinite(w))
            fail("GeneratorSpec: cluster weights must be positive and finite");
    if (zeta_true.size() != k_true * n_covariates)
        fail("GeneratorSpec: zeta_true must be k_true x n_covariates");
    for (double z : zeta_true)
        if (!(z >= 0.0 && z <= 1.0))
            fail("GeneratorSpec: zeta_true entries must lie in [0, 1]");
    if (beta_true.size() != k_true * n_covariates)
        fail("GeneratorSpec: beta_true must be k_true x n_covariates");
    for (double b : beta_true)
        if (!std::isfinite(b)) fail("GeneratorSpec: beta_true entries must be finite");
    if (!(lambda_true > 0.0) || !std::isfinite(lambda_true))
        fail("GeneratorSpec: lambda_true must be a positive precision");
}

LabeledDataset generate_synthetic(const GeneratorSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const std::size_t d_count = spec.n_covariates;
    const double sd = 1.0 / std::sqrt(spec.lambda_true);
    LabeledDataset out;
    out.data.n_covariates = d_count;
    out.data.y.reserve(spec.n);
    out.data.x.reserve(spec.n * d_count);
    out.labels.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t c = rng.categorical(spec.cluster_weights);
        out.labels.push_back(static_cast<int>(c));
        double mean = 0.0;
        for (std::size_t d = 0; d < d_count; ++d) {
            const bool on = rng.bernoulli(spec.zeta_true[c * d_count + d]);
            out.data.x.push_back(on ? 1 : 0);
            if (on) mean += spec.beta_true[c * d_count + d];
        }
        out.data.y.push_back(rng.normal(mean, sd));
    }
    return out;
}

std::span<const double> luts_symptom_frequencies() {
    return {luts_frequencies.data(), luts_frequencies.size()};
}

Dataset generate_luts_mimic(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_luts_mimic: n must be at least 1");
    Rng rng(seed);
    constexpr std::array<double, 3> weights = {0.45, 0.40, 0.15};
    constexpr std::array<double, 3> means = {0.8, 2.0, 3.5};
    constexpr std::array<double, 3> sds = {0.5, 0.7, 0.6};
    Dataset data;
    data.n_covariates = luts_frequencies.size();
    data.y.reserve(n);
    data.x.reserve(n * data.n_covariates);
    for (std::size_t i = 0; i < n; ++i) {
        for (double f : luts_frequencies)
            data.x.push_back(rng.bernoulli(f) ? 1 : 0);
        const std::size_t c = rng.categorical(std::span<const double>(weights));
        data.y.push_back(rng.normal(means[c], sds[c]));
    }
    return data;
}

} // namespace rpms
