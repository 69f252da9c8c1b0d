#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rpms/model.hpp"

namespace rpms {

// Reads a delimited text file with a header row. The named column becomes the
// response; every other column must contain only 0/1 and becomes a covariate,
// in file order. With log_transform the raw response must be >= 1 and is
// replaced by its natural log. Parse failures name the offending row and
// column; a too-small response under log_transform names the row.
Dataset load_dataset(const std::string& path, const std::string& response_column,
                     bool log_transform = false, char delimiter = ',');

// Writes the dataset with a header row (response column first, covariates as
// x1..xD). Responses are printed with round-trip precision, so writing and
// re-loading reproduces the dataset exactly.
void write_dataset(const Dataset& data, const std::string& path,
                   const std::string& response_column = "y",
                   char delimiter = ',');

// Finite-mixture generator with known cluster structure.
struct GeneratorSpec {
    std::size_t n = 0;
    std::size_t n_covariates = 0;
    std::size_t k_true = 0;
    std::vector<double> cluster_weights; // length k_true, positive
    std::vector<double> zeta_true;       // k_true x D row-major, entries in [0, 1]
    std::vector<double> beta_true;       // k_true x D row-major
    double lambda_true = 1.0;            // response precision
    std::uint64_t seed = 0;

    void validate() const;
};

struct LabeledDataset {
    Dataset data;
    std::vector<int> labels; // true component of each row, 0-based
};

// Draws each row's component from cluster_weights, covariates from the
// component's Bernoulli rates, and the response from
// Normal(x . beta, lambda_true^-1). Deterministic in the seed.
LabeledDataset generate_synthetic(const GeneratorSpec& spec);

// Published marginal frequencies of the 34 binary urinary-symptom
// indicators; used by the mimic generator below.
std::span<const double> luts_symptom_frequencies();

// Synthetic stand-in with the same shape as the urinary-symptom study:
// 34 independent Bernoulli covariates at the published marginal frequencies
// and a log-scale response drawn from a fixed three-component Normal mixture
// (weights 0.45/0.40/0.15, means 0.8/2.0/3.5, sds 0.5/0.7/0.6). No clinical
// content; real study results are not reproducible from it.
Dataset generate_luts_mimic(std::size_t n, std::uint64_t seed);

} // namespace rpms
