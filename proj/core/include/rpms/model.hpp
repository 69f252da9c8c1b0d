#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rpms/rng.hpp"

// Model state and densities for a Dirichlet-process mixture of linear
// regressions on binary covariates with within-cluster spike-and-slab
// coefficient selection.
//
// Convention used everywhere in this library: lambda (response noise) and
// tau_d (slab scale) are PRECISIONS, i.e. inverse variances, never variances
// or standard deviations.

namespace rpms {

// Bounds applied to every sampled Bernoulli rate so that covariate
// log-densities stay finite.
inline constexpr double zeta_floor = 1e-12;
inline constexpr double zeta_ceiling = 1.0 - 1e-12;

enum class Mode { rpms, ssp };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& text);

// Regression data: real response, binary covariates stored row-major.
struct Dataset {
    std::vector<double> y;
    std::vector<std::uint8_t> x; // n * n_covariates, entries 0/1
    std::size_t n_covariates = 0;

    std::size_t n() const { return y.size(); }
    std::uint8_t covariate(std::size_t i, std::size_t d) const {
        return x[i * n_covariates + d];
    }
    std::span<const std::uint8_t> row(std::size_t i) const {
        return {x.data() + i * n_covariates, n_covariates};
    }

    // n >= 1, n_covariates >= 1, x sized n * n_covariates with 0/1 entries,
    // finite responses. Throws std::invalid_argument.
    void validate() const;
};

// 64-bit FNV-1a over a canonical byte serialization; hex string. Used to tie
// traces to the dataset they were drawn against.
std::string dataset_checksum(const Dataset& data);

struct Hyperparameters {
    // Spike weight construction: the marginal spike probability of a
    // coordinate is pi_d * w_omega with w_omega = a_omega / (a_omega + b_omega).
    double a_omega = 1.0;
    double b_omega = 0.15;
    // Prior on pi_d.
    double a_pi = 1.0;
    double b_pi = 0.15;
    // Prior on the slab precisions tau_d.
    double a_tau = 1.0;
    double b_tau = 1.0;
    // Prior on the Bernoulli rates zeta_d.
    double a_zeta = 1.0;
    double b_zeta = 1.0;
    // Prior on the response precision lambda.
    double a_lambda = 1.0;
    double b_lambda = 1.0;
    // Prior on the concentration alpha.
    double a_alpha = 1.0;
    double b_alpha = 1.0;
    // Slab means; empty means all zero, otherwise must have one entry per
    // covariate.
    std::vector<double> slab_mean;
    // Number of auxiliary components per membership draw.
    int n_aux = 100;

    double w_omega() const { return a_omega / (a_omega + b_omega); }
    double slab_mean_at(std::size_t d) const {
        return slab_mean.empty() ? 0.0 : slab_mean[d];
    }

    // All shape/rate values strictly positive, n_aux >= 1, slab means finite.
    void validate() const;
};

// Parameters of one mixture component. zeta is empty in SSP mode, where the
// covariates carry no model.
struct ClusterParams {
    std::vector<double> beta;
    std::vector<double> zeta;
};

struct ChainState {
    std::vector<int> labels;             // length n, values 0..k-1, contiguous
    std::vector<ClusterParams> clusters; // length k >= 1
    double lambda = 1.0;                 // response precision
    double alpha = 1.0;                  // DP concentration
    std::vector<double> pi;              // length D, entries in [0, 1]
    std::vector<double> tau;             // length D, positive

    std::size_t n_clusters() const { return clusters.size(); }

    // Structural invariants for a state over n observations and D covariates:
    // labels contiguous with no empty cluster, every beta sized D, zeta sized
    // D in RPMS mode and absent in SSP mode, positive precisions.
    void validate(std::size_t n, std::size_t n_covariates, Mode mode) const;
};

struct SamplerConfig {
    std::size_t iterations = 10000;
    std::size_t burn_in = 1000;
    std::size_t thinning = 1;
    std::uint64_t seed = 0;
    Mode mode = Mode::rpms;
    // Resolution of the grid draw for the spike weights r_d.
    int grid_size = 1000;

    // iterations >= 1, burn_in < iterations, thinning >= 1, grid_size >= 100.
    void validate() const;
};

// Occupancy counts of a contiguous labeling with k blocks.
std::vector<int> cluster_sizes(const std::vector<int>& labels, std::size_t k);

// log N(y | x . beta, lambda^-1). Throws std::invalid_argument on non-finite
// inputs, a non-positive precision, or a size mismatch.
double log_response_density(double y, std::span<const std::uint8_t> x,
                            std::span<const double> beta, double lambda);

// log prod_d zeta_d^x_d (1-zeta_d)^(1-x_d). Every rate must lie strictly
// inside (0, 1); violations throw std::invalid_argument.
double log_covariate_density(std::span<const std::uint8_t> x,
                             std::span<const double> zeta);

// One fresh component from the integrated base measure: per coordinate the
// coefficient is an exact zero with probability pi_d * w_omega and otherwise
// Normal(slab_mean_d, tau_d^-1); in RPMS mode the Bernoulli rates are
// Beta(a_zeta, b_zeta) draws clamped to [zeta_floor, zeta_ceiling].
ClusterParams sample_base_measure(const Hyperparameters& hyper,
                                  std::span<const double> pi,
                                  std::span<const double> tau,
                                  Mode mode, Rng& rng);

} // namespace rpms
