#pragma once

#include <span>
#include <vector>

#include "rpms/sampler.hpp"

namespace rpms {

// Posterior pairwise co-clustering probabilities: gamma(i, i') is the
// fraction of retained snapshots in which i and i' share a cluster.
struct CoClusteringMatrix {
    std::size_t n = 0;
    std::vector<double> gamma; // n * n, symmetric, unit diagonal

    double operator()(std::size_t i, std::size_t j) const {
        return gamma[i * n + j];
    }
};

struct Partition {
    std::vector<int> labels; // contiguous 0..n_blocks-1
    std::size_t n_blocks = 0;
    std::vector<int> sizes;
};

// Predictive draws for one covariate profile, one row per retained snapshot.
// cluster[t] in {0..k_t} where k_t means "fresh cluster from the base
// measure"; beta is row-major (draws x n_covariates).
struct PredictiveDraws {
    std::vector<int> cluster;
    std::vector<double> beta;
    std::vector<double> y;
    std::size_t n_covariates = 0;

    std::span<const double> beta_row(std::size_t t) const {
        return {beta.data() + t * n_covariates, n_covariates};
    }
};

CoClusteringMatrix coclustering(const Trace& trace);

// Binder loss of a candidate labeling against a co-clustering matrix:
// sum over pairs of l2 * same * (1 - gamma) + l1 * split * gamma.
double binder_loss(std::span<const int> labels, const CoClusteringMatrix& gamma,
                   double l1 = 1.0, double l2 = 1.0);

// Binder point estimate restricted to the partitions visited by the chain;
// ties resolve to the earliest snapshot.
Partition binder_partition(const Trace& trace, const CoClusteringMatrix& gamma,
                           double l1 = 1.0, double l2 = 1.0);
Partition binder_partition(const Trace& trace, double l1 = 1.0, double l2 = 1.0);

// Posterior inclusion probabilities under a frozen partition: a fresh
// conditional chain (all updates except membership and concentration) is run
// with the given seed/config, and the frequency of nonzero coefficients is
// returned row-major (n_blocks x n_covariates).
std::vector<double> inclusion_probabilities(const Dataset& data,
                                            const Hyperparameters& hyper,
                                            const Partition& partition,
                                            const SamplerConfig& config);

// Predictive allocation weights for a covariate profile under one snapshot:
// k + 1 probabilities, the last for a fresh cluster. Existing clusters weigh
// n_j times the profile's Bernoulli likelihood; the fresh-cluster weight is
// alpha times the prior-predictive profile mass. States without stored rates
// (SSP, or the degenerate D = 0 guard) reduce to sizes and alpha.
std::vector<double> predict_cluster(std::span<const std::uint8_t> profile,
                                    const ChainState& state,
                                    const Hyperparameters& hyper);

// Composition over the whole trace: per snapshot, draw an allocation, take
// that cluster's coefficients (or a fresh base-measure draw conditioned on
// the snapshot's pi and tau), and draw the response at the profile.
PredictiveDraws predict_coefficients_and_response(
    std::span<const std::uint8_t> profile, const Trace& trace,
    const Hyperparameters& hyper, Rng& rng);

// Fraction of retained snapshots in which coordinate d is an exact zero in
// every cluster.
double global_exclusion_probability(const Trace& trace, std::size_t d);

} // namespace rpms
