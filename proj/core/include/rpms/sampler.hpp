#pragma once

#include <span>
#include <vector>

#include "rpms/model.hpp"
#include "rpms/rng.hpp"

namespace rpms {

// Retained posterior snapshots plus everything needed to interpret them.
struct Trace {
    std::vector<ChainState> samples;
    SamplerConfig config;
    Hyperparameters hyper;
    std::size_t n = 0;
    std::size_t n_covariates = 0;
    std::string dataset_hash;

    Mode mode() const { return config.mode; }
};

// Number of snapshots a run retains: floor((iterations - burn_in) / thinning).
std::size_t retained_snapshots(const SamplerConfig& config);

// Deterministic starting point: every observation in one cluster with zero
// coefficients (and rates 1/2 in RPMS mode), lambda = alpha = 1, pi and tau
// at their prior means.
ChainState initial_chain_state(std::size_t n, std::size_t n_covariates,
                               const Hyperparameters& hyper, Mode mode);

// Escobar-West move for the DP concentration: draw the auxiliary
// u ~ Beta(alpha + 1, n), then alpha from the two-Gamma mixture
//   xi * Gamma(a_alpha + k, b_alpha - log u)
//   + (1 - xi) * Gamma(a_alpha + k - 1, b_alpha - log u),
// with mixture odds xi / (1 - xi) = (a_alpha + k - 1) / (n * (b_alpha - log u)).
// Leaves p(alpha | k, n) invariant.
double sample_concentration(double alpha, std::size_t k, std::size_t n,
                            const Hyperparameters& hyper, Rng& rng);

// log of the slab-versus-spike marginal likelihood ratio for one coordinate
// of one cluster, given the accumulated sums
//   weighted_residual_sum = lambda * sum_{i in cluster} x_id * A_i
//   weighted_design_sum   = lambda * sum_{i in cluster} x_id^2
// where A_i is the response residual with coordinate d excluded. Equals 0
// (ratio 1) when the cluster carries no active observation for d.
double log_slab_spike_bayes_factor(double tau_d, double slab_mean_d,
                                   double weighted_residual_sum,
                                   double weighted_design_sum);

// Mean and precision of the slab full conditional for the same sums.
struct SlabPosterior {
    double mean;
    double precision;
};
SlabPosterior slab_posterior(double tau_d, double slab_mean_d,
                             double weighted_residual_sum,
                             double weighted_design_sum);

// Grid draw of the spike weight r_d on (0, w_omega): the rescaled
// Beta(a_pi, b_pi) prior times r^z (1-r)^(k-z), evaluated in log space on a
// midpoint grid, normalized, and inverted at a uniform draw ("nearest grid
// point" rule). The caller stores pi_d = r_d / w_omega.
double sample_spike_weight(const Hyperparameters& hyper, int zero_clusters,
                           int nonzero_clusters, int grid_size, Rng& rng);

// Collapsed Gibbs sampler over (s, alpha, zeta*, beta*, pi, tau, lambda).
// A single chain is strictly sequential; distinct instances never share
// state, so chains with different seeds may run on separate threads.
class GibbsSampler {
public:
    GibbsSampler(Dataset data, Hyperparameters hyper, SamplerConfig config);

    // One full sweep in the fixed order: membership, concentration, rates
    // (RPMS only), coefficients, spike weights, slab precisions, noise.
    void sweep();

    // Sweep with the partition and concentration frozen; used for
    // inclusion-probability chains conditioned on a fixed clustering.
    void conditional_sweep();

    // Resets to the deterministic initial state and the configured seed,
    // runs all iterations, and retains every thinning-th post-burn-in state.
    Trace run();

    // Neal algorithm-8 membership update with n_aux auxiliary components
    // per observation; a singleton's parameters are recycled as the first
    // auxiliary. Clusters stay contiguously labeled throughout. The optional
    // order argument selects which observations to visit (default: all, in
    // index order); it exists so tests can drive single-observation updates
    // and check row exchangeability.
    void update_membership();
    void update_membership(std::span<const int> order);

    void update_alpha();
    // Conjugate Beta update of the per-cluster Bernoulli rates. Throws
    // std::logic_error in SSP mode, where no rates exist.
    void update_zeta();
    // Coordinate-wise spike/slab update of every cluster's coefficients,
    // clusters in label order, coordinates in index order.
    void update_beta();
    void update_pi();
    void update_tau();
    void update_lambda();

    const ChainState& state() const { return state_; }
    const Dataset& data() const { return data_; }
    const SamplerConfig& config() const { return config_; }
    const Hyperparameters& hyper() const { return hyper_; }
    Rng& rng() { return rng_; }

    // Replaces the chain state (validated against the data and mode).
    void set_state(ChainState state);
    // Replaces the data in place, keeping the chain state; dimensions must
    // match. This is what a successive-conditional simulator needs.
    void set_data(Dataset data);

    // Unnormalized log membership weight of observation i for the existing
    // cluster j, with i removed from the counts: log n_j^-i plus the response
    // log-density and, in RPMS mode, the covariate log-density. Diagnostic
    // mirror of the sweep's internal computation (which drops constants).
    double membership_log_weight(std::size_t i, std::size_t j) const;

private:
    void remove_cluster(std::size_t j);
    void rebuild_sizes();
    void rebuild_zeta_log_cache();
    double reduced_response_loglik(std::size_t i, const double* beta) const;
    double covariate_loglik_cached(std::size_t i, std::size_t j) const;
    void draw_auxiliary(std::size_t slot);
    void record_members(std::vector<std::vector<int>>& members) const;

    Dataset data_;
    Hyperparameters hyper_;
    SamplerConfig config_;
    Rng rng_;
    ChainState state_;

    std::vector<int> sizes_;
    std::vector<double> log_size_;          // log(1..n), built once
    std::vector<double> log_zeta_;          // k * D cache (RPMS)
    std::vector<double> log_one_minus_zeta_;
    std::vector<double> aux_beta_;          // n_aux * D scratch
    std::vector<double> aux_zeta_;
    std::vector<double> log_weights_;
    std::vector<double> residual_;
};

// Convenience wrapper: validate, construct, run.
Trace run_chain(const Dataset& data, const Hyperparameters& hyper,
                const SamplerConfig& config);

} // namespace rpms
