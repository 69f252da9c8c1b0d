#include "rpms/summaries.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rpms {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::vector<std::vector<int>> block_members(const std::vector<int>& labels,
                                            std::size_t k) {
    std::vector<std::vector<int>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i)
        members[static_cast<std::size_t>(labels[i])].push_back(
            static_cast<int>(i));
    return members;
}

} // namespace

CoClusteringMatrix coclustering(const Trace& trace) {
    require(!trace.samples.empty(), "coclustering: empty trace");
    const std::size_t n = trace.n;
    std::vector<double> counts(n * n, 0.0);
    for (const ChainState& snap : trace.samples) {
        const auto members = block_members(snap.labels, snap.n_clusters());
        for (const std::vector<int>& block : members) {
            for (std::size_t a = 0; a < block.size(); ++a)
                for (std::size_t b = a + 1; b < block.size(); ++b) {
                    counts[static_cast<std::size_t>(block[a]) * n + block[b]] += 1.0;
                    counts[static_cast<std::size_t>(block[b]) * n + block[a]] += 1.0;
                }
        }
    }
    const double t = static_cast<double>(trace.samples.size());
    CoClusteringMatrix out;
    out.n = n;
    out.gamma.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.gamma[i * n + j] = i == j ? 1.0 : counts[i * n + j] / t;
    return out;
}

double binder_loss(std::span<const int> labels, const CoClusteringMatrix& gamma,
                   double l1, double l2) {
    require(labels.size() == gamma.n, "binder_loss: label length mismatch");
    require(l1 >= 0.0 && l2 >= 0.0, "binder_loss: penalties must be nonnegative");
    const std::size_t n = gamma.n;
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double g = gamma(i, j);
            if (labels[i] == labels[j])
                loss += l2 * (1.0 - g);
            else
                loss += l1 * g;
        }
    return loss;
}

Partition binder_partition(const Trace& trace, const CoClusteringMatrix& gamma,
                           double l1, double l2) {
    require(!trace.samples.empty(), "binder_partition: empty trace");
    require(gamma.n == trace.n, "binder_partition: co-clustering size mismatch");
    require(l1 >= 0.0 && l2 >= 0.0, "binder_partition: penalties must be nonnegative");
    const std::size_t n = trace.n;
    // Shared term: l1 * sum_{i<j} gamma. Per candidate only the same-cluster
    // pairs matter, which keeps the search linear in occupied pairs.
    double gamma_total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            gamma_total += gamma(i, j);
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t t = 0; t < trace.samples.size(); ++t) {
        const ChainState& snap = trace.samples[t];
        const auto members = block_members(snap.labels, snap.n_clusters());
        double loss = l1 * gamma_total;
        for (const std::vector<int>& block : members)
            for (std::size_t a = 0; a < block.size(); ++a)
                for (std::size_t b = a + 1; b < block.size(); ++b) {
                    const double g = gamma(static_cast<std::size_t>(block[a]),
                                           static_cast<std::size_t>(block[b]));
                    loss += l2 * (1.0 - g) - l1 * g;
                }
        if (loss < best_loss) {
            best_loss = loss;
            best_index = t;
        }
    }
    const ChainState& chosen = trace.samples[best_index];
    Partition out;
    out.labels = chosen.labels;
    out.n_blocks = chosen.n_clusters();
    out.sizes = cluster_sizes(out.labels, out.n_blocks);
    return out;
}

Partition binder_partition(const Trace& trace, double l1, double l2) {
    return binder_partition(trace, coclustering(trace), l1, l2);
}

std::vector<double> inclusion_probabilities(const Dataset& data,
                                            const Hyperparameters& hyper,
                                            const Partition& partition,
                                            const SamplerConfig& config) {
    require(partition.labels.size() == data.n(),
            "inclusion_probabilities: partition length must equal n");
    require(retained_snapshots(config) >= 1,
            "inclusion_probabilities: config retains no snapshots");
    GibbsSampler sampler(data, hyper, config);
    const std::size_t d_count = data.n_covariates;
    const std::size_t k = partition.n_blocks;

    ChainState frozen = initial_chain_state(data.n(), d_count, sampler.hyper(),
                                            config.mode);
    frozen.labels = partition.labels;
    frozen.clusters.assign(k, frozen.clusters[0]);
    sampler.set_state(std::move(frozen));

    std::vector<double> included(k * d_count, 0.0);
    std::size_t retained = 0;
    for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
        sampler.conditional_sweep();
        if (iter > config.burn_in &&
            (iter - config.burn_in) % config.thinning == 0) {
            ++retained;
            for (std::size_t j = 0; j < k; ++j) {
                const std::vector<double>& beta = sampler.state().clusters[j].beta;
                for (std::size_t d = 0; d < d_count; ++d)
                    if (beta[d] != 0.0) included[j * d_count + d] += 1.0;
            }
        }
    }
    for (double& v : included) v /= static_cast<double>(retained);
    return included;
}

std::vector<double> predict_cluster(std::span<const std::uint8_t> profile,
                                    const ChainState& state,
                                    const Hyperparameters& hyper) {
    require(!state.clusters.empty(), "predict_cluster: state has no clusters");
    for (std::uint8_t v : profile)
        require(v <= 1, "predict_cluster: profile entries must be 0 or 1");
    const bool has_rates = !state.clusters[0].zeta.empty();
    if (has_rates)
        require(profile.size() == state.clusters[0].zeta.size(),
                "predict_cluster: profile length must equal n_covariates");
    const std::size_t k = state.n_clusters();
    const std::vector<int> sizes = cluster_sizes(state.labels, k);

    std::vector<double> log_w(k + 1);
    for (std::size_t j = 0; j < k; ++j) {
        double lw = std::log(static_cast<double>(sizes[j]));
        if (has_rates) {
            const std::vector<double>& zeta = state.clusters[j].zeta;
            for (std::size_t d = 0; d < profile.size(); ++d)
                lw += profile[d] ? std::log(zeta[d]) : std::log1p(-zeta[d]);
        }
        log_w[j] = lw;
    }
    double fresh = std::log(state.alpha);
    if (has_rates) {
        // Prior-predictive mass of the profile: Beta-Bernoulli coordinate by
        // coordinate.
        const double total = hyper.a_zeta + hyper.b_zeta;
        for (std::uint8_t v : profile)
            fresh += std::log((v ? hyper.a_zeta : hyper.b_zeta) / total);
    }
    log_w[k] = fresh;

    double max_log = log_w[0];
    for (double v : log_w)
        if (v > max_log) max_log = v;
    double total = 0.0;
    for (double& v : log_w) total += v = std::exp(v - max_log);
    for (double& v : log_w) v /= total;
    return log_w;
}

PredictiveDraws predict_coefficients_and_response(
    std::span<const std::uint8_t> profile, const Trace& trace,
    const Hyperparameters& hyper, Rng& rng) {
    require(!trace.samples.empty(), "predict_coefficients_and_response: empty trace");
    require(profile.size() == trace.n_covariates,
            "predict_coefficients_and_response: profile length must equal n_covariates");
    const std::size_t d_count = trace.n_covariates;
    const double w = hyper.w_omega();
    PredictiveDraws out;
    out.n_covariates = d_count;
    out.cluster.reserve(trace.samples.size());
    out.beta.reserve(trace.samples.size() * d_count);
    out.y.reserve(trace.samples.size());
    for (const ChainState& snap : trace.samples) {
        const std::vector<double> weights = predict_cluster(profile, snap, hyper);
        const std::size_t pick = rng.categorical(weights);
        out.cluster.push_back(static_cast<int>(pick));
        double mean = 0.0;
        if (pick < snap.n_clusters()) {
            const std::vector<double>& beta = snap.clusters[pick].beta;
            for (std::size_t d = 0; d < d_count; ++d) {
                out.beta.push_back(beta[d]);
                if (profile[d]) mean += beta[d];
            }
        } else {
            // Fresh component conditioned on this snapshot's pi and tau; only
            // the coefficients matter for the response draw.
            for (std::size_t d = 0; d < d_count; ++d) {
                double b = 0.0;
                if (!(rng.uniform() < snap.pi[d] * w))
                    b = rng.normal(hyper.slab_mean_at(d),
                                   1.0 / std::sqrt(snap.tau[d]));
                out.beta.push_back(b);
                if (profile[d]) mean += b;
            }
        }
        out.y.push_back(rng.normal(mean, 1.0 / std::sqrt(snap.lambda)));
    }
    return out;
}

double global_exclusion_probability(const Trace& trace, std::size_t d) {
    require(!trace.samples.empty(), "global_exclusion_probability: empty trace");
    require(d < trace.n_covariates,
            "global_exclusion_probability: coordinate index out of range");
    std::size_t excluded = 0;
    for (const ChainState& snap : trace.samples) {
        bool all_zero = true;
        for (const ClusterParams& cl : snap.clusters)
            if (cl.beta[d] != 0.0) {
                all_zero = false;
                break;
            }
        if (all_zero) ++excluded;
    }
    return static_cast<double>(excluded) / static_cast<double>(trace.samples.size());
}

} // namespace rpms
