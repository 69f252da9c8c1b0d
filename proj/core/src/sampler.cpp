#include "rpms/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rpms {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

std::size_t retained_snapshots(const SamplerConfig& config) {
    return (config.iterations - config.burn_in) / config.thinning;
}

ChainState initial_chain_state(std::size_t n, std::size_t n_covariates,
                               const Hyperparameters& hyper, Mode mode) {
    ChainState st;
    st.labels.assign(n, 0);
    ClusterParams cl;
    cl.beta.assign(n_covariates, 0.0);
    if (mode == Mode::rpms) cl.zeta.assign(n_covariates, 0.5);
    st.clusters.push_back(std::move(cl));
    st.lambda = 1.0;
    st.alpha = 1.0;
    st.pi.assign(n_covariates, hyper.a_pi / (hyper.a_pi + hyper.b_pi));
    st.tau.assign(n_covariates, hyper.a_tau / hyper.b_tau);
    return st;
}

double sample_concentration(double alpha, std::size_t k, std::size_t n,
                            const Hyperparameters& hyper, Rng& rng) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("sample_concentration: alpha must be positive");
    if (k < 1 || n < 1 || k > n)
        throw std::invalid_argument("sample_concentration: need 1 <= k <= n");
    const double u = rng.beta(alpha + 1.0, static_cast<double>(n));
    const double rate = hyper.b_alpha - std::log(u);
    const double odds = (hyper.a_alpha + static_cast<double>(k) - 1.0)
                        / (static_cast<double>(n) * rate);
    const double xi = odds / (1.0 + odds);
    const double shape = rng.uniform() < xi
                             ? hyper.a_alpha + static_cast<double>(k)
                             : hyper.a_alpha + static_cast<double>(k) - 1.0;
    return rng.gamma(shape, rate);
}

double log_slab_spike_bayes_factor(double tau_d, double slab_mean_d,
                                   double weighted_residual_sum,
                                   double weighted_design_sum) {
    if (!(tau_d > 0.0) || weighted_design_sum < 0.0)
        throw std::invalid_argument("log_slab_spike_bayes_factor: bad precision input");
    const double precision = tau_d + weighted_design_sum;
    const double b = slab_mean_d * tau_d + weighted_residual_sum;
    return 0.5 * (std::log(tau_d) - std::log(precision))
           - 0.5 * tau_d * slab_mean_d * slab_mean_d
           + 0.5 * b * b / precision;
}

SlabPosterior slab_posterior(double tau_d, double slab_mean_d,
                             double weighted_residual_sum,
                             double weighted_design_sum) {
    if (!(tau_d > 0.0) || weighted_design_sum < 0.0)
        throw std::invalid_argument("slab_posterior: bad precision input");
    const double precision = tau_d + weighted_design_sum;
    const double b = slab_mean_d * tau_d + weighted_residual_sum;
    return {b / precision, precision};
}

double sample_spike_weight(const Hyperparameters& hyper, int zero_clusters,
                           int nonzero_clusters, int grid_size, Rng& rng) {
    if (grid_size < 100)
        throw std::invalid_argument("sample_spike_weight: grid_size must be at least 100");
    if (zero_clusters < 0 || nonzero_clusters < 0)
        throw std::invalid_argument("sample_spike_weight: negative cluster count");
    const double w = hyper.w_omega();
    const double a = hyper.a_pi;
    const double b = hyper.b_pi;
    std::vector<double> mass(grid_size);
    double max_log = neg_inf;
    for (int t = 0; t < grid_size; ++t) {
        const double r = w * (t + 0.5) / grid_size;
        const double lf = (a - 1.0 + zero_clusters) * std::log(r)
                          + (b - 1.0) * std::log(w - r)
                          + nonzero_clusters * std::log1p(-r);
        mass[t] = lf;
        if (lf > max_log) max_log = lf;
    }
    // renormalize in log space before exponentiating; never an error
    double total = 0.0;
    for (double& m : mass) total += m = std::exp(m - max_log);
    const double u = rng.uniform();
    double cum = 0.0;
    double best_gap = std::numeric_limits<double>::infinity();
    int best = 0;
    for (int t = 0; t < grid_size; ++t) {
        cum += mass[t] / total;
        const double gap = std::abs(cum - u);
        if (gap < best_gap) {
            best_gap = gap;
            best = t;
        }
    }
    return w * (best + 0.5) / grid_size;
}

GibbsSampler::GibbsSampler(Dataset data, Hyperparameters hyper, SamplerConfig config)
    : data_(std::move(data)),
      hyper_(std::move(hyper)),
      config_(config),
      rng_(config.seed) {
    data_.validate();
    hyper_.validate();
    config_.validate();
    const std::size_t d_count = data_.n_covariates;
    if (!hyper_.slab_mean.empty() && hyper_.slab_mean.size() != d_count)
        throw std::invalid_argument(
            "GibbsSampler: slab_mean must be empty or sized like the covariates");
    if (hyper_.slab_mean.empty()) hyper_.slab_mean.assign(d_count, 0.0);
    state_ = initial_chain_state(data_.n(), d_count, hyper_, config_.mode);
    log_size_.resize(data_.n() + 1);
    log_size_[0] = neg_inf;
    for (std::size_t t = 1; t < log_size_.size(); ++t)
        log_size_[t] = std::log(static_cast<double>(t));
    aux_beta_.resize(static_cast<std::size_t>(hyper_.n_aux) * d_count);
    if (config_.mode == Mode::rpms)
        aux_zeta_.resize(static_cast<std::size_t>(hyper_.n_aux) * d_count);
    residual_.resize(data_.n());
    rebuild_sizes();
}

void GibbsSampler::rebuild_sizes() {
    sizes_ = cluster_sizes(state_.labels, state_.clusters.size());
}

void GibbsSampler::rebuild_zeta_log_cache() {
    const std::size_t d_count = data_.n_covariates;
    const std::size_t k = state_.clusters.size();
    log_zeta_.resize(k * d_count);
    log_one_minus_zeta_.resize(k * d_count);
    for (std::size_t j = 0; j < k; ++j) {
        const std::vector<double>& z = state_.clusters[j].zeta;
        for (std::size_t d = 0; d < d_count; ++d) {
            log_zeta_[j * d_count + d] = std::log(z[d]);
            log_one_minus_zeta_[j * d_count + d] = std::log1p(-z[d]);
        }
    }
}

double GibbsSampler::reduced_response_loglik(std::size_t i, const double* beta) const {
    const std::size_t d_count = data_.n_covariates;
    const std::uint8_t* xi = data_.x.data() + i * d_count;
    double mean = 0.0;
    for (std::size_t d = 0; d < d_count; ++d)
        if (xi[d]) mean += beta[d];
    const double r = data_.y[i] - mean;
    return -0.5 * state_.lambda * r * r;
}

double GibbsSampler::covariate_loglik_cached(std::size_t i, std::size_t j) const {
    const std::size_t d_count = data_.n_covariates;
    const std::uint8_t* xi = data_.x.data() + i * d_count;
    const double* lz = log_zeta_.data() + j * d_count;
    const double* lq = log_one_minus_zeta_.data() + j * d_count;
    double total = 0.0;
    for (std::size_t d = 0; d < d_count; ++d)
        total += xi[d] ? lz[d] : lq[d];
    return total;
}

void GibbsSampler::draw_auxiliary(std::size_t slot) {
    const std::size_t d_count = data_.n_covariates;
    double* beta = aux_beta_.data() + slot * d_count;
    const double w = hyper_.w_omega();
    for (std::size_t d = 0; d < d_count; ++d) {
        if (rng_.uniform() < state_.pi[d] * w)
            beta[d] = 0.0;
        else
            beta[d] = rng_.normal(hyper_.slab_mean[d], 1.0 / std::sqrt(state_.tau[d]));
    }
    if (config_.mode == Mode::rpms) {
        double* zeta = aux_zeta_.data() + slot * d_count;
        for (std::size_t d = 0; d < d_count; ++d) {
            double z = rng_.beta(hyper_.a_zeta, hyper_.b_zeta);
            if (z < zeta_floor) z = zeta_floor;
            if (z > zeta_ceiling) z = zeta_ceiling;
            zeta[d] = z;
        }
    }
}

void GibbsSampler::remove_cluster(std::size_t j) {
    const std::size_t d_count = data_.n_covariates;
    const std::size_t last = state_.clusters.size() - 1;
    if (j != last) {
        state_.clusters[j] = std::move(state_.clusters[last]);
        sizes_[j] = sizes_[last];
        if (!log_zeta_.empty()) {
            std::copy_n(log_zeta_.data() + last * d_count, d_count,
                        log_zeta_.data() + j * d_count);
            std::copy_n(log_one_minus_zeta_.data() + last * d_count, d_count,
                        log_one_minus_zeta_.data() + j * d_count);
        }
        for (int& s : state_.labels)
            if (s == static_cast<int>(last)) s = static_cast<int>(j);
    }
    state_.clusters.pop_back();
    sizes_.pop_back();
    if (!log_zeta_.empty()) {
        log_zeta_.resize(last * d_count);
        log_one_minus_zeta_.resize(last * d_count);
    }
}

void GibbsSampler::update_membership() { update_membership({}); }

void GibbsSampler::update_membership(std::span<const int> order) {
    const std::size_t n = data_.n();
    const std::size_t d_count = data_.n_covariates;
    const bool rpms_mode = config_.mode == Mode::rpms;
    const std::size_t n_aux = static_cast<std::size_t>(hyper_.n_aux);
    const double log_alpha_over_m =
        std::log(state_.alpha) - std::log(static_cast<double>(n_aux));

    rebuild_sizes();
    if (rpms_mode) rebuild_zeta_log_cache();

    std::vector<int> natural;
    if (order.empty()) {
        natural.resize(n);
        std::iota(natural.begin(), natural.end(), 0);
        order = natural;
    }

    for (int i : order) {
        if (i < 0 || static_cast<std::size_t>(i) >= n)
            throw std::invalid_argument("update_membership: order index out of range");
        const std::size_t j_old = static_cast<std::size_t>(state_.labels[i]);
        --sizes_[j_old];
        const bool was_singleton = sizes_[j_old] == 0;
        ClusterParams recycled;
        if (was_singleton) {
            recycled = std::move(state_.clusters[j_old]);
            remove_cluster(j_old);
        }
        const std::size_t k = state_.clusters.size();
        log_weights_.resize(k + n_aux);
        for (std::size_t j = 0; j < k; ++j) {
            double lw = log_size_[sizes_[j]]
                        + reduced_response_loglik(i, state_.clusters[j].beta.data());
            if (rpms_mode) lw += covariate_loglik_cached(i, j);
            log_weights_[j] = lw;
        }
        const std::uint8_t* xi = data_.x.data() + static_cast<std::size_t>(i) * d_count;
        for (std::size_t m = 0; m < n_aux; ++m) {
            const double* beta = aux_beta_.data() + m * d_count;
            if (m == 0 && was_singleton) {
                std::copy(recycled.beta.begin(), recycled.beta.end(),
                          aux_beta_.begin() + m * d_count);
                if (rpms_mode)
                    std::copy(recycled.zeta.begin(), recycled.zeta.end(),
                              aux_zeta_.begin() + m * d_count);
            } else {
                draw_auxiliary(m);
            }
            double lw = log_alpha_over_m + reduced_response_loglik(i, beta);
            if (rpms_mode) {
                const double* zeta = aux_zeta_.data() + m * d_count;
                double c = 0.0;
                for (std::size_t d = 0; d < d_count; ++d)
                    c += xi[d] ? std::log(zeta[d]) : std::log1p(-zeta[d]);
                lw += c;
            }
            log_weights_[k + m] = lw;
        }
        const std::size_t pick = rng_.categorical_log(log_weights_);
        if (pick < k) {
            state_.labels[i] = static_cast<int>(pick);
            ++sizes_[pick];
        } else {
            const std::size_t m = pick - k;
            ClusterParams fresh;
            fresh.beta.assign(aux_beta_.begin() + m * d_count,
                              aux_beta_.begin() + (m + 1) * d_count);
            if (rpms_mode) {
                fresh.zeta.assign(aux_zeta_.begin() + m * d_count,
                                  aux_zeta_.begin() + (m + 1) * d_count);
                for (std::size_t d = 0; d < d_count; ++d) {
                    log_zeta_.push_back(std::log(fresh.zeta[d]));
                    log_one_minus_zeta_.push_back(std::log1p(-fresh.zeta[d]));
                }
            }
            state_.clusters.push_back(std::move(fresh));
            sizes_.push_back(1);
            state_.labels[i] = static_cast<int>(k);
        }
    }
}

void GibbsSampler::update_alpha() {
    state_.alpha = sample_concentration(state_.alpha, state_.clusters.size(),
                                        data_.n(), hyper_, rng_);
}

void GibbsSampler::update_zeta() {
    if (config_.mode == Mode::ssp)
        throw std::logic_error("update_zeta: covariate rates do not exist in ssp mode");
    const std::size_t d_count = data_.n_covariates;
    const std::size_t k = state_.clusters.size();
    rebuild_sizes();
    std::vector<int> active(k * d_count, 0);
    for (std::size_t i = 0; i < data_.n(); ++i) {
        const std::size_t j = static_cast<std::size_t>(state_.labels[i]);
        const std::uint8_t* xi = data_.x.data() + i * d_count;
        for (std::size_t d = 0; d < d_count; ++d)
            active[j * d_count + d] += xi[d];
    }
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double>& zeta = state_.clusters[j].zeta;
        for (std::size_t d = 0; d < d_count; ++d) {
            const int c = active[j * d_count + d];
            double z = rng_.beta(hyper_.a_zeta + c,
                                 hyper_.b_zeta + sizes_[j] - c);
            if (z < zeta_floor) z = zeta_floor;
            if (z > zeta_ceiling) z = zeta_ceiling;
            zeta[d] = z;
        }
    }
}

void GibbsSampler::record_members(std::vector<std::vector<int>>& members) const {
    members.assign(state_.clusters.size(), {});
    for (std::size_t i = 0; i < data_.n(); ++i)
        members[static_cast<std::size_t>(state_.labels[i])].push_back(
            static_cast<int>(i));
}

void GibbsSampler::update_beta() {
    const std::size_t d_count = data_.n_covariates;
    const double w = hyper_.w_omega();
    std::vector<std::vector<int>> members;
    record_members(members);
    for (std::size_t j = 0; j < state_.clusters.size(); ++j) {
        std::vector<double>& beta = state_.clusters[j].beta;
        for (int i : members[j]) {
            const std::uint8_t* xi = data_.x.data() + static_cast<std::size_t>(i) * d_count;
            double mean = 0.0;
            for (std::size_t d = 0; d < d_count; ++d)
                if (xi[d]) mean += beta[d];
            residual_[i] = data_.y[i] - mean;
        }
        for (std::size_t d = 0; d < d_count; ++d) {
            // A_i = residual with coordinate d excluded; only active rows count
            double residual_sum = 0.0;
            int active = 0;
            for (int i : members[j]) {
                if (data_.x[static_cast<std::size_t>(i) * d_count + d]) {
                    residual_sum += residual_[i] + beta[d];
                    ++active;
                }
            }
            const double swr = state_.lambda * residual_sum;
            const double swd = state_.lambda * active;
            const double log_bf = log_slab_spike_bayes_factor(
                state_.tau[d], hyper_.slab_mean[d], swr, swd);
            const double r = state_.pi[d] * w;
            double value;
            // P(spike) = r / (r + (1-r) * BF), evaluated in logistic form so a
            // huge Bayes factor cannot overflow
            const double log_odds_slab = std::log1p(-r) - std::log(r) + log_bf;
            const double p_spike = 1.0 / (1.0 + std::exp(log_odds_slab));
            if (rng_.uniform() < p_spike) {
                value = 0.0;
            } else {
                const SlabPosterior sp =
                    slab_posterior(state_.tau[d], hyper_.slab_mean[d], swr, swd);
                value = rng_.normal(sp.mean, 1.0 / std::sqrt(sp.precision));
            }
            if (value != beta[d]) {
                const double delta = beta[d] - value;
                for (int i : members[j])
                    if (data_.x[static_cast<std::size_t>(i) * d_count + d])
                        residual_[i] += delta;
                beta[d] = value;
            }
        }
    }
}

void GibbsSampler::update_pi() {
    const std::size_t d_count = data_.n_covariates;
    const std::size_t k = state_.clusters.size();
    const double w = hyper_.w_omega();
    for (std::size_t d = 0; d < d_count; ++d) {
        int zero = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (state_.clusters[j].beta[d] == 0.0) ++zero;
        const double r = sample_spike_weight(hyper_, zero,
                                             static_cast<int>(k) - zero,
                                             config_.grid_size, rng_);
        state_.pi[d] = r / w;
    }
}

void GibbsSampler::update_tau() {
    const std::size_t d_count = data_.n_covariates;
    for (std::size_t d = 0; d < d_count; ++d) {
        int nonzero = 0;
        double ssq = 0.0;
        for (const ClusterParams& cl : state_.clusters) {
            const double b = cl.beta[d];
            if (b != 0.0) {
                const double dev = b - hyper_.slab_mean[d];
                ssq += dev * dev;
                ++nonzero;
            }
        }
        state_.tau[d] = rng_.gamma(hyper_.a_tau + 0.5 * nonzero,
                                   hyper_.b_tau + 0.5 * ssq);
    }
}

void GibbsSampler::update_lambda() {
    const std::size_t d_count = data_.n_covariates;
    double ssq = 0.0;
    for (std::size_t i = 0; i < data_.n(); ++i) {
        const std::vector<double>& beta =
            state_.clusters[static_cast<std::size_t>(state_.labels[i])].beta;
        const std::uint8_t* xi = data_.x.data() + i * d_count;
        double mean = 0.0;
        for (std::size_t d = 0; d < d_count; ++d)
            if (xi[d]) mean += beta[d];
        const double r = data_.y[i] - mean;
        ssq += r * r;
    }
    state_.lambda = rng_.gamma(hyper_.a_lambda + 0.5 * data_.n(),
                               hyper_.b_lambda + 0.5 * ssq);
}

void GibbsSampler::sweep() {
    update_membership();
    update_alpha();
    if (config_.mode == Mode::rpms) update_zeta();
    update_beta();
    update_pi();
    update_tau();
    update_lambda();
}

void GibbsSampler::conditional_sweep() {
    if (config_.mode == Mode::rpms) update_zeta();
    update_beta();
    update_pi();
    update_tau();
    update_lambda();
}

Trace GibbsSampler::run() {
    state_ = initial_chain_state(data_.n(), data_.n_covariates, hyper_, config_.mode);
    rng_ = Rng(config_.seed);
    rebuild_sizes();
    Trace trace;
    trace.config = config_;
    trace.hyper = hyper_;
    trace.n = data_.n();
    trace.n_covariates = data_.n_covariates;
    trace.dataset_hash = dataset_checksum(data_);
    trace.samples.reserve(retained_snapshots(config_));
    for (std::size_t iter = 1; iter <= config_.iterations; ++iter) {
        sweep();
        if (iter > config_.burn_in &&
            (iter - config_.burn_in) % config_.thinning == 0)
            trace.samples.push_back(state_);
    }
    return trace;
}

void GibbsSampler::set_state(ChainState state) {
    state.validate(data_.n(), data_.n_covariates, config_.mode);
    state_ = std::move(state);
    rebuild_sizes();
}

void GibbsSampler::set_data(Dataset data) {
    data.validate();
    if (data.n() != data_.n() || data.n_covariates != data_.n_covariates)
        throw std::invalid_argument("set_data: dimensions must match the current data");
    data_ = std::move(data);
}

double GibbsSampler::membership_log_weight(std::size_t i, std::size_t j) const {
    if (i >= data_.n() || j >= state_.clusters.size())
        throw std::invalid_argument("membership_log_weight: index out of range");
    int occupancy = 0;
    for (int s : state_.labels)
        if (static_cast<std::size_t>(s) == j) ++occupancy;
    if (static_cast<std::size_t>(state_.labels[i]) == j) --occupancy;
    if (occupancy == 0) return neg_inf;
    double lw = std::log(static_cast<double>(occupancy))
                + log_response_density(data_.y[i], data_.row(i),
                                       state_.clusters[j].beta, state_.lambda);
    if (config_.mode == Mode::rpms)
        lw += log_covariate_density(data_.row(i), state_.clusters[j].zeta);
    return lw;
}

Trace run_chain(const Dataset& data, const Hyperparameters& hyper,
                const SamplerConfig& config) {
    GibbsSampler sampler(data, hyper, config);
    return sampler.run();
}

} // namespace rpms
