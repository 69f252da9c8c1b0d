#include "rpms/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace rpms {

namespace {

constexpr double log_2pi = 1.8378770664093454836;

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

std::string to_string(Mode mode) {
    return mode == Mode::rpms ? "rpms" : "ssp";
}

Mode mode_from_string(const std::string& text) {
    if (text == "rpms") return Mode::rpms;
    if (text == "ssp") return Mode::ssp;
    throw std::invalid_argument("unknown mode '" + text + "' (expected rpms or ssp)");
}

void Dataset::validate() const {
    require(!y.empty(), "Dataset: at least one observation required");
    require(n_covariates >= 1, "Dataset: at least one covariate required");
    require(x.size() == y.size() * n_covariates,
            "Dataset: covariate matrix size does not match n * n_covariates");
    for (double v : y)
        require(std::isfinite(v), "Dataset: non-finite response");
    for (std::uint8_t v : x)
        require(v <= 1, "Dataset: covariate entries must be 0 or 1");
}

std::string dataset_checksum(const Dataset& data) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](const void* p, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const char tag[] = "rpms.dataset.v1";
    mix(tag, sizeof(tag) - 1);
    const std::uint64_t n = data.n();
    const std::uint64_t d = data.n_covariates;
    mix(&n, sizeof(n));
    mix(&d, sizeof(d));
    for (double v : data.y) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        mix(&bits, sizeof(bits));
    }
    mix(data.x.data(), data.x.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void Hyperparameters::validate() const {
    const double shapes[] = {a_omega, b_omega, a_pi, b_pi, a_tau, b_tau,
                             a_zeta, b_zeta, a_lambda, b_lambda, a_alpha, b_alpha};
    for (double v : shapes)
        require(std::isfinite(v) && v > 0.0,
                "Hyperparameters: all shape/rate values must be finite and positive");
    require(n_aux >= 1, "Hyperparameters: n_aux must be at least 1");
    for (double v : slab_mean)
        require(std::isfinite(v), "Hyperparameters: slab means must be finite");
}

void ChainState::validate(std::size_t n, std::size_t n_covariates, Mode mode) const {
    require(labels.size() == n, "ChainState: label vector length must equal n");
    require(!clusters.empty(), "ChainState: at least one cluster required");
    const std::size_t k = clusters.size();
    std::vector<int> counts(k, 0);
    for (int s : labels) {
        require(s >= 0 && static_cast<std::size_t>(s) < k,
                "ChainState: label out of range");
        ++counts[s];
    }
    for (int c : counts)
        require(c > 0, "ChainState: empty cluster (labels must be contiguous)");
    for (const ClusterParams& cl : clusters) {
        require(cl.beta.size() == n_covariates,
                "ChainState: coefficient vector length must equal n_covariates");
        for (double b : cl.beta)
            require(std::isfinite(b), "ChainState: non-finite coefficient");
        if (mode == Mode::rpms) {
            require(cl.zeta.size() == n_covariates,
                    "ChainState: zeta length must equal n_covariates in rpms mode");
            for (double z : cl.zeta)
                require(z > 0.0 && z < 1.0, "ChainState: zeta must lie inside (0, 1)");
        } else {
            require(cl.zeta.empty(), "ChainState: zeta must be absent in ssp mode");
        }
    }
    require(std::isfinite(lambda) && lambda > 0.0, "ChainState: lambda must be positive");
    require(std::isfinite(alpha) && alpha > 0.0, "ChainState: alpha must be positive");
    require(pi.size() == n_covariates, "ChainState: pi length must equal n_covariates");
    require(tau.size() == n_covariates, "ChainState: tau length must equal n_covariates");
    for (double p : pi)
        require(p >= 0.0 && p <= 1.0, "ChainState: pi entries must lie in [0, 1]");
    for (double t : tau)
        require(std::isfinite(t) && t > 0.0, "ChainState: tau entries must be positive");
}

void SamplerConfig::validate() const {
    require(iterations >= 1, "SamplerConfig: iterations must be at least 1");
    require(burn_in < iterations, "SamplerConfig: burn_in must be smaller than iterations");
    require(thinning >= 1, "SamplerConfig: thinning must be at least 1");
    require(grid_size >= 100, "SamplerConfig: grid_size must be at least 100");
}

std::vector<int> cluster_sizes(const std::vector<int>& labels, std::size_t k) {
    std::vector<int> sizes(k, 0);
    for (int s : labels) {
        if (s < 0 || static_cast<std::size_t>(s) >= k)
            throw std::invalid_argument("cluster_sizes: label out of range");
        ++sizes[s];
    }
    return sizes;
}

double log_response_density(double y, std::span<const std::uint8_t> x,
                            std::span<const double> beta, double lambda) {
    require(x.size() == beta.size(), "log_response_density: x/beta size mismatch");
    require(std::isfinite(y), "log_response_density: non-finite response");
    require(std::isfinite(lambda) && lambda > 0.0,
            "log_response_density: lambda must be finite and positive");
    double mean = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        require(std::isfinite(beta[d]), "log_response_density: non-finite coefficient");
        if (x[d]) mean += beta[d];
    }
    const double r = y - mean;
    return 0.5 * std::log(lambda) - 0.5 * log_2pi - 0.5 * lambda * r * r;
}

double log_covariate_density(std::span<const std::uint8_t> x,
                             std::span<const double> zeta) {
    require(x.size() == zeta.size(), "log_covariate_density: x/zeta size mismatch");
    double total = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
        require(zeta[d] > 0.0 && zeta[d] < 1.0,
                "log_covariate_density: zeta must lie strictly inside (0, 1)");
        total += x[d] ? std::log(zeta[d]) : std::log1p(-zeta[d]);
    }
    return total;
}

ClusterParams sample_base_measure(const Hyperparameters& hyper,
                                  std::span<const double> pi,
                                  std::span<const double> tau,
                                  Mode mode, Rng& rng) {
    require(pi.size() == tau.size(), "sample_base_measure: pi/tau size mismatch");
    const double w = hyper.w_omega();
    const std::size_t d_count = pi.size();
    ClusterParams out;
    out.beta.resize(d_count);
    for (std::size_t d = 0; d < d_count; ++d) {
        const double spike = pi[d] * w;
        if (rng.uniform() < spike)
            out.beta[d] = 0.0;
        else
            out.beta[d] = rng.normal(hyper.slab_mean_at(d), 1.0 / std::sqrt(tau[d]));
    }
    if (mode == Mode::rpms) {
        out.zeta.resize(d_count);
        for (std::size_t d = 0; d < d_count; ++d) {
            double z = rng.beta(hyper.a_zeta, hyper.b_zeta);
            if (z < zeta_floor) z = zeta_floor;
            if (z > zeta_ceiling) z = zeta_ceiling;
            out.zeta[d] = z;
        }
    }
    return out;
}

} // namespace rpms
