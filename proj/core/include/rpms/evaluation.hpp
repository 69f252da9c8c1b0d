#pragma once

#include <span>
#include <vector>

#include "rpms/sampler.hpp"

namespace rpms {

enum class Quartile { q1 = 1, q2 = 2, q3 = 3 };

std::string to_string(Quartile q);
Quartile quartile_from_string(const std::string& text);

// Empirical quantile with the inclusive linear-interpolation rule: on the
// sorted values, h = (n - 1) p and the result interpolates between the
// values at floor(h) and floor(h) + 1.
double empirical_quantile(std::vector<double> values, double p);

// Mean squared distance between exceedance forecasts and outcomes.
double brier_score(std::span<const double> forecasts,
                   std::span<const std::uint8_t> outcomes);

// Posterior distribution of the Brier score for exceeding an empirical
// response quartile. Per snapshot, observation i is forecast
// 1 - Phi(sqrt(lambda) * (threshold - x_i . beta_{s_i})) against the outcome
// y_i > threshold; per_sample_scores holds one score per retained snapshot.
struct BrierResult {
    double threshold = 0.0;
    std::vector<double> per_sample_scores;
    double mean = 0.0;
};

BrierResult brier_statistic(const Trace& trace, const Dataset& data, Quartile q);

// Classic potential scale reduction factor over m >= 2 equal-length chains:
// R = sqrt(((L - 1) / L * W + B / L) / W). Exact-copy chains give
// sqrt((L - 1) / L); zero within-chain variance with spread between chains
// gives +inf; all-constant identical chains are undefined and throw
// std::domain_error.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

} // namespace rpms
