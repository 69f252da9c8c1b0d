#include "rpms/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rpms {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double normal_upper_tail(double z) {
    // 1 - Phi(z)
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

} // namespace

std::string to_string(Quartile q) {
    switch (q) {
        case Quartile::q1: return "q1";
        case Quartile::q2: return "q2";
        case Quartile::q3: return "q3";
    }
    throw std::invalid_argument("to_string: bad quartile");
}

Quartile quartile_from_string(const std::string& text) {
    if (text == "q1" || text == "Q1") return Quartile::q1;
    if (text == "q2" || text == "Q2") return Quartile::q2;
    if (text == "q3" || text == "Q3") return Quartile::q3;
    throw std::invalid_argument("unknown quartile '" + text + "' (expected q1, q2 or q3)");
}

double empirical_quantile(std::vector<double> values, double p) {
    require(!values.empty(), "empirical_quantile: empty sample");
    require(p >= 0.0 && p <= 1.0, "empirical_quantile: p must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double brier_score(std::span<const double> forecasts,
                   std::span<const std::uint8_t> outcomes) {
    require(forecasts.size() == outcomes.size() && !forecasts.empty(),
            "brier_score: need equal-length nonempty inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double d = forecasts[i] - static_cast<double>(outcomes[i]);
        total += d * d;
    }
    return total / static_cast<double>(forecasts.size());
}

BrierResult brier_statistic(const Trace& trace, const Dataset& data, Quartile q) {
    require(!trace.samples.empty(), "brier_statistic: empty trace");
    require(trace.n == data.n() && trace.n_covariates == data.n_covariates,
            "brier_statistic: trace and dataset dimensions disagree");
    BrierResult out;
    out.threshold = empirical_quantile(data.y, static_cast<int>(q) / 4.0);
    const std::size_t n = data.n();
    const std::size_t d_count = data.n_covariates;
    std::vector<std::uint8_t> outcome(n);
    for (std::size_t i = 0; i < n; ++i)
        outcome[i] = data.y[i] > out.threshold ? 1 : 0;
    out.per_sample_scores.reserve(trace.samples.size());
    std::vector<double> forecast(n);
    for (const ChainState& snap : trace.samples) {
        const double root_lambda = std::sqrt(snap.lambda);
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double>& beta =
                snap.clusters[static_cast<std::size_t>(snap.labels[i])].beta;
            const std::uint8_t* xi = data.x.data() + i * d_count;
            double mean = 0.0;
            for (std::size_t d = 0; d < d_count; ++d)
                if (xi[d]) mean += beta[d];
            forecast[i] = normal_upper_tail(root_lambda * (out.threshold - mean));
        }
        out.per_sample_scores.push_back(brier_score(forecast, outcome));
    }
    double total = 0.0;
    for (double s : out.per_sample_scores) total += s;
    out.mean = total / static_cast<double>(out.per_sample_scores.size());
    return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    require(chains.size() >= 2, "gelman_rubin: at least two chains required");
    const std::size_t m = chains.size();
    const std::size_t len = chains[0].size();
    require(len >= 2, "gelman_rubin: chains must have at least two draws");
    for (const std::vector<double>& c : chains)
        require(c.size() == len, "gelman_rubin: chains must have equal length");

    std::vector<double> means(m);
    double grand = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (double v : chains[j]) s += v;
        means[j] = s / static_cast<double>(len);
        grand += means[j];
    }
    grand /= static_cast<double>(m);

    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between *= static_cast<double>(len) / static_cast<double>(m - 1);

    double within = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double ss = 0.0;
        for (double v : chains[j]) ss += (v - means[j]) * (v - means[j]);
        within += ss / static_cast<double>(len - 1);
    }
    within /= static_cast<double>(m);

    if (within == 0.0) {
        if (between == 0.0)
            throw std::domain_error(
                "gelman_rubin: all chains constant and identical; the statistic is undefined");
        return std::numeric_limits<double>::infinity();
    }
    const double l = static_cast<double>(len);
    const double pooled = (l - 1.0) / l * within + between / l;
    return std::sqrt(pooled / within);
}

} // namespace rpms
