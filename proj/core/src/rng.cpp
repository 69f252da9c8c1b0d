#include "rpms/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rpms {

double Rng::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    // Marsaglia polar method; the rejected pairs keep the draw exact.
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * f;
    has_spare_normal_ = true;
    return u * f;
}

double Rng::gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double Rng::beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("Rng::beta: both shapes must be positive");
    if (a == 1.0 && b == 1.0) return uniform();
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
}

std::size_t Rng::categorical_log(std::span<const double> log_weights) {
    if (log_weights.empty())
        throw std::invalid_argument("Rng::categorical_log: empty weight vector");
    double m = log_weights[0];
    for (double w : log_weights)
        if (w > m) m = w;
    if (!(m > -std::numeric_limits<double>::infinity()))
        throw std::domain_error("Rng::categorical_log: all weights are -inf");
    scratch_.resize(log_weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < log_weights.size(); ++i)
        total += scratch_[i] = std::exp(log_weights[i] - m);
    const double u = uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < scratch_.size(); ++i) {
        cum += scratch_[i];
        if (u <= cum) return i;
    }
    return scratch_.size() - 1;
}

std::size_t Rng::categorical(std::span<const double> weights) {
    if (weights.empty())
        throw std::invalid_argument("Rng::categorical: empty weight vector");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0))
            throw std::invalid_argument("Rng::categorical: weights must be nonnegative");
        total += w;
    }
    if (!(total > 0.0))
        throw std::domain_error("Rng::categorical: all weights are zero");
    const double u = uniform() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        cum += weights[i];
        if (u <= cum) return i;
    }
    return weights.size() - 1;
}

} // namespace rpms
