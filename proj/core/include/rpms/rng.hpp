#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rpms {

// Deterministic random source for the samplers. All transforms are built by
// hand on top of a mersenne-twister word stream so that draws are
// bit-reproducible across platforms and standard libraries (the
// std::*_distribution classes are implementation-defined and cannot give
// byte-identical traces).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1); never returns an endpoint, so
    // log(uniform()) and log1p(-uniform()) are always finite.
    double uniform() {
        return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1p-52;
    }

    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Gamma(shape, rate), mean shape/rate. Marsaglia-Tsang squeeze for
    // shape >= 1, boosted from shape+1 by u^(1/shape) otherwise.
    double gamma(double shape, double rate);

    double beta(double a, double b);

    bool bernoulli(double p) { return uniform() < p; }

    // Index draw proportional to exp(log_weights - max); the max subtraction
    // keeps every entry representable. Throws std::invalid_argument on an
    // empty span and std::domain_error if every weight is -inf.
    std::size_t categorical_log(std::span<const double> log_weights);

    // Index draw proportional to nonnegative weights.
    std::size_t categorical(std::span<const double> weights);

private:
    std::mt19937_64 engine_;
    std::vector<double> scratch_;
    double spare_normal_ = 0.0;
    bool has_spare_normal_ = false;
};

} // namespace rpms
