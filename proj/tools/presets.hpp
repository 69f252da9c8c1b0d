#pragma once

#include <cstdint>

#include "rpms/data_io.hpp"

namespace rpms::presets {

// Three well-separated clusters over eight binary covariates. Every cluster
// has exactly four nonzero coefficients and four exact zeros; coordinates 6
// and 7 are zero in every cluster, so a faithful fit should both recover the
// partition and exclude those two coordinates globally.
inline GeneratorSpec recovery_spec(std::uint64_t seed = 424242,
                                   std::size_t n = 300) {
    GeneratorSpec spec;
    spec.n = n;
    spec.n_covariates = 8;
    spec.k_true = 3;
    spec.cluster_weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    spec.zeta_true = {0.9, 0.8, 0.8, 0.7, 0.1, 0.2, 0.3, 0.2,
                      0.1, 0.2, 0.8, 0.7, 0.9, 0.8, 0.3, 0.2,
                      0.9, 0.8, 0.1, 0.2, 0.7, 0.8, 0.3, 0.2};
    spec.beta_true = {2.0, -1.5, 1.8,  2.2,  0.0,  0.0, 0.0, 0.0,
                      0.0,  0.0, -2.0, 1.6,  2.4, -1.8, 0.0, 0.0,
                      1.7,  2.1, 0.0,  0.0, -2.2,  2.0, 0.0, 0.0};
    spec.lambda_true = 4.0;
    spec.seed = seed;
    return spec;
}

// Two clusters that differ strongly in covariate prevalence but produce the
// same marginal response scale. A model that clusters on the joint
// (response, covariate) law separates them; one that clusters on the
// response alone tends to merge them.
inline GeneratorSpec contrast_spec(std::uint64_t seed = 515151,
                                   std::size_t n = 200) {
    GeneratorSpec spec;
    spec.n = n;
    spec.n_covariates = 6;
    spec.k_true = 2;
    spec.cluster_weights = {0.5, 0.5};
    spec.zeta_true = {0.8, 0.8, 0.8, 0.2, 0.2, 0.2,
                      0.2, 0.2, 0.2, 0.8, 0.8, 0.8};
    spec.beta_true = {0.7, 0.7, 0.0, 0.0, 0.0, 0.0,
                      0.0, 0.0, 0.0, 0.7, 0.7, 0.0};
    spec.lambda_true = 1.0;
    spec.seed = seed;
    return spec;
}

} // namespace rpms::presets
