#pragma once

#include "spinorforge/sampling.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spinorforge {

// One property over seeded samples. Residual checks compare max_residual with tol;
// counting checks report the number of offending samples against tol = 0.
struct CheckResult {
    std::string name;
    bool pass = false;
    double max_residual = 0.0;
    double tol = 0.0;
    int samples = 0;
    std::string detail;
};

// tol replaces the pinned tolerance of every residual check. Counting checks ignore it.
struct CheckOptions {
    int samples = 0;
    std::optional<double> tol;
};

using Checks = std::vector<CheckResult>;

// algebra
Checks check_clifford_relation(Sampler& rng, const CheckOptions& opt);
Checks check_signatures(const CheckOptions& opt);
Checks check_block_det_inverse(Sampler& rng, const CheckOptions& opt);
Checks check_eps_transpose(Sampler& rng, const CheckOptions& opt);

// clifford group
Checks check_vector_products(Sampler& rng, const CheckOptions& opt);
Checks check_double_cover(Sampler& rng, const CheckOptions& opt);
Checks check_hermitian_factorization(Sampler& rng, const CheckOptions& opt);

// momentum
Checks check_momentum_fibration(Sampler& rng, const CheckOptions& opt);

// field theory
Checks check_flat_vacuum(const CheckOptions& opt);
Checks check_plane_wave(Sampler& rng, const CheckOptions& opt);

// Oracle against the analytic Euler-Lagrange components on two grids over the same
// domain, 8^4 at spacing h and 12^4 at h / 1.5, at samples sites (at most 16) drawn from
// the coarse indices {2, 4}^4. Per field group: error <= max(floor, C h^2) on both grids
// and, when the coarse error is above the floor, observed order in [kOrderLow, kOrderHigh].
// Here opt.tol replaces C; run_suite never forwards a tol override to this check.
inline constexpr double kOracleErrorConstant = 1.0;
inline constexpr double kOracleErrorFloor = 1e-6;
inline constexpr double kOrderLow = 1.7;
inline constexpr double kOrderHigh = 2.3;
Checks check_oracle_convergence(Sampler& rng, const CheckOptions& opt, double h = 0.1);

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    int samples = 0;
    Checks checks;
    bool pass() const;
};

// algebra, clifford, momentum, field
const std::vector<std::string>& suite_names();
// Throws std::invalid_argument on an unknown suite; "all" runs every suite on one generator.
SuiteReport run_suite(const std::string& suite, std::uint64_t seed, int samples, std::optional<double> tol = {});

}  // namespace spinorforge
