#pragma once

#include <span>
#include <vector>

namespace assortgen {

struct ScalingPoint {
  double rho{0.0};
  double n{0.0};
  double t{0.0};
};

/// log10 T = alpha |rho| + beta log10 N + c.
struct ScalingFit {
  double alpha{0.0};
  double beta{0.0};
  double intercept{0.0};
  double alpha_se{0.0};
  double beta_se{0.0};
  double intercept_se{0.0};
  double r_squared{0.0};
  std::size_t num_points{0};
};

/// Ordinary least squares. Throws InvalidArgument (fewer than 3 distinct
/// (|rho|, N) combinations or T < 1) or Degenerate (rank-deficient design).
ScalingFit fit_scaling(std::span<const ScalingPoint> data);

/// Two-sided Mann-Whitney U test, normal approximation with tie correction
/// and continuity correction. Throws InvalidArgument if either sample has
/// fewer than 5 values.
double significance_test(std::span<const double> a, std::span<const double> b);

}  // namespace assortgen
