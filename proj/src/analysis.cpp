#include "assortgen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

#include <Eigen/Dense>

#include "assortgen/error.hpp"

namespace assortgen {

ScalingFit fit_scaling(std::span<const ScalingPoint> data) {
  std::set<std::pair<double, double>> combos;
  for (const auto& p : data) {
    if (!(p.t >= 1.0) || !(p.n > 0.0)) throw Error(ErrorKind::InvalidArgument, "scaling fit needs T >= 1 and N > 0");
    combos.emplace(std::abs(p.rho), p.n);
  }
  if (combos.size() < 3) throw Error(ErrorKind::InvalidArgument, "scaling fit needs 3 distinct (|rho|, N) points");

  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = data[static_cast<std::size_t>(i)];
    x(i, 0) = std::abs(p.rho);
    x(i, 1) = std::log10(p.n);
    x(i, 2) = 1.0;
    y(i) = std::log10(p.t);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 3) throw Error(ErrorKind::Degenerate, "rank-deficient scaling design");
  const Eigen::Vector3d coef = qr.solve(y);
  const Eigen::VectorXd resid = y - x * coef;
  const double rss = resid.squaredNorm();
  const double mean = y.mean();
  const double tss = (y.array() - mean).square().sum();

  ScalingFit fit;
  fit.alpha = coef(0);
  fit.beta = coef(1);
  fit.intercept = coef(2);
  fit.num_points = data.size();
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : (rss == 0.0 ? 1.0 : 0.0);
  if (n > 3) {
    const double sigma2 = rss / static_cast<double>(n - 3);
    const Eigen::Matrix3d cov = sigma2 * (x.transpose() * x).inverse();
    fit.alpha_se = std::sqrt(std::max(0.0, cov(0, 0)));
    fit.beta_se = std::sqrt(std::max(0.0, cov(1, 1)));
    fit.intercept_se = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return fit;
}

double significance_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 5 || b.size() < 5) throw Error(ErrorKind::InvalidArgument, "Mann-Whitney needs >= 5 values per sample");
  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;
  std::vector<std::pair<double, int>> all;
  all.reserve(n);
  for (double v : a) all.emplace_back(v, 0);
  for (double v : b) all.emplace_back(v, 1);
  std::sort(all.begin(), all.end());

  double rank_sum_a = 0.0;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second == 0) rank_sum_a += avg_rank;
    }
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(n);
  const double u = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  const double mu = dn1 * dn2 / 2.0;
  const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  const double p = std::erfc(z / std::sqrt(2.0));
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

}  // namespace assortgen
