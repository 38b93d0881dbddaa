#include "fedrep/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fedrep {

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("inv_normal_cdf: p must be in (0, 1)");
  }
  // Acklam coefficients
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // one Halley step against Phi(x) - p
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

std::vector<double> bit_flip(const std::vector<double>& g_honest_self) {
  std::vector<double> out(g_honest_self.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -g_honest_self[i];
  return out;
}

double alie_default_z(std::uint32_t n, std::uint32_t f) {
  if (2 * f >= n) throw std::invalid_argument("alie: f must be < n/2");
  const auto supporters = n / 2 + 1 - f;  // floor(n/2 + 1) - f
  return inv_normal_cdf(1.0 - static_cast<double>(supporters) /
                                  static_cast<double>(n - f));
}

std::vector<double> alie(const std::vector<std::vector<double>>& honest_updates,
                         std::uint32_t n, std::uint32_t f,
                         std::optional<double> z_override) {
  if (honest_updates.empty()) {
    throw std::invalid_argument("alie: no honest updates");
  }
  const double z = z_override ? *z_override : alie_default_z(n, f);
  const std::size_t dim = honest_updates.front().size();
  const auto cnt = static_cast<double>(honest_updates.size());
  std::vector<double> mean(dim, 0.0);
  for (const auto& v : honest_updates) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += v[j];
  }
  for (double& x : mean) x /= cnt;
  std::vector<double> out(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    double var = 0.0;
    for (const auto& v : honest_updates) {
      const double dv = v[j] - mean[j];
      var += dv * dv;
    }
    out[j] = mean[j] + z * std::sqrt(var / cnt);
  }
  return out;
}

std::vector<double> foe(const std::vector<std::vector<double>>& honest_updates,
                        double eps) {
  if (honest_updates.empty()) {
    throw std::invalid_argument("foe: no honest updates");
  }
  const std::size_t dim = honest_updates.front().size();
  std::vector<double> out(dim, 0.0);
  for (const auto& v : honest_updates) {
    for (std::size_t j = 0; j < dim; ++j) out[j] += v[j];
  }
  for (double& x : out) {
    x *= -eps / static_cast<double>(honest_updates.size());
  }
  return out;
}

CoordinateSet attack_coords(CoordAttack kind, const DenseVector& g_self,
                            const ConSparParams& p,
                            const std::vector<CoordinateSet>& honest_proposals,
                            std::uint32_t same_target_honest_index,
                            RngStream& rng) {
  const std::uint32_t k = p.k_per_client();
  switch (kind) {
    case CoordAttack::kMin: {
      // k smallest |.|, ties by lowest index
      std::vector<std::uint32_t> order(g_self.dim());
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + k, order.end(),
                        [&g_self](std::uint32_t a, std::uint32_t b) {
                          const double fa = std::fabs(g_self[a]);
                          const double fb = std::fabs(g_self[b]);
                          if (fa != fb) return fa < fb;
                          return a < b;
                        });
      order.resize(k);
      return CoordinateSet::from_unsorted(std::move(order));
    }
    case CoordAttack::kRand:
      return CoordinateSet::from_unsorted(
          rng.sample_without_replacement(p.d, k));
    case CoordAttack::kSame:
      if (same_target_honest_index >= honest_proposals.size()) {
        throw std::invalid_argument("attack_coords: invalid sameAtk target");
      }
      return honest_proposals[same_target_honest_index];
    case CoordAttack::kNone:
      break;
  }
  throw std::invalid_argument("attack_coords: invalid kind");
}

}  // namespace fedrep
