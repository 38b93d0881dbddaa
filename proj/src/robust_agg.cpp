#include "fedrep/robust_agg.hpp"

#include <algorithm>
#include <cmath>

namespace fedrep {

namespace {

void require_rectangular(const std::vector<ValueArray>& vs,
                         const char* what) {
  if (vs.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty input");
  }
  for (const auto& v : vs) {
    if (v.size() != vs.front().size()) {
      throw std::invalid_argument(std::string(what) + ": ragged input");
    }
  }
}

double distance(const ValueArray& a, const ValueArray& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

ValueArray mean_values(const std::vector<ValueArray>& vs) {
  require_rectangular(vs, "mean");
  ValueArray out(vs.front().size(), 0.0);
  for (const auto& v : vs) {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[j];
  }
  for (double& x : out) x /= static_cast<double>(vs.size());
  return out;
}

ValueArray coordinate_median(const std::vector<ValueArray>& vs) {
  require_rectangular(vs, "coordinate_median");
  const std::size_t n = vs.size();
  ValueArray out(vs.front().size());
  std::vector<double> col(n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = vs[i][j];
    std::sort(col.begin(), col.end());
    out[j] = (n % 2 == 1) ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
  }
  return out;
}

ValueArray geomed(const std::vector<ValueArray>& vs, int iters) {
  require_rectangular(vs, "geomed");
  if (iters < 1) throw std::invalid_argument("geomed: iters must be >= 1");
  constexpr double kSingularGuard = 1e-12;

  ValueArray x = mean_values(vs);
  ValueArray next(x.size());
  for (int it = 0; it < iters; ++it) {
    double weight_sum = 0.0;
    std::fill(next.begin(), next.end(), 0.0);
    for (const auto& v : vs) {
      double dist = distance(x, v);
      if (dist < kSingularGuard) dist += kSingularGuard;
      const double w = 1.0 / dist;
      weight_sum += w;
      for (std::size_t j = 0; j < next.size(); ++j) next[j] += w * v[j];
    }
    for (std::size_t j = 0; j < next.size(); ++j) next[j] /= weight_sum;
    x = next;
  }
  return x;
}

ValueArray tmean(const std::vector<ValueArray>& vs, double fraction) {
  require_rectangular(vs, "tmean");
  if (fraction < 0.0 || fraction >= 0.5) {
    throw std::invalid_argument("tmean: fraction must be in [0, 1/2)");
  }
  const std::size_t n = vs.size();
  const auto trim = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n)));
  if (2 * trim >= n) throw std::invalid_argument("tmean: over-trimming");
  if (trim == 0) return mean_values(vs);  // bit-exact mean at fraction 0

  ValueArray out(vs.front().size());
  std::vector<double> col(n);
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = vs[i][j];
    std::sort(col.begin(), col.end());
    double s = 0.0;
    for (std::size_t i = trim; i < n - trim; ++i) s += col[i];
    out[j] = s / static_cast<double>(n - 2 * trim);
  }
  return out;
}

ValueArray cclip(const std::vector<ValueArray>& vs, double radius, int iters,
                 const ValueArray& init) {
  require_rectangular(vs, "cclip");
  if (radius <= 0.0) throw std::invalid_argument("cclip: radius must be > 0");
  if (iters < 1) throw std::invalid_argument("cclip: iters must be >= 1");
  if (init.size() != vs.front().size()) {
    throw std::invalid_argument("cclip: init dimension mismatch");
  }

  ValueArray v = init;
  for (int it = 0; it < iters; ++it) {
    ValueArray delta(v.size(), 0.0);
    for (const auto& x : vs) {
      const double dist = distance(x, v);
      const double clip = dist > radius ? radius / dist : 1.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        delta[j] += (x[j] - v[j]) * clip;
      }
    }
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] += delta[j] / static_cast<double>(vs.size());
    }
  }
  return v;
}

ValueArray cclip(const std::vector<ValueArray>& vs, double radius, int iters) {
  return cclip(vs, radius, iters, coordinate_median(vs));
}

ValueArray apply_aggregator(const AggregatorSpec& spec,
                            const std::vector<ValueArray>& vs) {
  switch (spec.kind) {
    case AggregatorKind::kMean:
      return mean_values(vs);
    case AggregatorKind::kGeoMed:
      return geomed(vs, spec.geomed_iters);
    case AggregatorKind::kTMean:
      return tmean(vs, spec.tmean_fraction);
    case AggregatorKind::kCClip:
      return cclip(vs, spec.cclip_radius, spec.cclip_iters);
  }
  throw std::invalid_argument("apply_aggregator: bad kind");
}

std::vector<std::vector<std::uint32_t>> buffer_partition(
    const std::vector<std::uint32_t>& perm, std::uint32_t s) {
  if (s == 0 || perm.size() % s != 0) {
    throw std::invalid_argument("buffer_partition: m must be a multiple of s");
  }
  const std::size_t buffers = perm.size() / s;
  std::vector<std::vector<std::uint32_t>> out(buffers);
  for (std::size_t l = 0; l < buffers; ++l) {
    out[l].assign(perm.begin() + static_cast<std::ptrdiff_t>(l * s),
                  perm.begin() + static_cast<std::ptrdiff_t>((l + 1) * s));
    // accumulate in ascending client id so summation order is canonical
    std::sort(out[l].begin(), out[l].end());
  }
  return out;
}

SparseUpdate buffered_aggregate(const std::vector<SparseUpdate>& updates,
                                std::uint32_t s, const AggregatorSpec& spec,
                                RngStream& rng) {
  if (updates.empty()) {
    throw std::invalid_argument("buffered_aggregate: no updates");
  }
  for (const auto& u : updates) {
    if (!(u.coords == updates.front().coords)) {
      throw std::invalid_argument("buffered_aggregate: mismatched coordinate sets");
    }
  }
  const auto m = static_cast<std::uint32_t>(updates.size());
  const auto perm = rng.permutation(m);
  const auto buffers = buffer_partition(perm, s);

  std::vector<ValueArray> buffer_means;
  buffer_means.reserve(buffers.size());
  for (const auto& members : buffers) {
    ValueArray acc(updates.front().values.size(), 0.0);
    for (std::uint32_t id : members) {
      for (std::size_t j = 0; j < acc.size(); ++j) {
        acc[j] += updates[id].values[j];
      }
    }
    for (double& x : acc) x /= static_cast<double>(s);
    buffer_means.push_back(std::move(acc));
  }
  return SparseUpdate(updates.front().coords,
                      apply_aggregator(spec, buffer_means));
}

double certify_robustness(const AggregatorSpec& agg, double delta, int trials,
                          RngStream& rng, const CertifyParams& params) {
  if (delta < 0.0 || delta >= 0.5) {
    throw std::invalid_argument("certify_robustness: delta must be in [0, 1/2)");
  }
  if (trials < 1) {
    throw std::invalid_argument("certify_robustness: trials must be >= 1");
  }
  const std::uint32_t m = params.m;
  const std::uint32_t dim = params.dim;
  const auto byz =
      static_cast<std::uint32_t>(std::floor(delta * static_cast<double>(m)));
  const double rho_sq = 2.0 * params.sigma * params.sigma * dim;

  // scripted adversaries: id 0..shift_magnitudes-1 are offset attacks,
  // then negated mean, inflated deviation, and zero submissions
  const std::size_t n_scripts = byz == 0 ? 1 : params.shift_magnitudes.size() + 3;
  std::vector<double> err_acc(n_scripts, 0.0);

  std::vector<ValueArray> values(m, ValueArray(dim, 0.0));
  for (int t = 0; t < trials; ++t) {
    ValueArray center(dim);
    for (auto& c : center) c = 2.0 * rng.next_gaussian();
    for (std::uint32_t k = byz; k < m; ++k) {
      for (std::uint32_t j = 0; j < dim; ++j) {
        values[k][j] = center[j] + params.sigma * rng.next_gaussian();
      }
    }
    ValueArray honest_mean(dim, 0.0);
    for (std::uint32_t k = byz; k < m; ++k) {
      for (std::uint32_t j = 0; j < dim; ++j) honest_mean[j] += values[k][j];
    }
    for (double& x : honest_mean) x /= static_cast<double>(m - byz);

    ValueArray honest_sd(dim, 0.0);
    for (std::uint32_t k = byz; k < m; ++k) {
      for (std::uint32_t j = 0; j < dim; ++j) {
        const double dv = values[k][j] - honest_mean[j];
        honest_sd[j] += dv * dv;
      }
    }
    for (double& x : honest_sd) x = std::sqrt(x / static_cast<double>(m - byz));

    for (std::size_t script = 0; script < n_scripts; ++script) {
      ValueArray adversary(dim, 0.0);
      if (byz > 0) {
        if (script < params.shift_magnitudes.size()) {
          const double mag = params.shift_magnitudes[script] /
                             std::sqrt(static_cast<double>(dim));
          for (std::uint32_t j = 0; j < dim; ++j) {
            adversary[j] = honest_mean[j] + mag;
          }
        } else if (script == params.shift_magnitudes.size()) {
          for (std::uint32_t j = 0; j < dim; ++j) adversary[j] = -honest_mean[j];
        } else if (script == params.shift_magnitudes.size() + 1) {
          for (std::uint32_t j = 0; j < dim; ++j) {
            adversary[j] = honest_mean[j] + 1.5 * honest_sd[j];
          }
        }
        // last script: zeros
        for (std::uint32_t k = 0; k < byz; ++k) values[k] = adversary;
      }
      const ValueArray out = apply_aggregator(agg, values);
      double err = 0.0;
      for (std::uint32_t j = 0; j < dim; ++j) {
        const double dv = out[j] - honest_mean[j];
        err += dv * dv;
      }
      err_acc[script] += err;
    }
  }

  double worst = 0.0;
  for (double e : err_acc) worst = std::max(worst, e / trials);
  if (byz == 0 || delta == 0.0) return worst;  // raw numerator
  return worst / (delta * rho_sq);
}

}  // namespace fedrep
