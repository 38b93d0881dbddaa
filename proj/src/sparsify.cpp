#include "fedrep/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_map>

namespace fedrep {

void ConSparParams::validate() const {
  if (m == 0) throw std::invalid_argument("ConSparParams: m must be > 0");
  if (k_total == 0 || k_total % m != 0) {
    throw std::invalid_argument("ConSparParams: K must be a positive multiple of m");
  }
  if (k_total / m > d) {
    throw std::invalid_argument("ConSparParams: K/m must be <= d");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("ConSparParams: alpha must be in [0, 1]");
  }
}

CoordinateSet top_coords(const DenseVector& v, std::uint32_t k) {
  const std::size_t d = v.dim();
  if (k == 0 || k > d) {
    throw std::invalid_argument("top_coords: k out of range");
  }
  std::vector<std::uint32_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  // |v_a| > |v_b| first; ties by lowest index (stable ordering)
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&v](std::uint32_t a, std::uint32_t b) {
                      const double fa = std::fabs(v[a]);
                      const double fb = std::fabs(v[b]);
                      if (fa != fb) return fa > fb;
                      return a < b;
                    });
  order.resize(k);
  return CoordinateSet::from_unsorted(std::move(order));
}

namespace {

// i-th smallest element of [0, d) \ excluded (excluded sorted ascending)
std::uint32_t complement_element(std::uint32_t i,
                                 const std::vector<std::uint32_t>& excluded) {
  std::uint32_t value = i;
  for (std::uint32_t e : excluded) {
    if (e <= value) {
      ++value;
    } else {
      break;
    }
  }
  return value;
}

// Uniform r-subset of [0, d) \ excluded via a sparse partial
// Fisher-Yates over the complement's rank space; O(r) memory.
std::vector<std::uint32_t> sample_complement(
    std::uint32_t d, const std::vector<std::uint32_t>& excluded,
    std::uint32_t r, RngStream& rng) {
  const std::uint32_t n = d - static_cast<std::uint32_t>(excluded.size());
  if (r > n) throw std::invalid_argument("sample_complement: r too large");
  std::unordered_map<std::uint32_t, std::uint32_t> moved;
  const auto at = [&moved](std::uint32_t pos) {
    auto it = moved.find(pos);
    return it == moved.end() ? pos : it->second;
  };
  std::vector<std::uint32_t> picked;
  picked.reserve(r);
  for (std::uint32_t i = 0; i < r; ++i) {
    const auto j = i + static_cast<std::uint32_t>(rng.uniform_below(n - i));
    const std::uint32_t vi = at(i);
    const std::uint32_t vj = at(j);
    moved[j] = vi;
    picked.push_back(complement_element(vj, excluded));
  }
  return picked;
}

}  // namespace

CoordinateSet propose_coords(const CoordinateSet& top, const ConSparParams& p,
                             RngStream& rng) {
  p.validate();
  const std::uint32_t k = p.k_per_client();
  if (top.size() != k) {
    throw std::invalid_argument("propose_coords: |top| must equal K/m");
  }
  // r ~ Binomial(K/m, alpha) as K/m Bernoulli draws
  std::uint32_t r = 0;
  for (std::uint32_t i = 0; i < k; ++i) {
    if (rng.next_double() < p.alpha) ++r;
  }
  // keep K/m - r uniformly chosen elements of top
  const auto kept_pos = rng.sample_without_replacement(k, k - r);
  std::vector<std::uint32_t> kept;
  kept.reserve(k);
  for (std::uint32_t pos : kept_pos) kept.push_back(top[pos]);
  std::sort(kept.begin(), kept.end());
  // fill with r uniformly chosen elements of [d] \ kept
  auto filler = sample_complement(p.d, kept, r, rng);
  kept.insert(kept.end(), filler.begin(), filler.end());
  return CoordinateSet::from_unsorted(std::move(kept));
}

CoordinateSet union_coords(const std::vector<CoordinateSet>& proposals) {
  if (proposals.empty()) {
    throw std::invalid_argument("union_coords: no proposals");
  }
  std::vector<std::uint32_t> all;
  for (const auto& p : proposals) {
    all.insert(all.end(), p.indices().begin(), p.indices().end());
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return CoordinateSet::from_sorted(std::move(all));
}

SparseUpdate extract(const DenseVector& v, const CoordinateSet& coords) {
  if (!coords.empty() && coords.max_index() >= v.dim()) {
    throw std::invalid_argument("extract: coordinate out of range");
  }
  std::vector<double> values;
  values.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    values.push_back(v[coords[i]]);
  }
  return SparseUpdate(coords, std::move(values));
}

double dp_epsilon(const ConSparParams& p) {
  p.validate();
  if (p.alpha == 0.0) {
    throw std::invalid_argument(
        "dp_epsilon: alpha = 0 provides no finite privacy bound");
  }
  const double k = static_cast<double>(p.k_per_client());
  const double d = static_cast<double>(p.d);
  const double a = p.alpha;
  const double eps_base = std::log((1.0 + a) * k * (d - k + 1.0) / (2.0 * a));
  if (a >= 0.5) {
    const double eps_refined =
        std::log(1.0 + ((1.0 - a) / a) * (std::exp2(k) + 1.0) * std::pow(d, k));
    return std::min(eps_base, eps_refined);
  }
  return eps_base;
}

double contraction_constant(const ConSparParams& p, double delta) {
  p.validate();
  if (delta < 0.0 || delta >= 0.5) {
    throw std::invalid_argument("contraction_constant: delta must be in [0, 1/2)");
  }
  const double d = static_cast<double>(p.d);
  const double k = static_cast<double>(p.k_per_client());
  const double m = static_cast<double>(p.m);
  const double expo = std::exp(-p.alpha * static_cast<double>(p.k_total) *
                               ((1.0 - delta) * m - 1.0) / (m * d));
  return d * (1.0 - expo) + k * expo;
}

double dissimilarity_oracle(const DenseVector& vk, const DenseVector& vk2,
                            const std::vector<MembershipProbs>& probs) {
  if (vk.dim() != vk2.dim() || probs.size() != vk.dim()) {
    throw std::invalid_argument("dissimilarity_oracle: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const auto& pr = probs[j];
    for (double q : {pr.both, pr.only_first, pr.only_second}) {
      if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument(
            "dissimilarity_oracle: probability out of [0, 1]");
      }
    }
    const double diff = vk[j] - vk2[j];
    total += diff * diff * pr.both;
    total += vk[j] * vk[j] * pr.only_first;
    total += vk2[j] * vk2[j] * pr.only_second;
  }
  return total;
}

namespace {

double binom_coeff(std::uint32_t n, std::uint32_t k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (std::uint32_t i = 0; i < k; ++i) {
    c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
  }
  return c;
}

void for_each_subset(std::uint32_t n, std::uint32_t k,
                     const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
  std::vector<std::uint32_t> pick(k);
  std::function<void(std::uint32_t, std::uint32_t)> rec =
      [&](std::uint32_t start, std::uint32_t depth) {
        if (depth == k) {
          fn(pick);
          return;
        }
        for (std::uint32_t i = start; i < n; ++i) {
          pick[depth] = i;
          rec(i + 1, depth + 1);
        }
      };
  rec(0, 0);
}

}  // namespace

std::vector<SetProbability> enumerate_mechanism(std::uint32_t d,
                                                std::uint32_t k, double alpha,
                                                const CoordinateSet& top) {
  if (top.size() != k) {
    throw std::invalid_argument("enumerate_mechanism: |top| must equal k");
  }
  if (k > d) throw std::invalid_argument("enumerate_mechanism: k > d");

  // key output sets by a rank to accumulate probabilities
  std::unordered_map<std::uint64_t, SetProbability> acc;
  const auto key_of = [d](const std::vector<std::uint32_t>& set) {
    std::uint64_t key = 0;
    for (std::uint32_t j : set) key = key * (d + 1) + (j + 1);
    return key;
  };

  for (std::uint32_t r = 0; r <= k; ++r) {
    const double pr_r = binom_coeff(k, r) * std::pow(alpha, r) *
                        std::pow(1.0 - alpha, k - r);
    if (pr_r == 0.0) continue;
    // each (k-r)-subset of top is kept with equal probability
    const double pr_kept = 1.0 / binom_coeff(k, k - r);
    for_each_subset(k, k - r, [&](const std::vector<std::uint32_t>& kept_pos) {
      std::vector<std::uint32_t> kept;
      kept.reserve(k);
      for (std::uint32_t pos : kept_pos) kept.push_back(top[pos]);
      std::sort(kept.begin(), kept.end());
      // fillers drawn uniformly from [d] \ kept
      const auto n_free = d - static_cast<std::uint32_t>(kept.size());
      const double pr_fill = 1.0 / binom_coeff(n_free, r);
      for_each_subset(n_free, r, [&](const std::vector<std::uint32_t>& fill_pos) {
        std::vector<std::uint32_t> out = kept;
        for (std::uint32_t pos : fill_pos) {
          out.push_back(complement_element(pos, kept));
        }
        std::sort(out.begin(), out.end());
        auto& slot = acc[key_of(out)];
        if (slot.coords.empty()) slot.coords = out;
        slot.prob += pr_r * pr_kept * pr_fill;
      });
    });
  }

  std::vector<SetProbability> result;
  result.reserve(acc.size());
  for (auto& [key, sp] : acc) result.push_back(std::move(sp));
  std::sort(result.begin(), result.end(),
            [](const SetProbability& a, const SetProbability& b) {
              return a.coords < b.coords;
            });
  return result;
}

DpAudit audit_dp(std::uint32_t d, std::uint32_t k, double alpha) {
  ConSparParams p;
  p.d = d;
  p.k_total = k;
  p.m = 1;
  p.alpha = alpha;

  DpAudit audit;
  audit.epsilon_bound = dp_epsilon(p);

  // distribution for every possible top-set
  std::vector<std::vector<std::uint32_t>> tops;
  for_each_subset(d, k, [&](const std::vector<std::uint32_t>& t) {
    tops.push_back(t);
  });
  std::vector<std::unordered_map<std::uint64_t, double>> dists(tops.size());
  const auto key_of = [d](const std::vector<std::uint32_t>& set) {
    std::uint64_t key = 0;
    for (std::uint32_t j : set) key = key * (d + 1) + (j + 1);
    return key;
  };
  for (std::size_t i = 0; i < tops.size(); ++i) {
    const auto dist =
        enumerate_mechanism(d, k, alpha, CoordinateSet::from_sorted(tops[i]));
    for (const auto& sp : dist) dists[i][key_of(sp.coords)] = sp.prob;
  }

  // adjacent pairs differ in exactly one element
  for (std::size_t i = 0; i < tops.size(); ++i) {
    for (std::size_t j = 0; j < tops.size(); ++j) {
      if (i == j) continue;
      std::vector<std::uint32_t> common;
      std::set_intersection(tops[i].begin(), tops[i].end(), tops[j].begin(),
                            tops[j].end(), std::back_inserter(common));
      if (common.size() != k - 1) continue;
      for (const auto& [out_key, p1] : dists[i]) {
        const auto it = dists[j].find(out_key);
        if (it == dists[j].end() || it->second <= 0.0) continue;
        audit.max_ratio = std::max(audit.max_ratio, p1 / it->second);
      }
    }
  }
  return audit;
}

}  // namespace fedrep
