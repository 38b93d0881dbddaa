#pragma once

#include <cstdint>
#include <vector>

#include "fedrep/core.hpp"

namespace fedrep {

struct ConSparParams {
  std::uint32_t d = 0;
  std::uint32_t k_total = 0;  // K
  std::uint32_t m = 1;
  double alpha = 0.0;

  std::uint32_t k_per_client() const { return k_total / m; }
  void validate() const;
};

// Indices of the k largest |v_j|; ties broken by lowest index.
CoordinateSet top_coords(const DenseVector& v, std::uint32_t k);

// Coordinate obfuscation: draw r ~ Binomial(K/m, alpha), keep K/m - r
// uniformly chosen elements of `top`, then add r uniformly chosen
// elements of [d] \ kept. Output size is always exactly K/m.
CoordinateSet propose_coords(const CoordinateSet& top, const ConSparParams& p,
                             RngStream& rng);

// Sorted union of all proposals.
CoordinateSet union_coords(const std::vector<CoordinateSet>& proposals);

// Values of v restricted to I, in ascending index order.
SparseUpdate extract(const DenseVector& v, const CoordinateSet& coords);

// epsilon-DP bound of the coordinate mechanism: the base bound holds for
// all alpha in (0, 1]; a refined bound applies for alpha >= 1/2 and the
// minimum of the applicable bounds is returned. alpha = 0 has no finite
// epsilon and is an error.
double dp_epsilon(const ConSparParams& p);

// Contraction constant of consensus sparsification under a Byzantine
// fraction delta in [0, 1/2). Result lies in (0, d].
double contraction_constant(const ConSparParams& p, double delta);

// Per-coordinate membership probabilities of a sparsifier's support sets
// N_k and N_k' for a fixed pair of clients.
struct MembershipProbs {
  double both = 0.0;         // Pr[j in N_k and N_k']
  double only_first = 0.0;   // Pr[j in N_k \ N_k']
  double only_second = 0.0;  // Pr[j in N_k' \ N_k]
};

// Expected squared distance between the sparsified pair, evaluated for
// realized vectors: sum_j (vk_j - vk2_j)^2 * both_j
//                 + sum_j vk_j^2 * only_first_j
//                 + sum_j vk2_j^2 * only_second_j.
// Test oracle against Monte Carlo sparsification; probabilities outside
// [0, 1] are an error.
double dissimilarity_oracle(const DenseVector& vk, const DenseVector& vk2,
                            const std::vector<MembershipProbs>& probs);

// Exact output distribution of the coordinate mechanism for one input
// top-set, by exhaustive enumeration of (r, kept-subset, filler-subset).
// Feasible for small d and K/m; drives the DP verification command.
struct SetProbability {
  std::vector<std::uint32_t> coords;  // sorted output set
  double prob = 0.0;
};
std::vector<SetProbability> enumerate_mechanism(std::uint32_t d,
                                                std::uint32_t k, double alpha,
                                                const CoordinateSet& top);

// Worst-case likelihood ratio over all adjacent top-set pairs and all
// outputs with nonzero denominator, by exhaustive enumeration.
struct DpAudit {
  double max_ratio = 0.0;
  double epsilon_bound = 0.0;  // dp_epsilon for the same parameters
};
DpAudit audit_dp(std::uint32_t d, std::uint32_t k, double alpha);

}  // namespace fedrep
