#pragma once

#include <cstdint>
#include <vector>

#include "fedrep/config.hpp"
#include "fedrep/core.hpp"

namespace fedrep {

// Vector over the integers mod `modulus`; all arithmetic is exact.
struct FieldVector {
  std::vector<std::uint64_t> elems;
  std::uint64_t modulus = 0;

  FieldVector() = default;
  FieldVector(std::vector<std::uint64_t> e, std::uint64_t m);
};

FieldVector add_mod(const FieldVector& a, const FieldVector& b);

// Clip to [-clip_bound, clip_bound], map to units of `scale`,
// stochastically round (round up with probability equal to the
// fractional part), and encode mod M. Unbiased: E[decode(quantize(x))]
// equals clip(x) exactly.
FieldVector quantize(const std::vector<double>& values, const QuantSpec& q,
                     RngStream& rng);

// Centered lift of a single field element to a signed step count.
std::int64_t centered_lift(std::uint64_t e, std::uint64_t modulus);

// Exact decode of a single quantized value (no summation).
double dequantize_value(std::uint64_t e, const QuantSpec& q);

// Pairwise-canceling mask for one buffer member:
//   mask_i = sum_{j > i} PRG(i, j) - sum_{j < i} PRG(j, i)   (mod M)
// where PRG(i, j) is the stream derived from (master_seed, round,
// pair(i, j)). Masks of a full buffer sum to zero element-wise.
FieldVector pairwise_masks(const std::vector<std::uint32_t>& buffer_members,
                           std::uint32_t my_id, std::size_t length,
                           std::uint64_t round, std::uint64_t master_seed,
                           const QuantSpec& q);

// Element-wise modular sum of masked submissions. With a complete mask
// set this equals the sum of the unmasked quantized values bit-exactly.
FieldVector masked_sum(const std::vector<FieldVector>& masked);

// Decode the field sum of s quantized values and divide by s in the
// reals. A decoded magnitude beyond the s-value headroom indicates field
// wraparound and is an integrity error.
std::vector<double> dequantize_mean(const FieldVector& sum, std::uint32_t s,
                                    const QuantSpec& q);

}  // namespace fedrep
