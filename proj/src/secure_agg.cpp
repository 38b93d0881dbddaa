#include "fedrep/secure_agg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fedrep {

FieldVector::FieldVector(std::vector<std::uint64_t> e, std::uint64_t m)
    : elems(std::move(e)), modulus(m) {
  if (modulus < 2) throw std::invalid_argument("FieldVector: modulus < 2");
  for (std::uint64_t x : elems) {
    if (x >= modulus) {
      throw std::invalid_argument("FieldVector: element out of field");
    }
  }
}

FieldVector add_mod(const FieldVector& a, const FieldVector& b) {
  if (a.modulus != b.modulus) {
    throw std::invalid_argument("add_mod: mixed moduli");
  }
  if (a.elems.size() != b.elems.size()) {
    throw std::invalid_argument("add_mod: length mismatch");
  }
  FieldVector out;
  out.modulus = a.modulus;
  out.elems.resize(a.elems.size());
  for (std::size_t i = 0; i < a.elems.size(); ++i) {
    // elements < M <= 2^62, so the sum cannot overflow u64
    std::uint64_t s = a.elems[i] + b.elems[i];
    if (s >= a.modulus) s -= a.modulus;
    out.elems[i] = s;
  }
  return out;
}

namespace {

std::uint64_t encode_steps(std::int64_t steps, std::uint64_t modulus) {
  if (steps >= 0) {
    return static_cast<std::uint64_t>(steps) % modulus;
  }
  const std::uint64_t mag = static_cast<std::uint64_t>(-steps) % modulus;
  return mag == 0 ? 0 : modulus - mag;
}

}  // namespace

FieldVector quantize(const std::vector<double>& values, const QuantSpec& q,
                     RngStream& rng) {
  q.validate();
  FieldVector out;
  out.modulus = q.modulus;
  out.elems.reserve(values.size());
  for (double x : values) {
    const double clipped = std::clamp(x, -q.clip_bound, q.clip_bound);
    const double y = clipped / q.scale;
    const double lo = std::floor(y);
    const double frac = y - lo;
    auto steps = static_cast<std::int64_t>(lo);
    if (frac > 0.0 && rng.next_double() < frac) ++steps;
    out.elems.push_back(encode_steps(steps, q.modulus));
  }
  return out;
}

std::int64_t centered_lift(std::uint64_t e, std::uint64_t modulus) {
  if (e >= modulus) throw std::invalid_argument("centered_lift: out of field");
  if (e < modulus - e) {  // e < M/2
    return static_cast<std::int64_t>(e);
  }
  return -static_cast<std::int64_t>(modulus - e);
}

double dequantize_value(std::uint64_t e, const QuantSpec& q) {
  return static_cast<double>(centered_lift(e, q.modulus)) * q.scale;
}

FieldVector pairwise_masks(const std::vector<std::uint32_t>& buffer_members,
                           std::uint32_t my_id, std::size_t length,
                           std::uint64_t round, std::uint64_t master_seed,
                           const QuantSpec& q) {
  if (std::find(buffer_members.begin(), buffer_members.end(), my_id) ==
      buffer_members.end()) {
    throw std::invalid_argument("pairwise_masks: id not in buffer");
  }
  const std::uint64_t modulus = q.modulus;
  FieldVector mask;
  mask.modulus = modulus;
  mask.elems.assign(length, 0);
  for (std::uint32_t other : buffer_members) {
    if (other == my_id) continue;
    const std::uint32_t lo = std::min(my_id, other);
    const std::uint32_t hi = std::max(my_id, other);
    RngStream prg = derive_stream(
        master_seed, round,
        "mask:" + std::to_string(lo) + ":" + std::to_string(hi));
    const bool add = my_id == lo;  // lower id adds, higher id subtracts
    for (std::size_t i = 0; i < length; ++i) {
      const std::uint64_t r = prg.uniform_below(modulus);
      if (add) {
        std::uint64_t s = mask.elems[i] + r;
        if (s >= modulus) s -= modulus;
        mask.elems[i] = s;
      } else {
        mask.elems[i] = mask.elems[i] >= r ? mask.elems[i] - r
                                           : mask.elems[i] + (modulus - r);
      }
    }
  }
  return mask;
}

FieldVector masked_sum(const std::vector<FieldVector>& masked) {
  if (masked.empty()) throw std::invalid_argument("masked_sum: empty input");
  FieldVector acc = masked.front();
  for (std::size_t i = 1; i < masked.size(); ++i) {
    acc = add_mod(acc, masked[i]);
  }
  return acc;
}

std::vector<double> dequantize_mean(const FieldVector& sum, std::uint32_t s,
                                    const QuantSpec& q) {
  if (s < 1) throw std::invalid_argument("dequantize_mean: s must be >= 1");
  const auto headroom =
      static_cast<std::int64_t>(q.value_steps()) * static_cast<std::int64_t>(s);
  std::vector<double> out;
  out.reserve(sum.elems.size());
  for (std::uint64_t e : sum.elems) {
    const std::int64_t lifted = centered_lift(e, sum.modulus);
    if (lifted > headroom || lifted < -headroom) {
      throw std::runtime_error(
          "dequantize_mean: decoded magnitude exceeds headroom (field "
          "wraparound)");
    }
    out.push_back(static_cast<double>(lifted) * q.scale /
                  static_cast<double>(s));
  }
  return out;
}

}  // namespace fedrep
