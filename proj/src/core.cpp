#include "fedrep/core.hpp"

#include <algorithm>
#include <cmath>

namespace fedrep {

DenseVector::DenseVector(std::vector<double> values) : v_(std::move(values)) {
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i])) {
      throw std::invalid_argument("DenseVector: non-finite entry at index " +
                                  std::to_string(i));
    }
  }
}

DenseVector DenseVector::zeros(std::size_t d) {
  DenseVector out;
  out.v_.assign(d, 0.0);
  return out;
}

bool DenseVector::all_finite() const {
  for (double x : v_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double DenseVector::squared_norm() const {
  double s = 0.0;
  for (double x : v_) s += x * x;
  return s;
}

double DenseVector::norm() const { return std::sqrt(squared_norm()); }

DenseVector& DenseVector::operator+=(const DenseVector& o) {
  if (o.dim() != dim()) throw std::invalid_argument("DenseVector: dim mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& o) {
  if (o.dim() != dim()) throw std::invalid_argument("DenseVector: dim mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

DenseVector& DenseVector::scale(double a) {
  for (double& x : v_) x *= a;
  return *this;
}

CoordinateSet CoordinateSet::from_sorted(std::vector<std::uint32_t> indices) {
  for (std::size_t i = 1; i < indices.size(); ++i) {
    if (indices[i] <= indices[i - 1]) {
      throw std::invalid_argument(
          "CoordinateSet: indices not strictly increasing");
    }
  }
  CoordinateSet s;
  s.idx_ = std::move(indices);
  return s;
}

CoordinateSet CoordinateSet::from_unsorted(std::vector<std::uint32_t> indices) {
  std::sort(indices.begin(), indices.end());
  return from_sorted(std::move(indices));
}

bool CoordinateSet::contains(std::uint32_t j) const {
  return std::binary_search(idx_.begin(), idx_.end(), j);
}

std::uint32_t CoordinateSet::max_index() const {
  if (idx_.empty()) throw std::invalid_argument("CoordinateSet: empty");
  return idx_.back();
}

SparseUpdate::SparseUpdate(CoordinateSet c, std::vector<double> v)
    : coords(std::move(c)), values(std::move(v)) {
  if (coords.size() != values.size()) {
    throw std::invalid_argument("SparseUpdate: coords/values length mismatch");
  }
}

DenseVector densify(const SparseUpdate& u, std::size_t d) {
  if (!u.coords.empty() && u.coords.max_index() >= d) {
    throw std::invalid_argument("densify: coordinate out of range");
  }
  DenseVector out = DenseVector::zeros(d);
  for (std::size_t i = 0; i < u.coords.size(); ++i) {
    out[u.coords[i]] = u.values[i];
  }
  return out;
}

namespace {

constexpr std::uint64_t kSplitMixGamma = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t RngStream::next_u64() {
  state_ += kSplitMixGamma;
  return mix64(state_);
}

double RngStream::next_double() {
  // 53 high bits -> [0, 1)
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be > 0");
  const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return x % n;
  }
}

double RngStream::next_gaussian() {
  // u1 in (0, 1], u2 in [0, 1)
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

std::vector<std::uint32_t> RngStream::permutation(std::uint32_t n) {
  std::vector<std::uint32_t> p(n);
  for (std::uint32_t i = 0; i < n; ++i) p[i] = i;
  for (std::uint32_t i = n; i > 1; --i) {
    const auto j = static_cast<std::uint32_t>(uniform_below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::vector<std::uint32_t> RngStream::sample_without_replacement(
    std::uint32_t n, std::uint32_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<std::uint32_t> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
  for (std::uint32_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::uint32_t>(uniform_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t round,
                        std::string_view actor) {
  // FNV-1a over (master_seed || round || actor), finalized twice through
  // the SplitMix64 mixer so nearby keys land in unrelated streams.
  std::uint64_t h = 1469598103934665603ULL;
  const auto absorb = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h = (h ^ ((word >> (8 * b)) & 0xFF)) * 1099511628211ULL;
    }
  };
  absorb(master_seed);
  absorb(round);
  for (char c : actor) {
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  }
  return RngStream(mix64(mix64(h) + kSplitMixGamma));
}

}  // namespace fedrep
