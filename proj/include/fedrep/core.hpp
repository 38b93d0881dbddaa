#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fedrep {

// Thrown on malformed configuration (bad values, unknown keys, broken
// cross-field constraints). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Length-d real vector: model parameters, updates, error-compensation
// memory. Entries must be finite; construction rejects NaN/Inf.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::vector<double> values);
  static DenseVector zeros(std::size_t d);

  std::size_t dim() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  bool all_finite() const;
  double squared_norm() const;
  double norm() const;

  DenseVector& operator+=(const DenseVector& o);
  DenseVector& operator-=(const DenseVector& o);
  DenseVector& scale(double a);

  friend DenseVector operator+(DenseVector a, const DenseVector& b) {
    a += b;
    return a;
  }
  friend DenseVector operator-(DenseVector a, const DenseVector& b) {
    a -= b;
    return a;
  }

 private:
  std::vector<double> v_;
};

// Sorted duplicate-free index set over [0, d). The upper bound d is not
// stored; operations that need it take it as an argument and reject
// out-of-range indices.
class CoordinateSet {
 public:
  CoordinateSet() = default;

  // indices must already be strictly increasing.
  static CoordinateSet from_sorted(std::vector<std::uint32_t> indices);
  // sorts and rejects duplicates.
  static CoordinateSet from_unsorted(std::vector<std::uint32_t> indices);

  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  std::uint32_t operator[](std::size_t i) const { return idx_[i]; }
  const std::vector<std::uint32_t>& indices() const { return idx_; }
  bool contains(std::uint32_t j) const;
  std::uint32_t max_index() const;  // requires non-empty

  bool operator==(const CoordinateSet& o) const { return idx_ == o.idx_; }

 private:
  std::vector<std::uint32_t> idx_;
};

// Wire form of a sparsified vector: values aligned index-for-index with
// the coordinate set.
struct SparseUpdate {
  CoordinateSet coords;
  std::vector<double> values;

  SparseUpdate() = default;
  SparseUpdate(CoordinateSet c, std::vector<double> v);
};

// out[j] = value at j if j in coords, else 0. Coordinates >= d are a
// dimension error.
DenseVector densify(const SparseUpdate& u, std::size_t d);

// Deterministic SplitMix64 stream. Identical seed gives an identical
// draw sequence on every host; no libstdc++ distributions are used
// anywhere in the sampling path.
class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next_u64();
  // uniform in [0, 1)
  double next_double();
  // exactly uniform over {0, ..., n-1}, n > 0, by rejection
  std::uint64_t uniform_below(std::uint64_t n);
  // standard normal via Box-Muller (two draws per call)
  double next_gaussian();

  // Fisher-Yates permutation of {0, ..., n-1}
  std::vector<std::uint32_t> permutation(std::uint32_t n);
  // uniform k-subset of {0, ..., n-1} by partial shuffle, O(n) memory
  std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n,
                                                        std::uint32_t k);

 private:
  std::uint64_t state_;
};

// Pure stream derivation: same (master_seed, round, actor) always yields
// the same stream; distinct pairs yield statistically independent ones.
// Actor labels are free-form, e.g. "client:3", "server:pi", "pair:1:4".
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t round,
                        std::string_view actor);

}  // namespace fedrep
