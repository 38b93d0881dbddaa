#pragma once

#include <cstdint>
#include <vector>

#include "fedrep/config.hpp"
#include "fedrep/core.hpp"

namespace fedrep {

// Aggregators work on plain value arrays of equal length (the values of
// sparse updates restricted to the agreed coordinate set).
using ValueArray = std::vector<double>;

ValueArray mean_values(const std::vector<ValueArray>& vs);
ValueArray coordinate_median(const std::vector<ValueArray>& vs);

// Weiszfeld iteration started from the coordinate-wise mean. When the
// iterate coincides with an input point within 1e-12 the weight
// denominator is perturbed by 1e-12.
ValueArray geomed(const std::vector<ValueArray>& vs, int iters);

// Per coordinate: sort, drop floor(fraction*n) smallest and largest,
// average the rest. Over-trimming (nothing left) is an error.
ValueArray tmean(const std::vector<ValueArray>& vs, double fraction);

// Centered clipping: v <- v + (1/n) sum_i (x_i - v) * min(1, radius/|x_i - v|).
ValueArray cclip(const std::vector<ValueArray>& vs, double radius, int iters,
                 const ValueArray& init);
// init defaults to the coordinate-wise median of the inputs
ValueArray cclip(const std::vector<ValueArray>& vs, double radius, int iters);

ValueArray apply_aggregator(const AggregatorSpec& spec,
                            const std::vector<ValueArray>& vs);

// Buffered aggregation: partition the m client updates into m/s buffers
// via a uniform random permutation, average value-wise inside each
// buffer (members accumulated in ascending client id), then apply the
// robust aggregator across buffer means. All updates must share one
// coordinate set.
SparseUpdate buffered_aggregate(const std::vector<SparseUpdate>& updates,
                                std::uint32_t s, const AggregatorSpec& spec,
                                RngStream& rng);

// Partition used by buffered_aggregate and the round protocol:
// buffer l holds clients {perm[l*s + k] : k in [0, s)}.
std::vector<std::vector<std::uint32_t>> buffer_partition(
    const std::vector<std::uint32_t>& perm, std::uint32_t s);

struct CertifyParams {
  std::uint32_t m = 16;
  std::uint32_t dim = 8;
  double sigma = 1.0;
  std::vector<double> shift_magnitudes = {1e3, 1e6};
};

// Monte Carlo estimate of the (delta, c)-robustness constant: synthetic
// honest ensembles with known pairwise dispersion rho^2 = 2*sigma^2*dim,
// a fixed script of adversaries, and the worst observed
// E|Agg - honest_mean|^2 / (delta*rho^2). With delta = 0 the raw mean
// squared aggregation error is returned instead. Diagnostic, not a proof.
double certify_robustness(const AggregatorSpec& agg, double delta, int trials,
                          RngStream& rng,
                          const CertifyParams& params = CertifyParams{});

}  // namespace fedrep
