#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedrep/config.hpp"
#include "fedrep/core.hpp"
#include "fedrep/sparsify.hpp"

namespace fedrep {

// Inverse standard-normal CDF (Acklam's rational approximation with one
// Halley refinement step); |error| < 1e-13 on (0, 1).
double inv_normal_cdf(double p);

// Opposite-direction submission: -g.
std::vector<double> bit_flip(const std::vector<double>& g_honest_self);

// "A Little Is Enough": per coordinate mu + z*sigma over the honest
// submissions. z defaults to the quantile rule
//   s* = floor(n/2 + 1) - f,  z* = InvPhi(1 - s*/(n - f))
// and can be overridden for experimental control.
std::vector<double> alie(const std::vector<std::vector<double>>& honest_updates,
                         std::uint32_t n, std::uint32_t f,
                         std::optional<double> z_override);

double alie_default_z(std::uint32_t n, std::uint32_t f);

// "Fall of Empires": -eps times the coordinate-wise honest mean.
std::vector<double> foe(const std::vector<std::vector<double>>& honest_updates,
                        double eps);

// Byzantine coordinate proposals. coord_min sends the K/m smallest-|.|
// coordinates of the attacker's own update, coord_rand sends K/m uniform
// coordinates, coord_same copies the targeted honest client's proposal.
CoordinateSet attack_coords(CoordAttack kind, const DenseVector& g_self,
                            const ConSparParams& p,
                            const std::vector<CoordinateSet>& honest_proposals,
                            std::uint32_t same_target_honest_index,
                            RngStream& rng);

}  // namespace fedrep
