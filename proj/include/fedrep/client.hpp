#pragma once

#include <cstdint>

#include "fedrep/core.hpp"
#include "fedrep/harness.hpp"

namespace fedrep {

// Per-client persistent state. Memory and momentum start at zero;
// momentum persists across rounds.
struct ClientState {
  std::uint32_t id = 0;
  DenseVector memory;    // error-compensation residual u_k
  DenseVector momentum;  // local momentum buffer

  ClientState() = default;
  ClientState(std::uint32_t id_, std::size_t d)
      : id(id_), memory(DenseVector::zeros(d)), momentum(DenseVector::zeros(d)) {}
};

// Model + shard view for local training. batch_size = 0 (or >= shard
// size) means the full shard with no sampling.
struct LocalObjective {
  const Model* model = nullptr;
  const std::vector<Instance>* shard = nullptr;
  int batch_size = 0;
};

// interval plain SGD steps from w on uniformly sampled minibatches.
DenseVector local_sgd(const DenseVector& w, const LocalObjective& obj,
                      double eta, int interval, RngStream& rng);

// Local momentum SGD; the momentum buffer in `state` carries over
// between rounds:
//   m <- beta*m + (1-beta)*grad;  w <- w - eta*m
DenseVector local_momentum_sgd(ClientState& state, const DenseVector& w,
                               const LocalObjective& obj, double eta,
                               int interval, double beta, RngStream& rng);

// g_k = u_k + (w_old - w_new); does not mutate the state.
DenseVector make_update(const ClientState& state, const DenseVector& w_old,
                        const DenseVector& w_new);

// u_k <- g - densify(g_sparse); entries on the sparse support become
// exactly zero.
void update_memory(ClientState& state, const DenseVector& g,
                   const SparseUpdate& g_sparse);

}  // namespace fedrep
