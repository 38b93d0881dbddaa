#include "fedrep/client.hpp"

namespace fedrep {

namespace {

std::vector<std::uint32_t> sample_batch(const LocalObjective& obj,
                                        RngStream& rng) {
  const auto n = static_cast<std::uint32_t>(obj.shard->size());
  if (n == 0) throw std::invalid_argument("local training: empty shard");
  if (obj.batch_size <= 0 ||
      static_cast<std::uint32_t>(obj.batch_size) >= n) {
    return {};  // full shard, deterministic
  }
  std::vector<std::uint32_t> idx(obj.batch_size);
  for (auto& i : idx) i = static_cast<std::uint32_t>(rng.uniform_below(n));
  return idx;
}

}  // namespace

DenseVector local_sgd(const DenseVector& w, const LocalObjective& obj,
                      double eta, int interval, RngStream& rng) {
  if (eta < 0.0) throw std::invalid_argument("local_sgd: eta must be >= 0");
  if (interval < 1) throw std::invalid_argument("local_sgd: interval must be >= 1");
  DenseVector cur = w;
  DenseVector grad;
  for (int j = 0; j < interval; ++j) {
    const auto batch = sample_batch(obj, rng);
    loss_and_grad(*obj.model, cur, *obj.shard, batch, grad);
    grad.scale(eta);
    cur -= grad;
  }
  return cur;
}

DenseVector local_momentum_sgd(ClientState& state, const DenseVector& w,
                               const LocalObjective& obj, double eta,
                               int interval, double beta, RngStream& rng) {
  if (beta < 0.0 || beta >= 1.0) {
    throw std::invalid_argument("local_momentum_sgd: beta must be in [0, 1)");
  }
  if (interval < 1) {
    throw std::invalid_argument("local_momentum_sgd: interval must be >= 1");
  }
  DenseVector cur = w;
  DenseVector grad;
  for (int j = 0; j < interval; ++j) {
    const auto batch = sample_batch(obj, rng);
    loss_and_grad(*obj.model, cur, *obj.shard, batch, grad);
    // m <- beta*m + (1-beta)*grad
    state.momentum.scale(beta);
    grad.scale(1.0 - beta);
    state.momentum += grad;
    DenseVector step = state.momentum;
    step.scale(eta);
    cur -= step;
  }
  return cur;
}

DenseVector make_update(const ClientState& state, const DenseVector& w_old,
                        const DenseVector& w_new) {
  if (w_old.dim() != w_new.dim() || state.memory.dim() != w_old.dim()) {
    throw std::invalid_argument("make_update: dimension mismatch");
  }
  DenseVector g = state.memory;
  g += w_old;
  g -= w_new;
  return g;
}

void update_memory(ClientState& state, const DenseVector& g,
                   const SparseUpdate& g_sparse) {
  if (state.memory.dim() != g.dim()) {
    throw std::invalid_argument("update_memory: dimension mismatch");
  }
  state.memory = g;
  state.memory -= densify(g_sparse, g.dim());
}

}  // namespace fedrep
