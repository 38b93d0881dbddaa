#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedrep/config.hpp"
#include "fedrep/core.hpp"

namespace fedrep {

// One training instance. For the quadratic objective the features hold
// the target point and the label is unused; for classification the
// label is -1 or +1.
struct Instance {
  std::vector<double> x;
  double y = 0.0;
};

struct Dataset {
  std::vector<std::vector<Instance>> shards;  // one per client, disjoint
  std::vector<Instance> heldout;
  int feature_dim = 0;
};

// Deterministic given the stream; shards are equally sized and i.i.d.
// under the uniform partition.
Dataset generate_dataset(const DatasetSpec& spec, std::uint32_t m,
                         RngStream& rng);

// Loss family resolved from the (model, dataset) pairing.
enum class Objective {
  kQuadraticCenter,  // 0.5*|w - x|^2, parameters are a point in R^d
  kLeastSquares,     // 0.5*(w.x + b - y)^2
  kLogistic,         // log(1 + exp(-y*(w.x + b))), y in {-1, +1}
  kMlpLogistic,      // 1 hidden tanh layer, logistic output
};

struct Model {
  ModelSpec spec;
  Objective objective = Objective::kLogistic;
  int feature_dim = 0;
  int hidden_width = 0;

  std::size_t param_count() const;
};

// Validates the pairing (e.g. synthetic_quadratic requires
// linear_regression) and that the parameter count matches d.
Model build_model(const ModelSpec& spec, const DatasetSpec& data,
                  std::uint32_t d);

DenseVector init_weights(const Model& model, RngStream& rng);

// Mean loss over the batch and its exact gradient. `indices` selects
// instances from `pool`; empty means the whole pool.
double loss_and_grad(const Model& model, const DenseVector& w,
                     const std::vector<Instance>& pool,
                     const std::vector<std::uint32_t>& indices,
                     DenseVector& grad_out);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;  // 0 for non-classification objectives
};

EvalResult evaluate(const Model& model, const DenseVector& w,
                    const std::vector<Instance>& data);

}  // namespace fedrep
