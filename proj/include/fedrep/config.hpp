#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fedrep/core.hpp"

namespace fedrep {

enum class AggregatorKind { kMean, kGeoMed, kTMean, kCClip };

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::kMean;
  int geomed_iters = 5;
  double tmean_fraction = 7.0 / 16.0;
  double cclip_radius = 0.5;
  int cclip_iters = 5;

  void validate() const;
};

enum class ValueAttack { kNone, kBitFlip, kAlie, kFoe };
enum class CoordAttack { kNone, kMin, kRand, kSame };

struct AttackSpec {
  ValueAttack value_kind = ValueAttack::kNone;
  CoordAttack coord_kind = CoordAttack::kNone;
  double foe_eps = 0.5;
  std::optional<double> alie_z;   // override for the ALIE quantile rule
  std::uint32_t same_target = 0;  // honest client id copied by coord_same

  void validate(std::uint32_t m, std::uint32_t byz_count) const;
};

enum class LocalAlgo { kSgd, kMomentumSgd };

struct LocalSpec {
  LocalAlgo algo = LocalAlgo::kMomentumSgd;
  double eta = 0.1;
  int interval = 1;      // local steps per round
  double beta = 0.9;     // momentum
  int batch_size = 25;   // 0 = full shard (deterministic gradient)

  void validate() const;
};

enum class DatasetKind { kGaussian2Class, kQuadratic, kCsvTable };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kGaussian2Class;
  int n_per_client = 100;
  int feature_dim = 10;
  int label_arity = 2;
  double noise = 0.5;
  double margin = 1.0;   // class separation for gaussian_2class
  int heldout_n = 500;
  std::string csv_path;  // csv_table only; last column is the label

  void validate() const;
};

enum class ModelKind { kLinearRegression, kLogisticRegression, kMlp1Hidden };

struct ModelSpec {
  ModelKind kind = ModelKind::kLogisticRegression;
  int hidden_width = 8;       // mlp_1hidden only
  double init_scale = 0.0;    // 0 = zero init, else gaussian * scale

  void validate() const;
};

struct QuantSpec {
  bool enabled = true;
  double clip_bound = 10.0;
  double scale = 20.0 / 16777216.0;  // 2*clip_bound / 2^24
  std::uint64_t modulus = 1ULL << 32;

  // steps needed to represent one clipped value, including the
  // stochastic round-up slack
  std::uint64_t value_steps() const;
  void validate() const;
  // no wraparound when s in-range values are summed in the field
  void validate_headroom(std::uint32_t s) const;
};

struct ExperimentConfig {
  std::uint32_t m = 8;
  std::uint32_t byz_count = 0;
  AttackSpec attack;
  std::uint32_t d = 100;
  std::uint32_t k_total = 8;  // K, the global sparsification budget
  double alpha = 0.0;
  std::uint32_t s = 2;  // buffer size
  AggregatorSpec aggregator;
  LocalSpec local;
  std::uint32_t rounds = 10;
  std::uint64_t master_seed = 0;
  int lr_decay_round = -1;  // -1 = constant learning rate
  double lr_decay_factor = 0.1;
  DatasetSpec dataset;
  ModelSpec model;
  QuantSpec quant;

  std::uint32_t k_per_client() const { return k_total / m; }
  void validate() const;
};

// Strict parser: unknown keys anywhere in the document are a ConfigError,
// as are missing required keys and type mismatches. The schema is
// documented in the README.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace fedrep
