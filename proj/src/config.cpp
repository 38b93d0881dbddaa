#include "fedrep/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fedrep {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
T require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail(where + ": missing required key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + ": bad value type for '" + std::string(key) + "'");
  }
}

template <typename T>
T optional_or(const json& obj, const std::string& where, const char* key,
              T def) {
  if (!obj.contains(key)) return def;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(where + ": bad value type for '" + std::string(key) + "'");
  }
}

AggregatorKind parse_agg_kind(const std::string& s) {
  if (s == "mean") return AggregatorKind::kMean;
  if (s == "geomed") return AggregatorKind::kGeoMed;
  if (s == "tmean") return AggregatorKind::kTMean;
  if (s == "cclip") return AggregatorKind::kCClip;
  fail("aggregator.kind: unknown aggregator '" + s + "'");
}

LocalAlgo parse_local_algo(const std::string& s) {
  if (s == "sgd") return LocalAlgo::kSgd;
  if (s == "momentum_sgd") return LocalAlgo::kMomentumSgd;
  fail("local.algo: unknown algorithm '" + s + "'");
}

DatasetKind parse_dataset_kind(const std::string& s) {
  if (s == "synthetic_gaussian_2class") return DatasetKind::kGaussian2Class;
  if (s == "synthetic_quadratic") return DatasetKind::kQuadratic;
  if (s == "csv_table") return DatasetKind::kCsvTable;
  fail("dataset.kind: unknown dataset '" + s + "'");
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "linear_regression") return ModelKind::kLinearRegression;
  if (s == "logistic_regression") return ModelKind::kLogisticRegression;
  if (s == "mlp_1hidden") return ModelKind::kMlp1Hidden;
  fail("model.kind: unknown model '" + s + "'");
}

// "kind" carries either a value attack or a coordinate attack; an extra
// "coords" key combines a coordinate attack with a value attack.
void parse_attack_kind(const std::string& s, AttackSpec& a) {
  if (s == "none") {
    a.value_kind = ValueAttack::kNone;
  } else if (s == "bit_flip") {
    a.value_kind = ValueAttack::kBitFlip;
  } else if (s == "alie") {
    a.value_kind = ValueAttack::kAlie;
  } else if (s == "foe") {
    a.value_kind = ValueAttack::kFoe;
  } else if (s == "coord_min") {
    a.coord_kind = CoordAttack::kMin;
  } else if (s == "coord_rand") {
    a.coord_kind = CoordAttack::kRand;
  } else if (s == "coord_same") {
    a.coord_kind = CoordAttack::kSame;
  } else {
    fail("attack.kind: unknown attack '" + s + "'");
  }
}

CoordAttack parse_coord_attack(const std::string& s) {
  if (s == "none") return CoordAttack::kNone;
  if (s == "min") return CoordAttack::kMin;
  if (s == "rand") return CoordAttack::kRand;
  if (s == "same") return CoordAttack::kSame;
  fail("attack.coords: unknown coordinate attack '" + s + "'");
}

}  // namespace

void AggregatorSpec::validate() const {
  if (geomed_iters < 1) fail("aggregator.geomed_iters must be >= 1");
  if (cclip_iters < 1) fail("aggregator.cclip_iters must be >= 1");
  if (tmean_fraction < 0.0 || tmean_fraction >= 0.5) {
    fail("aggregator.tmean_fraction must be in [0, 1/2)");
  }
  if (cclip_radius <= 0.0) fail("aggregator.cclip_radius must be > 0");
}

void AttackSpec::validate(std::uint32_t m, std::uint32_t byz_count) const {
  if (foe_eps < 0.0) fail("attack.foe_eps must be >= 0");
  if (coord_kind == CoordAttack::kSame && same_target >= m) {
    fail("attack.same_target must be a valid client id");
  }
  if (byz_count > 0 && coord_kind == CoordAttack::kSame) {
    // target must be honest; byzantine ids are 0..byz_count-1
    if (same_target < byz_count) {
      fail("attack.same_target must name an honest client");
    }
  }
}

void LocalSpec::validate() const {
  if (eta <= 0.0) fail("local.eta must be > 0");
  if (interval < 1) fail("local.interval must be >= 1");
  if (beta < 0.0 || beta >= 1.0) fail("local.beta must be in [0, 1)");
  if (batch_size < 0) fail("local.batch_size must be >= 0");
}

void DatasetSpec::validate() const {
  if (n_per_client < 1) fail("dataset.n_per_client must be >= 1");
  if (feature_dim < 1) fail("dataset.feature_dim must be >= 1");
  if (heldout_n < 1) fail("dataset.heldout_n must be >= 1");
  if (noise < 0.0) fail("dataset.noise must be >= 0");
  if (kind == DatasetKind::kGaussian2Class && label_arity != 2) {
    fail("dataset.label_arity must be 2 for synthetic_gaussian_2class");
  }
  if (kind == DatasetKind::kCsvTable && csv_path.empty()) {
    fail("dataset.csv_path is required for csv_table");
  }
}

void ModelSpec::validate() const {
  if (kind == ModelKind::kMlp1Hidden && hidden_width < 1) {
    fail("model.hidden_width must be >= 1 for mlp_1hidden");
  }
  if (init_scale < 0.0) fail("model.init_scale must be >= 0");
}

std::uint64_t QuantSpec::value_steps() const {
  // one clipped value maps to at most ceil(clip_bound/scale) + 1 steps
  // after stochastic round-up
  return static_cast<std::uint64_t>(std::ceil(clip_bound / scale)) + 1;
}

void QuantSpec::validate() const {
  if (clip_bound <= 0.0) fail("quantization.clip_bound must be > 0");
  if (scale <= 0.0) fail("quantization.scale must be > 0");
  if (modulus < 2) fail("quantization.modulus must be >= 2");
  if (2.0 * clip_bound / scale >= static_cast<double>(modulus)) {
    fail("quantization: 2*clip_bound/scale must be < modulus");
  }
}

void QuantSpec::validate_headroom(std::uint32_t s) const {
  // The buffer sum of s values must lift uniquely from the field.
  const long double need = 2.0L * static_cast<long double>(s) *
                           static_cast<long double>(value_steps());
  if (need >= static_cast<long double>(modulus)) {
    fail("quantization: modulus too small for buffer size " +
         std::to_string(s) + " (2*s*clip_bound/scale must be < modulus)");
  }
}

void ExperimentConfig::validate() const {
  if (m == 0) fail("m must be > 0");
  if (d == 0) fail("d must be > 0");
  if (k_total == 0) fail("K must be > 0");
  if (k_total % m != 0) fail("K must be a multiple of m");
  if (k_total / m > d) fail("K/m must be <= d");
  if (s == 0) fail("s must be > 0");
  if (m % s != 0) fail("m must be a multiple of s");
  if (2 * byz_count >= m) fail("byz_count must satisfy byz_count/m < 1/2");
  if (alpha < 0.0 || alpha > 1.0) fail("alpha must be in [0, 1]");
  aggregator.validate();
  attack.validate(m, byz_count);
  local.validate();
  dataset.validate();
  model.validate();
  quant.validate();
  if (quant.enabled) quant.validate_headroom(s);
}

ExperimentConfig parse_config_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) fail("config root must be an object");
  check_keys(root, "config",
             {"m", "byz_count", "attack", "d", "K", "alpha", "s", "aggregator",
              "local", "rounds", "master_seed", "lr_decay_round",
              "lr_decay_factor", "dataset", "model", "quantization"});

  ExperimentConfig cfg;
  cfg.m = require<std::uint32_t>(root, "config", "m");
  cfg.byz_count = optional_or<std::uint32_t>(root, "config", "byz_count", 0);
  cfg.d = require<std::uint32_t>(root, "config", "d");
  cfg.k_total = require<std::uint32_t>(root, "config", "K");
  cfg.alpha = optional_or<double>(root, "config", "alpha", 0.0);
  cfg.s = require<std::uint32_t>(root, "config", "s");
  cfg.rounds = require<std::uint32_t>(root, "config", "rounds");
  cfg.master_seed = optional_or<std::uint64_t>(root, "config", "master_seed", 0);
  cfg.lr_decay_round = optional_or<int>(root, "config", "lr_decay_round", -1);
  cfg.lr_decay_factor =
      optional_or<double>(root, "config", "lr_decay_factor", 0.1);

  if (root.contains("attack")) {
    const json& a = root.at("attack");
    check_keys(a, "attack",
               {"kind", "coords", "foe_eps", "alie_z", "same_target"});
    parse_attack_kind(require<std::string>(a, "attack", "kind"), cfg.attack);
    if (a.contains("coords")) {
      cfg.attack.coord_kind =
          parse_coord_attack(require<std::string>(a, "attack", "coords"));
    }
    cfg.attack.foe_eps = optional_or<double>(a, "attack", "foe_eps", 0.5);
    if (a.contains("alie_z") && !a.at("alie_z").is_null()) {
      cfg.attack.alie_z = require<double>(a, "attack", "alie_z");
    }
    cfg.attack.same_target =
        optional_or<std::uint32_t>(a, "attack", "same_target", 0);
  }

  {
    const json& g = root.at("aggregator");
    check_keys(g, "aggregator",
               {"kind", "geomed_iters", "tmean_fraction", "cclip_radius",
                "cclip_iters"});
    cfg.aggregator.kind =
        parse_agg_kind(require<std::string>(g, "aggregator", "kind"));
    cfg.aggregator.geomed_iters =
        optional_or<int>(g, "aggregator", "geomed_iters", 5);
    cfg.aggregator.tmean_fraction =
        optional_or<double>(g, "aggregator", "tmean_fraction", 7.0 / 16.0);
    cfg.aggregator.cclip_radius =
        optional_or<double>(g, "aggregator", "cclip_radius", 0.5);
    cfg.aggregator.cclip_iters =
        optional_or<int>(g, "aggregator", "cclip_iters", 5);
  }

  {
    const json& l = root.at("local");
    check_keys(l, "local", {"algo", "eta", "interval", "beta", "batch_size"});
    cfg.local.algo = parse_local_algo(require<std::string>(l, "local", "algo"));
    cfg.local.eta = require<double>(l, "local", "eta");
    cfg.local.interval = optional_or<int>(l, "local", "interval", 1);
    cfg.local.beta = optional_or<double>(l, "local", "beta", 0.9);
    cfg.local.batch_size = optional_or<int>(l, "local", "batch_size", 25);
  }

  {
    const json& ds = root.at("dataset");
    check_keys(ds, "dataset",
               {"kind", "n_per_client", "feature_dim", "label_arity", "noise",
                "margin", "heldout_n", "csv_path"});
    cfg.dataset.kind =
        parse_dataset_kind(require<std::string>(ds, "dataset", "kind"));
    cfg.dataset.n_per_client =
        optional_or<int>(ds, "dataset", "n_per_client", 100);
    cfg.dataset.feature_dim =
        optional_or<int>(ds, "dataset", "feature_dim", 10);
    cfg.dataset.label_arity = optional_or<int>(ds, "dataset", "label_arity", 2);
    cfg.dataset.noise = optional_or<double>(ds, "dataset", "noise", 0.5);
    cfg.dataset.margin = optional_or<double>(ds, "dataset", "margin", 1.0);
    cfg.dataset.heldout_n = optional_or<int>(ds, "dataset", "heldout_n", 500);
    cfg.dataset.csv_path =
        optional_or<std::string>(ds, "dataset", "csv_path", "");
  }

  {
    const json& mo = root.at("model");
    check_keys(mo, "model", {"kind", "hidden_width", "init_scale"});
    cfg.model.kind = parse_model_kind(require<std::string>(mo, "model", "kind"));
    cfg.model.hidden_width = optional_or<int>(mo, "model", "hidden_width", 8);
    cfg.model.init_scale = optional_or<double>(mo, "model", "init_scale", 0.0);
  }

  if (root.contains("quantization")) {
    const json& q = root.at("quantization");
    check_keys(q, "quantization", {"enabled", "clip_bound", "scale", "modulus"});
    cfg.quant.enabled = optional_or<bool>(q, "quantization", "enabled", true);
    cfg.quant.clip_bound =
        optional_or<double>(q, "quantization", "clip_bound", 10.0);
    cfg.quant.scale =
        optional_or<double>(q, "quantization", "scale", 20.0 / 16777216.0);
    cfg.quant.modulus = optional_or<std::uint64_t>(q, "quantization", "modulus",
                                                   1ULL << 32);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

}  // namespace fedrep
