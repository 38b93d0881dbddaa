#include <string>

#include "doctest.h"
#include "fedrep/config.hpp"

using namespace fedrep;

namespace {

// minimal valid document the cases below mutate
std::string base_config() {
  return R"({
    "m": 8, "byz_count": 2, "d": 80, "K": 8, "alpha": 0.0, "s": 2,
    "rounds": 5, "master_seed": 1,
    "attack": {"kind": "bit_flip"},
    "aggregator": {"kind": "geomed"},
    "local": {"algo": "momentum_sgd", "eta": 0.5, "interval": 1, "beta": 0.9, "batch_size": 25},
    "dataset": {"kind": "synthetic_gaussian_2class", "n_per_client": 50, "feature_dim": 79, "noise": 0.5},
    "model": {"kind": "logistic_regression"}
  })";
}

std::string with(const std::string& key, const std::string& replacement) {
  std::string doc = base_config();
  const auto pos = doc.find(key);
  REQUIRE(pos != std::string::npos);
  const auto colon = doc.find(':', pos);
  const auto comma = doc.find_first_of(",\n", colon);
  doc.replace(colon + 1, comma - colon - 1, " " + replacement);
  return doc;
}

}  // namespace

TEST_CASE("valid config parses") {
  const auto cfg = parse_config_json(base_config());
  CHECK(cfg.m == 8);
  CHECK(cfg.k_per_client() == 1);
  CHECK(cfg.attack.value_kind == ValueAttack::kBitFlip);
  CHECK(cfg.aggregator.kind == AggregatorKind::kGeoMed);
  CHECK(cfg.quant.enabled);  // defaulted
}

TEST_CASE("unknown keys are an error, not a warning") {
  std::string doc = base_config();
  doc.insert(doc.rfind('}'), R"(, "typo_key": 1)");
  CHECK_THROWS_WITH_AS(parse_config_json(doc),
                       doctest::Contains("unknown key 'typo_key'"),
                       ConfigError);

  // nested objects are checked too
  std::string doc2 = base_config();
  const auto pos = doc2.find("\"kind\": \"geomed\"");
  doc2.insert(pos, R"("geomed_iter": 5, )");  // misspelled
  CHECK_THROWS_WITH_AS(parse_config_json(doc2),
                       doctest::Contains("unknown key 'geomed_iter'"),
                       ConfigError);
}

TEST_CASE("every structural constraint has a distinct error") {
  CHECK_THROWS_WITH_AS(parse_config_json(with("\"K\"", "10")),
                       doctest::Contains("multiple of m"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_json(with("\"s\"", "3")),
                       doctest::Contains("multiple of s"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_json(with("\"byz_count\"", "4")),
                       doctest::Contains("byz_count/m < 1/2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_json(with("\"alpha\"", "1.5")),
                       doctest::Contains("alpha"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_json(with("\"K\"", "0")),
                       doctest::Contains("K must be > 0"), ConfigError);
}

TEST_CASE("K/m larger than d is rejected") {
  CHECK_THROWS_WITH_AS(parse_config_json(with("\"K\"", "800")),
                       doctest::Contains("K/m must be <= d"), ConfigError);
}

TEST_CASE("quantization headroom check scales with the buffer size") {
  std::string doc = base_config();
  doc.insert(doc.rfind('}'),
             R"(, "quantization": {"enabled": true, "clip_bound": 10.0,
                 "scale": 9e-9, "modulus": 4294967296})");
  CHECK_THROWS_WITH_AS(parse_config_json(doc),
                       doctest::Contains("modulus too small"), ConfigError);
}

TEST_CASE("missing required key") {
  std::string doc = base_config();
  const auto pos = doc.find("\"rounds\": 5,");
  doc.erase(pos, 12);
  CHECK_THROWS_WITH_AS(parse_config_json(doc),
                       doctest::Contains("missing required key 'rounds'"),
                       ConfigError);
}

TEST_CASE("coord_same must target an honest client") {
  std::string doc = base_config();
  const std::string needle = R"({"kind": "bit_flip"})";
  const auto pos = doc.find(needle);
  REQUIRE(pos != std::string::npos);
  doc.replace(pos, needle.size(),
              R"({"kind": "coord_same", "same_target": 1})");
  CHECK_THROWS_WITH_AS(parse_config_json(doc),
                       doctest::Contains("honest client"), ConfigError);
}
