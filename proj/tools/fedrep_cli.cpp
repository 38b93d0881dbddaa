#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedrep/attacks.hpp"
#include "fedrep/config.hpp"
#include "fedrep/protocol.hpp"
#include "fedrep/robust_agg.hpp"
#include "fedrep/secure_agg.hpp"
#include "fedrep/sparsify.hpp"

using nlohmann::json;

namespace {

json record_to_json(const fedrep::RoundRecord& r) {
  return json{{"round", r.round},
              {"loss", r.loss},
              {"accuracy", r.accuracy},
              {"bits_per_client", r.bits_per_client},
              {"union_size", r.union_size},
              {"agg_error_proxy", r.agg_error_proxy}};
}

json transcript_to_json(const fedrep::RoundTranscript& t) {
  json j{{"round", t.round},
         {"union", t.union_set.indices()},
         {"pi", t.permutation},
         {"buffers", t.buffers},
         {"buffer_means", t.buffer_means},
         {"aggregate", t.aggregate.values},
         {"bits_per_client", t.bits_per_client}};
  if (!t.rejected_proposals.empty()) j["rejected"] = t.rejected_proposals;
  if (!t.dropped_submissions.empty()) j["dropped"] = t.dropped_submissions;
  return j;
}

int cmd_run(const std::string& config_path, std::int64_t seed_override,
            const std::string& out_path, int workers,
            const std::string& transcript_path) {
  fedrep::ExperimentConfig cfg = fedrep::load_config_file(config_path);
  if (seed_override >= 0) {
    cfg.master_seed = static_cast<std::uint64_t>(seed_override);
  }

  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::trunc);
    if (!out_file) {
      throw fedrep::ConfigError("cannot open output file: " + out_path);
    }
    out = &out_file;
  }
  std::ofstream tr_file;
  fedrep::TranscriptSink tr_sink;
  if (!transcript_path.empty()) {
    tr_file.open(transcript_path, std::ios::trunc);
    if (!tr_file) {
      throw fedrep::ConfigError("cannot open transcript file: " +
                                transcript_path);
    }
    tr_sink = [&tr_file](const fedrep::RoundTranscript& t) {
      tr_file << transcript_to_json(t).dump() << "\n";
      tr_file.flush();  // truncated runs keep a valid prefix
    };
  }

  fedrep::RecordSink sink = [out](const fedrep::RoundRecord& r) {
    (*out) << record_to_json(r).dump() << "\n";
    out->flush();
  };
  fedrep::run_experiment(cfg, sink, workers, tr_sink);
  return 0;
}

int cmd_certify(const std::string& agg_name, double delta, int trials,
                std::uint64_t seed, std::uint32_t m, std::uint32_t dim,
                double sigma) {
  fedrep::AggregatorSpec spec;
  if (agg_name == "mean") {
    spec.kind = fedrep::AggregatorKind::kMean;
  } else if (agg_name == "geomed") {
    spec.kind = fedrep::AggregatorKind::kGeoMed;
    spec.geomed_iters = 200;
  } else if (agg_name == "tmean") {
    spec.kind = fedrep::AggregatorKind::kTMean;
  } else if (agg_name == "cclip") {
    spec.kind = fedrep::AggregatorKind::kCClip;
  } else {
    throw fedrep::ConfigError("unknown aggregator: " + agg_name);
  }
  fedrep::CertifyParams params;
  params.m = m;
  params.dim = dim;
  params.sigma = sigma;
  fedrep::RngStream rng = fedrep::derive_stream(seed, 0, "certify");
  const double c = certify_robustness(spec, delta, trials, rng, params);
  if (delta == 0.0) {
    std::cout << "aggregator=" << agg_name << " delta=0"
              << " mean_sq_error=" << c << "\n";
  } else {
    std::cout << "aggregator=" << agg_name << " delta=" << delta
              << " trials=" << trials << " estimated_c=" << c << "\n";
  }
  return 0;
}

int cmd_verify_dp(std::uint32_t d, std::uint32_t k, double alpha) {
  const auto audit = fedrep::audit_dp(d, k, alpha);
  const double bound = std::exp(audit.epsilon_bound);
  std::cout << "d=" << d << " k_per_client=" << k << " alpha=" << alpha
            << " max_ratio=" << audit.max_ratio << " bound=exp(eps)=" << bound
            << " epsilon=" << audit.epsilon_bound << "\n";
  if (audit.max_ratio <= bound * (1.0 + 1e-9)) {
    std::cout << "ratio within bound\n";
    return 0;
  }
  std::cout << "ratio EXCEEDS bound\n";
  return 1;
}

int cmd_verify_contraction(std::uint32_t d, std::uint32_t k_total,
                           std::uint32_t m, double alpha, double delta,
                           int rounds, std::uint64_t seed) {
  fedrep::ConSparParams p;
  p.d = d;
  p.k_total = k_total;
  p.m = m;
  p.alpha = alpha;
  const double bound = 1.0 - fedrep::contraction_constant(p, delta) / d;

  const auto honest = m - static_cast<std::uint32_t>(std::floor(delta * m));
  fedrep::RngStream rng = fedrep::derive_stream(seed, 0, "contraction");
  double acc = 0.0, acc_sq = 0.0;
  for (int r = 0; r < rounds; ++r) {
    std::vector<fedrep::DenseVector> g;
    std::vector<fedrep::CoordinateSet> proposals;
    for (std::uint32_t c = 0; c < honest; ++c) {
      std::vector<double> x(d);
      for (auto& v : x) v = rng.next_gaussian();
      g.emplace_back(std::move(x));
      proposals.push_back(
          propose_coords(top_coords(g.back(), p.k_per_client()), p, rng));
    }
    const auto u = fedrep::union_coords(proposals);
    const fedrep::DenseVector kept = densify(extract(g[0], u), d);
    fedrep::DenseVector resid = g[0];
    resid -= kept;
    const double ratio = resid.squared_norm() / g[0].squared_norm();
    acc += ratio;
    acc_sq += ratio * ratio;
  }
  const double mean = acc / rounds;
  const double var = std::max(0.0, acc_sq / rounds - mean * mean);
  const double se = std::sqrt(var / rounds);
  std::cout << "d=" << d << " K=" << k_total << " m=" << m
            << " alpha=" << alpha << " delta=" << delta
            << " empirical_mean=" << mean << " bound=" << bound
            << " +3se=" << bound + 3.0 * se << "\n";
  if (mean <= bound + 3.0 * se) {
    std::cout << "contraction bound holds\n";
    return 0;
  }
  std::cout << "contraction bound VIOLATED\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FedREP desk-scale simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, transcript_path;
  std::int64_t seed_override = -1;
  int workers = 1;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "config file (JSON)")->required();
  run->add_option("--seed", seed_override, "override config master_seed");
  run->add_option("--out", out_path,
                  "metrics output file (JSONL; default stdout)");
  run->add_option("--workers", workers, "worker threads for client phases");
  run->add_option("--transcript", transcript_path,
                  "per-round transcript dump (JSONL)");

  std::string agg_name = "geomed";
  double delta = 0.25, sigma = 1.0;
  int trials = 500;
  std::uint64_t seed = 0;
  std::uint32_t cert_m = 16, cert_dim = 8;
  auto* cert = app.add_subcommand("certify-agg",
                                  "Monte Carlo (delta,c)-robustness estimate");
  cert->add_option("--agg", agg_name, "mean|geomed|tmean|cclip")->required();
  cert->add_option("--delta", delta, "byzantine fraction bound")->required();
  cert->add_option("--trials", trials, "Monte Carlo trials");
  cert->add_option("--seed", seed, "rng seed");
  cert->add_option("--m", cert_m, "ensemble size");
  cert->add_option("--dim", cert_dim, "vector dimension");
  cert->add_option("--sigma", sigma, "honest spread");

  std::uint32_t dp_d = 6, dp_k = 2;
  double dp_alpha = 0.5;
  auto* vdp = app.add_subcommand(
      "verify-dp",
      "exhaustive likelihood-ratio audit of the coordinate mechanism");
  vdp->add_option("--d", dp_d, "dimension")->required();
  vdp->add_option("--k-over-m", dp_k, "per-client set size")->required();
  vdp->add_option("--alpha", dp_alpha, "obfuscation probability")->required();

  std::uint32_t c_d = 500, c_k = 50, c_m = 10;
  double c_alpha = 0.9, c_delta = 0.2;
  int c_rounds = 10000;
  std::uint64_t c_seed = 0;
  auto* vc = app.add_subcommand("verify-contraction",
                                "Monte Carlo check of the contraction bound");
  vc->add_option("--d", c_d, "dimension")->required();
  vc->add_option("--K", c_k, "total budget K")->required();
  vc->add_option("--m", c_m, "client count")->required();
  vc->add_option("--alpha", c_alpha, "obfuscation probability")->required();
  vc->add_option("--delta", c_delta, "byzantine fraction");
  vc->add_option("--rounds", c_rounds, "Monte Carlo rounds");
  vc->add_option("--seed", c_seed, "rng seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return cmd_run(config_path, seed_override, out_path, workers,
                     transcript_path);
    }
    if (cert->parsed()) {
      return cmd_certify(agg_name, delta, trials, seed, cert_m, cert_dim,
                         sigma);
    }
    if (vdp->parsed()) return cmd_verify_dp(dp_d, dp_k, dp_alpha);
    if (vc->parsed()) {
      return cmd_verify_contraction(c_d, c_k, c_m, c_alpha, c_delta, c_rounds,
                                    c_seed);
    }
  } catch (const fedrep::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
