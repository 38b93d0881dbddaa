#include "fedrep/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "fedrep/attacks.hpp"
#include "fedrep/secure_agg.hpp"
#include "fedrep/sparsify.hpp"

namespace fedrep {

namespace {

std::string actor(const char* role, std::uint32_t id) {
  return std::string(role) + ":" + std::to_string(id);
}

double round_eta(const ExperimentConfig& cfg, std::uint32_t round) {
  if (cfg.lr_decay_round >= 0 &&
      round >= static_cast<std::uint32_t>(cfg.lr_decay_round)) {
    return cfg.local.eta * cfg.lr_decay_factor;
  }
  return cfg.local.eta;
}

// fan a per-client job out over `workers` threads; client k only writes
// slot k, so the result is independent of scheduling
void for_each_client(std::uint32_t m, int workers,
                     const std::function<void(std::uint32_t)>& job) {
  if (workers <= 1 || m <= 1) {
    for (std::uint32_t k = 0; k < m; ++k) job(k);
    return;
  }
  const auto n_threads = static_cast<std::uint32_t>(
      std::min<std::uint64_t>(workers, m));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  for (std::uint32_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::uint32_t k = t; k < m; k += n_threads) job(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

Experiment setup_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Experiment exp;
  exp.cfg = cfg;
  RngStream data_rng = derive_stream(cfg.master_seed, 0, "dataset");
  exp.data = generate_dataset(cfg.dataset, cfg.m, data_rng);
  // csv tables fix the feature dimension after loading
  DatasetSpec resolved = cfg.dataset;
  resolved.feature_dim = exp.data.feature_dim;
  exp.model = build_model(cfg.model, resolved, cfg.d);
  RngStream init_rng = derive_stream(cfg.master_seed, 0, "init");
  exp.w = init_weights(exp.model, init_rng);
  exp.clients.reserve(cfg.m);
  for (std::uint32_t k = 0; k < cfg.m; ++k) {
    exp.clients.emplace_back(k, cfg.d);
  }
  return exp;
}

std::uint64_t comm_bits_for_client(std::size_t proposal_size,
                                   std::size_t union_size) {
  return 32ULL * (proposal_size + 3 * union_size);
}

double comm_bound_bits(std::uint32_t m, std::uint32_t k_total) {
  return (96.0 + 32.0 / static_cast<double>(m)) *
         static_cast<double>(k_total);
}

RoundTranscript run_round(Experiment& exp, const RoundHooks& hooks,
                          int workers) {
  const ExperimentConfig& cfg = exp.cfg;
  const std::uint32_t m = cfg.m;
  const std::uint32_t kpc = cfg.k_per_client();
  const std::uint32_t round = exp.round;
  const double eta = round_eta(cfg, round);
  const ConSparParams sp{cfg.d, cfg.k_total, cfg.m, cfg.alpha};

  RoundTranscript tr;
  tr.round = round;

  // (1)+(2) local training and coordinate proposals; Byzantine clients
  // run the honest pipeline here and attacks rewrite the wire below
  std::vector<DenseVector> updates(m);
  std::vector<CoordinateSet> proposals(m);
  for_each_client(m, workers, [&](std::uint32_t k) {
    RngStream train_rng =
        derive_stream(cfg.master_seed, round, actor("client", k));
    const LocalObjective obj{&exp.model, &exp.data.shards[k],
                             cfg.local.batch_size};
    DenseVector w_next =
        cfg.local.algo == LocalAlgo::kSgd
            ? local_sgd(exp.w, obj, eta, cfg.local.interval, train_rng)
            : local_momentum_sgd(exp.clients[k], exp.w, obj, eta,
                                 cfg.local.interval, cfg.local.beta,
                                 train_rng);
    updates[k] = make_update(exp.clients[k], exp.w, w_next);
    RngStream prop_rng =
        derive_stream(cfg.master_seed, round, actor("propose", k));
    proposals[k] = propose_coords(top_coords(updates[k], kpc), sp, prop_rng);
  });

  if (cfg.byz_count > 0 && cfg.attack.coord_kind != CoordAttack::kNone) {
    std::vector<CoordinateSet> honest(proposals.begin() + cfg.byz_count,
                                      proposals.end());
    for (std::uint32_t k = 0; k < cfg.byz_count; ++k) {
      RngStream atk_rng =
          derive_stream(cfg.master_seed, round, actor("coordattack", k));
      proposals[k] =
          attack_coords(cfg.attack.coord_kind, updates[k], sp, honest,
                        cfg.attack.same_target - cfg.byz_count, atk_rng);
    }
  }
  if (hooks.tamper_proposal) {
    for (std::uint32_t k = 0; k < m; ++k) hooks.tamper_proposal(k, proposals[k]);
  }

  // (3) server-side validation and union
  std::vector<CoordinateSet> accepted;
  accepted.reserve(m);
  for (std::uint32_t k = 0; k < m; ++k) {
    const bool ok = proposals[k].size() == kpc &&
                    (proposals[k].empty() || proposals[k].max_index() < cfg.d);
    if (ok) {
      accepted.push_back(proposals[k]);
    } else {
      tr.rejected_proposals.push_back(k);
    }
  }
  if (accepted.empty()) {
    throw std::runtime_error("round " + std::to_string(round) +
                             ": no valid coordinate proposals");
  }
  tr.union_set = union_coords(accepted);
  if (tr.union_set.size() > cfg.k_total) {
    throw std::runtime_error("round " + std::to_string(round) +
                             ": union exceeded K");
  }
  const std::size_t u = tr.union_set.size();

  // (4) buffer assignment
  RngStream pi_rng = derive_stream(cfg.master_seed, round, "server:pi");
  tr.permutation = pi_rng.permutation(m);
  tr.buffers = buffer_partition(tr.permutation, cfg.s);

  // (5) client-side submissions on I^t; omniscient attacks read the
  // fixed honest values before anything reaches the server
  std::vector<ValueArray> submissions(m);
  for (std::uint32_t k = cfg.byz_count; k < m; ++k) {
    submissions[k] = extract(updates[k], tr.union_set).values;
  }
  if (cfg.byz_count > 0) {
    const std::vector<ValueArray> honest_values(
        submissions.begin() + cfg.byz_count, submissions.end());
    ValueArray shared;  // ALIE and FoE attackers collude on one vector
    if (cfg.attack.value_kind == ValueAttack::kAlie) {
      shared = alie(honest_values, m, cfg.byz_count, cfg.attack.alie_z);
    } else if (cfg.attack.value_kind == ValueAttack::kFoe) {
      shared = foe(honest_values, cfg.attack.foe_eps);
    }
    for (std::uint32_t k = 0; k < cfg.byz_count; ++k) {
      switch (cfg.attack.value_kind) {
        case ValueAttack::kNone:
          submissions[k] = extract(updates[k], tr.union_set).values;
          break;
        case ValueAttack::kBitFlip:
          submissions[k] = bit_flip(extract(updates[k], tr.union_set).values);
          break;
        case ValueAttack::kAlie:
        case ValueAttack::kFoe:
          submissions[k] = shared;
          break;
      }
    }
  }
  if (hooks.tamper_submission) {
    for (std::uint32_t k = 0; k < m; ++k) {
      hooks.tamper_submission(k, submissions[k]);
    }
  }

  // (7) memory update from each client's own honest sparsification;
  // runs while the server aggregates
  for (std::uint32_t k = 0; k < m; ++k) {
    update_memory(exp.clients[k], updates[k], extract(updates[k], tr.union_set));
  }

  // malformed value arrays are dropped; the buffer proceeds with the
  // surviving members and divides by their count
  std::vector<bool> alive(m, false);
  for (std::uint32_t k = 0; k < m; ++k) {
    if (submissions[k].size() == u) {
      alive[k] = true;
    } else {
      tr.dropped_submissions.push_back(k);
    }
  }

  // (5 cont.) in-buffer secure summation
  tr.buffer_means.clear();
  if (cfg.quant.enabled) {
    // masked submissions are built per buffer over surviving members
    std::vector<FieldVector> masked(m);
    for (const auto& members : tr.buffers) {
      std::vector<std::uint32_t> survivors;
      for (std::uint32_t id : members) {
        if (alive[id]) survivors.push_back(id);
      }
      for (std::uint32_t id : survivors) {
        RngStream q_rng =
            derive_stream(cfg.master_seed, round, actor("quant", id));
        FieldVector fv = quantize(submissions[id], cfg.quant, q_rng);
        const FieldVector mask = pairwise_masks(
            survivors, id, u, round, cfg.master_seed, cfg.quant);
        masked[id] = add_mod(fv, mask);
      }
    }
    if (hooks.poison_plaintexts) hooks.poison_plaintexts(submissions);
    for (const auto& members : tr.buffers) {
      std::vector<FieldVector> in_buffer;
      for (std::uint32_t id : members) {
        if (alive[id]) in_buffer.push_back(masked[id]);
      }
      if (in_buffer.empty()) continue;  // whole buffer dropped
      const FieldVector sum = masked_sum(in_buffer);
      tr.buffer_means.push_back(dequantize_mean(
          sum, static_cast<std::uint32_t>(in_buffer.size()), cfg.quant));
    }
  } else {
    // plaintext oracle mode for bit-exact equivalence tests
    for (const auto& members : tr.buffers) {
      ValueArray acc(u, 0.0);
      std::size_t count = 0;
      for (std::uint32_t id : members) {
        if (!alive[id]) continue;
        for (std::size_t j = 0; j < u; ++j) acc[j] += submissions[id][j];
        ++count;
      }
      if (count == 0) continue;
      for (double& x : acc) x /= static_cast<double>(count);
      tr.buffer_means.push_back(std::move(acc));
    }
  }
  if (tr.buffer_means.empty()) {
    throw std::runtime_error("round " + std::to_string(round) +
                             ": all buffers empty");
  }

  // (6) robust aggregation across buffers
  ValueArray agg = apply_aggregator(cfg.aggregator, tr.buffer_means);
  tr.aggregate = SparseUpdate(tr.union_set, agg);

  // (8) global model update
  exp.w -= densify(tr.aggregate, cfg.d);
  if (!exp.w.all_finite()) {
    throw std::runtime_error("round " + std::to_string(round) +
                             ": model diverged (non-finite parameter)");
  }

  // exact communication accounting against the analytical budget
  const double bound = comm_bound_bits(m, cfg.k_total);
  tr.bits_per_client.resize(m);
  for (std::uint32_t k = 0; k < m; ++k) {
    tr.bits_per_client[k] = comm_bits_for_client(proposals[k].size(), u);
    if (static_cast<double>(tr.bits_per_client[k]) > bound) {
      throw std::runtime_error("round " + std::to_string(round) +
                               ": per-client communication bound violated");
    }
  }

  exp.round += 1;
  return tr;
}

std::vector<RoundRecord> run_experiment(const ExperimentConfig& cfg,
                                        const RecordSink& sink, int workers,
                                        const TranscriptSink& transcripts) {
  Experiment exp = setup_experiment(cfg);

  const auto eval_record = [&exp](std::uint32_t round_no) {
    RoundRecord rec;
    rec.round = round_no;
    const EvalResult ev = evaluate(exp.model, exp.w, exp.data.heldout);
    rec.loss = ev.loss;
    rec.accuracy = ev.accuracy;
    return rec;
  };

  if (sink) sink(eval_record(0));

  std::vector<RoundRecord> records;
  records.reserve(cfg.rounds);
  for (std::uint32_t t = 0; t < cfg.rounds; ++t) {
    RoundTranscript tr = run_round(exp, RoundHooks{}, workers);
    RoundRecord rec = eval_record(t + 1);
    rec.bits_per_client =
        *std::max_element(tr.bits_per_client.begin(), tr.bits_per_client.end());
    rec.union_size = static_cast<std::uint32_t>(tr.union_set.size());
    const ValueArray mean_b = mean_values(tr.buffer_means);
    double proxy = 0.0;
    for (std::size_t j = 0; j < mean_b.size(); ++j) {
      const double dv = tr.aggregate.values[j] - mean_b[j];
      proxy += dv * dv;
    }
    rec.agg_error_proxy = std::sqrt(proxy);
    if (transcripts) transcripts(tr);
    if (sink) sink(rec);
    records.push_back(rec);
  }
  return records;
}

}  // namespace fedrep
