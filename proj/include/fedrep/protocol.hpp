#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fedrep/client.hpp"
#include "fedrep/config.hpp"
#include "fedrep/core.hpp"
#include "fedrep/harness.hpp"
#include "fedrep/robust_agg.hpp"

namespace fedrep {

// One line of the metrics stream.
struct RoundRecord {
  std::uint32_t round = 0;  // 0 = initial evaluation before training
  double loss = 0.0;
  double accuracy = 0.0;
  std::uint64_t bits_per_client = 0;
  std::uint32_t union_size = 0;
  double agg_error_proxy = 0.0;  // |Agg - mean of buffer means|
};

// Full per-round trace for replay debugging.
struct RoundTranscript {
  std::uint32_t round = 0;
  CoordinateSet union_set;
  std::vector<std::uint32_t> permutation;
  std::vector<std::vector<std::uint32_t>> buffers;  // sorted member ids
  std::vector<ValueArray> buffer_means;
  SparseUpdate aggregate;
  std::vector<std::uint64_t> bits_per_client;
  std::vector<std::uint32_t> rejected_proposals;   // malformed coord sets
  std::vector<std::uint32_t> dropped_submissions;  // malformed value arrays
};

// Test instrumentation. poison_plaintexts fires after masked submissions
// are built and memories are updated, before the server-side summation;
// scribbling over the staged plaintexts there must not change the round
// (the server reads only masked data). The tamper hooks inject malformed
// wire data ahead of server-side validation.
struct RoundHooks {
  std::function<void(std::vector<ValueArray>&)> poison_plaintexts;
  std::function<void(std::uint32_t, CoordinateSet&)> tamper_proposal;
  std::function<void(std::uint32_t, ValueArray&)> tamper_submission;
};

struct Experiment {
  ExperimentConfig cfg;
  Model model;
  Dataset data;
  DenseVector w;
  std::vector<ClientState> clients;
  std::uint32_t round = 0;  // next round to run, 0-based
};

// Generates data, builds the model, initializes weights and client
// states. Clients 0..byz_count-1 are the Byzantine ones.
Experiment setup_experiment(const ExperimentConfig& cfg);

// Executes one FedREP round: local training, coordinate exchange,
// buffer assignment, in-buffer secure summation, cross-buffer robust
// aggregation, memory update, model update. Deterministic for a fixed
// master_seed regardless of the worker count.
RoundTranscript run_round(Experiment& exp, const RoundHooks& hooks = {},
                          int workers = 1);

// Per-client communication: |I_k| integers sent, |I^t| integers
// received, |I^t| values sent, |I^t| values received, 32 bits each.
std::uint64_t comm_bits_for_client(std::size_t proposal_size,
                                   std::size_t union_size);
// (96 + 32/m) * K
double comm_bound_bits(std::uint32_t m, std::uint32_t k_total);

using RecordSink = std::function<void(const RoundRecord&)>;
using TranscriptSink = std::function<void(const RoundTranscript&)>;

// Runs T rounds with per-round held-out evaluation. The sink receives
// the initial evaluation (round 0) followed by one record per round;
// the returned sequence holds the per-round records only.
std::vector<RoundRecord> run_experiment(const ExperimentConfig& cfg,
                                        const RecordSink& sink = {},
                                        int workers = 1,
                                        const TranscriptSink& transcripts = {});

}  // namespace fedrep
