#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Entropy-triggered branching generation.
 *
 * generate() advances an active set of sequences in lockstep rounds. Each
 * round, every active sequence (in creation order) gets a next-token
 * distribution at the configured temperature and, while entropy monitoring
 * is on, its top-K entropy is recorded. When that entropy reaches the
 * threshold and the per-prompt sequence budget is not exhausted, the
 * sequence is split: it continues greedily with the most likely token and
 * a new branch starts with the second-most-likely one, sharing the whole
 * prefix. Otherwise the sequence samples with temperature + nucleus top-p.
 *
 * Bookkeeping rules:
 *  - a branch created in round t first generates in round t + 1;
 *  - branching stops for good once the tree holds `cap` sequences;
 *  - per sequence, entropy monitoring halts permanently after halt_window
 *    generated steps without any branch event anywhere in the tree;
 *  - branching is only permitted inside the task's reasoning span
 *    (entropy is still recorded outside it, so blocked steps are auditable);
 *  - every generated token is counted exactly once (prefixes shared by
 *    branches are never recounted).
 *
 * Determinism: each node samples from its own stream keyed by
 * (seed, prompt id, node id), so identical (task, config, source, seed)
 * yield bit-identical trees regardless of scheduling.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eager/entropy.hpp"
#include "eager/source.hpp"
#include "eager/task.hpp"

namespace eager {

struct EngineConfig {
  double theta = 2.0;        // entropy threshold, nats
  int M = 16;                // max sequences per prompt
  double temperature = 0.60;
  double top_p = 0.95;
  int K = 20;                // top-K for entropy
  int max_steps = 1024;      // generated-token limit per sequence
  int halt_window = 1000;    // steps without branching before monitoring stops
  int context_cap = 32768;   // full-context length limit
  uint64_t seed = 0;
};

enum class NodeStatus { active, finished_eos, finished_length, finished_context_cap };

std::string to_string(NodeStatus status);

struct SequenceNode {
  int node_id = 0;
  std::optional<int> parent;
  int branch_step = 0;  // absolute index in the full sequence of the first local token
  TokenList local_tokens;
  EntropyTrace local_entropy;  // step indices are generated-token indices (0-based)
  NodeStatus status = NodeStatus::active;
  int creation_index = 0;

  friend bool operator==(const SequenceNode&, const SequenceNode&) = default;
};

struct BranchEventRecord {
  int node_id = 0;  // the sequence that split
  int step = 0;     // generated-token index of the split
  double entropy = 0.0;
  int child_id = 0;

  friend bool operator==(const BranchEventRecord&,
                         const BranchEventRecord&) = default;
};

enum class EngineAction { sample, branch, halt, finish };

std::string to_string(EngineAction action);

/// Reason a step with entropy >= theta did not branch.
enum class BranchBlock { cap, span };

std::string to_string(BranchBlock block);

/// One line of the per-prompt event log.
struct EngineEvent {
  int step = 0;
  int node_id = 0;
  std::optional<double> entropy;  // absent when monitoring was off
  EngineAction action = EngineAction::sample;
  std::optional<BranchBlock> block;  // set when entropy >= theta but no branch
  std::optional<TokenId> token;

  friend bool operator==(const EngineEvent&, const EngineEvent&) = default;
};

/**
 * The branching structure for one prompt. After budget reallocation this
 * may hold several roots (the initial tree plus appended rerun trees);
 * sequence_count then counts nodes across all of them.
 */
struct GenerationTree {
  PromptId prompt_id;
  TokenList prompt_tokens;
  std::vector<SequenceNode> nodes;
  long long new_token_count = 0;  // sum of |local_tokens|, prefixes counted once
  int sequence_count = 0;
  std::vector<BranchEventRecord> branch_events;
  std::vector<EngineEvent> events;

  friend bool operator==(const GenerationTree&,
                         const GenerationTree&) = default;
};

/// A flattened sequence reconstructed from the tree.
struct MaterializedSequence {
  int node_id = 0;
  TokenList tokens;  // prompt ++ generated tokens
  EntropyTrace entropy;
  NodeStatus status = NodeStatus::active;

  friend bool operator==(const MaterializedSequence&,
                         const MaterializedSequence&) = default;
};

/**
 * Runs the branching generation loop for one prompt.
 *
 * `cap` is the sequence budget for this tree (M for initial runs, the
 * reallocated extra for reruns). `node_id_base` offsets node ids so rerun
 * trees get fresh ids and fresh random streams; pass 0 for initial runs.
 */
GenerationTree generate(const PromptTask& task, const EngineConfig& config,
                        const TokenSource& source, int cap,
                        int node_id_base = 0);

/**
 * Flattens a finished tree: one entry per node, tokens and entropy traces
 * reconstructed through the ancestor chain. Throws NotFinishedError if any
 * node is still active.
 */
std::vector<MaterializedSequence> materialize_sequences(
    const GenerationTree& tree);

}  // namespace eager
