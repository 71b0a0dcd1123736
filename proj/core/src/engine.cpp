// SPDX-License-Identifier: Apache-2.0

#include "eager/engine.hpp"

#include <algorithm>
#include <unordered_map>

#include "eager/errors.hpp"
#include "eager/rng.hpp"
#include "eager/sampling.hpp"

namespace eager {

std::string to_string(NodeStatus status) {
  switch (status) {
    case NodeStatus::active: return "active";
    case NodeStatus::finished_eos: return "finished_eos";
    case NodeStatus::finished_length: return "finished_length";
    case NodeStatus::finished_context_cap: return "finished_context_cap";
  }
  return "active";
}

std::string to_string(EngineAction action) {
  switch (action) {
    case EngineAction::sample: return "sample";
    case EngineAction::branch: return "branch";
    case EngineAction::halt: return "halt";
    case EngineAction::finish: return "finish";
  }
  return "sample";
}

std::string to_string(BranchBlock block) {
  switch (block) {
    case BranchBlock::cap: return "cap";
    case BranchBlock::span: return "span";
  }
  return "cap";
}

namespace {

// Mutable per-sequence state; the tree node holds the durable record.
struct Slot {
  size_t node_index = 0;
  TokenList context;  // prompt ++ generated tokens, kept current
  RandomStream stream{0};
  bool halted = false;
  int steps_since_branch = 0;
  bool span_open = true;
};

void validate(const PromptTask& task, const EngineConfig& config, int cap) {
  if (cap < 1) throw InvalidInputError("generate: cap must be >= 1");
  if (!(config.theta > 0.0)) {
    throw InvalidInputError("generate: theta must be positive");
  }
  if (!(config.temperature > 0.0)) {
    throw InvalidInputError("generate: temperature must be positive");
  }
  if (!(config.top_p > 0.0) || config.top_p > 1.0) {
    throw InvalidInputError("generate: top_p must be in (0, 1]");
  }
  if (config.K < 1) throw InvalidInputError("generate: K must be >= 1");
  if (config.max_steps < 1) {
    throw InvalidInputError("generate: max_steps must be >= 1");
  }
  if (config.halt_window < 1) {
    throw InvalidInputError("generate: halt_window must be >= 1");
  }
  if (task.prompt_tokens.empty()) {
    throw InvalidInputError("generate: prompt must be non-empty");
  }
  if (task.span_policy == SpanPolicy::until_delimiter &&
      !task.span_delimiter) {
    throw InvalidInputError(
        "generate: until_delimiter policy needs a delimiter token");
  }
}

}  // namespace

GenerationTree generate(const PromptTask& task, const EngineConfig& config,
                        const TokenSource& source, int cap, int node_id_base) {
  validate(task, config, cap);

  GenerationTree tree;
  tree.prompt_id = task.id;
  tree.prompt_tokens = task.prompt_tokens;

  const TokenId eos = source.eos_token();
  const int prompt_len = static_cast<int>(task.prompt_tokens.size());

  std::vector<Slot> slots;
  std::vector<size_t> active;  // slot indices in creation order
  int created = 0;

  auto new_node = [&](std::optional<int> parent, int branch_step) -> size_t {
    SequenceNode node;
    node.node_id = node_id_base + created;
    node.parent = parent;
    node.branch_step = branch_step;
    node.creation_index = created;
    ++created;
    tree.nodes.push_back(std::move(node));
    return tree.nodes.size() - 1;
  };

  auto finish = [&](size_t slot_idx, NodeStatus status) {
    Slot& slot = slots[slot_idx];
    SequenceNode& node = tree.nodes[slot.node_index];
    node.status = status;
    tree.events.push_back({static_cast<int>(slot.context.size()) - prompt_len,
                           node.node_id, std::nullopt, EngineAction::finish,
                           std::nullopt, std::nullopt});
  };

  // Root.
  {
    const size_t node_index = new_node(std::nullopt, prompt_len);
    Slot root;
    root.node_index = node_index;
    root.context = task.prompt_tokens;
    root.stream = RandomStream::keyed(config.seed, task.id,
                                      tree.nodes[node_index].node_id);
    slots.push_back(std::move(root));
    active.push_back(0);
  }

  for (int round = 1; round <= config.max_steps && !active.empty(); ++round) {
    // Branches created during this round join `active` but first generate
    // next round; iterate over a snapshot.
    const std::vector<size_t> snapshot = active;
    for (size_t slot_idx : snapshot) {
      Slot& slot = slots[slot_idx];
      SequenceNode& node = tree.nodes[slot.node_index];
      if (node.status != NodeStatus::active) continue;

      if (static_cast<int>(slot.context.size()) >= config.context_cap) {
        finish(slot_idx, NodeStatus::finished_context_cap);
        continue;
      }

      const int step = static_cast<int>(slot.context.size()) - prompt_len;

      TokenDistribution dist;
      try {
        dist = source.next_distribution(slot.context, config.temperature);
      } catch (const Error& e) {
        throw Error("generate: prompt '" + task.id + "' node " +
                    std::to_string(node.node_id) + " step " +
                    std::to_string(step) + ": " + e.what());
      }

      if (!slot.halted && slot.steps_since_branch >= config.halt_window) {
        slot.halted = true;
        tree.events.push_back({step, node.node_id, std::nullopt,
                               EngineAction::halt, std::nullopt,
                               std::nullopt});
      }

      std::optional<double> entropy;
      if (!slot.halted) {
        entropy = top_k_entropy(dist, config.K);
        node.local_entropy.push_back({step, *entropy});
      }

      bool branch_now = false;
      std::optional<BranchBlock> block;
      if (entropy && *entropy >= config.theta) {
        if (created >= cap) {
          block = BranchBlock::cap;
        } else if (!slot.span_open) {
          block = BranchBlock::span;
        } else if (dist.size() >= 2) {
          branch_now = true;
        }
      }

      if (branch_now) {
        const auto [greedy_tok, alt_tok] = branch_split(dist);

        const size_t child_node_index =
            new_node(node.node_id, prompt_len + step);
        SequenceNode& child_node = tree.nodes[child_node_index];
        // `node` may dangle after push_back in new_node; re-resolve.
        SequenceNode& parent_node = tree.nodes[slot.node_index];

        tree.events.push_back({step, parent_node.node_id, entropy,
                               EngineAction::branch, std::nullopt,
                               greedy_tok});
        tree.branch_events.push_back(
            {parent_node.node_id, step, *entropy, child_node.node_id});

        Slot child;
        child.node_index = child_node_index;
        child.context = slot.context;
        child.context.push_back(alt_tok);
        child.stream = RandomStream::keyed(config.seed, task.id,
                                           child_node.node_id);
        child.span_open = slot.span_open;
        child_node.local_tokens.push_back(alt_tok);

        parent_node.local_tokens.push_back(greedy_tok);
        slot.context.push_back(greedy_tok);

        // Any branch re-arms every sequence's halt countdown.
        for (size_t idx : active) slots[idx].steps_since_branch = 0;
        child.steps_since_branch = 0;

        if (task.span_policy == SpanPolicy::until_delimiter) {
          if (greedy_tok == *task.span_delimiter) slot.span_open = false;
          if (alt_tok == *task.span_delimiter) child.span_open = false;
        }

        slots.push_back(std::move(child));
        const size_t child_slot = slots.size() - 1;
        active.push_back(child_slot);

        if (alt_tok == eos) {
          finish(child_slot, NodeStatus::finished_eos);
          active.pop_back();
        }
        if (greedy_tok == eos) {
          finish(slot_idx, NodeStatus::finished_eos);
        }
      } else {
        TokenId token;
        try {
          token = sample_token(dist, config.top_p, slot.stream);
        } catch (const Error& e) {
          throw Error("generate: prompt '" + task.id + "' node " +
                      std::to_string(node.node_id) + " step " +
                      std::to_string(step) + ": " + e.what());
        }
        tree.events.push_back({step, node.node_id, entropy,
                               EngineAction::sample, block, token});
        node.local_tokens.push_back(token);
        slot.context.push_back(token);
        slot.steps_since_branch += 1;

        if (task.span_policy == SpanPolicy::until_delimiter &&
            token == *task.span_delimiter) {
          slot.span_open = false;
        }
        if (token == eos) {
          finish(slot_idx, NodeStatus::finished_eos);
        }
      }
    }

    // Drop finished sequences, preserving creation order.
    std::erase_if(active, [&](size_t idx) {
      return tree.nodes[slots[idx].node_index].status != NodeStatus::active;
    });
  }

  for (size_t idx : active) finish(idx, NodeStatus::finished_length);

  tree.sequence_count = static_cast<int>(tree.nodes.size());
  tree.new_token_count = 0;
  for (const SequenceNode& node : tree.nodes) {
    tree.new_token_count += static_cast<long long>(node.local_tokens.size());
  }
  return tree;
}

std::vector<MaterializedSequence> materialize_sequences(
    const GenerationTree& tree) {
  std::unordered_map<int, size_t> index_of;
  index_of.reserve(tree.nodes.size());
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].status == NodeStatus::active) {
      throw NotFinishedError("materialize_sequences: tree has active nodes");
    }
    index_of[tree.nodes[i].node_id] = i;
  }

  const int prompt_len = static_cast<int>(tree.prompt_tokens.size());

  // Parents always precede children, so one forward pass suffices.
  std::vector<TokenList> generated(tree.nodes.size());
  std::vector<EntropyTrace> traces(tree.nodes.size());
  std::vector<MaterializedSequence> out;
  out.reserve(tree.nodes.size());

  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    const SequenceNode& node = tree.nodes[i];
    if (node.parent) {
      auto it = index_of.find(*node.parent);
      if (it == index_of.end() || it->second >= i) {
        throw InvalidInputError("materialize_sequences: malformed tree");
      }
      const size_t p = it->second;
      const int shared = node.branch_step - prompt_len;
      generated[i].assign(generated[p].begin(),
                          generated[p].begin() + shared);
      generated[i].insert(generated[i].end(), node.local_tokens.begin(),
                          node.local_tokens.end());
      // The branch-step distribution produced this node's first token, so
      // the parent's entropy at that step belongs to this trace too.
      for (const EntropyObservation& o : traces[p]) {
        if (o.step <= shared) traces[i].push_back(o);
      }
      traces[i].insert(traces[i].end(), node.local_entropy.begin(),
                       node.local_entropy.end());
    } else {
      generated[i] = node.local_tokens;
      traces[i] = node.local_entropy;
    }

    MaterializedSequence seq;
    seq.node_id = node.node_id;
    seq.tokens = tree.prompt_tokens;
    seq.tokens.insert(seq.tokens.end(), generated[i].begin(),
                      generated[i].end());
    seq.entropy = traces[i];
    seq.status = node.status;
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace eager
