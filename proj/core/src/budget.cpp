// SPDX-License-Identifier: Apache-2.0

#include "eager/budget.hpp"

#include <algorithm>

#include "eager/errors.hpp"

namespace eager {

std::string to_string(ReallocationMode mode) {
  switch (mode) {
    case ReallocationMode::unset: return "unset";
    case ReallocationMode::adapt: return "adapt";
    case ReallocationMode::full: return "full";
  }
  return "unset";
}

std::string to_string(RerunReason reason) {
  switch (reason) {
    case RerunReason::saturating: return "saturating";
    case RerunReason::underutilizing: return "underutilizing";
  }
  return "saturating";
}

BudgetPlan compute_surplus(int M, const SequenceCounts& results) {
  if (M < 1) throw InvalidInputError("compute_surplus: M must be >= 1");
  if (results.empty()) {
    throw InvalidInputError("compute_surplus: no results");
  }
  BudgetPlan plan;
  plan.M = M;
  plan.dataset_size = static_cast<int>(results.size());
  plan.M_theoretical =
      static_cast<long long>(M) * static_cast<long long>(plan.dataset_size);
  plan.M_actual = 0;
  for (const auto& [id, count] : results) {
    if (count < 1) {
      throw InvalidInputError("compute_surplus: sequence count must be >= 1 for '" +
                              id + "'");
    }
    plan.M_actual += count;
  }
  plan.surplus = std::max<long long>(plan.M_theoretical - plan.M_actual, 0);
  return plan;
}

std::set<PromptId> select_adapt_targets(const SequenceCounts& results, int M) {
  std::set<PromptId> targets;
  for (const auto& [id, count] : results) {
    if (count == M) targets.insert(id);
  }
  return targets;
}

std::set<PromptId> select_full_targets(
    const SequenceCounts& results,
    const std::map<PromptId, int>& correct_counts) {
  std::set<PromptId> targets;
  for (const auto& [id, count] : results) {
    auto it = correct_counts.find(id);
    if (it == correct_counts.end()) {
      throw InvalidInputError("select_full_targets: missing target for '" + id +
                              "'");
    }
    if (it->second == 0) targets.insert(id);
  }
  return targets;
}

std::vector<RerunDirective> allocate(BudgetPlan& plan,
                                     const std::set<PromptId>& target_ids,
                                     const SequenceCounts& results,
                                     double base_theta,
                                     ReallocationMode mode) {
  if (mode == ReallocationMode::unset) {
    throw InvalidInputError("allocate: mode must be adapt or full");
  }
  plan.mode = mode;
  plan.per_prompt_extra.clear();
  if (target_ids.empty() || plan.surplus <= 0) return {};

  const long long share =
      plan.surplus / static_cast<long long>(target_ids.size());
  const int extra = static_cast<int>(
      std::min<long long>(share, 2LL * static_cast<long long>(plan.M)));
  if (extra <= 0) return {};

  std::map<PromptId, int> counts;
  for (const auto& [id, count] : results) counts[id] = count;

  std::vector<RerunDirective> directives;
  directives.reserve(target_ids.size());
  for (const PromptId& id : target_ids) {
    auto it = counts.find(id);
    if (it == counts.end()) {
      throw InvalidInputError("allocate: unknown target prompt '" + id + "'");
    }
    RerunDirective d;
    d.prompt_id = id;
    d.extra = extra;
    d.new_cap = plan.M + extra;
    if (mode == ReallocationMode::full && it->second < plan.M) {
      d.reason = RerunReason::underutilizing;
      d.new_theta = 0.8 * base_theta;
    } else {
      d.reason = RerunReason::saturating;
      d.new_theta = base_theta;
    }
    plan.per_prompt_extra[id] = extra;
    directives.push_back(std::move(d));
  }
  return directives;
}

GenerationTree merge_reruns(GenerationTree initial,
                            const GenerationTree& rerun) {
  if (initial.prompt_id != rerun.prompt_id) {
    throw InvalidInputError("merge_reruns: prompt mismatch ('" +
                            initial.prompt_id + "' vs '" + rerun.prompt_id +
                            "')");
  }
  initial.nodes.insert(initial.nodes.end(), rerun.nodes.begin(),
                       rerun.nodes.end());
  initial.branch_events.insert(initial.branch_events.end(),
                               rerun.branch_events.begin(),
                               rerun.branch_events.end());
  initial.events.insert(initial.events.end(), rerun.events.begin(),
                        rerun.events.end());
  initial.new_token_count += rerun.new_token_count;
  initial.sequence_count += rerun.sequence_count;
  return initial;
}

}  // namespace eager
