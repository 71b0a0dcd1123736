#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Surplus accounting and budget reallocation.
 *
 * An initial branching pass usually produces fewer sequences than the
 * theoretical M * |dataset| allowance. The difference is the surplus, and
 * it can be re-spent in one reallocation round on either
 *
 *  - saturating prompts (those that hit the M cap), when no targets are
 *    available ("adapt" mode), or
 *  - failing prompts (no correct sequence), when targets are available
 *    ("full" mode), where prompts that under-used their budget rerun with
 *    a 20% lower entropy threshold and saturating ones rerun at the same
 *    threshold with a larger cap.
 *
 * The per-prompt extra is min(floor(surplus / targets), 2M); additions are
 * bounded by the extra so the post-reallocation total can never exceed the
 * theoretical budget.
 */

#include <map>
#include <set>
#include <string>
#include <vector>

#include "eager/engine.hpp"
#include "eager/types.hpp"

namespace eager {

enum class ReallocationMode { unset, adapt, full };

std::string to_string(ReallocationMode mode);

struct BudgetPlan {
  int M = 0;
  int dataset_size = 0;
  long long M_theoretical = 0;  // M * dataset_size
  long long M_actual = 0;       // total sequences produced by the initial pass
  long long surplus = 0;        // max(M_theoretical - M_actual, 0)
  std::map<PromptId, int> per_prompt_extra;
  ReallocationMode mode = ReallocationMode::unset;
};

enum class RerunReason { saturating, underutilizing };

std::string to_string(RerunReason reason);

struct RerunDirective {
  PromptId prompt_id;
  int new_cap = 0;      // nominal per-prompt allowance: M + extra
  int extra = 0;        // additional sequences this rerun may produce
  double new_theta = 0; // threshold for the rerun
  RerunReason reason = RerunReason::saturating;
};

/// Per-prompt sequence counts from an initial pass, in dataset order.
using SequenceCounts = std::vector<std::pair<PromptId, int>>;

/**
 * Computes the budget plan for an initial pass. per_prompt_extra is left
 * empty and mode unset. Throws InvalidInputError for empty results or a
 * non-positive count.
 */
BudgetPlan compute_surplus(int M, const SequenceCounts& results);

/// Prompts whose initial pass hit the cap exactly (sequence_count == M).
std::set<PromptId> select_adapt_targets(const SequenceCounts& results, int M);

/**
 * Prompts with no correct sequence. `correct_counts` maps prompt id to the
 * number of verified-correct sequences; every prompt in `results` must be
 * present (a missing target is an input error).
 */
std::set<PromptId> select_full_targets(
    const SequenceCounts& results,
    const std::map<PromptId, int>& correct_counts);

/**
 * Splits the surplus uniformly over the targets and emits one rerun
 * directive per target. Fills plan.per_prompt_extra and plan.mode.
 * Returns an empty list when there is nothing to allocate (no surplus,
 * no targets, or a zero per-target share).
 */
std::vector<RerunDirective> allocate(BudgetPlan& plan,
                                     const std::set<PromptId>& target_ids,
                                     const SequenceCounts& results,
                                     double base_theta,
                                     ReallocationMode mode);

/**
 * Appends a rerun tree's nodes to the initial tree for the same prompt.
 * Counts are summed; node ids must not collide (reruns are generated with
 * an id offset). Throws InvalidInputError on prompt mismatch.
 */
GenerationTree merge_reruns(GenerationTree initial,
                            const GenerationTree& rerun);

}  // namespace eager
