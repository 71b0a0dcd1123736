#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Seeded benchmark generation: families of verifiable synthetic tasks with
 * a controllable difficulty mixture. Task sets round-trip through JSONL so
 * runs are replayable without the generator.
 */

#include <string>
#include <vector>

#include "eager/task.hpp"

namespace eager {

struct DifficultyWeight {
  double difficulty = 0.0;  // in [0, 1]
  double weight = 0.0;      // weights sum to 1

  friend bool operator==(const DifficultyWeight&,
                         const DifficultyWeight&) = default;
};

struct BenchSpec {
  int n_prompts = 0;
  std::vector<DifficultyWeight> difficulty_distribution;
  int reasoning_length_min = 24;
  int reasoning_length_max = 48;
  int32_t vocab_size = 64;
  uint64_t seed = 0;
  SyntheticShape shape;  // per-task template; length/vocab fields overridden
};

/**
 * Builds n_prompts tasks with difficulties drawn from the mixture, fully
 * determined by the spec seed. Throws InvalidInputError on a malformed
 * spec (no prompts, bad weights, inverted length range).
 */
std::vector<PromptTask> generate_task_set(const BenchSpec& spec);

/**
 * Closed-form probability that at least one of M independent tau = 1,
 * top_p = 1 samples hits the correct answer: 1 - (1 - q)^M with q the
 * product of the task model's per-fork success probabilities.
 * Throws UnsupportedError for tasks without a synthetic model.
 */
double expected_pass_probability(const PromptTask& task, int M);

/// JSONL export/import. One task per line; see README for the schema.
void save_task_set_jsonl(const std::vector<PromptTask>& tasks,
                         const std::string& path);
std::vector<PromptTask> load_task_set_jsonl(const std::string& path);

/// Serialization used both by the JSONL files and by run records.
std::string task_to_json_line(const PromptTask& task);
PromptTask task_from_json_line(const std::string& line);

}  // namespace eager
