// SPDX-License-Identifier: Apache-2.0

#include "eager/bench.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eager/errors.hpp"
#include "eager/rng.hpp"

namespace eager {

using ordered_json = nlohmann::ordered_json;

namespace {

void validate(const BenchSpec& spec) {
  if (spec.n_prompts < 1) {
    throw InvalidInputError("generate_task_set: n_prompts must be >= 1");
  }
  if (spec.difficulty_distribution.empty()) {
    throw InvalidInputError("generate_task_set: empty difficulty mixture");
  }
  double total = 0.0;
  for (const DifficultyWeight& dw : spec.difficulty_distribution) {
    if (dw.difficulty < 0.0 || dw.difficulty > 1.0 || dw.weight < 0.0) {
      throw InvalidInputError("generate_task_set: bad mixture component");
    }
    total += dw.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidInputError("generate_task_set: weights must sum to 1");
  }
  if (spec.reasoning_length_min < 2 ||
      spec.reasoning_length_min > spec.reasoning_length_max) {
    throw InvalidInputError("generate_task_set: bad reasoning length range");
  }
}

double draw_difficulty(const BenchSpec& spec, uint64_t task_seed) {
  const double u =
      static_cast<double>(stable_hash(task_seed, 1) >> 11) * 0x1.0p-53;
  double cum = 0.0;
  for (const DifficultyWeight& dw : spec.difficulty_distribution) {
    cum += dw.weight;
    if (u < cum) return dw.difficulty;
  }
  return spec.difficulty_distribution.back().difficulty;
}

}  // namespace

std::vector<PromptTask> generate_task_set(const BenchSpec& spec) {
  validate(spec);
  std::vector<PromptTask> tasks;
  tasks.reserve(spec.n_prompts);
  for (int i = 0; i < spec.n_prompts; ++i) {
    const uint64_t task_seed = stable_hash(spec.seed, 9000 + i);

    SyntheticShape shape = spec.shape;
    shape.vocab_size = spec.vocab_size;
    const int span =
        spec.reasoning_length_max - spec.reasoning_length_min + 1;
    shape.reasoning_length =
        spec.reasoning_length_min +
        static_cast<int>(stable_hash(task_seed, 2) % span);

    const double difficulty = draw_difficulty(spec, task_seed);
    SyntheticTaskModel model =
        build_synthetic_model(difficulty, task_seed, shape);

    PromptTask task;
    {
      std::ostringstream id;
      id << "p" << std::setw(4) << std::setfill('0') << i;
      task.id = id.str();
    }
    task.prompt_tokens = model.prompt_tokens();
    task.target_answer = model.answer_tokens();
    task.difficulty = difficulty;
    task.span_policy = SpanPolicy::until_delimiter;
    task.span_delimiter = synth_vocab::kDelimiter;
    task.model = std::move(model);
    tasks.push_back(std::move(task));
  }
  return tasks;
}

double expected_pass_probability(const PromptTask& task, int M) {
  if (M < 1) {
    throw InvalidInputError("expected_pass_probability: M must be >= 1");
  }
  if (!task.model) {
    throw UnsupportedError(
        "expected_pass_probability: task has no synthetic model");
  }
  const double q = task.model->per_sample_success();
  return 1.0 - std::pow(1.0 - q, M);
}

std::string task_to_json_line(const PromptTask& task) {
  ordered_json doc;
  doc["format_version"] = 1;
  doc["prompt_id"] = task.id;
  doc["prompt_tokens"] = task.prompt_tokens;
  if (task.target_answer) doc["target"] = *task.target_answer;
  doc["difficulty"] = task.difficulty;
  doc["span_policy"] = task.span_policy == SpanPolicy::until_delimiter
                           ? "until_delimiter"
                           : "whole_output";
  if (task.span_delimiter) doc["span_delimiter"] = *task.span_delimiter;
  if (task.model) {
    const SyntheticTaskModel& m = *task.model;
    ordered_json shape;
    shape["vocab_size"] = m.shape().vocab_size;
    shape["reasoning_length"] = m.shape().reasoning_length;
    shape["distractor_entropy"] = m.shape().distractor_entropy;
    shape["fork_count"] = m.shape().fork_count;
    shape["answer_length"] = m.shape().answer_length;
    shape["deception_scale"] = m.shape().deception_scale;
    shape["deception_exponent"] = m.shape().deception_exponent;
    shape["prompt_length"] = m.shape().prompt_length;
    if (m.shape().fork_success_override) {
      shape["fork_success_override"] = *m.shape().fork_success_override;
    }
    doc["model"] = {{"difficulty", m.difficulty()},
                    {"seed", m.seed()},
                    {"shape", shape}};
  }
  return doc.dump();
}

PromptTask task_from_json_line(const std::string& line) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(line);
  } catch (const ordered_json::exception& e) {
    throw ParseError(std::string("task line is not JSON: ") + e.what());
  }
  PromptTask task;
  task.id = doc.at("prompt_id").get<std::string>();
  task.prompt_tokens = doc.at("prompt_tokens").get<TokenList>();
  if (doc.contains("target")) task.target_answer = doc["target"].get<TokenList>();
  task.difficulty = doc.value("difficulty", 0.0);
  task.span_policy = doc.value("span_policy", std::string("whole_output")) ==
                             "until_delimiter"
                         ? SpanPolicy::until_delimiter
                         : SpanPolicy::whole_output;
  if (doc.contains("span_delimiter")) {
    task.span_delimiter = doc["span_delimiter"].get<TokenId>();
  }
  if (doc.contains("model")) {
    const ordered_json& m = doc["model"];
    const ordered_json& s = m.at("shape");
    SyntheticShape shape;
    shape.vocab_size = s.value("vocab_size", shape.vocab_size);
    shape.reasoning_length = s.value("reasoning_length", shape.reasoning_length);
    shape.distractor_entropy =
        s.value("distractor_entropy", shape.distractor_entropy);
    shape.fork_count = s.value("fork_count", shape.fork_count);
    shape.answer_length = s.value("answer_length", shape.answer_length);
    shape.deception_scale = s.value("deception_scale", shape.deception_scale);
    shape.deception_exponent =
        s.value("deception_exponent", shape.deception_exponent);
    shape.prompt_length = s.value("prompt_length", shape.prompt_length);
    if (s.contains("fork_success_override")) {
      shape.fork_success_override = s["fork_success_override"].get<double>();
    }
    task.model = build_synthetic_model(m.at("difficulty").get<double>(),
                                       m.at("seed").get<uint64_t>(), shape);
  }
  return task;
}

void save_task_set_jsonl(const std::vector<PromptTask>& tasks,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write task set: " + path);
  for (const PromptTask& task : tasks) {
    out << task_to_json_line(task) << '\n';
  }
}

std::vector<PromptTask> load_task_set_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read task set: " + path);
  std::vector<PromptTask> tasks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    tasks.push_back(task_from_json_line(line));
  }
  if (tasks.empty()) {
    throw InvalidInputError("task set is empty: " + path);
  }
  return tasks;
}

}  // namespace eager
