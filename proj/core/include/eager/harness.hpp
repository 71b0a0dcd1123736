#pragma once

// SPDX-License-Identifier: Apache-2.0

/**
 * Experiment orchestration: the four decoding regimes, persistence, grid
 * sweeps, report generation and replay verification.
 *
 * Regimes:
 *  - full_parallel: M independent samples per prompt, no branching, no
 *    prefix reuse in the token accounting;
 *  - eager_init:    one branching pass per prompt at cap M;
 *  - eager_adapt:   init pass, then the saved budget is re-spent on
 *    saturating prompts (never reads targets);
 *  - eager_full:    init pass, then the saved budget is re-spent on
 *    prompts with no correct sequence (requires targets), with a 20%
 *    lower threshold for prompts that under-used their budget.
 *
 * A run persists into output_dir/:
 *    manifest.json            config + budget plan + rerun directives
 *    events/<prompt>.jsonl    per-step engine event log
 *    record.json              the self-contained run record
 *    report.txt               the metrics table for this run
 *
 * Replay: report() is a pure function of record.json, and verify_run()
 * re-executes a record's config on its embedded tasks and compares the
 * fresh record byte for byte (timing excluded).
 */

#include <optional>
#include <string>
#include <vector>

#include "eager/bench.hpp"
#include "eager/budget.hpp"
#include "eager/engine.hpp"
#include "eager/evaluation.hpp"

namespace eager {

enum class Regime { full_parallel, eager_init, eager_adapt, eager_full };

std::string to_string(Regime regime);
Regime regime_from_string(const std::string& s);

struct SweepSpec {
  std::vector<double> thetas;
  std::vector<int> Ms;
};

struct RunConfig {
  int format_version = 1;
  Regime regime = Regime::eager_init;
  EngineConfig engine;
  SourceDescriptor source;
  std::optional<BenchSpec> bench;
  std::optional<std::string> tasks_path;
  AnswerExtractorConfig extractor;
  std::optional<SweepSpec> sweep;
  std::string output_dir = "run_out";
  int workers = 1;
};

/// Parse/serialize the declarative config document (JSON, one per run).
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);

/// One persisted sequence of a prompt.
struct SequenceRecord {
  int node_id = 0;
  NodeStatus status = NodeStatus::active;
  TokenList tokens;
  std::optional<double> peak_entropy;  // 99.9th-percentile peak mean
};

struct PromptRunRecord {
  PromptId prompt_id;
  int sequence_count = 0;
  long long new_token_count = 0;
  int branch_event_count = 0;
  std::vector<SequenceRecord> sequences;
  std::optional<std::string> error;  // set when generation failed
};

struct RunRecord {
  int format_version = 1;
  RunConfig config;
  std::vector<PromptTask> tasks;
  std::vector<PromptRunRecord> per_prompt;
  std::optional<BudgetPlan> budget_plan;
  std::vector<RerunDirective> directives;
  std::optional<MetricsReport> metrics;  // absent when targets are missing
  long long total_sequences = 0;
  long long total_new_tokens = 0;
  double wall_ms = 0.0;  // excluded from determinism comparison
};

std::string run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const std::string& text);

struct RunOutput {
  RunRecord record;
  std::vector<GenerationTree> trees;  // final merged trees, for event logs
};

/// Executes a run without touching the filesystem (tasks supplied).
RunOutput execute_run(const RunConfig& config, std::vector<PromptTask> tasks);

/// Loads tasks per the config (bench spec or tasks_path), then executes.
RunOutput execute_run(const RunConfig& config);

/// Writes manifest.json, events/, record.json and report.txt under dir.
void persist_run(const RunOutput& output, const std::string& dir);

/// execute + persist into config.output_dir.
RunRecord run(const RunConfig& config);

struct SweepRow {
  double theta = 0.0;
  int M = 0;
  bool ok = false;
  std::string error;
  double mean_pass_at_k = 0.0;
  double mean_pass_rate = 0.0;
  long long total_new_tokens = 0;
  long long total_sequences = 0;
  bool pareto = false;  // not dominated in (tokens, pass@k)
};

/**
 * One run per (theta, M) grid point over a shared task set and seed.
 * Point outputs land in subdirectories of config.output_dir; a summary
 * table goes to sweep_summary.{txt,json}. Failed points are reported and
 * the rest retained. Throws InvalidInputError when the sweep lists are
 * missing or empty.
 */
std::vector<SweepRow> sweep(const RunConfig& config);

struct ReportResult {
  std::string text;
  std::string summary_json;
};

/**
 * Renders the metrics table (p@k, c@k, PR, #T, #S) for every record found
 * under run_dir (the directory itself or its immediate subdirectories),
 * plus regime-vs-regime token-savings lines. Corrupt records become
 * warning rows, never errors.
 */
ReportResult report(const std::string& run_dir);

/**
 * Re-runs the recorded config on the embedded tasks and compares the
 * fresh record with the stored one byte for byte, ignoring timing.
 * Appends a human-readable explanation to diagnostics on mismatch.
 */
bool verify_run(const std::string& run_dir, std::string* diagnostics = nullptr);

}  // namespace eager
