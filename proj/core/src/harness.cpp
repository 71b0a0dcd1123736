// SPDX-License-Identifier: Apache-2.0

#include "eager/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "eager/errors.hpp"
#include "eager/remote.hpp"
#include "report_internal.hpp"
#include "serialization.hpp"

namespace fs = std::filesystem;

namespace eager {

using detail::ojson;

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::full_parallel: return "full_parallel";
    case Regime::eager_init: return "eager_init";
    case Regime::eager_adapt: return "eager_adapt";
    case Regime::eager_full: return "eager_full";
  }
  return "eager_init";
}

Regime regime_from_string(const std::string& s) {
  if (s == "full_parallel") return Regime::full_parallel;
  if (s == "eager_init") return Regime::eager_init;
  if (s == "eager_adapt") return Regime::eager_adapt;
  if (s == "eager_full") return Regime::eager_full;
  throw InvalidInputError("unknown regime: " + s);
}

RunConfig run_config_from_json(const std::string& text) {
  try {
    return detail::run_config_from(ojson::parse(text));
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("run config is not valid JSON: ") + e.what());
  }
}

std::string run_config_to_json(const RunConfig& config) {
  return detail::run_config_json(config).dump(2);
}

std::string run_record_to_json(const RunRecord& record) {
  return detail::run_record_json(record).dump(2);
}

RunRecord run_record_from_json(const std::string& text) {
  try {
    return detail::run_record_from(ojson::parse(text));
  } catch (const ojson::exception& e) {
    throw ParseError(std::string("run record is not valid JSON: ") + e.what());
  }
}

namespace {

// ---------------------------------------------------------------------------
// Sources
// ---------------------------------------------------------------------------

struct SourceBundle {
  std::shared_ptr<TokenSource> shared;  // scripted or remote backends

  const TokenSource& for_task(const PromptTask& task) const {
    if (shared) return *shared;
    if (!task.model) {
      throw InvalidInputError("task '" + task.id +
                              "' has no synthetic model and the source is "
                              "synthetic");
    }
    return *task.model;
  }
};

SourceBundle make_sources(const RunConfig& config) {
  SourceBundle bundle;
  const ojson params = ojson::parse(config.source.params_json);
  switch (config.source.kind) {
    case SourceKind::synthetic:
      break;  // per-task models
    case SourceKind::scripted: {
      if (!params.contains("fixture_path")) {
        throw InvalidInputError(
            "scripted source needs params.fixture_path in the config");
      }
      bundle.shared = std::make_shared<ScriptedModel>(
          ScriptedModel::load(params["fixture_path"].get<std::string>()));
      break;
    }
    case SourceKind::remote: {
      RemoteEndpoint ep;
      ep.base_url = params.value("base_url", std::string());
      ep.model_name = params.value("model_name", std::string());
      ep.top_logprobs = params.value("top_logprobs", ep.top_logprobs);
      ep.timeout_ms = params.value("timeout_ms", ep.timeout_ms);
      ep.retry_limit = params.value("retry_limit", ep.retry_limit);
      ep.initial_backoff_ms =
          params.value("initial_backoff_ms", ep.initial_backoff_ms);
      ep.max_concurrent = params.value("max_concurrent", ep.max_concurrent);
      ep.context_window = params.value("context_window", ep.context_window);
      ep.vocab_size = config.source.vocab_size;
      ep.eos_token = config.source.eos_token;
      ep.path = params.value("path", ep.path);
      ep.body_template = params.value("body_template", ep.body_template);
      ep.response_logprobs_path =
          params.value("response_logprobs_path", ep.response_logprobs_path);
      if (const char* key = std::getenv("EAGER_API_KEY")) ep.api_key = key;
      if (ep.base_url.empty()) {
        throw InvalidInputError("remote source needs params.base_url");
      }
      bundle.shared = std::make_shared<RemoteSource>(std::move(ep));
      break;
    }
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Tiny worker pool: deterministic results, first exception rethrown.
// ---------------------------------------------------------------------------

void parallel_for(int n, int workers,
                  const std::function<void(int)>& body) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// Run execution
// ---------------------------------------------------------------------------

GenerationTree generate_for_prompt(const PromptTask& task,
                                   const EngineConfig& engine,
                                   const TokenSource& source, Regime regime) {
  if (regime == Regime::full_parallel) {
    // M independent single-sequence passes; the cap of 1 disables
    // branching, so theta never matters. Each sample gets its own node id
    // and therefore its own random stream.
    GenerationTree combined = generate(task, engine, source, 1, 0);
    for (int k = 1; k < engine.M; ++k) {
      combined = merge_reruns(std::move(combined),
                              generate(task, engine, source, 1, k));
    }
    return combined;
  }
  return generate(task, engine, source, engine.M, 0);
}

std::optional<double> sequence_peak(const EntropyTrace& trace) {
  if (trace.empty()) return std::nullopt;
  return peak_entropy_mean(trace, 99.9).peak_mean;
}

PromptRunRecord summarize_prompt(const PromptTask& task,
                                 const GenerationTree& tree) {
  PromptRunRecord entry;
  entry.prompt_id = task.id;
  entry.sequence_count = tree.sequence_count;
  entry.new_token_count = tree.new_token_count;
  entry.branch_event_count = static_cast<int>(tree.branch_events.size());
  for (const MaterializedSequence& seq : materialize_sequences(tree)) {
    entry.sequences.push_back(
        {seq.node_id, seq.status, seq.tokens, sequence_peak(seq.entropy)});
  }
  return entry;
}

bool all_tasks_have_targets(const std::vector<PromptTask>& tasks) {
  for (const PromptTask& task : tasks) {
    if (!task.target_answer) return false;
  }
  return true;
}

std::vector<TokenList> sequence_tokens(const PromptRunRecord& entry) {
  std::vector<TokenList> out;
  out.reserve(entry.sequences.size());
  for (const SequenceRecord& s : entry.sequences) out.push_back(s.tokens);
  return out;
}

}  // namespace

RunOutput execute_run(const RunConfig& config,
                      std::vector<PromptTask> tasks) {
  if (tasks.empty()) throw InvalidInputError("execute_run: no tasks");
  if (config.regime == Regime::eager_full && !all_tasks_have_targets(tasks)) {
    throw InvalidInputError("eager_full requires a target for every prompt");
  }
  const auto started = std::chrono::steady_clock::now();

  const SourceBundle sources = make_sources(config);
  const TokenId eos = config.source.eos_token;
  const int n = static_cast<int>(tasks.size());

  // Initial pass (or the whole run for full_parallel / eager_init).
  std::vector<GenerationTree> trees(n);
  std::vector<std::optional<std::string>> errors(n);
  parallel_for(n, config.workers, [&](int i) {
    try {
      trees[i] = generate_for_prompt(tasks[i], config.engine,
                                     sources.for_task(tasks[i]),
                                     config.regime);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  RunRecord record;
  record.config = config;

  // Budget accounting and reallocation.
  const bool reallocates = config.regime == Regime::eager_adapt ||
                           config.regime == Regime::eager_full;
  SequenceCounts counts;
  for (int i = 0; i < n; ++i) {
    if (!errors[i]) counts.emplace_back(tasks[i].id, trees[i].sequence_count);
  }
  if (config.regime != Regime::full_parallel && !counts.empty()) {
    record.budget_plan = compute_surplus(config.engine.M, counts);
  }

  if (reallocates && record.budget_plan) {
    std::set<PromptId> targets;
    if (config.regime == Regime::eager_adapt) {
      // Selection reads sequence counts only; targets never enter here.
      targets = select_adapt_targets(counts, config.engine.M);
    } else {
      std::map<PromptId, int> correct_counts;
      for (int i = 0; i < n; ++i) {
        if (errors[i]) continue;
        const PromptEvaluation eval = evaluate_prompt(
            tasks[i].id, sequence_tokens(summarize_prompt(tasks[i], trees[i])),
            *tasks[i].target_answer, eos, config.extractor);
        int correct = 0;
        for (bool flag : eval.correct_flags) correct += flag ? 1 : 0;
        correct_counts[tasks[i].id] = correct;
      }
      targets = select_full_targets(counts, correct_counts);
    }

    record.directives =
        allocate(*record.budget_plan, targets, counts, config.engine.theta,
                 config.regime == Regime::eager_adapt
                     ? ReallocationMode::adapt
                     : ReallocationMode::full);

    std::map<PromptId, int> index_of;
    for (int i = 0; i < n; ++i) index_of[tasks[i].id] = i;

    std::vector<GenerationTree> reruns(record.directives.size());
    parallel_for(
        static_cast<int>(record.directives.size()), config.workers,
        [&](int d) {
          const RerunDirective& directive = record.directives[d];
          const int i = index_of.at(directive.prompt_id);
          EngineConfig rerun_engine = config.engine;
          rerun_engine.theta = directive.new_theta;
          // Additions are bounded by the reallocated extra; node ids start
          // past the initial tree so rerun streams are fresh.
          reruns[d] = generate(
              tasks[i], rerun_engine, sources.for_task(tasks[i]),
              directive.extra, static_cast<int>(trees[i].nodes.size()));
        });
    for (size_t d = 0; d < reruns.size(); ++d) {
      const int i = index_of.at(record.directives[d].prompt_id);
      trees[i] = merge_reruns(std::move(trees[i]), reruns[d]);
    }
  }

  // Summaries.
  for (int i = 0; i < n; ++i) {
    if (errors[i]) {
      PromptRunRecord failed;
      failed.prompt_id = tasks[i].id;
      failed.error = errors[i];
      record.per_prompt.push_back(std::move(failed));
    } else {
      record.per_prompt.push_back(summarize_prompt(tasks[i], trees[i]));
      record.total_sequences += trees[i].sequence_count;
      record.total_new_tokens += trees[i].new_token_count;
    }
  }

  // Metrics (post-hoc; decisions above never read them).
  if (all_tasks_have_targets(tasks)) {
    std::vector<PromptEvaluation> evals;
    std::vector<GenerationTree> eval_trees;
    std::vector<std::pair<double, double>> peak_pairs;
    for (int i = 0; i < n; ++i) {
      if (errors[i]) continue;
      const PromptEvaluation eval =
          evaluate_prompt(tasks[i].id, sequence_tokens(record.per_prompt[i]),
                          *tasks[i].target_answer, eos, config.extractor);
      for (const SequenceRecord& seq : record.per_prompt[i].sequences) {
        if (seq.peak_entropy) {
          peak_pairs.emplace_back(*seq.peak_entropy, eval.pass_rate);
        }
      }
      evals.push_back(eval);
      eval_trees.push_back(trees[i]);
    }
    if (!evals.empty()) {
      MetricsReport metrics = aggregate(evals, eval_trees);
      if (peak_pairs.size() >= 3) {
        try {
          metrics.correlation = peak_pass_correlation(peak_pairs);
        } catch (const UndefinedCorrelationError&) {
          metrics.correlation = std::nullopt;
        }
      }
      record.metrics = std::move(metrics);
    }
  }

  record.tasks = std::move(tasks);
  record.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - started)
                       .count();

  RunOutput output;
  output.record = std::move(record);
  output.trees = std::move(trees);
  return output;
}

RunOutput execute_run(const RunConfig& config) {
  if (config.bench && config.tasks_path) {
    throw InvalidInputError(
        "config must give either a bench spec or a tasks_path, not both");
  }
  std::vector<PromptTask> tasks;
  if (config.bench) {
    tasks = generate_task_set(*config.bench);
  } else if (config.tasks_path) {
    tasks = load_task_set_jsonl(*config.tasks_path);
  } else {
    throw InvalidInputError("config needs a bench spec or a tasks_path");
  }
  return execute_run(config, std::move(tasks));
}

void persist_run(const RunOutput& output, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "events");

  {
    ojson manifest{{"format_version", output.record.format_version},
                   {"config", detail::run_config_json(output.record.config)}};
    if (output.record.budget_plan) {
      manifest["budget_plan"] =
          detail::budget_plan_json(*output.record.budget_plan);
    } else {
      manifest["budget_plan"] = nullptr;
    }
    ojson directives = ojson::array();
    for (const RerunDirective& d : output.record.directives) {
      directives.push_back(detail::directive_json(d));
    }
    manifest["directives"] = directives;
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << manifest.dump(2) << '\n';
  }

  for (const GenerationTree& tree : output.trees) {
    if (tree.prompt_id.empty()) continue;
    std::ofstream out(fs::path(dir) / "events" / (tree.prompt_id + ".jsonl"));
    out << ojson{{"format_version", output.record.format_version},
                 {"prompt_id", tree.prompt_id}}
               .dump()
        << '\n';
    for (const EngineEvent& event : tree.events) {
      out << detail::event_json(event).dump() << '\n';
    }
  }

  {
    std::ofstream out(fs::path(dir) / "record.json");
    out << run_record_to_json(output.record) << '\n';
  }

  {
    detail::RecordRow row;
    row.label = fs::path(dir).filename().string();
    row.ok = true;
    row.record = output.record;
    std::ofstream out(fs::path(dir) / "report.txt");
    out << detail::render_rows({row});
  }
}

RunRecord run(const RunConfig& config) {
  RunOutput output = execute_run(config);
  persist_run(output, config.output_dir);
  return std::move(output.record);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

std::vector<SweepRow> sweep(const RunConfig& config) {
  if (!config.sweep ||
      (config.sweep->thetas.empty() && config.sweep->Ms.empty())) {
    throw InvalidInputError("sweep: no sweep lists in the config");
  }
  std::vector<double> thetas = config.sweep->thetas;
  if (thetas.empty()) thetas.push_back(config.engine.theta);
  std::vector<int> Ms = config.sweep->Ms;
  if (Ms.empty()) Ms.push_back(config.engine.M);

  // One shared task set for every grid point.
  std::vector<PromptTask> tasks;
  if (config.bench) {
    tasks = generate_task_set(*config.bench);
  } else if (config.tasks_path) {
    tasks = load_task_set_jsonl(*config.tasks_path);
  } else {
    throw InvalidInputError("sweep: config needs a bench spec or tasks_path");
  }

  std::vector<SweepRow> rows;
  for (double theta : thetas) {
    for (int M : Ms) {
      SweepRow row;
      row.theta = theta;
      row.M = M;
      RunConfig point = config;
      point.sweep.reset();
      point.engine.theta = theta;
      point.engine.M = M;
      std::ostringstream name;
      name << "theta" << theta << "_M" << M;
      point.output_dir =
          (fs::path(config.output_dir) / name.str()).string();
      try {
        RunOutput output = execute_run(point, tasks);
        persist_run(output, point.output_dir);
        row.ok = true;
        if (output.record.metrics) {
          row.mean_pass_at_k = output.record.metrics->mean_pass_at_k;
          row.mean_pass_rate = output.record.metrics->mean_pass_rate;
        }
        row.total_new_tokens = output.record.total_new_tokens;
        row.total_sequences = output.record.total_sequences;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }

  // Pareto frontier over (total tokens down, pass@k up) among ok rows.
  for (SweepRow& row : rows) {
    if (!row.ok) continue;
    bool dominated = false;
    for (const SweepRow& other : rows) {
      if (!other.ok || &other == &row) continue;
      const bool no_worse = other.total_new_tokens <= row.total_new_tokens &&
                            other.mean_pass_at_k >= row.mean_pass_at_k;
      const bool strictly_better =
          other.total_new_tokens < row.total_new_tokens ||
          other.mean_pass_at_k > row.mean_pass_at_k;
      if (no_worse && strictly_better) {
        dominated = true;
        break;
      }
    }
    row.pareto = !dominated;
  }

  // Summary table.
  fs::create_directories(config.output_dir);
  std::ostringstream text;
  text << "theta      M    p@k      PR       #T           #S       pareto\n";
  ojson summary = ojson::array();
  for (const SweepRow& row : rows) {
    if (row.ok) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "%-8.3g %4d  %7.4f  %7.4f  %-12lld %-8lld %s\n",
                    row.theta, row.M, row.mean_pass_at_k, row.mean_pass_rate,
                    static_cast<long long>(row.total_new_tokens),
                    static_cast<long long>(row.total_sequences),
                    row.pareto ? "*" : "");
      text << line;
    } else {
      text << row.theta << "  " << row.M << "  FAILED: " << row.error << '\n';
    }
    summary.push_back(ojson{{"theta", row.theta},
                            {"M", row.M},
                            {"ok", row.ok},
                            {"error", row.error},
                            {"mean_pass_at_k", row.mean_pass_at_k},
                            {"mean_pass_rate", row.mean_pass_rate},
                            {"total_new_tokens", row.total_new_tokens},
                            {"total_sequences", row.total_sequences},
                            {"pareto", row.pareto}});
  }
  std::ofstream(fs::path(config.output_dir) / "sweep_summary.txt")
      << text.str();
  std::ofstream(fs::path(config.output_dir) / "sweep_summary.json")
      << ojson{{"format_version", 1}, {"rows", summary}}.dump(2) << '\n';
  return rows;
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string canonical_without_timing(const RunRecord& record) {
  ojson doc = detail::run_record_json(record);
  doc.erase("timing");
  return doc.dump(2);
}

}  // namespace

bool verify_run(const std::string& run_dir, std::string* diagnostics) {
  const RunRecord stored =
      run_record_from_json(read_file(fs::path(run_dir) / "record.json"));

  RunOutput fresh = execute_run(stored.config, stored.tasks);

  const std::string a = canonical_without_timing(stored);
  const std::string b = canonical_without_timing(fresh.record);
  if (a == b) return true;

  if (diagnostics) {
    size_t where = 0;
    const size_t limit = std::min(a.size(), b.size());
    while (where < limit && a[where] == b[where]) ++where;
    const size_t from = where > 60 ? where - 60 : 0;
    *diagnostics += "records differ at byte " + std::to_string(where) +
                    "\n stored: ..." + a.substr(from, 120) +
                    "\n re-run: ..." + b.substr(from, 120) + "\n";
  }
  return false;
}

}  // namespace eager
