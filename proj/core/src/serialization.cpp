// SPDX-License-Identifier: Apache-2.0

#include "serialization.hpp"

#include "eager/errors.hpp"

namespace eager::detail {

ojson engine_config_json(const EngineConfig& cfg) {
  return ojson{{"theta", cfg.theta},
               {"M", cfg.M},
               {"temperature", cfg.temperature},
               {"top_p", cfg.top_p},
               {"K", cfg.K},
               {"max_steps", cfg.max_steps},
               {"halt_window", cfg.halt_window},
               {"context_cap", cfg.context_cap},
               {"seed", cfg.seed}};
}

EngineConfig engine_config_from(const ojson& doc) {
  EngineConfig cfg;
  cfg.theta = doc.value("theta", cfg.theta);
  cfg.M = doc.value("M", cfg.M);
  cfg.temperature = doc.value("temperature", cfg.temperature);
  cfg.top_p = doc.value("top_p", cfg.top_p);
  cfg.K = doc.value("K", cfg.K);
  cfg.max_steps = doc.value("max_steps", cfg.max_steps);
  cfg.halt_window = doc.value("halt_window", cfg.halt_window);
  cfg.context_cap = doc.value("context_cap", cfg.context_cap);
  cfg.seed = doc.value("seed", cfg.seed);
  return cfg;
}

ojson source_descriptor_json(const SourceDescriptor& src) {
  return ojson{{"kind", to_string(src.kind)},
               {"vocab_size", src.vocab_size},
               {"eos_token", src.eos_token},
               {"params", ojson::parse(src.params_json)}};
}

SourceDescriptor source_descriptor_from(const ojson& doc) {
  SourceDescriptor src;
  src.kind = source_kind_from_string(doc.value("kind", std::string("synthetic")));
  src.vocab_size = doc.value("vocab_size", 64);
  src.eos_token = doc.value("eos_token", 0);
  src.params_json = doc.contains("params") ? doc["params"].dump() : "{}";
  return src;
}

ojson extractor_json(const AnswerExtractorConfig& cfg) {
  return ojson{{"strategy", to_string(cfg.strategy)},
               {"delimiter", cfg.delimiter},
               {"pattern", cfg.pattern},
               {"tail_length", cfg.tail_length}};
}

AnswerExtractorConfig extractor_from(const ojson& doc) {
  AnswerExtractorConfig cfg;
  cfg.strategy = extract_strategy_from_string(
      doc.value("strategy", std::string("delimiter_suffix")));
  cfg.delimiter = doc.value("delimiter", cfg.delimiter);
  cfg.pattern = doc.value("pattern", cfg.pattern);
  cfg.tail_length = doc.value("tail_length", cfg.tail_length);
  return cfg;
}

namespace {

ojson shape_json(const SyntheticShape& shape) {
  ojson doc{{"vocab_size", shape.vocab_size},
            {"reasoning_length", shape.reasoning_length},
            {"distractor_entropy", shape.distractor_entropy},
            {"fork_count", shape.fork_count},
            {"answer_length", shape.answer_length},
            {"deception_scale", shape.deception_scale},
            {"deception_exponent", shape.deception_exponent},
            {"prompt_length", shape.prompt_length}};
  if (shape.fork_success_override) {
    doc["fork_success_override"] = *shape.fork_success_override;
  }
  return doc;
}

SyntheticShape shape_from(const ojson& doc) {
  SyntheticShape shape;
  shape.vocab_size = doc.value("vocab_size", shape.vocab_size);
  shape.reasoning_length = doc.value("reasoning_length", shape.reasoning_length);
  shape.distractor_entropy =
      doc.value("distractor_entropy", shape.distractor_entropy);
  shape.fork_count = doc.value("fork_count", shape.fork_count);
  shape.answer_length = doc.value("answer_length", shape.answer_length);
  shape.deception_scale = doc.value("deception_scale", shape.deception_scale);
  shape.deception_exponent =
      doc.value("deception_exponent", shape.deception_exponent);
  shape.prompt_length = doc.value("prompt_length", shape.prompt_length);
  if (doc.contains("fork_success_override")) {
    shape.fork_success_override = doc["fork_success_override"].get<double>();
  }
  return shape;
}

}  // namespace

ojson bench_spec_json(const BenchSpec& spec) {
  ojson mixture = ojson::array();
  for (const DifficultyWeight& dw : spec.difficulty_distribution) {
    mixture.push_back(ojson::array({dw.difficulty, dw.weight}));
  }
  return ojson{{"n_prompts", spec.n_prompts},
               {"difficulties", mixture},
               {"reasoning_length_range",
                ojson::array({spec.reasoning_length_min,
                              spec.reasoning_length_max})},
               {"vocab_size", spec.vocab_size},
               {"seed", spec.seed},
               {"shape", shape_json(spec.shape)}};
}

BenchSpec bench_spec_from(const ojson& doc) {
  BenchSpec spec;
  spec.n_prompts = doc.value("n_prompts", 0);
  if (doc.contains("difficulties")) {
    for (const ojson& pair : doc["difficulties"]) {
      spec.difficulty_distribution.push_back(
          {pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
  }
  if (doc.contains("reasoning_length_range")) {
    spec.reasoning_length_min = doc["reasoning_length_range"].at(0).get<int>();
    spec.reasoning_length_max = doc["reasoning_length_range"].at(1).get<int>();
  }
  spec.vocab_size = doc.value("vocab_size", spec.vocab_size);
  spec.seed = doc.value("seed", spec.seed);
  if (doc.contains("shape")) spec.shape = shape_from(doc["shape"]);
  spec.shape.vocab_size = spec.vocab_size;
  return spec;
}

ojson run_config_json(const RunConfig& config) {
  ojson doc{{"format_version", config.format_version},
            {"regime", to_string(config.regime)},
            {"engine", engine_config_json(config.engine)},
            {"source", source_descriptor_json(config.source)},
            {"extractor", extractor_json(config.extractor)},
            {"output_dir", config.output_dir},
            {"workers", config.workers}};
  if (config.bench) doc["bench"] = bench_spec_json(*config.bench);
  if (config.tasks_path) doc["tasks_path"] = *config.tasks_path;
  if (config.sweep) {
    doc["sweep"] = ojson{{"theta", config.sweep->thetas},
                         {"M", config.sweep->Ms}};
  }
  return doc;
}

RunConfig run_config_from(const ojson& doc) {
  RunConfig config;
  config.format_version = doc.value("format_version", 1);
  config.regime =
      regime_from_string(doc.value("regime", std::string("eager_init")));
  if (doc.contains("engine")) config.engine = engine_config_from(doc["engine"]);
  if (doc.contains("source")) {
    config.source = source_descriptor_from(doc["source"]);
  }
  if (doc.contains("extractor")) {
    config.extractor = extractor_from(doc["extractor"]);
  }
  if (doc.contains("bench")) config.bench = bench_spec_from(doc["bench"]);
  if (doc.contains("tasks_path")) {
    config.tasks_path = doc["tasks_path"].get<std::string>();
  }
  if (doc.contains("sweep")) {
    SweepSpec sweep;
    if (doc["sweep"].contains("theta")) {
      sweep.thetas = doc["sweep"]["theta"].get<std::vector<double>>();
    }
    if (doc["sweep"].contains("M")) {
      sweep.Ms = doc["sweep"]["M"].get<std::vector<int>>();
    }
    config.sweep = std::move(sweep);
  }
  config.output_dir = doc.value("output_dir", config.output_dir);
  config.workers = doc.value("workers", config.workers);
  return config;
}

ojson budget_plan_json(const BudgetPlan& plan) {
  ojson extras = ojson::object();
  for (const auto& [id, extra] : plan.per_prompt_extra) extras[id] = extra;
  return ojson{{"M", plan.M},
               {"dataset_size", plan.dataset_size},
               {"M_theoretical", plan.M_theoretical},
               {"M_actual", plan.M_actual},
               {"surplus", plan.surplus},
               {"per_prompt_extra", extras},
               {"mode", to_string(plan.mode)}};
}

BudgetPlan budget_plan_from(const ojson& doc) {
  BudgetPlan plan;
  plan.M = doc.value("M", 0);
  plan.dataset_size = doc.value("dataset_size", 0);
  plan.M_theoretical = doc.value("M_theoretical", 0LL);
  plan.M_actual = doc.value("M_actual", 0LL);
  plan.surplus = doc.value("surplus", 0LL);
  if (doc.contains("per_prompt_extra")) {
    for (auto it = doc["per_prompt_extra"].begin();
         it != doc["per_prompt_extra"].end(); ++it) {
      plan.per_prompt_extra[it.key()] = it.value().get<int>();
    }
  }
  const std::string mode = doc.value("mode", std::string("unset"));
  plan.mode = mode == "adapt"  ? ReallocationMode::adapt
              : mode == "full" ? ReallocationMode::full
                               : ReallocationMode::unset;
  return plan;
}

ojson directive_json(const RerunDirective& d) {
  return ojson{{"prompt_id", d.prompt_id},
               {"new_cap", d.new_cap},
               {"extra", d.extra},
               {"new_theta", d.new_theta},
               {"reason", to_string(d.reason)}};
}

RerunDirective directive_from(const ojson& doc) {
  RerunDirective d;
  d.prompt_id = doc.at("prompt_id").get<std::string>();
  d.new_cap = doc.value("new_cap", 0);
  d.extra = doc.value("extra", 0);
  d.new_theta = doc.value("new_theta", 0.0);
  d.reason = doc.value("reason", std::string("saturating")) == "underutilizing"
                 ? RerunReason::underutilizing
                 : RerunReason::saturating;
  return d;
}

ojson metrics_json(const MetricsReport& metrics) {
  ojson per_prompt = ojson::array();
  for (const PromptEvaluation& eval : metrics.per_prompt) {
    per_prompt.push_back(ojson{{"prompt_id", eval.prompt_id},
                               {"k", eval.k},
                               {"pass_at_k", eval.pass_at_k},
                               {"cons_at_k", eval.cons_at_k},
                               {"pass_rate", eval.pass_rate},
                               {"answers", eval.extracted_answers}});
  }
  ojson doc{{"mean_pass_at_k", metrics.mean_pass_at_k},
            {"mean_cons_at_k", metrics.mean_cons_at_k},
            {"mean_pass_rate", metrics.mean_pass_rate},
            {"total_new_tokens", metrics.total_new_tokens},
            {"total_sequences", metrics.total_sequences},
            {"per_prompt", per_prompt}};
  if (metrics.correlation) {
    doc["correlation"] = ojson{{"coefficient", metrics.correlation->coefficient},
                               {"n", metrics.correlation->n}};
  } else {
    doc["correlation"] = nullptr;
  }
  return doc;
}

MetricsReport metrics_from(const ojson& doc) {
  MetricsReport metrics;
  metrics.mean_pass_at_k = doc.value("mean_pass_at_k", 0.0);
  metrics.mean_cons_at_k = doc.value("mean_cons_at_k", 0.0);
  metrics.mean_pass_rate = doc.value("mean_pass_rate", 0.0);
  metrics.total_new_tokens = doc.value("total_new_tokens", 0LL);
  metrics.total_sequences = doc.value("total_sequences", 0LL);
  if (doc.contains("per_prompt")) {
    for (const ojson& p : doc["per_prompt"]) {
      PromptEvaluation eval;
      eval.prompt_id = p.value("prompt_id", std::string());
      eval.k = p.value("k", 0);
      eval.pass_at_k = p.value("pass_at_k", 0);
      eval.cons_at_k = p.value("cons_at_k", 0);
      eval.pass_rate = p.value("pass_rate", 0.0);
      if (p.contains("answers")) {
        eval.extracted_answers = p["answers"].get<std::vector<std::string>>();
      }
      metrics.per_prompt.push_back(std::move(eval));
    }
  }
  if (doc.contains("correlation") && !doc["correlation"].is_null()) {
    metrics.correlation = Correlation{
        doc["correlation"].value("coefficient", 0.0),
        doc["correlation"].value("n", 0)};
  }
  return metrics;
}

ojson run_record_json(const RunRecord& record) {
  ojson tasks = ojson::array();
  for (const PromptTask& task : record.tasks) {
    tasks.push_back(ojson::parse(task_to_json_line(task)));
  }

  ojson per_prompt = ojson::array();
  for (const PromptRunRecord& p : record.per_prompt) {
    ojson sequences = ojson::array();
    for (const SequenceRecord& s : p.sequences) {
      ojson seq{{"node_id", s.node_id},
                {"status", to_string(s.status)},
                {"tokens", s.tokens}};
      if (s.peak_entropy) {
        seq["peak_entropy"] = *s.peak_entropy;
      } else {
        seq["peak_entropy"] = nullptr;
      }
      sequences.push_back(std::move(seq));
    }
    ojson entry{{"prompt_id", p.prompt_id},
                {"sequence_count", p.sequence_count},
                {"new_token_count", p.new_token_count},
                {"branch_event_count", p.branch_event_count},
                {"sequences", sequences}};
    if (p.error) entry["error"] = *p.error;
    per_prompt.push_back(std::move(entry));
  }

  ojson generation{{"per_prompt", per_prompt},
                   {"totals",
                    ojson{{"sequences", record.total_sequences},
                          {"new_tokens", record.total_new_tokens}}}};
  if (record.budget_plan) {
    generation["budget_plan"] = budget_plan_json(*record.budget_plan);
  } else {
    generation["budget_plan"] = nullptr;
  }
  ojson directives = ojson::array();
  for (const RerunDirective& d : record.directives) {
    directives.push_back(directive_json(d));
  }
  generation["directives"] = directives;

  ojson doc{{"format_version", record.format_version},
            {"config", run_config_json(record.config)},
            {"tasks", tasks},
            {"generation", generation}};
  if (record.metrics) {
    doc["evaluation"] = metrics_json(*record.metrics);
  } else {
    doc["evaluation"] = nullptr;
  }
  doc["timing"] = ojson{{"wall_ms", record.wall_ms}};
  return doc;
}

RunRecord run_record_from(const ojson& doc) {
  RunRecord record;
  record.format_version = doc.value("format_version", 1);
  record.config = run_config_from(doc.at("config"));
  for (const ojson& t : doc.at("tasks")) {
    record.tasks.push_back(task_from_json_line(t.dump()));
  }
  const ojson& generation = doc.at("generation");
  for (const ojson& p : generation.at("per_prompt")) {
    PromptRunRecord entry;
    entry.prompt_id = p.value("prompt_id", std::string());
    entry.sequence_count = p.value("sequence_count", 0);
    entry.new_token_count = p.value("new_token_count", 0LL);
    entry.branch_event_count = p.value("branch_event_count", 0);
    if (p.contains("sequences")) {
      for (const ojson& s : p["sequences"]) {
        SequenceRecord seq;
        seq.node_id = s.value("node_id", 0);
        const std::string status = s.value("status", std::string("active"));
        seq.status = status == "finished_eos" ? NodeStatus::finished_eos
                     : status == "finished_length"
                         ? NodeStatus::finished_length
                     : status == "finished_context_cap"
                         ? NodeStatus::finished_context_cap
                         : NodeStatus::active;
        seq.tokens = s.value("tokens", TokenList{});
        if (s.contains("peak_entropy") && !s["peak_entropy"].is_null()) {
          seq.peak_entropy = s["peak_entropy"].get<double>();
        }
        entry.sequences.push_back(std::move(seq));
      }
    }
    if (p.contains("error")) entry.error = p["error"].get<std::string>();
    record.per_prompt.push_back(std::move(entry));
  }
  if (generation.contains("budget_plan") &&
      !generation["budget_plan"].is_null()) {
    record.budget_plan = budget_plan_from(generation["budget_plan"]);
  }
  if (generation.contains("directives")) {
    for (const ojson& d : generation["directives"]) {
      record.directives.push_back(directive_from(d));
    }
  }
  if (generation.contains("totals")) {
    record.total_sequences = generation["totals"].value("sequences", 0LL);
    record.total_new_tokens = generation["totals"].value("new_tokens", 0LL);
  }
  if (doc.contains("evaluation") && !doc["evaluation"].is_null()) {
    record.metrics = metrics_from(doc["evaluation"]);
  }
  if (doc.contains("timing")) {
    record.wall_ms = doc["timing"].value("wall_ms", 0.0);
  }
  return record;
}

ojson event_json(const EngineEvent& event) {
  ojson doc{{"step", event.step}, {"node_id", event.node_id}};
  if (event.entropy) {
    doc["entropy"] = *event.entropy;
  } else {
    doc["entropy"] = nullptr;
  }
  doc["action"] = to_string(event.action);
  if (event.block) doc["block"] = to_string(*event.block);
  if (event.token) doc["token"] = *event.token;
  return doc;
}

}  // namespace eager::detail
