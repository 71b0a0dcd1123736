#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include <eager/errors.hpp>
#include <eager/harness.hpp>

using namespace eager;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("eager_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig base_config(Regime regime, const fs::path& out, uint64_t seed = 11,
                      int n_prompts = 12) {
  RunConfig config;
  config.regime = regime;
  config.engine.theta = 2.0;
  config.engine.M = 8;
  config.engine.temperature = 0.6;
  config.engine.top_p = 0.95;
  config.engine.max_steps = 64;
  config.engine.seed = seed;

  config.source.kind = SourceKind::synthetic;
  config.source.vocab_size = 64;
  config.source.eos_token = 0;

  BenchSpec bench;
  bench.n_prompts = n_prompts;
  bench.difficulty_distribution = {{0.1, 0.5}, {0.9, 0.5}};
  bench.reasoning_length_min = 12;
  bench.reasoning_length_max = 20;
  bench.seed = seed + 1;
  config.bench = bench;

  config.extractor.strategy = ExtractStrategy::delimiter_suffix;
  config.extractor.delimiter = 1;

  config.output_dir = out.string();
  config.workers = 2;
  return config;
}

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("full_parallel with M=1 is single-sample decoding") {
  const fs::path out = temp_dir("fp_m1");
  RunConfig config = base_config(Regime::full_parallel, out);
  config.engine.M = 1;
  const RunRecord record = run(config);
  for (const PromptRunRecord& p : record.per_prompt) {
    CHECK(p.sequence_count == 1);
  }
  fs::remove_all(out);
}

TEST_CASE("full_parallel counts tokens without prefix reuse") {
  // A deterministic scripted chain: every sample is identical, and the
  // token count is exactly M times the sequence length.
  const fs::path out = temp_dir("fp_scripted");
  const fs::path fixture = out / "fixture.json";
  std::ofstream(fixture) << R"({
    "vocab_size": 8, "eos_token": 0, "window": 1,
    "default": {"2": 1.0},
    "transitions": [
      {"context": [5], "probs": {"3": 1.0}},
      {"context": [3], "probs": {"2": 1.0}},
      {"context": [2], "probs": {"0": 1.0}}
    ]
  })";

  RunConfig config = base_config(Regime::full_parallel, out / "run");
  config.engine.M = 4;
  config.source.kind = SourceKind::scripted;
  config.source.vocab_size = 8;
  config.source.params_json =
      std::string("{\"fixture_path\": \"") + fixture.string() + "\"}";
  config.bench.reset();

  const fs::path tasks_path = out / "tasks.jsonl";
  std::ofstream(tasks_path)
      << R"({"prompt_id":"s0","prompt_tokens":[5],"target":[2],"difficulty":0.0,"span_policy":"whole_output"})"
      << '\n';
  config.tasks_path = tasks_path.string();

  const RunRecord record = run(config);
  REQUIRE(record.per_prompt.size() == 1);
  const PromptRunRecord& p = record.per_prompt[0];
  CHECK(p.sequence_count == 4);
  REQUIRE(p.sequences.size() == 4);
  for (const SequenceRecord& s : p.sequences) {
    CHECK(s.tokens == TokenList{5, 3, 2, 0});
  }
  CHECK(p.new_token_count == 4 * 3);
  CHECK(record.budget_plan.has_value() == false);
  fs::remove_all(out);
}

TEST_CASE("eager_init on an all-easy set leaves most of the budget unused") {
  const fs::path out = temp_dir("init_easy");
  RunConfig config = base_config(Regime::eager_init, out);
  config.bench->difficulty_distribution = {{0.0, 1.0}};
  const RunRecord record = run(config);

  REQUIRE(record.budget_plan.has_value());
  const int n = static_cast<int>(record.per_prompt.size());
  CHECK(record.total_sequences == n);  // one sequence per easy prompt
  CHECK(record.budget_plan->surplus ==
        static_cast<long long>(config.engine.M - 1) * n);
  REQUIRE(record.metrics.has_value());
  CHECK(record.metrics->mean_pass_at_k == doctest::Approx(1.0));
  fs::remove_all(out);
}

TEST_CASE("eager_adapt without saturating prompts equals eager_init") {
  const fs::path out_a = temp_dir("adapt_nosat");
  RunConfig adapt = base_config(Regime::eager_adapt, out_a);
  adapt.bench->difficulty_distribution = {{0.0, 1.0}};  // nobody saturates
  const RunRecord adapt_record = run(adapt);
  CHECK(adapt_record.directives.empty());

  const fs::path out_b = temp_dir("init_nosat");
  RunConfig init = base_config(Regime::eager_init, out_b);
  init.bench->difficulty_distribution = {{0.0, 1.0}};
  const RunRecord init_record = run(init);

  REQUIRE(adapt_record.per_prompt.size() == init_record.per_prompt.size());
  for (size_t i = 0; i < adapt_record.per_prompt.size(); ++i) {
    CHECK(adapt_record.per_prompt[i].sequence_count ==
          init_record.per_prompt[i].sequence_count);
    CHECK(adapt_record.per_prompt[i].new_token_count ==
          init_record.per_prompt[i].new_token_count);
  }
  fs::remove_all(out_a);
  fs::remove_all(out_b);
}

TEST_CASE("eager_full with every prompt solved runs no reruns") {
  const fs::path out = temp_dir("full_solved");
  RunConfig config = base_config(Regime::eager_full, out);
  config.bench->difficulty_distribution = {{0.0, 1.0}};
  const RunRecord record = run(config);
  CHECK(record.directives.empty());
  REQUIRE(record.metrics.has_value());
  CHECK(record.metrics->mean_pass_at_k == doctest::Approx(1.0));
  fs::remove_all(out);
}

TEST_CASE("eager_full requires targets") {
  const fs::path out = temp_dir("full_notargets");
  RunConfig config = base_config(Regime::eager_full, out / "run");

  // Strip targets by exporting the task set and deleting the field.
  const auto tasks = generate_task_set(*config.bench);
  const fs::path tasks_path = out / "tasks.jsonl";
  {
    std::ofstream file(tasks_path);
    for (const PromptTask& task : tasks) {
      auto doc = nlohmann::json::parse(task_to_json_line(task));
      doc.erase("target");
      file << doc.dump() << '\n';
    }
  }
  config.bench.reset();
  config.tasks_path = tasks_path.string();
  CHECK_THROWS_AS(run(config), InvalidInputError);
  fs::remove_all(out);
}

TEST_CASE("adapt decisions are byte-identical with and without targets") {
  const fs::path out = temp_dir("adapt_isolation");
  RunConfig config = base_config(Regime::eager_adapt, out / "a", 21, 16);
  config.bench->difficulty_distribution = {{0.2, 0.5}, {0.9, 0.5}};

  const auto tasks = generate_task_set(*config.bench);
  const fs::path with_targets = out / "with.jsonl";
  const fs::path without_targets = out / "without.jsonl";
  {
    std::ofstream file_a(with_targets), file_b(without_targets);
    for (const PromptTask& task : tasks) {
      auto doc = nlohmann::json::parse(task_to_json_line(task));
      file_a << doc.dump() << '\n';
      doc.erase("target");
      file_b << doc.dump() << '\n';
    }
  }
  config.bench.reset();

  config.tasks_path = with_targets.string();
  run(config);
  RunConfig config_b = config;
  config_b.output_dir = (out / "b").string();
  config_b.tasks_path = without_targets.string();
  run(config_b);

  const nlohmann::json rec_a = load_json(out / "a" / "record.json");
  const nlohmann::json rec_b = load_json(out / "b" / "record.json");
  CHECK(rec_a.at("generation").dump() == rec_b.at("generation").dump());
  // The run with targets reports metrics; the other cannot.
  CHECK_FALSE(rec_a.at("evaluation").is_null());
  CHECK(rec_b.at("evaluation").is_null());
  fs::remove_all(out);
}

TEST_CASE("records are byte-stable across worker counts and reruns") {
  const fs::path out = temp_dir("workers");
  RunConfig config = base_config(Regime::eager_full, out / "w1", 5, 10);
  config.workers = 1;
  const RunRecord a = run(config);

  RunConfig config4 = config;
  config4.workers = 4;
  config4.output_dir = (out / "w4").string();
  const RunRecord b = run(config4);

  // Only the config.workers field and timing may differ.
  auto doc_a = nlohmann::json::parse(run_record_to_json(a));
  auto doc_b = nlohmann::json::parse(run_record_to_json(b));
  for (auto* doc : {&doc_a, &doc_b}) {
    doc->erase("timing");
    (*doc)["config"].erase("workers");
    (*doc)["config"].erase("output_dir");
  }
  CHECK(doc_a.dump() == doc_b.dump());
  fs::remove_all(out);
}

TEST_CASE("verify_run replays a persisted record") {
  const fs::path out = temp_dir("verify");
  RunConfig config = base_config(Regime::eager_full, out, 31, 10);
  run(config);

  std::string diagnostics;
  CHECK(verify_run(out.string(), &diagnostics));
  CHECK(diagnostics.empty());

  // Corrupt one persisted token and the check must fail.
  const fs::path record_path = out / "record.json";
  std::string text;
  {
    std::ifstream in(record_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  const size_t pos = text.find("\"new_token_count\": ");
  REQUIRE(pos != std::string::npos);
  text.replace(pos + 19, 1, "9");
  std::ofstream(record_path) << text;
  std::string why;
  CHECK_FALSE(verify_run(out.string(), &why));
  CHECK_FALSE(why.empty());
  fs::remove_all(out);
}

TEST_CASE("sweep runs the grid and reports theta monotonicity") {
  const fs::path out = temp_dir("sweep");
  RunConfig config = base_config(Regime::eager_init, out, 13, 8);
  config.sweep = SweepSpec{{1.8, 2.0, 2.5}, {}};

  const auto rows = sweep(config);
  REQUIRE(rows.size() == 3);
  for (const SweepRow& row : rows) CHECK(row.ok);
  CHECK(rows[0].total_sequences >= rows[1].total_sequences);
  CHECK(rows[1].total_sequences >= rows[2].total_sequences);
  CHECK(fs::exists(out / "sweep_summary.txt"));
  CHECK(fs::exists(out / "sweep_summary.json"));

  SUBCASE("report renders every grid point") {
    const ReportResult rep = report(out.string());
    CHECK(rep.text.find("theta1.8_M8") != std::string::npos);
    CHECK(rep.text.find("theta2.5_M8") != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("sweep without sweep lists is an error") {
  RunConfig config = base_config(Regime::eager_init, temp_dir("sweep_bad"));
  CHECK_THROWS_AS(sweep(config), InvalidInputError);
  config.sweep = SweepSpec{};
  CHECK_THROWS_AS(sweep(config), InvalidInputError);
}

TEST_CASE("report computes token savings against full_parallel") {
  const fs::path out = temp_dir("report_savings");
  RunConfig fp = base_config(Regime::full_parallel, out / "fp", 3, 8);
  RunConfig init = base_config(Regime::eager_init, out / "init", 3, 8);
  const RunRecord fp_record = run(fp);
  const RunRecord init_record = run(init);
  REQUIRE(fp_record.total_new_tokens > 0);

  const ReportResult rep = report(out.string());
  CHECK(rep.text.find("token savings vs full_parallel") != std::string::npos);
  CHECK(rep.text.find("init") != std::string::npos);

  SUBCASE("corrupt records become warning rows") {
    std::ofstream(out / "fp" / "record.json") << "{ not json";
    const ReportResult again = report(out.string());
    CHECK(again.text.find("unreadable record") != std::string::npos);
  }
  fs::remove_all(out);
}

TEST_CASE("persisted event logs are auditable line by line") {
  const fs::path out = temp_dir("events_audit");
  RunConfig config = base_config(Regime::eager_init, out, 17, 8);
  config.bench->difficulty_distribution = {{0.9, 1.0}};
  config.engine.temperature = 1.0;
  config.engine.top_p = 1.0;
  const RunRecord record = run(config);

  int branch_lines = 0, blocked_lines = 0, audited_files = 0;
  for (const auto& entry : fs::directory_iterator(out / "events")) {
    std::ifstream in(entry.path());
    std::string line;
    REQUIRE(std::getline(in, line));
    const auto header = nlohmann::json::parse(line);
    CHECK(header.at("format_version") == 1);

    while (std::getline(in, line)) {
      const auto event = nlohmann::json::parse(line);
      const std::string action = event.at("action");
      CHECK((action == "sample" || action == "branch" || action == "halt" ||
             action == "finish"));
      REQUIRE(event.contains("entropy"));
      if (event["entropy"].is_null()) continue;
      const double entropy = event["entropy"].get<double>();
      if (entropy >= config.engine.theta && action != "branch") {
        // Branch soundness: a monitored high-entropy step that did not
        // branch must carry an explicit reason.
        REQUIRE(event.contains("block"));
        const std::string block = event["block"];
        CHECK((block == "cap" || block == "span"));
        ++blocked_lines;
      }
      if (action == "branch") ++branch_lines;
    }
    ++audited_files;
  }
  CHECK(audited_files == 8);
  CHECK(branch_lines > 0);
  CHECK(blocked_lines > 0);  // hard prompts saturate the cap

  // Accounting consistency: record totals match the per-prompt sums and
  // the metrics totals.
  long long tokens = 0, sequences = 0;
  for (const PromptRunRecord& p : record.per_prompt) {
    tokens += p.new_token_count;
    sequences += p.sequence_count;
  }
  CHECK(record.total_new_tokens == tokens);
  CHECK(record.total_sequences == sequences);
  REQUIRE(record.metrics.has_value());
  CHECK(record.metrics->total_new_tokens == tokens);
  CHECK(record.metrics->total_sequences == sequences);
  fs::remove_all(out);
}

TEST_CASE("sweeping M changes the sequence budget monotonically") {
  const fs::path out = temp_dir("sweep_m");
  RunConfig config = base_config(Regime::full_parallel, out, 23, 6);
  config.sweep = SweepSpec{{}, {1, 4}};
  const auto rows = sweep(config);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].ok);
  REQUIRE(rows[1].ok);
  CHECK(rows[0].total_sequences == 6);       // M = 1: one sample per prompt
  CHECK(rows[1].total_sequences == 4 * 6);   // M = 4: fixed budget
  CHECK(rows[1].total_new_tokens > rows[0].total_new_tokens);
  fs::remove_all(out);
}

TEST_CASE("run config round-trips through JSON") {
  RunConfig config = base_config(Regime::eager_adapt, "somewhere", 9, 5);
  config.sweep = SweepSpec{{1.8, 2.2}, {4, 8}};
  config.tasks_path.reset();
  const std::string text = run_config_to_json(config);
  const RunConfig parsed = run_config_from_json(text);
  CHECK(parsed.regime == Regime::eager_adapt);
  CHECK(parsed.engine.theta == config.engine.theta);
  CHECK(parsed.engine.M == config.engine.M);
  CHECK(parsed.engine.seed == config.engine.seed);
  CHECK(parsed.bench->n_prompts == config.bench->n_prompts);
  CHECK(parsed.sweep->thetas == config.sweep->thetas);
  CHECK(parsed.sweep->Ms == config.sweep->Ms);
  CHECK(parsed.output_dir == config.output_dir);
}
