// SPDX-License-Identifier: Apache-2.0

// Command line front end: run / sweep / report / gen-bench / verify.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <eager/bench.hpp>
#include <eager/errors.hpp>
#include <eager/harness.hpp>

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw eager::InvalidInputError("cannot read config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Overrides {
  std::string regime;
  double theta = 0.0;
  int M = 0;
  int64_t seed = 0;
  std::string output;
  int workers = 0;

  bool has_regime = false, has_theta = false, has_m = false, has_seed = false,
       has_output = false, has_workers = false;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--regime", regime,
                    "full_parallel | eager_init | eager_adapt | eager_full")
        ->each([this](const std::string&) { has_regime = true; });
    cmd->add_option("--theta", theta, "entropy threshold (nats)")
        ->each([this](const std::string&) { has_theta = true; });
    cmd->add_option("--M", M, "max sequences per prompt")
        ->each([this](const std::string&) { has_m = true; });
    cmd->add_option("--seed", seed, "base random seed")
        ->each([this](const std::string&) { has_seed = true; });
    cmd->add_option("--output", output, "output directory")
        ->each([this](const std::string&) { has_output = true; });
    cmd->add_option("--workers", workers, "concurrent prompt workers")
        ->each([this](const std::string&) { has_workers = true; });
  }

  void apply(eager::RunConfig& config) const {
    if (has_regime) config.regime = eager::regime_from_string(regime);
    if (has_theta) config.engine.theta = theta;
    if (has_m) config.engine.M = M;
    if (has_seed) config.engine.seed = static_cast<uint64_t>(seed);
    if (has_output) config.output_dir = output;
    if (has_workers) config.workers = workers;
  }
};

std::vector<eager::DifficultyWeight> parse_difficulties(
    const std::string& text) {
  std::vector<eager::DifficultyWeight> mixture;
  std::istringstream parts(text);
  std::string item;
  while (std::getline(parts, item, ',')) {
    const size_t colon = item.find(':');
    if (colon == std::string::npos) {
      throw eager::InvalidInputError(
          "difficulties must look like 0.1:0.4,0.5:0.6");
    }
    mixture.push_back({std::stod(item.substr(0, colon)),
                       std::stod(item.substr(colon + 1))});
  }
  return mixture;
}

void print_record_summary(const eager::RunRecord& record,
                          const std::string& out_dir) {
  std::cout << "regime " << eager::to_string(record.config.regime)
            << "  prompts " << record.per_prompt.size() << "  sequences "
            << record.total_sequences << "  new tokens "
            << record.total_new_tokens;
  if (record.metrics) {
    std::cout << "  p@k " << record.metrics->mean_pass_at_k << "  PR "
              << record.metrics->mean_pass_rate;
  }
  std::cout << "\nartifacts in " << out_dir << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entropy-guided branching generation harness"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "execute one decoding run");
  std::string run_config_path;
  run_cmd->add_option("--config", run_config_path, "run config JSON")
      ->required();
  Overrides run_overrides;
  run_overrides.add_flags(run_cmd);

  // sweep
  auto* sweep_cmd =
      app.add_subcommand("sweep", "execute a theta/M grid of runs");
  std::string sweep_config_path;
  sweep_cmd->add_option("--config", sweep_config_path, "run config JSON")
      ->required();
  Overrides sweep_overrides;
  sweep_overrides.add_flags(sweep_cmd);

  // report
  auto* report_cmd =
      app.add_subcommand("report", "render metrics tables from run records");
  std::string report_dir;
  report_cmd->add_option("run_dir", report_dir, "run or sweep directory")
      ->required();

  // gen-bench
  auto* gen_cmd =
      app.add_subcommand("gen-bench", "generate a synthetic task set");
  int gen_n = 100;
  std::string gen_difficulties = "0.1:0.4,0.5:0.3,0.9:0.3";
  int64_t gen_seed = 0;
  std::vector<int> gen_range{24, 48};
  int gen_vocab = 64;
  std::string gen_output = "tasks.jsonl";
  gen_cmd->add_option("--n", gen_n, "number of prompts");
  gen_cmd->add_option("--difficulties", gen_difficulties,
                      "difficulty:weight pairs, comma separated");
  gen_cmd->add_option("--seed", gen_seed, "generator seed");
  gen_cmd->add_option("--reasoning-range", gen_range,
                      "min and max reasoning length")
      ->expected(2);
  gen_cmd->add_option("--vocab", gen_vocab, "vocabulary size");
  gen_cmd->add_option("--output", gen_output, "output JSONL path");

  // verify
  auto* verify_cmd = app.add_subcommand(
      "verify", "re-run a recorded config and compare byte for byte");
  std::string verify_dir;
  verify_cmd->add_option("run_dir", verify_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      eager::RunConfig config =
          eager::run_config_from_json(read_file(run_config_path));
      run_overrides.apply(config);
      const eager::RunRecord record = eager::run(config);
      print_record_summary(record, config.output_dir);
    } else if (*sweep_cmd) {
      eager::RunConfig config =
          eager::run_config_from_json(read_file(sweep_config_path));
      sweep_overrides.apply(config);
      const auto rows = eager::sweep(config);
      int failed = 0;
      for (const auto& row : rows) failed += row.ok ? 0 : 1;
      std::cout << read_file(
          (fs::path(config.output_dir) / "sweep_summary.txt").string());
      if (failed > 0) {
        std::cerr << failed << " grid point(s) failed; completed points kept"
                  << std::endl;
      }
    } else if (*report_cmd) {
      const eager::ReportResult result = eager::report(report_dir);
      std::cout << result.text;
      std::ofstream(fs::path(report_dir) / "report.txt") << result.text;
      std::ofstream(fs::path(report_dir) / "report.json")
          << result.summary_json << '\n';
    } else if (*gen_cmd) {
      eager::BenchSpec spec;
      spec.n_prompts = gen_n;
      spec.difficulty_distribution = parse_difficulties(gen_difficulties);
      spec.seed = static_cast<uint64_t>(gen_seed);
      spec.reasoning_length_min = gen_range[0];
      spec.reasoning_length_max = gen_range[1];
      spec.vocab_size = gen_vocab;
      const auto tasks = eager::generate_task_set(spec);
      eager::save_task_set_jsonl(tasks, gen_output);
      std::cout << "wrote " << tasks.size() << " tasks to " << gen_output
                << std::endl;
    } else if (*verify_cmd) {
      std::string diagnostics;
      if (eager::verify_run(verify_dir, &diagnostics)) {
        std::cout << "verify ok: record replays byte-identically"
                  << std::endl;
      } else {
        std::cerr << "verify FAILED\n" << diagnostics;
        return 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
