// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "eager/errors.hpp"
#include "eager/harness.hpp"
#include "report_internal.hpp"
#include "serialization.hpp"

namespace fs = std::filesystem;

namespace eager {

namespace detail {

namespace {

std::string format_row(const std::string& label, const RunRecord& record) {
  const char* pk = "   -  ";
  char pk_buf[16], ck_buf[16], pr_buf[16];
  const char* ck = pk;
  const char* pr = pk;
  if (record.metrics) {
    std::snprintf(pk_buf, sizeof(pk_buf), "%6.4f",
                  record.metrics->mean_pass_at_k);
    std::snprintf(ck_buf, sizeof(ck_buf), "%6.4f",
                  record.metrics->mean_cons_at_k);
    std::snprintf(pr_buf, sizeof(pr_buf), "%6.4f",
                  record.metrics->mean_pass_rate);
    pk = pk_buf;
    ck = ck_buf;
    pr = pr_buf;
  }
  char line[256];
  std::snprintf(line, sizeof(line),
                "%-24s %-14s %-6.3g %4d  %s  %s  %s  %-12lld %-8lld\n",
                label.c_str(), to_string(record.config.regime).c_str(),
                record.config.engine.theta, record.config.engine.M, pk, ck,
                pr, static_cast<long long>(record.total_new_tokens),
                static_cast<long long>(record.total_sequences));
  return line;
}

}  // namespace

std::string render_rows(const std::vector<RecordRow>& rows) {
  std::ostringstream out;
  out << "run                      regime         theta     M  p@k     c@k "
         "    PR      #T           #S\n";
  for (const RecordRow& row : rows) {
    if (!row.ok) {
      out << row.label << "  [unreadable record: " << row.error << "]\n";
      continue;
    }
    out << format_row(row.label, row.record);
  }

  // Token savings relative to full_parallel rows at the same M.
  std::map<int, const RecordRow*> parallel_by_m;
  for (const RecordRow& row : rows) {
    if (row.ok && row.record.config.regime == Regime::full_parallel) {
      parallel_by_m[row.record.config.engine.M] = &row;
    }
  }
  bool header_done = false;
  for (const RecordRow& row : rows) {
    if (!row.ok || row.record.config.regime == Regime::full_parallel) {
      continue;
    }
    auto it = parallel_by_m.find(row.record.config.engine.M);
    if (it == parallel_by_m.end()) continue;
    const long long fp_tokens = it->second->record.total_new_tokens;
    if (fp_tokens <= 0) continue;
    if (!header_done) {
      out << "\ntoken savings vs full_parallel (same M):\n";
      header_done = true;
    }
    const double saved =
        1.0 - static_cast<double>(row.record.total_new_tokens) /
                  static_cast<double>(fp_tokens);
    char line[160];
    std::snprintf(line, sizeof(line), "  %-24s %-14s %5.1f%%\n",
                  row.label.c_str(),
                  to_string(row.record.config.regime).c_str(), 100.0 * saved);
    out << line;
  }
  return out.str();
}

std::string render_rows_json(const std::vector<RecordRow>& rows) {
  ojson runs = ojson::array();
  for (const RecordRow& row : rows) {
    ojson entry{{"run", row.label}, {"ok", row.ok}};
    if (!row.ok) {
      entry["error"] = row.error;
    } else {
      entry["regime"] = to_string(row.record.config.regime);
      entry["theta"] = row.record.config.engine.theta;
      entry["M"] = row.record.config.engine.M;
      if (row.record.metrics) {
        entry["mean_pass_at_k"] = row.record.metrics->mean_pass_at_k;
        entry["mean_cons_at_k"] = row.record.metrics->mean_cons_at_k;
        entry["mean_pass_rate"] = row.record.metrics->mean_pass_rate;
        if (row.record.metrics->correlation) {
          entry["correlation"] =
              row.record.metrics->correlation->coefficient;
        }
      }
      entry["total_new_tokens"] = row.record.total_new_tokens;
      entry["total_sequences"] = row.record.total_sequences;
    }
    runs.push_back(std::move(entry));
  }
  return ojson{{"format_version", 1}, {"runs", runs}}.dump(2);
}

}  // namespace detail

ReportResult report(const std::string& run_dir) {
  std::vector<detail::RecordRow> rows;

  auto try_load = [&](const fs::path& record_path, const std::string& label) {
    if (!fs::exists(record_path)) return;
    detail::RecordRow row;
    row.label = label;
    try {
      std::ifstream in(record_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      row.record = run_record_from_json(buf.str());
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  };

  const fs::path base(run_dir);
  if (!fs::exists(base)) {
    throw InvalidInputError("report: no such directory: " + run_dir);
  }
  try_load(base / "record.json", base.filename().string());
  if (fs::is_directory(base)) {
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(base)) {
      if (entry.is_directory()) subdirs.push_back(entry.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const fs::path& sub : subdirs) {
      try_load(sub / "record.json", sub.filename().string());
    }
  }
  if (rows.empty()) {
    throw InvalidInputError("report: no record.json found under " + run_dir);
  }

  ReportResult result;
  result.text = detail::render_rows(rows);
  result.summary_json = detail::render_rows_json(rows);
  return result;
}

}  // namespace eager
