#pragma once

// Internal JSON adapters (nlohmann stays out of the public headers).

#include <nlohmann/json.hpp>

#include "eager/harness.hpp"

namespace eager::detail {

using ojson = nlohmann::ordered_json;

ojson engine_config_json(const EngineConfig& cfg);
EngineConfig engine_config_from(const ojson& doc);

ojson source_descriptor_json(const SourceDescriptor& src);
SourceDescriptor source_descriptor_from(const ojson& doc);

ojson extractor_json(const AnswerExtractorConfig& cfg);
AnswerExtractorConfig extractor_from(const ojson& doc);

ojson bench_spec_json(const BenchSpec& spec);
BenchSpec bench_spec_from(const ojson& doc);

ojson run_config_json(const RunConfig& config);
RunConfig run_config_from(const ojson& doc);

ojson budget_plan_json(const BudgetPlan& plan);
BudgetPlan budget_plan_from(const ojson& doc);

ojson directive_json(const RerunDirective& d);
RerunDirective directive_from(const ojson& doc);

ojson metrics_json(const MetricsReport& metrics);
MetricsReport metrics_from(const ojson& doc);

ojson run_record_json(const RunRecord& record);
RunRecord run_record_from(const ojson& doc);

ojson event_json(const EngineEvent& event);

}  // namespace eager::detail
