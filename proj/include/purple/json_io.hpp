#pragma once

#include <string>

#include <json.hpp>

#include "purple/baselines.hpp"
#include "purple/checks.hpp"
#include "purple/harness.hpp"
#include "purple/model.hpp"
#include "purple/train.hpp"

namespace purple {

using Json = nlohmann::json;

Json to_json(const PurpleModel& model);
PurpleModel model_from_json(const Json& j);

Json to_json(const TrainConfig& config);
Json to_json(const EmConfig& config);
Json to_json(const FitResult& result);
Json to_json(const AssumptionCheckReport& report);
Json to_json(const GaussSynthConfig& config);
Json to_json(const CorpusConfig& config);
Json to_json(const ExperimentSuite& suite);

/// Values that are not finite become null.
Json number_or_null(double v);

/// FNV-1a of the compact dump.
std::uint64_t json_hash(const Json& j);

/// Writes `j` pretty-printed with a trailing newline; I/O errors name the path.
void write_json(const Json& j, const std::string& path);
Json read_json(const std::string& path);

}  // namespace purple
