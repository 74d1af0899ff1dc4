#pragma once

#include <filesystem>
#include <string>

#include "mhxai/data.hpp"
#include "mhxai/fuzzy.hpp"
#include "mhxai/lime.hpp"
#include "mhxai/pipeline.hpp"

namespace mhxai {

enum class LogLevel { kError, kInfo, kDebug };

/// Everything a CLI invocation or the service needs. Empty paths mean "use
/// the built-in default" where one exists (access table, rule base).
struct AppConfig {
  std::filesystem::path dataset;
  std::filesystem::path access_table;
  std::filesystem::path rule_base;
  std::filesystem::path model = "model.txt";
  std::filesystem::path survey = "data/survey_counts.conf";
  pipeline::PipelineOptions pipeline;
  lime::LimeConfig lime;
  std::string host = "127.0.0.1";
  int port = 8080;
  LogLevel log_level = LogLevel::kInfo;

  /// MHXAI_BIND_ADDRESS ("host", "host:port" or ":port") and MHXAI_MODEL_PATH.
  void apply_env();

  data::AccessTable load_access_table() const;
  fuzzy::RuleBase load_rule_base() const;
};

LogLevel parse_log_level(std::string_view s);

}  // namespace mhxai
