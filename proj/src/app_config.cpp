#include "mhxai/app_config.hpp"

#include <cstdlib>

#include "mhxai/error.hpp"
#include "mhxai/service.hpp"

namespace mhxai {

void AppConfig::apply_env() {
  if (const char* bind = std::getenv("MHXAI_BIND_ADDRESS"); bind && *bind) {
    service::parse_bind_address(bind, host, port);
  }
  if (const char* path = std::getenv("MHXAI_MODEL_PATH"); path && *path) model = path;
}

data::AccessTable AppConfig::load_access_table() const {
  return access_table.empty() ? data::AccessTable::defaults() : data::AccessTable::load(access_table);
}

fuzzy::RuleBase AppConfig::load_rule_base() const {
  return rule_base.empty() ? fuzzy::RuleBase::defaults() : fuzzy::RuleBase::load(rule_base);
}

LogLevel parse_log_level(std::string_view s) {
  if (s == "error") return LogLevel::kError;
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  throw Error(ErrorCode::kInvalidArgument, "log level must be error, info or debug");
}

}  // namespace mhxai
