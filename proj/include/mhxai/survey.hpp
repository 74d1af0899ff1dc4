#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mhxai/stats.hpp"

namespace mhxai::stats {

/// count / total as an exact rational, rendered to one decimal place of a
/// percentage (half-up rounding in integer arithmetic).
struct Proportion {
  std::string label;
  long count = 0;
  long total = 0;

  long per_mille() const;
  std::string percent() const;  // e.g. "71.4"
};

struct LabeledSummary {
  std::string label;
  GroupSummary summary;
};

struct CategoryBlock {
  std::string title;
  std::vector<std::pair<std::string, long>> counts;
};

/// Count tables reconstructed from published aggregates.
struct SurveyCounts {
  long respondents = 0;
  ContingencyTable preferences;  // rows: cases, columns: explanation types
  std::vector<std::pair<std::string, long>> trust;  // pooled over cases
  std::vector<LabeledSummary> clarity;
  std::vector<CategoryBlock> demographics;  // each block sums to respondents
  std::vector<std::pair<std::string, long>> barriers;  // multi-select, each <= respondents
  std::map<std::string, double> reported;  // published values for side-by-side display
};

SurveyCounts parse_survey(std::string_view text);
SurveyCounts load_survey(const std::filesystem::path& path);

struct SurveyReport {
  long respondents = 0;
  long responses = 0;  // respondents x cases
  std::vector<std::vector<Proportion>> preference_by_case;
  std::vector<Proportion> preference_overall;
  std::vector<Proportion> trust;
  std::vector<std::pair<std::string, std::vector<Proportion>>> demographics;
  std::vector<Proportion> barriers;

  TestResult independence;     // preference table, cases x types
  TestResult goodness_of_fit;  // pooled preferences vs uniform
  double w_independence = 0;   // from the computed independence statistic, N = responses
  TestResult clarity_anova;
  std::vector<LabeledSummary> clarity;

  struct PowerCase {
    double w = 0;
    long n = 0;
    int df = 0;
    double alpha = 0.05;
    double power = 0;
  };
  std::vector<PowerCase> power;
  std::map<std::string, double> reported;
  std::vector<std::string> notes;
};

/// Throws kInconsistentTotals when any table disagrees with the cohort size.
SurveyReport aggregate_survey(const SurveyCounts& counts);

/// Human-readable multi-section report.
std::string render_report(const SurveyReport& r);

}  // namespace mhxai::stats
