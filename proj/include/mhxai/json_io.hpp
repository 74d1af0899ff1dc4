#pragma once

// Structured (JSON) forms of the library types. These are the service wire
// format and the CLI's --format json output.

#include <string>
#include <vector>

#include <json.hpp>

#include "mhxai/data.hpp"
#include "mhxai/ensemble.hpp"
#include "mhxai/explain.hpp"
#include "mhxai/fuzzy.hpp"
#include "mhxai/shap.hpp"
#include "mhxai/survey.hpp"

namespace mhxai::json_io {

using nlohmann::json;

json to_json(const data::PatientRecord& r);
json to_json(const fuzzy::FuzzyAssessment& a);
json to_json(const fuzzy::Diagnostics& d);
json to_json(const ensemble::Metrics& m);
json to_json(const shap::ShapValues& s);
json to_json(const shap::GlobalImportance& g);
json to_json(const explain::ExplanationBundle& b);
json to_json(const stats::TestResult& t);
json to_json(const stats::SurveyReport& r);

struct FieldError {
  std::string field;
  std::string message;
};

/// Result of reading a patient object. `malformed` holds missing fields,
/// wrong types and relational violations (diastolic >= systolic names both
/// fields); `out_of_range` holds values outside the plausibility ranges.
struct PatientInput {
  data::PatientRecord record;
  std::vector<FieldError> malformed;
  std::vector<FieldError> out_of_range;

  bool ok() const { return malformed.empty() && out_of_range.empty(); }
};

/// Reads {age, systolic_bp, diastolic_bp, blood_sugar, body_temp, heart_rate,
/// division}. The division must be a key of `access`.
PatientInput patient_from_json(const json& j, const data::AccessTable& access,
                               const data::PlausibilityRanges& ranges = {});

/// Range and relational checks on an already-typed record.
void check_record(const data::PatientRecord& r, const data::PlausibilityRanges& ranges,
                  std::vector<FieldError>& malformed, std::vector<FieldError>& out_of_range);

json to_json(const std::vector<FieldError>& errors);

}  // namespace mhxai::json_io
