#include "mhxai/json_io.hpp"

#include <algorithm>
#include <cmath>

namespace mhxai::json_io {

namespace {

const char* class_name(int c) {
  static constexpr const char* kNames[] = {"Low", "Mid", "High"};
  return kNames[c];
}

json class_map(const ensemble::ClassVector& v) {
  json j = json::object();
  for (int c = 0; c < data::kNumClasses; ++c) j[class_name(c)] = v[c];
  return j;
}

json contributions(const std::vector<explain::Contribution>& cs) {
  json arr = json::array();
  for (const auto& c : cs) {
    arr.push_back({{"feature", c.feature}, {"value", c.value}, {"contribution", c.contribution}});
  }
  return arr;
}

}  // namespace

json to_json(const data::PatientRecord& r) {
  json j = {{"age", r.age},
            {"systolic_bp", r.systolic_bp},
            {"diastolic_bp", r.diastolic_bp},
            {"blood_sugar", r.blood_sugar},
            {"body_temp", r.body_temp},
            {"heart_rate", r.heart_rate}};
  if (!r.division.empty()) j["division"] = r.division;
  if (r.access_score) j["access_score"] = *r.access_score;
  if (r.risk) j["risk"] = std::string(data::to_string(*r.risk));
  return j;
}

json to_json(const fuzzy::FuzzyAssessment& a) {
  json rules = json::array();
  for (const auto& r : a.fired_rules) rules.push_back({{"id", r.id}, {"activation", r.activation}});
  return {{"score", a.score}, {"fallback", a.fallback}, {"fired_rules", rules}, {"clamped", a.clamped}};
}

json to_json(const fuzzy::Diagnostics& d) {
  json gaps = json::array();
  for (const auto& g : d.coverage_gaps) gaps.push_back({{"variable", g.variable}, {"x", g.x}});
  json violations = json::array();
  for (const auto& v : d.monotonicity_violations) {
    violations.push_back({{"variable", v.variable},
                          {"base_profile", v.base_profile},
                          {"x_from", v.x_from},
                          {"x_to", v.x_to},
                          {"score_from", v.score_from},
                          {"score_to", v.score_to}});
  }
  return {{"clean", d.clean()},
          {"coverage_gaps", gaps},
          {"unreachable_rules", d.unreachable_rules},
          {"unreachable_consequents", d.unreachable_consequents},
          {"monotonicity_violations", violations},
          {"monotonicity_profiles_checked", d.monotonicity_profiles_checked}};
}

json to_json(const ensemble::Metrics& m) {
  json per_class = json::array();
  for (int c = 0; c < data::kNumClasses; ++c) {
    json e = {{"class", class_name(c)}, {"precision", m.precision[c]}, {"recall", m.recall[c]}};
    e["roc_auc"] = m.class_auc[c] ? json(*m.class_auc[c]) : json(nullptr);
    per_class.push_back(e);
  }
  json confusion = json::array();
  for (int i = 0; i < data::kNumClasses; ++i) {
    json row = json::array();
    for (int k = 0; k < data::kNumClasses; ++k) row.push_back(m.confusion(i, k));
    confusion.push_back(row);
  }
  return {{"n", m.n},
          {"accuracy", m.accuracy},
          {"roc_auc", std::isfinite(m.roc_auc) ? json(m.roc_auc) : json(nullptr)},
          {"per_class", per_class},
          {"confusion", confusion}};
}

json to_json(const shap::ShapValues& s) {
  const auto& names = data::feature_names();
  json features = json::array();
  for (int f = 0; f < data::kNumFeatures; ++f) {
    features.push_back({{"feature", names[f]},
                        {"value", s.instance[f]},
                        {"phi", class_map(s.phi.row(f).transpose())}});
  }
  return {{"base_values", class_map(s.base_value)}, {"features", features}};
}

json to_json(const shap::GlobalImportance& g) {
  const auto& names = data::feature_names();
  json arr = json::array();
  for (std::size_t i = 0; i < g.rank.size(); ++i) {
    const int f = g.rank[i];
    arr.push_back({{"rank", i + 1}, {"feature", names[f]}, {"mean_abs_shap", g.mean_abs[f]}});
  }
  return arr;
}

json to_json(const explain::ExplanationBundle& b) {
  json j;
  j["type"] = std::string(explain::to_string(b.type));
  j["prediction"] = {{"risk", std::string(data::to_string(b.prediction.risk))},
                     {"probability", b.prediction.probability()},
                     {"probabilities", class_map(b.prediction.probabilities)}};
  if (b.fuzzy) {
    json rules = json::array();
    for (const auto& r : b.fuzzy->rules) {
      rules.push_back({{"id", r.id},
                       {"activation", r.activation},
                       {"consequent", r.consequent},
                       {"text", r.text}});
    }
    j["fuzzy"] = {{"score", b.fuzzy->score}, {"fallback", b.fuzzy->fallback}, {"rules", rules}};
  }
  if (b.shap) {
    j["shap"] = {{"explained_class", std::string(data::to_string(b.shap->explained_class))},
                 {"base_value", b.shap->base_value},
                 {"top", contributions(b.shap->top)}};
  }
  if (b.lime) {
    j["lime"] = {{"explained_class", std::string(data::to_string(b.lime->explained_class))},
                 {"intercept", b.lime->intercept},
                 {"local_fidelity", b.lime->local_fidelity},
                 {"top", contributions(b.lime->top)}};
  }
  if (b.type == explain::ExplanationType::kA) {
    json params = json::array();
    for (const auto& p : b.parameters) {
      params.push_back({{"field", p.field},
                        {"value", p.value},
                        {"unit", p.unit},
                        {"term", p.term},
                        {"flag", std::string(fuzzy::to_string(p.severity))}});
    }
    j["parameters"] = params;
  }
  j["model"] = {{"version", b.model.version}, {"validation_note", b.model.validation_note}};
  return j;
}

json to_json(const stats::TestResult& t) {
  json j = {{"statistic", t.statistic}, {"df", t.df}, {"p_value", t.p_value}};
  if (t.df2) j["df2"] = *t.df2;
  return j;
}

json to_json(const stats::SurveyReport& r) {
  auto props = [](const std::vector<stats::Proportion>& ps) {
    json arr = json::array();
    for (const auto& p : ps) {
      arr.push_back({{"label", p.label}, {"count", p.count}, {"total", p.total},
                     {"percent", p.percent()}});
    }
    return arr;
  };
  json by_case = json::array();
  for (const auto& row : r.preference_by_case) by_case.push_back(props(row));
  json demo = json::object();
  for (const auto& [title, items] : r.demographics) demo[title] = props(items);
  json clarity = json::array();
  for (const auto& c : r.clarity) {
    clarity.push_back({{"label", c.label}, {"mean", c.summary.mean}, {"sd", c.summary.sd},
                       {"n", c.summary.n}});
  }
  json power = json::array();
  for (const auto& p : r.power) {
    power.push_back({{"w", p.w}, {"n", p.n}, {"df", p.df}, {"alpha", p.alpha}, {"power", p.power}});
  }
  return {{"respondents", r.respondents},
          {"responses", r.responses},
          {"preferences_by_case", by_case},
          {"preferences_overall", props(r.preference_overall)},
          {"trust", props(r.trust)},
          {"demographics", demo},
          {"barriers", props(r.barriers)},
          {"chi_square_independence", to_json(r.independence)},
          {"chi_square_goodness_of_fit", to_json(r.goodness_of_fit)},
          {"cohens_w_independence", r.w_independence},
          {"clarity", clarity},
          {"clarity_anova", to_json(r.clarity_anova)},
          {"power", power},
          {"reported", r.reported},
          {"notes", r.notes}};
}

json to_json(const std::vector<FieldError>& errors) {
  json arr = json::array();
  for (const auto& e : errors) arr.push_back({{"field", e.field}, {"message", e.message}});
  return arr;
}

void check_record(const data::PatientRecord& r, const data::PlausibilityRanges& ranges,
                  std::vector<FieldError>& malformed, std::vector<FieldError>& out_of_range) {
  for (const auto& [field, message] : data::validate_record(r, ranges)) {
    // validate_record reports the systolic/diastolic relation as a pair of
    // "must" messages after the per-field range problems.
    auto& sink = message.rfind("value ", 0) == 0 ? out_of_range : malformed;
    sink.push_back({field, message});
  }
}

PatientInput patient_from_json(const json& j, const data::AccessTable& access,
                               const data::PlausibilityRanges& ranges) {
  PatientInput in;
  if (!j.is_object()) {
    in.malformed.push_back({"patient", "must be an object"});
    return in;
  }
  int pressures = 0;
  for (const auto& field : data::clinical_field_names()) {
    const auto it = j.find(field);
    if (it == j.end() || it->is_null()) {
      in.malformed.push_back({field, "is required"});
      continue;
    }
    if (!it->is_number()) {
      in.malformed.push_back({field, "must be a number"});
      continue;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
      in.malformed.push_back({field, "must be finite"});
      continue;
    }
    if (field == "age" && v != std::floor(v)) {
      in.malformed.push_back({field, "must be a whole number of years"});
      continue;
    }
    // Keep absurd ages representable as int; the range check still rejects them.
    data::set_clinical_value(in.record, field, field == "age" ? std::clamp(v, -1e6, 1e6) : v);
    pressures += field == "systolic_bp" || field == "diastolic_bp";
  }
  const auto div = j.find("division");
  if (div == j.end() || !div->is_string()) {
    in.malformed.push_back({"division", "is required (one of the eight division names)"});
  } else if (!access.contains(div->get<std::string>())) {
    in.malformed.push_back({"division", "unknown division '" + div->get<std::string>() + "'"});
  } else {
    in.record.division = div->get<std::string>();
    in.record.access_score = access.score(in.record.division);
  }
  if (in.malformed.empty()) {
    check_record(in.record, ranges, in.malformed, in.out_of_range);
  } else if (pressures == 2 && in.record.systolic_bp <= in.record.diastolic_bp) {
    // Report the pressure relation alongside other problems so one round trip shows all.
    in.malformed.push_back({"systolic_bp", "systolic_bp must exceed diastolic_bp"});
    in.malformed.push_back({"diastolic_bp", "diastolic_bp must be below systolic_bp"});
  }
  return in;
}

}  // namespace mhxai::json_io
