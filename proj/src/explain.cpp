#include "mhxai/explain.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "mhxai/error.hpp"

namespace mhxai::explain {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string signed_fixed(double v, int digits) {
  return (v >= 0 ? "+" : "") + fixed(v, digits);
}

std::string capitalized(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::vector<int> top_by_magnitude(const ensemble::FeatureVector& v, int k) {
  std::vector<int> order(ensemble::kNumFeatures);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(v[a]) > std::abs(v[b]); });
  order.resize(static_cast<std::size_t>(std::clamp(k, 0, ensemble::kNumFeatures)));
  // Features with exactly zero weight carry no explanation.
  std::erase_if(order, [&](int f) { return v[f] == 0.0; });
  return order;
}

[[noreturn]] void missing(ExplanationType t, std::string_view what) {
  throw Error(ErrorCode::kMissingComponent, "type " + std::string(to_string(t)) +
                                                " explanation needs " + std::string(what));
}

}  // namespace

std::string_view to_string(ExplanationType t) {
  switch (t) {
    case ExplanationType::kA: return "A";
    case ExplanationType::kB: return "B";
    case ExplanationType::kC: return "C";
  }
  return "?";
}

ExplanationType parse_explanation_type(std::string_view s) {
  if (s == "A" || s == "a") return ExplanationType::kA;
  if (s == "B" || s == "b") return ExplanationType::kB;
  if (s == "C" || s == "c") return ExplanationType::kC;
  throw Error(ErrorCode::kInvalidArgument,
              "explanation type must be A, B or C, got '" + std::string(s) + "'");
}

Prediction make_prediction(const ensemble::TreeEnsemble& m, const ensemble::FeatureVector& x) {
  Prediction p;
  const auto margin = ensemble::predict_margin(m, x);
  p.probabilities = ensemble::softmax(margin);
  p.risk = static_cast<data::RiskLevel>(ensemble::argmax_high(margin));
  return p;
}

std::string rule_sentence(const fuzzy::FuzzyRule& rule, double activation) {
  const std::string reason =
      rule.description.empty() ? fuzzy::to_string(rule.antecedent) : rule.description;
  return "Rule " + std::to_string(rule.id) + " fired at " + fixed(activation, 2) + ": " +
         capitalized(reason) + " indicates " + rule.consequent + " risk";
}

ExplanationBundle compose(ExplanationType type, const Prediction& prediction,
                          const fuzzy::FuzzyAssessment* fuzzy, const shap::ShapValues* shap,
                          const lime::LimeExplanation* lime, const data::PatientRecord& record,
                          const fuzzy::RuleBase& rules, const ModelMeta& model,
                          const ComposeOptions& options) {
  if (type == ExplanationType::kA && !fuzzy) missing(type, "a fuzzy assessment");
  if (type != ExplanationType::kC && !shap) missing(type, "SHAP values");

  ExplanationBundle b;
  b.type = type;
  b.prediction = prediction;
  b.model = model;
  if (type == ExplanationType::kC) return b;

  const int cls = static_cast<int>(prediction.risk);
  const auto& names = data::feature_names();
  ShapSection s;
  s.explained_class = prediction.risk;
  s.base_value = shap->base_value[cls];
  const ensemble::FeatureVector phi = shap->phi.col(cls);
  for (int f : top_by_magnitude(phi, options.top_features)) {
    s.top.push_back({names[f], shap->instance[f], phi[f]});
  }
  b.shap = std::move(s);
  if (type == ExplanationType::kB) return b;

  FuzzySection fs;
  fs.score = fuzzy->score;
  fs.fallback = fuzzy->fallback;
  const auto shown = std::min<std::size_t>(fuzzy->fired_rules.size(),
                                           static_cast<std::size_t>(std::max(0, options.top_rules)));
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& fired = fuzzy->fired_rules[i];
    const fuzzy::FuzzyRule* rule = rules.find_rule(fired.id);
    if (!rule) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fired rule " + std::to_string(fired.id) + " is not in the rule base");
    }
    fs.rules.push_back({fired.id, fired.activation, rule->consequent,
                        rule_sentence(*rule, fired.activation)});
  }
  b.fuzzy = std::move(fs);

  if (lime) {
    LimeSection ls;
    ls.explained_class =
        lime->explained_class >= 0 ? static_cast<data::RiskLevel>(lime->explained_class)
                                   : prediction.risk;
    ls.intercept = lime->intercept;
    ls.local_fidelity = lime->local_fidelity;
    for (int f : top_by_magnitude(lime->weights, options.top_features)) {
      ls.top.push_back({names[f], shap->instance[f], lime->weights[f]});
    }
    b.lime = std::move(ls);
  }

  for (const auto& field : data::clinical_field_names()) {
    const auto* var = rules.find_input(field);
    if (!var) continue;
    const double value = data::clinical_value(record, field);
    const auto& term = fuzzy::dominant_term(*var, value);
    b.parameters.push_back({field, value, var->unit, term.name, term.severity});
  }
  return b;
}

std::string render_text(const ExplanationBundle& b) {
  std::ostringstream os;
  const auto& p = b.prediction;
  os << "Predicted risk: " << data::to_string(p.risk) << " (probability "
     << fixed(p.probability(), 3) << ")\n";
  os << "Class probabilities: Low " << fixed(p.probabilities[0], 3) << ", Mid "
     << fixed(p.probabilities[1], 3) << ", High " << fixed(p.probabilities[2], 3) << '\n';

  if (b.fuzzy) {
    os << "\nFuzzy clinical risk score: " << fixed(b.fuzzy->score, 1) << " / 100\n";
    if (b.fuzzy->fallback || b.fuzzy->rules.empty()) {
      os << "No clinical rule fired for this case (fallback); the score is the neutral "
            "midpoint.\n";
    }
    for (const auto& r : b.fuzzy->rules) os << "  " << r.text << '\n';
  }
  if (b.shap) {
    os << "\nFeature contributions toward " << data::to_string(b.shap->explained_class)
       << " (SHAP, base " << fixed(b.shap->base_value, 3) << "):\n";
    for (const auto& c : b.shap->top) {
      os << "  " << c.feature << " = " << fixed(c.value, 2) << ": "
         << signed_fixed(c.contribution, 3) << '\n';
    }
  }
  if (b.lime) {
    os << "\nLocal surrogate (LIME, fidelity " << fixed(b.lime->local_fidelity, 2) << "):\n";
    for (const auto& c : b.lime->top) {
      os << "  " << c.feature << ": " << signed_fixed(c.contribution, 3) << '\n';
    }
  }
  if (!b.parameters.empty()) {
    os << "\nClinical parameters:\n";
    for (const auto& prm : b.parameters) {
      os << "  " << prm.field << " = " << fixed(prm.value, 1);
      if (!prm.unit.empty()) os << ' ' << prm.unit;
      os << " [" << prm.term << ", " << fuzzy::to_string(prm.severity) << "]\n";
    }
  }
  os << "\nModel " << b.model.version;
  if (!b.model.validation_note.empty()) os << ": " << b.model.validation_note;
  os << '\n';
  return os.str();
}

}  // namespace mhxai::explain
