#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mhxai/data.hpp"
#include "mhxai/ensemble.hpp"
#include "mhxai/fuzzy.hpp"
#include "mhxai/lime.hpp"
#include "mhxai/shap.hpp"

namespace mhxai::explain {

/// A: fuzzy rules + SHAP + clinical parameters (+ optional LIME).
/// B: SHAP only. C: risk score only.
enum class ExplanationType { kA, kB, kC };

std::string_view to_string(ExplanationType t);
/// Accepts "A"/"B"/"C" in either case; throws kInvalidArgument otherwise.
ExplanationType parse_explanation_type(std::string_view s);

struct Prediction {
  data::RiskLevel risk = data::RiskLevel::kLow;
  ensemble::ClassVector probabilities = ensemble::ClassVector::Constant(1.0 / 3);

  double probability() const { return probabilities[static_cast<int>(risk)]; }
};

Prediction make_prediction(const ensemble::TreeEnsemble& m, const ensemble::FeatureVector& x);

struct Contribution {
  std::string feature;
  double value = 0;         // feature value of the instance
  double contribution = 0;  // phi or LIME weight
};

struct RuleLine {
  int id = 0;
  double activation = 0;
  std::string consequent;
  std::string text;
};

struct FuzzySection {
  double score = 0;
  bool fallback = false;
  std::vector<RuleLine> rules;  // top fired rules, strongest first
};

struct ShapSection {
  data::RiskLevel explained_class = data::RiskLevel::kLow;
  double base_value = 0;
  std::vector<Contribution> top;  // |contribution| descending
};

struct LimeSection {
  data::RiskLevel explained_class = data::RiskLevel::kLow;
  double intercept = 0;
  double local_fidelity = 0;
  std::vector<Contribution> top;
};

struct ParameterFlag {
  std::string field;
  double value = 0;
  std::string unit;
  std::string term;
  fuzzy::Severity severity = fuzzy::Severity::kNormal;
};

struct ModelMeta {
  std::string version;
  std::string validation_note;
};

struct ExplanationBundle {
  ExplanationType type = ExplanationType::kC;
  Prediction prediction;
  std::optional<FuzzySection> fuzzy;
  std::optional<ShapSection> shap;
  std::optional<LimeSection> lime;
  std::vector<ParameterFlag> parameters;  // Type A only
  ModelMeta model;
};

struct ComposeOptions {
  int top_features = 4;
  int top_rules = 3;
};

/// Component pointers may be null when the type does not need them. Type A
/// needs fuzzy and shap (lime optional), type B needs shap; otherwise
/// kMissingComponent. Components a type does not show are ignored.
ExplanationBundle compose(ExplanationType type, const Prediction& prediction,
                          const fuzzy::FuzzyAssessment* fuzzy, const shap::ShapValues* shap,
                          const lime::LimeExplanation* lime, const data::PatientRecord& record,
                          const fuzzy::RuleBase& rules, const ModelMeta& model,
                          const ComposeOptions& options = {});

/// "Rule 3 fired at 0.82: Stage-1 diastolic pressure indicates Medium risk".
std::string rule_sentence(const fuzzy::FuzzyRule& rule, double activation);

/// Deterministic plain-text rendering.
std::string render_text(const ExplanationBundle& b);

}  // namespace mhxai::explain
