#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mhxai/data.hpp"

namespace mhxai::fuzzy {

/// Trapezoid a <= b <= c <= d: 0 outside [a,d], 1 on [b,c], linear on the
/// ramps. b == c gives a triangle; a == b (or c == d) gives a shoulder.
struct Trapezoid {
  double a = 0, b = 0, c = 0, d = 0;

  bool operator==(const Trapezoid&) const = default;
};

template <typename Scalar>
Scalar membership(const Trapezoid& mf, Scalar x) {
  if (x < Scalar(mf.a) || x > Scalar(mf.d)) return Scalar(0);
  if (x >= Scalar(mf.b) && x <= Scalar(mf.c)) return Scalar(1);
  if (x < Scalar(mf.b)) return (x - Scalar(mf.a)) / Scalar(mf.b - mf.a);
  return (Scalar(mf.d) - x) / Scalar(mf.d - mf.c);
}

/// Clinical reading of a term, used for parameter flags in explanations.
enum class Severity { kNormal, kElevated, kCritical };
std::string_view to_string(Severity s);

struct Term {
  std::string name;
  Trapezoid shape;
  Severity severity = Severity::kNormal;

  bool operator==(const Term&) const = default;
};

enum class Monotone { kNone, kIncreasing };

struct LinguisticVariable {
  std::string name;
  double min = 0;
  double max = 0;
  std::string unit;
  std::vector<Term> terms;
  /// Declared design property checked by validate_rulebase().
  Monotone monotone = Monotone::kNone;

  std::optional<std::size_t> term_index(std::string_view term) const;
  double clamp(double x) const { return x < min ? min : (x > max ? max : x); }

  bool operator==(const LinguisticVariable&) const = default;
};

struct Fuzzified {
  std::vector<double> degrees;  // one per term, in term order
  bool clamped = false;
};

/// Clamps x to the variable's domain, then evaluates every term.
Fuzzified fuzzify(const LinguisticVariable& v, double x);

/// Antecedent expression tree over `variable IS term` atoms.
struct Expr {
  enum class Kind { kAtom, kAnd, kOr, kNot };
  Kind kind = Kind::kAtom;
  std::string variable;
  std::string term;
  std::vector<Expr> children;
  // Resolved by RuleBase; -1 until then.
  int variable_index = -1;
  int term_index = -1;

  static Expr atom(std::string variable, std::string term);
  static Expr all_of(std::vector<Expr> children);
  static Expr any_of(std::vector<Expr> children);
  static Expr negate(Expr child);

  bool operator==(const Expr& other) const;
};

/// Grammar: expr := or ; or := and (OR and)* ; and := unary (AND unary)* ;
/// unary := NOT unary | '(' expr ')' | var IS term. Keywords are case-insensitive.
Expr parse_antecedent(std::string_view text);
std::string to_string(const Expr& e);

struct FuzzyRule {
  int id = 0;
  Expr antecedent;
  std::string consequent;  // output term name
  double weight = 1.0;
  std::string description;  // optional clinical phrasing for rendered explanations

  bool operator==(const FuzzyRule&) const = default;
};

/// variable -> term -> degree
using FuzzifiedInputs = std::map<std::string, std::map<std::string, double>>;

/// AND = min, OR = max, NOT = 1 - x. Throws kUnknownAtom for atoms missing
/// from `inputs`.
double evaluate(const Expr& e, const FuzzifiedInputs& inputs);
/// evaluate(antecedent) * weight.
double evaluate_rule(const FuzzyRule& rule, const FuzzifiedInputs& inputs);

/// Immutable, validated Mamdani knowledge base. Inputs are named after the
/// PatientRecord clinical fields.
class RuleBase {
 public:
  RuleBase(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
           std::vector<FuzzyRule> rules, double grid_step = 0.5);

  static RuleBase parse(std::string_view config_text);
  static RuleBase load(const std::filesystem::path& path);
  /// The shipped 12-rule clinical base (same content as config/rulebase.conf).
  static RuleBase defaults();
  static std::string_view default_config();

  std::string to_config() const;

  const std::vector<LinguisticVariable>& inputs() const { return inputs_; }
  const LinguisticVariable& output() const { return output_; }
  const std::vector<FuzzyRule>& rules() const { return rules_; }
  double grid_step() const { return grid_step_; }

  const LinguisticVariable* find_input(std::string_view name) const;
  const FuzzyRule* find_rule(int id) const;

  /// Copy with a different defuzzification grid step.
  RuleBase with_grid_step(double step) const;
  /// Copy without the rule `id`.
  RuleBase without_rule(int id) const;

  bool operator==(const RuleBase&) const = default;

 private:
  std::vector<LinguisticVariable> inputs_;
  LinguisticVariable output_;
  std::vector<FuzzyRule> rules_;
  double grid_step_;
};

struct FiredRule {
  int id = 0;
  double activation = 0;

  bool operator==(const FiredRule&) const = default;
};

struct FuzzyAssessment {
  double score = 50;                   // [0,100]
  std::vector<FiredRule> fired_rules;  // activation > 0, descending (ties by id)
  bool fallback = false;               // no rule fired; score is the domain midpoint
  std::vector<std::string> clamped;    // inputs clamped to their domain

  bool operator==(const FuzzyAssessment&) const = default;
};

/// Mamdani inference: clip consequents at rule activation, aggregate by max,
/// centroid over the rule base's output grid.
FuzzyAssessment infer(const RuleBase& rb, const data::PatientRecord& record);
/// Same, over raw input values keyed by variable name; missing inputs throw
/// kInvalidArgument.
FuzzyAssessment infer(const RuleBase& rb, const std::map<std::string, double>& inputs);

/// Centroid of max_t min(clip[t], mu_t(y)) on y = min, min+step, ..., max.
/// Returns nullopt when the aggregated shape has zero mass.
std::optional<double> defuzzify_centroid(const LinguisticVariable& output,
                                         const std::vector<double>& clip, double step);

/// Name of the term with maximal membership at x (first wins on ties).
const Term& dominant_term(const LinguisticVariable& v, double x);

struct CoverageGap {
  std::string variable;
  double x = 0;
};

struct MonotonicityViolation {
  std::string variable;
  std::map<std::string, double> base_profile;
  double x_from = 0, x_to = 0;
  double score_from = 0, score_to = 0;
};

struct Diagnostics {
  std::vector<CoverageGap> coverage_gaps;
  std::vector<int> unreachable_rules;
  std::vector<std::string> unreachable_consequents;
  std::vector<MonotonicityViolation> monotonicity_violations;
  std::size_t monotonicity_profiles_checked = 0;

  bool clean() const {
    return coverage_gaps.empty() && unreachable_rules.empty() &&
           unreachable_consequents.empty() && monotonicity_violations.empty();
  }
};

struct DiagnosticsOptions {
  int sweep_divisions = 200;      // grid step = domain / sweep_divisions
  int monotone_grid_points = 20;  // points per monotone variable
};

/// Grid-sweep diagnostics: term coverage gaps, rules whose activation is zero
/// everywhere on the joint grid of the variables they reference, output terms
/// no reachable rule produces, and monotonicity violations for inputs declared
/// Monotone::kIncreasing (other inputs held at every combination of their
/// term plateau centres).
Diagnostics validate_rulebase(const RuleBase& rb, const DiagnosticsOptions& options = {});

}  // namespace mhxai::fuzzy
