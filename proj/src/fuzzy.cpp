#include "mhxai/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <span>

#include "mhxai/error.hpp"

namespace mhxai::fuzzy {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kNormal: return "normal";
    case Severity::kElevated: return "elevated";
    case Severity::kCritical: return "critical";
  }
  return "normal";
}

std::optional<std::size_t> LinguisticVariable::term_index(std::string_view term) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].name == term) return i;
  }
  return std::nullopt;
}

Fuzzified fuzzify(const LinguisticVariable& v, double x) {
  Fuzzified out;
  const double clamped = v.clamp(x);
  out.clamped = clamped != x;
  out.degrees.reserve(v.terms.size());
  for (const auto& t : v.terms) out.degrees.push_back(membership(t.shape, clamped));
  return out;
}

const Term& dominant_term(const LinguisticVariable& v, double x) {
  const auto f = fuzzify(v, x);
  const auto it = std::max_element(f.degrees.begin(), f.degrees.end());
  return v.terms[static_cast<std::size_t>(it - f.degrees.begin())];
}

Expr Expr::atom(std::string variable, std::string term) {
  Expr e;
  e.kind = Kind::kAtom;
  e.variable = std::move(variable);
  e.term = std::move(term);
  return e;
}

Expr Expr::all_of(std::vector<Expr> children) {
  Expr e;
  e.kind = Kind::kAnd;
  e.children = std::move(children);
  return e;
}

Expr Expr::any_of(std::vector<Expr> children) {
  Expr e;
  e.kind = Kind::kOr;
  e.children = std::move(children);
  return e;
}

Expr Expr::negate(Expr child) {
  Expr e;
  e.kind = Kind::kNot;
  e.children.push_back(std::move(child));
  return e;
}

bool Expr::operator==(const Expr& other) const {
  return kind == other.kind && variable == other.variable && term == other.term &&
         children == other.children;
}

double evaluate(const Expr& e, const FuzzifiedInputs& inputs) {
  switch (e.kind) {
    case Expr::Kind::kAtom: {
      auto v = inputs.find(e.variable);
      if (v == inputs.end()) {
        throw Error(ErrorCode::kUnknownAtom, "unknown variable '" + e.variable + "'");
      }
      auto t = v->second.find(e.term);
      if (t == v->second.end()) {
        throw Error(ErrorCode::kUnknownAtom,
                    "unknown term '" + e.term + "' for variable '" + e.variable + "'");
      }
      return t->second;
    }
    case Expr::Kind::kAnd: {
      double acc = 1.0;
      for (const auto& c : e.children) acc = std::min(acc, evaluate(c, inputs));
      return acc;
    }
    case Expr::Kind::kOr: {
      double acc = 0.0;
      for (const auto& c : e.children) acc = std::max(acc, evaluate(c, inputs));
      return acc;
    }
    case Expr::Kind::kNot:
      return 1.0 - evaluate(e.children.at(0), inputs);
  }
  return 0.0;
}

double evaluate_rule(const FuzzyRule& rule, const FuzzifiedInputs& inputs) {
  return evaluate(rule.antecedent, inputs) * rule.weight;
}

namespace {

using DegreeTable = std::vector<std::vector<double>>;  // [variable][term]

double evaluate_resolved(const Expr& e, const DegreeTable& degrees) {
  switch (e.kind) {
    case Expr::Kind::kAtom:
      return degrees[static_cast<std::size_t>(e.variable_index)]
                    [static_cast<std::size_t>(e.term_index)];
    case Expr::Kind::kAnd: {
      double acc = 1.0;
      for (const auto& c : e.children) acc = std::min(acc, evaluate_resolved(c, degrees));
      return acc;
    }
    case Expr::Kind::kOr: {
      double acc = 0.0;
      for (const auto& c : e.children) acc = std::max(acc, evaluate_resolved(c, degrees));
      return acc;
    }
    case Expr::Kind::kNot:
      return 1.0 - evaluate_resolved(e.children[0], degrees);
  }
  return 0.0;
}

void resolve(Expr& e, const std::vector<LinguisticVariable>& inputs) {
  if (e.kind == Expr::Kind::kAtom) {
    auto it = std::find_if(inputs.begin(), inputs.end(),
                           [&](const LinguisticVariable& v) { return v.name == e.variable; });
    if (it == inputs.end()) {
      throw Error(ErrorCode::kUnknownAtom, "unknown variable '" + e.variable + "'");
    }
    const auto term = it->term_index(e.term);
    if (!term) {
      throw Error(ErrorCode::kUnknownAtom,
                  "unknown term '" + e.term + "' for variable '" + e.variable + "'");
    }
    e.variable_index = static_cast<int>(it - inputs.begin());
    e.term_index = static_cast<int>(*term);
    return;
  }
  if (e.children.empty() || (e.kind == Expr::Kind::kNot && e.children.size() != 1)) {
    throw Error(ErrorCode::kInvalidRuleBase, "malformed antecedent expression");
  }
  for (auto& c : e.children) resolve(c, inputs);
}

void collect_variables(const Expr& e, std::set<int>& out) {
  if (e.kind == Expr::Kind::kAtom) {
    out.insert(e.variable_index);
    return;
  }
  for (const auto& c : e.children) collect_variables(c, out);
}

void check_variable(const LinguisticVariable& v) {
  if (v.name.empty()) throw Error(ErrorCode::kInvalidRuleBase, "variable without a name");
  if (!(v.min < v.max)) {
    throw Error(ErrorCode::kInvalidRuleBase, "variable '" + v.name + "': empty domain");
  }
  if (v.terms.empty()) {
    throw Error(ErrorCode::kInvalidRuleBase, "variable '" + v.name + "' has no terms");
  }
  std::set<std::string> seen;
  for (const auto& t : v.terms) {
    const auto& s = t.shape;
    if (!(s.a <= s.b && s.b <= s.c && s.c <= s.d)) {
      throw Error(ErrorCode::kInvalidRuleBase,
                  "term '" + v.name + "." + t.name + "': breakpoints must satisfy a<=b<=c<=d");
    }
    if (s.a < v.min || s.d > v.max) {
      throw Error(ErrorCode::kInvalidRuleBase,
                  "term '" + v.name + "." + t.name + "': support outside the domain");
    }
    if (!seen.insert(t.name).second) {
      throw Error(ErrorCode::kInvalidRuleBase, "duplicate term '" + v.name + "." + t.name + "'");
    }
  }
}

struct Inference {
  double score;
  std::vector<double> activations;  // per rule, in rule order
  bool fallback;
};

Inference infer_values(const RuleBase& rb, std::span<const double> values,
                       std::vector<std::string>* clamped = nullptr) {
  DegreeTable degrees(rb.inputs().size());
  for (std::size_t v = 0; v < rb.inputs().size(); ++v) {
    auto f = fuzzify(rb.inputs()[v], values[v]);
    if (f.clamped && clamped) clamped->push_back(rb.inputs()[v].name);
    degrees[v] = std::move(f.degrees);
  }
  const auto& out_terms = rb.output().terms;
  std::vector<double> clip(out_terms.size(), 0.0);
  Inference result{0.0, {}, false};
  result.activations.reserve(rb.rules().size());
  for (const auto& rule : rb.rules()) {
    const double a = evaluate_resolved(rule.antecedent, degrees) * rule.weight;
    result.activations.push_back(a);
    const auto t = *rb.output().term_index(rule.consequent);
    clip[t] = std::max(clip[t], a);
  }
  const auto centroid = defuzzify_centroid(rb.output(), clip, rb.grid_step());
  if (centroid) {
    result.score = *centroid;
  } else {
    result.score = 0.5 * (rb.output().min + rb.output().max);
    result.fallback = true;
  }
  return result;
}

}  // namespace

RuleBase::RuleBase(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
                   std::vector<FuzzyRule> rules, double grid_step)
    : inputs_(std::move(inputs)),
      output_(std::move(output)),
      rules_(std::move(rules)),
      grid_step_(grid_step) {
  const auto& fields = data::clinical_field_names();
  std::set<std::string> names;
  for (const auto& v : inputs_) {
    check_variable(v);
    if (std::find(fields.begin(), fields.end(), v.name) == fields.end()) {
      throw Error(ErrorCode::kInvalidRuleBase,
                  "input '" + v.name + "' is not a patient record field");
    }
    if (!names.insert(v.name).second) {
      throw Error(ErrorCode::kInvalidRuleBase, "duplicate input '" + v.name + "'");
    }
  }
  check_variable(output_);
  if (!(grid_step_ > 0.0)) {
    throw Error(ErrorCode::kInvalidRuleBase, "grid step must be positive");
  }
  const double cells = (output_.max - output_.min) / grid_step_;
  if (std::abs(cells - std::round(cells)) > 1e-9 * std::max(1.0, cells)) {
    throw Error(ErrorCode::kInvalidRuleBase, "grid step must divide the output domain");
  }
  std::set<int> ids;
  for (auto& rule : rules_) {
    if (!ids.insert(rule.id).second) {
      throw Error(ErrorCode::kInvalidRuleBase, "duplicate rule id " + std::to_string(rule.id));
    }
    if (!(rule.weight > 0.0 && rule.weight <= 1.0)) {
      throw Error(ErrorCode::kInvalidRuleBase,
                  "rule " + std::to_string(rule.id) + ": weight must be in (0,1]");
    }
    if (!output_.term_index(rule.consequent)) {
      throw Error(ErrorCode::kUnknownAtom, "rule " + std::to_string(rule.id) +
                                               ": unknown consequent '" + rule.consequent + "'");
    }
    resolve(rule.antecedent, inputs_);
  }
}

const LinguisticVariable* RuleBase::find_input(std::string_view name) const {
  for (const auto& v : inputs_) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

const FuzzyRule* RuleBase::find_rule(int id) const {
  for (const auto& r : rules_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

RuleBase RuleBase::with_grid_step(double step) const {
  return RuleBase(inputs_, output_, rules_, step);
}

RuleBase RuleBase::without_rule(int id) const {
  std::vector<FuzzyRule> kept;
  for (const auto& r : rules_) {
    if (r.id != id) kept.push_back(r);
  }
  return RuleBase(inputs_, output_, std::move(kept), grid_step_);
}

std::optional<double> defuzzify_centroid(const LinguisticVariable& output,
                                         const std::vector<double>& clip, double step) {
  const auto cells = static_cast<long>(std::lround((output.max - output.min) / step));
  double mass = 0.0;
  double moment = 0.0;
  for (long k = 0; k <= cells; ++k) {
    const double y = output.min + static_cast<double>(k) * step;
    double mu = 0.0;
    for (std::size_t t = 0; t < output.terms.size(); ++t) {
      if (clip[t] <= 0.0) continue;
      mu = std::max(mu, std::min(clip[t], membership(output.terms[t].shape, y)));
    }
    mass += mu;
    moment += mu * y;
  }
  if (mass <= 0.0) return std::nullopt;
  return std::clamp(moment / mass, output.min, output.max);
}

namespace {

FuzzyAssessment to_assessment(const RuleBase& rb, const Inference& inf,
                              std::vector<std::string> clamped) {
  FuzzyAssessment out;
  out.score = inf.score;
  out.fallback = inf.fallback;
  out.clamped = std::move(clamped);
  for (std::size_t i = 0; i < rb.rules().size(); ++i) {
    if (inf.activations[i] > 0.0) out.fired_rules.push_back({rb.rules()[i].id, inf.activations[i]});
  }
  std::sort(out.fired_rules.begin(), out.fired_rules.end(),
            [](const FiredRule& l, const FiredRule& r) {
              return l.activation != r.activation ? l.activation > r.activation : l.id < r.id;
            });
  return out;
}

}  // namespace

FuzzyAssessment infer(const RuleBase& rb, const std::map<std::string, double>& inputs) {
  std::vector<double> values;
  values.reserve(rb.inputs().size());
  for (const auto& v : rb.inputs()) {
    auto it = inputs.find(v.name);
    if (it == inputs.end()) {
      throw Error(ErrorCode::kInvalidArgument, "missing fuzzy input '" + v.name + "'");
    }
    values.push_back(it->second);
  }
  std::vector<std::string> clamped;
  const auto inf = infer_values(rb, values, &clamped);
  return to_assessment(rb, inf, std::move(clamped));
}

FuzzyAssessment infer(const RuleBase& rb, const data::PatientRecord& record) {
  std::vector<double> values;
  values.reserve(rb.inputs().size());
  for (const auto& v : rb.inputs()) values.push_back(data::clinical_value(record, v.name));
  std::vector<std::string> clamped;
  const auto inf = infer_values(rb, values, &clamped);
  return to_assessment(rb, inf, std::move(clamped));
}

namespace {

std::vector<double> sweep_grid(const LinguisticVariable& v, int divisions) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(divisions) + 1);
  for (int k = 0; k <= divisions; ++k) {
    xs.push_back(v.min + (v.max - v.min) * static_cast<double>(k) / divisions);
  }
  return xs;
}

void check_coverage(const LinguisticVariable& v, int divisions, Diagnostics& diag) {
  for (double x : sweep_grid(v, divisions)) {
    const auto f = fuzzify(v, x);
    if (std::none_of(f.degrees.begin(), f.degrees.end(), [](double d) { return d > 0.0; })) {
      diag.coverage_gaps.push_back({v.name, x});
    }
  }
}

// Distinct term-degree vectors a variable takes along its sweep grid.
std::vector<std::vector<double>> distinct_degrees(const LinguisticVariable& v, int divisions) {
  std::vector<std::vector<double>> out;
  for (double x : sweep_grid(v, divisions)) {
    auto d = fuzzify(v, x).degrees;
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(std::move(d));
  }
  return out;
}

bool rule_reachable(const RuleBase& rb, const FuzzyRule& rule, int divisions) {
  std::set<int> used;
  collect_variables(rule.antecedent, used);
  const std::vector<int> vars(used.begin(), used.end());

  std::vector<std::vector<std::vector<double>>> options;
  for (int v : vars) {
    options.push_back(distinct_degrees(rb.inputs()[static_cast<std::size_t>(v)], divisions));
  }
  DegreeTable table(rb.inputs().size());
  for (std::size_t v = 0; v < rb.inputs().size(); ++v) {
    table[v].assign(rb.inputs()[v].terms.size(), 0.0);
  }
  // Odometer over the joint grid of referenced variables.
  std::vector<std::size_t> pos(vars.size(), 0);
  while (true) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
      table[static_cast<std::size_t>(vars[i])] = options[i][pos[i]];
    }
    if (evaluate_resolved(rule.antecedent, table) * rule.weight > 1e-12) return true;
    std::size_t i = 0;
    while (i < pos.size() && ++pos[i] == options[i].size()) {
      pos[i] = 0;
      ++i;
    }
    if (i == pos.size()) return false;
  }
}

std::vector<double> plateau_centres(const LinguisticVariable& v) {
  std::vector<double> xs;
  for (const auto& t : v.terms) {
    const double x = 0.5 * (t.shape.b + t.shape.c);
    if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
  }
  return xs;
}

void check_monotone(const RuleBase& rb, std::size_t var, int points, Diagnostics& diag) {
  const auto& inputs = rb.inputs();
  std::vector<std::vector<double>> levels(inputs.size());
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    levels[v] = v == var ? std::vector<double>{0.0} : plateau_centres(inputs[v]);
  }
  const auto& mv = inputs[var];
  std::vector<std::size_t> pos(inputs.size(), 0);
  std::vector<double> values(inputs.size());
  while (true) {
    for (std::size_t v = 0; v < inputs.size(); ++v) values[v] = levels[v][pos[v]];
    double prev_x = 0, prev_score = 0;
    for (int k = 0; k < points; ++k) {
      const double x = mv.min + (mv.max - mv.min) * static_cast<double>(k) / (points - 1);
      values[var] = x;
      const double score = infer_values(rb, values).score;
      if (k > 0 && score < prev_score - 1e-9) {
        MonotonicityViolation viol{mv.name, {}, prev_x, x, prev_score, score};
        for (std::size_t v = 0; v < inputs.size(); ++v) {
          if (v != var) viol.base_profile[inputs[v].name] = values[v];
        }
        diag.monotonicity_violations.push_back(std::move(viol));
      }
      prev_x = x;
      prev_score = score;
    }
    ++diag.monotonicity_profiles_checked;
    std::size_t i = 0;
    while (i < pos.size() && ++pos[i] == levels[i].size()) {
      pos[i] = 0;
      ++i;
    }
    if (i == pos.size()) break;
  }
}

}  // namespace

Diagnostics validate_rulebase(const RuleBase& rb, const DiagnosticsOptions& options) {
  Diagnostics diag;
  for (const auto& v : rb.inputs()) check_coverage(v, options.sweep_divisions, diag);
  check_coverage(rb.output(), options.sweep_divisions, diag);

  std::set<std::string> produced;
  for (const auto& rule : rb.rules()) {
    if (rule_reachable(rb, rule, options.sweep_divisions)) {
      produced.insert(rule.consequent);
    } else {
      diag.unreachable_rules.push_back(rule.id);
    }
  }
  for (const auto& t : rb.output().terms) {
    if (!produced.count(t.name)) diag.unreachable_consequents.push_back(t.name);
  }

  for (std::size_t v = 0; v < rb.inputs().size(); ++v) {
    if (rb.inputs()[v].monotone == Monotone::kIncreasing) {
      check_monotone(rb, v, options.monotone_grid_points, diag);
    }
  }
  return diag;
}

}  // namespace mhxai::fuzzy
