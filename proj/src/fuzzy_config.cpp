#include <charconv>
#include <sstream>

#include "mhxai/error.hpp"
#include "mhxai/fuzzy.hpp"
#include "text_util.hpp"

namespace mhxai::fuzzy {

namespace {

constexpr std::string_view kDefaultConfig = R"(# Default clinical rule base for the fuzzy maternal risk score.
#
# Term lines: term NAME = a b c d [severity]
#   a b c d are trapezoid breakpoints (a <= b <= c <= d) in the variable's unit;
#   severity (normal | elevated | critical) drives parameter flags in explanations.
# Rule lines: ID: ANTECEDENT -> OUTPUT_TERM [@ WEIGHT] [| DESCRIPTION]
#   ANTECEDENT := var IS term, combined with AND / OR / NOT and parentheses.
#
# Adjacent terms that feed the same consequent overlap at full membership so
# the OR of them never dips, and every rule that yields Medium is suppressed by
# the High evidence on pressure and blood sugar. Together these keep the score
# non-decreasing in systolic pressure and blood sugar.

[output risk]
domain = 0 100
unit = score
term Low = 0 0 20 40 normal
term Medium = 30 45 55 70 elevated
term High = 60 80 100 100 critical

[defuzzify]
step = 0.5

[input age]
domain = 10 70
unit = years
term Young = 10 10 22.5 25 normal
term Optimal = 20 22.5 27.5 32.5 normal
term Advanced = 27.5 32.5 37.5 40 elevated
term HighRisk = 35 38.75 70 70 critical

[input systolic_bp]
domain = 70 200
unit = mmHg
monotone = increasing
term Normal = 70 70 120 125 normal
term Elevated = 115 120 130 135 elevated
term Stage1 = 125 130 140 145 elevated
term Stage2 = 135 140 200 200 critical

[input diastolic_bp]
domain = 40 140
unit = mmHg
term Normal = 40 40 80 85 normal
term Stage1 = 75 80 90 95 elevated
term Stage2 = 85 90 140 140 critical

[input blood_sugar]
domain = 2 30
unit = mmol/L
monotone = increasing
term Normal = 2 2 5 5.5 normal
term Prediabetic = 5 5.5 8 8.5 elevated
term Diabetic = 7 7.8 30 30 critical

[input body_temp]
domain = 95 106
unit = F
term Normal = 95 95 99 100.4 normal
term Fever = 99 100.4 106 106 elevated

[input heart_rate]
domain = 40 200
unit = bpm
term Bradycardia = 40 40 50 60 elevated
term Normal = 50 60 90 100 normal
term Tachycardia = 90 100 200 200 elevated

[rules]
1: systolic_bp IS Stage2 OR blood_sugar IS Diabetic -> High | Stage-2 systolic pressure or diabetic-range blood sugar
2: diastolic_bp IS Stage2 -> High | Stage-2 diastolic pressure
3: (systolic_bp IS Elevated OR systolic_bp IS Stage1) AND NOT (systolic_bp IS Stage2 OR diastolic_bp IS Stage2 OR blood_sugar IS Diabetic) -> Medium | elevated or Stage-1 systolic pressure
4: diastolic_bp IS Stage1 AND NOT (systolic_bp IS Stage2 OR diastolic_bp IS Stage2 OR blood_sugar IS Diabetic) -> Medium | Stage-1 diastolic pressure
5: blood_sugar IS Prediabetic AND NOT (systolic_bp IS Stage2 OR diastolic_bp IS Stage2 OR blood_sugar IS Diabetic) -> Medium | prediabetic-range blood sugar
6: age IS HighRisk AND (systolic_bp IS Stage1 OR blood_sugar IS Prediabetic) -> High @ 0.8 | high-risk maternal age with Stage-1 pressure or prediabetic blood sugar
7: body_temp IS Fever -> Medium | fever
8: heart_rate IS Tachycardia OR heart_rate IS Bradycardia -> Medium | abnormal heart rate
9: body_temp IS Fever AND heart_rate IS Tachycardia AND NOT blood_sugar IS Normal -> High @ 0.7 | fever with tachycardia and raised blood sugar
10: systolic_bp IS Normal AND diastolic_bp IS Normal AND NOT blood_sugar IS Diabetic -> Low | normal blood pressure without diabetic-range blood sugar
11: body_temp IS Normal AND heart_rate IS Normal AND systolic_bp IS Normal AND NOT blood_sugar IS Diabetic -> Low @ 0.9 | normal vital signs and systolic pressure
12: age IS Advanced AND (systolic_bp IS Stage1 OR diastolic_bp IS Stage1) -> High @ 0.6 | advanced maternal age with Stage-1 pressure
)";

// ---- antecedent parser ----------------------------------------------------

struct Token {
  enum class Kind { kIdent, kIs, kAnd, kOr, kNot, kLParen, kRParen, kEnd };
  Kind kind;
  std::string text;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  const auto is_ident = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      out.push_back({Token::Kind::kLParen, "("});
      ++i;
    } else if (c == ')') {
      out.push_back({Token::Kind::kRParen, ")"});
      ++i;
    } else if (is_ident(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      const std::string upper = [&] {
        std::string u = word;
        for (auto& ch : u) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        return u;
      }();
      Token::Kind kind = Token::Kind::kIdent;
      if (upper == "IS") kind = Token::Kind::kIs;
      else if (upper == "AND") kind = Token::Kind::kAnd;
      else if (upper == "OR") kind = Token::Kind::kOr;
      else if (upper == "NOT") kind = Token::Kind::kNot;
      out.push_back({kind, std::move(word)});
      i = j;
    } else {
      throw Error(ErrorCode::kParseError,
                  "unexpected character '" + std::string(1, c) + "' in antecedent");
    }
  }
  out.push_back({Token::Kind::kEnd, ""});
  return out;
}

class AntecedentParser {
 public:
  explicit AntecedentParser(std::string_view text) : tokens_(tokenize(text)) {}

  Expr parse() {
    Expr e = parse_or();
    expect(Token::Kind::kEnd, "end of expression");
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  void expect(Token::Kind kind, std::string_view what) {
    if (peek().kind != kind) {
      throw Error(ErrorCode::kParseError, "antecedent: expected " + std::string(what) +
                                              (peek().text.empty() ? "" : " near '" + peek().text + "'"));
    }
    ++pos_;
  }

  Expr parse_or() {
    std::vector<Expr> parts{parse_and()};
    while (peek().kind == Token::Kind::kOr) {
      ++pos_;
      parts.push_back(parse_and());
    }
    return parts.size() == 1 ? std::move(parts.front()) : Expr::any_of(std::move(parts));
  }

  Expr parse_and() {
    std::vector<Expr> parts{parse_unary()};
    while (peek().kind == Token::Kind::kAnd) {
      ++pos_;
      parts.push_back(parse_unary());
    }
    return parts.size() == 1 ? std::move(parts.front()) : Expr::all_of(std::move(parts));
  }

  Expr parse_unary() {
    if (peek().kind == Token::Kind::kNot) {
      ++pos_;
      return Expr::negate(parse_unary());
    }
    if (peek().kind == Token::Kind::kLParen) {
      ++pos_;
      Expr e = parse_or();
      expect(Token::Kind::kRParen, "')'");
      return e;
    }
    if (peek().kind != Token::Kind::kIdent) {
      throw Error(ErrorCode::kParseError, "antecedent: expected a variable name");
    }
    std::string var = next().text;
    expect(Token::Kind::kIs, "IS");
    if (peek().kind != Token::Kind::kIdent) {
      throw Error(ErrorCode::kParseError, "antecedent: expected a term after IS");
    }
    return Expr::atom(std::move(var), next().text);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// ---- config file ------------------------------------------------------------

double to_number(std::string_view s, std::size_t line) {
  s = util::trim(s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidRuleBase,
                "rule base line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto w : util::split(s, ' ')) {
    w = util::trim(w);
    if (!w.empty()) out.push_back(w);
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Severity parse_severity(std::string_view s, std::size_t line) {
  if (s == "normal") return Severity::kNormal;
  if (s == "elevated") return Severity::kElevated;
  if (s == "critical") return Severity::kCritical;
  throw Error(ErrorCode::kInvalidRuleBase,
              "rule base line " + std::to_string(line) + ": unknown severity '" + std::string(s) + "'");
}

std::string to_string_child(const Expr& parent, const Expr& child) {
  const bool wrap = child.kind != Expr::Kind::kAtom && child.kind != Expr::Kind::kNot &&
                    child.kind != parent.kind;
  const std::string s = to_string(child);
  return wrap ? "(" + s + ")" : s;
}

void write_variable(std::ostringstream& os, std::string_view section, const LinguisticVariable& v) {
  os << '[' << section << ' ' << v.name << "]\n";
  os << "domain = " << format_number(v.min) << ' ' << format_number(v.max) << '\n';
  if (!v.unit.empty()) os << "unit = " << v.unit << '\n';
  if (v.monotone == Monotone::kIncreasing) os << "monotone = increasing\n";
  for (const auto& t : v.terms) {
    os << "term " << t.name << " = " << format_number(t.shape.a) << ' ' << format_number(t.shape.b)
       << ' ' << format_number(t.shape.c) << ' ' << format_number(t.shape.d) << ' '
       << to_string(t.severity) << '\n';
  }
  os << '\n';
}

}  // namespace

Expr parse_antecedent(std::string_view text) { return AntecedentParser(text).parse(); }

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kAtom:
      return e.variable + " IS " + e.term;
    case Expr::Kind::kNot: {
      const Expr& c = e.children.at(0);
      return c.kind == Expr::Kind::kAtom || c.kind == Expr::Kind::kNot
                 ? "NOT " + to_string(c)
                 : "NOT (" + to_string(c) + ")";
    }
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      const char* op = e.kind == Expr::Kind::kAnd ? " AND " : " OR ";
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += op;
        out += to_string_child(e, e.children[i]);
      }
      return out;
    }
  }
  return {};
}

RuleBase RuleBase::parse(std::string_view text) {
  std::vector<LinguisticVariable> inputs;
  std::optional<LinguisticVariable> output;
  std::vector<FuzzyRule> rules;
  double step = 0.5;

  enum class Section { kNone, kInput, kOutput, kDefuzzify, kRules } section = Section::kNone;
  LinguisticVariable* current = nullptr;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::kInvalidRuleBase, "rule base line " + std::to_string(line_no) + ": " + msg);
  };

  for (auto raw : util::split_lines(text)) {
    ++line_no;
    auto line = util::trim(util::strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      const auto head = words(line.substr(1, line.size() - 2));
      if (head.empty()) fail("empty section header");
      current = nullptr;
      if (head[0] == "input" || head[0] == "output") {
        if (head.size() != 2) fail("expected '[input NAME]' or '[output NAME]'");
        LinguisticVariable v;
        v.name = std::string(head[1]);
        if (head[0] == "input") {
          section = Section::kInput;
          inputs.push_back(std::move(v));
          current = &inputs.back();
        } else {
          if (output) fail("more than one output section");
          section = Section::kOutput;
          output = std::move(v);
          current = &*output;
        }
      } else if (head[0] == "defuzzify") {
        section = Section::kDefuzzify;
      } else if (head[0] == "rules") {
        section = Section::kRules;
      } else {
        fail("unknown section '" + std::string(head[0]) + "'");
      }
      continue;
    }

    if (section == Section::kRules) {
      const auto colon = line.find(':');
      const auto arrow = line.find("->");
      if (colon == std::string_view::npos || arrow == std::string_view::npos || arrow < colon) {
        fail("expected 'ID: ANTECEDENT -> TERM [@ WEIGHT] [| DESCRIPTION]'");
      }
      FuzzyRule rule;
      rule.id = static_cast<int>(to_number(line.substr(0, colon), line_no));
      try {
        rule.antecedent = parse_antecedent(line.substr(colon + 1, arrow - colon - 1));
      } catch (const Error& e) {
        fail(e.what());
      }
      auto rest = line.substr(arrow + 2);
      if (const auto bar = rest.find('|'); bar != std::string_view::npos) {
        rule.description = std::string(util::trim(rest.substr(bar + 1)));
        rest = rest.substr(0, bar);
      }
      if (const auto at = rest.find('@'); at != std::string_view::npos) {
        rule.weight = to_number(rest.substr(at + 1), line_no);
        rest = rest.substr(0, at);
      }
      const auto consequent = words(rest);
      if (consequent.size() != 1) fail("expected a single output term after '->'");
      rule.consequent = std::string(consequent[0]);
      rules.push_back(std::move(rule));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const auto key = words(line.substr(0, eq));
    const auto value = util::trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");

    if (section == Section::kDefuzzify) {
      if (key[0] != "step") fail("unknown defuzzify key '" + std::string(key[0]) + "'");
      step = to_number(value, line_no);
    } else if (current) {
      if (key[0] == "domain") {
        const auto bounds = words(value);
        if (bounds.size() != 2) fail("domain needs two numbers");
        current->min = to_number(bounds[0], line_no);
        current->max = to_number(bounds[1], line_no);
      } else if (key[0] == "unit") {
        current->unit = std::string(value);
      } else if (key[0] == "monotone") {
        if (value == "increasing") current->monotone = Monotone::kIncreasing;
        else if (value == "none") current->monotone = Monotone::kNone;
        else fail("monotone must be 'increasing' or 'none'");
      } else if (key[0] == "term") {
        if (key.size() != 2) fail("expected 'term NAME = a b c d [severity]'");
        const auto nums = words(value);
        if (nums.size() != 4 && nums.size() != 5) fail("term needs four breakpoints");
        Term t;
        t.name = std::string(key[1]);
        t.shape = {to_number(nums[0], line_no), to_number(nums[1], line_no),
                   to_number(nums[2], line_no), to_number(nums[3], line_no)};
        if (nums.size() == 5) t.severity = parse_severity(nums[4], line_no);
        current->terms.push_back(std::move(t));
      } else {
        fail("unknown key '" + std::string(key[0]) + "'");
      }
    } else {
      fail("key outside of a section");
    }
  }
  if (!output) {
    throw Error(ErrorCode::kInvalidRuleBase, "rule base has no [output ...] section");
  }
  return RuleBase(std::move(inputs), std::move(*output), std::move(rules), step);
}

RuleBase RuleBase::load(const std::filesystem::path& path) { return parse(util::read_file(path)); }

std::string_view RuleBase::default_config() { return kDefaultConfig; }

RuleBase RuleBase::defaults() {
  static const RuleBase rb = parse(kDefaultConfig);
  return rb;
}

std::string RuleBase::to_config() const {
  std::ostringstream os;
  write_variable(os, "output", output_);
  os << "[defuzzify]\nstep = " << format_number(grid_step_) << "\n\n";
  for (const auto& v : inputs_) write_variable(os, "input", v);
  os << "[rules]\n";
  for (const auto& r : rules_) {
    os << r.id << ": " << to_string(r.antecedent) << " -> " << r.consequent;
    if (r.weight != 1.0) os << " @ " << format_number(r.weight);
    if (!r.description.empty()) os << " | " << r.description;
    os << '\n';
  }
  return os.str();
}

}  // namespace mhxai::fuzzy
