#include "mhxai/survey.hpp"

#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "mhxai/error.hpp"
#include "text_util.hpp"

namespace mhxai::stats {

long Proportion::per_mille() const {
  if (total <= 0) throw Error(ErrorCode::kInconsistentTotals, "proportion with empty total");
  // round(1000 * count / total), halves rounded up.
  return (2000 * count + total) / (2 * total);
}

std::string Proportion::percent() const {
  const long pm = per_mille();
  return std::to_string(pm / 10) + "." + std::to_string(pm % 10);
}

namespace {

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "survey file line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    bad_line(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

long parse_long(std::string_view s, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    bad_line(line, "expected a non-negative integer, got '" + std::string(s) + "'");
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

void check(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInconsistentTotals, what);
}

std::vector<Proportion> proportions(const std::vector<std::pair<std::string, long>>& counts,
                                    long total) {
  std::vector<Proportion> out;
  for (const auto& [label, n] : counts) out.push_back({label, n, total});
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

SurveyCounts parse_survey(std::string_view text) {
  SurveyCounts s;
  std::string section;
  std::vector<std::vector<long>> pref_rows;
  std::size_t line_no = 0;
  for (auto raw : util::split_lines(text)) {
    ++line_no;
    const auto line = util::trim(util::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') bad_line(line_no, "unterminated section header");
      section = std::string(util::trim(line.substr(1, line.size() - 2)));
      if (section.rfind("demographics:", 0) == 0) {
        s.demographics.push_back({std::string(util::trim(section.substr(13))), {}});
        section = "demographics";
      } else if (section != "preferences" && section != "trust" && section != "clarity" &&
                 section != "barriers" && section != "reported") {
        bad_line(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) bad_line(line_no, "expected 'key = value'");
    const std::string key(util::trim(line.substr(0, eq)));
    const auto value = util::trim(line.substr(eq + 1));

    if (section.empty()) {
      if (key != "respondents") bad_line(line_no, "unknown key '" + key + "'");
      s.respondents = parse_long(value, line_no);
    } else if (section == "preferences") {
      if (key == "columns") {
        for (auto c : util::split(value, '|')) s.preferences.col_labels.emplace_back(util::trim(c));
        continue;
      }
      std::vector<long> row;
      for (auto w : words(value)) row.push_back(parse_long(w, line_no));
      s.preferences.row_labels.push_back(key);
      pref_rows.push_back(std::move(row));
    } else if (section == "trust") {
      s.trust.emplace_back(key, parse_long(value, line_no));
    } else if (section == "barriers") {
      s.barriers.emplace_back(key, parse_long(value, line_no));
    } else if (section == "demographics") {
      s.demographics.back().counts.emplace_back(key, parse_long(value, line_no));
    } else if (section == "clarity") {
      const auto w = words(value);
      if (w.size() != 3) bad_line(line_no, "clarity needs 'mean sd n'");
      s.clarity.push_back(
          {key, GroupSummary{parse_double(w[0], line_no), parse_double(w[1], line_no),
                             parse_long(w[2], line_no)}});
    } else if (section == "reported") {
      s.reported[key] = parse_double(value, line_no);
    }
  }

  const auto cols = s.preferences.col_labels.size();
  if (cols == 0) throw Error(ErrorCode::kParseError, "survey file has no preference columns");
  s.preferences.counts.resize(static_cast<Eigen::Index>(pref_rows.size()),
                              static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < pref_rows.size(); ++i) {
    if (pref_rows[i].size() != cols) {
      throw Error(ErrorCode::kParseError, "preference row '" + s.preferences.row_labels[i] +
                                              "' does not have " + std::to_string(cols) +
                                              " counts");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      s.preferences.counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          pref_rows[i][j];
    }
  }
  return s;
}

SurveyCounts load_survey(const std::filesystem::path& path) {
  return parse_survey(util::read_file(path));
}

SurveyReport aggregate_survey(const SurveyCounts& c) {
  check(c.respondents > 0, "respondents must be positive");
  c.preferences.validate();
  const long n = c.respondents;
  const auto cases = c.preferences.counts.rows();
  for (Eigen::Index i = 0; i < cases; ++i) {
    check(c.preferences.counts.row(i).sum() == n,
          "preferences for '" + c.preferences.row_labels[static_cast<std::size_t>(i)] +
              "' do not sum to " + std::to_string(n));
  }
  const long responses = n * static_cast<long>(cases);
  long trust_total = 0;
  for (const auto& t : c.trust) trust_total += t.second;
  check(c.trust.empty() || trust_total == responses,
        "trust counts sum to " + std::to_string(trust_total) + ", expected " +
            std::to_string(responses));
  for (const auto& block : c.demographics) {
    long sum = 0;
    for (const auto& kv : block.counts) sum += kv.second;
    check(sum == n, "demographics '" + block.title + "' sum to " + std::to_string(sum) +
                        ", expected " + std::to_string(n));
  }
  for (const auto& [label, count] : c.barriers) {
    check(count <= n, "barrier '" + label + "' exceeds the cohort size");
  }
  for (const auto& g : c.clarity) {
    check(g.summary.n == n, "clarity '" + g.label + "' has n != respondents");
  }

  SurveyReport r;
  r.respondents = n;
  r.responses = responses;
  r.reported = c.reported;
  const auto& labels = c.preferences.col_labels;
  for (Eigen::Index i = 0; i < cases; ++i) {
    std::vector<Proportion> row;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      row.push_back({labels[j], c.preferences.counts(i, static_cast<Eigen::Index>(j)), n});
    }
    r.preference_by_case.push_back(std::move(row));
  }
  std::vector<double> observed, expected;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const long total = c.preferences.counts.col(static_cast<Eigen::Index>(j)).sum();
    r.preference_overall.push_back({labels[j], total, responses});
    observed.push_back(static_cast<double>(total));
    expected.push_back(static_cast<double>(responses) / static_cast<double>(labels.size()));
  }
  r.trust = proportions(c.trust, responses);
  for (const auto& block : c.demographics) {
    r.demographics.emplace_back(block.title, proportions(block.counts, n));
  }
  r.barriers = proportions(c.barriers, n);

  r.independence = chi_square_independence(c.preferences);
  r.goodness_of_fit = chi_square_gof(observed, expected);
  r.w_independence = cohens_w(r.independence.statistic, responses);
  if (c.clarity.size() >= 2) {
    std::vector<GroupSummary> groups;
    for (const auto& g : c.clarity) groups.push_back(g.summary);
    r.clarity_anova = anova_from_summary(groups);
  }
  r.clarity = c.clarity;

  const int df_pref = static_cast<int>(labels.size()) - 1;
  if (auto it = c.reported.find("cohens_w"); it != c.reported.end()) {
    r.power.push_back({it->second, n, df_pref, 0.05, chi_square_power(it->second, n, df_pref, 0.05)});
  }
  const int df_ind = static_cast<int>(r.independence.df);
  r.power.push_back({r.w_independence, responses, df_ind, 0.05,
                     chi_square_power(r.w_independence, responses, df_ind, 0.05)});

  if (auto it = c.reported.find("chi_square"); it != c.reported.end()) {
    r.notes.push_back("Reported chi-square " + fixed(it->second, 2) +
                      " is not reproduced by a Pearson independence test on the published "
                      "counts, which gives " +
                      fixed(r.independence.statistic, 2) + " (df " +
                      fixed(r.independence.df, 0) + "); the original test construction is "
                      "unknown.");
    if (auto w = c.reported.find("cohens_w"); w != c.reported.end()) {
      r.notes.push_back("Reported Cohen's w " + fixed(w->second, 2) + " differs from sqrt(" +
                        fixed(it->second, 2) + " / " + std::to_string(responses) + ") = " +
                        fixed(cohens_w(it->second, responses), 3) +
                        "; the normalization basis is unstated.");
    }
  }
  if (auto it = c.reported.find("power"); it != c.reported.end() && !r.power.empty()) {
    const auto& p = r.power.front();
    r.notes.push_back("Noncentral chi-square power at w=" + fixed(p.w, 2) +
                      ", n=" + std::to_string(p.n) + ", df=" + std::to_string(p.df) +
                      ", alpha=0.05 is " + fixed(100 * p.power, 1) + "% against a reported " +
                      fixed(100 * it->second, 0) + "%; the original tool settings are unpublished.");
  }
  return r;
}

std::string render_report(const SurveyReport& r) {
  std::ostringstream os;
  os << "Survey report (" << r.respondents << " respondents, " << r.responses
     << " case responses)\n\n";
  os << "Preferences by case\n";
  for (std::size_t i = 0; i < r.preference_by_case.size(); ++i) {
    os << "  case " << i + 1 << ':';
    for (const auto& p : r.preference_by_case[i]) {
      os << "  " << p.label << ' ' << p.count << " (" << p.percent() << "%)";
    }
    os << '\n';
  }
  os << "Preferences overall\n";
  for (const auto& p : r.preference_overall) {
    os << "  " << p.label << ": " << p.count << '/' << p.total << " (" << p.percent() << "%)\n";
  }
  os << "Trust\n";
  for (const auto& p : r.trust) {
    os << "  " << p.label << ": " << p.count << '/' << p.total << " (" << p.percent() << "%)\n";
  }
  for (const auto& [title, items] : r.demographics) {
    os << title << '\n';
    for (const auto& p : items) {
      os << "  " << p.label << ": " << p.count << " (" << p.percent() << "%)\n";
    }
  }
  if (!r.barriers.empty()) {
    os << "Barriers\n";
    for (const auto& p : r.barriers) {
      os << "  " << p.label << ": " << p.count << " (" << p.percent() << "%)\n";
    }
  }
  os << "\nChi-square independence (case x type): " << fixed(r.independence.statistic, 4)
     << ", df " << fixed(r.independence.df, 0) << ", p " << fixed(r.independence.p_value, 4)
     << '\n';
  os << "Chi-square goodness of fit (pooled vs uniform): "
     << fixed(r.goodness_of_fit.statistic, 4) << ", df " << fixed(r.goodness_of_fit.df, 0)
     << ", p " << fixed(r.goodness_of_fit.p_value, 6) << '\n';
  os << "Cohen's w (independence, N=" << r.responses << "): " << fixed(r.w_independence, 4)
     << '\n';
  if (r.clarity_anova.df2) {
    os << "Clarity ANOVA: F(" << fixed(r.clarity_anova.df, 0) << ',' << fixed(*r.clarity_anova.df2, 0)
       << ") = " << fixed(r.clarity_anova.statistic, 4) << ", p "
       << fixed(r.clarity_anova.p_value, 4) << '\n';
  }
  for (const auto& p : r.power) {
    os << "Power: w=" << fixed(p.w, 4) << " n=" << p.n << " df=" << p.df << " alpha="
       << fixed(p.alpha, 2) << " -> " << fixed(p.power, 4) << '\n';
  }
  if (!r.reported.empty()) {
    os << "\nPublished values\n";
    for (const auto& [k, v] : r.reported) os << "  " << k << ": " << v << '\n';
  }
  if (!r.notes.empty()) {
    os << "\nNotes\n";
    for (const auto& n : r.notes) os << "  - " << n << '\n';
  }
  return os.str();
}

}  // namespace mhxai::stats
