#include "mhxai/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mhxai/error.hpp"
#include "text_util.hpp"

namespace mhxai::data {

namespace {

constexpr std::array<std::string_view, 7> kCsvColumns = {
    "Age", "SystolicBP", "DiastolicBP", "BS", "BodyTemp", "HeartRate", "RiskLevel"};

std::optional<double> parse_double(std::string_view s) {
  s = util::trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return std::nan("");
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Shortest text that parses back to the same double.
std::string format_value(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string_view to_string(RiskLevel level) {
  switch (level) {
    case RiskLevel::kLow: return "Low";
    case RiskLevel::kMid: return "Mid";
    case RiskLevel::kHigh: return "High";
  }
  return "?";
}

std::optional<RiskLevel> parse_risk_level(std::string_view text) {
  const std::string t = util::to_lower(util::trim(text));
  if (t == "low risk" || t == "low") return RiskLevel::kLow;
  if (t == "mid risk" || t == "mid") return RiskLevel::kMid;
  if (t == "high risk" || t == "high") return RiskLevel::kHigh;
  return std::nullopt;
}

const std::array<std::string, 8>& division_names() {
  static const std::array<std::string, 8> names = {
      "Barishal", "Chattogram", "Dhaka", "Khulna",
      "Mymensingh", "Rajshahi", "Rangpur", "Sylhet"};
  return names;
}

const std::array<std::string, 6>& clinical_field_names() {
  static const std::array<std::string, 6> names = {
      "age", "systolic_bp", "diastolic_bp", "blood_sugar", "body_temp", "heart_rate"};
  return names;
}

double clinical_value(const PatientRecord& r, std::string_view field) {
  if (field == "age") return r.age;
  if (field == "systolic_bp") return r.systolic_bp;
  if (field == "diastolic_bp") return r.diastolic_bp;
  if (field == "blood_sugar") return r.blood_sugar;
  if (field == "body_temp") return r.body_temp;
  if (field == "heart_rate") return r.heart_rate;
  throw Error(ErrorCode::kInvalidArgument, "unknown clinical field '" + std::string(field) + "'");
}

void set_clinical_value(PatientRecord& r, std::string_view field, double value) {
  if (field == "age") {
    r.age = static_cast<int>(std::lround(value));
  } else if (field == "systolic_bp") {
    r.systolic_bp = value;
  } else if (field == "diastolic_bp") {
    r.diastolic_bp = value;
  } else if (field == "blood_sugar") {
    r.blood_sugar = value;
  } else if (field == "body_temp") {
    r.body_temp = value;
  } else if (field == "heart_rate") {
    r.heart_rate = value;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown clinical field '" + std::string(field) + "'");
  }
}

namespace {

const std::pair<double, double>& range_for(const PlausibilityRanges& ranges, int column) {
  switch (column) {
    case 0: return ranges.age;
    case 1: return ranges.systolic_bp;
    case 2: return ranges.diastolic_bp;
    case 3: return ranges.blood_sugar;
    case 4: return ranges.body_temp;
    default: return ranges.heart_rate;
  }
}

bool plausible(double v, const std::pair<double, double>& range) {
  return std::isfinite(v) && v >= range.first && v <= range.second;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> validate_record(
    const PatientRecord& r, const PlausibilityRanges& ranges) {
  std::vector<std::pair<std::string, std::string>> problems;
  const auto& names = clinical_field_names();
  for (int c = 0; c < 6; ++c) {
    const double v = clinical_value(r, names[c]);
    const auto& range = range_for(ranges, c);
    if (!plausible(v, range)) {
      problems.emplace_back(names[c], "value " + format_value(v) + " outside [" +
                                          format_value(range.first) + ", " +
                                          format_value(range.second) + "]");
    }
  }
  if (!(r.systolic_bp > r.diastolic_bp)) {
    problems.emplace_back("systolic_bp", "systolic_bp must exceed diastolic_bp");
    problems.emplace_back("diastolic_bp", "diastolic_bp must be below systolic_bp");
  }
  return problems;
}

std::array<std::size_t, kNumClasses> Dataset::label_counts() const {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& r : records) {
    if (r.risk) ++counts[static_cast<int>(*r.risk)];
  }
  return counts;
}

Dataset parse_csv(std::string_view text, std::string source,
                  const PlausibilityRanges& ranges) {
  auto lines = util::split_lines(text);
  // Skip leading blank lines before the header.
  std::size_t first = 0;
  while (first < lines.size() && util::trim(lines[first]).empty()) ++first;
  if (first == lines.size()) {
    throw Error(ErrorCode::kEmptyFile, source + ": file is empty");
  }

  std::array<int, 7> column_of{};
  {
    auto header = util::split(lines[first], ',');
    for (std::size_t k = 0; k < kCsvColumns.size(); ++k) {
      auto it = std::find_if(header.begin(), header.end(), [&](std::string_view h) {
        return util::trim(h) == kCsvColumns[k];
      });
      if (it == header.end()) {
        throw Error(ErrorCode::kMissingColumn,
                    source + ": missing column '" + std::string(kCsvColumns[k]) + "'");
      }
      column_of[k] = static_cast<int>(it - header.begin());
    }
  }

  struct RawRow {
    std::size_t line;
    std::array<double, 6> values;
    std::optional<RiskLevel> risk;
  };
  std::vector<RawRow> rows;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (util::trim(lines[i]).empty()) continue;
    auto cells = util::split(lines[i], ',');
    RawRow row{i + 1, {}, std::nullopt};
    for (int k = 0; k < 6; ++k) {
      const auto col = static_cast<std::size_t>(column_of[k]);
      std::optional<double> v = col < cells.size() ? parse_double(cells[col]) : std::nullopt;
      if (!v || (k == 0 && std::floor(*v) != *v)) {
        throw Error(ErrorCode::kUnparsableValue,
                    source + ": row " + std::to_string(row.line) + ", column '" +
                        std::string(kCsvColumns[k]) + "'");
      }
      row.values[k] = *v;
    }
    const auto label_col = static_cast<std::size_t>(column_of[6]);
    const std::string_view label = label_col < cells.size() ? util::trim(cells[label_col]) : "";
    if (!label.empty()) {
      row.risk = parse_risk_level(label);
      if (!row.risk) {
        throw Error(ErrorCode::kUnparsableValue,
                    source + ": row " + std::to_string(row.line) + ", column 'RiskLevel'");
      }
    }
    rows.push_back(row);
  }
  if (rows.empty()) {
    throw Error(ErrorCode::kEmptyFile, source + ": no data rows");
  }

  std::array<double, 6> medians{};
  for (int k = 0; k < 6; ++k) {
    std::vector<double> ok;
    for (const auto& row : rows) {
      if (plausible(row.values[k], range_for(ranges, k))) ok.push_back(row.values[k]);
    }
    medians[k] = median(std::move(ok));
  }

  Dataset ds;
  ds.provenance.source = std::move(source);
  ds.provenance.raw_rows = rows.size();
  const auto& names = clinical_field_names();
  for (auto& row : rows) {
    std::vector<int> bad;
    for (int k = 0; k < 6; ++k) {
      if (!plausible(row.values[k], range_for(ranges, k))) bad.push_back(k);
    }
    if (bad.size() > 1) {
      ds.provenance.actions.push_back("row " + std::to_string(row.line) + ": dropped, " +
                                      std::to_string(bad.size()) + " implausible fields");
      continue;
    }
    if (bad.size() == 1) {
      const int k = bad.front();
      double repaired = medians[k];
      if (k == 0) repaired = std::round(repaired);
      ds.provenance.actions.push_back("row " + std::to_string(row.line) + ": " + names[k] + "=" +
                                      format_value(row.values[k]) +
                                      " implausible, replaced by column median " +
                                      format_value(repaired));
      row.values[k] = repaired;
    }
    if (!(row.values[1] > row.values[2])) {
      ds.provenance.actions.push_back("row " + std::to_string(row.line) +
                                      ": dropped, systolic_bp <= diastolic_bp");
      continue;
    }
    PatientRecord r;
    r.age = static_cast<int>(row.values[0]);
    r.systolic_bp = row.values[1];
    r.diastolic_bp = row.values[2];
    r.blood_sugar = row.values[3];
    r.body_temp = row.values[4];
    r.heart_rate = row.values[5];
    r.risk = row.risk;
    ds.records.push_back(std::move(r));
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const PlausibilityRanges& ranges) {
  return parse_csv(util::read_file(path), path.string(), ranges);
}

std::string to_csv(const Dataset& ds) {
  std::ostringstream os;
  os << "Age,SystolicBP,DiastolicBP,BS,BodyTemp,HeartRate,RiskLevel\n";
  for (const auto& r : ds.records) {
    os << r.age << ',' << format_value(r.systolic_bp) << ',' << format_value(r.diastolic_bp)
       << ',' << format_value(r.blood_sugar) << ',' << format_value(r.body_temp) << ','
       << format_value(r.heart_rate) << ',';
    if (r.risk) os << util::to_lower(to_string(*r.risk)) << " risk";
    os << '\n';
  }
  return os.str();
}

AccessTable::AccessTable(std::map<std::string, double> scores) : scores_(std::move(scores)) {
  if (scores_.size() != division_names().size()) {
    throw Error(ErrorCode::kInvalidAccessTable,
                "access table must have exactly 8 entries, got " + std::to_string(scores_.size()));
  }
  for (const auto& [division, score] : scores_) {
    const auto& names = division_names();
    if (std::find(names.begin(), names.end(), division) == names.end()) {
      throw Error(ErrorCode::kInvalidAccessTable, "unknown division '" + division + "'");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
      throw Error(ErrorCode::kInvalidAccessTable,
                  "access score for '" + division + "' outside [0,1]");
    }
  }
}

AccessTable AccessTable::parse(std::string_view text) {
  std::map<std::string, double> scores;
  std::size_t line_no = 0;
  for (auto line : util::split_lines(text)) {
    ++line_no;
    line = util::trim(util::strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidAccessTable,
                  "access table line " + std::to_string(line_no) + ": expected 'division = score'");
    }
    const std::string key(util::trim(line.substr(0, eq)));
    const auto value = parse_double(line.substr(eq + 1));
    if (!value) {
      throw Error(ErrorCode::kInvalidAccessTable,
                  "access table line " + std::to_string(line_no) + ": bad score");
    }
    if (!scores.emplace(key, *value).second) {
      throw Error(ErrorCode::kInvalidAccessTable, "duplicate division '" + key + "'");
    }
  }
  return AccessTable(std::move(scores));
}

AccessTable AccessTable::load(const std::filesystem::path& path) {
  return parse(util::read_file(path));
}

AccessTable AccessTable::defaults() {
  return AccessTable({{"Barishal", 0.45},
                      {"Chattogram", 0.75},
                      {"Dhaka", 0.85},
                      {"Khulna", 0.65},
                      {"Mymensingh", 0.35},
                      {"Rajshahi", 0.62},
                      {"Rangpur", 0.40},
                      {"Sylhet", 0.48}});
}

double AccessTable::score(std::string_view division) const {
  auto it = scores_.find(std::string(division));
  if (it == scores_.end()) {
    throw Error(ErrorCode::kUnknownDivision, "unknown division '" + std::string(division) + "'");
  }
  return it->second;
}

bool AccessTable::contains(std::string_view division) const {
  return scores_.count(std::string(division)) > 0;
}

Dataset augment_access(const Dataset& ds, const AccessTable& table, std::uint64_t seed) {
  Dataset out = ds;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(division_names().size()) - 1);
  for (auto& r : out.records) {
    r.division = division_names()[pick(rng)];
    r.access_score = table.score(r.division);
  }
  out.provenance.synthetic_divisions = true;
  out.provenance.division_seed = seed;
  out.provenance.actions.push_back("divisions assigned by seeded uniform draw (synthetic), seed " +
                                   std::to_string(seed));
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed,
                                  bool stratified) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must be in (0,1)");
  }
  std::vector<std::vector<std::size_t>> groups;
  if (stratified) {
    groups.resize(kNumClasses);
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
      const auto& risk = ds.records[i].risk;
      if (!risk) {
        throw Error(ErrorCode::kInvalidArgument, "stratified split requires labelled records");
      }
      groups[static_cast<int>(*risk)].push_back(i);
    }
  } else {
    groups.emplace_back(ds.records.size());
    for (std::size_t i = 0; i < ds.records.size(); ++i) groups[0][i] = i;
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> test_idx;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& idx = groups[g];
    if (idx.empty()) continue;
    if (idx.size() < 2) {
      throw Error(ErrorCode::kClassTooSmall,
                  stratified ? "class " + std::string(to_string(static_cast<RiskLevel>(g))) +
                                   " has fewer than 2 records"
                             : "dataset has fewer than 2 records");
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
    test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  }
  std::sort(test_idx.begin(), test_idx.end());

  Dataset train, test;
  train.provenance = test.provenance = ds.provenance;
  const std::string note = "split: test_fraction " + format_value(test_fraction) + ", seed " +
                           std::to_string(seed) + (stratified ? ", stratified" : "");
  train.provenance.actions.push_back(note + " (train part)");
  test.provenance.actions.push_back(note + " (test part)");
  std::size_t t = 0;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    if (t < test_idx.size() && test_idx[t] == i) {
      test.records.push_back(ds.records[i]);
      ++t;
    } else {
      train.records.push_back(ds.records[i]);
    }
  }
  return {std::move(train), std::move(test)};
}

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = {
      "age", "systolic_bp", "diastolic_bp", "blood_sugar",
      "body_temp", "heart_rate", "access_score", "fuzzy_risk_score"};
  return names;
}

FeatureVector to_features(const PatientRecord& r, double fuzzy_score, const AccessTable& table) {
  if (!(fuzzy_score >= 0.0 && fuzzy_score <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fuzzy score must be in [0,100]");
  }
  FeatureVector x;
  x << r.age, r.systolic_bp, r.diastolic_bp, r.blood_sugar, r.body_temp, r.heart_rate,
      table.score(r.division), fuzzy_score;
  return x;
}

}  // namespace mhxai::data
