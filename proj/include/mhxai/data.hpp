#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mhxai::data {

enum class RiskLevel : int { kLow = 0, kMid = 1, kHigh = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr int kNumFeatures = 8;

std::string_view to_string(RiskLevel level);
/// Accepts "low risk" / "mid risk" / "high risk" (any case) as in the UCI file,
/// and the short forms "low" / "mid" / "high".
std::optional<RiskLevel> parse_risk_level(std::string_view text);

/// The eight administrative divisions, in alphabetical order. Division draws
/// index into this list.
const std::array<std::string, 8>& division_names();

struct PatientRecord {
  int age = 0;               // years
  double systolic_bp = 0;    // mmHg
  double diastolic_bp = 0;   // mmHg
  double blood_sugar = 0;    // mmol/L
  double body_temp = 0;      // degrees Fahrenheit
  double heart_rate = 0;     // beats/min
  std::string division;      // empty until augment_access()
  std::optional<double> access_score;
  std::optional<RiskLevel> risk;

  bool operator==(const PatientRecord&) const = default;
};

/// Plausibility bounds used by the cleaning policy. A value v is plausible
/// when lo <= v <= hi.
struct PlausibilityRanges {
  std::pair<double, double> age{10, 70};
  std::pair<double, double> systolic_bp{70, 200};
  std::pair<double, double> diastolic_bp{40, 140};
  std::pair<double, double> blood_sugar{2, 30};
  std::pair<double, double> body_temp{95, 106};
  std::pair<double, double> heart_rate{40, 200};
};

/// Names of the six clinical fields, in CSV column order.
const std::array<std::string, 6>& clinical_field_names();
/// Reads one of the six clinical fields by its contract name.
double clinical_value(const PatientRecord& r, std::string_view field);
/// Writes one of the six clinical fields; throws kInvalidArgument on unknown names.
void set_clinical_value(PatientRecord& r, std::string_view field, double value);

/// Returns a list of (field, message) problems; empty when the record satisfies
/// the PatientRecord invariants under `ranges`.
std::vector<std::pair<std::string, std::string>> validate_record(
    const PatientRecord& r, const PlausibilityRanges& ranges = {});

struct Provenance {
  std::string source;
  std::size_t raw_rows = 0;
  std::vector<std::string> actions;
  bool synthetic_divisions = false;
  std::optional<std::uint64_t> division_seed;

  bool operator==(const Provenance&) const = default;
};

struct Dataset {
  std::vector<PatientRecord> records;
  Provenance provenance;

  /// Counts per RiskLevel over labelled records.
  std::array<std::size_t, kNumClasses> label_counts() const;
  std::size_t size() const { return records.size(); }

  bool operator==(const Dataset&) const = default;
};

Dataset load_csv(const std::filesystem::path& path,
                 const PlausibilityRanges& ranges = {});
/// Same as load_csv but over in-memory text; `source` names it in provenance.
Dataset parse_csv(std::string_view text, std::string source,
                  const PlausibilityRanges& ranges = {});

/// Writes the UCI schema (no division/access columns).
std::string to_csv(const Dataset& ds);

class AccessTable {
 public:
  /// Validates: exactly the eight division names, each score in [0,1].
  explicit AccessTable(std::map<std::string, double> scores);

  static AccessTable load(const std::filesystem::path& path);
  static AccessTable parse(std::string_view text);
  /// Placeholder scores in [0.3, 0.9]; not derived from any health-system data.
  static AccessTable defaults();

  double score(std::string_view division) const;
  bool contains(std::string_view division) const;
  const std::map<std::string, double>& scores() const { return scores_; }

 private:
  std::map<std::string, double> scores_;
};

/// Assigns every record a division drawn uniformly from division_names() with
/// a mt19937_64 seeded by `seed`, in record order, and attaches its score.
Dataset augment_access(const Dataset& ds, const AccessTable& table,
                       std::uint64_t seed);

/// Returns (train, test).
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed, bool stratified = true);

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, kNumFeatures, Eigen::RowMajor>;

/// Feature order is part of the model contract.
const std::array<std::string, kNumFeatures>& feature_names();

inline constexpr int kAccessFeature = 6;
inline constexpr int kFuzzyFeature = 7;

FeatureVector to_features(const PatientRecord& r, double fuzzy_score,
                          const AccessTable& table);

}  // namespace mhxai::data
