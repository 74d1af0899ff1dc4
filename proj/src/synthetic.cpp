#include "mhxai/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mhxai::synthetic {

namespace {

using data::PatientRecord;
using data::RiskLevel;

struct Sampler {
  std::mt19937_64 rng;

  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(rng); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

double round_to(double v, double step) { return std::round(v / step) * step; }

double clip(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

PatientRecord draw(Sampler& s, RiskLevel level) {
  PatientRecord r;
  r.risk = level;
  double age = 0, sbp = 0, dbp = 0, bs = 0, temp = 98, hr = 0;
  switch (level) {
    case RiskLevel::kLow:
      age = s.normal(26, 9);
      sbp = s.normal(108, 8);
      dbp = s.normal(70, 7);
      bs = clip(s.normal(7.0, 0.6), 6.0, 8.0);
      temp = s.uniform() < 0.92 ? 98 : 99 + s.pick(0, 1);
      hr = s.normal(73, 7);
      break;
    case RiskLevel::kMid:
      age = s.normal(28, 12);
      sbp = s.normal(113, 14);
      dbp = s.normal(75, 11);
      bs = std::max(6.0, s.normal(7.6, 1.5));
      temp = s.uniform() < 0.8 ? 98 : 99 + s.pick(0, 3);
      hr = s.normal(74, 8);
      break;
    case RiskLevel::kHigh:
      age = s.normal(36, 13);
      sbp = s.normal(125, 20);
      dbp = s.normal(86, 13);
      bs = clip(s.normal(12, 3.5), 6.0, 19.0);
      temp = s.uniform() < 0.6 ? 98 : 99 + s.pick(0, 4);
      hr = s.normal(77, 8);
      break;
  }
  r.age = static_cast<int>(clip(std::round(age), 10, 70));
  r.systolic_bp = clip(round_to(sbp, 5), 70, 200);
  r.diastolic_bp = clip(round_to(dbp, 5), 49, 140);
  if (r.systolic_bp <= r.diastolic_bp + 10) r.diastolic_bp = r.systolic_bp - 15;
  r.blood_sugar = round_to(bs, 0.1);
  r.body_temp = temp;
  r.heart_rate = clip(std::round(hr), 60, 90);
  return r;
}

}  // namespace

data::Dataset generate_surrogate(const SurrogateOptions& options) {
  Sampler s{std::mt19937_64(options.seed)};
  std::size_t total = 0;
  for (auto c : options.class_counts) total += c;

  data::Dataset ds;
  for (int c = 0; c < data::kNumClasses; ++c) {
    const auto level = static_cast<RiskLevel>(c);
    const std::size_t n = options.class_counts[static_cast<std::size_t>(c)];
    if (n == 0) continue;
    const auto unique = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(static_cast<double>(options.unique_rows) *
                                              static_cast<double>(n) / static_cast<double>(total))),
        1, n);
    std::vector<PatientRecord> base;
    for (std::size_t i = 0; i < unique; ++i) base.push_back(draw(s, level));
    if (level == RiskLevel::kLow && options.heart_rate_outliers && unique >= 2) {
      // Implausible heart rates, as in the public file; cleaning repairs them.
      base[0].heart_rate = 7;
      base[1].heart_rate = 7;
    }
    // Outlier rows are not duplicated, so exactly two reach the file.
    const int first_copyable =
        level == RiskLevel::kLow && options.heart_rate_outliers && unique > 2 ? 2 : 0;
    std::vector<PatientRecord> rows = base;
    while (rows.size() < n) {
      rows.push_back(
          base[static_cast<std::size_t>(s.pick(first_copyable, static_cast<int>(unique) - 1))]);
    }
    ds.records.insert(ds.records.end(), rows.begin(), rows.end());
  }
  std::shuffle(ds.records.begin(), ds.records.end(), s.rng);
  ds.provenance.source = "synthetic surrogate (seed " + std::to_string(options.seed) + ")";
  ds.provenance.raw_rows = ds.records.size();
  return ds;
}

}  // namespace mhxai::synthetic
