#pragma once

#include <array>
#include <cstdint>

#include "mhxai/data.hpp"

namespace mhxai::synthetic {

/// Surrogate for the public maternal-health CSV when the real file is not
/// available: same schema, same class counts, a similar share of exact
/// duplicate rows and two heart-rate outliers. Values are drawn from hand-set
/// class-conditional distributions, so results on it say nothing about the
/// real data.
struct SurrogateOptions {
  std::uint64_t seed = 20240101;
  std::array<std::size_t, data::kNumClasses> class_counts{406, 336, 272};
  std::size_t unique_rows = 450;
  bool heart_rate_outliers = true;
};

data::Dataset generate_surrogate(const SurrogateOptions& options = {});

}  // namespace mhxai::synthetic
