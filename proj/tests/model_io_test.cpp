#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "mhxai/ensemble.hpp"
#include "mhxai/error.hpp"
#include "support.hpp"

using namespace mhxai;
using namespace mhxai::ensemble;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

bool bit_identical(const ClassVector& a, const ClassVector& b) {
  return std::memcmp(a.data(), b.data(), sizeof(double) * kNumClasses) == 0;
}

const TreeEnsemble& model() { return fixture::small_pipeline().model; }

}  // namespace

TEST(ModelFile, RoundTripIsBitIdentical) {
  const auto text = to_text(model());
  const auto back = from_text(text);
  EXPECT_EQ(back, model());
  EXPECT_EQ(to_text(back), text);
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 100; ++i) {
    data::FeatureVector x;
    x << 10 + 60 * u(rng), 70 + 130 * u(rng), 40 + 100 * u(rng), 2 + 28 * u(rng),
        95 + 11 * u(rng), 40 + 160 * u(rng), u(rng), 100 * u(rng);
    EXPECT_TRUE(bit_identical(predict_margin(model(), x), predict_margin(back, x))) << i;
  }
}

TEST(ModelFile, SaveLoadThroughDisk) {
  const auto path = fixture::temp_dir("model_io") / "model.txt";
  save(model(), path);
  EXPECT_EQ(load(path), model());
  EXPECT_EQ(digest(fixture::read_file(path)), digest(to_text(model())));
  EXPECT_EQ(code_of([] { load("/nonexistent/model.txt"); }), ErrorCode::kFileNotFound);
}

TEST(ModelFile, CarriesImportanceAndConfig) {
  const auto back = from_text(to_text(model()));
  ASSERT_TRUE(back.global_importance.has_value());
  EXPECT_EQ(*back.global_importance, *model().global_importance);
  EXPECT_EQ(back.config, model().config);
  EXPECT_EQ(back.feature_stats, model().feature_stats);
}

TEST(ModelFile, TruncatedIsCorrupt) {
  const auto text = to_text(model());
  for (std::size_t cut : {text.size() / 2, text.size() - 5, std::size_t{30}}) {
    EXPECT_EQ(code_of([&] { from_text(text.substr(0, cut)); }), ErrorCode::kCorruptFile) << cut;
  }
  EXPECT_EQ(code_of([] { from_text(""); }), ErrorCode::kCorruptFile);
}

TEST(ModelFile, WrongVersionIsVersionMismatch) {
  auto text = to_text(model());
  const auto pos = text.find("version 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "version 999");
  EXPECT_EQ(code_of([&] { from_text(text); }), ErrorCode::kVersionMismatch);
}

TEST(ModelFile, GarbledNumbersAndHugeCountsAreCorrupt) {
  auto text = to_text(model());
  auto garbled = text;
  garbled.replace(garbled.find("learning_rate ") + 14, 3, "zz");
  EXPECT_EQ(code_of([&] { from_text(garbled); }), ErrorCode::kCorruptFile);
  auto huge = text;
  const auto r = huge.find("rounds ");
  huge.replace(r, huge.find('\n', r) - r, "rounds 99999999999");
  EXPECT_EQ(code_of([&] { from_text(huge); }), ErrorCode::kCorruptFile);
}

TEST(ModelFile, VersionStringTracksContent) {
  EXPECT_EQ(model_version(model()).rfind("mhxai-1-", 0), 0u);
  auto other = model();
  other.learning_rate *= 2;
  EXPECT_NE(model_version(other), model_version(model()));
  EXPECT_EQ(digest("").size(), 16u);
}
