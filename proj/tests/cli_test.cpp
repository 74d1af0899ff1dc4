#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "support.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& work() {
  static const fs::path dir = mhxai::fixture::temp_dir("cli");
  return dir;
}

Run run(const std::string& args) {
  const auto out = work() / "stdout.txt";
  const auto err = work() / "stderr.txt";
  const std::string cmd = std::string("cd '") + MHXAI_SOURCE_DIR + "' && '" + MHXAI_CLI + "' " +
                          args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = mhxai::fixture::read_file(out);
  r.err = mhxai::fixture::read_file(err);
  return r;
}

const std::string kPatient =
    "--age 30 --systolic-bp 150 --diastolic-bp 95 --blood-sugar 9 --body-temp 98.6 "
    "--heart-rate 85 --division Dhaka";

// Trains once per process on the surrogate with a short schedule.
const fs::path& model() {
  static const fs::path path = [] {
    const auto csv = work() / "surrogate.csv";
    const auto m = work() / "model.txt";
    EXPECT_EQ(run("synth-data -o '" + csv.string() + "'").code, 0);
    const auto r = run("train --data '" + csv.string() + "' --model '" + m.string() +
                       "' --rounds 40 --max-depth 3 --learning-rate 0.2 --metrics '" +
                       (work() / "metrics.json").string() + "' --importance '" +
                       (work() / "importance.tsv").string() + "' --log-level error");
    EXPECT_EQ(r.code, 0) << r.err;
    return m;
  }();
  return path;
}

std::string model_flag() { return "--model '" + model().string() + "'"; }

}  // namespace

TEST(Cli, TrainWritesModelMetricsAndImportance) {
  ASSERT_TRUE(fs::exists(model()));
  const auto metrics = json::parse(mhxai::fixture::read_file(work() / "metrics.json"));
  EXPECT_GT(metrics["test_metrics"]["accuracy"].get<double>(), 0.8);
  EXPECT_TRUE(metrics.contains("fuzzy_label_spearman"));
  EXPECT_EQ(metrics["records"], 1014);
  const auto tsv = mhxai::fixture::read_file(work() / "importance.tsv");
  EXPECT_EQ(tsv.rfind("feature\tmean_abs_shap\n", 0), 0u);
}

TEST(Cli, EvaluateMatchesTrainingReport) {
  const auto r = run("evaluate --data '" + (work() / "surrogate.csv").string() + "' " +
                     model_flag() + " --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto metrics = json::parse(mhxai::fixture::read_file(work() / "metrics.json"));
  EXPECT_EQ(json::parse(r.out)["accuracy"], metrics["test_metrics"]["accuracy"]);
}

TEST(Cli, PredictMissingModel) {
  const auto r = run("predict --model /nonexistent/model.txt " + kPatient);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("model not found"), std::string::npos) << r.err;
}

TEST(Cli, CorruptModelExitCode) {
  const auto bad = work() / "bad_model.txt";
  std::ofstream(bad) << "mhxai-tree-ensemble\nversion 1\nclasses Low\n";
  const auto r = run("predict --model '" + bad.string() + "' " + kPatient);
  EXPECT_EQ(r.code, 5) << r.err;
}

TEST(Cli, ExplainTypes) {
  const auto c = run("explain --type C " + model_flag() + " " + kPatient);
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_NE(c.out.find("Predicted risk"), std::string::npos);
  EXPECT_EQ(c.out.find("Fuzzy"), std::string::npos);
  EXPECT_EQ(c.out.find("SHAP"), std::string::npos);

  const auto a = run("explain " + model_flag() + " " + kPatient + " --lime-samples 500");
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NE(a.out.find("Fuzzy"), std::string::npos);
  EXPECT_NE(a.out.find("SHAP"), std::string::npos);
  EXPECT_NE(a.out.find("LIME"), std::string::npos);

  const auto predict = run("predict " + model_flag() + " " + kPatient + " --format json");
  ASSERT_EQ(predict.code, 0) << predict.err;
  const auto j = json::parse(predict.out);
  EXPECT_EQ(j["type"], "C");
}

TEST(Cli, PatientFromFile) {
  const auto file = work() / "patient.json";
  std::ofstream(file) << R"({"patient": {"age": 30, "systolic_bp": 150, "diastolic_bp": 95,
    "blood_sugar": 9, "body_temp": 98.6, "heart_rate": 85, "division": "Dhaka"}})";
  const auto from_file =
      run("predict " + model_flag() + " --patient '" + file.string() + "' --format json");
  const auto from_flags = run("predict " + model_flag() + " " + kPatient + " --format json");
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(from_file.out, from_flags.out);
}

TEST(Cli, InvalidPatientListsFields) {
  const auto r = run("predict " + model_flag() +
                     " --age 30 --systolic-bp 90 --diastolic-bp 95 --blood-sugar 9 "
                     "--body-temp 98.6 --division Dhaka");
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.err.find("heart_rate"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("systolic_bp"), std::string::npos) << r.err;
}

TEST(Cli, FuzzyScoreNeedsNoModelOrDivision) {
  const auto r = run("fuzzy-score --age 30 --systolic-bp 150 --diastolic-bp 95 --blood-sugar 9 "
                     "--body-temp 98.6 --heart-rate 85 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_GT(j["score"].get<double>(), 60);
  const auto d = run("fuzzy-score --diagnostics --format json");
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(json::parse(d.out)["clean"], true);
}

TEST(Cli, StatsReport) {
  const auto r = run("stats --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["chi_square_independence"]["statistic"].get<double>(), 8.40, 0.005);
  EXPECT_EQ(j["preferences_overall"][0]["percent"], "71.4");
  const auto missing = run("stats --survey /nonexistent/survey.conf");
  EXPECT_EQ(missing.code, 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("predict --format yaml").code, 2);
  EXPECT_EQ(run("train").code, 2);
  EXPECT_EQ(run("explain --type D " + model_flag() + " " + kPatient).code, 2);
  const auto help = run("--help");
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("serve"), std::string::npos);
}
