// mhxai: train, inspect and serve the maternal-health risk model.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage error, 3 file not found,
// 4 invalid input data, 5 invalid or incompatible model file,
// 6 statistical computation failed.

#include <pthread.h>
#include <signal.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "mhxai/app_config.hpp"
#include "mhxai/error.hpp"
#include "mhxai/explain.hpp"
#include "mhxai/json_io.hpp"
#include "mhxai/pipeline.hpp"
#include "mhxai/service.hpp"
#include "mhxai/shap.hpp"
#include "mhxai/survey.hpp"
#include "mhxai/synthetic.hpp"

namespace fs = std::filesystem;
using namespace mhxai;
using json_io::json;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kNotFound = 3,
  kBadData = 4,
  kBadModel = 5,
  kStatsFailure = 6,
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound:
      return kNotFound;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMissingComponent:
      return kUsage;
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kCorruptFile:
    case ErrorCode::kBadVectorLength:
      return kBadModel;
    case ErrorCode::kDegenerateKernel:
    case ErrorCode::kLengthMismatch:
    case ErrorCode::kConstantInput:
    case ErrorCode::kZeroExpectedCount:
    case ErrorCode::kTooFewGroups:
    case ErrorCode::kDomainError:
      return kStatsFailure;
    default:
      return kBadData;
  }
}

LogLevel g_log_level = LogLevel::kInfo;

void log_info(const std::string& msg) {
  if (g_log_level >= LogLevel::kInfo) std::cerr << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (g_log_level >= LogLevel::kDebug) std::cerr << "debug: " << msg << '\n';
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kFileNotFound, "cannot write " + path);
  out << text;
}

ensemble::TreeEnsemble load_model(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kFileNotFound, "model not found: " + path.string());
  return ensemble::load(path);
}

struct PatientFlags {
  std::string file;
  std::optional<double> age, systolic_bp, diastolic_bp, blood_sugar, body_temp, heart_rate;
  std::string division;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--patient", file, "Patient JSON file (same schema as the HTTP API)");
    cmd->add_option("--age", age, "Age in years");
    cmd->add_option("--systolic-bp", systolic_bp, "Systolic blood pressure, mmHg");
    cmd->add_option("--diastolic-bp", diastolic_bp, "Diastolic blood pressure, mmHg");
    cmd->add_option("--blood-sugar", blood_sugar, "Blood sugar, mmol/L");
    cmd->add_option("--body-temp", body_temp, "Body temperature, degrees F");
    cmd->add_option("--heart-rate", heart_rate, "Heart rate, bpm");
    cmd->add_option("--division", division, "Administrative division (for the access score)");
  }

  json to_json() const {
    json j = json::object();
    if (!file.empty()) {
      if (!fs::exists(file)) throw Error(ErrorCode::kFileNotFound, "patient file not found: " + file);
      std::ifstream in(file);
      j = json::parse(in, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw Error(ErrorCode::kParseError, "patient file is not a JSON object: " + file);
      }
      if (j.contains("patient")) j = j["patient"];
    }
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) j[key] = *v;
    };
    put("age", age);
    put("systolic_bp", systolic_bp);
    put("diastolic_bp", diastolic_bp);
    put("blood_sugar", blood_sugar);
    put("body_temp", body_temp);
    put("heart_rate", heart_rate);
    if (!division.empty()) j["division"] = division;
    return j;
  }
};

/// Reads and validates one patient; every field problem is reported at once.
/// The fuzzy score ignores the division, so `need_division` false fills a
/// placeholder when none is given.
data::PatientRecord read_patient(const PatientFlags& flags, const data::AccessTable& access,
                                 bool need_division) {
  json j = flags.to_json();
  if (!need_division && !j.contains("division")) j["division"] = data::division_names()[0];
  const auto in = json_io::patient_from_json(j, access);
  if (!in.ok()) {
    std::string msg = "invalid patient:";
    for (const auto* list : {&in.malformed, &in.out_of_range}) {
      for (const auto& p : *list) msg += "\n  " + p.field + ": " + p.message;
    }
    throw Error(ErrorCode::kUnparsableValue, msg);
  }
  return in.record;
}

struct Common {
  std::string format = "text";
  std::string output;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("-o,--output", output, "Write the report here instead of stdout");
  }
  bool json_out() const { return format == "json"; }
};

void add_pipeline_options(CLI::App* cmd, AppConfig& cfg) {
  cmd->add_option("--division-seed", cfg.pipeline.division_seed, "Seed for division assignment");
  cmd->add_option("--split-seed", cfg.pipeline.split_seed, "Seed for the train/test split");
  cmd->add_option("--test-fraction", cfg.pipeline.test_fraction, "Held-out fraction")
      ->check(CLI::Range(0.01, 0.99));
}

void add_model_inputs(CLI::App* cmd, AppConfig& cfg) {
  cmd->add_option("--access", cfg.access_table, "Division access-score table");
  cmd->add_option("--rules", cfg.rule_base, "Fuzzy rule base file");
}

std::string metrics_text(const ensemble::Metrics& m) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << "accuracy " << m.accuracy << "\nroc_auc " << m.roc_auc << "\nn " << m.n
     << "\nper class (precision / recall):\n";
  for (int c = 0; c < data::kNumClasses; ++c) {
    os << "  " << data::to_string(static_cast<data::RiskLevel>(c)) << ' ' << m.precision[c]
       << " / " << m.recall[c] << '\n';
  }
  os << "confusion (rows true, columns predicted):\n";
  for (int i = 0; i < data::kNumClasses; ++i) {
    os << " ";
    for (int k = 0; k < data::kNumClasses; ++k) os << ' ' << m.confusion(i, k);
    os << '\n';
  }
  return os.str();
}

int cmd_train(const AppConfig& cfg, const Common& common, const std::string& metrics_path,
              const std::string& importance_path) {
  const auto ds = data::load_csv(cfg.dataset);
  log_info("loaded " + std::to_string(ds.size()) + " records from " + cfg.dataset.string() +
           " (" + std::to_string(ds.provenance.actions.size()) + " cleaning actions)");
  for (const auto& a : ds.provenance.actions) log_debug(a);
  const auto rules = cfg.load_rule_base();
  const auto access = cfg.load_access_table();
  const auto t0 = std::chrono::steady_clock::now();
  const auto result = pipeline::run(ds, rules, access, cfg.pipeline);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ensemble::save(result.model, cfg.model);
  log_info("model written to " + cfg.model.string() + " (" + ensemble::model_version(result.model) +
           ")");

  const auto validity = pipeline::fuzzy_validity(ds, rules);
  json report = {{"model_version", ensemble::model_version(result.model)},
                 {"dataset", ds.provenance.source},
                 {"records", ds.size()},
                 {"train_records", result.train.size()},
                 {"test_records", result.test.size()},
                 {"training_seconds", secs},
                 {"training_config", result.model.config},
                 {"test_metrics", json_io::to_json(result.metrics)},
                 {"fuzzy_label_spearman", json_io::to_json(validity)}};
  if (result.model.global_importance) {
    shap::GlobalImportance g{*result.model.global_importance,
                             shap::rank_features(*result.model.global_importance)};
    report["global_importance"] = json_io::to_json(g);
    if (!importance_path.empty()) write_output(shap::to_tsv(g), importance_path);
  }
  if (!metrics_path.empty()) write_output(report.dump(2) + "\n", metrics_path);
  if (common.json_out()) {
    write_output(report.dump(2) + "\n", common.output);
  } else {
    std::ostringstream os;
    os << "trained on " << result.train.size() << " records, tested on " << result.test.size()
       << " (" << secs << " s)\n"
       << metrics_text(result.metrics) << "fuzzy score vs label: spearman r = "
       << validity.statistic << ", p = " << validity.p_value << '\n';
    write_output(os.str(), common.output);
  }
  return kOk;
}

int cmd_evaluate(const AppConfig& cfg, const Common& common, bool all_rows) {
  const auto model = load_model(cfg.model);
  const auto ds = data::load_csv(cfg.dataset);
  const auto rules = cfg.load_rule_base();
  const auto access = cfg.load_access_table();
  const auto augmented = data::augment_access(ds, access, cfg.pipeline.division_seed);
  const auto subset = all_rows ? augmented
                               : data::split(augmented, cfg.pipeline.test_fraction,
                                             cfg.pipeline.split_seed, cfg.pipeline.stratified)
                                     .second;
  const auto table = pipeline::build_features(subset, rules, access);
  if (table.y.empty()) throw Error(ErrorCode::kInvalidArgument, "evaluation data must be labelled");
  const auto metrics = ensemble::evaluate(model, table.x, table.y);
  if (common.json_out()) {
    json j = json_io::to_json(metrics);
    j["model_version"] = ensemble::model_version(model);
    j["subset"] = all_rows ? "all" : "test";
    write_output(j.dump(2) + "\n", common.output);
  } else {
    write_output(metrics_text(metrics), common.output);
  }
  return kOk;
}

int cmd_explain(const AppConfig& cfg, const Common& common, const PatientFlags& flags,
                const std::string& type_name, bool with_lime) {
  const auto type = explain::parse_explanation_type(type_name);
  const auto model = load_model(cfg.model);
  const auto rules = cfg.load_rule_base();
  const auto access = cfg.load_access_table();
  const auto record = read_patient(flags, access, true);
  const auto assessment = fuzzy::infer(rules, record);
  const auto x = data::to_features(record, assessment.score, access);
  const auto prediction = explain::make_prediction(model, x);
  std::optional<shap::ShapValues> sv;
  std::optional<lime::LimeExplanation> lv;
  if (type != explain::ExplanationType::kC) sv = shap::explain_instance(model, x);
  if (type == explain::ExplanationType::kA && with_lime) {
    lv = lime::explain_prediction(model, x, cfg.lime);
  }
  const auto bundle = explain::compose(
      type, prediction, &assessment, sv ? &*sv : nullptr, lv ? &*lv : nullptr, record, rules,
      {ensemble::model_version(model), "Decision support only; verify against clinical judgment."});
  write_output(common.json_out() ? json_io::to_json(bundle).dump(2) + "\n"
                                 : explain::render_text(bundle),
               common.output);
  return kOk;
}

int cmd_fuzzy(const AppConfig& cfg, const Common& common, const PatientFlags& flags,
              bool diagnostics) {
  const auto rules = cfg.load_rule_base();
  if (diagnostics) {
    const auto d = fuzzy::validate_rulebase(rules);
    if (common.json_out()) {
      write_output(json_io::to_json(d).dump(2) + "\n", common.output);
    } else {
      std::ostringstream os;
      os << "coverage gaps: " << d.coverage_gaps.size()
         << "\nunreachable rules: " << d.unreachable_rules.size()
         << "\nunreachable consequents: " << d.unreachable_consequents.size()
         << "\nmonotonicity violations: " << d.monotonicity_violations.size() << " (of "
         << d.monotonicity_profiles_checked << " profiles)\n"
         << (d.clean() ? "rule base is clean\n" : "rule base has problems\n");
      write_output(os.str(), common.output);
    }
    return d.clean() ? kOk : kBadData;
  }
  const auto record = read_patient(flags, cfg.load_access_table(), false);
  const auto a = fuzzy::infer(rules, record);
  if (common.json_out()) {
    write_output(json_io::to_json(a).dump(2) + "\n", common.output);
  } else {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << "fuzzy risk score " << a.score << " / 100\n";
    if (a.fallback) os << "no rule fired; neutral midpoint used\n";
    for (const auto& f : a.fired_rules) {
      os << "  " << explain::rule_sentence(*rules.find_rule(f.id), f.activation) << '\n';
    }
    write_output(os.str(), common.output);
  }
  return kOk;
}

int cmd_stats(const AppConfig& cfg, const Common& common) {
  const auto report = stats::aggregate_survey(stats::load_survey(cfg.survey));
  write_output(common.json_out() ? json_io::to_json(report).dump(2) + "\n"
                                 : stats::render_report(report),
               common.output);
  return kOk;
}

int cmd_serve(const AppConfig& cfg) {
  const service::Service svc(load_model(cfg.model), cfg.load_rule_base(), cfg.load_access_table(),
                             cfg.lime);
  service::HttpServer server(svc);

  // Block termination signals in every thread; a dedicated waiter turns
  // them into an orderly stop.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = server.bind(cfg.host, cfg.port);
  if (port < 0) {
    std::cerr << "error: cannot bind " << cfg.host << ':' << cfg.port << '\n';
    return kFailure;
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  log_info("serving model " + svc.model_version() + " on http://" + cfg.host + ":" +
           std::to_string(port));
  const bool ok = server.listen();
  kill(getpid(), SIGTERM);  // release the waiter if listen() ended on its own
  waiter.join();
  log_info("server stopped");
  return ok ? kOk : kFailure;
}

int cmd_synth(const std::string& output, std::uint64_t seed) {
  synthetic::SurrogateOptions opt;
  opt.seed = seed;
  auto ds = synthetic::generate_surrogate(opt);
  write_output(data::to_csv(ds), output);
  log_info("wrote " + std::to_string(ds.size()) + " synthetic records (seed " +
           std::to_string(seed) + "); not patient data");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maternal health risk: fuzzy-augmented boosted trees with explanations"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.set_version_flag("--version", "mhxai model format " + std::to_string(ensemble::kModelFormatVersion));
  AppConfig cfg;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "error, info or debug")
      ->check(CLI::IsMember({"error", "info", "debug"}));

  Common common;
  PatientFlags patient;
  std::string metrics_path, importance_path, explanation_type = "A", synth_output;
  bool all_rows = false, no_lime = false, diagnostics = false;
  std::uint64_t synth_seed = synthetic::SurrogateOptions{}.seed;

  auto* train = app.add_subcommand("train", "Train a model and report held-out metrics");
  train->add_option("--data", cfg.dataset, "Maternal health CSV")->required();
  train->add_option("--model", cfg.model, "Where to write the model file");
  train->add_option("--metrics", metrics_path, "Also write the JSON report here");
  train->add_option("--importance", importance_path, "Write global SHAP importance (TSV) here");
  train->add_option("--rounds", cfg.pipeline.train.rounds, "Boosting rounds");
  train->add_option("--max-depth", cfg.pipeline.train.max_depth, "Maximum tree depth");
  train->add_option("--learning-rate", cfg.pipeline.train.learning_rate, "Shrinkage");
  train->add_option("--l1", cfg.pipeline.train.l1_penalty, "L1 penalty on leaf weights");
  train->add_option("--l2", cfg.pipeline.train.l2_penalty, "L2 penalty on leaf weights");
  train->add_option("--min-child-weight", cfg.pipeline.train.min_child_weight,
                    "Minimum hessian sum per child");
  train->add_option("--seed", cfg.pipeline.train.seed, "Training seed");
  add_pipeline_options(train, cfg);
  add_model_inputs(train, cfg);
  common.add_to(train);

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on the held-out split");
  evaluate->add_option("--data", cfg.dataset, "Maternal health CSV")->required();
  evaluate->add_option("--model", cfg.model, "Model file");
  evaluate->add_flag("--all", all_rows, "Evaluate on every row instead of the test split");
  add_pipeline_options(evaluate, cfg);
  add_model_inputs(evaluate, cfg);
  common.add_to(evaluate);

  auto* predict = app.add_subcommand("predict", "Predict risk for one patient");
  auto* explain_cmd = app.add_subcommand("explain", "Explain the prediction for one patient");
  for (auto* cmd : {predict, explain_cmd}) {
    cmd->add_option("--model", cfg.model, "Model file");
    cmd->add_option("--type", explanation_type, "Explanation type A, B or C")
        ->check(CLI::IsMember({"A", "B", "C", "a", "b", "c"}));
    cmd->add_flag("--no-lime", no_lime, "Skip the LIME section of type A");
    cmd->add_option("--lime-samples", cfg.lime.n_samples, "LIME perturbation count");
    cmd->add_option("--lime-seed", cfg.lime.seed, "LIME seed");
    add_model_inputs(cmd, cfg);
    patient.add_to(cmd);
    common.add_to(cmd);
  }
  predict->get_option("--type")->default_str("C");

  auto* fuzzy_cmd = app.add_subcommand("fuzzy-score", "Fuzzy clinical risk score for one patient");
  fuzzy_cmd->add_option("--rules", cfg.rule_base, "Fuzzy rule base file");
  fuzzy_cmd->add_flag("--diagnostics", diagnostics, "Check the rule base instead of scoring");
  patient.add_to(fuzzy_cmd);
  common.add_to(fuzzy_cmd);

  auto* stats_cmd = app.add_subcommand("stats", "Survey statistics report");
  stats_cmd->add_option("--survey", cfg.survey, "Survey count file");
  common.add_to(stats_cmd);

  std::string bind;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--model", cfg.model, "Model file (env MHXAI_MODEL_PATH)");
  serve->add_option("--bind", bind, "host, host:port or :port (env MHXAI_BIND_ADDRESS)");
  add_model_inputs(serve, cfg);

  auto* synth = app.add_subcommand("synth-data", "Write the synthetic surrogate dataset");
  synth->add_option("-o,--output", synth_output, "CSV path (stdout when omitted)");
  synth->add_option("--seed", synth_seed, "Generator seed");

  // Environment first so explicit flags win.
  try {
    cfg.apply_env();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    g_log_level = parse_log_level(log_level);
    if (predict->parsed() && predict->count("--type") == 0) explanation_type = "C";
    if (train->parsed()) return cmd_train(cfg, common, metrics_path, importance_path);
    if (evaluate->parsed()) return cmd_evaluate(cfg, common, all_rows);
    if (predict->parsed() || explain_cmd->parsed()) {
      return cmd_explain(cfg, common, patient, explanation_type, !no_lime);
    }
    if (fuzzy_cmd->parsed()) return cmd_fuzzy(cfg, common, patient, diagnostics);
    if (stats_cmd->parsed()) return cmd_stats(cfg, common);
    if (serve->parsed()) {
      if (!bind.empty()) service::parse_bind_address(bind, cfg.host, cfg.port);
      return cmd_serve(cfg);
    }
    if (synth->parsed()) return cmd_synth(synth_output, synth_seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
