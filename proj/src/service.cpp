#include "mhxai/service.hpp"

#include <charconv>
#include <string>

#include <httplib.h>

#include "mhxai/error.hpp"
#include "mhxai/explain.hpp"
#include "mhxai/json_io.hpp"
#include "mhxai/shap.hpp"

namespace mhxai::service {

namespace {

using json_io::json;

constexpr std::string_view kValidationNote =
    "Gradient-boosted trees over six clinical features, a regional access score and a fuzzy "
    "clinical risk score. Decision support only; not validated for unsupervised use.";

Response reply(int status, json body, const std::string& version) {
  body["model_version"] = version;
  return {status, body.dump(), "application/json"};
}

Response error_reply(int status, const std::string& code, const std::string& message,
                     const std::string& version, const json& fields = json::array()) {
  json err = {{"code", code}, {"message", message}};
  if (!fields.empty()) err["fields"] = fields;
  return reply(status, {{"error", err}}, version);
}

// Parses the body and the "patient" member; on failure fills `failure`.
std::optional<json> parse_body(std::string_view body, const std::string& version,
                               Response& failure) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    failure = error_reply(400, "invalid_json", "request body must be a JSON object", version);
    return std::nullopt;
  }
  return j;
}

std::optional<data::PatientRecord> read_patient(const json& j, const data::AccessTable& access,
                                                const std::string& version, Response& failure) {
  const auto it = j.find("patient");
  if (it == j.end()) {
    failure = error_reply(400, "validation_error", "request needs a 'patient' object", version,
                          json::array({{{"field", "patient"}, {"message", "is required"}}}));
    return std::nullopt;
  }
  auto in = json_io::patient_from_json(*it, access);
  if (!in.malformed.empty()) {
    failure = error_reply(400, "validation_error", "patient record is invalid", version,
                          json_io::to_json(in.malformed));
    return std::nullopt;
  }
  if (!in.out_of_range.empty()) {
    failure = error_reply(422, "out_of_range", "clinical values outside plausible ranges",
                          version, json_io::to_json(in.out_of_range));
    return std::nullopt;
  }
  return in.record;
}

}  // namespace

Service::Service(ensemble::TreeEnsemble model, fuzzy::RuleBase rules, data::AccessTable access,
                 lime::LimeConfig lime)
    : model_(std::move(model)),
      rules_(std::move(rules)),
      access_(std::move(access)),
      lime_(lime),
      version_(ensemble::model_version(model_)),
      validation_note_(kValidationNote) {
  model_.validate();
  lime_.validate();
}

Response Service::handle(std::string_view method, std::string_view path,
                         std::string_view body) const {
  try {
    auto route = [&](std::string_view want_method, std::string_view want_path) {
      return path == want_path && method == want_method;
    };
    if (route("POST", "/api/v1/predict")) return predict(body);
    if (route("POST", "/api/v1/whatif")) return whatif(body);
    if (route("GET", "/api/v1/model/importance")) return importance();
    if (route("GET", "/api/v1/model/meta")) return meta();
    if (route("GET", "/healthz")) return reply(200, {{"status", "ok"}}, version_);
    for (auto known : {"/api/v1/predict", "/api/v1/whatif", "/api/v1/model/importance",
                       "/api/v1/model/meta", "/healthz"}) {
      if (path == known) {
        return error_reply(405, "method_not_allowed", "method not allowed", version_);
      }
    }
    return error_reply(404, "not_found", "no such endpoint", version_);
  } catch (...) {
    // Never leak internals to clients.
    return error_reply(500, "internal_error", "internal server error", version_);
  }
}

Response Service::predict(std::string_view body) const {
  Response failure;
  auto j = parse_body(body, version_, failure);
  if (!j) return failure;
  explain::ExplanationType type = explain::ExplanationType::kA;
  if (auto t = j->find("explanation_type"); t != j->end()) {
    if (!t->is_string()) {
      return error_reply(400, "validation_error", "explanation_type must be a string", version_,
                         json::array({{{"field", "explanation_type"},
                                       {"message", "must be one of A, B, C"}}}));
    }
    try {
      type = explain::parse_explanation_type(t->get<std::string>());
    } catch (const Error&) {
      return error_reply(400, "validation_error", "unknown explanation_type", version_,
                         json::array({{{"field", "explanation_type"},
                                       {"message", "must be one of A, B, C"}}}));
    }
  }
  auto record = read_patient(*j, access_, version_, failure);
  if (!record) return failure;

  const auto assessment = fuzzy::infer(rules_, *record);
  const auto x = data::to_features(*record, assessment.score, access_);
  const auto prediction = explain::make_prediction(model_, x);
  std::optional<shap::ShapValues> shap_values;
  std::optional<lime::LimeExplanation> lime_values;
  if (type != explain::ExplanationType::kC) shap_values = shap::explain_instance(model_, x);
  if (type == explain::ExplanationType::kA) lime_values = lime::explain_prediction(model_, x, lime_);
  const auto bundle = explain::compose(
      type, prediction, &assessment, shap_values ? &*shap_values : nullptr,
      lime_values ? &*lime_values : nullptr, *record, rules_, {version_, validation_note_});
  json out = json_io::to_json(bundle);
  out["patient"] = json_io::to_json(*record);
  return reply(200, std::move(out), version_);
}

Response Service::whatif(std::string_view body) const {
  Response failure;
  auto j = parse_body(body, version_, failure);
  if (!j) return failure;
  auto base = read_patient(*j, access_, version_, failure);
  if (!base) return failure;
  const auto ov = j->find("overrides");
  if (ov == j->end() || !ov->is_array()) {
    return error_reply(400, "validation_error", "request needs an 'overrides' array", version_,
                       json::array({{{"field", "overrides"}, {"message", "must be an array"}}}));
  }

  auto summarize = [&](const data::PatientRecord& r) {
    const auto a = fuzzy::infer(rules_, r);
    const auto p = explain::make_prediction(model_, data::to_features(r, a.score, access_));
    return json{{"predicted_class", std::string(data::to_string(p.risk))},
                {"probability", p.probability()},
                {"probabilities", {{"Low", p.probabilities[0]},
                                   {"Mid", p.probabilities[1]},
                                   {"High", p.probabilities[2]}}},
                {"fuzzy_score", a.score}};
  };

  const auto& fields = data::clinical_field_names();
  json scenarios = json::array();
  for (std::size_t i = 0; i < ov->size(); ++i) {
    const auto& o = (*ov)[i];
    const std::string where = "overrides[" + std::to_string(i) + "]";
    if (!o.is_object() || !o.contains("field") || !o["field"].is_string() ||
        !o.contains("value") || !o["value"].is_number()) {
      return error_reply(400, "validation_error", "each override needs 'field' and 'value'",
                         version_,
                         json::array({{{"field", where}, {"message", "needs field and numeric value"}}}));
    }
    const auto field = o["field"].get<std::string>();
    if (std::find(fields.begin(), fields.end(), field) == fields.end()) {
      return error_reply(400, "validation_error", "unknown override field", version_,
                         json::array({{{"field", where + ".field"},
                                       {"message", "unknown patient field '" + field + "'"}}}));
    }
    const double value = o["value"].get<double>();
    json patient = json_io::to_json(*base);
    patient[field] = value;
    auto scenario = read_patient(json{{"patient", patient}}, access_, version_, failure);
    if (!scenario) return failure;
    json s = summarize(*scenario);
    s["override"] = {{"field", field}, {"value", value}};
    scenarios.push_back(std::move(s));
  }
  return reply(200, {{"baseline", summarize(*base)}, {"scenarios", scenarios}}, version_);
}

Response Service::importance() const {
  if (!model_.global_importance) {
    return error_reply(404, "not_available", "model file carries no global importance",
                       version_);
  }
  shap::GlobalImportance g{*model_.global_importance,
                           shap::rank_features(*model_.global_importance)};
  return reply(200, {{"importance", json_io::to_json(g)}}, version_);
}

Response Service::meta() const {
  json classes = json::array();
  for (const auto& c : model_.class_names) classes.push_back(c);
  json features = json::array();
  for (const auto& f : model_.feature_names) features.push_back(f);
  return reply(200,
               {{"format_version", ensemble::kModelFormatVersion},
                {"feature_order", features},
                {"classes", classes},
                {"rounds", model_.rounds.size()},
                {"learning_rate", model_.learning_rate},
                {"training_config", model_.config},
                {"training_config_digest", ensemble::digest(model_.config)},
                {"rule_base_digest", ensemble::digest(rules_.to_config())},
                {"validation_note", validation_note_}},
               version_);
}

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;

  explicit Impl(const Service& s) : service(s) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      const auto r = service.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, r.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Put(".*", forward);
    server.Delete(".*", forward);
  }
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void parse_bind_address(std::string_view text, std::string& host, int& port) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    if (!text.empty()) host = std::string(text);
    return;
  }
  if (colon > 0) host = std::string(text.substr(0, colon));
  const auto digits = text.substr(colon + 1);
  int p = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || p < 0 || p > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad bind address '" + std::string(text) + "'");
  }
  port = p;
}

}  // namespace mhxai::service
