#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mhxai/data.hpp"
#include "mhxai/ensemble.hpp"
#include "mhxai/fuzzy.hpp"
#include "mhxai/lime.hpp"

namespace mhxai::service {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handling over one immutable model snapshot. handle() is const and
/// safe to call from any number of threads.
///
///   POST /api/v1/predict         {"patient": {...}, "explanation_type": "A"|"B"|"C"}
///   POST /api/v1/whatif          {"patient": {...}, "overrides": [{"field", "value"}, ...]}
///   GET  /api/v1/model/importance
///   GET  /api/v1/model/meta
///   GET  /healthz
class Service {
 public:
  Service(ensemble::TreeEnsemble model, fuzzy::RuleBase rules, data::AccessTable access,
          lime::LimeConfig lime = {});

  Response handle(std::string_view method, std::string_view path, std::string_view body) const;

  const std::string& model_version() const { return version_; }
  const ensemble::TreeEnsemble& model() const { return model_; }

 private:
  Response predict(std::string_view body) const;
  Response whatif(std::string_view body) const;
  Response importance() const;
  Response meta() const;

  ensemble::TreeEnsemble model_;
  fuzzy::RuleBase rules_;
  data::AccessTable access_;
  lime::LimeConfig lime_;
  std::string version_;
  std::string validation_note_;
};

/// Thin HTTP front end over Service.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen();
  void stop();
  /// Blocks until listen() is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host", "host:port" or ":port"; missing parts keep their defaults.
void parse_bind_address(std::string_view text, std::string& host, int& port);

}  // namespace mhxai::service
