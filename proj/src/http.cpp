#include <charconv>

#include "httplib.h"
#include "mathsearch/service.hpp"

namespace mathsearch {

namespace {

HttpReply error_reply(int status, std::string_view kind, std::string_view message) {
  return {status, nlohmann::json{{"error", kind}, {"message", message}}.dump()};
}

std::optional<bool> parse_flag(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  return std::nullopt;
}

}  // namespace

HttpReply handle_search(const Index* index, const std::map<std::string, std::string>& params) {
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };
  QueryOptions options;
  std::string view = "formula";
  const auto* q = get("q");
  if (!q || q->empty()) return error_reply(400, "BadRequest", "missing query parameter q");
  if (const auto* k = get("k")) {
    std::size_t value = 0;
    auto [end, ec] = std::from_chars(k->data(), k->data() + k->size(), value);
    if (ec != std::errc() || end != k->data() + k->size() || value == 0) {
      return error_reply(400, "BadRequest", "k must be a positive integer");
    }
    options.k = value;
  }
  if (const auto* r = get("rerank")) {
    auto flag = parse_flag(*r);
    if (!flag) return error_reply(400, "BadRequest", "rerank must be true or false");
    options.rerank = *flag;
  }
  if (const auto* by = get("by")) {
    if (*by != "formula" && *by != "doc") return error_reply(400, "BadRequest", "by must be formula or doc");
    view = *by;
  }
  try {
    auto response = run_query(index, *q, options);
    return {200, to_json(response, view).dump()};
  } catch (const ParseError& e) {
    return error_reply(400, "ParseError", e.what());
  } catch (const IndexNotLoaded& e) {
    return error_reply(503, "IndexNotLoaded", e.what());
  }
}

HttpReply handle_health(const Index* index) {
  if (!index) return error_reply(503, "IndexNotLoaded", "no index loaded");
  return {200, health_json(index).dump()};
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const Index* index, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto reply = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl_->server.Get("/api/search", [index, reply](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> params;
    for (const auto& [key, value] : req.params) params.emplace(key, value);
    reply(res, handle_search(index, params));
  });
  impl_->server.Get("/api/health", [index, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_health(index));
  });
  if (static_dir) impl_->server.set_mount_point("/", static_dir->string());
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace mathsearch
