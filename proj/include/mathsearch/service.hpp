#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mathsearch/core.hpp"
#include "mathsearch/index.hpp"
#include "mathsearch/mss.hpp"

namespace mathsearch {

class IndexNotLoaded : public std::runtime_error {
 public:
  IndexNotLoaded() : std::runtime_error("no index loaded") {}
};

struct DocHit {
  std::string name;
  std::uint32_t position = 0;
};

struct FormulaHit {
  FormulaId formula = 0;
  std::string canonical;
  std::string mathml;  // symbol elements carry data-node ids
  std::optional<ScoreTriple> triple;  // set when re-ranked
  double dice = 0.0;
  std::uint32_t matched = 0;       // tuples shared with the query
  std::uint32_t dice_denom = 0;    // query size + candidate size
  std::vector<NodeMatch> highlight;  // per candidate node, empty without re-ranking
  std::string structure_key;
  std::vector<DocHit> docs;
};

struct ResultGroup {
  std::string structure_key;
  std::vector<FormulaHit> hits;
};

struct DocumentRank {
  std::string name;
  std::optional<ScoreTriple> best_triple;
  double best_dice = 0.0;
  std::size_t hit_count = 0;
};

struct SearchResponse {
  std::string query;  // canonical string of the query tree
  double core_ms = 0.0;
  double rerank_ms = 0.0;
  bool reranked = true;
  std::vector<ResultGroup> groups;
  std::vector<DocumentRank> documents;
};

struct QueryOptions {
  std::size_t k = 100;
  bool rerank = true;
  Optimizations optimizations{};
};

/// Parse, retrieve the top-k by Dice, optionally re-rank by subtree
/// similarity, group by matched structure and rank documents.
/// Throws ParseError, IndexNotLoaded (null index), std::invalid_argument (k = 0).
SearchResponse run_query(const Index* index, std::string_view mathml, const QueryOptions& options = {});
SearchResponse run_query(const Index& index, const Slt& query, const QueryOptions& options = {});

/// Hits in final order; the result holds one row per document.
std::vector<DocumentRank> rank_documents(const std::vector<FormulaHit>& hits);

/// All hits of a response in rank order.
std::vector<FormulaHit> flatten(const SearchResponse& response);

nlohmann::json to_json(const SearchResponse& response, std::string_view view = "formula");
nlohmann::json health_json(const Index* index);
std::string render_text(const SearchResponse& response, bool by_document);

struct HttpReply {
  int status = 200;
  std::string body;
};

/// Request handlers without the socket layer.
HttpReply handle_search(const Index* index, const std::map<std::string, std::string>& params);
HttpReply handle_health(const Index* index);

class HttpServer {
 public:
  explicit HttpServer(const Index* index, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  /// Binds and returns the port (an ephemeral one if `port` is 0), or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Command-line entry point; returns 0 on success, 1 on usage errors and
/// 2 on data errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mathsearch
