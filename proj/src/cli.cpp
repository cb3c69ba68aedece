#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>

#include "CLI11.hpp"
#include "mathsearch/corpus.hpp"
#include "mathsearch/service.hpp"

namespace mathsearch {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::uint32_t> parse_window(const std::string& text) {
  if (text == "all") return std::nullopt;
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value == 0 || value > 0xffffffffu) {
    throw UsageError("--window expects a positive integer or 'all', got '" + text + "'");
  }
  return static_cast<std::uint32_t>(value);
}

std::string window_text(const std::optional<std::uint32_t>& w) {
  return w ? std::to_string(*w) : "all";
}

std::string read_query(const std::string& arg) {
  if (arg.empty() || arg.front() != '@') return arg;
  std::ifstream in(arg.substr(1), std::ios::binary);
  if (!in) throw IndexError(IndexError::Kind::IoError, "cannot read query file " + arg.substr(1));
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

HttpServer* active_server = nullptr;

extern "C" void stop_on_signal(int) {
  if (active_server) active_server->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formula search over Presentation MathML", "mathsearch"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "Build an index from a JSON-lines corpus or an HTML directory");
  std::string input, index_out, window = "1";
  bool eol = false;
  index_cmd->add_option("--input", input, "corpus .jsonl file or directory")->required();
  index_cmd->add_option("--out", index_out, "index file to write")->required();
  index_cmd->add_option("--window", window, "tuple window size, or 'all'");
  index_cmd->add_flag("--eol", eol, "emit end-of-line tuples");

  auto* query_cmd = app.add_subcommand("query", "Search an index");
  std::string index_path, query_arg, query_window;
  std::size_t k = 100;
  bool no_rerank = false, as_json = false, as_text = false, by_doc = false;
  query_cmd->add_option("--index", index_path, "index file")->required();
  query_cmd->add_option("--query", query_arg, "query MathML, or @file")->required();
  query_cmd->add_option("--k", k, "number of candidates")->check(CLI::PositiveNumber);
  query_cmd->add_flag("--no-rerank", no_rerank, "rank by Dice only");
  auto* json_flag = query_cmd->add_flag("--json", as_json, "JSON output");
  query_cmd->add_flag("--text", as_text, "plain text output (default)")->excludes(json_flag);
  query_cmd->add_flag("--by-doc", by_doc, "rank documents instead of formulae");
  query_cmd->add_option("--window", query_window, "expected window size; the index header wins");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  std::string serve_index, host = "127.0.0.1";
  std::optional<std::string> static_dir;
  int port = 8080;
  serve_cmd->add_option("--index", serve_index, "index file")->required();
  serve_cmd->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--static", static_dir, "directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*index_cmd) {
      TupleOptions options{parse_window(window), eol};
      CorpusStats stats;
      auto corpus = load_corpus(input, &stats);
      IndexBuilder builder(options);
      for (const auto& record : corpus) builder.add(record);
      const auto& report = builder.report();
      for (const auto& p : stats.problems) err << "warning: " << p << '\n';
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      auto index = builder.finish();
      index.save(index_out);
      out << "indexed " << index.formula_count() << " distinct formulae (" << report.formulae_seen
          << " seen, " << report.parse_failures << " unparsable, " << report.duplicate_in_document
          << " repeated within a document) from " << index.document_count() << " documents\n"
          << "skipped " << stats.skipped_lines << " malformed lines\n"
          << "tuples " << index.tuple_count() << ", wildcard patterns " << index.wildcard_pattern_count()
          << ", window " << window_text(options.window) << (options.eol ? ", eol" : "") << '\n';
      return 0;
    }

    if (*query_cmd) {
      auto index = Index::load(index_path);
      if (!query_window.empty()) {
        auto wanted = parse_window(query_window);
        if (wanted != index.params().window) {
          err << "warning: --window " << window_text(wanted) << " ignored; index was built with window "
              << window_text(index.params().window) << '\n';
        }
      }
      QueryOptions options;
      options.k = k;
      options.rerank = !no_rerank;
      auto response = run_query(&index, read_query(query_arg), options);
      if (as_json) {
        out << to_json(response, by_doc ? "doc" : "formula").dump(2) << '\n';
      } else {
        out << render_text(response, by_doc);
      }
      return 0;
    }

    if (*serve_cmd) {
      auto index = Index::load(serve_index);
      std::optional<std::filesystem::path> dir;
      if (static_dir) dir = *static_dir;
      HttpServer server(&index, dir);
      int bound = server.bind(host, port);
      if (bound < 0) {
        err << "error: cannot bind " << host << ':' << port << '\n';
        return 2;
      }
      out << "listening on http://" << host << ':' << bound << '\n' << std::flush;
      active_server = &server;
      std::signal(SIGINT, stop_on_signal);
      std::signal(SIGTERM, stop_on_signal);
      server.listen();
      active_server = nullptr;
      return 0;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IndexError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: query: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace mathsearch
