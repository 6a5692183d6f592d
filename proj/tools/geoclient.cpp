// geoclient: sends one request to a geoserver and prints the response.
//
//   geoclient HOST PORT QUERY [--filters S] [--mode simple|extended]
//   geoclient HOST PORT --geometric FILE [--no-confirm] [--filters S]
//   geoclient HOST PORT --insert FILE.json [--force]
//
// Exit codes: 0 success, 1 transport error, 2 server-reported Error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "geosearch/errors.hpp"
#include "geosearch/server.hpp"

namespace {

constexpr int kExitTransport = 1;
constexpr int kExitServerError = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Mirrors returned constructions into a local directory, one file per entry.
void save_codes(const geosearch::ResultSet& rs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [id, rec] : rs.theorems) {
    std::ofstream out(dir / (id + ".cons"), std::ios::binary | std::ios::trunc);
    out << rec.code;
    if (!out) throw std::runtime_error("cannot write " + (dir / (id + ".cons")).string());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query a geometric repository server"};
  std::string host;
  std::uint16_t port = 0;
  std::string query;
  std::string filters;
  std::string mode;
  std::string geometric_file;
  std::string insert_file;
  std::string save_dir;
  bool no_confirm = false;
  bool force = false;
  bool compact = false;
  int timeout_ms = static_cast<int>(geosearch::kDefaultClientTimeout.count());

  app.add_option("host", host, "Server host")->required();
  app.add_option("port", port, "Server port")->required();
  app.add_option("query", query, "Text query");
  auto* filters_opt = app.add_option("--filters", filters, "Filters: key=value[ AND key=value...]");
  auto* mode_opt = app.add_option("--mode", mode, "Text search mode")->check(CLI::IsMember({"simple", "extended"}));
  auto* geo_opt = app.add_option("--geometric", geometric_file, "Construction file for a geometric query")
                      ->check(CLI::ExistingFile);
  auto* insert_opt = app.add_option("--insert", insert_file, "Entry draft (JSON) to insert")->check(CLI::ExistingFile);
  app.add_flag("--no-confirm", no_confirm, "Return GTD candidates without subgraph confirmation")->needs(geo_opt);
  app.add_flag("--force", force, "Insert even when duplicates exist")->needs(insert_opt);
  app.add_option("--save-dir", save_dir, "Write each returned construction to DIR/<id>.cons");
  app.add_option("--timeout", timeout_ms, "Connect/read timeout in milliseconds")->capture_default_str();
  app.add_flag("--compact", compact, "Print the response as a single line");
  geo_opt->excludes(insert_opt);
  mode_opt->excludes(geo_opt)->excludes(insert_opt);
  filters_opt->excludes(insert_opt);
  CLI11_PARSE(app, argc, argv);

  geosearch::QueryRequest request;
  try {
    if (!geometric_file.empty()) {
      request.body = geosearch::GeometricQuery{slurp(geometric_file), no_confirm ? std::optional<bool>(false) : std::nullopt};
    } else if (!insert_file.empty()) {
      auto draft = geosearch::draft_from_json(geosearch::Json::parse(slurp(insert_file)));
      request.body = geosearch::InsertRequest{std::move(draft), force ? std::optional<bool>(true) : std::nullopt};
    } else if (app.count("query") != 0) {
      geosearch::TextQuery q{query, std::nullopt};
      if (!mode.empty()) q.mode = mode == "extended" ? geosearch::TextMode::extended : geosearch::TextMode::simple;
      request.body = std::move(q);
    } else {
      std::cerr << "geoclient: give a QUERY, --geometric FILE or --insert FILE.json\n";
      return kExitTransport;
    }
    if (!filters.empty()) request.filters = filters;
  } catch (const std::exception& e) {
    std::cerr << "geoclient: " << e.what() << '\n';
    return kExitTransport;
  }

  geosearch::QueryResponse response;
  try {
    response = geosearch::client_query(host, port, request, std::chrono::milliseconds(timeout_ms));
  } catch (const geosearch::Error& e) {
    std::cerr << "geoclient: " << e.what() << '\n';
    return kExitTransport;
  }

  const auto line = geosearch::encode_response(response);
  if (compact) {
    std::cout << line;
  } else {
    std::cout << geosearch::Json::parse(line).dump(2) << '\n';
  }

  if (const auto* err = std::get_if<geosearch::ErrorReply>(&response)) {
    std::cerr << "geoclient: server error: " << err->message << '\n';
    return kExitServerError;
  }
  if (const auto* rs = std::get_if<geosearch::ResultSet>(&response); rs && !save_dir.empty()) {
    try {
      save_codes(*rs, save_dir);
    } catch (const std::exception& e) {
      std::cerr << "geoclient: " << e.what() << '\n';
      return kExitTransport;
    }
  }
  return 0;
}
