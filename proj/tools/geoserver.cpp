// geoserver: serves a geometric repository over newline-delimited JSON/TCP.
//
//   geoserver --port P --data DIR [--rules FILE] [--gtd-depth {0,1,2}]
//             [--host H] [--seed FILE.json]

#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "geosearch/errors.hpp"
#include "geosearch/server.hpp"

namespace {

geosearch::Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric repository server"};
  std::string host = "0.0.0.0";
  std::uint16_t port = 7890;
  std::string data_dir;
  std::string rules_file;
  std::string seed_file;
  int depth = geosearch::kDefaultGtdDepth;
  app.add_option("--host", host, "Address to bind")->capture_default_str();
  app.add_option("--port", port, "TCP port (0 for ephemeral)")->capture_default_str();
  app.add_option("--data", data_dir, "Data directory")->required();
  app.add_option("--rules", rules_file, "Inference rule file (default: built-in rules)")->check(CLI::ExistingFile);
  app.add_option("--gtd-depth", depth, "Fingerprint depth")->check(CLI::Range(0, 2))->capture_default_str();
  app.add_option("--seed", seed_file, "JSON array of entry drafts to insert when missing")->check(CLI::ExistingFile);
  CLI11_PARSE(app, argc, argv);

  try {
    geosearch::RepositoryConfig cfg;
    cfg.data_dir = data_dir;
    cfg.gtd_depth = depth;
    if (!rules_file.empty()) cfg.rules = geosearch::load_rules_file(rules_file);
    geosearch::Repository repo(std::move(cfg));
    for (const auto& id : repo.refreshed_on_open()) {
      std::cerr << "geoserver: refreshed fingerprint cache of " << id << '\n';
    }

    if (!seed_file.empty()) {
      std::size_t added = 0;
      for (auto& draft : geosearch::load_drafts(seed_file)) {
        if (draft.identifier && repo.contains(*draft.identifier)) continue;
        repo.insert(std::move(draft), /*force=*/true);
        ++added;
      }
      std::cerr << "geoserver: seeded " << added << " entries from " << seed_file << '\n';
    }

    geosearch::RequestHandler handler(repo);
    geosearch::Server server({host, port}, handler);
    g_server = &server;
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    ::sigaction(SIGINT, &sa, nullptr);
    ::sigaction(SIGTERM, &sa, nullptr);
    std::signal(SIGPIPE, SIG_IGN);

    std::cerr << "geoserver: " << repo.size() << " entries, listening on " << host << ':' << server.port() << '\n';
    server.run();
    g_server = nullptr;
    std::cerr << "geoserver: stopped after " << server.served() << " requests\n";
  } catch (const std::exception& e) {
    std::cerr << "geoserver: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
