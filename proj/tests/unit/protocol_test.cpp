#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

#include "../support/fixtures.hpp"
#include "../support/generators.hpp"
#include "geosearch/errors.hpp"
#include "geosearch/protocol.hpp"
#include "geosearch/server.hpp"

using namespace geosearch;

namespace {

std::string golden(const std::string& name) {
  std::ifstream in(std::filesystem::path(GEOSEARCH_GOLDEN_DIR) / name, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

EntryDraft segment_draft() {
  EntryDraft d;
  d.name = "Segment";
  d.description = "Two points and their line.";
  d.keywords = {"segment"};
  d.code = "point A\npoint B\nline a\nline_through(a, A, B)\n";
  d.level = 1;
  return d;
}

QueryRequest random_request(gen::Rng& rng) {
  QueryRequest r;
  auto text = [&] {
    std::string s = gen::random_name(rng);
    const char* extras[] = {" AND ", "\"", "\\", "\n", "é", "\t", "{}"};
    for (int i = 0; i < 3; ++i) s += extras[rng() % 7];
    return s;
  };
  switch (rng() % 3) {
    case 0: {
      TextQuery q{text(), std::nullopt};
      if (rng() % 2) q.mode = rng() % 2 ? TextMode::simple : TextMode::extended;
      r.body = q;
      break;
    }
    case 1: {
      GeometricQuery q{serialize_construction(gen::construction(rng)), std::nullopt};
      if (rng() % 2) q.confirm = rng() % 2 == 0;
      r.body = q;
      break;
    }
    default: {
      InsertRequest ins{segment_draft(), std::nullopt};
      ins.draft.name = text();
      if (rng() % 2) ins.draft.identifier = "ID" + std::to_string(rng() % 1000);
      if (rng() % 2) ins.force = rng() % 2 == 0;
      r.body = ins;
      return r;
    }
  }
  if (rng() % 2) r.filters = text();
  return r;
}

}  // namespace

TEST_CASE("request encodings match the golden files byte for byte") {
  CHECK(encode_request({TextQuery{"ceva", std::nullopt}, std::nullopt}) == golden("text_query.ndjson"));
  CHECK(encode_request({TextQuery{"ceva", std::nullopt}, "kind=conjecture AND level=2"}) ==
        golden("text_query_filters.ndjson"));
  CHECK(encode_request({TextQuery{"circle triangle", TextMode::extended}, "level=3"}) ==
        golden("text_query_extended.ndjson"));
  CHECK(encode_request({GeometricQuery{"point A\npoint B\nline a\nline_through(a, A, B)\n", false}, "kind=conjecture"}) ==
        golden("geometric_query.ndjson"));
  CHECK(encode_request({InsertRequest{segment_draft(), true}, std::nullopt}) == golden("insert.ndjson"));
}

TEST_CASE("response encodings match the golden files byte for byte") {
  CHECK(encode_response(ResultSet{}) == golden("response_empty.ndjson"));
  ResultSet rs;
  rs.theorems.push_back({"GEO_CEVA", {"Ceva's Theorem", "Cevians.", "point A\n", std::nullopt}});
  CHECK(encode_response(rs) == golden("response_result.ndjson"));
  CHECK(encode_response(InsertReply{std::nullopt, {{"GEO0001"}, {}, {"GEO0002"}}}) ==
        golden("response_insert_duplicate.ndjson"));
  CHECK(encode_response(ErrorReply{"unknown filter key: colour"}) == golden("response_error.ndjson"));
}

TEST_CASE("golden files decode") {
  auto r = decode_request(golden("text_query.ndjson"));
  CHECK(std::get<TextQuery>(r.body).text == "ceva");
  CHECK_FALSE(r.filters.has_value());
  auto f = decode_request(golden("text_query_filters.ndjson"));
  CHECK(parse_filters(*f.filters).predicates.size() == 2);
  CHECK(std::get<GeometricQuery>(decode_request(golden("geometric_query.ndjson")).body).confirm == false);
  CHECK(std::get<InsertRequest>(decode_request(golden("insert.ndjson")).body).draft == segment_draft());
  CHECK(std::get<ErrorReply>(decode_response(golden("response_error.ndjson"))).message ==
        "unknown filter key: colour");
  CHECK(std::get<ResultSet>(decode_response(golden("response_empty.ndjson"))).theorems.empty());
}

TEST_CASE("the plain text request has only Query and Filters members") {
  const auto line = encode_request({TextQuery{"x", std::nullopt}, "level=1"});
  CHECK(line.find('\n') == line.size() - 1);
  auto j = Json::parse(line);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"Query", "Filters"});
}

TEST_CASE("requests round-trip") {
  gen::Rng rng(71);
  for (int i = 0; i < 500; ++i) {
    auto r = random_request(rng);
    const auto line = encode_request(r);
    CHECK(line.find('\n') == line.size() - 1);
    CHECK(decode_request(line) == r);
  }
}

TEST_CASE("responses round-trip") {
  gen::Rng rng(72);
  for (int i = 0; i < 300; ++i) {
    QueryResponse r;
    switch (i % 3) {
      case 0: {
        ResultSet rs;
        for (std::size_t k = 0, n = rng() % 4; k < n; ++k) {
          TheoremRecord rec{gen::random_name(rng), "d\n\"q\"", serialize_construction(gen::construction(rng)), {}};
          if (rng() % 2) rec.match = std::map<std::string, std::string>{{"A", gen::random_name(rng)}};
          rs.theorems.emplace_back("ID" + std::to_string(k), rec);
        }
        r = rs;
        break;
      }
      case 1:
        r = InsertReply{rng() % 2 ? std::optional<std::string>("GEO0007") : std::nullopt,
                        {{"GEO0001"}, {}, {"GEO0002", "GEO0003"}}};
        if (std::get<InsertReply>(r).inserted()) std::get<InsertReply>(r).duplicates = {{}, {}, {"GEO0002"}};
        break;
      default:
        r = ErrorReply{gen::random_name(rng)};
    }
    CHECK(decode_response(encode_response(r)) == r);
  }
}

TEST_CASE("malformed requests are rejected") {
  CHECK_THROWS_AS(decode_request(R"({"Query":"a","GeometricQuery":"point A"})"), ProtocolError);
  CHECK_THROWS_AS(decode_request("{}"), ProtocolError);
  CHECK_THROWS_AS(decode_request("not json"), ProtocolError);
  CHECK_THROWS_AS(decode_request("[1,2]"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"Query":"a","Colour":"red"})"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"Query":1})"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"Query":"a","Mode":"fuzzy"})"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"Query":"a","Confirm":true})"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"GeometricQuery":"","Confirm":"yes"})"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"Insert":{"Name":"x","Code":""},"Filters":"level=1"})"), ProtocolError);
  CHECK_THROWS_AS(decode_request(R"({"Insert":{"Name":"x","Code":"","Bogus":1}})"), ProtocolError);
  CHECK_THROWS_AS(decode_request("{\"Query\":\"a\"}\n{\"Query\":\"b\"}"), ProtocolError);
  CHECK_NOTHROW(decode_request("{\"Query\":\"a\"}\r\n"));
  auto two = decode_request(R"({"Query":"x","Filters":"kind=conjecture AND level=2"})");
  CHECK(parse_filters(*two.filters).predicates.size() == 2);
}

TEST_CASE("malformed responses are rejected") {
  CHECK_THROWS_AS(decode_response("nope"), ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"X":{"Name":"a","Description":"b"}})"), ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"X":"string-encoded"})"), ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"Status":"inserted","Identifier":null,"Duplicates":{}})"), ProtocolError);
}

TEST_CASE("handler dispatch") {
  fixtures::TempDir dir;
  RepositoryConfig cfg;
  cfg.data_dir = dir.path();
  Repository repo(cfg);
  for (auto& d : load_drafts(fixtures::seed_file())) repo.insert(std::move(d), true);
  RequestHandler h(repo);

  auto rs = std::get<ResultSet>(decode_response(h.handle_line("{\"Query\":\"ceva\"}\n")));
  REQUIRE(rs.theorems.size() == 1);
  CHECK(rs.theorems[0].first == "GEO_CEVA");
  CHECK(rs.theorems[0].second.name == "Ceva's Theorem");
  CHECK(parse_construction(rs.theorems[0].second.code) == parse_construction(repo.get("GEO_CEVA").code));

  CHECK(h.handle_line(R"({"Query":"xyzzy"})") == "{}\n");
  CHECK(h.handle_line(R"({"Query":"a","Filters":"colour=red"})") == "{\"Error\":\"unknown filter key: colour\"}\n");
  CHECK(std::holds_alternative<ErrorReply>(decode_response(h.handle_line(R"({"Query":"("})"))));
  CHECK(std::holds_alternative<ErrorReply>(decode_response(h.handle_line(R"({"GeometricQuery":"point"})"))));
  CHECK(std::holds_alternative<ErrorReply>(decode_response(h.handle_line("\xff\xfe"))));

  auto geo = std::get<ResultSet>(h.handle(QueryRequest{GeometricQuery{std::string(fixtures::kTriangle), std::nullopt}, {}}));
  REQUIRE(!geo.theorems.empty());
  CHECK(geo.theorems[0].second.match.has_value());
  auto raw = std::get<ResultSet>(h.handle(QueryRequest{GeometricQuery{std::string(fixtures::kTriangle), false}, {}}));
  CHECK_FALSE(raw.theorems[0].second.match.has_value());

  auto ins = std::get<InsertReply>(h.handle(QueryRequest{InsertRequest{segment_draft(), std::nullopt}, {}}));
  CHECK_FALSE(ins.inserted());
  CHECK(!ins.duplicates.containing_entries.empty());
  auto forced = std::get<InsertReply>(h.handle(QueryRequest{InsertRequest{segment_draft(), true}, {}}));
  CHECK(forced.inserted());
}

TEST_CASE("server answers one request per connection and survives bad input") {
  fixtures::TempDir dir;
  RepositoryConfig cfg;
  cfg.data_dir = dir.path();
  Repository repo(cfg);
  for (auto& d : load_drafts(fixtures::seed_file())) repo.insert(std::move(d), true);
  RequestHandler handler(repo);
  Server server({"127.0.0.1", 0}, handler);
  REQUIRE(server.port() != 0);
  std::thread loop([&] { server.run(); });

  const auto port = server.port();
  CHECK(std::holds_alternative<ErrorReply>(decode_response(client_exchange("127.0.0.1", port, "{not json"))));
  CHECK(std::holds_alternative<ErrorReply>(decode_response(client_exchange("127.0.0.1", port, "\n"))));
  auto rs = std::get<ResultSet>(client_query("127.0.0.1", port, {TextQuery{"ceva", std::nullopt}, std::nullopt}));
  CHECK(rs.theorems.size() == 1);
  for (int i = 0; i < 20; ++i) {
    auto r = client_query("127.0.0.1", port, {TextQuery{"ceva", std::nullopt}, std::nullopt});
    CHECK(std::holds_alternative<ResultSet>(r));
  }
  CHECK(server.served() == 23);

  server.stop();
  loop.join();
  CHECK_THROWS_AS(client_query("127.0.0.1", port, {TextQuery{"ceva", std::nullopt}, std::nullopt},
                               std::chrono::milliseconds(500)),
                  TransportError);
}

TEST_CASE("oversized requests get an error reply") {
  fixtures::TempDir dir;
  RepositoryConfig cfg;
  cfg.data_dir = dir.path();
  Repository repo(cfg);
  RequestHandler handler(repo);
  ServerConfig sc{"127.0.0.1", 0};
  sc.max_request_bytes = 1024;
  Server server(sc, handler);
  std::thread loop([&] { server.run(); });
  auto reply = decode_response(client_exchange("127.0.0.1", server.port(), std::string(5000, 'x')));
  CHECK(std::holds_alternative<ErrorReply>(reply));
  CHECK(std::holds_alternative<ResultSet>(decode_response(client_exchange("127.0.0.1", server.port(), R"({"Query":"a"})"))));
  server.stop();
  loop.join();
}
