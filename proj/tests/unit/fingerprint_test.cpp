#include <doctest.h>

#include "../support/fixtures.hpp"
#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "geosearch/errors.hpp"
#include "geosearch/fingerprint.hpp"
#include "geosearch/inference.hpp"

using namespace geosearch;

namespace {

Gtd fingerprint(std::string_view text, int depth = 2) {
  return gtd_of_closed(close(parse_construction(text), default_rules()), depth);
}

}  // namespace

TEST_CASE("empty graph") {
  auto g = build_graph(Construction{}, {});
  CHECK(g.object_nodes.empty());
  CHECK(g.relation_nodes.empty());
  CHECK(g.edges.empty());
  for (int d = 0; d <= 2; ++d) CHECK(gtd(g, d).counts.empty());
}

TEST_CASE("graph of a single line through two points") {
  auto c = parse_construction("point A\npoint B\nline a\nline_through(a, A, B)");
  auto g = build_graph(c, closure(c, default_rules()));
  CHECK(g.object_nodes.size() == 3);
  CHECK(g.relation_nodes.size() == 3);
  CHECK(g.edges.size() == 7);
}

TEST_CASE("graph sizes follow objects, facts and arities") {
  gen::Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    auto c = gen::construction(rng);
    auto closed = closure(c, default_rules());
    auto g = build_graph(c, closed);
    std::size_t arity = 0;
    for (const auto& f : closed) arity += f.args.size();
    CHECK(g.object_nodes.size() == c.objects.size());
    CHECK(g.relation_nodes.size() == closed.size());
    CHECK(g.edges.size() == arity);
  }
}

TEST_CASE("build_graph rejects undeclared objects") {
  auto c = parse_construction("point A\nline a");
  CHECK_THROWS_AS(build_graph(c, {Fact{Predicate::incident, {"B", "a"}}}), ValidationError);
}

TEST_CASE("bare triangle counts") {
  auto d1 = fingerprint(fixtures::kTriangle, 1);
  CHECK(d1.count("kind:point") == 3);
  CHECK(d1.count("kind:line") == 3);
  CHECK(d1.count("rel:line_through") == 3);
  CHECK(d1.count("rel:incident") == 6);
  CHECK(d1.count("rel:collinear") == 0);
  CHECK(!d1.counts.contains("rel:collinear"));

  auto d2 = fingerprint(fixtures::kTriangle, 2);
  // Each vertex lies on two sides: one pair of incidences per vertex.
  CHECK(d2.count("path:incident-point-incident") == 3);
  CHECK(d2.count("path:line_through-point-line_through") == 3);
  CHECK(d2.count("path:incident-line-line_through") == 6);
  CHECK(d2.count("path:incident-line-incident") == 3);
  CHECK(d2.count("path:incident-point-line_through") == 12);
}

TEST_CASE("fingerprints match the pair-enumeration oracle") {
  gen::Rng rng(32);
  for (int i = 0; i < 500; ++i) {
    auto closed = close(gen::construction(rng, {1, 8, 10, true}), default_rules());
    for (int d = 0; d <= 2; ++d) {
      auto g = gtd_of_closed(closed, d);
      CHECK(g.depth == d);
      CHECK(g.counts == oracle::gtd_counts(closed, d));
      CHECK(gtd(build_graph(closed, closed.facts), d) == g);
    }
  }
}

TEST_CASE("invalid depths are rejected") {
  CHECK_THROWS_AS(gtd(ConceptualGraph{}, -1), std::invalid_argument);
  CHECK_THROWS_AS(gtd(ConceptualGraph{}, 3), std::invalid_argument);
  CHECK_THROWS_AS(gtd_subsumes(Gtd{1, {}}, Gtd{2, {}}), std::invalid_argument);
}

TEST_CASE("subsumption examples") {
  auto tri = fingerprint(fixtures::kTriangle);
  auto tri_circle = fingerprint(fixtures::triangle_with_circle());
  CHECK(gtd_subsumes(tri, Gtd{2, {}}));
  CHECK(gtd_subsumes(tri, tri));
  CHECK_FALSE(gtd_subsumes(tri, tri_circle));
  CHECK(gtd_subsumes(tri_circle, tri));
}

TEST_CASE("induced subconstructions are always subsumed") {
  gen::Rng rng(33);
  for (int i = 0; i < 1000; ++i) {
    auto t = close(gen::construction(rng, {2, 9, 12, true}), default_rules());
    auto q = close(gen::induced_sub(rng, t, 0.6), default_rules());
    for (int d = 0; d <= 2; ++d) CHECK(gtd_subsumes(gtd_of_closed(t, d), gtd_of_closed(q, d)));
  }
}

TEST_CASE("subsumption is a preorder and depth-monotone") {
  gen::Rng rng(34);
  std::vector<std::array<Gtd, 3>> prints;
  for (int i = 0; i < 60; ++i) {
    auto c = close(gen::construction(rng, {1, 5, 5, true}), default_rules());
    prints.push_back({gtd_of_closed(c, 0), gtd_of_closed(c, 1), gtd_of_closed(c, 2)});
  }
  for (const auto& a : prints) {
    CHECK(gtd_subsumes(a[2], a[2]));
    for (const auto& b : prints) {
      if (gtd_subsumes(a[2], b[2])) {
        CHECK(gtd_subsumes(a[1], b[1]));
        CHECK(gtd_subsumes(a[0], b[0]));
        if (gtd_subsumes(b[2], a[2])) CHECK(a[2] == b[2]);
      }
      for (const auto& c : prints)
        if (gtd_subsumes(a[2], b[2]) && gtd_subsumes(b[2], c[2])) CHECK(gtd_subsumes(a[2], c[2]));
    }
  }
}

TEST_CASE("serialized form round-trips") {
  auto g = fingerprint(fixtures::kTriangle, 1);
  CHECK(serialize_gtd(g) == "depth=1 kind:line=3 kind:point=3 rel:incident=6 rel:line_through=3");
  CHECK(parse_gtd(serialize_gtd(g)) == g);
  CHECK(serialize_gtd(Gtd{0, {}}) == "depth=0");
  CHECK(parse_gtd("depth=0") == Gtd{0, {}});

  gen::Rng rng(35);
  for (int i = 0; i < 200; ++i) {
    auto c = close(gen::construction(rng), default_rules());
    auto p = gtd_of_closed(c, static_cast<int>(rng() % 3));
    CHECK(parse_gtd(serialize_gtd(p)) == p);
  }

  CHECK_THROWS_AS(parse_gtd(""), ParseError);
  CHECK_THROWS_AS(parse_gtd("depth=3"), ParseError);
  CHECK_THROWS_AS(parse_gtd("depth=1 kind:point=0"), ParseError);
  CHECK_THROWS_AS(parse_gtd("depth=1 rel:incident=2 kind:point=1"), ParseError);
  CHECK_THROWS_AS(parse_gtd("depth=1 kind:point"), ParseError);
  CHECK_THROWS_AS(parse_gtd("depth=0 rel:incident=2"), ParseError);
}
