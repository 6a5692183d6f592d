#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "geosearch/construction.hpp"

namespace geosearch {

/// Bipartite labelled graph: one node per object, one node per closed fact,
/// and an edge from each fact node to each of its arguments, labelled by
/// argument position.
struct ConceptualGraph {
  struct RelationNode {
    std::size_t id;
    Predicate predicate;
  };
  struct Edge {
    std::size_t relation;
    std::size_t position;
    std::string object;
  };

  std::vector<ObjectDecl> object_nodes;
  std::vector<RelationNode> relation_nodes;
  std::vector<Edge> edges;
};

/// Throws ValidationError if `closed` names an object missing from `c`.
ConceptualGraph build_graph(const Construction& c, const FactSet& closed);

/// Label-count fingerprint of a conceptual graph.
///
/// Keys by depth:
///   0: `kind:<kind>`            object nodes of that kind
///   1: `rel:<predicate>`        relation nodes with that label
///   2: `path:<p1>-<kind>-<p2>`  for every object node of that kind, one
///                               count per unordered pair of distinct
///                               relation nodes attached to it (p1 <= p2)
/// A depth-d fingerprint carries the keys of all smaller depths. Absent
/// keys count zero.
struct Gtd {
  int depth = 2;
  std::map<std::string, std::uint64_t> counts;

  std::uint64_t count(const std::string& key) const {
    auto it = counts.find(key);
    return it == counts.end() ? 0 : it->second;
  }

  friend bool operator==(const Gtd&, const Gtd&) = default;
};

inline constexpr int kDefaultGtdDepth = 2;
inline constexpr int kMaxGtdDepth = 2;

/// Throws std::invalid_argument for depths outside 0..2.
Gtd gtd(const ConceptualGraph& g, int depth = kDefaultGtdDepth);

/// Fingerprint of a construction whose facts are already closed.
Gtd gtd_of_closed(const Construction& closed, int depth = kDefaultGtdDepth);

/// Componentwise `candidate >= query` on every key of `query`.
/// Throws std::invalid_argument when depths differ.
bool gtd_subsumes(const Gtd& candidate, const Gtd& query);

/// `depth=<d> key=count ...` with keys sorted.
std::string serialize_gtd(const Gtd& g);
/// Throws ParseError on malformed text.
Gtd parse_gtd(std::string_view text);

}  // namespace geosearch
