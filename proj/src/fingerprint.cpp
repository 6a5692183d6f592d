#include "geosearch/fingerprint.hpp"

#include <charconv>
#include <stdexcept>

#include "geosearch/detail/text.hpp"
#include "geosearch/errors.hpp"

namespace geosearch {

ConceptualGraph build_graph(const Construction& c, const FactSet& closed) {
  ConceptualGraph g;
  g.object_nodes.reserve(c.objects.size());
  for (const auto& [name, kind] : c.objects) g.object_nodes.push_back({name, kind});

  g.relation_nodes.reserve(closed.size());
  for (const auto& fact : closed) {
    const std::size_t id = g.relation_nodes.size();
    g.relation_nodes.push_back({id, fact.predicate});
    for (std::size_t pos = 0; pos < fact.args.size(); ++pos) {
      if (!c.objects.contains(fact.args[pos])) {
        throw ValidationError("fact " + to_string(fact) + " references undeclared object '" + fact.args[pos] + "'");
      }
      g.edges.push_back({id, pos, fact.args[pos]});
    }
  }
  return g;
}

Gtd gtd(const ConceptualGraph& g, int depth) {
  if (depth < 0 || depth > kMaxGtdDepth) {
    throw std::invalid_argument("GTD depth must be 0, 1 or 2, got " + std::to_string(depth));
  }
  Gtd out;
  out.depth = depth;
  std::map<std::string, ObjectKind> kinds;
  for (const auto& node : g.object_nodes) {
    kinds.emplace(node.name, node.kind);
    ++out.counts["kind:" + std::string(to_string(node.kind))];
  }
  if (depth < 1) return out;

  for (const auto& rel : g.relation_nodes) ++out.counts["rel:" + std::string(to_string(rel.predicate))];
  if (depth < 2) return out;

  // Relation nodes attached to each object, each listed once even when the
  // object fills several argument positions.
  std::map<std::string, std::vector<std::size_t>> attached;
  for (const auto& e : g.edges) {
    auto& list = attached[e.object];
    if (list.empty() || list.back() != e.relation) list.push_back(e.relation);
  }
  for (const auto& [object, rels] : attached) {
    const auto kind = std::string(to_string(kinds.at(object)));
    for (std::size_t i = 0; i < rels.size(); ++i) {
      for (std::size_t j = i + 1; j < rels.size(); ++j) {
        auto p1 = to_string(g.relation_nodes[rels[i]].predicate);
        auto p2 = to_string(g.relation_nodes[rels[j]].predicate);
        if (p2 < p1) std::swap(p1, p2);
        ++out.counts["path:" + std::string(p1) + "-" + kind + "-" + std::string(p2)];
      }
    }
  }
  return out;
}

Gtd gtd_of_closed(const Construction& closed, int depth) {
  return gtd(build_graph(closed, closed.facts), depth);
}

bool gtd_subsumes(const Gtd& candidate, const Gtd& query) {
  if (candidate.depth != query.depth) {
    throw std::invalid_argument("GTD depth mismatch: " + std::to_string(candidate.depth) + " vs " +
                                std::to_string(query.depth));
  }
  for (const auto& [key, n] : query.counts) {
    if (candidate.count(key) < n) return false;
  }
  return true;
}

std::string serialize_gtd(const Gtd& g) {
  std::string out = "depth=" + std::to_string(g.depth);
  for (const auto& [key, n] : g.counts) {
    out += ' ';
    out += key;
    out += '=';
    out += std::to_string(n);
  }
  return out;
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(0, std::string(text), "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

// Depth at which `key` first appears, or -1 if it is not a key.
int key_depth(std::string_view key) {
  auto rest_is_label = [](std::string_view s) {
    return !s.empty() && s.find_first_not_of("abcdefghijklmnopqrstuvwxyz_-") == std::string_view::npos;
  };
  constexpr std::string_view prefixes[] = {"kind:", "rel:", "path:"};
  for (int d = 0; d <= kMaxGtdDepth; ++d) {
    const auto prefix = prefixes[d];
    if (key.starts_with(prefix)) return rest_is_label(key.substr(prefix.size())) ? d : -1;
  }
  return -1;
}

}  // namespace

Gtd parse_gtd(std::string_view text) {
  auto fields = detail::split(detail::trim(text), ' ');
  if (fields.empty() || !fields[0].starts_with("depth=")) {
    throw ParseError(0, std::string(text), "GTD must start with depth=<d>");
  }
  Gtd out;
  out.depth = parse_number<int>(fields[0].substr(6), "depth");
  if (out.depth < 0 || out.depth > kMaxGtdDepth) {
    throw ParseError(0, std::string(fields[0]), "GTD depth out of range");
  }
  std::string previous;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const auto eq = fields[i].rfind('=');
    if (eq == std::string_view::npos) throw ParseError(0, std::string(fields[i]), "expected key=count");
    std::string key(fields[i].substr(0, eq));
    const int kd = key_depth(key);
    if (kd < 0) throw ParseError(0, key, "bad GTD key '" + key + "'");
    if (kd > out.depth) throw ParseError(0, key, "GTD key '" + key + "' exceeds depth " + std::to_string(out.depth));
    if (i > 1 && key <= previous) throw ParseError(0, key, "GTD keys must be sorted and unique");
    const auto n = parse_number<std::uint64_t>(fields[i].substr(eq + 1), "count");
    if (n == 0) throw ParseError(0, key, "GTD counts must be positive");
    out.counts.emplace(key, n);
    previous = std::move(key);
  }
  return out;
}

}  // namespace geosearch
