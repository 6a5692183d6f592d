#include "geosearch/construction.hpp"

#include <algorithm>
#include <cctype>

#include "geosearch/errors.hpp"
#include "geosearch/detail/text.hpp"

namespace geosearch {

namespace {

using K = ObjectKind;

constexpr std::array<PredicateInfo, kPredicateCount> kTable{{
    {Predicate::center, "center", 2, {K::point, K::circle}},
    {Predicate::circle_centered, "circle_centered", 3, {K::circle, K::point, K::point}},
    {Predicate::collinear, "collinear", 3, {K::point, K::point, K::point}},
    {Predicate::concurrent, "concurrent", 3, {K::line, K::line, K::line}},
    {Predicate::equidistant, "equidistant", 4, {K::point, K::point, K::point, K::point}},
    {Predicate::incident, "incident", 2, {K::point, K::line}},
    {Predicate::line_through, "line_through", 3, {K::line, K::point, K::point}},
    {Predicate::midpoint, "midpoint", 3, {K::point, K::point, K::point}},
    {Predicate::on_circle, "on_circle", 2, {K::point, K::circle}},
    {Predicate::parallel, "parallel", 2, {K::line, K::line}},
    {Predicate::perpendicular, "perpendicular", 2, {K::line, K::line}},
}};

using Perm = std::array<std::uint8_t, kMaxArity>;

constexpr std::array<Perm, 1> kIdentity{{{0, 1, 2, 3}}};
constexpr std::array<Perm, 2> kSwapFirstTwo{{{0, 1, 2, 3}, {1, 0, 2, 3}}};
constexpr std::array<Perm, 2> kSwapTail{{{0, 1, 2, 3}, {0, 2, 1, 3}}};
constexpr std::array<Perm, 6> kAllOfThree{{
    {0, 1, 2, 3}, {0, 2, 1, 3}, {1, 0, 2, 3}, {1, 2, 0, 3}, {2, 0, 1, 3}, {2, 1, 0, 3},
}};
constexpr std::array<Perm, 8> kTwoPairs{{
    {0, 1, 2, 3}, {1, 0, 2, 3}, {0, 1, 3, 2}, {1, 0, 3, 2},
    {2, 3, 0, 1}, {3, 2, 0, 1}, {2, 3, 1, 0}, {3, 2, 1, 0},
}};

// Reason a well-typed fact is degenerate, if it is.
std::optional<std::string> degeneracy(const Fact& f) {
  const auto& a = f.args;
  switch (f.predicate) {
    case Predicate::parallel:
    case Predicate::perpendicular:
      if (a[0] == a[1]) return "reflexive " + std::string(to_string(f.predicate));
      break;
    case Predicate::collinear:
    case Predicate::concurrent:
    case Predicate::midpoint:
      if (a[0] == a[1] || a[1] == a[2] || a[0] == a[2]) return "repeated argument";
      break;
    case Predicate::line_through:
    case Predicate::circle_centered:
      if (a[1] == a[2]) return "repeated argument";
      break;
    case Predicate::equidistant: {
      if (a[0] == a[1] || a[2] == a[3]) return "zero-length segment";
      auto lhs = std::minmax(a[0], a[1]);
      auto rhs = std::minmax(a[2], a[3]);
      if (lhs == rhs) return "segment compared with itself";
      break;
    }
    case Predicate::center:
    case Predicate::incident:
    case Predicate::on_circle:
      break;
  }
  return std::nullopt;
}

struct Statement {
  std::size_t line;
  std::string_view text;
};

Fact parse_fact_line(const Statement& st) {
  using detail::trim;
  const auto open = st.text.find('(');
  if (open == std::string_view::npos || st.text.back() != ')') {
    throw ParseError(st.line, std::string(st.text), "expected declaration or fact");
  }
  const auto head = trim(st.text.substr(0, open));
  const auto pred = parse_predicate(head);
  if (!pred) {
    if (!is_identifier(head)) throw ParseError(st.line, std::string(head), "bad predicate name");
    throw ParseError(st.line, std::string(head), "unknown predicate '" + std::string(head) + "'");
  }
  const auto inner = st.text.substr(open + 1, st.text.size() - open - 2);
  Fact fact{*pred, {}};
  for (auto part : detail::split(inner, ',')) {
    const auto name = trim(part);
    if (!is_identifier(name)) {
      throw ParseError(st.line, std::string(name), "bad argument '" + std::string(name) + "'");
    }
    fact.args.emplace_back(name);
  }
  const auto& pi = info(*pred);
  if (fact.args.size() != pi.arity) {
    throw ParseError(st.line, std::string(head),
                     std::string(pi.name) + " expects " + std::to_string(pi.arity) +
                         " arguments, got " + std::to_string(fact.args.size()));
  }
  return fact;
}

}  // namespace

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::point:
      return "point";
    case ObjectKind::line:
      return "line";
    case ObjectKind::circle:
      return "circle";
  }
  return "?";
}

std::optional<ObjectKind> parse_object_kind(std::string_view text) {
  if (text == "point") return ObjectKind::point;
  if (text == "line") return ObjectKind::line;
  if (text == "circle") return ObjectKind::circle;
  return std::nullopt;
}

const PredicateInfo& info(Predicate p) { return kTable[static_cast<std::size_t>(p)]; }

std::span<const PredicateInfo> predicate_table() { return kTable; }

std::string_view to_string(Predicate p) { return info(p).name; }

std::optional<Predicate> parse_predicate(std::string_view text) {
  for (const auto& pi : kTable) {
    if (pi.name == text) return pi.predicate;
  }
  return std::nullopt;
}

std::span<const Perm> symmetry_group(Predicate p) {
  switch (p) {
    case Predicate::parallel:
    case Predicate::perpendicular:
      return kSwapFirstTwo;
    case Predicate::collinear:
    case Predicate::concurrent:
      return kAllOfThree;
    case Predicate::midpoint:
    case Predicate::line_through:
      return kSwapTail;
    case Predicate::equidistant:
      return kTwoPairs;
    case Predicate::center:
    case Predicate::circle_centered:
    case Predicate::incident:
    case Predicate::on_circle:
      break;
  }
  return kIdentity;
}

std::string to_string(const Fact& fact) {
  std::string out(to_string(fact.predicate));
  out += '(';
  for (std::size_t i = 0; i < fact.args.size(); ++i) {
    if (i != 0) out += ", ";
    out += fact.args[i];
  }
  out += ')';
  return out;
}

Fact normalize_fact(Fact fact) {
  if (fact.args.size() == info(fact.predicate).arity) {
    canonicalize_args(fact.predicate, std::span<std::string>(fact.args));
  }
  return fact;
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !std::isalpha(static_cast<unsigned char>(text.front()))) return false;
  return std::all_of(text.begin(), text.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  });
}

void Construction::declare(std::string name, ObjectKind kind) {
  auto [it, inserted] = objects.emplace(std::move(name), kind);
  if (!inserted) throw ValidationError("duplicate declaration of '" + it->first + "'");
}

void Construction::add_fact(Fact fact) { facts.insert(normalize_fact(std::move(fact))); }

std::optional<ObjectKind> Construction::kind_of(std::string_view name) const {
  auto it = objects.find(std::string(name));
  if (it == objects.end()) return std::nullopt;
  return it->second;
}

std::vector<ObjectDecl> Construction::declarations() const {
  std::vector<ObjectDecl> out;
  out.reserve(objects.size());
  for (const auto& [name, kind] : objects) out.push_back({name, kind});
  std::stable_sort(out.begin(), out.end(),
                   [](const ObjectDecl& a, const ObjectDecl& b) { return a.kind < b.kind; });
  return out;
}

std::vector<Violation> validate(const Construction& c) {
  std::vector<Violation> out;
  for (const auto& [name, kind] : c.objects) {
    if (!is_identifier(name)) out.push_back({name, "invalid object name"});
  }
  for (const auto& fact : c.facts) {
    const auto subject = to_string(fact);
    const auto& pi = info(fact.predicate);
    if (fact.args.size() != pi.arity) {
      out.push_back({subject, "arity mismatch: expected " + std::to_string(pi.arity)});
      continue;
    }
    bool typed = true;
    for (std::size_t i = 0; i < pi.arity; ++i) {
      const auto kind = c.kind_of(fact.args[i]);
      if (!kind) {
        out.push_back({fact.args[i], "undeclared object in " + subject});
        typed = false;
      } else if (*kind != pi.kinds[i]) {
        out.push_back({fact.args[i], "kind mismatch in " + subject + ": expected " +
                                         std::string(to_string(pi.kinds[i])) + ", got " +
                                         std::string(to_string(*kind))});
        typed = false;
      }
    }
    if (!typed) continue;
    if (auto why = degeneracy(fact)) out.push_back({subject, *why});
    if (normalize_fact(fact) != fact) out.push_back({subject, "fact not in canonical form"});
  }
  return out;
}

Construction parse_construction(std::string_view text) {
  std::vector<Statement> fact_lines;
  Construction c;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const auto space = line.find_first_of(" \t");
    if (space != std::string_view::npos && line.find('(') == std::string_view::npos) {
      const auto word = line.substr(0, space);
      const auto name = detail::trim(line.substr(space));
      const auto kind = parse_object_kind(word);
      if (!kind) throw ParseError(line_no, std::string(word), "unknown object kind '" + std::string(word) + "'");
      if (!is_identifier(name)) throw ParseError(line_no, std::string(name), "bad object name '" + std::string(name) + "'");
      if (c.objects.contains(std::string(name))) {
        throw ParseError(line_no, std::string(name), "duplicate declaration of '" + std::string(name) + "'");
      }
      c.objects.emplace(std::string(name), *kind);
      continue;
    }
    fact_lines.push_back({line_no, line});
  }

  for (const auto& st : fact_lines) {
    Fact fact = parse_fact_line(st);
    const auto& pi = info(fact.predicate);
    for (std::size_t i = 0; i < pi.arity; ++i) {
      const auto kind = c.kind_of(fact.args[i]);
      if (!kind) {
        throw ParseError(st.line, fact.args[i], "undeclared object '" + fact.args[i] + "'");
      }
      if (*kind != pi.kinds[i]) {
        throw ParseError(st.line, fact.args[i],
                         "kind mismatch: '" + fact.args[i] + "' is a " + std::string(to_string(*kind)) +
                             ", " + std::string(pi.name) + " argument " + std::to_string(i + 1) +
                             " must be a " + std::string(to_string(pi.kinds[i])));
      }
    }
    if (auto why = degeneracy(fact)) throw ParseError(st.line, to_string(fact), *why + " in " + to_string(fact));
    c.add_fact(std::move(fact));
  }
  return c;
}

std::string serialize_construction(const Construction& c) {
  std::string out;
  for (const auto& decl : c.declarations()) {
    out += to_string(decl.kind);
    out += ' ';
    out += decl.name;
    out += '\n';
  }
  std::vector<std::string> lines;
  lines.reserve(c.facts.size());
  for (const auto& f : c.facts) lines.push_back(to_string(f));
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace geosearch
