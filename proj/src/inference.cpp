#include "geosearch/inference.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "geosearch/detail/atoms.hpp"
#include "geosearch/detail/text.hpp"
#include "geosearch/errors.hpp"

namespace geosearch {

namespace detail {

using VarId = std::uint8_t;

struct CompiledAtom {
  Predicate predicate;
  std::array<VarId, kMaxArity> vars{};
};

struct CompiledRule {
  std::size_t var_count = 0;
  CompiledAtom head;
  std::vector<CompiledAtom> body;
  std::vector<std::pair<VarId, VarId>> distinct;
};

struct CompiledRules {
  std::vector<CompiledRule> rules;
};

}  // namespace detail

namespace {

using detail::Atom;
using detail::ObjectId;
using detail::Tuple;

constexpr ObjectId kUnbound = static_cast<ObjectId>(-1);

detail::CompiledRule compile(const Rule& rule) {
  if (rule.body.empty()) throw ParseError(0, rule.name, "rule " + rule.name + " has an empty body");

  std::map<std::string, detail::VarId> ids;
  std::map<std::string, ObjectKind> kinds;
  auto check_atom = [&](const AtomTemplate& atom) {
    const auto& pi = info(atom.predicate);
    if (atom.vars.size() != pi.arity) {
      throw ParseError(0, std::string(pi.name),
                       "rule " + rule.name + ": " + std::string(pi.name) + " expects " +
                           std::to_string(pi.arity) + " arguments, got " + std::to_string(atom.vars.size()));
    }
    for (std::size_t i = 0; i < pi.arity; ++i) {
      auto [it, fresh] = kinds.emplace(atom.vars[i], pi.kinds[i]);
      if (!fresh && it->second != pi.kinds[i]) {
        throw ParseError(0, "?" + atom.vars[i],
                         "rule " + rule.name + ": variable ?" + atom.vars[i] + " used as both " +
                             std::string(to_string(it->second)) + " and " + std::string(to_string(pi.kinds[i])));
      }
    }
  };

  detail::CompiledRule out;
  for (const auto& atom : rule.body) {
    check_atom(atom);
    detail::CompiledAtom ca{atom.predicate, {}};
    for (std::size_t i = 0; i < atom.vars.size(); ++i) {
      auto [it, fresh] = ids.emplace(atom.vars[i], static_cast<detail::VarId>(ids.size()));
      ca.vars[i] = it->second;
    }
    out.body.push_back(ca);
  }
  check_atom(rule.head);
  out.head.predicate = rule.head.predicate;
  for (std::size_t i = 0; i < rule.head.vars.size(); ++i) {
    auto it = ids.find(rule.head.vars[i]);
    if (it == ids.end()) {
      throw ParseError(0, "?" + rule.head.vars[i],
                       "rule " + rule.name + ": head variable ?" + rule.head.vars[i] + " does not occur in the body");
    }
    out.head.vars[i] = it->second;
  }
  for (const auto& neq : rule.side_conditions) {
    auto l = ids.find(neq.lhs);
    auto r = ids.find(neq.rhs);
    if (l == ids.end() || r == ids.end()) {
      const auto& missing = l == ids.end() ? neq.lhs : neq.rhs;
      throw ParseError(0, "?" + missing,
                       "rule " + rule.name + ": side-condition variable ?" + missing + " does not occur in the body");
    }
    out.distinct.emplace_back(l->second, r->second);
  }
  out.var_count = ids.size();
  return out;
}

// --- rule text parsing ---------------------------------------------------

std::string parse_variable(std::string_view text, std::size_t line) {
  text = detail::trim(text);
  if (text.size() < 2 || text.front() != '?' || !is_identifier(text.substr(1))) {
    throw ParseError(line, std::string(text), "expected variable, got '" + std::string(text) + "'");
  }
  return std::string(text.substr(1));
}

AtomTemplate parse_atom(std::string_view text, std::size_t line) {
  text = detail::trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.empty() || text.back() != ')') {
    throw ParseError(line, std::string(text), "expected atom, got '" + std::string(text) + "'");
  }
  const auto name = detail::trim(text.substr(0, open));
  const auto pred = parse_predicate(name);
  if (!pred) throw ParseError(line, std::string(name), "unknown predicate '" + std::string(name) + "'");
  AtomTemplate atom{*pred, {}};
  for (auto part : detail::split(text.substr(open + 1, text.size() - open - 2), ',')) {
    atom.vars.push_back(parse_variable(part, line));
  }
  return atom;
}

// Splits on commas outside parentheses.
std::vector<std::string_view> split_body(std::string_view text, std::size_t line) {
  std::vector<std::string_view> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') ++depth;
    if (text[i] == ')' && --depth < 0) throw ParseError(line, ")", "unbalanced ')'");
    if (text[i] == ',' && depth == 0) {
      out.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (depth != 0) throw ParseError(line, "(", "unbalanced '('");
  out.push_back(text.substr(start));
  return out;
}

Rule parse_rule(std::string_view text, std::size_t line) {
  const auto arrow = text.find(":-");
  const auto colon = text.find(':');
  if (arrow == std::string_view::npos) throw ParseError(line, std::string(text), "missing ':-'");
  if (colon == arrow) throw ParseError(line, std::string(text), "missing rule name");
  const auto name = detail::trim(text.substr(0, colon));
  if (!is_identifier(name)) throw ParseError(line, std::string(name), "bad rule name '" + std::string(name) + "'");
  if (text.back() != '.') throw ParseError(line, std::string(text), "rule must end with '.'");

  Rule rule;
  rule.name = std::string(name);
  rule.head = parse_atom(text.substr(colon + 1, arrow - colon - 1), line);
  const auto body = text.substr(arrow + 2, text.size() - arrow - 3);
  for (auto item : split_body(body, line)) {
    item = detail::trim(item);
    if (const auto neq = item.find("!="); neq != std::string_view::npos) {
      rule.side_conditions.push_back({parse_variable(item.substr(0, neq), line),
                                      parse_variable(item.substr(neq + 2), line)});
    } else {
      rule.body.push_back(parse_atom(item, line));
    }
  }
  return rule;
}

// --- closure -------------------------------------------------------------

// Every fact is stored once per distinct argument order in its symmetry
// orbit, so rule bodies unify positionally against any orientation.
class ViewStore {
 public:
  bool contains(const Atom& a) const { return all_.contains(a); }

  bool insert(const Atom& a) {
    if (!all_.insert(a).second) return false;
    const auto p = static_cast<std::size_t>(a.predicate);
    for (const Tuple& view : orbit(a)) {
      const auto idx = static_cast<std::uint32_t>(views_[p].size());
      views_[p].push_back(view);
      for (std::size_t i = 0; i < a.arity(); ++i) index_[p][i][view[i]].push_back(idx);
    }
    return true;
  }

  const std::vector<Tuple>& views(Predicate p) const { return views_[static_cast<std::size_t>(p)]; }

  // Views of `p` with `value` at `pos`, or null if none.
  const std::vector<std::uint32_t>* lookup(Predicate p, std::size_t pos, ObjectId value) const {
    const auto& m = index_[static_cast<std::size_t>(p)][pos];
    auto it = m.find(value);
    return it == m.end() ? nullptr : &it->second;
  }

  const detail::AtomSet& atoms() const { return all_; }

  static std::vector<Tuple> orbit(const Atom& a) {
    std::vector<Tuple> out;
    for (const auto& perm : symmetry_group(a.predicate)) {
      Tuple t{};
      for (std::size_t i = 0; i < a.arity(); ++i) t[i] = a.args[perm[i]];
      if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    }
    return out;
  }

 private:
  detail::AtomSet all_;
  std::array<std::vector<Tuple>, kPredicateCount> views_;
  std::array<std::array<std::unordered_map<ObjectId, std::vector<std::uint32_t>>, kMaxArity>, kPredicateCount>
      index_;
};

class Evaluator {
 public:
  Evaluator(const detail::CompiledRule& rule, const ViewStore& store, const ViewStore& delta,
            detail::AtomSet& fresh)
      : rule_(rule), store_(store), delta_(delta), fresh_(fresh), binding_(rule.var_count, kUnbound) {}

  // Joins with body atom `seed` restricted to the delta, the rest against
  // the full store.
  void run(std::size_t seed) {
    order_.clear();
    order_.push_back(seed);
    for (std::size_t i = 0; i < rule_.body.size(); ++i) {
      if (i != seed) order_.push_back(i);
    }
    for (const Tuple& t : delta_.views(rule_.body[seed].predicate)) step(0, t);
  }

 private:
  void extend(std::size_t depth) {
    if (depth == order_.size()) {
      emit();
      return;
    }
    const auto& atom = rule_.body[order_[depth]];
    const auto& all = store_.views(atom.predicate);
    for (std::size_t i = 0; i < info(atom.predicate).arity; ++i) {
      const auto bound = binding_[atom.vars[i]];
      if (bound == kUnbound) continue;
      if (const auto* hits = store_.lookup(atom.predicate, i, bound)) {
        for (auto idx : *hits) step(depth, all[idx]);
      }
      return;
    }
    for (const Tuple& t : all) step(depth, t);
  }

  void step(std::size_t depth, const Tuple& t) {
    const auto& atom = rule_.body[order_[depth]];
    std::array<detail::VarId, kMaxArity> bound_here{};
    std::size_t n_bound = 0;
    bool ok = true;
    for (std::size_t i = 0; i < info(atom.predicate).arity; ++i) {
      auto& slot = binding_[atom.vars[i]];
      if (slot == kUnbound) {
        slot = t[i];
        bound_here[n_bound++] = atom.vars[i];
      } else if (slot != t[i]) {
        ok = false;
        break;
      }
    }
    if (ok) extend(depth + 1);
    for (std::size_t i = 0; i < n_bound; ++i) binding_[bound_here[i]] = kUnbound;
  }

  void emit() {
    for (auto [l, r] : rule_.distinct) {
      if (binding_[l] == binding_[r]) return;
    }
    Atom head{rule_.head.predicate, {}};
    for (std::size_t i = 0; i < head.arity(); ++i) head.args[i] = binding_[rule_.head.vars[i]];
    detail::canonicalize(head);
    if (!store_.contains(head)) fresh_.insert(head);
  }

  const detail::CompiledRule& rule_;
  const ViewStore& store_;
  const ViewStore& delta_;
  detail::AtomSet& fresh_;
  std::vector<ObjectId> binding_;
  std::vector<std::size_t> order_;
};

}  // namespace

RuleSet::RuleSet() : compiled_(std::make_shared<detail::CompiledRules>()) {}

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  auto compiled = std::make_shared<detail::CompiledRules>();
  std::set<std::string> names;
  for (const auto& rule : rules_) {
    if (!names.insert(rule.name).second) throw ParseError(0, rule.name, "duplicate rule name " + rule.name);
    compiled->rules.push_back(compile(rule));
  }
  compiled_ = std::move(compiled);
}

RuleSet load_rules(std::string_view text) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  for (auto raw : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    try {
      rules.push_back(parse_rule(line, line_no));
      // Validate eagerly so errors carry the line number.
      compile(rules.back());
    } catch (const ParseError& e) {
      if (e.line() != 0) throw;
      throw ParseError(line_no, e.token(), e.what());
    }
  }
  return RuleSet(std::move(rules));
}

RuleSet load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open rule file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_rules(buf.str());
}

const RuleSet& default_rules() {
  static const RuleSet rules = load_rules(default_rules_text());
  return rules;
}

FactSet closure(const Construction& c, const RuleSet& rules) {
  const detail::Interner names(c);
  ViewStore store;
  auto delta = std::make_unique<ViewStore>();
  for (const auto& f : c.facts) {
    Atom a = names.intern(f);
    detail::canonicalize(a);
    store.insert(a);
    delta->insert(a);
  }

  while (!delta->atoms().empty()) {
    detail::AtomSet fresh;
    for (const auto& rule : rules.compiled().rules) {
      Evaluator eval(rule, store, *delta, fresh);
      for (std::size_t seed = 0; seed < rule.body.size(); ++seed) eval.run(seed);
    }
    auto next = std::make_unique<ViewStore>();
    for (const auto& a : fresh) {
      store.insert(a);
      next->insert(a);
    }
    delta = std::move(next);
  }

  FactSet out;
  for (const auto& a : store.atoms()) out.insert(names.to_fact(a));
  return out;
}

Construction close(const Construction& c, const RuleSet& rules) {
  Construction out;
  out.objects = c.objects;
  out.facts = closure(c, rules);
  return out;
}

bool entails(const Construction& c, const RuleSet& rules, const Fact& fact) {
  for (const auto& arg : fact.args) {
    if (!c.objects.contains(arg)) throw ValidationError("undeclared object '" + arg + "'");
  }
  return closure(c, rules).contains(normalize_fact(fact));
}

std::string to_string(const Rule& rule) {
  auto atom = [](const AtomTemplate& a) {
    std::string out(to_string(a.predicate));
    out += '(';
    for (std::size_t i = 0; i < a.vars.size(); ++i) {
      if (i != 0) out += ", ";
      out += '?' + a.vars[i];
    }
    return out + ')';
  };
  std::string out = rule.name + ": " + atom(rule.head) + " :-";
  for (std::size_t i = 0; i < rule.body.size(); ++i) out += (i ? ", " : " ") + atom(rule.body[i]);
  for (const auto& neq : rule.side_conditions) out += ", ?" + neq.lhs + " != ?" + neq.rhs;
  return out + '.';
}

}  // namespace geosearch
