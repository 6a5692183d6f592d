#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "geosearch/construction.hpp"

namespace geosearch {

/// A predicate applied to variables (names stored without the leading `?`).
struct AtomTemplate {
  Predicate predicate;
  std::vector<std::string> vars;

  friend bool operator==(const AtomTemplate&, const AtomTemplate&) = default;
};

/// Syntactic inequality `?lhs != ?rhs`.
struct Inequality {
  std::string lhs;
  std::string rhs;

  friend bool operator==(const Inequality&, const Inequality&) = default;
};

struct Rule {
  std::string name;
  AtomTemplate head;
  std::vector<AtomTemplate> body;
  std::vector<Inequality> side_conditions;

  friend bool operator==(const Rule&, const Rule&) = default;
};

namespace detail {
struct CompiledRules;
}

/// An ordered, validated, immutable list of Horn rules.
class RuleSet {
 public:
  RuleSet();
  /// Throws ParseError if any rule breaks the rule invariants.
  explicit RuleSet(std::vector<Rule> rules);

  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t size() const noexcept { return rules_.size(); }
  const detail::CompiledRules& compiled() const noexcept { return *compiled_; }

 private:
  std::vector<Rule> rules_;
  std::shared_ptr<const detail::CompiledRules> compiled_;
};

/// Parses `<name>: <head> :- <body1>, <body2>[, ?x != ?y ...].` lines.
RuleSet load_rules(std::string_view text);
RuleSet load_rules_file(const std::string& path);

/// Text of the built-in rule file.
std::string_view default_rules_text();
const RuleSet& default_rules();

/// Least fixpoint of `c.facts` under `rules`. Never introduces objects.
FactSet closure(const Construction& c, const RuleSet& rules);

/// `c` with its facts replaced by their closure.
Construction close(const Construction& c, const RuleSet& rules);

/// Throws ValidationError if `fact` names an undeclared object.
bool entails(const Construction& c, const RuleSet& rules, const Fact& fact);

std::string to_string(const Rule& rule);

}  // namespace geosearch
