#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace geosearch {

enum class ObjectKind : std::uint8_t { point, line, circle };

std::string_view to_string(ObjectKind kind);
std::optional<ObjectKind> parse_object_kind(std::string_view text);

struct ObjectDecl {
  std::string name;
  ObjectKind kind;

  friend bool operator==(const ObjectDecl&, const ObjectDecl&) = default;
};

// Enumerators are in alphabetical order of their names.
enum class Predicate : std::uint8_t {
  center,
  circle_centered,
  collinear,
  concurrent,
  equidistant,
  incident,
  line_through,
  midpoint,
  on_circle,
  parallel,
  perpendicular,
};

inline constexpr std::size_t kPredicateCount = 11;
inline constexpr std::size_t kMaxArity = 4;

struct PredicateInfo {
  Predicate predicate;
  std::string_view name;
  std::size_t arity;
  std::array<ObjectKind, kMaxArity> kinds;
};

const PredicateInfo& info(Predicate p);
std::span<const PredicateInfo> predicate_table();
std::string_view to_string(Predicate p);
std::optional<Predicate> parse_predicate(std::string_view text);

/// Argument permutations under which a predicate's meaning is unchanged.
/// Each permutation maps output position i to input position perm[i].
std::span<const std::array<std::uint8_t, kMaxArity>> symmetry_group(Predicate p);

struct Fact {
  Predicate predicate;
  std::vector<std::string> args;

  friend auto operator<=>(const Fact&, const Fact&) = default;
  friend bool operator==(const Fact&, const Fact&) = default;
};

/// `predicate(a, b, ...)`
std::string to_string(const Fact& fact);

/// Canonical representative of a fact's symmetry orbit. Idempotent.
Fact normalize_fact(Fact fact);

/// Sort `args` in place into canonical order for `p`. Shared by the string
/// and interned representations so both agree on canonical form.
template <typename T>
void canonicalize_args(Predicate p, std::span<T> args);

using FactSet = std::set<Fact>;

/// A set of typed objects plus canonical facts over them. Plain value; may
/// be invalid, see validate().
struct Construction {
  std::map<std::string, ObjectKind> objects;
  FactSet facts;

  /// Throws ValidationError on a duplicate name.
  void declare(std::string name, ObjectKind kind);
  /// Inserts the canonical form of `fact`.
  void add_fact(Fact fact);

  std::optional<ObjectKind> kind_of(std::string_view name) const;
  /// Declarations ordered by kind, then name.
  std::vector<ObjectDecl> declarations() const;

  friend bool operator==(const Construction&, const Construction&) = default;
};

struct Violation {
  std::string subject;  // object name or rendered fact
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate(const Construction& c);

/// Parses the line-oriented construction format. Declarations are collected
/// before facts are resolved, so line order never matters.
Construction parse_construction(std::string_view text);

/// Deterministic rendering: declarations by kind then name, then facts
/// sorted by their text.
std::string serialize_construction(const Construction& c);

bool is_identifier(std::string_view text);

// --- implementation of the template -------------------------------------

template <typename T>
void canonicalize_args(Predicate p, std::span<T> args) {
  auto sort2 = [&](std::size_t i, std::size_t j) {
    if (args[j] < args[i]) std::swap(args[i], args[j]);
  };
  switch (p) {
    case Predicate::parallel:
    case Predicate::perpendicular:
      sort2(0, 1);
      break;
    case Predicate::collinear:
    case Predicate::concurrent:
      sort2(0, 1);
      sort2(1, 2);
      sort2(0, 1);
      break;
    case Predicate::midpoint:
    case Predicate::line_through:
      sort2(1, 2);
      break;
    case Predicate::equidistant:
      sort2(0, 1);
      sort2(2, 3);
      if (std::tie(args[2], args[3]) < std::tie(args[0], args[1])) {
        std::swap(args[0], args[2]);
        std::swap(args[1], args[3]);
      }
      break;
    case Predicate::center:
    case Predicate::circle_centered:
    case Predicate::incident:
    case Predicate::on_circle:
      break;
  }
}

}  // namespace geosearch
