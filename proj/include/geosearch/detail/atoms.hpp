#pragma once

// Interned fact representation shared by the closure engine and the matcher.
// Object names are numbered in sorted order, so sorting ids reproduces the
// canonical order of the names they stand for.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "geosearch/construction.hpp"
#include "geosearch/errors.hpp"

namespace geosearch::detail {

using ObjectId = std::uint32_t;
using Tuple = std::array<ObjectId, kMaxArity>;

struct Atom {
  Predicate predicate;
  Tuple args{};

  std::size_t arity() const { return info(predicate).arity; }
  friend bool operator==(const Atom&, const Atom&) = default;
};

struct AtomHash {
  std::size_t operator()(const Atom& a) const noexcept {
    std::size_t h = static_cast<std::size_t>(a.predicate);
    for (auto v : a.args) h = h * 1000003u ^ v;
    return h;
  }
};

using AtomSet = std::unordered_set<Atom, AtomHash>;

inline void canonicalize(Atom& a) {
  canonicalize_args(a.predicate, std::span<ObjectId>(a.args.data(), a.arity()));
}

class Interner {
 public:
  explicit Interner(const Construction& c) {
    names_.reserve(c.objects.size());
    for (const auto& [name, kind] : c.objects) {
      ids_.emplace(name, static_cast<ObjectId>(names_.size()));
      names_.push_back(name);
      kinds_.push_back(kind);
    }
  }

  std::size_t size() const { return names_.size(); }
  const std::string& name(ObjectId id) const { return names_[id]; }
  ObjectKind kind(ObjectId id) const { return kinds_[id]; }

  ObjectId id(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) throw ValidationError("undeclared object '" + name + "'");
    return it->second;
  }

  Atom intern(const Fact& f) const {
    Atom a{f.predicate, {}};
    for (std::size_t i = 0; i < f.args.size() && i < kMaxArity; ++i) a.args[i] = id(f.args[i]);
    return a;
  }

  Fact to_fact(const Atom& a) const {
    Fact f{a.predicate, {}};
    f.args.reserve(a.arity());
    for (std::size_t i = 0; i < a.arity(); ++i) f.args.push_back(names_[a.args[i]]);
    return f;
  }

 private:
  std::unordered_map<std::string, ObjectId> ids_;
  std::vector<std::string> names_;
  std::vector<ObjectKind> kinds_;
};

}  // namespace geosearch::detail
