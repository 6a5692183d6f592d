#include "geosearch/matcher.hpp"

#include <algorithm>
#include <stdexcept>

#include "geosearch/detail/atoms.hpp"

namespace geosearch {

namespace {

using detail::Atom;
using detail::ObjectId;

using Degrees = std::array<std::uint32_t, kPredicateCount>;

std::vector<Degrees> degrees_of(const std::vector<Atom>& atoms, std::size_t n) {
  std::vector<Degrees> out(n, Degrees{});
  for (const auto& a : atoms) {
    const auto p = static_cast<std::size_t>(a.predicate);
    for (std::size_t i = 0; i < a.arity(); ++i) {
      // Count each fact once per object even if it repeats the object.
      bool seen = false;
      for (std::size_t j = 0; j < i; ++j) seen = seen || a.args[j] == a.args[i];
      if (!seen) ++out[a.args[i]][p];
    }
  }
  return out;
}

std::uint32_t total(const Degrees& d) {
  std::uint32_t sum = 0;
  for (auto v : d) sum += v;
  return sum;
}

// Embeddings are produced in lexicographic order of the mapping by
// assigning query objects in id order (ids follow name order) and trying
// target candidates in ascending id order. Each partial assignment is kept
// only if a completion exists; that check searches the remaining objects in
// a most-constrained-first order and stops at the first success.
class Search {
 public:
  Search(const Construction& query, const Construction& target, std::size_t limit, std::uint64_t budget)
      : q_names_(query), t_names_(target), limit_(limit), budget_(budget) {
    for (const auto& f : query.facts) q_atoms_.push_back(q_names_.intern(f));
    for (const auto& f : target.facts) t_atoms_.insert(t_names_.intern(f));
    q_deg_ = degrees_of(q_atoms_, q_names_.size());
    t_deg_ = degrees_of(std::vector<Atom>(t_atoms_.begin(), t_atoms_.end()), t_names_.size());
    for (ObjectId t = 0; t < t_names_.size(); ++t) {
      by_kind_[static_cast<std::size_t>(t_names_.kind(t))].push_back(t);
    }
    facts_of_.assign(q_names_.size(), {});
    for (std::size_t i = 0; i < q_atoms_.size(); ++i) {
      for (std::size_t j = 0; j < q_atoms_[i].arity(); ++j) {
        auto& list = facts_of_[q_atoms_[i].args[j]];
        if (list.empty() || list.back() != i) list.push_back(i);
      }
    }
    plan();
  }

  void run() {
    const std::size_t n = q_names_.size();
    sigma_.assign(n, 0);
    assigned_.assign(n, false);
    used_.assign(t_names_.size(), false);
    if (completes()) lex(0);
  }

  bool exhausted() const { return exhausted_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<std::vector<ObjectId>>& found() const { return found_; }

  Embedding materialize(const std::vector<ObjectId>& sigma) const {
    Embedding e;
    for (ObjectId q = 0; q < sigma.size(); ++q) e.mapping.emplace(q_names_.name(q), t_names_.name(sigma[q]));
    for (const auto& a : q_atoms_) e.matched_facts.insert(t_names_.to_fact(image(a, sigma)));
    return e;
  }

 private:
  // Static order: next is the object with the most facts linking it to
  // already ordered objects, then the highest degree.
  void plan() {
    const std::size_t n = q_names_.size();
    std::vector<bool> placed(n, false);
    std::vector<std::uint32_t> links(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      ObjectId best = 0;
      bool have = false;
      for (ObjectId o = 0; o < n; ++o) {
        if (placed[o]) continue;
        if (!have || links[o] > links[best] ||
            (links[o] == links[best] && total(q_deg_[o]) > total(q_deg_[best]))) {
          best = o;
          have = true;
        }
      }
      placed[best] = true;
      order_.push_back(best);
      for (auto fi : facts_of_[best]) {
        for (std::size_t j = 0; j < q_atoms_[fi].arity(); ++j) ++links[q_atoms_[fi].args[j]];
      }
    }
  }

  Atom image(const Atom& a, const std::vector<ObjectId>& sigma) const {
    Atom out{a.predicate, {}};
    for (std::size_t i = 0; i < a.arity(); ++i) out.args[i] = sigma[a.args[i]];
    detail::canonicalize(out);
    return out;
  }

  bool fits(ObjectId q, ObjectId t) const {
    for (std::size_t p = 0; p < kPredicateCount; ++p) {
      if (t_deg_[t][p] < q_deg_[q][p]) return false;
    }
    return true;
  }

  // Every fact of `q` whose arguments are all assigned holds in the target.
  bool consistent(ObjectId q) const {
    for (auto i : facts_of_[q]) {
      const auto& a = q_atoms_[i];
      bool ready = true;
      for (std::size_t j = 0; j < a.arity() && ready; ++j) ready = assigned_[a.args[j]];
      if (ready && !t_atoms_.contains(image(a, sigma_))) return false;
    }
    return true;
  }

  // Tries `q -> t`; on success leaves the assignment in place.
  bool assign(ObjectId q, ObjectId t) {
    if (used_[t]) return false;
    if (++steps_ > budget_) {
      exhausted_ = true;
      return false;
    }
    if (!fits(q, t)) return false;
    sigma_[q] = t;
    assigned_[q] = true;
    if (!consistent(q)) {
      assigned_[q] = false;
      return false;
    }
    used_[t] = true;
    return true;
  }

  void unassign(ObjectId q) {
    used_[sigma_[q]] = false;
    assigned_[q] = false;
  }

  bool completes(std::size_t k = 0) {
    while (k < order_.size() && assigned_[order_[k]]) ++k;
    if (k == order_.size()) return true;
    const ObjectId q = order_[k];
    for (ObjectId t : by_kind_[static_cast<std::size_t>(q_names_.kind(q))]) {
      if (!assign(q, t)) {
        if (exhausted_) return false;
        continue;
      }
      const bool ok = completes(k + 1);
      unassign(q);
      if (ok) return true;
      if (exhausted_) return false;
    }
    return false;
  }

  void lex(ObjectId q) {
    if (q == q_names_.size()) {
      found_.push_back(sigma_);
      return;
    }
    for (ObjectId t : by_kind_[static_cast<std::size_t>(q_names_.kind(q))]) {
      if (!assign(q, t)) {
        if (exhausted_) return;
        continue;
      }
      if (completes()) lex(q + 1);
      unassign(q);
      if (exhausted_ || found_.size() >= limit_) return;
    }
  }

  detail::Interner q_names_;
  detail::Interner t_names_;
  std::vector<Atom> q_atoms_;
  detail::AtomSet t_atoms_;
  std::vector<Degrees> q_deg_;
  std::vector<Degrees> t_deg_;
  std::array<std::vector<ObjectId>, 3> by_kind_;
  std::vector<std::vector<std::size_t>> facts_of_;
  std::vector<ObjectId> order_;

  std::size_t limit_;
  std::uint64_t budget_;
  std::uint64_t steps_ = 0;
  bool exhausted_ = false;
  std::vector<ObjectId> sigma_;
  std::vector<bool> assigned_;
  std::vector<bool> used_;
  std::vector<std::vector<ObjectId>> found_;
};

}  // namespace

MatchResult match_closed(const Construction& query, const Construction& target, std::size_t limit,
                         std::uint64_t step_budget) {
  if (limit == 0) throw std::invalid_argument("embedding limit must be positive");
  Search search(query, target, limit, step_budget);
  search.run();

  MatchResult out;
  out.status = search.exhausted() ? MatchStatus::budget_exhausted : MatchStatus::complete;
  out.steps = search.steps();
  out.embeddings.reserve(search.found().size());
  for (const auto& sigma : search.found()) out.embeddings.push_back(search.materialize(sigma));
  return out;
}

std::vector<Embedding> find_embeddings(const Construction& query, const Construction& target,
                                       const RuleSet& rules, std::size_t limit) {
  return match_closed(close(query, rules), close(target, rules), limit).embeddings;
}

std::optional<Embedding> is_subconstruction(const Construction& query, const Construction& target,
                                            const RuleSet& rules) {
  auto found = find_embeddings(query, target, rules, 1);
  if (found.empty()) return std::nullopt;
  return std::move(found.front());
}

}  // namespace geosearch
