#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geosearch/construction.hpp"
#include "geosearch/inference.hpp"

namespace geosearch {

/// Witness that a query is a subconstruction of a target: an injective,
/// kind-preserving renaming of query objects under which every closed
/// query fact is a closed target fact.
struct Embedding {
  std::map<std::string, std::string> mapping;
  /// Images of the closed query facts, in target names.
  FactSet matched_facts;

  friend auto operator<=>(const Embedding& a, const Embedding& b) { return a.mapping <=> b.mapping; }
  friend bool operator==(const Embedding& a, const Embedding& b) { return a.mapping == b.mapping; }
};

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000;

enum class MatchStatus {
  complete,          // `embeddings` is exact up to the limit
  budget_exhausted,  // search stopped early; `embeddings` may be partial
};

struct MatchResult {
  std::vector<Embedding> embeddings;
  MatchStatus status = MatchStatus::complete;
  std::uint64_t steps = 0;
};

/// Enumerates embeddings between two constructions whose facts are already
/// closed: the `limit` smallest mappings, in lexicographic order.
MatchResult match_closed(const Construction& query, const Construction& target, std::size_t limit,
                         std::uint64_t step_budget = kDefaultStepBudget);

/// Closes both sides under `rules`, then matches.
std::vector<Embedding> find_embeddings(const Construction& query, const Construction& target,
                                       const RuleSet& rules, std::size_t limit);

std::optional<Embedding> is_subconstruction(const Construction& query, const Construction& target,
                                            const RuleSet& rules);

}  // namespace geosearch
