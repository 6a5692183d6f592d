#pragma once
// Reference implementations used to check the library. They favour
// exhaustive enumeration over speed and share no code with the engine
// beyond the plain value types.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "geosearch/construction.hpp"
#include "geosearch/inference.hpp"

namespace oracle {

using Mapping = std::map<std::string, std::string>;

/// Lexicographically smallest argument list over the predicate's symmetry
/// group, with the group written out by hand.
geosearch::Fact canonical(const geosearch::Fact& f);

/// Applies every rule to every assignment of objects to variables until
/// nothing changes.
geosearch::FactSet naive_closure(const geosearch::Construction& c, const geosearch::RuleSet& rules);

/// Every injective kind-preserving map under which each fact of `q_closed`
/// lands in `t_closed`, sorted.
std::vector<Mapping> all_embeddings(const geosearch::Construction& q_closed, const geosearch::Construction& t_closed);

bool embeds(const geosearch::Construction& q_closed, const geosearch::Construction& t_closed);

/// Fingerprint counts recomputed from the closed facts directly.
std::map<std::string, std::uint64_t> gtd_counts(const geosearch::Construction& closed, int depth);

}  // namespace oracle
