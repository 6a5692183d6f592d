#pragma once
// Seeded random constructions for property tests.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "geosearch/construction.hpp"

namespace gen {

using Rng = std::mt19937_64;

struct Shape {
  std::size_t min_objects = 2;
  std::size_t max_objects = 6;
  std::size_t max_facts = 8;
  bool circles = true;
};

/// Valid construction with object names drawn so their sorted order is
/// unrelated to declaration order.
geosearch::Construction construction(Rng& rng, const Shape& shape = {});

/// One valid fact over the objects of `c`, or nothing if none fits.
std::optional<geosearch::Fact> fact(Rng& rng, const geosearch::Construction& c);

/// Objects kept with probability `keep`, facts restricted to them.
geosearch::Construction induced_sub(Rng& rng, const geosearch::Construction& c, double keep);

/// Same construction under a random injective renaming.
geosearch::Construction renamed(Rng& rng, const geosearch::Construction& c);

/// Facts of `c` in a random order, as a list.
std::vector<geosearch::Fact> shuffled_facts(Rng& rng, const geosearch::Construction& c);

/// Random (possibly non-canonical) argument order of a canonical fact.
geosearch::Fact scrambled(Rng& rng, const geosearch::Fact& f);

std::string random_name(Rng& rng);

}  // namespace gen
