#include "generators.hpp"

#include <algorithm>
#include <set>

namespace gen {

using geosearch::Construction;
using geosearch::Fact;
using geosearch::ObjectKind;

namespace {

std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::string random_name(Rng& rng) {
  static constexpr std::string_view kFirst = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
  std::string name(1, kFirst[uniform(rng, 0, kFirst.size() - 1)]);
  if (uniform(rng, 0, 2) != 0) name += std::to_string(uniform(rng, 0, 99));
  return name;
}

std::optional<Fact> fact(Rng& rng, const Construction& c) {
  std::map<ObjectKind, std::vector<std::string>> by_kind;
  for (const auto& [n, k] : c.objects) by_kind[k].push_back(n);

  std::vector<const geosearch::PredicateInfo*> usable;
  for (const auto& pi : geosearch::predicate_table()) {
    std::map<ObjectKind, std::size_t> need;
    for (std::size_t i = 0; i < pi.arity; ++i) ++need[pi.kinds[i]];
    bool ok = true;
    for (auto [k, n] : need) ok = ok && by_kind[k].size() >= std::min<std::size_t>(n, 2);
    if (ok) usable.push_back(&pi);
  }
  if (usable.empty()) return std::nullopt;

  for (int attempt = 0; attempt < 20; ++attempt) {
    const auto& pi = *usable[uniform(rng, 0, usable.size() - 1)];
    Fact f{pi.predicate, {}};
    for (std::size_t i = 0; i < pi.arity; ++i) {
      const auto& pool = by_kind[pi.kinds[i]];
      f.args.push_back(pool[uniform(rng, 0, pool.size() - 1)]);
    }
    Construction probe;
    for (const auto& a : f.args) {
      if (!probe.kind_of(a)) probe.declare(a, *c.kind_of(a));
    }
    probe.add_fact(f);
    if (geosearch::validate(probe).empty()) return geosearch::normalize_fact(f);
  }
  return std::nullopt;
}

Construction construction(Rng& rng, const Shape& shape) {
  Construction c;
  const auto n = uniform(rng, shape.min_objects, shape.max_objects);
  while (c.objects.size() < n) {
    auto name = random_name(rng);
    if (c.kind_of(name)) continue;
    const auto roll = uniform(rng, 0, shape.circles ? 9 : 7);
    const auto kind = roll < 4 ? ObjectKind::point : roll < 8 ? ObjectKind::line : ObjectKind::circle;
    c.declare(name, kind);
  }
  const auto facts = uniform(rng, 0, shape.max_facts);
  for (std::size_t i = 0; i < facts; ++i) {
    if (auto f = fact(rng, c)) c.add_fact(*f);
  }
  return c;
}

Construction induced_sub(Rng& rng, const Construction& c, double keep) {
  std::bernoulli_distribution coin(keep);
  Construction q;
  for (const auto& [n, k] : c.objects)
    if (coin(rng)) q.declare(n, k);
  for (const auto& f : c.facts) {
    if (std::all_of(f.args.begin(), f.args.end(), [&](const auto& a) { return q.kind_of(a).has_value(); }))
      q.add_fact(f);
  }
  return q;
}

Construction renamed(Rng& rng, const Construction& c) {
  std::map<std::string, std::string> to;
  std::set<std::string> taken;
  for (const auto& [n, k] : c.objects) {
    std::string m;
    do m = random_name(rng);
    while (taken.contains(m));
    taken.insert(m);
    to[n] = m;
  }
  Construction r;
  for (const auto& [n, k] : c.objects) r.declare(to[n], k);
  for (const auto& f : c.facts) {
    Fact g{f.predicate, {}};
    for (const auto& a : f.args) g.args.push_back(to[a]);
    r.add_fact(g);
  }
  return r;
}

std::vector<Fact> shuffled_facts(Rng& rng, const Construction& c) {
  std::vector<Fact> v(c.facts.begin(), c.facts.end());
  std::shuffle(v.begin(), v.end(), rng);
  return v;
}

Fact scrambled(Rng& rng, const Fact& f) {
  const auto group = geosearch::symmetry_group(f.predicate);
  const auto& perm = group[uniform(rng, 0, group.size() - 1)];
  Fact g{f.predicate, {}};
  for (std::size_t i = 0; i < f.args.size(); ++i) g.args.push_back(f.args[perm[i]]);
  return g;
}

}  // namespace gen
