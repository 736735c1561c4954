#pragma once

// Shared deterministic randomness helpers for the property suites. Every test
// seeds its own engine so failures reproduce without reading other suites.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tores/index.hpp"

namespace tores::testing {

using Rng = std::mt19937_64;

inline int pick_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline bool pick_bool(Rng& rng, double p = 0.5) {
  return std::bernoulli_distribution(p)(rng);
}

// Random index context with the given number of variables u0, u1, ...
inline IndexCtx random_ictx(Rng& rng, int max_vars, const std::string& stem = "u") {
  IndexCtx d;
  int n = pick_int(rng, 0, max_vars);
  for (int i = 0; i < n; ++i) d.items.push_back({stem + std::to_string(i), Sort::Nat});
  return d;
}

inline IdxPtr random_idx(Rng& rng, const IndexCtx& d, int depth) {
  if (depth <= 0 || (d.empty() && pick_bool(rng, 0.6))) {
    if (!d.empty() && pick_bool(rng, 0.5))
      return idx_var(d.items[pick_int(rng, 0, (int)d.size() - 1)].name);
    return idx_zero();
  }
  switch (pick_int(rng, 0, 2)) {
    case 0: return idx_zero();
    case 1:
      if (!d.empty()) return idx_var(d.items[pick_int(rng, 0, (int)d.size() - 1)].name);
      [[fallthrough]];
    default: return idx_suc(random_idx(rng, d, depth - 1));
  }
}

inline IdxPtr random_ground_idx(Rng& rng, int max_sucs) {
  return idx_nat((unsigned)pick_int(rng, 0, max_sucs));
}

// Ground total substitution for d with entries suc^k(0), k <= max_sucs.
inline IndexSubst random_grounding(Rng& rng, const IndexCtx& d, int max_sucs) {
  IndexSubst th;
  for (const IdxBinding& b : d.items) th.entries.push_back({random_ground_idx(rng, max_sucs), b.name});
  return th;
}

// Substitution d2 |- th : d1 with random (possibly open) range terms.
inline IndexSubst random_subst(Rng& rng, const IndexCtx& domain, const IndexCtx& range, int depth) {
  IndexSubst th;
  for (const IdxBinding& b : domain.items) th.entries.push_back({random_idx(rng, range, depth), b.name});
  return th;
}

// All ground substitutions for d with every entry suc^k(0), k <= max_sucs.
inline std::vector<IndexSubst> enumerate_groundings(const IndexCtx& d, int max_sucs) {
  std::vector<IndexSubst> out;
  size_t n = d.items.size();
  std::vector<int> ks(n, 0);
  while (true) {
    IndexSubst th;
    for (size_t i = 0; i < n; ++i) th.entries.push_back({idx_nat((unsigned)ks[i]), d.items[i].name});
    out.push_back(std::move(th));
    size_t i = 0;
    for (; i < n; ++i) {
      if (++ks[i] <= max_sucs) break;
      ks[i] = 0;
    }
    if (i == n) break;
  }
  return out;
}

}  // namespace tores::testing
