#pragma once

// Reference implementations used only by the tests. They are written
// straight from the definitions, without sharing code with the library.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ims/core.hpp"

namespace ims::reference {

inline bool up(const InteractionMap& j, int a, int b) { return j(a, b) > a; }
inline bool down(const InteractionMap& j, int a, int b) { return j(a, b) < a; }

/// The four order conditions, looping over every pair of pairs.
inline bool map_attractive(const InteractionMap& j) {
  const int s = j.types();
  for (int a1 = 0; a1 < s; ++a1)
    for (int b1 = 0; b1 < s; ++b1)
      for (int a2 = a1; a2 < s; ++a2)
        for (int b2 = b1; b2 < s; ++b2) {
          const int j1 = j(a1, b1), j2 = j(a2, b2);
          const bool u1 = up(j, a1, b1), u2 = up(j, a2, b2);
          const bool d1 = down(j, a1, b1), d2 = down(j, a2, b2);
          if (u1 && u2 && j1 > j2) return false;
          if (d1 && d2 && j1 > j2) return false;
          if (u1 && !u2 && j1 > a2) return false;
          if (!d1 && d2 && a1 > j2) return false;
        }
  return true;
}

/// Order preservation under every single graphical event: site x holds
/// a1 <= a2, its neighbor holds b1 <= b2, and an up (or down) arrow with mark
/// u arrives. Rates at null pairs never matter. Marks are tried on each side
/// of every rate threshold, which covers every distinct outcome.
inline bool events_preserve_order(const InteractionMap& j, const RateTable& r) {
  const int s = j.types();
  for (int a1 = 0; a1 < s; ++a1)
    for (int b1 = 0; b1 < s; ++b1)
      for (int a2 = a1; a2 < s; ++a2)
        for (int b2 = b1; b2 < s; ++b2) {
          const double l1 = r(a1, b1), l2 = r(a2, b2);
          const double marks[] = {std::min(l1, l2) / 2, l1, l2, (l1 + l2) / 2, std::max(l1, l2) * 2 + 1};
          for (double u : marks) {
            if (!(u > 0)) continue;
            for (int dir = 0; dir < 2; ++dir) {
              auto step = [&](int a, int b, double l) {
                const bool fires = u < l;
                if (dir == 0 && up(j, a, b) && fires) return j(a, b);
                if (dir == 1 && down(j, a, b) && fires) return j(a, b);
                return a;
              };
              if (step(a1, b1, l1) > step(a2, b2, l2)) return false;
            }
          }
        }
  return true;
}

/// All maps on {0..n} in lexicographic table order; `visit` returns false to stop.
template <class F>
void for_each_map(int n, F&& visit) {
  const int s = n + 1;
  std::vector<ParticleType> t(static_cast<std::size_t>(s * s), 0);
  for (;;) {
    if (!visit(InteractionMap(n, t))) return;
    std::size_t i = 0;
    while (i < t.size() && t[i] == n) t[i++] = 0;
    if (i == t.size()) return;
    ++t[i];
  }
}

inline InteractionMap random_map(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> d(0, n);
  std::vector<ParticleType> t(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (auto& v : t) v = static_cast<ParticleType>(d(rng));
  return InteractionMap(n, std::move(t));
}

inline RateTable random_rates(int n, std::mt19937_64& rng, const std::vector<double>& values) {
  std::uniform_int_distribution<std::size_t> d(0, values.size() - 1);
  std::vector<double> t(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (auto& v : t) v = values[d(rng)];
  return RateTable(n, std::move(t));
}

}  // namespace ims::reference
