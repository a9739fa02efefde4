#include "qtopo/forms.hpp"

#include <vector>

#include "qtopo/mesh.hpp"

namespace qtopo {

namespace {

struct WedgeEntry {
  int a, b, out;
  double sign;
};

// tables[n][ka][kb]
struct WedgeTables {
  std::array<std::array<std::array<std::vector<WedgeEntry>, 4>, 4>, 4> entries;

  WedgeTables() {
    for (int n = 0; n <= 3; ++n)
      for (int ka = 0; ka <= n; ++ka)
        for (int kb = 0; ka + kb <= n; ++kb) {
          const auto& sa = local_subsets(n, ka);
          const auto& sb = local_subsets(n, kb);
          const auto& so = local_subsets(n, ka + kb);
          auto mask = [](const std::array<int, 4>& s, int size) {
            int m = 0;
            for (int i = 0; i < size; ++i) m |= 1 << s[i];
            return m;
          };
          for (std::size_t i = 0; i < sa.size(); ++i)
            for (std::size_t j = 0; j < sb.size(); ++j) {
              const int ma = mask(sa[i], ka), mb = mask(sb[j], kb);
              if (ma & mb) continue;
              int inversions = 0;
              for (int x = 0; x < ka; ++x)
                for (int y = 0; y < kb; ++y)
                  if (sa[i][x] > sb[j][y]) ++inversions;
              int out = -1;
              for (std::size_t o = 0; o < so.size(); ++o)
                if (mask(so[o], ka + kb) == (ma | mb)) out = static_cast<int>(o);
              entries[n][ka][kb].push_back({static_cast<int>(i), static_cast<int>(j), out, (inversions % 2) ? -1.0 : 1.0});
            }
        }
  }
};

const WedgeTables& wedge_tables() {
  static const WedgeTables tables;
  return tables;
}

}  // namespace

int component_count(int n, int k) {
  static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  if (n < 0 || n > 3 || k < 0 || k > n) return 0;
  return binom[n][k];
}

FrameForm wedge(const FrameForm& a, const FrameForm& b) {
  if (a.n != b.n) throw Error("wedge of forms on different frames");
  if (a.k + b.k > a.n) throw Error("wedge degree exceeds frame dimension");
  FrameForm out;
  out.n = a.n;
  out.k = a.k + b.k;
  for (const WedgeEntry& e : wedge_tables().entries[a.n][a.k][b.k]) out.c[e.out] += e.sign * a.c[e.a] * b.c[e.b];
  return out;
}

FrameForm FormField::components(const Vec& x, std::span<const Vec> frame) const {
  FrameForm out;
  out.n = static_cast<int>(frame.size());
  out.k = degree();
  const auto& subsets = local_subsets(out.n, out.k);
  std::array<Vec, 4> picked{};
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (int i = 0; i < out.k; ++i) picked[i] = frame[subsets[s][i]];
    out.c[s] = evaluate(x, std::span<const Vec>(picked.data(), out.k));
  }
  return out;
}

}  // namespace qtopo
