#include "g2lab/combinatorics.hpp"

#include <algorithm>
#include <numeric>

namespace g2lab {

namespace {

std::vector<MultiIndex> build_combinations(int k) {
  std::vector<MultiIndex> out;
  for (unsigned m = 0; m < 128u; ++m) {
    if (__builtin_popcount(m) != k) continue;
    MultiIndex mi;
    mi.k = k;
    int a = 0;
    for (int b = 0; b < 7; ++b)
      if (m & (1u << b)) mi.i[a++] = b;
    out.push_back(mi);
  }
  std::sort(out.begin(), out.end(), [](const MultiIndex& x, const MultiIndex& y) {
    return std::lexicographical_compare(x.i.begin(), x.i.begin() + x.k, y.i.begin(), y.i.begin() + y.k);
  });
  return out;
}

struct Tables {
  std::array<std::vector<MultiIndex>, 8> combos;
  std::array<int, 128> rank_by_mask{};
  std::array<std::vector<SignedPerm>, 8> perms;
  Tables() {
    for (int k = 0; k <= 7; ++k) {
      combos[k] = build_combinations(k);
      for (std::size_t r = 0; r < combos[k].size(); ++r) rank_by_mask[combos[k][r].mask()] = int(r);
      std::array<int, 7> p{};
      std::iota(p.begin(), p.begin() + k, 0);
      do {
        SignedPerm sp;
        sp.p = p;
        sp.sign = permutation_sign(p.data(), k);
        perms[k].push_back(sp);
      } while (std::next_permutation(p.begin(), p.begin() + k));
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace

int permutation_sign(const int* p, int n) {
  int s = 1;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (p[a] > p[b]) s = -s;
  return s;
}

const std::vector<MultiIndex>& combinations(int k) { return tables().combos.at(k); }

int combination_rank(const MultiIndex& mi) { return tables().rank_by_mask[mi.mask()]; }
int combination_rank_mask(unsigned mask) { return tables().rank_by_mask[mask]; }

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int a = 1; a <= k; ++a) r = r * (n - k + a) / a;
  return r;
}

const std::vector<SignedPerm>& permutations(int k) { return tables().perms.at(k); }

int merge_sign(const MultiIndex& a, const MultiIndex& b) {
  int inv = 0;
  for (int x = 0; x < a.k; ++x)
    for (int y = 0; y < b.k; ++y)
      if (a.i[x] > b.i[y]) ++inv;
  return (inv % 2) ? -1 : 1;
}

}  // namespace g2lab
