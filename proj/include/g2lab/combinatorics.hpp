#pragma once
#include <array>
#include <cstdint>
#include <vector>

namespace g2lab {

// Strictly increasing multi-index of length k over {0..6}.
struct MultiIndex {
  int k = 0;
  std::array<int, 7> i{};
  unsigned mask() const {
    unsigned m = 0;
    for (int a = 0; a < k; ++a) m |= 1u << i[a];
    return m;
  }
};

const std::vector<MultiIndex>& combinations(int k);

// Position of an increasing multi-index within combinations(k).
int combination_rank(const MultiIndex& mi);
int combination_rank_mask(unsigned mask);

long binomial(int n, int k);

int permutation_sign(const int* p, int n);

// All permutations of {0..k-1} with their signs.
struct SignedPerm {
  std::array<int, 7> p{};
  int sign = 1;
};
const std::vector<SignedPerm>& permutations(int k);

// Sign of the permutation sorting the concatenation (I, J) of two disjoint
// increasing multi-indices.
int merge_sign(const MultiIndex& a, const MultiIndex& b);

}  // namespace g2lab
