#pragma once

#include <cstdint>
#include <vector>

#include "kdvcrit/common.hpp"

namespace kdv {

struct CriticalPair {
  int k = 1;
  int l = 1;
  std::int64_t N = 3;
  double L = 2.0 * pi;
  double p = 0.0;
  bool caseE0 = true;  // 3 | 2k+l
};

struct LengthClass {
  std::int64_t N = 0;
  std::vector<CriticalPair> pairs;
  int nL = 0;
  int nLpos = 0;
  int dimMN = 0;
  std::vector<double> p_sorted;  // strictly decreasing, positive
  double L = 0.0;
};

// Throws DomainError unless k >= l >= 1.
CriticalPair make_pair(int k, int l);

// p = (2k+l)(k-l)(2l+k) / (3 sqrt(3) N^{3/2})
double p_formula(int k, int l);
// Same frequency through (2 pi / 3L)^3 (2k+l)(k-l)(k+2l).
double p_rearranged(int k, int l);

std::vector<CriticalPair> enumerate_pairs(int kmax);
LengthClass representations(std::int64_t N);
double t_star(const LengthClass& c);
std::vector<LengthClass> excluded_lengths();
// Every class with at least one pair l <= k <= kmax, completed to all its
// representations.
std::vector<LengthClass> length_classes(int kmax);

}  // namespace kdv
