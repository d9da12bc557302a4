#include "kdvcrit/number_theory.hpp"

#include <algorithm>
#include <map>

namespace kdv {

double p_formula(int k, int l) {
  const double N = double(k) * k + double(k) * l + double(l) * l;
  return double(2 * k + l) * double(k - l) * double(2 * l + k) /
         (3.0 * std::sqrt(3.0) * N * std::sqrt(N));
}

double p_rearranged(int k, int l) {
  const double N = double(k) * k + double(k) * l + double(l) * l;
  const double L = 2.0 * pi * std::sqrt(N / 3.0);
  const double r = 2.0 * pi / (3.0 * L);
  return r * r * r * double(2 * k + l) * double(k - l) * double(k + 2 * l);
}

CriticalPair make_pair(int k, int l) {
  if (l < 1 || k < l) throw DomainError("pair requires k >= l >= 1");
  CriticalPair c;
  c.k = k;
  c.l = l;
  c.N = std::int64_t(k) * k + std::int64_t(k) * l + std::int64_t(l) * l;
  c.L = 2.0 * pi * std::sqrt(double(c.N) / 3.0);
  c.p = (k == l) ? 0.0 : p_formula(k, l);
  c.caseE0 = (2 * k + l) % 3 == 0;
  return c;
}

std::vector<CriticalPair> enumerate_pairs(int kmax) {
  if (kmax < 1) throw DomainError("k_max must be >= 1");
  std::vector<CriticalPair> out;
  for (int k = 1; k <= kmax; ++k)
    for (int l = 1; l <= k; ++l) out.push_back(make_pair(k, l));
  std::sort(out.begin(), out.end(), [](const CriticalPair& a, const CriticalPair& b) {
    return a.N != b.N ? a.N < b.N : a.k < b.k;
  });
  return out;
}

LengthClass representations(std::int64_t N) {
  if (N < 3) throw NotCritical("N has no representation k^2+kl+l^2");
  LengthClass c;
  c.N = N;
  const auto kmax = std::int64_t(std::ceil(std::sqrt(double(N)))) + 1;
  for (std::int64_t k = 1; k <= kmax; ++k) {
    // l <= k, and k^2+kl+l^2 is increasing in l
    for (std::int64_t l = 1; l <= k; ++l) {
      const auto v = k * k + k * l + l * l;
      if (v > N) break;
      if (v == N) c.pairs.push_back(make_pair(int(k), int(l)));
    }
  }
  if (c.pairs.empty()) throw NotCritical("N has no representation k^2+kl+l^2");
  c.nL = int(c.pairs.size());
  for (const auto& pr : c.pairs)
    if (pr.p > 0.0) {
      ++c.nLpos;
      c.p_sorted.push_back(pr.p);
    }
  std::sort(c.p_sorted.begin(), c.p_sorted.end(), std::greater<>());
  c.dimMN = c.nL + c.nLpos;
  c.L = c.pairs.front().L;
  return c;
}

double t_star(const LengthClass& c) {
  if (c.nLpos == 0) throw NoPositiveFrequency("class has no pair with p > 0");
  double s = 0.0;
  for (int m = 1; m <= c.nLpos; ++m) s += double(c.nLpos + 1 - m) / c.p_sorted[m - 1];
  return pi * s;
}

std::vector<LengthClass> excluded_lengths() { return {representations(7), representations(13)}; }

std::vector<LengthClass> length_classes(int kmax) {
  std::map<std::int64_t, int> seen;
  for (const auto& pr : enumerate_pairs(kmax)) seen[pr.N] = 1;
  std::vector<LengthClass> out;
  for (const auto& [N, _] : seen) out.push_back(representations(N));
  return out;
}

}  // namespace kdv
