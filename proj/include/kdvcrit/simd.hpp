#pragma once

#include <string>
#include <vector>

namespace kdv::simd {

// Diagonal storage: y[i] = sum_d diags[d][i] * x[i + offsets[d]], out-of-range entries zero.
struct Band {
  int n = 0;
  std::vector<int> offsets;
  std::vector<std::vector<double>> diags;
};

// Runtime dispatch; force_scalar pins the reference path (used by equivalence tests).
void force_scalar(bool on);
std::string active_isa();

void band_matvec(const Band& A, const double* x, double* y);
double dot(const double* a, const double* b, int n);
// y += a x
void axpy(double a, const double* x, double* y, int n);

namespace scalar {
void band_matvec(const Band& A, const double* x, double* y);
double dot(const double* a, const double* b, int n);
void axpy(double a, const double* x, double* y, int n);
}  // namespace scalar

bool avx2_available();
namespace avx2 {
void band_matvec(const Band& A, const double* x, double* y);
double dot(const double* a, const double* b, int n);
void axpy(double a, const double* x, double* y, int n);
}  // namespace avx2

}  // namespace kdv::simd
