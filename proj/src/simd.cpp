#include "kdvcrit/simd.hpp"

#include <algorithm>
#include <atomic>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define KDV_X86 1
#elif defined(__aarch64__)
#include <arm_neon.h>
#define KDV_NEON 1
#endif

namespace kdv::simd {

namespace {
std::atomic<bool> g_force_scalar{false};

// Row range where every diagonal stays inside [0, n).
void safe_range(const Band& A, int& lo, int& hi) {
  lo = 0;
  hi = A.n;
  for (int o : A.offsets) {
    lo = std::max(lo, -o);
    hi = std::min(hi, A.n - o);
  }
  if (hi < lo) hi = lo;
}

void matvec_rows(const Band& A, const double* x, double* y, int r0, int r1) {
  for (int i = r0; i < r1; ++i) {
    double s = 0.0;
    for (size_t d = 0; d < A.offsets.size(); ++d) {
      const int j = i + A.offsets[d];
      if (j >= 0 && j < A.n) s += A.diags[d][i] * x[j];
    }
    y[i] = s;
  }
}
}  // namespace

void force_scalar(bool on) { g_force_scalar = on; }

namespace scalar {
void band_matvec(const Band& A, const double* x, double* y) { matvec_rows(A, x, y, 0, A.n); }
double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}
void axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}
}  // namespace scalar

#ifdef KDV_X86
bool avx2_available() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
}

namespace avx2 {
__attribute__((target("avx2,fma"))) void band_matvec(const Band& A, const double* x, double* y) {
  int lo, hi;
  safe_range(A, lo, hi);
  matvec_rows(A, x, y, 0, lo);
  int i = lo;
  for (; i + 4 <= hi; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (size_t d = 0; d < A.offsets.size(); ++d) {
      const __m256d a = _mm256_loadu_pd(A.diags[d].data() + i);
      const __m256d v = _mm256_loadu_pd(x + i + A.offsets[d]);
      acc = _mm256_fmadd_pd(a, v, acc);
    }
    _mm256_storeu_pd(y + i, acc);
  }
  matvec_rows(A, x, y, i, A.n);
}

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  alignas(32) double t[4];
  _mm256_store_pd(t, acc);
  double s = (t[0] + t[1]) + (t[2] + t[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) void axpy(double a, const double* x, double* y, int n) {
  const __m256d va = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}
}  // namespace avx2

#else
bool avx2_available() { return false; }
namespace avx2 {
void band_matvec(const Band& A, const double* x, double* y) { scalar::band_matvec(A, x, y); }
double dot(const double* a, const double* b, int n) { return scalar::dot(a, b, n); }
void axpy(double a, const double* x, double* y, int n) { scalar::axpy(a, x, y, n); }
}  // namespace avx2
#endif

#ifdef KDV_NEON
namespace neon {
void band_matvec(const Band& A, const double* x, double* y) {
  int lo, hi;
  safe_range(A, lo, hi);
  matvec_rows(A, x, y, 0, lo);
  int i = lo;
  for (; i + 2 <= hi; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (size_t d = 0; d < A.offsets.size(); ++d)
      acc = vfmaq_f64(acc, vld1q_f64(A.diags[d].data() + i), vld1q_f64(x + i + A.offsets[d]));
    vst1q_f64(y + i, acc);
  }
  matvec_rows(A, x, y, i, A.n);
}
double dot(const double* a, const double* b, int n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}
void axpy(double a, const double* x, double* y, int n) {
  int i = 0;
  const float64x2_t va = vdupq_n_f64(a);
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}
}  // namespace neon
#endif

std::string active_isa() {
  if (g_force_scalar) return "scalar";
#ifdef KDV_NEON
  return "neon";
#else
  return avx2_available() ? "avx2" : "scalar";
#endif
}

void band_matvec(const Band& A, const double* x, double* y) {
  if (g_force_scalar) return scalar::band_matvec(A, x, y);
#ifdef KDV_NEON
  return neon::band_matvec(A, x, y);
#else
  if (avx2_available()) return avx2::band_matvec(A, x, y);
  scalar::band_matvec(A, x, y);
#endif
}

double dot(const double* a, const double* b, int n) {
  if (g_force_scalar) return scalar::dot(a, b, n);
#ifdef KDV_NEON
  return neon::dot(a, b, n);
#else
  if (avx2_available()) return avx2::dot(a, b, n);
  return scalar::dot(a, b, n);
#endif
}

void axpy(double a, const double* x, double* y, int n) {
  if (g_force_scalar) return scalar::axpy(a, x, y, n);
#ifdef KDV_NEON
  return neon::axpy(a, x, y, n);
#else
  if (avx2_available()) return avx2::axpy(a, x, y, n);
  scalar::axpy(a, x, y, n);
#endif
}

}  // namespace kdv::simd
