#pragma once

#include <cstddef>

// Data-parallel inner loops used by the grid operators and the time stepper.
// Every kernel has a scalar reference implementation and, on x86-64 with AVX2,
// a vectorized variant selected once at startup.  The two variants evaluate
// each element with the same operation order and without FMA contraction, so
// their results are bit-identical; the equivalence suite asserts this.
namespace rham::kernels {

struct Ops {
  const char* name;

  // pad has n+2 entries (one ghost on each side, filled by the caller).
  // out[i] = (pad[i+2] - pad[i]) * inv_2h
  void (*diff1)(const double* pad, double* out, std::size_t n, double inv_2h);
  // out[i] = ((pad[i+2] - 2*pad[i+1]) + pad[i]) * inv_h2
  void (*diff2)(const double* pad, double* out, std::size_t n, double inv_h2);

  // out[i] = w[i] * (a[i] + c[i] * b[i])
  void (*weighted_stencil)(const double* w, const double* a, const double* c,
                           const double* b, double* out, std::size_t n);
  // out[i] = w[i] * (a[i] * b[i])
  void (*weighted_product)(const double* w, const double* a, const double* b,
                           double* out, std::size_t n);
  // out[i] = a[i] * b[i]
  void (*product)(const double* a, const double* b, double* out, std::size_t n);
  // out[i] = a[i] + s * b[i]
  void (*axpy)(const double* a, double s, const double* b, double* out,
               std::size_t n);
  // out[i] = y[i] + s * ((k1[i] + k4[i]) + 2*(k2[i] + k3[i]))
  void (*rk4_combine)(const double* y, const double* k1, const double* k2,
                      const double* k3, const double* k4, double s, double* out,
                      std::size_t n);
};

const Ops& scalar_ops();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const Ops* avx2_ops();

// Runtime selection: AVX2 when available, unless RHAM_KERNELS=scalar is set.
const Ops& active_ops();

}  // namespace rham::kernels
