#include "rham/kernels.hpp"

namespace rham::kernels {
namespace {

void diff1_scalar(const double* pad, double* out, std::size_t n, double inv_2h) {
  for (std::size_t i = 0; i < n; ++i) out[i] = (pad[i + 2] - pad[i]) * inv_2h;
}

void diff2_scalar(const double* pad, double* out, std::size_t n, double inv_h2) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = ((pad[i + 2] - 2.0 * pad[i + 1]) + pad[i]) * inv_h2;
}

void weighted_stencil_scalar(const double* w, const double* a, const double* c,
                             const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * (a[i] + c[i] * b[i]);
}

void weighted_product_scalar(const double* w, const double* a, const double* b,
                             double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = w[i] * (a[i] * b[i]);
}

void product_scalar(const double* a, const double* b, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpy_scalar(const double* a, double s, const double* b, double* out,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s * b[i];
}

void rk4_combine_scalar(const double* y, const double* k1, const double* k2,
                        const double* k3, const double* k4, double s,
                        double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = y[i] + s * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{
      "scalar",
      diff1_scalar,
      diff2_scalar,
      weighted_stencil_scalar,
      weighted_product_scalar,
      product_scalar,
      axpy_scalar,
      rk4_combine_scalar,
  };
  return ops;
}

}  // namespace rham::kernels
