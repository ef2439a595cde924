#pragma once

#include <cstddef>

// Dense row-major kernels. Each output element is reduced in a fixed order
// that does not depend on its row position, so permuting input rows
// permutes output rows bit-exactly.
namespace tokengan::kernels {

// c[m x n] (+)= a[m x k] . b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);

// c[k x n] (+)= a[m x k]^T . b[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);

// out[cols x rows] = in[rows x cols]^T
void transpose(const double* in, double* out, std::size_t rows,
               std::size_t cols);

}  // namespace tokengan::kernels
