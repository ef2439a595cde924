#include "kernels.hpp"

#include <algorithm>
#include <cstring>

namespace tokengan::kernels {

namespace {

// Four doubles; lowers to AVX registers when available and to SSE pairs
// otherwise. Wider 16-column tiles are used only with 32 vector registers.
using v4 = double __attribute__((vector_size(32)));

inline v4 load4(const double* p) {
  v4 v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline void store4(double* p, v4 v) { std::memcpy(p, &v, sizeof v); }

// Every element of c is reduced as c0 + t_0 + t_1 + ... in ascending
// order of the contracted index, whichever tile shape computes it.

// c[i0.., j0..j0+4V) for MR rows, V vectors per row.
template <std::size_t MR, std::size_t V>
inline void tile_nn(const double* __restrict a, const double* __restrict b,
                    double* __restrict c, std::size_t k, std::size_t n,
                    std::size_t i0, std::size_t j0, bool accumulate) {
  v4 acc[MR][V];
  for (std::size_t r = 0; r < MR; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      acc[r][v] = accumulate ? load4(c + (i0 + r) * n + j0 + 4 * v) : v4{};
    }
  }
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * n + j0;
    v4 bv[V];
    for (std::size_t v = 0; v < V; ++v) bv[v] = load4(brow + 4 * v);
    for (std::size_t r = 0; r < MR; ++r) {
      const double av = a[(i0 + r) * k + p];
      for (std::size_t v = 0; v < V; ++v) acc[r][v] += av * bv[v];
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      store4(c + (i0 + r) * n + j0 + 4 * v, acc[r][v]);
    }
  }
}

inline void column_nn(const double* __restrict a, const double* __restrict b,
                      double* __restrict c, std::size_t m, std::size_t k,
                      std::size_t n, std::size_t j, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double acc = accumulate ? c[i * n + j] : 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
    c[i * n + j] = acc;
  }
}

template <std::size_t V>
inline void strip_nn(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n,
                     std::size_t j0, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) tile_nn<4, V>(a, b, c, k, n, i, j0, accumulate);
  for (; i < m; ++i) tile_nn<1, V>(a, b, c, k, n, i, j0, accumulate);
}

// c[p0.., j0..] += sum over rows i in [i_begin, i_end) of a[i][p] b[i][j].
template <std::size_t MR, std::size_t V>
inline void tile_tn(const double* __restrict a, const double* __restrict b,
                    double* __restrict c, std::size_t i_begin,
                    std::size_t i_end, std::size_t k, std::size_t n,
                    std::size_t p0, std::size_t j0) {
  v4 acc[MR][V];
  for (std::size_t r = 0; r < MR; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      acc[r][v] = load4(c + (p0 + r) * n + j0 + 4 * v);
    }
  }
  for (std::size_t i = i_begin; i < i_end; ++i) {
    const double* brow = b + i * n + j0;
    const double* arow = a + i * k + p0;
    v4 bv[V];
    for (std::size_t v = 0; v < V; ++v) bv[v] = load4(brow + 4 * v);
    for (std::size_t r = 0; r < MR; ++r) {
      const double av = arow[r];
      for (std::size_t v = 0; v < V; ++v) acc[r][v] += av * bv[v];
    }
  }
  for (std::size_t r = 0; r < MR; ++r) {
    for (std::size_t v = 0; v < V; ++v) {
      store4(c + (p0 + r) * n + j0 + 4 * v, acc[r][v]);
    }
  }
}

inline void column_tn(const double* __restrict a, const double* __restrict b,
                      double* __restrict c, std::size_t i_begin,
                      std::size_t i_end, std::size_t k, std::size_t n,
                      std::size_t j) {
  for (std::size_t p = 0; p < k; ++p) {
    double acc = c[p * n + j];
    for (std::size_t i = i_begin; i < i_end; ++i) acc += a[i * k + p] * b[i * n + j];
    c[p * n + j] = acc;
  }
}

template <std::size_t V>
inline void strip_tn(const double* a, const double* b, double* c,
                     std::size_t i_begin, std::size_t i_end, std::size_t k,
                     std::size_t n, std::size_t j0) {
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) tile_tn<4, V>(a, b, c, i_begin, i_end, k, n, p, j0);
  for (; p < k; ++p) tile_tn<1, V>(a, b, c, i_begin, i_end, k, n, p, j0);
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  std::size_t j = 0;
#if defined(__AVX512F__)
  for (; j + 16 <= n; j += 16) strip_nn<4>(a, b, c, m, k, n, j, accumulate);
#endif
  for (; j + 8 <= n; j += 8) strip_nn<2>(a, b, c, m, k, n, j, accumulate);
  for (; j + 4 <= n; j += 4) strip_nn<1>(a, b, c, m, k, n, j, accumulate);
  for (; j < n; ++j) column_nn(a, b, c, m, k, n, j, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + k * n, 0.0);
  // Row chunks keep the slices of a and b cache resident; chunks run in
  // order so each element still sums in ascending i.
  constexpr std::size_t kChunk = 256;
  for (std::size_t i0 = 0; i0 < m; i0 += kChunk) {
    const std::size_t i1 = std::min(m, i0 + kChunk);
    std::size_t j = 0;
#if defined(__AVX512F__)
    for (; j + 16 <= n; j += 16) strip_tn<4>(a, b, c, i0, i1, k, n, j);
#endif
    for (; j + 8 <= n; j += 8) strip_tn<2>(a, b, c, i0, i1, k, n, j);
    for (; j + 4 <= n; j += 4) strip_tn<1>(a, b, c, i0, i1, k, n, j);
    for (; j < n; ++j) column_tn(a, b, c, i0, i1, k, n, j);
  }
}

void transpose(const double* in, double* out, std::size_t rows,
               std::size_t cols) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    const std::size_t r1 = std::min(rows, r0 + kBlock);
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      const std::size_t c1 = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t col = c0; col < c1; ++col) {
          out[col * rows + r] = in[r * cols + col];
        }
      }
    }
  }
}

}  // namespace tokengan::kernels
