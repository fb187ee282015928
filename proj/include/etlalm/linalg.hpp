#pragma once

#include <cstdint>

#include "etlalm/types.hpp"

namespace etlalm {

/// Square matrix with entry(i,j) == entry(j,i) exactly; construction checks it.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t n) : m_(n, n) {}
  explicit SymmetricMatrix(Mat m);

  std::size_t size() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  /// Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double v);
  const Mat& dense() const { return m_; }

  /// out = M v
  void apply(std::span<const double> v, std::span<double> out) const;
  /// Block action on a stacked n x m iterate: (M ⊗ I_m) X.
  Mat apply(const Mat& x) const;
  /// Σ over columns of x_cᵀ M x_c.
  double quadratic_form(const Mat& x) const;

  static SymmetricMatrix identity(std::size_t n);
  static SymmetricMatrix diagonal(std::span<const double> d);

  friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

 private:
  Mat m_;
};

struct EigenDecomposition {
  Vec values;    // ascending
  Mat vectors;   // column k is the eigenvector of values[k]
  std::size_t sweeps = 0;
};

struct EigenOptions {
  double tol = 1e-10;
  std::size_t max_iter = 20000;
  std::uint64_t seed = 0x5eed;
  /// Dense fallback is only attempted up to this order.
  std::size_t dense_limit = 512;
};

/// Cyclic Jacobi rotations; eigenvalues ascending.
EigenDecomposition symmetric_eigen(const SymmetricMatrix& m, std::size_t max_sweeps = 100);

/// Largest eigenvalue. Power iteration on a shifted copy, dense Jacobi when it stalls.
double max_eigenvalue(const SymmetricMatrix& m, const EigenOptions& opts = {});
double max_eigenvalue(const SymmetricMatrix& m, double tol);

/// Smallest eigenvalue, via the largest eigenvalue of cI - M with c = λmax + 1.
double min_eigenvalue(const SymmetricMatrix& m, const EigenOptions& opts = {});
double min_eigenvalue(const SymmetricMatrix& m, double tol);

}  // namespace etlalm
