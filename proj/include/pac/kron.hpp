#pragma once

#include "pac/types.hpp"

#include <stdexcept>

namespace pac {

/// Kronecker product A (x) B: the (m*p)-by-(n*q) block matrix [a_ij * B].
///
/// Dense only; compositions past `cap` rows or columns are refused since the
/// intended regime is a product of small subsystem spaces.
template <typename DerivedA, typename DerivedB>
MatX<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b,
                                     Index cap = kDefaultCompositeCap) {
  const Index m = a.rows(), n = a.cols(), p = b.rows(), q = b.cols();
  if (m * p > cap || n * q > cap) throw std::length_error("composition too large");
  MatX<typename DerivedA::Scalar> out(m * p, n * q);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) out.block(i * p, j * q, p, q) = a(i, j) * b.derived();
  return out;
}

}  // namespace pac
