#pragma once

#include "pac/model.hpp"
#include "pac/types.hpp"

#include <cstdint>

namespace pac {

/// Number of closed communicating classes of the support graph of P.
/// A unique stationary distribution exists iff this is exactly 1.
int count_closed_classes(const Matrix& P);

/// Stationary row vector of a row-stochastic P, solved as the dense linear
/// system (P^T - I) b = 0 augmented with the normalization row.
///
/// Throws NonUnichainError if the chain has more than one closed
/// communicating class, std::invalid_argument if P is not row-stochastic.
/// Residual contract: ||bP - b||_inf <= 1e-10 and sum(b) = 1.
RowVector stationary_direct(const Matrix& P);

/// Power iteration from the uniform distribution with Cesaro averaging over
/// doubling windows (plain full-orbit averaging carries an O(1/T) transient
/// bias; window restarts keep the periodic-chain behaviour while converging
/// geometrically). Stops when successive Cesaro window averages differ by
/// less than tol in max-norm, or earlier at a fixed point of the iteration.
RowVector stationary_power(const Matrix& P, double tol = 1e-12, std::uint64_t max_iter = 100000);

/// Stationary distribution of the composite chain as the Kronecker product
/// of the per-subsystem stationary distributions.
RowVector stationary_factored(const CompositeSystem& sys, const FactoredPolicy& p);

}  // namespace pac
