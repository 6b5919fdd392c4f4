#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pac {

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVecX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatX<double>;
using Vector = VecX<double>;
using RowVector = RowVecX<double>;
using Index = Eigen::Index;

/// Per-subsystem state indices (0-based internally; all I/O is 1-based).
using StateTuple = std::vector<int>;
/// Per-subsystem action indices (0-based internally).
using JointAction = std::vector<int>;

enum class Norm { Euclidean, Max };

inline double norm_of(const Vector& v, Norm n) {
  return n == Norm::Euclidean ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

/// A stationary policy would not induce a unique stationary distribution.
struct NonUnichainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Policy-space enumeration refused because it exceeds the configured cap.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A componentwise optimum over a vector objective does not exist at some state.
struct NoComponentwiseOptimumError : std::runtime_error {
  Index state;
  NoComponentwiseOptimumError(std::string msg, Index state_)
      : std::runtime_error(std::move(msg)), state(state_) {}
};

inline constexpr Index kDefaultCompositeCap = 4096;
inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

}  // namespace pac
