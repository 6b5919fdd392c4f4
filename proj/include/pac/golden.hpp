#pragma once

#include <array>

// Reference values for the built-in two-subsystem example, embedded so the
// --golden comparison needs nothing but the binary. Policies are numbered
// 1..16 in canonical enumeration order. The published source prints two to
// four decimals; tolerances used against these values account for that.
namespace pac::golden {

// Long-run average costs per policy.
inline constexpr std::array<double, 16> kAvgCostSub1 = {
    2.5602, 2.6712, 2.6390, 2.7255, 2.0249, 2.1127, 2.0872, 2.1556,
    1.8029, 1.8811, 1.8584, 1.9193, 1.6317, 1.7025, 1.6820, 1.7371};

inline constexpr std::array<double, 16> kAvgCostSub2 = {
    2.2511, 1.8617, 1.7921, 1.5235, 2.3194, 1.9182, 1.8464, 1.5697,
    2.3102, 1.9106, 1.8391, 1.5634, 2.3383, 1.9338, 1.8615, 1.5825};

inline constexpr std::array<double, 16> kAvgCostSystem = {
    2.7557, 2.4427, 2.4607, 2.2307, 2.3801, 2.1328, 2.1522, 1.9695,
    2.3178, 2.0876, 2.1108, 1.9398, 2.1821, 1.9746, 1.9977, 1.8431};

inline constexpr double kTableTolerance = 5e-3;

// Intermediates of policy 1.
inline constexpr std::array<double, 4> kP1Row1 = {0.35, 0.35, 0.15, 0.15};
inline constexpr std::array<double, 4> kBeta1 = {0.2707, 0.3008, 0.2030, 0.2256};
inline constexpr std::array<double, 4> kStageCostSub1 = {2.9945, 3.1562, 1.8170, 1.9154};

// Transition-cost matrices of policy 1 as published (row-major 4x4). The
// subsystem-2 and system matrices are known to be partly inconsistent with
// the tables above; see the README on reference-data discrepancies.
inline constexpr std::array<double, 16> kCostSub1 = {
    2.85, 2.80, 3.42, 3.36, 2.95, 3.00, 3.54, 3.60,
    2.44, 2.40, 1.43, 1.40, 2.53, 2.57, 1.48, 1.50};

inline constexpr std::array<double, 16> kCostSub2 = {
    2.45, 2.87, 2.43, 2.83, 1.56, 1.23, 1.55, 1.21,
    2.69, 3.13, 2.66, 3.10, 1.71, 1.34, 1.69, 1.33};

inline constexpr std::array<double, 16> kCostSystem = {
    3.19, 3.44, 3.48, 3.78, 2.48, 2.12, 2.64, 2.24,
    1.92, 2.01, 2.02, 2.12, 1.64, 1.47, 1.71, 1.53};

}  // namespace pac::golden
