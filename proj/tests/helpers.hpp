#pragma once

#include <random>

#include "hardstop/geometry.hpp"

namespace testutil {

using hardstop::Mat3;
using hardstop::Vec2;

/// Independent oracle for the tilt rotation: truncated power series of the
/// matrix exponential of the skew matrix, summed to machine precision.
inline Mat3 matrix_exp_oracle(Vec2 tilt) {
    Mat3 k;  // skew matrix of (tilt_x, tilt_y, 0)
    k.a = {0, 0, tilt.y, 0, 0, -tilt.x, -tilt.y, tilt.x, 0};
    Mat3 result = Mat3::identity();
    Mat3 term = Mat3::identity();
    for (int n = 1; n <= 40; ++n) {
        Mat3 next = term * k;
        for (auto& v : next.a) v /= double(n);
        term = next;
        for (int i = 0; i < 9; ++i) result.a[i] += term.a[i];
    }
    return result;
}

/// Reference geometry used throughout the tests: the optimized contact pair
/// dimensions from the demo design (values also shipped in configs/).
inline hardstop::TorusCapProfile demo_stage() {
    return {11.4, 4.0, 10.18, hardstop::deg_to_rad(-0.2), 29.1};
}

inline hardstop::TorusCapProfile demo_ground() {
    return {11.4, 4.0, 12.129, hardstop::deg_to_rad(-9.0)};
}

inline hardstop::HardStopPair demo_pair() {
    return {demo_stage(), demo_ground(), 0.6645, 2.0, 9.0};
}

inline std::mt19937_64 rng(std::uint64_t seed = 20240817ull) { return std::mt19937_64(seed); }

}  // namespace testutil
