// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <numbers>

namespace tablepref {

// Degree-argument sine/cosine. Reduction to [-45, 45] around a multiple of 90
// keeps symmetric angles exact: sin_deg(350) == -sin_deg(10), cos_deg(90) == 0.

inline double sin_deg(double degrees) {
    double r = std::fmod(degrees, 360.0);
    if (r < 0.0) {
        r += 360.0;
    }
    const double q = std::round(r / 90.0);
    const double t = (r - 90.0 * q) * (std::numbers::pi / 180.0);
    switch (static_cast<int>(q) % 4) {
        case 0: return std::sin(t);
        case 1: return std::cos(t);
        case 2: return -std::sin(t);
        default: return -std::cos(t);
    }
}

inline double cos_deg(double degrees) {
    double r = std::fmod(degrees, 360.0);
    if (r < 0.0) {
        r += 360.0;
    }
    const double q = std::round(r / 90.0);
    const double t = (r - 90.0 * q) * (std::numbers::pi / 180.0);
    switch (static_cast<int>(q) % 4) {
        case 0: return std::cos(t);
        case 1: return -std::sin(t);
        case 2: return -std::cos(t);
        default: return std::sin(t);
    }
}

/// Smallest absolute angular difference in degrees, in [0, 180].
inline double circular_distance_deg(double a, double b) {
    double d = std::fmod(std::fabs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

}  // namespace tablepref
