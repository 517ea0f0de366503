// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tablepref/acceptability.hpp"

namespace tablepref::testing {

/// Slider records realizing the cumulative tiers: tier k adds records with
/// jitter distance in (tau[k-1], tau[k]] (the upper end included), the given
/// number of them accepting. Records beyond the last threshold are added too.
inline std::vector<oracle::SliderRecord> planted_sliders(const std::vector<double>& taus,
                                                         const std::vector<oracle::Tier>& tiers,
                                                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> accept_drop(-30, 19);
    std::uniform_int_distribution<int> reject_drop(20, 70);
    std::vector<oracle::SliderRecord> out;
    oracle::Tier prev;
    double lo = 0.0;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const int added = tiers[k].total - prev.total;
        const int accepting = tiers[k].accept - prev.accept;
        for (int i = 0; i < added; ++i) {
            // Last record of a tier sits exactly on the threshold.
            const double rmsd = i + 1 == added ? taus[k] : lo + (taus[k] - lo) * (i + 1) / (added + 1);
            const int drop = i < accepting ? (i == 0 ? 19 : accept_drop(rng)) : (i == accepting ? 20 : reject_drop(rng));
            const int b0 = std::clamp(60 + drop / 2, std::max(0, drop), std::min(100, 100 + drop));
            out.push_back({b0, b0 - drop, rmsd});
        }
        prev = tiers[k];
        lo = taus[k];
    }
    for (int i = 0; i < 30; ++i) {
        out.push_back({50, 50 - (i % 3) * 15, lo + 0.01 * (i + 1)});
    }
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

inline std::vector<RatingRecord> to_ratings(const std::vector<oracle::SliderRecord>& sliders) {
    std::vector<RatingRecord> out;
    for (std::size_t i = 0; i < sliders.size(); ++i) {
        RatingRecord r;
        r.session = "s" + std::to_string(i / 5);
        r.trial = static_cast<int>(i % 5) + 1;
        r.b_initial = sliders[i].b_initial / 100.0;
        r.b_jitter = sliders[i].b_jitter / 100.0;
        r.rmsd_jitter = sliders[i].rmsd;
        r.t_jitter = std::min(1.0, sliders[i].rmsd * 4.0);
        out.push_back(r);
    }
    return out;
}

}  // namespace tablepref::testing
