// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

// Independent reference computations used to freeze expected values. Nothing
// here calls into the library code it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tablepref/scene.hpp"

namespace tablepref::oracle {

struct P2 {
    double x = 0.0;
    double y = 0.0;
};

/// Minimum over rotation angle of the paired RMSD, with the optimal
/// translation for each angle (centroid alignment). A full-circle scan at
/// 1e-4 rad is followed by two finer scans around the best angle so that
/// exact fits resolve to ~1e-10 rad.
inline double angle_scan_rmsd(const std::vector<P2>& gt, const std::vector<P2>& pred) {
    const std::size_t n = gt.size();
    P2 cg, cp;
    for (std::size_t i = 0; i < n; ++i) {
        cg.x += gt[i].x / n;
        cg.y += gt[i].y / n;
        cp.x += pred[i].x / n;
        cp.y += pred[i].y / n;
    }
    auto msd = [&](double th) {
        const double c = std::cos(th), s = std::sin(th);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double px = pred[i].x - cp.x, py = pred[i].y - cp.y;
            const double dx = gt[i].x - cg.x - (c * px - s * py);
            const double dy = gt[i].y - cg.y - (s * px + c * py);
            sum += dx * dx + dy * dy;
        }
        return sum / n;
    };
    auto scan = [&](double lo, double hi, double step) {
        double best_th = lo, best = msd(lo);
        for (double th = lo; th <= hi; th += step) {
            const double v = msd(th);
            if (v < best) {
                best = v;
                best_th = th;
            }
        }
        return best_th;
    };
    double th = scan(0.0, 2.0 * std::numbers::pi, 1e-4);
    th = scan(th - 2e-4, th + 2e-4, 1e-7);
    th = scan(th - 2e-7, th + 2e-7, 1e-10);
    return std::sqrt(std::max(0.0, msd(th)));
}

/// Field-by-field recount of the five categorical features.
inline int hamming_recount(const ObjectSpec& a, const ObjectSpec& b) {
    int d = 0;
    if (to_string(a.cls) != to_string(b.cls)) ++d;
    if (to_string(a.color1) != to_string(b.color1)) ++d;
    if (to_string(a.color2) != to_string(b.color2)) ++d;
    if (to_string(a.material1) != to_string(b.material1)) ++d;
    if (to_string(a.material2) != to_string(b.material2)) ++d;
    return d;
}

/// Hand-specified greedy trace: walk ground truth in order; each takes the
/// unclaimed prediction at minimal distance, earliest on ties.
inline std::vector<std::pair<std::size_t, std::size_t>> greedy_trace(const std::vector<std::vector<int>>& dist,
                                                                     std::size_t n_pred) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::vector<char> taken(n_pred, 0);
    for (std::size_t g = 0; g < dist.size(); ++g) {
        int best_d = 1 << 30;
        std::size_t best = n_pred;
        for (std::size_t p = 0; p < n_pred; ++p) {
            if (taken[p]) continue;
            if (dist[g][p] < best_d) {
                best_d = dist[g][p];
                best = p;
            }
        }
        if (best == n_pred) break;
        taken[best] = 1;
        out.emplace_back(g, best);
    }
    return out;
}

/// Minimum total distance over all injective assignments of the smaller side.
inline int brute_force_min_cost(const std::vector<std::vector<int>>& dist, std::size_t n_pred) {
    const std::size_t n_gt = dist.size();
    std::vector<std::size_t> idx(std::max(n_gt, n_pred));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    int best = 1 << 30;
    do {
        int cost = 0;
        for (std::size_t g = 0; g < std::min(n_gt, n_pred); ++g) {
            if (n_gt <= n_pred) cost += dist[g][idx[g]];
            else cost += dist[idx[g]][g];
        }
        best = std::min(best, cost);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return best;
}

/// Spearman correlation as Pearson correlation of average ranks, ranked with a
/// quadratic count (ties get the mean of the positions they share).
inline double spearman_quadratic(const std::vector<double>& a, const std::vector<double>& b) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            double less = 0, equal = 0;
            for (double w : v) {
                less += w < v[i];
                equal += w == v[i];
            }
            r[i] = less + (equal + 1.0) / 2.0;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i] / n;
        mb += rb[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Cumulative (accepting, total) counts per threshold.
struct Tier {
    int accept = 0;
    int total = 0;
};

/// Smallest cumulative counts whose ratios round to `targets` at 3 decimals,
/// found by exhaustive search. Each tier may only add records to the last.
inline std::vector<Tier> search_tiers(const std::vector<double>& targets) {
    std::vector<Tier> out;
    Tier prev;
    for (double target : targets) {
        const long want = std::lround(target * 1000.0);
        bool found = false;
        for (int n = std::max(prev.total, 1); n < 100000 && !found; ++n) {
            for (int a = prev.accept; a <= prev.accept + (n - prev.total) && a <= n; ++a) {
                if (std::lround(1000.0 * a / n) == want) {
                    out.push_back({a, n});
                    prev = {a, n};
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            return {};
        }
    }
    return out;
}

/// Rating pair in slider units (0..100) with its jitter distance.
struct SliderRecord {
    int b_initial = 0;
    int b_jitter = 0;
    double rmsd = 0.0;
};

/// Counts with integer slider arithmetic: accepted iff the drop is under 20 points.
inline Tier count_acceptance(const std::vector<SliderRecord>& records, double tau) {
    Tier t;
    for (const SliderRecord& r : records) {
        if (r.rmsd <= tau) {
            ++t.total;
            t.accept += (r.b_initial - r.b_jitter) < 20 ? 1 : 0;
        }
    }
    return t;
}

}  // namespace tablepref::oracle
