// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tablepref/catalog.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

/// Number of differing fields among class, color1, color2, material1, material2.
int hamming(const ObjectSpec& a, const ObjectSpec& b) noexcept;

struct MatchPair {
    std::size_t gt = 0;
    std::size_t pred = 0;
    int distance = 0;

    bool operator==(const MatchPair&) const = default;
};

/// Injective pairing of ground-truth and predicted placements; holds
/// min(|gt|, |pred|) pairs in ground-truth order.
struct MatchResult {
    std::vector<MatchPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
};

enum class MatchStrategy {
    Greedy,   // gt objects in placement order each claim the nearest unclaimed prediction
    Optimal,  // minimum total Hamming distance (sensitivity analysis only)
};

/// Throws DecodeError when an object id is not in the catalog.
MatchResult match(const Arrangement& gt, const Arrangement& pred, const Catalog& catalog,
                  MatchStrategy strategy = MatchStrategy::Greedy);

/// Proper rigid registration mapping predicted points onto ground truth:
/// gt ≈ rotation * (pred - translation).
struct Registration {
    Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
    Eigen::Vector2d translation = Eigen::Vector2d::Zero();
    double rmsd = 0.0;

    /// Rotation angle in degrees, (-180, 180], clockwise in image coordinates.
    double angle_degrees() const;
};

/// Kabsch registration of index-paired point sets. Reflections are excluded.
/// Throws RegistrationError for empty or mismatched inputs.
Registration kabsch(std::span<const Eigen::Vector2d> gt, std::span<const Eigen::Vector2d> pred);

struct EvalReport {
    double accuracy = 0.0;
    bool all_correct = false;
    std::optional<double> rmsd;  // empty when nothing matched
    std::optional<Registration> registration;
    MatchResult matching;
    std::size_t unmatched_gt = 0;
    std::size_t unmatched_pred = 0;
    /// Mean circular rotation error over matched pairs, degrees.
    std::optional<double> rotation_error;
};

EvalReport evaluate(const Arrangement& gt, const Arrangement& pred, const Catalog& catalog,
                    MatchStrategy strategy = MatchStrategy::Greedy);

/// Root-mean-square displacement over matched pairs without registration.
/// Used for rating analyses, where rigid motion itself is the error studied.
std::optional<double> displacement_rmsd(const Arrangement& reference, const Arrangement& moved,
                                        const Catalog& catalog);

void to_json(nlohmann::json& j, const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

}  // namespace tablepref
