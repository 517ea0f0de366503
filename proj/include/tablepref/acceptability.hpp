// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/error.hpp"
#include "tablepref/evaluation.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

struct JitterConfig {
    double max_shift = 0.25;     // translation norm at t = 1, normalized units
    double max_rotation = 45.0;  // degrees clockwise at t = 1
};

/// Rigid jitter: translation of norm t * max_shift in a seed-drawn direction
/// and clockwise rotation by t * max_rotation about the centroid; positions
/// are clamped to the table. t = 0 returns the input unchanged.
Arrangement jitter(const Arrangement& a, double t, std::uint64_t seed, const JitterConfig& cfg = {});

/// Jitter magnitude drawn uniformly from [0, 1] for a seed.
double draw_jitter_magnitude(std::uint64_t seed);

inline constexpr double kRatingDifferenceThreshold = 0.2;
inline const std::vector<double> kDefaultThresholds = {0.01, 0.05, 0.10};

struct RatingRecord {
    std::string session;
    int trial = 0;
    double b_initial = 0.0;
    double b_jitter = 0.0;
    std::optional<double> b_correct;
    double t_jitter = 0.0;
    double rmsd_jitter = 0.0;                 // displacement between initial and jittered scenes
    std::optional<double> rmsd_correct;       // displacement between initial and corrected scenes

    bool operator==(const RatingRecord&) const = default;
};

nlohmann::json to_json(const RatingRecord& r);
/// Fields: session, trial, b_initial, b_jitter, b_correct?, t_jitter,
/// rmsd_jitter, rmsd_correct?. Throws DecodeError on range violations.
RatingRecord rating_from_json(const nlohmann::json& j);
/// One record per non-blank line. Errors name the line number.
std::vector<RatingRecord> read_ratings_jsonl(const std::string& path);

struct AcceptanceRow {
    double threshold = 0.0;
    std::size_t people_accepting = 0;
    std::size_t people_total = 0;  // records with rmsd_jitter <= threshold
    std::optional<double> people;  // empty when people_total == 0
    std::size_t model_within = 0;
    std::size_t model_total = 0;
    std::optional<double> model;   // empty when there are no predictions
};

struct AcceptanceReport {
    double rating_threshold = kRatingDifferenceThreshold;
    std::vector<AcceptanceRow> rows;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// A record accepts when b_initial - b_jitter < 0.2 (with a 1e-9 guard so
/// slider values like 0.7 - 0.5 count as exactly 0.2). Predictions without an
/// rmsd count in the model denominator but never within a threshold.
AcceptanceReport subjective_acceptance(std::span<const RatingRecord> records, std::span<const double> thresholds,
                                       std::span<const std::optional<double>> prediction_rmsds);
AcceptanceReport subjective_acceptance(std::span<const RatingRecord> records, std::span<const double> thresholds,
                                       std::span<const EvalReport> predictions);

struct ObjectiveSummary {
    std::vector<std::pair<double, double>> scatter;  // (rmsd_correct, b_correct - b_initial)
    std::optional<double> spearman;
    std::string note;  // why the correlation is undefined

    nlohmann::json to_json() const;
    std::string scatter_csv() const;
};

/// Rank correlation (average ranks for ties). Empty for n < 3 or zero variance.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

ObjectiveSummary objective_acceptance(std::span<const RatingRecord> records);

}  // namespace tablepref
