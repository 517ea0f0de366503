// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/catalog.hpp"
#include "tablepref/error.hpp"
#include "tablepref/lifting.hpp"
#include "tablepref/method.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

struct ResponseParseError : DecodeError {
    explicit ResponseParseError(const std::string& message) : DecodeError(message) {}
};

using XY = std::array<double, 2>;

/// One step of a model response. Unmarked methods give [x, y] and degrees;
/// grid methods give cell ids and a cardinal direction.
struct RawStep {
    std::string type;
    int id = -1;
    std::variant<XY, std::vector<std::string>> position;
    std::variant<double, Cardinal> rotation;

    bool operator==(const RawStep&) const = default;
};

using Sample = std::vector<RawStep>;

/// Reads a Python-literal dict/list value. Accepts single, double, backtick
/// and typographic quotes, bare words and trailing commas. Throws
/// ResponseParseError.
nlohmann::json parse_python_literal(std::string_view text);

/// Extracts the first bracketed list of dicts in `text` and coerces each dict.
/// Surrounding prose is ignored. Throws ResponseParseError.
Sample parse_response(std::string_view text, Method method);

/// Modal response length; ties go to the smaller length. Throws
/// AggregationError when there are no samples.
std::size_t aggregate_plan_length(std::span<const Sample> samples);

/// Modal type among samples that reach step t; ties follow the class order
/// cup, fork, knife, plate, spoon, then other labels alphabetically.
/// Throws AggregationError when no sample reaches t.
std::string aggregate_step_type(std::span<const Sample> samples, std::size_t t);

/// Steps at index t whose type equals `type` (the voters for that step).
std::vector<const RawStep*> step_voters(std::span<const Sample> samples, std::size_t t, std::string_view type);

/// Modal id; ties go to the smaller id. Empty when there are no voters.
std::optional<int> aggregate_object_id(std::span<const RawStep* const> voters);

/// Mean of the voters' [x, y], clamped to the unit square. Voters must carry XY positions.
std::pair<double, double> aggregate_position_unmarked(std::span<const RawStep* const> voters);

/// Citation-count weighted mean of cited cell centroids, pooled over voters.
/// Empty when no cited cell decodes under `grid`.
std::optional<std::pair<double, double>> aggregate_position_grid(std::span<const RawStep* const> voters,
                                                                 const GridSpec& grid);

/// Unmarked: circular mean of degrees. Grid: modal cardinal (ties to the
/// smaller clockwise angle) in degrees.
double aggregate_rotation(std::span<const RawStep* const> voters, Method method);

struct PlanStep {
    Placement placement;
    std::string type;
    bool valid = true;
    std::string note;
    std::size_t reach = 0;       // samples that have this step
    std::size_t type_votes = 0;  // samples agreeing with the chosen type (the voters)
    std::size_t id_votes = 0;    // voters agreeing with the chosen id

    bool operator==(const PlanStep&) const = default;
};

struct TaskPlan {
    std::string table;
    Method method = Method::MOGMA;
    std::string provider;
    std::vector<PlanStep> steps;
    std::size_t samples_total = 0;
    std::size_t samples_parsed = 0;
    std::vector<std::string> sample_errors;  // one entry per dropped sample

    /// Valid steps as an arrangement, in plan order.
    Arrangement arrangement() const;
    /// Per-step support sidecar.
    nlohmann::json support_json() const;

    bool operator==(const TaskPlan&) const = default;
};

/// Aggregates already-parsed samples. `grid` is required for grid methods.
TaskPlan aggregate_plan(std::span<const Sample> samples, Method method, const Catalog& catalog,
                        const std::optional<GridSpec>& grid, std::string table);

/// Parses raw texts (unparsable ones are recorded and dropped) and aggregates.
/// Throws AggregationError when no text parses.
TaskPlan plan_from_responses(std::span<const std::string> texts, Method method, const Catalog& catalog,
                             const std::optional<GridSpec>& grid, std::string table);

}  // namespace tablepref
