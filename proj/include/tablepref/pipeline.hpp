// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/evaluation.hpp"
#include "tablepref/lifting.hpp"
#include "tablepref/method.hpp"
#include "tablepref/model_client.hpp"
#include "tablepref/prediction.hpp"
#include "tablepref/simulation.hpp"

namespace tablepref {

struct PredictOptions {
    Method method = Method::MOGMA;
    std::optional<GridSpec> grid;
    int samples = kDefaultSamples;

    /// Throws ConfigError when a grid method lacks a grid or samples < 1.
    void validate() const;
};

struct Prediction {
    std::string case_id;
    TaskPlan plan;
    UsageRecord usage;

    /// {case, method, provider, arrangement, support, usage}
    nlohmann::json to_json() const;
};

/// One prompt, one batch of samples, one aggregated plan. Throws ProviderError
/// when every sample failed at the transport level and AggregationError when
/// none of the returned texts parse.
Prediction predict(ModelClient& client, const PreferenceContext& context, const Arrangement& initial,
                   const Catalog& catalog, const PredictOptions& opts);

Prediction predict_case(ModelClient& client, const ExperimentCase& c, const Catalog& catalog,
                        const PredictOptions& opts);

/// Reads a prediction file or a bare arrangement file.
Arrangement load_predicted_arrangement(const std::string& path);

struct BatchFailure {
    std::string case_id;
    std::string code;
    std::string message;
};

struct BatchSummary {
    std::size_t predicted = 0;
    std::vector<BatchFailure> failures;
    UsageRecord usage;
    nlohmann::json to_json() const;
};

/// Predicts every case of a manifest into `<out_dir>/<case_id>.json` with
/// `jobs` worker threads. Failed cases are collected, not thrown.
BatchSummary predict_batch(ModelClient& client, const BenchmarkManifest& manifest, const Catalog& catalog,
                           const PredictOptions& opts, const std::string& out_dir, int jobs);

struct EvalRow {
    std::string case_id;
    std::string split;
    std::string method;
    std::optional<EvalReport> report;  // empty when the prediction is missing
    std::string error;
};

struct EvalBatch {
    std::vector<EvalRow> rows;

    /// One line per case: case, split, method, accuracy, all_correct, rmsd, error.
    std::string cases_csv() const;
    /// Mean rmsd and accuracy per (method, split), plus an "all" split.
    std::string summary_csv() const;
    nlohmann::json to_json() const;
};

/// Evaluates `<pred_dir>/<case_id>.json` against each case's ground truth.
EvalBatch eval_batch(const BenchmarkManifest& manifest, const Catalog& catalog,
                     const std::vector<std::string>& pred_dirs, int jobs = 1);

enum class MockMode { Truth, Shift, SwapColor };

MockMode parse_mock_mode(std::string_view s);

/// Shift applied by MockMode::Shift.
inline constexpr double kMockShiftX = 0.05;
inline constexpr double kMockShiftY = -0.05;

/// Response text listing `a` in the step schema of `method`.
std::string response_text(const Arrangement& a, const Catalog& catalog, Method method,
                          const std::optional<GridSpec>& grid);

/// The object `case_index % T` replaced by the nearest same-class object with a
/// different colour pair (smallest Hamming distance, then smallest id).
Arrangement swap_one_color(const Arrangement& a, const Catalog& catalog, std::size_t case_index);

/// Mock script keyed by prompt-bundle hash, one response per case.
nlohmann::json make_mock_script(const BenchmarkManifest& manifest, const Catalog& catalog,
                                const PredictOptions& opts, MockMode mode);

}  // namespace tablepref
