// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/catalog.hpp"
#include "tablepref/error.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

enum class Layout { Standard, Mirrored, Abstract };

inline constexpr std::array<Layout, 3> kAllLayouts = {Layout::Standard, Layout::Mirrored, Layout::Abstract};
inline constexpr std::array<Color, 3> kPreferenceColors = {Color::Red, Color::Blue, Color::Yellow};
inline constexpr std::array<ObjectClass, 5> kPlacementOrder = {ObjectClass::Plate, ObjectClass::Fork,
                                                               ObjectClass::Knife, ObjectClass::Spoon,
                                                               ObjectClass::Cup};
inline constexpr int kDefaultContextLength = 4;
inline constexpr std::uint64_t kDefaultSeed = 7;

std::string_view to_string(Layout l);
/// Throws ConfigError.
Layout parse_layout(std::string_view s);

struct NoiseProfile {
    std::string name;
    double sigma_pos = 0.0;  // normalized table units
    double sigma_rot = 0.0;  // degrees

    bool operator==(const NoiseProfile&) const = default;
};

/// "none" (0, 0) and "moderate" (0.02, 5 degrees).
const std::vector<NoiseProfile>& noise_profiles();

struct TemplateSlot {
    ObjectClass cls = ObjectClass::Plate;
    double x = 0.0;
    double y = 0.0;
    double rotation = 0.0;

    bool operator==(const TemplateSlot&) const = default;
};

/// Nominal class positions in placement order.
std::vector<TemplateSlot> layout_template(Layout layout);
/// Left-right reflection: x -> 1 - x, rotation r -> (360 - r) mod 360.
std::vector<TemplateSlot> mirror(const std::vector<TemplateSlot>& slots);

struct SimPreferenceSpec {
    Layout layout = Layout::Standard;
    Color color = Color::Red;
    std::string table;
    NoiseProfile noise;
    std::uint64_t seed = 0;

    bool operator==(const SimPreferenceSpec&) const = default;
};

/// Template perturbed by clamped Gaussian noise, with objects drawn uniformly
/// among (class, color1 = preference). Throws GenerationError when a class has
/// no instance of the preferred colour.
Arrangement sample_arrangement(const SimPreferenceSpec& spec, const Catalog& catalog, std::mt19937_64& rng);
/// Same, with a generator seeded from spec.seed.
Arrangement sample_arrangement(const SimPreferenceSpec& spec, const Catalog& catalog);

enum class Split { Reconstruction, Generalization };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct ExperimentCase {
    std::string id;
    Split split = Split::Reconstruction;
    std::string context_table;
    std::optional<SimPreferenceSpec> spec;  // simulated cases only
    std::vector<Arrangement> context;
    Arrangement ground_truth;       // on the target table

    std::string target_table() const { return ground_truth.table; }
    PreferenceContext preference_context() const;
    /// Empty target table.
    Arrangement initial() const { return Arrangement{ground_truth.table, {}}; }

    bool operator==(const ExperimentCase&) const = default;
};

struct Benchmark {
    std::uint64_t seed = kDefaultSeed;
    int context_length = kDefaultContextLength;
    std::vector<std::string> tables;
    std::vector<ExperimentCase> cases;
};

/// 3 layouts x 3 colours x 2 noise profiles on the first two catalog tables:
/// 36 preferences, each with a reconstruction and a generalization case.
Benchmark generate_benchmark(const Catalog& catalog, int context_length = kDefaultContextLength,
                             std::uint64_t seed = kDefaultSeed);

/// Writes manifest.json and cases/<id>/{case.json, context_<k>.json, ground_truth.json}.
/// `catalog_ref` is recorded in the manifest so later stages can find the catalog.
void write_benchmark(const Benchmark& bench, const std::string& dir, const std::string& catalog_ref);

nlohmann::ordered_json case_to_json(const ExperimentCase& c);
/// Writes case.json, context_<k>.json and ground_truth.json into `case_dir`.
void write_case(const ExperimentCase& c, const std::string& case_dir);
/// Reads a case directory written by write_benchmark. Throws LoadError/DecodeError.
ExperimentCase load_case(const std::string& case_dir);

struct BenchmarkManifest {
    std::string dir;
    std::string catalog_ref;  // as recorded
    std::vector<std::string> case_dirs;
    nlohmann::json raw;

    /// catalog_ref resolved against the manifest directory.
    std::string catalog_path() const;
};

/// Accepts the benchmark directory or its manifest.json.
BenchmarkManifest load_manifest(const std::string& path);

}  // namespace tablepref
