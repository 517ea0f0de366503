// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace tablepref {

enum class ObjectClass { Cup, Fork, Knife, Plate, Spoon };

enum class Color {
    Beige, Black, Blue, Brown, Gold, Gray, Green, Pink, Purple, Red, Silver, White, Yellow
};

enum class Material { Ceramic, Glass, Metal, Plastic, Wood };

inline constexpr std::array<ObjectClass, 5> kAllClasses = {
    ObjectClass::Cup, ObjectClass::Fork, ObjectClass::Knife, ObjectClass::Plate, ObjectClass::Spoon};

std::string_view to_string(ObjectClass c);
std::string_view to_string(Color c);
std::string_view to_string(Material m);

// Parsers throw DecodeError on unknown tokens. Matching is case-insensitive.
ObjectClass parse_class(std::string_view s);
Color parse_color(std::string_view s);
Material parse_material(std::string_view s);
std::optional<ObjectClass> try_parse_class(std::string_view s);

/// One catalog utensil. Single-color (or single-material) objects repeat the
/// value in the second slot.
struct ObjectSpec {
    int id = 0;
    ObjectClass cls = ObjectClass::Plate;
    Color color1 = Color::White;
    Color color2 = Color::White;
    Material material1 = Material::Ceramic;
    Material material2 = Material::Ceramic;
    std::string shape;
    std::string pattern;
    std::string texture;
    std::string sprite;  // path relative to the catalog root

    bool operator==(const ObjectSpec&) const = default;
};

/// Object placed on a table. x, y are normalized image coordinates with the
/// origin at the top-left; rotation is degrees clockwise from image north.
struct Placement {
    int object = 0;
    double x = 0.0;
    double y = 0.0;
    double rotation = 0.0;

    bool operator==(const Placement&) const = default;
};

/// Placement order is the vector order.
struct Arrangement {
    std::string table;
    std::vector<Placement> placements;

    std::size_t length() const noexcept { return placements.size(); }
    bool operator==(const Arrangement&) const = default;
};

struct PreferenceEntry {
    Arrangement arrangement;
    std::string order_description;

    bool operator==(const PreferenceEntry&) const = default;
};

/// A single person's arrangement history.
struct PreferenceContext {
    std::string owner;
    std::vector<PreferenceEntry> entries;

    bool operator==(const PreferenceContext&) const = default;
};

inline constexpr std::size_t kStudyMinimumObjects = 3;

/// Maps any finite angle into [0, 360). Throws DecodeError for non-finite input.
double normalize_rotation(double degrees);

bool placement_in_bounds(const Placement& p) noexcept;

/// True iff the arrangement holds at least three placements and every
/// placement is in bounds with a normalized rotation.
bool arrangement_valid_for_study(const Arrangement& a) noexcept;

// JSON forms. Arrangement files are {table, placements:[{object,x,y,rotation}]}.
void to_json(nlohmann::json& j, const Placement& p);
void from_json(const nlohmann::json& j, Placement& p);
void to_json(nlohmann::json& j, const Arrangement& a);
void from_json(const nlohmann::json& j, Arrangement& a);
void to_json(nlohmann::json& j, const PreferenceContext& k);
void from_json(const nlohmann::json& j, PreferenceContext& k);

/// Catalog manifest record with the feature field names plus "id" and "sprite".
nlohmann::ordered_json object_features_json(const ObjectSpec& o);
nlohmann::ordered_json object_to_json(const ObjectSpec& o);
ObjectSpec object_from_json(const nlohmann::json& j);

Arrangement load_arrangement(const std::string& path);
void save_arrangement(const Arrangement& a, const std::string& path);

}  // namespace tablepref
