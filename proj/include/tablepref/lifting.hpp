// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/catalog.hpp"
#include "tablepref/image.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

/// Labeled grid over the unit square. Columns are letters (A = left), rows are
/// numbers (1 = top); a cell id is column letter + row number, e.g. "C4".
struct GridSpec {
    int cols = 10;
    int rows = 10;

    /// Parses "CxR". Throws ConfigError.
    static GridSpec parse(std::string_view text);
    void validate() const;
    std::string to_string() const;
    std::string cell_id(int col, int row) const;
    std::size_t cell_count() const noexcept { return static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows); }

    bool operator==(const GridSpec&) const = default;
};

struct CellIndex {
    int col = 0;
    int row = 0;
    bool operator==(const CellIndex&) const = default;
};

/// Throws DecodeError for malformed or out-of-range ids.
CellIndex parse_cell(std::string_view cell, const GridSpec& g);
std::pair<double, double> cell_centroid(std::string_view cell, const GridSpec& g);
/// Cell holding a normalized point; points on the far edge fall in the last cell.
std::string cell_containing(double x, double y, const GridSpec& g);

struct Mark {
    std::string id;
    double px = 0.0;
    double py = 0.0;

    bool operator==(const Mark&) const = default;
};

/// Rendered prompt image with its set-of-mark annotations.
struct LiftedImage {
    Image pixels;
    std::vector<Mark> annotations;
    nlohmann::json provenance;
    /// One byte per pixel, non-zero where overlay strokes or labels were drawn.
    std::vector<std::uint8_t> overlay_mask;

    /// {marks:[{id, px, py}]}
    nlohmann::json annotations_json() const;
};

/// Longest sprite side as a fraction of table width, per class.
struct RenderConfig {
    std::array<double, 5> class_fraction = {0.10, 0.16, 0.16, 0.22, 0.16};  // cup fork knife plate spoon

    double fraction(ObjectClass c) const noexcept { return class_fraction[static_cast<std::size_t>(c)]; }
};

inline constexpr std::string_view kMarkStyle =
    "black Hershey-simplex digits on an opaque yellow box at the cell's top-left corner";
inline constexpr std::string_view kGridStyle =
    "2px opaque black grid lines; black labels on white boxes at each cell's top-left corner";

/// Feature dictionaries keyed by object id, in catalog order.
std::string objects_as_language(const Catalog& catalog);

/// One sheet per class present in the catalog, in class order; each object is
/// marked with its catalog id.
std::vector<LiftedImage> render_object_sheets(const Catalog& catalog);

LiftedImage render_unmarked(const Arrangement& a, const Catalog& catalog, const RenderConfig& cfg = {});
LiftedImage render_grid_marked(const Arrangement& a, const Catalog& catalog, const GridSpec& g,
                               const RenderConfig& cfg = {});

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Convex footprint of the placed sprite's opaque pixels in normalized table
/// coordinates. `aspect` is table height / width.
std::vector<Point2> sprite_footprint(const Placement& p, const Catalog& catalog, const RenderConfig& cfg = {},
                                     double aspect = 1.0);

/// Cells whose area overlaps the placed sprite's footprint, in row-major grid
/// order. Always includes the cell containing (p.x, p.y).
std::vector<std::string> cells_intersected(const Placement& p, const Catalog& catalog, const GridSpec& g,
                                           const RenderConfig& cfg = {}, double aspect = 1.0);

enum class Cardinal { N, NE, E, SE, S, SW, W, NW };

std::string_view to_string(Cardinal d);
/// Throws DecodeError for unknown tokens.
Cardinal parse_cardinal(std::string_view token);
double cardinal_to_degrees(Cardinal d);
/// Nearest direction; exact midpoints go to the smaller clockwise angle.
Cardinal degrees_to_cardinal(double degrees);

}  // namespace tablepref
