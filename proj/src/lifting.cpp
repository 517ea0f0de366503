// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/lifting.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "tablepref/angles.hpp"
#include "tablepref/error.hpp"

namespace tablepref {

GridSpec GridSpec::parse(std::string_view text) {
    const auto sep = text.find_first_of("xX");
    GridSpec g;
    auto num = [&](std::string_view s, int& out) {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        return ec == std::errc() && ptr == s.data() + s.size();
    };
    if (sep == std::string_view::npos || !num(text.substr(0, sep), g.cols) || !num(text.substr(sep + 1), g.rows)) {
        throw ConfigError("grid must look like CxR, got '" + std::string(text) + "'");
    }
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (cols < 1 || cols > 26 || rows < 1 || rows > 99) {
        throw ConfigError("grid " + to_string() + " out of range (1..26 columns, 1..99 rows)");
    }
}

std::string GridSpec::to_string() const { return std::to_string(cols) + "x" + std::to_string(rows); }

std::string GridSpec::cell_id(int col, int row) const {
    return std::string(1, static_cast<char>('A' + col)) + std::to_string(row + 1);
}

CellIndex parse_cell(std::string_view cell, const GridSpec& g) {
    std::string_view s = cell;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.size() < 2 || !std::isalpha(static_cast<unsigned char>(s[0]))) {
        throw DecodeError("malformed cell id '" + std::string(cell) + "'");
    }
    const int col = std::toupper(static_cast<unsigned char>(s[0])) - 'A';
    int row1 = 0;
    const auto digits = s.substr(1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), row1);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        throw DecodeError("malformed cell id '" + std::string(cell) + "'");
    }
    if (col < 0 || col >= g.cols || row1 < 1 || row1 > g.rows) {
        throw DecodeError("cell id '" + std::string(cell) + "' outside " + g.to_string() + " grid");
    }
    return {col, row1 - 1};
}

std::pair<double, double> cell_centroid(std::string_view cell, const GridSpec& g) {
    const CellIndex c = parse_cell(cell, g);
    return {(c.col + 0.5) / g.cols, (c.row + 0.5) / g.rows};
}

namespace {

int cell_coord(double v, int n) {
    return std::clamp(static_cast<int>(std::floor(v * n)), 0, n - 1);
}

}  // namespace

std::string cell_containing(double x, double y, const GridSpec& g) {
    return g.cell_id(cell_coord(x, g.cols), cell_coord(y, g.rows));
}

nlohmann::json LiftedImage::annotations_json() const {
    nlohmann::json marks = nlohmann::json::array();
    for (const auto& m : annotations) {
        marks.push_back({{"id", m.id}, {"px", m.px}, {"py", m.py}});
    }
    return {{"marks", marks}};
}

std::string objects_as_language(const Catalog& catalog) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& o : catalog.objects()) {
        j[std::to_string(o.id)] = object_features_json(o);
    }
    return j.dump();
}

namespace {

const Image& require_sprite(const Catalog& catalog, int id) {
    if (catalog.find(id) == nullptr) {
        throw RenderError("unknown object id " + std::to_string(id));
    }
    const Image* s = catalog.sprite(id);
    if (s == nullptr || s->empty()) {
        throw RenderError("missing sprite for object id " + std::to_string(id));
    }
    return *s;
}

// Premultiplied bilinear sample at continuous sprite coordinates; pixel k
// covers [k, k+1). Outside samples are transparent.
std::array<double, 4> sample_premultiplied(const Image& img, double u, double v) {
    const double fx = u - 0.5;
    const double fy = v - 0.5;
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const double tx = fx - x0;
    const double ty = fy - y0;
    std::array<double, 4> acc{0, 0, 0, 0};
    for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
            const int x = x0 + dx;
            const int y = y0 + dy;
            if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) {
                continue;
            }
            const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty);
            const auto* p = img.pixel(x, y);
            const double a = p[3] / 255.0;
            acc[0] += w * p[0] * a;
            acc[1] += w * p[1] * a;
            acc[2] += w * p[2] * a;
            acc[3] += w * a;
        }
    }
    return acc;
}

// Pastes `sprite` scaled by `scale`, rotated clockwise by `rotation` degrees,
// with the sprite centre at pixel-space (cx, cy).
void paste_sprite(Image& dst, const Image& sprite, double cx, double cy, double scale, double rotation) {
    const double c = cos_deg(rotation);
    const double s = sin_deg(rotation);
    const double hw = sprite.width() / 2.0;
    const double hh = sprite.height() / 2.0;
    double minx = cx, maxx = cx, miny = cy, maxy = cy;
    for (double u : {-hw, hw}) {
        for (double v : {-hh, hh}) {
            const double x = cx + scale * (c * u - s * v);
            const double y = cy + scale * (s * u + c * v);
            minx = std::min(minx, x);
            maxx = std::max(maxx, x);
            miny = std::min(miny, y);
            maxy = std::max(maxy, y);
        }
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(minx)) - 1);
    const int x1 = std::min(dst.width() - 1, static_cast<int>(std::ceil(maxx)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(miny)) - 1);
    const int y1 = std::min(dst.height() - 1, static_cast<int>(std::ceil(maxy)) + 1);
    for (int py = y0; py <= y1; ++py) {
        for (int px = x0; px <= x1; ++px) {
            const double dx = (px + 0.5 - cx) / scale;
            const double dy = (py + 0.5 - cy) / scale;
            // inverse rotation
            const double u = hw + c * dx + s * dy;
            const double v = hh - s * dx + c * dy;
            const auto acc = sample_premultiplied(sprite, u, v);
            if (acc[3] <= 0.0) {
                continue;
            }
            Rgba px_color;
            for (int k = 0; k < 3; ++k) {
                px_color[static_cast<std::size_t>(k)] =
                    static_cast<std::uint8_t>(std::clamp(std::lround(acc[static_cast<std::size_t>(k)] / acc[3]), 0L, 255L));
            }
            px_color[3] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[3] * 255.0), 0L, 255L));
            blend_pixel(dst, px, py, px_color);
        }
    }
}

double sprite_scale(const Image& sprite, ObjectClass cls, int table_width, const RenderConfig& cfg) {
    return cfg.fraction(cls) * table_width / std::max(sprite.width(), sprite.height());
}

const Image& require_table(const Arrangement& a, const Catalog& catalog) {
    const Image* t = catalog.table_image(a.table);
    if (t == nullptr || t->empty()) {
        throw RenderError("missing table image for '" + a.table + "'");
    }
    return *t;
}

nlohmann::json placements_provenance(const Arrangement& a) {
    return nlohmann::json(a)["placements"];
}

void mark_box(Image& img, std::vector<std::uint8_t>* mask, int x0, int y0, int x1, int y1, Rgba fill) {
    fill_rect(img, x0, y0, x1, y1, fill);
    if (mask == nullptr) {
        return;
    }
    for (int y = std::max(0, y0); y < std::min(img.height(), y1); ++y) {
        for (int x = std::max(0, x0); x < std::min(img.width(), x1); ++x) {
            (*mask)[static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) + static_cast<std::size_t>(x)] = 1;
        }
    }
}

}  // namespace

std::vector<LiftedImage> render_object_sheets(const Catalog& catalog) {
    constexpr int kCell = 128;
    constexpr int kHeader = 40;
    constexpr int kFit = 100;
    std::vector<LiftedImage> sheets;
    for (ObjectClass cls : kAllClasses) {
        const auto members = catalog.of_class(cls);
        if (members.empty()) {
            continue;
        }
        const int n = static_cast<int>(members.size());
        const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        const int rows = (n + cols - 1) / cols;
        LiftedImage sheet;
        sheet.pixels = Image(cols * kCell, kHeader + rows * kCell, {255, 255, 255, 255});
        draw_text(sheet.pixels, std::string(to_string(cls)), 8, 28, 0.8, {0, 0, 0, 255}, 2);
        for (int k = 0; k < n; ++k) {
            const ObjectSpec& o = *members[static_cast<std::size_t>(k)];
            const Image& sprite = require_sprite(catalog, o.id);
            const int cx = (k % cols) * kCell;
            const int cy = kHeader + (k / cols) * kCell;
            const double scale = static_cast<double>(kFit) / std::max(sprite.width(), sprite.height());
            paste_sprite(sheet.pixels, sprite, cx + kCell / 2.0, cy + kCell / 2.0 + 6, scale, 0.0);
            const std::string label = std::to_string(o.id);
            const auto ext = text_extent(label, 0.5, 1);
            mark_box(sheet.pixels, nullptr, cx + 2, cy + 2, cx + ext[0] + 8, cy + ext[1] + ext[2] + 6,
                     {255, 230, 0, 255});
            draw_text(sheet.pixels, label, cx + 5, cy + 4 + ext[1], 0.5, {0, 0, 0, 255}, 1);
            sheet.annotations.push_back({label, cx + 2 + (ext[0] + 6) / 2.0, cy + 2 + (ext[1] + ext[2] + 4) / 2.0});
        }
        sheet.provenance = {{"lifting", "grid_of_marked_objects"},
                            {"class", std::string(to_string(cls))},
                            {"slots", n},
                            {"mark_style", std::string(kMarkStyle)}};
        sheets.push_back(std::move(sheet));
    }
    return sheets;
}

LiftedImage render_unmarked(const Arrangement& a, const Catalog& catalog, const RenderConfig& cfg) {
    LiftedImage out;
    out.pixels = require_table(a, catalog);
    const int w = out.pixels.width();
    const int h = out.pixels.height();
    for (const auto& p : a.placements) {
        const Image& sprite = require_sprite(catalog, p.object);
        const ObjectSpec& o = catalog.at(p.object);
        paste_sprite(out.pixels, sprite, p.x * w, p.y * h, sprite_scale(sprite, o.cls, w, cfg), p.rotation);
    }
    out.overlay_mask.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    out.provenance = {{"lifting", "unmarked_arrangement"}, {"table", a.table}, {"placements", placements_provenance(a)}};
    return out;
}

LiftedImage render_grid_marked(const Arrangement& a, const Catalog& catalog, const GridSpec& g,
                               const RenderConfig& cfg) {
    g.validate();
    LiftedImage out = render_unmarked(a, catalog, cfg);
    Image& img = out.pixels;
    const int w = img.width();
    const int h = img.height();
    auto* mask = &out.overlay_mask;
    const Rgba line{0, 0, 0, 255};
    for (int i = 0; i <= g.cols; ++i) {
        const int x = static_cast<int>(std::lround(static_cast<double>(i) * w / g.cols));
        mark_box(img, mask, x - 1, 0, x + 1, h, line);
    }
    for (int j = 0; j <= g.rows; ++j) {
        const int y = static_cast<int>(std::lround(static_cast<double>(j) * h / g.rows));
        mark_box(img, mask, 0, y - 1, w, y + 1, line);
    }
    const double pitch = std::min(static_cast<double>(w) / g.cols, static_cast<double>(h) / g.rows);
    const double text_scale = std::clamp(pitch / 140.0, 0.25, 0.6);
    for (int row = 0; row < g.rows; ++row) {
        for (int col = 0; col < g.cols; ++col) {
            const std::string id = g.cell_id(col, row);
            const int x0 = static_cast<int>(std::lround(static_cast<double>(col) * w / g.cols)) + 2;
            const int y0 = static_cast<int>(std::lround(static_cast<double>(row) * h / g.rows)) + 2;
            const auto ext = text_extent(id, text_scale, 1);
            mark_box(img, mask, x0, y0, x0 + ext[0] + 4, y0 + ext[1] + ext[2] + 3, {255, 255, 255, 255});
            draw_text(img, id, x0 + 2, y0 + 1 + ext[1], text_scale, {0, 0, 0, 255}, 1);
            out.annotations.push_back({id, (col + 0.5) * w / g.cols, (row + 0.5) * h / g.rows});
        }
    }
    out.provenance["lifting"] = "grid_marked_arrangement";
    out.provenance["grid"] = g.to_string();
    out.provenance["grid_style"] = std::string(kGridStyle);
    return out;
}

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
                  return a.x == b.x && a.y == b.y;
              }), pts.end());
    if (pts.size() < 3) {
        return pts;
    }
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Polygon and axis-aligned box overlap with positive area (separating axes).
bool overlaps_box(const std::vector<Point2>& poly, double x0, double y0, double x1, double y1) {
    constexpr double kEps = 1e-12;
    auto separated = [&](double ax, double ay) {
        double pmin = INFINITY, pmax = -INFINITY;
        for (const auto& p : poly) {
            const double d = p.x * ax + p.y * ay;
            pmin = std::min(pmin, d);
            pmax = std::max(pmax, d);
        }
        double bmin = INFINITY, bmax = -INFINITY;
        for (double x : {x0, x1}) {
            for (double y : {y0, y1}) {
                const double d = x * ax + y * ay;
                bmin = std::min(bmin, d);
                bmax = std::max(bmax, d);
            }
        }
        return pmax <= bmin + kEps || bmax <= pmin + kEps;
    };
    if (separated(1, 0) || separated(0, 1)) {
        return false;
    }
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const double ex = b.x - a.x;
        const double ey = b.y - a.y;
        const double len = std::hypot(ex, ey);
        if (len > 0 && separated(-ey / len, ex / len)) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::vector<Point2> sprite_footprint(const Placement& p, const Catalog& catalog, const RenderConfig& cfg,
                                     double aspect) {
    const Image& sprite = require_sprite(catalog, p.object);
    const ObjectSpec& o = catalog.at(p.object);
    // Work in units of table width; y is rescaled by aspect at the end.
    const double scale = cfg.fraction(o.cls) / std::max(sprite.width(), sprite.height());
    std::vector<Point2> corners;
    for (int y = 0; y < sprite.height(); ++y) {
        int left = -1, right = -1;
        for (int x = 0; x < sprite.width(); ++x) {
            if (sprite.pixel(x, y)[3] > 0) {
                if (left < 0) left = x;
                right = x;
            }
        }
        if (left < 0) {
            continue;
        }
        for (double yy : {static_cast<double>(y), y + 1.0}) {
            corners.push_back({static_cast<double>(left), yy});
            corners.push_back({right + 1.0, yy});
        }
    }
    const double c = cos_deg(p.rotation);
    const double s = sin_deg(p.rotation);
    const double hw = sprite.width() / 2.0;
    const double hh = sprite.height() / 2.0;
    std::vector<Point2> placed;
    placed.reserve(corners.size());
    for (const auto& q : convex_hull(std::move(corners))) {
        const double u = (q.x - hw) * scale;
        const double v = (q.y - hh) * scale;
        placed.push_back({p.x + (c * u - s * v), p.y + (s * u + c * v) / aspect});
    }
    return placed;
}

std::vector<std::string> cells_intersected(const Placement& p, const Catalog& catalog, const GridSpec& g,
                                           const RenderConfig& cfg, double aspect) {
    g.validate();
    const auto poly = sprite_footprint(p, catalog, cfg, aspect);
    const int home_col = cell_coord(p.x, g.cols);
    const int home_row = cell_coord(p.y, g.rows);
    std::vector<std::string> cells;
    for (int row = 0; row < g.rows; ++row) {
        for (int col = 0; col < g.cols; ++col) {
            const bool home = col == home_col && row == home_row;
            if (home || (poly.size() >= 3 &&
                         overlaps_box(poly, static_cast<double>(col) / g.cols, static_cast<double>(row) / g.rows,
                                      static_cast<double>(col + 1) / g.cols, static_cast<double>(row + 1) / g.rows))) {
                cells.push_back(g.cell_id(col, row));
            }
        }
    }
    return cells;
}

namespace {
constexpr std::array<std::string_view, 8> kCardinalNames = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
}

std::string_view to_string(Cardinal d) { return kCardinalNames[static_cast<std::size_t>(d)]; }

Cardinal parse_cardinal(std::string_view token) {
    std::string t;
    for (char ch : token) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        }
    }
    for (std::size_t i = 0; i < kCardinalNames.size(); ++i) {
        if (kCardinalNames[i] == t) {
            return static_cast<Cardinal>(i);
        }
    }
    throw DecodeError("unknown cardinal direction '" + std::string(token) + "'");
}

double cardinal_to_degrees(Cardinal d) { return 45.0 * static_cast<int>(d); }

Cardinal degrees_to_cardinal(double degrees) {
    const double r = normalize_rotation(degrees);
    const int idx = static_cast<int>(std::ceil((r - 22.5) / 45.0));
    return static_cast<Cardinal>(((idx % 8) + 8) % 8);
}

}  // namespace tablepref
