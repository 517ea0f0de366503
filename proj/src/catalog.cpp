// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "tablepref/error.hpp"
#include "tablepref/io.hpp"

namespace fs = std::filesystem;

namespace tablepref {

void Catalog::add_object(ObjectSpec spec, std::shared_ptr<const Image> sprite) {
    if (spec.id < 0 || spec.id >= kMaxCatalogObjects) {
        throw LoadError("object id " + std::to_string(spec.id) + " outside [0," +
                        std::to_string(kMaxCatalogObjects) + ")");
    }
    if (index_.count(spec.id) != 0) {
        throw LoadError("duplicate object id " + std::to_string(spec.id));
    }
    index_[spec.id] = objects_.size();
    if (sprite) {
        sprites_[spec.id] = std::move(sprite);
    }
    objects_.push_back(std::move(spec));
}

void Catalog::add_table(TableSpec spec, std::shared_ptr<const Image> image) {
    if (find_table(spec.id) != nullptr) {
        throw LoadError("duplicate table id " + spec.id);
    }
    if (image) {
        table_images_[spec.id] = std::move(image);
    }
    tables_.push_back(std::move(spec));
}

const ObjectSpec* Catalog::find(int id) const noexcept {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &objects_[it->second];
}

const ObjectSpec& Catalog::at(int id) const {
    if (const auto* o = find(id)) {
        return *o;
    }
    throw DecodeError("unknown object id " + std::to_string(id));
}

std::vector<const ObjectSpec*> Catalog::of_class(ObjectClass cls) const {
    std::vector<const ObjectSpec*> out;
    for (const auto& o : objects_) {
        if (o.cls == cls) {
            out.push_back(&o);
        }
    }
    return out;
}

const Image* Catalog::sprite(int id) const noexcept {
    auto it = sprites_.find(id);
    return it == sprites_.end() ? nullptr : it->second.get();
}

const TableSpec* Catalog::find_table(std::string_view id) const noexcept {
    for (const auto& t : tables_) {
        if (t.id == id) {
            return &t;
        }
    }
    return nullptr;
}

const Image* Catalog::table_image(std::string_view id) const noexcept {
    auto it = table_images_.find(id);
    return it == table_images_.end() ? nullptr : it->second.get();
}

Catalog load_catalog(const std::string& path) {
    fs::path manifest(path);
    if (fs::is_directory(manifest)) {
        manifest /= "catalog.json";
    }
    const fs::path root = manifest.parent_path();
    const nlohmann::json records = read_json_file(manifest.string());
    if (!records.is_array()) {
        throw LoadError(manifest.string() + ": manifest must be a JSON array");
    }
    Catalog catalog;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const std::string where = manifest.string() + ": record " + std::to_string(i) +
                                  (r.is_object() && r.contains("id") ? " (id " + r["id"].dump() + ")" : "");
        ObjectSpec spec;
        try {
            spec = object_from_json(r);
        } catch (const DecodeError& e) {
            throw LoadError(where + ": " + e.what());
        }
        const fs::path sprite_path = root / spec.sprite;
        if (!fs::exists(sprite_path)) {
            throw LoadError(where + ": missing sprite " + sprite_path.string());
        }
        auto sprite = std::make_shared<const Image>(read_png(sprite_path.string()));
        try {
            catalog.add_object(std::move(spec), std::move(sprite));
        } catch (const LoadError& e) {
            throw LoadError(where + ": " + e.what());
        }
    }
    const fs::path tables = root / "tables.json";
    if (fs::exists(tables)) {
        const nlohmann::json list = read_json_file(tables.string());
        if (!list.is_array()) {
            throw LoadError(tables.string() + ": must be a JSON array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            TableSpec t;
            try {
                t.id = list[i].at("id").get<std::string>();
                t.image = list[i].at("image").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw LoadError(tables.string() + ": record " + std::to_string(i) + ": " + e.what());
            }
            const fs::path img = root / t.image;
            if (!fs::exists(img)) {
                throw LoadError(tables.string() + ": table " + t.id + ": missing image " + img.string());
            }
            catalog.add_table(std::move(t), std::make_shared<const Image>(read_png(img.string())));
        }
    }
    return catalog;
}

void write_catalog(const Catalog& catalog, const std::string& dir) {
    const fs::path root(dir);
    fs::create_directories(root);
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const auto& o : catalog.objects()) {
        records.push_back(object_to_json(o));
        if (const Image* s = catalog.sprite(o.id)) {
            write_png(*s, (root / o.sprite).string());
        }
    }
    write_json_file((root / "catalog.json").string(), records);
    nlohmann::ordered_json tables = nlohmann::ordered_json::array();
    for (const auto& t : catalog.tables()) {
        tables.push_back({{"id", t.id}, {"image", t.image}});
        if (const Image* img = catalog.table_image(t.id)) {
            write_png(*img, (root / t.image).string());
        }
    }
    write_json_file((root / "tables.json").string(), tables);
}

bool is_study_catalog(const Catalog& catalog) {
    return std::all_of(kAllClasses.begin(), kAllClasses.end(), [&](ObjectClass c) {
        return catalog.of_class(c).size() == static_cast<std::size_t>(kStudyInstancesPerClass);
    });
}

Rgba color_rgba(Color c) {
    switch (c) {
        case Color::Beige: return {222, 203, 164, 255};
        case Color::Black: return {25, 25, 25, 255};
        case Color::Blue: return {30, 80, 200, 255};
        case Color::Brown: return {120, 72, 36, 255};
        case Color::Gold: return {212, 175, 55, 255};
        case Color::Gray: return {128, 128, 128, 255};
        case Color::Green: return {40, 150, 60, 255};
        case Color::Pink: return {240, 140, 180, 255};
        case Color::Purple: return {120, 50, 160, 255};
        case Color::Red: return {200, 30, 30, 255};
        case Color::Silver: return {192, 192, 200, 255};
        case Color::White: return {245, 245, 245, 255};
        case Color::Yellow: return {240, 210, 30, 255};
    }
    return {0, 0, 0, 255};
}

namespace {

Rgba darker(Rgba c) {
    return {static_cast<std::uint8_t>(c[0] * 3 / 5), static_cast<std::uint8_t>(c[1] * 3 / 5),
            static_cast<std::uint8_t>(c[2] * 3 / 5), 255};
}

// Sprites point "north" (toward the top edge) so rotations are visible.
Image draw_sprite(const ObjectSpec& o) {
    const Rgba c1 = color_rgba(o.color1);
    const Rgba c2 = color_rgba(o.color2);
    const Rgba edge = darker(c1);
    switch (o.cls) {
        case ObjectClass::Plate: {
            Image img(128, 128);
            fill_ellipse(img, 64, 64, 64, 64, edge);
            fill_ellipse(img, 64, 64, 60, 60, c1);
            fill_ellipse(img, 64, 64, 40, 40, c2);
            if (o.pattern == "dotted") {
                for (int k = 0; k < 8; ++k) {
                    const double a = k * 3.14159265358979 / 4.0;
                    fill_ellipse(img, 64 + 50 * std::cos(a), 64 + 50 * std::sin(a), 4, 4, c2);
                }
            }
            fill_rect(img, 60, 6, 68, 20, edge);
            return img;
        }
        case ObjectClass::Cup: {
            Image img(112, 88);
            fill_rect(img, 80, 32, 108, 56, edge);
            fill_rect(img, 86, 38, 102, 50, {0, 0, 0, 0});
            fill_ellipse(img, 44, 44, 44, 44, edge);
            fill_ellipse(img, 44, 44, 40, 40, c1);
            fill_ellipse(img, 44, 44, 26, 26, c2);
            fill_rect(img, 40, 2, 48, 14, edge);
            return img;
        }
        case ObjectClass::Fork: {
            Image img(28, 128);
            fill_rect(img, 10, 56, 18, 128, c1);
            fill_rect(img, 2, 40, 26, 58, c2);
            for (int k = 0; k < 4; ++k) {
                fill_rect(img, 2 + 7 * k, 0, 6 + 7 * k, 42, c2);
            }
            return img;
        }
        case ObjectClass::Knife: {
            Image img(20, 128);
            fill_rect(img, 4, 72, 16, 128, c1);
            for (int y = 0; y < 74; ++y) {
                const int half = std::min(8, 2 + y / 4);
                fill_rect(img, 10 - half, y, 10 + half, y + 1, c2);
            }
            return img;
        }
        case ObjectClass::Spoon: {
            Image img(32, 128);
            fill_rect(img, 12, 44, 20, 128, c1);
            fill_ellipse(img, 16, 24, 16, 24, darker(c2));
            fill_ellipse(img, 16, 24, 13, 21, c2);
            return img;
        }
    }
    return Image(8, 8, c1);
}

Image draw_table(int index) {
    constexpr int kSize = 512;
    static constexpr std::array<Rgba, 5> kBase = {
        Rgba{150, 100, 60, 255}, Rgba{215, 215, 210, 255}, Rgba{50, 110, 70, 255},
        Rgba{240, 236, 225, 255}, Rgba{70, 75, 85, 255}};
    Image img(kSize, kSize, kBase[static_cast<std::size_t>(index)]);
    for (int y = 0; y < kSize; ++y) {
        for (int x = 0; x < kSize; ++x) {
            int shade = 0;
            switch (index) {
                case 0: shade = static_cast<int>(10 * std::sin(y * 0.21 + 3 * std::sin(x * 0.013))); break;
                case 1: shade = static_cast<int>(8 * std::sin((x + y) * 0.05) * std::cos(x * 0.017)); break;
                case 2: shade = ((x / 32 + y / 32) % 2) ? 10 : -10; break;
                case 3: shade = (x % 24 < 2 || y % 24 < 2) ? -12 : 0; break;
                default: shade = static_cast<int>(6 * std::cos(x * 0.11) * std::sin(y * 0.07)); break;
            }
            auto* p = img.pixel(x, y);
            for (int k = 0; k < 3; ++k) {
                p[k] = static_cast<std::uint8_t>(std::clamp(p[k] + shade, 0, 255));
            }
        }
    }
    return img;
}

struct Variant {
    Color color1, color2;
    int material_shift;  // 0 keeps the class default material pair
};

}  // namespace

Catalog make_placeholder_catalog() {
    // Instances 0-5 of every class pair each simulation colour (red, blue,
    // yellow) with a variant differing only in color2; the rest avoid those
    // colours as color1.
    static constexpr std::array<Variant, 25> kVariants = {{
        {Color::Red, Color::Red, 0},       {Color::Red, Color::White, 0},
        {Color::Blue, Color::Blue, 0},     {Color::Blue, Color::White, 0},
        {Color::Yellow, Color::Yellow, 0}, {Color::Yellow, Color::White, 0},
        {Color::White, Color::White, 0},   {Color::Black, Color::Black, 1},
        {Color::Silver, Color::Silver, 0}, {Color::Gold, Color::Gold, 2},
        {Color::Green, Color::White, 1},   {Color::Pink, Color::Pink, 3},
        {Color::Purple, Color::Gold, 2},   {Color::Gray, Color::Black, 0},
        {Color::Brown, Color::Brown, 4},   {Color::Beige, Color::Brown, 4},
        {Color::Green, Color::Green, 0},   {Color::Black, Color::Gold, 2},
        {Color::White, Color::Blue, 1},    {Color::Silver, Color::Black, 3},
        {Color::Pink, Color::White, 1},    {Color::Gray, Color::Gray, 2},
        {Color::Beige, Color::Beige, 3},   {Color::Purple, Color::Purple, 0},
        {Color::Gold, Color::Silver, 1},
    }};
    static constexpr std::array<Material, 5> kMaterials = {Material::Ceramic, Material::Glass, Material::Metal,
                                                           Material::Plastic, Material::Wood};
    static constexpr std::array<std::string_view, 4> kPatterns = {"solid", "striped", "dotted", "floral"};
    static constexpr std::array<std::string_view, 3> kTextures = {"smooth", "matte", "glossy"};

    Catalog catalog;
    int id = 0;
    for (ObjectClass cls : kAllClasses) {
        Material base = Material::Metal;
        std::string shape = "straight";
        if (cls == ObjectClass::Plate) {
            base = Material::Ceramic;
            shape = "round";
        } else if (cls == ObjectClass::Cup) {
            base = Material::Glass;
            shape = "round";
        }
        for (std::size_t i = 0; i < kVariants.size(); ++i) {
            const Variant& v = kVariants[i];
            ObjectSpec o;
            o.id = id++;
            o.cls = cls;
            o.color1 = v.color1;
            o.color2 = v.color2;
            const auto m = static_cast<std::size_t>(base);
            o.material1 = kMaterials[(m + static_cast<std::size_t>(v.material_shift)) % kMaterials.size()];
            o.material2 = (v.material_shift % 2 == 1) ? base : o.material1;
            o.shape = (cls == ObjectClass::Plate && i % 7 == 3) ? "square" : shape;
            o.pattern = std::string(i < 6 ? kPatterns[0] : kPatterns[i % kPatterns.size()]);
            o.texture = std::string(i < 6 ? kTextures[0] : kTextures[i % kTextures.size()]);
            o.sprite = "sprites/" + std::to_string(o.id) + ".png";
            auto sprite = std::make_shared<const Image>(draw_sprite(o));
            catalog.add_object(std::move(o), std::move(sprite));
        }
    }
    for (int t = 0; t < 5; ++t) {
        const std::string tid = "table_" + std::to_string(t);
        catalog.add_table({tid, "tables/" + tid + ".png"}, std::make_shared<const Image>(draw_table(t)));
    }
    return catalog;
}

}  // namespace tablepref
