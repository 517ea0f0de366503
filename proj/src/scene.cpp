// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tablepref/error.hpp"
#include "tablepref/io.hpp"

namespace tablepref {

namespace {

constexpr std::array<std::string_view, 5> kClassNames = {"cup", "fork", "knife", "plate", "spoon"};
constexpr std::array<std::string_view, 13> kColorNames = {
    "beige", "black", "blue", "brown", "gold", "gray", "green",
    "pink", "purple", "red", "silver", "white", "yellow"};
constexpr std::array<std::string_view, 5> kMaterialNames = {"ceramic", "glass", "metal", "plastic",
                                                            "wood"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

template <std::size_t N>
std::optional<std::size_t> index_of(const std::array<std::string_view, N>& names, std::string_view s) {
    const std::string key = lower(s);
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == key) {
            return i;
        }
    }
    return std::nullopt;
}

}  // namespace

std::string_view to_string(ObjectClass c) { return kClassNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Color c) { return kColorNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(Material m) { return kMaterialNames[static_cast<std::size_t>(m)]; }

std::optional<ObjectClass> try_parse_class(std::string_view s) {
    auto i = index_of(kClassNames, s);
    if (!i) {
        return std::nullopt;
    }
    return static_cast<ObjectClass>(*i);
}

ObjectClass parse_class(std::string_view s) {
    if (auto c = try_parse_class(s)) {
        return *c;
    }
    throw DecodeError("unknown object class '" + std::string(s) + "'");
}

Color parse_color(std::string_view s) {
    if (auto i = index_of(kColorNames, s)) {
        return static_cast<Color>(*i);
    }
    throw DecodeError("unknown color '" + std::string(s) + "'");
}

Material parse_material(std::string_view s) {
    if (auto i = index_of(kMaterialNames, s)) {
        return static_cast<Material>(*i);
    }
    throw DecodeError("unknown material '" + std::string(s) + "'");
}

double normalize_rotation(double degrees) {
    if (!std::isfinite(degrees)) {
        throw DecodeError("rotation is not finite");
    }
    double r = std::fmod(degrees, 360.0);
    if (r < 0.0) {
        r += 360.0;
    }
    // -tiny + 360 rounds to 360
    if (r >= 360.0) {
        r = 0.0;
    }
    return r;
}

bool placement_in_bounds(const Placement& p) noexcept {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    return unit(p.x) && unit(p.y) && std::isfinite(p.rotation) && p.rotation >= 0.0 &&
           p.rotation < 360.0;
}

bool arrangement_valid_for_study(const Arrangement& a) noexcept {
    return a.length() >= kStudyMinimumObjects &&
           std::all_of(a.placements.begin(), a.placements.end(), placement_in_bounds);
}

void to_json(nlohmann::json& j, const Placement& p) {
    j = nlohmann::json{{"object", p.object}, {"x", p.x}, {"y", p.y}, {"rotation", p.rotation}};
}

void from_json(const nlohmann::json& j, Placement& p) {
    try {
        p.object = j.at("object").get<int>();
        p.x = j.at("x").get<double>();
        p.y = j.at("y").get<double>();
        p.rotation = j.at("rotation").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("placement: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const Arrangement& a) {
    j = nlohmann::json{{"table", a.table}, {"placements", a.placements}};
}

void from_json(const nlohmann::json& j, Arrangement& a) {
    if (!j.is_object()) {
        throw DecodeError("arrangement must be a JSON object");
    }
    try {
        a.table = j.at("table").get<std::string>();
        a.placements.clear();
        const auto& ps = j.at("placements");
        if (!ps.is_array()) {
            throw DecodeError("arrangement.placements must be an array");
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
            try {
                a.placements.push_back(ps[i].get<Placement>());
            } catch (const DecodeError& e) {
                throw DecodeError("placements[" + std::to_string(i) + "]: " + e.what());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("arrangement: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const PreferenceContext& k) {
    j = nlohmann::json{{"owner", k.owner}, {"entries", nlohmann::json::array()}};
    for (const auto& e : k.entries) {
        j["entries"].push_back({{"arrangement", e.arrangement}, {"order", e.order_description}});
    }
}

void from_json(const nlohmann::json& j, PreferenceContext& k) {
    try {
        k.owner = j.value("owner", std::string{});
        k.entries.clear();
        for (const auto& e : j.at("entries")) {
            k.entries.push_back(
                {e.at("arrangement").get<Arrangement>(), e.value("order", std::string{})});
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("preference context: ") + e.what());
    }
}

nlohmann::ordered_json object_features_json(const ObjectSpec& o) {
    nlohmann::ordered_json j;
    j["color1"] = to_string(o.color1);
    j["material1"] = to_string(o.material1);
    j["shape"] = o.shape;
    j["pattern"] = o.pattern;
    j["texture"] = o.texture;
    j["class"] = to_string(o.cls);
    j["material2"] = to_string(o.material2);
    j["color2"] = to_string(o.color2);
    return j;
}

nlohmann::ordered_json object_to_json(const ObjectSpec& o) {
    nlohmann::ordered_json j;
    j["id"] = o.id;
    const auto features = object_features_json(o);
    for (const auto& [k, v] : features.items()) {
        j[k] = v;
    }
    j["sprite"] = o.sprite;
    return j;
}

ObjectSpec object_from_json(const nlohmann::json& j) {
    static constexpr std::array<std::string_view, 10> kFields = {
        "id", "color1", "material1", "shape", "pattern", "texture", "class", "material2", "color2", "sprite"};
    if (!j.is_object()) {
        throw DecodeError("object record must be a JSON object");
    }
    for (auto f : kFields) {
        if (!j.contains(f)) {
            throw DecodeError("missing field '" + std::string(f) + "'");
        }
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(kFields.begin(), kFields.end(), key) == kFields.end()) {
            throw DecodeError("unexpected field '" + key + "'");
        }
    }
    try {
        ObjectSpec o;
        o.id = j.at("id").get<int>();
        o.cls = parse_class(j.at("class").get<std::string>());
        o.color1 = parse_color(j.at("color1").get<std::string>());
        o.color2 = parse_color(j.at("color2").get<std::string>());
        o.material1 = parse_material(j.at("material1").get<std::string>());
        o.material2 = parse_material(j.at("material2").get<std::string>());
        o.shape = j.at("shape").get<std::string>();
        o.pattern = j.at("pattern").get<std::string>();
        o.texture = j.at("texture").get<std::string>();
        o.sprite = j.at("sprite").get<std::string>();
        return o;
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(e.what());
    }
}

Arrangement load_arrangement(const std::string& path) {
    try {
        return read_json_file(path).get<Arrangement>();
    } catch (const DecodeError& e) {
        throw DecodeError(path + ": " + e.what());
    }
}

void save_arrangement(const Arrangement& a, const std::string& path) {
    write_json_file(path, nlohmann::json(a));
}

}  // namespace tablepref
