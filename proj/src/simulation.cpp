// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>

#include "tablepref/error.hpp"
#include "tablepref/io.hpp"

namespace tablepref {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Layout l) {
    switch (l) {
        case Layout::Standard: return "standard";
        case Layout::Mirrored: return "mirrored";
        case Layout::Abstract: return "abstract";
    }
    return "?";
}

Layout parse_layout(std::string_view s) {
    for (Layout l : kAllLayouts) {
        if (to_string(l) == s) {
            return l;
        }
    }
    throw ConfigError("unknown layout '" + std::string(s) + "'");
}

const std::vector<NoiseProfile>& noise_profiles() {
    static const std::vector<NoiseProfile> profiles = {{"none", 0.0, 0.0}, {"moderate", 0.02, 5.0}};
    return profiles;
}

// Coordinates are multiples of 1/32 so mirroring is exact.
std::vector<TemplateSlot> layout_template(Layout layout) {
    static const std::vector<TemplateSlot> standard = {
        {ObjectClass::Plate, 0.5, 0.625, 0.0},    {ObjectClass::Fork, 0.3125, 0.625, 0.0},
        {ObjectClass::Knife, 0.6875, 0.625, 0.0}, {ObjectClass::Spoon, 0.8125, 0.625, 0.0},
        {ObjectClass::Cup, 0.8125, 0.34375, 0.0},
    };
    static const std::vector<TemplateSlot> abstract = {
        {ObjectClass::Plate, 0.25, 0.25, 0.0},       {ObjectClass::Fork, 0.40625, 0.40625, 45.0},
        {ObjectClass::Knife, 0.5625, 0.5625, 45.0},  {ObjectClass::Spoon, 0.71875, 0.71875, 135.0},
        {ObjectClass::Cup, 0.84375, 0.84375, 0.0},
    };
    switch (layout) {
        case Layout::Standard: return standard;
        case Layout::Mirrored: return mirror(standard);
        case Layout::Abstract: return abstract;
    }
    return standard;
}

std::vector<TemplateSlot> mirror(const std::vector<TemplateSlot>& slots) {
    std::vector<TemplateSlot> out = slots;
    for (TemplateSlot& s : out) {
        s.x = 1.0 - s.x;
        s.rotation = s.rotation == 0.0 ? 0.0 : 360.0 - s.rotation;
    }
    return out;
}

Arrangement sample_arrangement(const SimPreferenceSpec& spec, const Catalog& catalog, std::mt19937_64& rng) {
    if (spec.noise.sigma_pos < 0.0 || spec.noise.sigma_rot < 0.0) {
        throw GenerationError("noise sigmas must be non-negative");
    }
    Arrangement a;
    a.table = spec.table;
    for (const TemplateSlot& slot : layout_template(spec.layout)) {
        std::vector<int> candidates;
        for (const ObjectSpec* o : catalog.of_class(slot.cls)) {
            if (o->color1 == spec.color) {
                candidates.push_back(o->id);
            }
        }
        if (candidates.empty()) {
            throw GenerationError("catalog has no " + std::string(to_string(spec.color)) + " " +
                                  std::string(to_string(slot.cls)));
        }
        std::sort(candidates.begin(), candidates.end());
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        Placement p{candidates[pick(rng)], slot.x, slot.y, slot.rotation};
        if (spec.noise.sigma_pos > 0.0) {
            std::normal_distribution<double> d(0.0, spec.noise.sigma_pos);
            p.x = std::clamp(p.x + d(rng), 0.0, 1.0);
            p.y = std::clamp(p.y + d(rng), 0.0, 1.0);
        }
        if (spec.noise.sigma_rot > 0.0) {
            std::normal_distribution<double> d(0.0, spec.noise.sigma_rot);
            p.rotation = normalize_rotation(p.rotation + d(rng));
        }
        a.placements.push_back(p);
    }
    return a;
}

Arrangement sample_arrangement(const SimPreferenceSpec& spec, const Catalog& catalog) {
    std::mt19937_64 rng(spec.seed);
    return sample_arrangement(spec, catalog, rng);
}

std::string_view to_string(Split s) { return s == Split::Reconstruction ? "reconstruction" : "generalization"; }

Split parse_split(std::string_view s) {
    if (s == "reconstruction") {
        return Split::Reconstruction;
    }
    if (s == "generalization") {
        return Split::Generalization;
    }
    throw DecodeError("unknown split '" + std::string(s) + "'");
}

PreferenceContext ExperimentCase::preference_context() const {
    PreferenceContext k;
    k.owner = id;
    for (const Arrangement& a : context) {
        k.entries.push_back({a, ""});
    }
    return k;
}

Benchmark generate_benchmark(const Catalog& catalog, int context_length, std::uint64_t seed) {
    if (context_length < 0) {
        throw ConfigError("context length must be non-negative");
    }
    std::vector<std::string> tables;
    for (const TableSpec& t : catalog.tables()) {
        tables.push_back(t.id);
    }
    std::sort(tables.begin(), tables.end());
    if (tables.size() < 2) {
        throw GenerationError("benchmark needs at least two tables in the catalog");
    }
    tables.resize(2);

    Benchmark bench;
    bench.seed = seed;
    bench.context_length = context_length;
    bench.tables = tables;
    std::uint64_t preference = 0;
    for (Layout layout : kAllLayouts) {
        for (Color color : kPreferenceColors) {
            for (const NoiseProfile& noise : noise_profiles()) {
                for (std::size_t t = 0; t < 2; ++t) {
                    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                                      static_cast<std::uint32_t>(preference)};
                    std::mt19937_64 rng(seq);
                    SimPreferenceSpec spec{layout, color, tables[t], noise, seed};
                    spec.seed = rng();

                    ExperimentCase recon;
                    recon.spec = spec;
                    recon.context_table = spec.table;
                    for (int c = 0; c < context_length; ++c) {
                        recon.context.push_back(sample_arrangement(spec, catalog, rng));
                    }
                    ExperimentCase gen = recon;
                    recon.split = Split::Reconstruction;
                    recon.ground_truth = sample_arrangement(spec, catalog, rng);
                    SimPreferenceSpec other = spec;
                    other.table = tables[1 - t];
                    gen.split = Split::Generalization;
                    gen.ground_truth = sample_arrangement(other, catalog, rng);

                    for (ExperimentCase* c : {&recon, &gen}) {
                        char name[32];
                        std::snprintf(name, sizeof name, "case_%03zu", bench.cases.size());
                        c->id = name;
                        bench.cases.push_back(*c);
                    }
                    ++preference;
                }
            }
        }
    }
    return bench;
}

namespace {

ojson spec_json(const SimPreferenceSpec& s) {
    ojson j;
    j["layout"] = std::string(to_string(s.layout));
    j["color"] = std::string(to_string(s.color));
    j["noise"] = {{"name", s.noise.name}, {"sigma_pos", s.noise.sigma_pos}, {"sigma_rot", s.noise.sigma_rot}};
    j["seed"] = s.seed;
    return j;
}

ojson slots_json(const std::vector<TemplateSlot>& slots) {
    ojson arr = ojson::array();
    for (const TemplateSlot& s : slots) {
        arr.push_back({{"class", std::string(to_string(s.cls))}, {"x", s.x}, {"y", s.y}, {"rotation", s.rotation}});
    }
    return arr;
}

ojson arrangement_ojson(const Arrangement& a) {
    ojson placements = ojson::array();
    for (const Placement& p : a.placements) {
        placements.push_back({{"object", p.object}, {"x", p.x}, {"y", p.y}, {"rotation", p.rotation}});
    }
    return {{"table", a.table}, {"placements", placements}};
}

}  // namespace

ojson case_to_json(const ExperimentCase& c) {
    ojson j;
    j["id"] = c.id;
    j["split"] = std::string(to_string(c.split));
    j["context_table"] = c.context_table;
    j["target_table"] = c.target_table();
    j["spec"] = c.spec ? spec_json(*c.spec) : ojson(nullptr);
    ojson files = ojson::array();
    for (std::size_t k = 0; k < c.context.size(); ++k) {
        files.push_back("context_" + std::to_string(k + 1) + ".json");
    }
    j["context"] = files;
    j["ground_truth"] = "ground_truth.json";
    j["initial"] = arrangement_ojson(c.initial());
    return j;
}

void write_case(const ExperimentCase& c, const std::string& case_dir) {
    const fs::path dir(case_dir);
    for (std::size_t k = 0; k < c.context.size(); ++k) {
        write_json_file((dir / ("context_" + std::to_string(k + 1) + ".json")).string(), arrangement_ojson(c.context[k]));
    }
    write_json_file((dir / "ground_truth.json").string(), arrangement_ojson(c.ground_truth));
    write_json_file((dir / "case.json").string(), case_to_json(c));
}

void write_benchmark(const Benchmark& bench, const std::string& dir, const std::string& catalog_ref) {
    ojson manifest;
    manifest["schema_version"] = 1;
    manifest["kind"] = "simulated_benchmark";
    manifest["seed"] = bench.seed;
    manifest["context_length"] = bench.context_length;
    manifest["catalog"] = catalog_ref;
    manifest["tables"] = bench.tables;
    ojson order = ojson::array();
    for (ObjectClass c : kPlacementOrder) {
        order.push_back(std::string(to_string(c)));
    }
    manifest["placement_order"] = order;
    ojson layouts;
    for (Layout l : kAllLayouts) {
        layouts[std::string(to_string(l))] = slots_json(layout_template(l));
    }
    manifest["layouts"] = layouts;
    ojson noise = ojson::array();
    for (const NoiseProfile& n : noise_profiles()) {
        noise.push_back({{"name", n.name}, {"sigma_pos", n.sigma_pos}, {"sigma_rot", n.sigma_rot}});
    }
    manifest["noise_profiles"] = noise;

    ojson cases = ojson::array();
    for (const ExperimentCase& c : bench.cases) {
        const std::string rel = "cases/" + c.id;
        write_case(c, (fs::path(dir) / rel).string());
        cases.push_back({{"id", c.id},
                         {"dir", rel},
                         {"split", std::string(to_string(c.split))},
                         {"layout", std::string(to_string(c.spec->layout))},
                         {"color", std::string(to_string(c.spec->color))},
                         {"noise", c.spec->noise.name},
                         {"context_table", c.context_table},
                         {"target_table", c.target_table()}});
    }
    manifest["cases"] = cases;
    write_json_file((fs::path(dir) / "manifest.json").string(), manifest);
}

ExperimentCase load_case(const std::string& case_dir) {
    const fs::path dir(case_dir);
    const json j = read_json_file((dir / "case.json").string());
    try {
        ExperimentCase c;
        c.id = j.at("id").get<std::string>();
        c.split = parse_split(j.at("split").get<std::string>());
        c.context_table = j.at("context_table").get<std::string>();
        if (const json& s = j.at("spec"); !s.is_null()) {
            SimPreferenceSpec spec;
            spec.layout = parse_layout(s.at("layout").get<std::string>());
            spec.color = parse_color(s.at("color").get<std::string>());
            spec.noise = {s.at("noise").at("name").get<std::string>(), s.at("noise").at("sigma_pos").get<double>(),
                          s.at("noise").at("sigma_rot").get<double>()};
            spec.seed = s.at("seed").get<std::uint64_t>();
            spec.table = c.context_table;
            c.spec = spec;
        }
        for (const json& f : j.at("context")) {
            c.context.push_back(load_arrangement((dir / f.get<std::string>()).string()));
        }
        c.ground_truth = load_arrangement((dir / j.at("ground_truth").get<std::string>()).string());
        return c;
    } catch (const json::exception& e) {
        throw DecodeError((dir / "case.json").string() + ": " + e.what());
    } catch (const ConfigError& e) {
        throw DecodeError((dir / "case.json").string() + ": " + e.what());
    }
}

std::string BenchmarkManifest::catalog_path() const {
    if (catalog_ref.empty()) {
        return "";
    }
    const fs::path p(catalog_ref);
    return p.is_absolute() ? p.string() : (fs::path(dir) / p).string();
}

BenchmarkManifest load_manifest(const std::string& path) {
    fs::path file(path);
    if (fs::is_directory(file)) {
        file /= "manifest.json";
    }
    BenchmarkManifest m;
    m.dir = file.parent_path().string();
    m.raw = read_json_file(file.string());
    try {
        m.catalog_ref = m.raw.value("catalog", std::string());
        for (const json& c : m.raw.at("cases")) {
            m.case_dirs.push_back((fs::path(m.dir) / c.at("dir").get<std::string>()).string());
        }
    } catch (const json::exception& e) {
        throw DecodeError(file.string() + ": " + e.what());
    }
    return m;
}

}  // namespace tablepref
