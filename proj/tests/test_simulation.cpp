// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <map>

#include <doctest.h>

#include "tablepref/evaluation.hpp"
#include "tablepref/io.hpp"
#include "tablepref/simulation.hpp"
#include "test_support.hpp"

using namespace tablepref;
using tablepref::testing::placeholder_catalog;
using tablepref::testing::TempDir;
using tablepref::testing::tree_digest;

namespace {

const TemplateSlot& slot_of(const std::vector<TemplateSlot>& t, ObjectClass c) {
    for (const TemplateSlot& s : t) {
        if (s.cls == c) {
            return s;
        }
    }
    FAIL("class missing from template");
    return t.front();
}

}  // namespace

TEST_CASE("layout templates") {
    const auto standard = layout_template(Layout::Standard);
    const auto mirrored = layout_template(Layout::Mirrored);
    CHECK(slot_of(standard, ObjectClass::Fork).x < slot_of(standard, ObjectClass::Plate).x);
    CHECK(slot_of(standard, ObjectClass::Plate).x < slot_of(standard, ObjectClass::Knife).x);
    CHECK(slot_of(standard, ObjectClass::Knife).x < slot_of(standard, ObjectClass::Spoon).x);
    CHECK(slot_of(standard, ObjectClass::Cup).y < slot_of(standard, ObjectClass::Plate).y);
    CHECK(slot_of(standard, ObjectClass::Cup).x > 0.5);
    CHECK(slot_of(mirrored, ObjectClass::Knife).x < slot_of(mirrored, ObjectClass::Plate).x);
    CHECK(slot_of(mirrored, ObjectClass::Plate).x < slot_of(mirrored, ObjectClass::Fork).x);
    CHECK(mirror(mirrored) == standard);
    const auto abstract = layout_template(Layout::Abstract);
    CHECK(mirror(mirror(abstract)) == abstract);
    for (Layout l : kAllLayouts) {
        const auto t = layout_template(l);
        REQUIRE(t.size() == kPlacementOrder.size());
        for (std::size_t k = 0; k < t.size(); ++k) {
            CHECK(t[k].cls == kPlacementOrder[k]);
            CHECK(t[k].x >= 0.0);
            CHECK(t[k].x <= 1.0);
        }
    }
}

TEST_CASE("zero noise reproduces the template with preferred-colour objects") {
    const Catalog& cat = placeholder_catalog();
    for (Color color : kPreferenceColors) {
        const SimPreferenceSpec spec{Layout::Abstract, color, "table_3", noise_profiles()[0], 99};
        const Arrangement a = sample_arrangement(spec, cat);
        const auto t = layout_template(Layout::Abstract);
        REQUIRE(a.length() == t.size());
        CHECK(a.table == "table_3");
        for (std::size_t k = 0; k < t.size(); ++k) {
            const ObjectSpec& o = cat.at(a.placements[k].object);
            CHECK(o.cls == t[k].cls);
            CHECK(o.color1 == color);
            CHECK(a.placements[k].x == t[k].x);
            CHECK(a.placements[k].y == t[k].y);
            CHECK(a.placements[k].rotation == t[k].rotation);
        }
        CHECK(sample_arrangement(spec, cat) == a);
    }
}

TEST_CASE("moderate noise has the configured spread") {
    const Catalog& cat = placeholder_catalog();
    const SimPreferenceSpec spec{Layout::Standard, Color::Blue, "table_0", {"moderate", 0.02, 5.0}, 1};
    std::mt19937_64 rng(12345);
    const auto t = layout_template(Layout::Standard);
    double sx = 0.0, sxx = 0.0, sr = 0.0, srr = 0.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        const Arrangement a = sample_arrangement(spec, cat, rng);
        const double dx = a.placements[0].x - t[0].x;
        double dr = a.placements[0].rotation;
        dr = dr > 180.0 ? dr - 360.0 : dr;
        sx += dx;
        sxx += dx * dx;
        sr += dr;
        srr += dr * dr;
        for (const Placement& p : a.placements) {
            CHECK(placement_in_bounds(p));
        }
    }
    const double sd_x = std::sqrt(sxx / n - (sx / n) * (sx / n));
    const double sd_r = std::sqrt(srr / n - (sr / n) * (sr / n));
    CHECK(std::fabs(sd_x - 0.02) <= 0.1 * 0.02);
    CHECK(std::fabs(sd_r - 5.0) <= 0.1 * 5.0);
}

TEST_CASE("missing preferred colour is a generation error") {
    Catalog cat;
    cat.add_object({1, ObjectClass::Plate, Color::Red, Color::Red, Material::Ceramic, Material::Ceramic, "", "", "", ""});
    const SimPreferenceSpec spec{Layout::Standard, Color::Red, "t", noise_profiles()[0], 1};
    CHECK_THROWS_WITH_AS(sample_arrangement(spec, cat), doctest::Contains("red fork"), GenerationError);
}

TEST_CASE("benchmark shape") {
    const Catalog& cat = placeholder_catalog();
    const Benchmark b = generate_benchmark(cat, 4, 2026);
    REQUIRE(b.cases.size() == 72);
    int recon = 0;
    int gen = 0;
    std::map<std::string, int> specs;
    for (const ExperimentCase& c : b.cases) {
        CHECK(c.context.size() == 4);
        if (c.split == Split::Reconstruction) {
            ++recon;
            CHECK(c.target_table() == c.context_table);
        } else {
            ++gen;
            CHECK(c.target_table() != c.context_table);
        }
        for (const Arrangement& a : c.context) {
            CHECK(a.table == c.context_table);
            for (const Placement& p : a.placements) {
                CHECK(cat.at(p.object).color1 == c.spec->color);
                CHECK(placement_in_bounds(p));
            }
        }
        for (const Placement& p : c.ground_truth.placements) {
            CHECK(cat.at(p.object).color1 == c.spec->color);
        }
        ++specs[std::string(to_string(c.spec->layout)) + "/" + std::string(to_string(c.spec->color)) + "/" +
                c.spec->noise.name];
        if (c.spec->noise.sigma_pos == 0.0) {
            for (const Arrangement& a : c.context) {
                const EvalReport r = evaluate(c.ground_truth, a, cat);
                REQUIRE(r.rmsd.has_value());
                CHECK(*r.rmsd < 1e-12);
            }
        }
    }
    CHECK(recon == 36);
    CHECK(gen == 36);
    CHECK(specs.size() == 18);
    for (const auto& [name, count] : specs) {
        CHECK(count == 4);
    }
    CHECK(generate_benchmark(cat, 0, 1).cases.front().context.empty());
    CHECK_THROWS_AS(generate_benchmark(cat, -1, 1), ConfigError);
}

TEST_CASE("benchmark files are byte-identical for one seed and load back") {
    const Catalog& cat = placeholder_catalog();
    TempDir a("bench_a");
    TempDir b("bench_b");
    write_benchmark(generate_benchmark(cat, 2, 5), a.str(), "catalog");
    write_benchmark(generate_benchmark(cat, 2, 5), b.str(), "catalog");
    const auto da = tree_digest(a.path());
    CHECK(da.size() == 1 + 72 * 4);
    CHECK(da == tree_digest(b.path()));

    TempDir c("bench_c");
    write_benchmark(generate_benchmark(cat, 2, 6), c.str(), "catalog");
    CHECK(tree_digest(c.path()) != da);

    const BenchmarkManifest m = load_manifest(a.str());
    REQUIRE(m.case_dirs.size() == 72);
    CHECK(m.catalog_path() == (a.path() / "catalog").string());
    const Benchmark bench = generate_benchmark(cat, 2, 5);
    CHECK(load_case(m.case_dirs[17]) == bench.cases[17]);
    CHECK_THROWS_AS(load_case(a.sub("nope")), LoadError);
}
