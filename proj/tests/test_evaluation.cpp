// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tablepref/error.hpp"
#include "tablepref/evaluation.hpp"
#include "test_support.hpp"

using namespace tablepref;
using Eigen::Vector2d;

namespace {

const Catalog& cat() { return tablepref::testing::placeholder_catalog(); }

std::vector<Vector2d> random_points(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector2d> pts;
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(unit(rng), unit(rng));
    return pts;
}

std::vector<Vector2d> rigid(const std::vector<Vector2d>& pts, double deg, Vector2d shift, Vector2d about) {
    const double t = deg * std::numbers::pi / 180.0;
    Eigen::Matrix2d r;
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    std::vector<Vector2d> out;
    for (const auto& p : pts) out.push_back(r * (p - about) + about + shift);
    return out;
}

std::vector<oracle::P2> to_p2(const std::vector<Vector2d>& v) {
    std::vector<oracle::P2> out;
    for (const auto& p : v) out.push_back({p.x(), p.y()});
    return out;
}

}  // namespace

TEST_CASE("hamming counts differing categorical fields") {
    ObjectSpec a{1, ObjectClass::Fork, Color::Red, Color::Red, Material::Metal, Material::Metal, "s", "p", "t", ""};
    ObjectSpec b = a;
    CHECK(hamming(a, b) == 0);
    b.color1 = Color::Blue;
    CHECK(hamming(a, b) == 1);
    b = {2, ObjectClass::Cup, Color::Blue, Color::White, Material::Glass, Material::Wood, "x", "y", "z", ""};
    CHECK(hamming(a, b) == 5);
    b = a;
    b.shape = "other";
    b.texture = "rough";
    CHECK(hamming(a, b) == 0);
}

TEST_CASE("match pairs identical arrangements by identity") {
    const Arrangement a{"table_0", {{75, .5, .6, 0}, {25, .3, .6, 0}, {50, .7, .6, 0}, {0, .75, .3, 0}}};
    const auto m = match(a, a, cat());
    REQUIRE(m.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(m.pairs[i] == MatchPair{i, i, 0});
    }
    Arrangement three = a;
    three.placements.pop_back();
    const auto m3 = match(a, three, cat());
    CHECK(m3.size() == 3);
    const auto e = evaluate(a, three, cat());
    CHECK(e.unmatched_gt == 1);
    CHECK(e.unmatched_pred == 0);
    CHECK(e.accuracy == doctest::Approx(0.75));
    CHECK(match(Arrangement{}, a, cat()).size() == 0);
    CHECK(match(a, Arrangement{}, cat()).size() == 0);
    CHECK_THROWS_AS(match(Arrangement{"t", {{500, 0, 0, 0}}}, a, cat()), DecodeError);
}

TEST_CASE("greedy matching on a crafted three-object instance") {
    // gt: red fork, red knife, blue plate.  pred: red knife, blue plate, white fork.
    const Arrangement gt{"t", {{25, 0, 0, 0}, {50, 0, 0, 0}, {77, 0, 0, 0}}};
    const Arrangement pred{"t", {{50, 0, 0, 0}, {77, 0, 0, 0}, {31, 0, 0, 0}}};
    // Hand trace: red fork is 1 from red knife (class) and 2 from the white
    // fork (both colours), so it claims the knife; red knife then has only the
    // plate (5) and the white fork (3) left and takes the fork; the plate gets
    // the plate. Greedy total 4.
    const auto m = match(gt, pred, cat());
    REQUIRE(m.size() == 3);
    CHECK(m.pairs[0] == MatchPair{0, 0, 1});
    CHECK(m.pairs[1] == MatchPair{1, 2, 3});
    CHECK(m.pairs[2] == MatchPair{2, 1, 0});
    // The optimal assignment (fork-fork 2, knife-knife 0, plate-plate 0) does
    // better than greedy here.
    const auto opt = match(gt, pred, cat(), MatchStrategy::Optimal);
    int total = 0;
    for (const auto& p : opt.pairs) total += p.distance;
    std::vector<std::vector<int>> d(3, std::vector<int>(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            d[i][j] = oracle::hamming_recount(cat().at(gt.placements[i].object), cat().at(pred.placements[j].object));
    CHECK(total == oracle::brute_force_min_cost(d, 3));
    CHECK(total == 2);
}

TEST_CASE("optimal matching reaches the brute-force minimum") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const auto gt = tablepref::testing::random_arrangement(rng, cat(), 1 + trial % 5);
        const auto pred = tablepref::testing::random_arrangement(rng, cat(), 1 + (trial / 5) % 5);
        std::vector<std::vector<int>> d;
        for (const auto& g : gt.placements) {
            std::vector<int> row;
            for (const auto& p : pred.placements) row.push_back(oracle::hamming_recount(cat().at(g.object), cat().at(p.object)));
            d.push_back(row);
        }
        const auto m = match(gt, pred, cat(), MatchStrategy::Optimal);
        CHECK(m.size() == std::min(gt.length(), pred.length()));
        int total = 0;
        for (const auto& p : m.pairs) total += p.distance;
        CHECK(total == oracle::brute_force_min_cost(d, pred.length()));
    }
}

TEST_CASE("kabsch: identity, translation and rotation") {
    std::mt19937_64 rng(1);
    const auto pts = random_points(rng, 6);
    const auto same = kabsch(pts, pts);
    CHECK(same.rmsd < 1e-12);
    CHECK((same.rotation - Eigen::Matrix2d::Identity()).norm() < 1e-12);
    CHECK(same.translation.norm() < 1e-12);

    const auto shifted = rigid(pts, 0.0, {0.3, -0.1}, {0, 0});
    const auto t = kabsch(pts, shifted);
    CHECK(t.rmsd < 1e-12);
    CHECK((t.translation - Vector2d(0.3, -0.1)).norm() < 1e-12);

    Vector2d centroid = Vector2d::Zero();
    for (const auto& p : pts) centroid += p / 6.0;
    const auto turned = rigid(pts, 37.0, {0, 0}, centroid);
    const auto r = kabsch(pts, turned);
    CHECK(r.rmsd < 1e-12);
    CHECK(std::fabs(r.angle_degrees() - (-37.0)) < 1e-9);  // maps pred back onto gt
    const auto back = kabsch(turned, pts);
    CHECK(std::fabs(back.angle_degrees() - 37.0) < 1e-9);
}

TEST_CASE("kabsch degenerate inputs") {
    CHECK_THROWS_AS(kabsch(std::vector<Vector2d>{}, std::vector<Vector2d>{}), RegistrationError);
    CHECK_THROWS_AS(kabsch(std::vector<Vector2d>{{0, 0}}, std::vector<Vector2d>{{0, 0}, {1, 1}}), RegistrationError);
    const auto one = kabsch(std::vector<Vector2d>{{0.2, 0.3}}, std::vector<Vector2d>{{0.7, 0.1}});
    CHECK(one.rmsd == 0.0);
    CHECK(one.rotation == Eigen::Matrix2d::Identity());
    CHECK((one.translation - Vector2d(0.5, -0.2)).norm() < 1e-15);
    // Two points always admit an exact fit when their separations match.
    const auto two = kabsch(std::vector<Vector2d>{{0, 0}, {1, 0}}, std::vector<Vector2d>{{3, 3}, {3, 4}});
    CHECK(two.rmsd < 1e-12);
    // Collinear sets still give a proper rotation.
    const auto line = kabsch(std::vector<Vector2d>{{0, 0}, {1, 1}, {2, 2}}, std::vector<Vector2d>{{0, 0}, {-1, 1}, {-2, 2}});
    CHECK(line.rotation.determinant() == doctest::Approx(1.0));
    // A mirrored triangle cannot be fit by a proper rotation.
    const std::vector<Vector2d> tri{{0, 0}, {1, 0}, {0, 2}};
    const std::vector<Vector2d> mirrored{{0, 0}, {-1, 0}, {0, 2}};
    const auto m = kabsch(tri, mirrored);
    CHECK(m.rotation.determinant() == doctest::Approx(1.0));
    CHECK(m.rmsd > 0.1);
    CHECK(m.rmsd == doctest::Approx(oracle::angle_scan_rmsd(to_p2(tri), to_p2(mirrored))).epsilon(1e-9));
}

TEST_CASE("kabsch matches the angle-scan oracle on random clouds") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 25; ++i) {
        const auto a = random_points(rng, 5);
        const auto b = random_points(rng, 5);
        const auto reg = kabsch(a, b);
        CHECK(std::fabs(reg.rmsd - oracle::angle_scan_rmsd(to_p2(a), to_p2(b))) < 1e-6);
        CHECK((reg.rotation.transpose() * reg.rotation - Eigen::Matrix2d::Identity()).norm() < 1e-9);
        CHECK(reg.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::fabs(kabsch(b, a).rmsd - reg.rmsd) < 1e-9);
    }
}

TEST_CASE("evaluate metrics are independent") {
    const Arrangement gt{"table_0", {{75, .5, .6, 0}, {25, .3, .6, 0}, {50, .7, .6, 0}, {0, .75, .3, 0}}};
    const auto same = evaluate(gt, gt, cat());
    CHECK(same.accuracy == 1.0);
    CHECK(same.all_correct);
    REQUIRE(same.rmsd);
    CHECK(*same.rmsd < 1e-12);

    // Same class, different colour, identical positions.
    Arrangement recolored = gt;
    for (auto& p : recolored.placements) p.object += 2;  // red -> blue variant within the class
    const auto rc = evaluate(gt, recolored, cat());
    CHECK(rc.accuracy == 0.0);
    CHECK_FALSE(rc.all_correct);
    CHECK(*rc.rmsd < 1e-12);

    // Fixture: two exact ids, two recoloured, whole layout shifted and turned.
    Arrangement moved = gt;
    moved.placements[1].object = 26;  // red/white fork, one field from the red fork
    moved.placements[3].object = 1;   // red/white cup
    const std::vector<Vector2d> src{{.5, .6}, {.3, .6}, {.7, .6}, {.75, .3}};
    const auto dst = rigid(src, 20.0, {0.05, -0.02}, {0.5, 0.5});
    for (std::size_t i = 0; i < 4; ++i) {
        moved.placements[i].x = dst[i].x();
        moved.placements[i].y = dst[i].y();
    }
    std::vector<oracle::P2> og, op;
    for (std::size_t i = 0; i < 4; ++i) {
        og.push_back({src[i].x(), src[i].y()});
        op.push_back({dst[i].x(), dst[i].y()});
    }
    REQUIRE(oracle::angle_scan_rmsd(og, op) < 1e-9);
    const auto mv = evaluate(gt, moved, cat());
    CHECK(mv.accuracy == 0.5);
    CHECK(*mv.rmsd < 1e-9);

    const auto none = evaluate(gt, Arrangement{"table_0", {}}, cat());
    CHECK(none.accuracy == 0.0);
    CHECK_FALSE(none.rmsd.has_value());
    const nlohmann::json j = none;
    CHECK(j["rmsd"].is_null());
    CHECK(j["rmsd_defined"] == false);
}

TEST_CASE("eval report JSON round trip") {
    const Arrangement gt{"table_0", {{75, .5, .6, 0}, {25, .3, .6, 10}, {50, .7, .6, 0}}};
    Arrangement pred = gt;
    pred.placements[0].x = 0.45;
    const auto r = evaluate(gt, pred, cat());
    const nlohmann::json j = r;
    const auto back = eval_report_from_json(j);
    CHECK(back.accuracy == r.accuracy);
    CHECK(*back.rmsd == *r.rmsd);
    CHECK(back.matching.pairs == r.matching.pairs);
    CHECK((back.registration->rotation - r.registration->rotation).norm() == 0.0);
}

TEST_CASE("displacement rmsd is not registered") {
    const Arrangement gt{"table_0", {{75, .5, .6, 0}, {25, .3, .6, 0}, {50, .7, .6, 0}}};
    Arrangement shifted = gt;
    for (auto& p : shifted.placements) p.x += 0.1;
    CHECK(*displacement_rmsd(gt, shifted, cat()) == doctest::Approx(0.1));
    CHECK(*evaluate(gt, shifted, cat()).rmsd < 1e-12);
}
