// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/acceptability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "tablepref/angles.hpp"
#include "tablepref/error.hpp"

namespace tablepref {

using json = nlohmann::json;

Arrangement jitter(const Arrangement& a, double t, std::uint64_t seed, const JitterConfig& cfg) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw ConfigError("jitter magnitude must lie in [0, 1]");
    }
    if (t == 0.0 || a.placements.empty()) {
        return a;
    }
    std::mt19937_64 rng(seed);
    const double heading = std::uniform_real_distribution<double>(0.0, 360.0)(rng);
    const double shift = t * cfg.max_shift;
    const double dx = shift * cos_deg(heading);
    const double dy = shift * sin_deg(heading);
    const double theta = t * cfg.max_rotation;
    const double c = cos_deg(theta);
    const double s = sin_deg(theta);

    double cx = 0.0;
    double cy = 0.0;
    for (const Placement& p : a.placements) {
        cx += p.x;
        cy += p.y;
    }
    cx /= static_cast<double>(a.placements.size());
    cy /= static_cast<double>(a.placements.size());

    Arrangement out = a;
    for (Placement& p : out.placements) {
        const double u = p.x - cx;
        const double v = p.y - cy;
        p.x = std::clamp(cx + u * c - v * s + dx, 0.0, 1.0);
        p.y = std::clamp(cy + u * s + v * c + dy, 0.0, 1.0);
        p.rotation = normalize_rotation(p.rotation + theta);
    }
    return out;
}

double draw_jitter_magnitude(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x6a09e667f3bcc908ULL);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

json to_json(const RatingRecord& r) {
    json j = {{"session", r.session},       {"trial", r.trial},         {"b_initial", r.b_initial},
              {"b_jitter", r.b_jitter},     {"t_jitter", r.t_jitter},   {"rmsd_jitter", r.rmsd_jitter}};
    if (r.b_correct) {
        j["b_correct"] = *r.b_correct;
    }
    if (r.rmsd_correct) {
        j["rmsd_correct"] = *r.rmsd_correct;
    }
    return j;
}

namespace {

double unit_field(const json& j, const char* name) {
    const double v = j.at(name).get<double>();
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DecodeError(std::string(name) + " must lie in [0, 1], got " + j.at(name).dump());
    }
    return v;
}

double distance_field(const json& j, const char* name) {
    const double v = j.at(name).get<double>();
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DecodeError(std::string(name) + " must be a non-negative number, got " + j.at(name).dump());
    }
    return v;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RatingRecord rating_from_json(const json& j) {
    try {
        RatingRecord r;
        r.session = j.at("session").get<std::string>();
        r.trial = j.value("trial", 0);
        r.b_initial = unit_field(j, "b_initial");
        r.b_jitter = unit_field(j, "b_jitter");
        r.t_jitter = unit_field(j, "t_jitter");
        r.rmsd_jitter = distance_field(j, "rmsd_jitter");
        if (j.contains("b_correct") && !j.at("b_correct").is_null()) {
            r.b_correct = unit_field(j, "b_correct");
        }
        if (j.contains("rmsd_correct") && !j.at("rmsd_correct").is_null()) {
            r.rmsd_correct = distance_field(j, "rmsd_correct");
        }
        return r;
    } catch (const json::exception& e) {
        throw DecodeError(std::string("rating record: ") + e.what());
    }
}

std::vector<RatingRecord> read_ratings_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("cannot open " + path);
    }
    std::vector<RatingRecord> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(rating_from_json(json::parse(line)));
        } catch (const json::parse_error& e) {
            throw DecodeError(path + ":" + std::to_string(n) + ": " + e.what());
        } catch (const DecodeError& e) {
            throw DecodeError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

AcceptanceReport subjective_acceptance(std::span<const RatingRecord> records, std::span<const double> thresholds,
                                       std::span<const std::optional<double>> prediction_rmsds) {
    AcceptanceReport report;
    for (double tau : thresholds) {
        AcceptanceRow row;
        row.threshold = tau;
        for (const RatingRecord& r : records) {
            if (r.rmsd_jitter <= tau) {
                ++row.people_total;
                if (r.b_initial - r.b_jitter < kRatingDifferenceThreshold - 1e-9) {
                    ++row.people_accepting;
                }
            }
        }
        if (row.people_total > 0) {
            row.people = static_cast<double>(row.people_accepting) / static_cast<double>(row.people_total);
        }
        row.model_total = prediction_rmsds.size();
        for (const auto& rmsd : prediction_rmsds) {
            row.model_within += rmsd && *rmsd <= tau ? 1 : 0;
        }
        if (row.model_total > 0) {
            row.model = static_cast<double>(row.model_within) / static_cast<double>(row.model_total);
        }
        report.rows.push_back(row);
    }
    return report;
}

AcceptanceReport subjective_acceptance(std::span<const RatingRecord> records, std::span<const double> thresholds,
                                       std::span<const EvalReport> predictions) {
    std::vector<std::optional<double>> rmsds;
    rmsds.reserve(predictions.size());
    for (const EvalReport& p : predictions) {
        rmsds.push_back(p.rmsd);
    }
    return subjective_acceptance(records, thresholds, rmsds);
}

json AcceptanceReport::to_json() const {
    json rows_json = json::array();
    for (const AcceptanceRow& r : rows) {
        rows_json.push_back({{"threshold", r.threshold},
                             {"people", opt(r.people)},
                             {"people_accepting", r.people_accepting},
                             {"people_total", r.people_total},
                             {"model", opt(r.model)},
                             {"model_within", r.model_within},
                             {"model_total", r.model_total}});
    }
    return {{"rating_threshold", rating_threshold}, {"rows", rows_json}};
}

std::string AcceptanceReport::to_csv() const {
    std::ostringstream out;
    out << "threshold,people,people_accepting,people_total,model,model_within,model_total\n";
    for (const AcceptanceRow& r : rows) {
        out << fmt(r.threshold) << ',' << fmt(r.people) << ',' << r.people_accepting << ',' << r.people_total << ','
            << fmt(r.model) << ',' << r.model_within << ',' << r.model_total << '\n';
    }
    return out.str();
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            rank[idx[k]] = r;
        }
        i = j + 1;
    }
    return rank;
}

}  // namespace

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 3) {
        return std::nullopt;
    }
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(ra.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return std::nullopt;
    }
    return sab / std::sqrt(saa * sbb);
}

ObjectiveSummary objective_acceptance(std::span<const RatingRecord> records) {
    ObjectiveSummary s;
    std::vector<double> dist;
    std::vector<double> diff;
    for (const RatingRecord& r : records) {
        if (r.b_correct && r.rmsd_correct) {
            s.scatter.emplace_back(*r.rmsd_correct, *r.b_correct - r.b_initial);
            dist.push_back(*r.rmsd_correct);
            diff.push_back(*r.b_correct - r.b_initial);
        }
    }
    if (dist.size() < 3) {
        s.note = "fewer than 3 records with corrections";
    } else {
        s.spearman = spearman(dist, diff);
        if (!s.spearman) {
            s.note = "zero variance";
        }
    }
    return s;
}

json ObjectiveSummary::to_json() const {
    json pts = json::array();
    for (const auto& [d, v] : scatter) {
        pts.push_back({{"rmsd_correct", d}, {"rating_difference", v}});
    }
    json j = {{"n", scatter.size()}, {"spearman", opt(spearman)}, {"scatter", pts}};
    if (!note.empty()) {
        j["note"] = note;
    }
    return j;
}

std::string ObjectiveSummary::scatter_csv() const {
    std::string out = "rmsd_correct,rating_difference\n";
    for (const auto& [d, v] : scatter) {
        out += fmt(d) + "," + fmt(v) + "\n";
    }
    return out;
}

}  // namespace tablepref
