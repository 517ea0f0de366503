// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

#include "tablepref/angles.hpp"
#include "tablepref/error.hpp"

namespace tablepref {

int hamming(const ObjectSpec& a, const ObjectSpec& b) noexcept {
    return (a.cls != b.cls) + (a.color1 != b.color1) + (a.color2 != b.color2) + (a.material1 != b.material1) +
           (a.material2 != b.material2);
}

namespace {

std::vector<std::vector<int>> distance_matrix(const Arrangement& gt, const Arrangement& pred,
                                              const Catalog& catalog) {
    std::vector<const ObjectSpec*> p;
    for (const auto& q : pred.placements) p.push_back(&catalog.at(q.object));
    std::vector<std::vector<int>> d;
    for (const auto& g : gt.placements) {
        const ObjectSpec& o = catalog.at(g.object);
        std::vector<int> row;
        for (const auto* q : p) row.push_back(hamming(o, *q));
        d.push_back(std::move(row));
    }
    return d;
}

MatchResult greedy(const std::vector<std::vector<int>>& d, std::size_t n_pred) {
    MatchResult r;
    std::vector<bool> claimed(n_pred, false);
    for (std::size_t i = 0; i < d.size() && r.size() < n_pred; ++i) {
        std::size_t best = n_pred;
        for (std::size_t j = 0; j < n_pred; ++j) {
            if (!claimed[j] && (best == n_pred || d[i][j] < d[i][best])) {
                best = j;
            }
        }
        claimed[best] = true;
        r.pairs.push_back({i, best, d[i][best]});
    }
    return r;
}

// Hungarian algorithm (potentials form) on a rows <= cols cost matrix.
MatchResult optimal(const std::vector<std::vector<int>>& d, std::size_t n_pred) {
    const std::size_t n_gt = d.size();
    if (n_gt == 0 || n_pred == 0) {
        return {};
    }
    const bool transpose = n_gt > n_pred;
    const std::size_t n = transpose ? n_pred : n_gt;
    const std::size_t m = transpose ? n_gt : n_pred;
    auto cost = [&](std::size_t i, std::size_t j) { return transpose ? d[j][i] : d[i][j]; };
    constexpr long kInf = std::numeric_limits<long>::max() / 4;
    std::vector<long> u(n + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<long> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            long delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const long cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    MatchResult r;
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        const std::size_t row = p[j] - 1;
        const std::size_t col = j - 1;
        const std::size_t gi = transpose ? col : row;
        const std::size_t pj = transpose ? row : col;
        r.pairs.push_back({gi, pj, d[gi][pj]});
    }
    std::sort(r.pairs.begin(), r.pairs.end(), [](const MatchPair& a, const MatchPair& b) { return a.gt < b.gt; });
    return r;
}

}  // namespace

MatchResult match(const Arrangement& gt, const Arrangement& pred, const Catalog& catalog, MatchStrategy strategy) {
    const auto d = distance_matrix(gt, pred, catalog);
    return strategy == MatchStrategy::Greedy ? greedy(d, pred.length()) : optimal(d, pred.length());
}

double Registration::angle_degrees() const {
    return std::atan2(rotation(1, 0), rotation(0, 0)) * 180.0 / std::numbers::pi;
}

Registration kabsch(std::span<const Eigen::Vector2d> gt, std::span<const Eigen::Vector2d> pred) {
    if (gt.size() != pred.size()) {
        throw RegistrationError("point sets differ in length (" + std::to_string(gt.size()) + " vs " +
                                std::to_string(pred.size()) + ")");
    }
    if (gt.empty()) {
        throw RegistrationError("cannot register empty point sets");
    }
    const auto n = static_cast<double>(gt.size());
    Eigen::Vector2d c_gt = Eigen::Vector2d::Zero();
    Eigen::Vector2d c_pred = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < gt.size(); ++i) {
        c_gt += gt[i];
        c_pred += pred[i];
    }
    c_gt /= n;
    c_pred /= n;

    Registration reg;
    if (gt.size() == 1) {
        reg.translation = pred[0] - gt[0];
        reg.rmsd = 0.0;
        return reg;
    }

    // Cross-covariance of centred predicted and ground-truth points.
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < gt.size(); ++i) {
        h += (pred[i] - c_pred) * (gt[i] - c_gt).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix2d u = svd.matrixU();
    const Eigen::Matrix2d v = svd.matrixV();
    Eigen::Matrix2d sign = Eigen::Matrix2d::Identity();
    sign(1, 1) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    reg.rotation = v * sign * u.transpose();
    reg.translation = c_pred - reg.rotation.transpose() * c_gt;

    double sum = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        sum += (gt[i] - reg.rotation * (pred[i] - reg.translation)).squaredNorm();
    }
    reg.rmsd = std::sqrt(std::max(0.0, sum / n));
    return reg;
}

EvalReport evaluate(const Arrangement& gt, const Arrangement& pred, const Catalog& catalog, MatchStrategy strategy) {
    EvalReport report;
    report.matching = match(gt, pred, catalog, strategy);
    const std::size_t n = report.matching.size();
    report.unmatched_gt = gt.length() - n;
    report.unmatched_pred = pred.length() - n;
    if (n == 0) {
        return report;
    }
    std::vector<Eigen::Vector2d> a, b;
    std::size_t exact = 0;
    double rot_err = 0.0;
    for (const auto& pr : report.matching.pairs) {
        const Placement& g = gt.placements[pr.gt];
        const Placement& p = pred.placements[pr.pred];
        a.emplace_back(g.x, g.y);
        b.emplace_back(p.x, p.y);
        exact += g.object == p.object;
        rot_err += circular_distance_deg(g.rotation, p.rotation);
    }
    report.accuracy = static_cast<double>(exact) / static_cast<double>(gt.length());
    report.all_correct = exact == gt.length();
    report.registration = kabsch(a, b);
    report.rmsd = report.registration->rmsd;
    report.rotation_error = rot_err / static_cast<double>(n);
    return report;
}

std::optional<double> displacement_rmsd(const Arrangement& reference, const Arrangement& moved,
                                        const Catalog& catalog) {
    const MatchResult m = match(reference, moved, catalog);
    if (m.size() == 0) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (const auto& pr : m.pairs) {
        const Placement& a = reference.placements[pr.gt];
        const Placement& b = moved.placements[pr.pred];
        sum += (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
    }
    return std::sqrt(sum / static_cast<double>(m.size()));
}

void to_json(nlohmann::json& j, const EvalReport& r) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.matching.pairs) {
        pairs.push_back({{"gt", p.gt}, {"pred", p.pred}, {"hamming", p.distance}});
    }
    j = {{"accuracy", r.accuracy},
         {"all_correct", r.all_correct},
         {"rmsd", r.rmsd ? nlohmann::json(*r.rmsd) : nlohmann::json(nullptr)},
         {"rmsd_defined", r.rmsd.has_value()},
         {"matched", r.matching.size()},
         {"pairs", pairs},
         {"unmatched_gt", r.unmatched_gt},
         {"unmatched_pred", r.unmatched_pred},
         {"rotation_error", r.rotation_error ? nlohmann::json(*r.rotation_error) : nlohmann::json(nullptr)}};
    if (r.registration) {
        const auto& reg = *r.registration;
        j["registration"] = {
            {"rotation", {{reg.rotation(0, 0), reg.rotation(0, 1)}, {reg.rotation(1, 0), reg.rotation(1, 1)}}},
            {"translation", {reg.translation.x(), reg.translation.y()}},
            {"angle_degrees", reg.angle_degrees()}};
    } else {
        j["registration"] = nullptr;
    }
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    try {
        EvalReport r;
        r.accuracy = j.at("accuracy").get<double>();
        r.all_correct = j.value("all_correct", false);
        if (j.contains("rmsd") && !j["rmsd"].is_null()) {
            r.rmsd = j["rmsd"].get<double>();
        }
        for (const auto& p : j.value("pairs", nlohmann::json::array())) {
            r.matching.pairs.push_back({p.at("gt").get<std::size_t>(), p.at("pred").get<std::size_t>(),
                                        p.at("hamming").get<int>()});
        }
        r.unmatched_gt = j.value("unmatched_gt", std::size_t{0});
        r.unmatched_pred = j.value("unmatched_pred", std::size_t{0});
        if (j.contains("rotation_error") && !j["rotation_error"].is_null()) {
            r.rotation_error = j["rotation_error"].get<double>();
        }
        if (j.contains("registration") && !j["registration"].is_null()) {
            const auto& g = j["registration"];
            Registration reg;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) reg.rotation(a, b) = g.at("rotation")[a][b].get<double>();
            reg.translation = {g.at("translation")[0].get<double>(), g.at("translation")[1].get<double>()};
            reg.rmsd = r.rmsd.value_or(0.0);
            r.registration = reg;
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("eval report: ") + e.what());
    }
}

}  // namespace tablepref
