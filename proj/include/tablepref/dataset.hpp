// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/acceptability.hpp"
#include "tablepref/catalog.hpp"
#include "tablepref/error.hpp"
#include "tablepref/scene.hpp"
#include "tablepref/simulation.hpp"

namespace tablepref {

inline constexpr int kStoreSchemaVersion = 1;
inline constexpr int kTrialsPerSession = 6;  // trial 0 is the practice round
inline constexpr int kExperimentalTrials = 5;

struct TrialSlot {
    int index = 0;
    std::string table;
    bool practice = false;

    bool operator==(const TrialSlot&) const = default;
};

struct Session {
    std::string id;
    std::string participant;  // opaque handle
    std::string created_at;   // UTC, ISO 8601
    std::uint64_t seed = 0;   // drives this session's jitter draws
    std::vector<TrialSlot> trials;

    const TrialSlot& trial(int index) const;  // throws NotFoundError
    bool operator==(const Session&) const = default;
};

nlohmann::json to_json(const Session& s);
Session session_from_json(const nlohmann::json& j);

enum class RatingPhase { Baseline, Jitter, Correction };

std::string_view to_string(RatingPhase p);
/// "baseline", "jitter" or "correction". Throws ValidationError.
RatingPhase parse_rating_phase(std::string_view s);

struct JitterDraw {
    double t = 0.0;
    std::uint64_t seed = 0;
    Arrangement arrangement;

    bool operator==(const JitterDraw&) const = default;
};

/// Everything stored for one (session, trial).
struct StudyRecord {
    std::string session;
    int trial = 0;
    bool practice = false;
    std::string table;
    std::optional<Arrangement> arrangement;
    std::optional<JitterDraw> jitter;
    std::optional<Arrangement> correction;
    std::array<std::optional<double>, 3> ratings;  // indexed by RatingPhase, normalized to [0, 1]

    std::optional<double> rating(RatingPhase p) const { return ratings[static_cast<std::size_t>(p)]; }
    /// All three arrangements and all three ratings present.
    bool complete() const;
    /// Names of the missing parts, e.g. "b_correct".
    std::vector<std::string> missing() const;

    bool operator==(const StudyRecord&) const = default;
};

nlohmann::json to_json(const StudyRecord& r);
StudyRecord study_record_from_json(const nlohmann::json& j);

/// Schema-versioned JSON files under a root directory:
///   sessions/<id>/session.json
///   sessions/<id>/trial_<k>/{arrangement,jitter,correction,rating_<phase>}.json
/// Every phase file is written once. Re-submitting identical content is a
/// no-op; different content raises ConflictError. Writes for one session are
/// serialized; different sessions proceed concurrently.
class DatasetStore {
public:
    explicit DatasetStore(std::string root);

    const std::string& root() const noexcept { return root_; }

    /// Trial 0 (practice) and trials 1-5 each get a table, in an order shuffled by `seed`.
    Session create_session(const std::string& participant, std::span<const std::string> tables, std::uint64_t seed);
    Session load_session(const std::string& id) const;
    std::vector<std::string> session_ids() const;

    /// Returns false when the identical content was already stored.
    /// Throws ValidationError unless the arrangement is study-valid and on the trial's table.
    bool put_arrangement(const std::string& session, int trial, const Arrangement& a);
    /// `slider` is on the 0-100 scale. Requires the arrangement the phase rates.
    bool put_rating(const std::string& session, int trial, RatingPhase phase, double slider);
    /// Draws and stores the jitter for a trial, or returns the stored one.
    JitterDraw draw_jitter(const std::string& session, int trial, const JitterConfig& cfg = {});
    /// Requires the jitter to have been drawn.
    bool put_correction(const std::string& session, int trial, const Arrangement& a);

    /// Loads every stored phase. Throws NotFoundError for unknown sessions/trials
    /// and DecodeError (with the file path) for corrupt files.
    StudyRecord load_record(const std::string& session, int trial) const;
    /// All trials of all sessions, in (session, trial) order.
    std::vector<StudyRecord> records(bool include_practice = false) const;

    /// One StudyRecord JSON per line.
    void export_jsonl(const std::string& path, bool include_practice = false) const;

private:
    std::mutex& session_mutex(const std::string& id) const;
    std::string trial_dir(const std::string& session, int trial) const;
    bool write_once(const std::string& path, const nlohmann::json& payload);

    std::string root_;
    mutable std::mutex registry_mu_;
    mutable std::map<std::string, std::unique_ptr<std::mutex>> session_mu_;
};

/// Reads a JSON-lines export back.
std::vector<StudyRecord> read_records_jsonl(const std::string& path);

/// Session ids whose five experimental trials are all complete.
std::vector<std::string> complete_sessions(std::span<const StudyRecord> records);
/// Records of complete sessions only, practice excluded.
std::vector<StudyRecord> filter_complete(std::span<const StudyRecord> records);

/// Rating rows for the acceptability analysis. Distances are unregistered
/// displacement RMSDs between the elicited arrangement and its jittered and
/// corrected versions. Records lacking baseline/jitter data are skipped.
std::vector<RatingRecord> rating_records(std::span<const StudyRecord> records, const Catalog& catalog);

struct ContextSplit {
    std::string session;
    PreferenceContext context;
    Arrangement held_out;
    int held_out_trial = 0;
};

struct ContextBuild {
    std::vector<ContextSplit> splits;
    std::vector<std::string> skipped;  // "<session>: reason"
};

/// Per session: the first C study-valid experimental arrangements (trial order)
/// form the context and the next one is held out.
ContextBuild build_contexts(std::span<const StudyRecord> records, int context_length);

/// Case directory per split plus manifest.json, in the benchmark layout
/// (cases/<session>_k<C>/...), so predict and eval-batch can consume it.
void write_context_cases(const ContextBuild& build, int context_length, const std::string& dir,
                         const std::string& catalog_ref);

}  // namespace tablepref
