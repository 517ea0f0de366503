// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "tablepref/evaluation.hpp"
#include "tablepref/io.hpp"

namespace tablepref {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void check_id(const std::string& id) {
    const bool ok = !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-';
    });
    if (!ok) {
        throw NotFoundError("unknown session '" + id + "'");
    }
}

json phase_header(const std::string& session, int trial, const std::string& phase) {
    return {{"schema_version", kStoreSchemaVersion}, {"session", session}, {"trial", trial}, {"phase", phase}};
}

std::string rating_file(RatingPhase p) { return "rating_" + std::string(to_string(p)) + ".json"; }

json read_versioned(const std::string& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const Error& e) {
        throw DecodeError(path + ": " + e.what());
    }
    if (!j.is_object() || j.value("schema_version", 0) != kStoreSchemaVersion) {
        throw DecodeError(path + ": schema mismatch (expected schema_version " + std::to_string(kStoreSchemaVersion) +
                          ")");
    }
    return j;
}

template <typename F>
auto decode_at(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw DecodeError(path + ": " + e.what());
    } catch (const DecodeError& e) {
        throw DecodeError(path + ": " + e.what());
    }
}

void require_study_valid(const Arrangement& a, const TrialSlot& slot) {
    if (a.placements.size() < kStudyMinimumObjects) {
        throw ValidationError("arrangement needs at least " + std::to_string(kStudyMinimumObjects) + " objects, got " +
                              std::to_string(a.placements.size()));
    }
    if (!arrangement_valid_for_study(a)) {
        throw ValidationError("arrangement has placements outside the table or unnormalized rotations");
    }
    if (a.table != slot.table) {
        throw ValidationError("trial " + std::to_string(slot.index) + " uses table '" + slot.table + "', got '" +
                              a.table + "'");
    }
}

}  // namespace

const TrialSlot& Session::trial(int index) const {
    for (const TrialSlot& t : trials) {
        if (t.index == index) {
            return t;
        }
    }
    throw NotFoundError("session " + id + " has no trial " + std::to_string(index));
}

json to_json(const Session& s) {
    json trials = json::array();
    for (const TrialSlot& t : s.trials) {
        trials.push_back({{"index", t.index}, {"table", t.table}, {"practice", t.practice}});
    }
    return {{"schema_version", kStoreSchemaVersion},
            {"id", s.id},
            {"participant", s.participant},
            {"created_at", s.created_at},
            {"seed", s.seed},
            {"trials", trials}};
}

Session session_from_json(const json& j) {
    Session s;
    s.id = j.at("id").get<std::string>();
    s.participant = j.at("participant").get<std::string>();
    s.created_at = j.at("created_at").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const json& t : j.at("trials")) {
        s.trials.push_back({t.at("index").get<int>(), t.at("table").get<std::string>(), t.at("practice").get<bool>()});
    }
    return s;
}

std::string_view to_string(RatingPhase p) {
    switch (p) {
        case RatingPhase::Baseline: return "baseline";
        case RatingPhase::Jitter: return "jitter";
        case RatingPhase::Correction: return "correction";
    }
    return "?";
}

RatingPhase parse_rating_phase(std::string_view s) {
    for (RatingPhase p : {RatingPhase::Baseline, RatingPhase::Jitter, RatingPhase::Correction}) {
        if (to_string(p) == s) {
            return p;
        }
    }
    throw ValidationError("unknown rating phase '" + std::string(s) + "' (expected baseline, jitter or correction)");
}

bool StudyRecord::complete() const { return missing().empty(); }

std::vector<std::string> StudyRecord::missing() const {
    std::vector<std::string> out;
    if (!arrangement) out.push_back("arrangement");
    if (!jitter) out.push_back("jitter");
    if (!correction) out.push_back("correction");
    if (!ratings[0]) out.push_back("b_initial");
    if (!ratings[1]) out.push_back("b_jitter");
    if (!ratings[2]) out.push_back("b_correct");
    return out;
}

json to_json(const StudyRecord& r) {
    auto opt_arr = [](const std::optional<Arrangement>& a) { return a ? json(*a) : json(nullptr); };
    auto opt_num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j = {{"schema_version", kStoreSchemaVersion},
              {"session", r.session},
              {"trial", r.trial},
              {"practice", r.practice},
              {"table", r.table},
              {"arrangement", opt_arr(r.arrangement)},
              {"correction", opt_arr(r.correction)},
              {"b_initial", opt_num(r.ratings[0])},
              {"b_jitter", opt_num(r.ratings[1])},
              {"b_correct", opt_num(r.ratings[2])},
              {"complete", r.complete()}};
    j["jitter"] = r.jitter ? json{{"t", r.jitter->t}, {"seed", r.jitter->seed}, {"arrangement", r.jitter->arrangement}}
                           : json(nullptr);
    return j;
}

StudyRecord study_record_from_json(const json& j) {
    if (j.value("schema_version", 0) != kStoreSchemaVersion) {
        throw DecodeError("study record: schema mismatch");
    }
    try {
        StudyRecord r;
        r.session = j.at("session").get<std::string>();
        r.trial = j.at("trial").get<int>();
        r.practice = j.at("practice").get<bool>();
        r.table = j.at("table").get<std::string>();
        if (!j.at("arrangement").is_null()) r.arrangement = j.at("arrangement").get<Arrangement>();
        if (!j.at("correction").is_null()) r.correction = j.at("correction").get<Arrangement>();
        if (const json& jt = j.at("jitter"); !jt.is_null()) {
            r.jitter = JitterDraw{jt.at("t").get<double>(), jt.at("seed").get<std::uint64_t>(),
                                  jt.at("arrangement").get<Arrangement>()};
        }
        const char* names[3] = {"b_initial", "b_jitter", "b_correct"};
        for (std::size_t k = 0; k < 3; ++k) {
            if (!j.at(names[k]).is_null()) r.ratings[k] = j.at(names[k]).get<double>();
        }
        return r;
    } catch (const json::exception& e) {
        throw DecodeError(std::string("study record: ") + e.what());
    }
}

DatasetStore::DatasetStore(std::string root) : root_(std::move(root)) {
    fs::create_directories(fs::path(root_) / "sessions");
    const fs::path schema = fs::path(root_) / "schema.json";
    if (fs::exists(schema)) {
        read_versioned(schema.string());
    } else {
        write_json_file(schema.string(), json{{"schema_version", kStoreSchemaVersion}, {"kind", "study_store"}});
    }
}

std::mutex& DatasetStore::session_mutex(const std::string& id) const {
    std::lock_guard lock(registry_mu_);
    auto& slot = session_mu_[id];
    if (!slot) {
        slot = std::make_unique<std::mutex>();
    }
    return *slot;
}

std::string DatasetStore::trial_dir(const std::string& session, int trial) const {
    return (fs::path(root_) / "sessions" / session / ("trial_" + std::to_string(trial))).string();
}

bool DatasetStore::write_once(const std::string& path, const json& payload) {
    if (fs::exists(path)) {
        if (read_versioned(path) == payload) {
            return false;
        }
        throw ConflictError(fs::path(path).stem().string() + " was already submitted with different content");
    }
    write_json_file(path, payload);
    return true;
}

Session DatasetStore::create_session(const std::string& participant, std::span<const std::string> tables,
                                     std::uint64_t seed) {
    if (tables.empty()) {
        throw ConfigError("no tables available for a session");
    }
    std::mt19937_64 rng(seed);
    Session s;
    s.participant = participant;
    s.created_at = utc_now();
    s.seed = rng();
    std::vector<std::string> order(tables.begin(), tables.end());
    std::shuffle(order.begin(), order.end(), rng);
    const std::string practice = tables[std::uniform_int_distribution<std::size_t>(0, tables.size() - 1)(rng)];
    s.trials.push_back({0, practice, true});
    for (int k = 1; k <= kExperimentalTrials; ++k) {
        s.trials.push_back({k, order[static_cast<std::size_t>(k - 1) % order.size()], false});
    }
    std::lock_guard lock(registry_mu_);
    for (;;) {
        char id[24];
        std::snprintf(id, sizeof id, "s%016llx", static_cast<unsigned long long>(rng()));
        s.id = id;
        const fs::path dir = fs::path(root_) / "sessions" / s.id;
        if (fs::create_directory(dir)) {
            write_json_file((dir / "session.json").string(), to_json(s));
            return s;
        }
    }
}

Session DatasetStore::load_session(const std::string& id) const {
    check_id(id);
    const fs::path file = fs::path(root_) / "sessions" / id / "session.json";
    if (!fs::exists(file)) {
        throw NotFoundError("unknown session '" + id + "'");
    }
    const json j = read_versioned(file.string());
    return decode_at(file.string(), [&] { return session_from_json(j); });
}

std::vector<std::string> DatasetStore::session_ids() const {
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(fs::path(root_) / "sessions")) {
        if (e.is_directory() && fs::exists(e.path() / "session.json")) {
            ids.push_back(e.path().filename().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

bool DatasetStore::put_arrangement(const std::string& session, int trial, const Arrangement& a) {
    const Session s = load_session(session);
    const TrialSlot& slot = s.trial(trial);
    require_study_valid(a, slot);
    json payload = phase_header(session, trial, "arrangement");
    payload["arrangement"] = a;
    std::lock_guard lock(session_mutex(session));
    return write_once(trial_dir(session, trial) + "/arrangement.json", payload);
}

bool DatasetStore::put_rating(const std::string& session, int trial, RatingPhase phase, double slider) {
    const Session s = load_session(session);
    s.trial(trial);
    if (!(slider >= 0.0 && slider <= 100.0)) {
        throw ValidationError("rating must lie in [0, 100]");
    }
    std::lock_guard lock(session_mutex(session));
    const std::string dir = trial_dir(session, trial);
    const char* needs = phase == RatingPhase::Baseline ? "arrangement" : phase == RatingPhase::Jitter ? "jitter" : "correction";
    if (!fs::exists(dir + "/" + needs + ".json")) {
        throw ValidationError(std::string(to_string(phase)) + " rating requires the " + needs + " first");
    }
    json payload = phase_header(session, trial, "rating_" + std::string(to_string(phase)));
    payload["slider"] = slider;
    payload["rating"] = slider / 100.0;
    return write_once(dir + "/" + rating_file(phase), payload);
}

JitterDraw DatasetStore::draw_jitter(const std::string& session, int trial, const JitterConfig& cfg) {
    const Session s = load_session(session);
    s.trial(trial);
    std::lock_guard lock(session_mutex(session));
    const std::string dir = trial_dir(session, trial);
    const std::string file = dir + "/jitter.json";
    if (fs::exists(file)) {
        const json j = read_versioned(file);
        return decode_at(file, [&] {
            return JitterDraw{j.at("t").get<double>(), j.at("seed").get<std::uint64_t>(),
                              j.at("arrangement").get<Arrangement>()};
        });
    }
    if (!fs::exists(dir + "/arrangement.json")) {
        throw ValidationError("jitter requires the arrangement first");
    }
    const json stored = read_versioned(dir + "/arrangement.json");
    const Arrangement a = decode_at(dir + "/arrangement.json", [&] { return stored.at("arrangement").get<Arrangement>(); });
    JitterDraw d;
    d.seed = mix(s.seed, static_cast<std::uint64_t>(trial));
    d.t = draw_jitter_magnitude(d.seed);
    d.arrangement = jitter(a, d.t, d.seed, cfg);
    json payload = phase_header(session, trial, "jitter");
    payload["t"] = d.t;
    payload["seed"] = d.seed;
    payload["max_shift"] = cfg.max_shift;
    payload["max_rotation"] = cfg.max_rotation;
    payload["arrangement"] = d.arrangement;
    write_json_file(file, payload);
    return d;
}

bool DatasetStore::put_correction(const std::string& session, int trial, const Arrangement& a) {
    const Session s = load_session(session);
    const TrialSlot& slot = s.trial(trial);
    require_study_valid(a, slot);
    std::lock_guard lock(session_mutex(session));
    const std::string dir = trial_dir(session, trial);
    if (!fs::exists(dir + "/jitter.json")) {
        throw ValidationError("correction requires the jitter first");
    }
    json payload = phase_header(session, trial, "correction");
    payload["arrangement"] = a;
    return write_once(dir + "/correction.json", payload);
}

StudyRecord DatasetStore::load_record(const std::string& session, int trial) const {
    const Session s = load_session(session);
    const TrialSlot& slot = s.trial(trial);
    StudyRecord r;
    r.session = session;
    r.trial = trial;
    r.practice = slot.practice;
    r.table = slot.table;
    const std::string dir = trial_dir(session, trial);
    auto read_arrangement = [&](const std::string& name) -> std::optional<Arrangement> {
        const std::string file = dir + "/" + name;
        if (!fs::exists(file)) {
            return std::nullopt;
        }
        const json j = read_versioned(file);
        return decode_at(file, [&] { return j.at("arrangement").get<Arrangement>(); });
    };
    r.arrangement = read_arrangement("arrangement.json");
    r.correction = read_arrangement("correction.json");
    if (const std::string file = dir + "/jitter.json"; fs::exists(file)) {
        const json j = read_versioned(file);
        r.jitter = decode_at(file, [&] {
            return JitterDraw{j.at("t").get<double>(), j.at("seed").get<std::uint64_t>(),
                              j.at("arrangement").get<Arrangement>()};
        });
    }
    for (RatingPhase p : {RatingPhase::Baseline, RatingPhase::Jitter, RatingPhase::Correction}) {
        const std::string file = dir + "/" + rating_file(p);
        if (fs::exists(file)) {
            const json j = read_versioned(file);
            r.ratings[static_cast<std::size_t>(p)] = decode_at(file, [&] { return j.at("rating").get<double>(); });
        }
    }
    return r;
}

std::vector<StudyRecord> DatasetStore::records(bool include_practice) const {
    std::vector<StudyRecord> out;
    for (const std::string& id : session_ids()) {
        const Session s = load_session(id);
        for (const TrialSlot& t : s.trials) {
            if (include_practice || !t.practice) {
                out.push_back(load_record(id, t.index));
            }
        }
    }
    return out;
}

void DatasetStore::export_jsonl(const std::string& path, bool include_practice) const {
    std::string text;
    for (const StudyRecord& r : records(include_practice)) {
        text += to_json(r).dump() + "\n";
    }
    write_file_atomic(path, text);
}

std::vector<StudyRecord> read_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw LoadError("cannot open " + path);
    }
    std::vector<StudyRecord> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(study_record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw DecodeError(path + ":" + std::to_string(n) + ": " + e.what());
        } catch (const DecodeError& e) {
            throw DecodeError(path + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

std::vector<std::string> complete_sessions(std::span<const StudyRecord> records) {
    std::map<std::string, std::set<int>> done;
    for (const StudyRecord& r : records) {
        done[r.session];
        if (!r.practice && r.trial >= 1 && r.trial <= kExperimentalTrials && r.complete()) {
            done[r.session].insert(r.trial);
        }
    }
    std::vector<std::string> out;
    for (const auto& [session, trials] : done) {
        if (trials.size() == static_cast<std::size_t>(kExperimentalTrials)) {
            out.push_back(session);
        }
    }
    return out;
}

std::vector<StudyRecord> filter_complete(std::span<const StudyRecord> records) {
    const auto keep = complete_sessions(records);
    std::vector<StudyRecord> out;
    for (const StudyRecord& r : records) {
        if (!r.practice && std::binary_search(keep.begin(), keep.end(), r.session)) {
            out.push_back(r);
        }
    }
    return out;
}

std::vector<RatingRecord> rating_records(std::span<const StudyRecord> records, const Catalog& catalog) {
    std::vector<RatingRecord> out;
    for (const StudyRecord& r : records) {
        if (!r.arrangement || !r.jitter || !r.rating(RatingPhase::Baseline) || !r.rating(RatingPhase::Jitter)) {
            continue;
        }
        const auto d_jitter = displacement_rmsd(*r.arrangement, r.jitter->arrangement, catalog);
        if (!d_jitter) {
            continue;
        }
        RatingRecord rr;
        rr.session = r.session;
        rr.trial = r.trial;
        rr.b_initial = *r.rating(RatingPhase::Baseline);
        rr.b_jitter = *r.rating(RatingPhase::Jitter);
        rr.b_correct = r.rating(RatingPhase::Correction);
        rr.t_jitter = r.jitter->t;
        rr.rmsd_jitter = *d_jitter;
        if (r.correction) {
            rr.rmsd_correct = displacement_rmsd(*r.arrangement, *r.correction, catalog);
        }
        out.push_back(rr);
    }
    return out;
}

ContextBuild build_contexts(std::span<const StudyRecord> records, int context_length) {
    if (context_length < 0) {
        throw ConfigError("context length must be non-negative");
    }
    std::map<std::string, std::vector<const StudyRecord*>> by_session;
    for (const StudyRecord& r : records) {
        if (!r.practice) {
            by_session[r.session].push_back(&r);
        }
    }
    ContextBuild out;
    const auto need = static_cast<std::size_t>(context_length) + 1;
    for (auto& [session, recs] : by_session) {
        std::sort(recs.begin(), recs.end(), [](const StudyRecord* a, const StudyRecord* b) { return a->trial < b->trial; });
        std::vector<const StudyRecord*> valid;
        for (const StudyRecord* r : recs) {
            if (r->arrangement && arrangement_valid_for_study(*r->arrangement)) {
                valid.push_back(r);
            }
        }
        if (valid.size() < need) {
            out.skipped.push_back(session + ": " + std::to_string(valid.size()) + " study-valid trial(s), need " +
                                  std::to_string(need));
            continue;
        }
        ContextSplit split;
        split.session = session;
        split.context.owner = session;
        for (std::size_t k = 0; k < need - 1; ++k) {
            split.context.entries.push_back({*valid[k]->arrangement, ""});
        }
        split.held_out = *valid[need - 1]->arrangement;
        split.held_out_trial = valid[need - 1]->trial;
        out.splits.push_back(std::move(split));
    }
    return out;
}

void write_context_cases(const ContextBuild& build, int context_length, const std::string& dir,
                         const std::string& catalog_ref) {
    json cases = json::array();
    for (const ContextSplit& s : build.splits) {
        ExperimentCase c;
        c.id = s.session + "_k" + std::to_string(context_length);
        c.ground_truth = s.held_out;
        for (const PreferenceEntry& e : s.context.entries) {
            c.context.push_back(e.arrangement);
        }
        c.context_table = c.context.empty() ? s.held_out.table : c.context.back().table;
        c.split = c.context_table == c.target_table() ? Split::Reconstruction : Split::Generalization;
        const std::string rel = "cases/" + c.id;
        write_case(c, (fs::path(dir) / rel).string());
        cases.push_back({{"id", c.id},
                         {"dir", rel},
                         {"split", std::string(to_string(c.split))},
                         {"session", s.session},
                         {"held_out_trial", s.held_out_trial},
                         {"context_table", c.context_table},
                         {"target_table", c.target_table()}});
    }
    json manifest = {{"schema_version", kStoreSchemaVersion}, {"kind", "study_contexts"},
                     {"context_length", context_length},       {"catalog", catalog_ref},
                     {"skipped", build.skipped},               {"cases", cases}};
    write_json_file((fs::path(dir) / "manifest.json").string(), manifest);
}

}  // namespace tablepref
