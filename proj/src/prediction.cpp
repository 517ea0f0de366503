// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/prediction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>

#include "tablepref/angles.hpp"

namespace tablepref {

namespace {

using json = nlohmann::json;

// UTF-8 typographic quotes.
constexpr std::string_view kLsquo = "\xE2\x80\x98";
constexpr std::string_view kRsquo = "\xE2\x80\x99";
constexpr std::string_view kLdquo = "\xE2\x80\x9C";
constexpr std::string_view kRdquo = "\xE2\x80\x9D";

class LiteralReader {
public:
    LiteralReader(std::string_view text, std::size_t pos) : s_(text), i_(pos) {}

    json value() {
        skip_ws();
        if (i_ >= s_.size()) {
            fail("unexpected end of input");
        }
        const char c = s_[i_];
        if (c == '{') {
            return dict();
        }
        if (c == '[') {
            return sequence('[', ']');
        }
        if (c == '(') {
            return sequence('(', ')');
        }
        if (auto closers = open_quote()) {
            return json(string_body(*closers));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return bare_word();
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    std::size_t pos() const noexcept { return i_; }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ResponseParseError(what + " at offset " + std::to_string(i_));
    }

    void skip_ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
            ++i_;
        }
    }

    bool consume(std::string_view token) {
        if (s_.substr(i_, token.size()) == token) {
            i_ += token.size();
            return true;
        }
        return false;
    }

    // Returns the accepted closing quotes when positioned at an opening quote.
    std::optional<std::vector<std::string_view>> open_quote() {
        if (consume("'")) {
            return std::vector<std::string_view>{"'", kRsquo};
        }
        if (consume("\"")) {
            return std::vector<std::string_view>{"\"", kRdquo};
        }
        if (consume("`")) {
            return std::vector<std::string_view>{"'", "`", kRsquo};
        }
        if (consume(kLsquo)) {
            return std::vector<std::string_view>{kRsquo, "'"};
        }
        if (consume(kLdquo)) {
            return std::vector<std::string_view>{kRdquo, "\""};
        }
        return std::nullopt;
    }

    std::string string_body(const std::vector<std::string_view>& closers) {
        std::string out;
        while (i_ < s_.size()) {
            for (std::string_view q : closers) {
                if (consume(q)) {
                    return out;
                }
            }
            char c = s_[i_++];
            if (c == '\\' && i_ < s_.size()) {
                const char e = s_[i_++];
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    default: c = e; break;
                }
            }
            out.push_back(c);
        }
        fail("unterminated string");
    }

    json number() {
        const std::size_t start = i_;
        if (s_[i_] == '+' || s_[i_] == '-') {
            ++i_;
        }
        bool is_float = false;
        while (i_ < s_.size()) {
            const char c = s_[i_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                ++i_;
            } else if (c == '.' || c == 'e' || c == 'E') {
                is_float = true;
                ++i_;
                if ((c == 'e' || c == 'E') && i_ < s_.size() && (s_[i_] == '+' || s_[i_] == '-')) {
                    ++i_;
                }
            } else {
                break;
            }
        }
        std::string_view tok = s_.substr(start, i_ - start);
        if (!tok.empty() && tok.front() == '+') {
            tok.remove_prefix(1);
        }
        if (!is_float) {
            long long v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec == std::errc() && p == tok.data() + tok.size()) {
                return json(v);
            }
        }
        double d = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (ec != std::errc() || p != tok.data() + tok.size()) {
            fail("malformed number '" + std::string(tok) + "'");
        }
        return json(d);
    }

    json bare_word() {
        const std::size_t start = i_;
        while (i_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '-')) {
            ++i_;
        }
        const std::string_view w = s_.substr(start, i_ - start);
        if (w == "True" || w == "true") {
            return json(true);
        }
        if (w == "False" || w == "false") {
            return json(false);
        }
        if (w == "None" || w == "null") {
            return json(nullptr);
        }
        return json(std::string(w));
    }

    json sequence(char open, char close) {
        (void)open;
        ++i_;
        json arr = json::array();
        while (true) {
            skip_ws();
            if (i_ < s_.size() && s_[i_] == close) {
                ++i_;
                return arr;
            }
            arr.push_back(value());
            skip_ws();
            if (i_ < s_.size() && s_[i_] == ',') {
                ++i_;
                continue;
            }
            if (i_ < s_.size() && s_[i_] == close) {
                ++i_;
                return arr;
            }
            fail(std::string("expected ',' or '") + close + "'");
        }
    }

    json dict() {
        ++i_;
        json obj = json::object();
        while (true) {
            skip_ws();
            if (i_ < s_.size() && s_[i_] == '}') {
                ++i_;
                return obj;
            }
            json key = value();
            std::string k = key.is_string() ? key.get<std::string>() : key.dump();
            skip_ws();
            if (!(i_ < s_.size() && s_[i_] == ':')) {
                fail("expected ':'");
            }
            ++i_;
            obj[k] = value();
            skip_ws();
            if (i_ < s_.size() && s_[i_] == ',') {
                ++i_;
                continue;
            }
            if (i_ < s_.size() && s_[i_] == '}') {
                ++i_;
                return obj;
            }
            fail("expected ',' or '}'");
        }
    }

    std::string_view s_;
    std::size_t i_;
};

std::string lower_trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

double as_number(const json& v, const char* field) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const std::string s = lower_trim(v.get<std::string>());
        double d = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
        if (ec == std::errc() && p == s.data() + s.size()) {
            return d;
        }
    }
    throw ResponseParseError(std::string(field) + " is not a number: " + v.dump());
}

const json* find_key(const json& obj, std::initializer_list<std::string_view> names) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        const std::string k = lower_trim(it.key());
        for (std::string_view n : names) {
            if (k == n) {
                return &it.value();
            }
        }
    }
    return nullptr;
}

RawStep coerce_step(const json& obj, Method method) {
    RawStep step;
    const json* type = find_key(obj, {"type", "object_type"});
    if (type == nullptr || !type->is_string()) {
        throw ResponseParseError("step has no string 'type'");
    }
    step.type = lower_trim(type->get<std::string>());

    const json* id = find_key(obj, {"id", "object_id", "object_reference_id"});
    if (id == nullptr) {
        throw ResponseParseError("step has no 'id'");
    }
    const double idv = as_number(*id, "id");
    if (!std::isfinite(idv) || idv != std::floor(idv) || std::fabs(idv) > 1e9) {
        throw ResponseParseError("id is not an integer: " + id->dump());
    }
    step.id = static_cast<int>(idv);

    const json* pos = find_key(obj, {"position"});
    if (pos == nullptr) {
        throw ResponseParseError("step has no 'position'");
    }
    if (uses_grid(method)) {
        std::vector<std::string> cells;
        if (pos->is_string()) {
            cells.push_back(pos->get<std::string>());
        } else if (pos->is_array()) {
            for (const json& c : *pos) {
                if (!c.is_string()) {
                    throw ResponseParseError("grid position must list cell ids, got " + pos->dump());
                }
                cells.push_back(c.get<std::string>());
            }
        } else {
            throw ResponseParseError("grid position must list cell ids, got " + pos->dump());
        }
        step.position = std::move(cells);

        const json* dir = find_key(obj, {"cardinal_direction", "direction", "rotation"});
        if (dir == nullptr) {
            throw ResponseParseError("step has no 'cardinal_direction'");
        }
        if (dir->is_number()) {
            step.rotation = degrees_to_cardinal(normalize_rotation(dir->get<double>()));
        } else if (dir->is_string()) {
            try {
                step.rotation = parse_cardinal(lower_trim(dir->get<std::string>()));
            } catch (const DecodeError& e) {
                throw ResponseParseError(e.what());
            }
        } else {
            throw ResponseParseError("cardinal_direction is not a token: " + dir->dump());
        }
    } else {
        if (!pos->is_array() || pos->size() != 2) {
            throw ResponseParseError("position must be [x, y], got " + pos->dump());
        }
        const double x = as_number((*pos)[0], "position[0]");
        const double y = as_number((*pos)[1], "position[1]");
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw ResponseParseError("position is not finite: " + pos->dump());
        }
        step.position = XY{x, y};

        const json* rot = find_key(obj, {"rotation", "degrees"});
        if (rot == nullptr) {
            throw ResponseParseError("step has no 'rotation'");
        }
        if (rot->is_string()) {
            const std::string token = lower_trim(rot->get<std::string>());
            if (!token.empty() && std::isalpha(static_cast<unsigned char>(token.front()))) {
                try {
                    step.rotation = cardinal_to_degrees(parse_cardinal(token));
                    return step;
                } catch (const DecodeError& e) {
                    throw ResponseParseError(e.what());
                }
            }
        }
        const double r = as_number(*rot, "rotation");
        if (!std::isfinite(r)) {
            throw ResponseParseError("rotation is not finite");
        }
        step.rotation = normalize_rotation(r);
    }
    return step;
}

std::size_t class_rank(std::string_view type) {
    if (auto c = try_parse_class(type)) {
        return static_cast<std::size_t>(*c);
    }
    return kAllClasses.size();
}

bool type_before(const std::string& a, const std::string& b) {
    const std::size_t ra = class_rank(a);
    const std::size_t rb = class_rank(b);
    if (ra != rb) {
        return ra < rb;
    }
    return a < b;
}

// Mean of a multiset given as value -> count, relative to its smallest value.
// Identical inputs reproduce that value exactly; doubling every count leaves
// the result bit-identical.
double multiset_mean(const std::map<double, std::size_t>& counts) {
    const double ref = counts.begin()->first;
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& [v, c] : counts) {
        acc += static_cast<double>(c) * (v - ref);
        n += c;
    }
    return ref + acc / static_cast<double>(n);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

json parse_python_literal(std::string_view text) {
    LiteralReader r(text, 0);
    return r.value();
}

Sample parse_response(std::string_view text, Method method) {
    std::string first_error;
    for (std::size_t pos = text.find('['); pos != std::string_view::npos; pos = text.find('[', pos + 1)) {
        json v;
        try {
            LiteralReader r(text, pos);
            v = r.value();
        } catch (const ResponseParseError& e) {
            if (first_error.empty()) {
                first_error = e.what();
            }
            continue;
        }
        if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_object(); })) {
            continue;
        }
        Sample out;
        out.reserve(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) {
            try {
                out.push_back(coerce_step(v[k], method));
            } catch (const ResponseParseError& e) {
                throw ResponseParseError("step " + std::to_string(k) + ": " + e.what());
            }
        }
        return out;
    }
    throw ResponseParseError(first_error.empty() ? "no bracketed list of steps in response"
                                                 : "no parsable list of steps in response (" + first_error + ")");
}

std::size_t aggregate_plan_length(std::span<const Sample> samples) {
    if (samples.empty()) {
        throw AggregationError("no parsed samples to aggregate");
    }
    std::map<std::size_t, std::size_t> counts;
    for (const Sample& s : samples) {
        ++counts[s.size()];
    }
    std::size_t best = 0;
    std::size_t best_count = 0;
    for (const auto& [len, c] : counts) {  // ascending, so ties keep the smaller length
        if (c > best_count) {
            best = len;
            best_count = c;
        }
    }
    return best;
}

std::string aggregate_step_type(std::span<const Sample> samples, std::size_t t) {
    std::map<std::string, std::size_t> counts;
    for (const Sample& s : samples) {
        if (t < s.size()) {
            ++counts[s[t].type];
        }
    }
    if (counts.empty()) {
        throw AggregationError("no sample reaches step " + std::to_string(t));
    }
    const std::string* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [type, c] : counts) {
        if (c > best_count || (c == best_count && type_before(type, *best))) {
            best = &type;
            best_count = c;
        }
    }
    return *best;
}

std::vector<const RawStep*> step_voters(std::span<const Sample> samples, std::size_t t, std::string_view type) {
    std::vector<const RawStep*> out;
    for (const Sample& s : samples) {
        if (t < s.size() && s[t].type == type) {
            out.push_back(&s[t]);
        }
    }
    return out;
}

std::optional<int> aggregate_object_id(std::span<const RawStep* const> voters) {
    if (voters.empty()) {
        return std::nullopt;
    }
    std::map<int, std::size_t> counts;
    for (const RawStep* v : voters) {
        ++counts[v->id];
    }
    int best = 0;
    std::size_t best_count = 0;
    for (const auto& [id, c] : counts) {
        if (c > best_count) {
            best = id;
            best_count = c;
        }
    }
    return best;
}

std::pair<double, double> aggregate_position_unmarked(std::span<const RawStep* const> voters) {
    if (voters.empty()) {
        throw AggregationError("no voters for position");
    }
    std::map<double, std::size_t> xs;
    std::map<double, std::size_t> ys;
    for (const RawStep* v : voters) {
        const auto* p = std::get_if<XY>(&v->position);
        if (p == nullptr) {
            throw AggregationError("unmarked aggregation received a grid position");
        }
        ++xs[(*p)[0]];
        ++ys[(*p)[1]];
    }
    return {clamp01(multiset_mean(xs)), clamp01(multiset_mean(ys))};
}

std::optional<std::pair<double, double>> aggregate_position_grid(std::span<const RawStep* const> voters,
                                                                 const GridSpec& grid) {
    std::map<std::pair<int, int>, std::size_t> cells;  // (row, col) -> citations
    for (const RawStep* v : voters) {
        const auto* list = std::get_if<std::vector<std::string>>(&v->position);
        if (list == nullptr) {
            throw AggregationError("grid aggregation received an [x, y] position");
        }
        for (const std::string& id : *list) {
            try {
                const CellIndex c = parse_cell(id, grid);
                ++cells[{c.row, c.col}];
            } catch (const DecodeError&) {
                // undecodable citations are skipped
            }
        }
    }
    if (cells.empty()) {
        return std::nullopt;
    }
    std::map<double, std::size_t> xs;
    std::map<double, std::size_t> ys;
    for (const auto& [rc, n] : cells) {
        xs[(rc.second + 0.5) / grid.cols] += n;
        ys[(rc.first + 0.5) / grid.rows] += n;
    }
    return std::pair{clamp01(multiset_mean(xs)), clamp01(multiset_mean(ys))};
}

double aggregate_rotation(std::span<const RawStep* const> voters, Method method) {
    if (voters.empty()) {
        throw AggregationError("no voters for rotation");
    }
    if (uses_grid(method)) {
        std::map<double, std::size_t> counts;
        for (const RawStep* v : voters) {
            const auto* d = std::get_if<Cardinal>(&v->rotation);
            if (d == nullptr) {
                throw AggregationError("grid aggregation received a degree rotation");
            }
            ++counts[cardinal_to_degrees(*d)];
        }
        double best = 0.0;
        std::size_t best_count = 0;
        for (const auto& [deg, c] : counts) {
            if (c > best_count) {
                best = deg;
                best_count = c;
            }
        }
        return best;
    }

    std::map<double, std::size_t> counts;
    for (const RawStep* v : voters) {
        const auto* d = std::get_if<double>(&v->rotation);
        if (d == nullptr) {
            throw AggregationError("unmarked aggregation received a cardinal rotation");
        }
        ++counts[normalize_rotation(*d)];
    }
    if (counts.size() == 1) {
        return counts.begin()->first;
    }
    double s = 0.0;
    double c = 0.0;
    std::size_t n = 0;
    for (const auto& [deg, k] : counts) {
        s += static_cast<double>(k) * sin_deg(deg);
        c += static_cast<double>(k) * cos_deg(deg);
        n += k;
    }
    if (std::hypot(s, c) <= 1e-12 * static_cast<double>(n)) {
        return counts.begin()->first;  // no preferred direction
    }
    return normalize_rotation(std::atan2(s, c) * 180.0 / std::numbers::pi);
}

Arrangement TaskPlan::arrangement() const {
    Arrangement a;
    a.table = table;
    for (const PlanStep& s : steps) {
        if (s.valid) {
            a.placements.push_back(s.placement);
        }
    }
    return a;
}

nlohmann::json TaskPlan::support_json() const {
    json steps_json = json::array();
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const PlanStep& s = steps[k];
        json j = {{"step", k},       {"type", s.type},           {"id", s.placement.object},
                  {"valid", s.valid}, {"reach", s.reach},         {"type_votes", s.type_votes},
                  {"id_votes", s.id_votes}};
        if (!s.note.empty()) {
            j["note"] = s.note;
        }
        steps_json.push_back(std::move(j));
    }
    return {{"method", std::string(to_string(method))},
            {"provider", provider},
            {"table", table},
            {"samples_total", samples_total},
            {"samples_parsed", samples_parsed},
            {"sample_errors", sample_errors},
            {"plan_length", steps.size()},
            {"steps", std::move(steps_json)}};
}

TaskPlan aggregate_plan(std::span<const Sample> samples, Method method, const Catalog& catalog,
                        const std::optional<GridSpec>& grid, std::string table) {
    if (uses_grid(method) && !grid) {
        throw ConfigError(std::string(to_string(method)) + " needs a grid");
    }
    TaskPlan plan;
    plan.table = std::move(table);
    plan.method = method;
    plan.samples_total = samples.size();
    plan.samples_parsed = samples.size();

    const std::size_t length = aggregate_plan_length(samples);
    for (std::size_t t = 0; t < length; ++t) {
        PlanStep step;
        for (const Sample& s : samples) {
            step.reach += t < s.size() ? 1 : 0;
        }
        step.type = aggregate_step_type(samples, t);
        const auto voters = step_voters(samples, t, step.type);
        step.type_votes = voters.size();

        const auto id = aggregate_object_id(voters);
        if (!id) {
            step.valid = false;
            step.note = "no voters";
            plan.steps.push_back(std::move(step));
            continue;
        }
        step.placement.object = *id;
        step.id_votes = static_cast<std::size_t>(
            std::count_if(voters.begin(), voters.end(), [&](const RawStep* v) { return v->id == *id; }));

        if (uses_grid(method)) {
            const auto xy = aggregate_position_grid(voters, *grid);
            if (!xy) {
                step.valid = false;
                step.note = "no decodable grid cells";
            } else {
                step.placement.x = xy->first;
                step.placement.y = xy->second;
            }
        } else {
            const auto [x, y] = aggregate_position_unmarked(voters);
            step.placement.x = x;
            step.placement.y = y;
        }
        step.placement.rotation = aggregate_rotation(voters, method);

        const ObjectSpec* spec = catalog.find(*id);
        if (spec == nullptr) {
            step.valid = false;
            step.note = "object id " + std::to_string(*id) + " not in catalog";
        } else if (spec->cls != try_parse_class(step.type)) {
            step.note = "catalog class of id " + std::to_string(*id) + " is " + std::string(to_string(spec->cls));
        }
        plan.steps.push_back(std::move(step));
    }
    return plan;
}

TaskPlan plan_from_responses(std::span<const std::string> texts, Method method, const Catalog& catalog,
                             const std::optional<GridSpec>& grid, std::string table) {
    std::vector<Sample> parsed;
    std::vector<std::string> errors;
    for (std::size_t k = 0; k < texts.size(); ++k) {
        try {
            parsed.push_back(parse_response(texts[k], method));
        } catch (const ResponseParseError& e) {
            errors.push_back("sample " + std::to_string(k) + ": " + e.what());
        }
    }
    if (parsed.empty()) {
        throw AggregationError("none of " + std::to_string(texts.size()) + " samples parsed" +
                               (errors.empty() ? std::string() : " (" + errors.front() + ")"));
    }
    TaskPlan plan = aggregate_plan(parsed, method, catalog, grid, std::move(table));
    plan.samples_total = texts.size();
    plan.sample_errors = std::move(errors);
    return plan;
}

}  // namespace tablepref
