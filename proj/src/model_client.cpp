// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/model_client.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "tablepref/error.hpp"
#include "tablepref/image.hpp"
#include "tablepref/io.hpp"
#include "tablepref/prompts.hpp"

namespace tablepref {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Prompt assembly

std::string PromptBundle::hash() const {
    std::vector<std::uint8_t> buf(text.begin(), text.end());
    buf.push_back(0);
    for (const PromptImage& im : images) {
        buf.insert(buf.end(), im.name.begin(), im.name.end());
        buf.push_back(0);
        const std::string dims =
            std::to_string(im.image.pixels.width()) + "x" + std::to_string(im.image.pixels.height());
        buf.insert(buf.end(), dims.begin(), dims.end());
        buf.push_back(0);
        const auto& px = im.image.pixels.data();
        buf.insert(buf.end(), px.begin(), px.end());
    }
    return sha256_hex(std::span<const std::uint8_t>(buf));
}

std::vector<std::string> PromptBundle::image_names() const {
    std::vector<std::string> out;
    out.reserve(images.size());
    for (const PromptImage& im : images) {
        out.push_back(im.name);
    }
    return out;
}

std::string_view prompt_template(Method method) {
    switch (method) {
        case Method::LOUMA: return prompts::kObjectsAsLanguage;
        case Method::MOUMA: return prompts::kUnmarkedArrangements;
        case Method::LOGMA:
        case Method::MOGMA: return prompts::kGridMarkedArrangements;
    }
    return prompts::kObjectsAsLanguage;
}

std::string describe_order(const Arrangement& a, const Catalog& catalog) {
    std::string out;
    for (std::size_t k = 0; k < a.placements.size(); ++k) {
        const int id = a.placements[k].object;
        const ObjectSpec* o = catalog.find(id);
        if (k > 0) {
            out += ", ";
        }
        out += std::to_string(k + 1) + ". ";
        out += o != nullptr ? std::string(to_string(o->cls)) : std::string("object");
        out += " (id " + std::to_string(id) + ")";
    }
    return out.empty() ? std::string("(empty)") : out;
}

PromptBundle build_prompt(Method method, const PreferenceContext& context, const Catalog& catalog,
                          const Arrangement& initial, const std::optional<GridSpec>& grid, int samples) {
    if (uses_grid(method) && !grid) {
        throw ConfigError(std::string(to_string(method)) + " requires a grid");
    }
    if (grid) {
        grid->validate();
    }
    if (samples < 1) {
        throw ConfigError("samples must be at least 1");
    }
    auto lift = [&](const Arrangement& a) {
        return uses_grid(method) ? render_grid_marked(a, catalog, *grid) : render_unmarked(a, catalog);
    };

    PromptBundle b;
    b.method = method;
    b.samples = samples;
    for (std::size_t k = 0; k < context.entries.size(); ++k) {
        b.images.push_back({"final_state_" + std::to_string(k + 1) + ".jpg", lift(context.entries[k].arrangement)});
    }
    b.images.push_back({"initial_state_1.jpg", lift(initial)});
    if (uses_object_sheets(method)) {
        for (LiftedImage& sheet : render_object_sheets(catalog)) {
            const std::string cls = sheet.provenance.value("class", "objects");
            b.images.push_back({"objects_" + cls + ".jpg", std::move(sheet)});
        }
    }

    std::ostringstream t;
    t << prompt_template(method) << "\n\n";
    t << "Images:";
    for (std::size_t k = 0; k < b.images.size(); ++k) {
        t << (k == 0 ? " " : ", ") << b.images[k].name;
    }
    t << ".\n";
    if (context.entries.empty()) {
        t << "No preference examples are available for this table.\n";
    }
    for (std::size_t k = 0; k < context.entries.size(); ++k) {
        const PreferenceEntry& e = context.entries[k];
        const std::string order =
            e.order_description.empty() ? describe_order(e.arrangement, catalog) : e.order_description;
        t << "Placement order in final_state_" << (k + 1) << ".jpg: " << order << "\n";
    }
    t << "List the objects in the order they should be placed.\n";
    if (uses_grid(method)) {
        t << "Grid columns are lettered A to " << static_cast<char>('A' + grid->cols - 1)
          << " from left to right; rows are numbered 1 to " << grid->rows << " from top to bottom.\n";
    }
    if (uses_object_sheets(method)) {
        t << "Available objects are shown in the objects_*.jpg images, each labelled with its id.\n";
    } else {
        t << "Available objects (id: features):\n" << objects_as_language(catalog) << "\n";
    }
    b.text = t.str();
    return b;
}

// ---------------------------------------------------------------------------
// Configuration

std::string_view to_string(ProviderKind k) {
    switch (k) {
        case ProviderKind::OpenAI: return "openai";
        case ProviderKind::Anthropic: return "anthropic";
        case ProviderKind::Gemini: return "gemini";
        case ProviderKind::Mock: return "mock";
    }
    return "?";
}

ProviderKind parse_provider_kind(std::string_view s) {
    std::string v(s);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    const std::string suffix = "-compatible";
    if (v.size() > suffix.size() && v.ends_with(suffix)) {
        v.resize(v.size() - suffix.size());
    }
    for (ProviderKind k : {ProviderKind::OpenAI, ProviderKind::Anthropic, ProviderKind::Gemini, ProviderKind::Mock}) {
        if (to_string(k) == v) {
            return k;
        }
    }
    throw ConfigError("unknown provider '" + std::string(s) + "' (expected openai, anthropic, gemini or mock)");
}

double RetryPolicy::delay_before(int attempt) const {
    if (attempt <= 1) {
        return 0.0;
    }
    return std::min(max_delay_s, base_delay_s * std::pow(2.0, attempt - 2));
}

void ProviderConfig::validate() const {
    if (retry.max_attempts < 1) {
        throw ConfigError("retry.max_attempts must be at least 1");
    }
    if (retry.base_delay_s < 0.0 || retry.max_delay_s < 0.0) {
        throw ConfigError("retry delays must be non-negative");
    }
    if (kind == ProviderKind::Mock) {
        if (mock_script.empty() && !mock_inline) {
            throw ConfigError("mock provider requires a script");
        }
        return;
    }
    if (model.empty()) {
        throw ConfigError(std::string(to_string(kind)) + " provider requires a model name");
    }
    if (timeout_s <= 0) {
        throw ConfigError("timeout_s must be positive");
    }
}

std::string ProviderConfig::default_endpoint() const {
    switch (kind) {
        case ProviderKind::OpenAI: return "https://api.openai.com/v1";
        case ProviderKind::Anthropic: return "https://api.anthropic.com/v1";
        case ProviderKind::Gemini: return "https://generativelanguage.googleapis.com/v1beta";
        case ProviderKind::Mock: return "";
    }
    return "";
}

std::string ProviderConfig::default_credential_env() const {
    switch (kind) {
        case ProviderKind::OpenAI: return "OPENAI_API_KEY";
        case ProviderKind::Anthropic: return "ANTHROPIC_API_KEY";
        case ProviderKind::Gemini: return "GEMINI_API_KEY";
        case ProviderKind::Mock: return "";
    }
    return "";
}

ProviderConfig provider_config_from_json(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("provider config must be an object");
    }
    ProviderConfig c;
    try {
        c.kind = parse_provider_kind(j.value("kind", std::string("mock")));
        c.endpoint = j.value("endpoint", std::string());
        c.model = j.value("model", std::string());
        c.credential_env = j.value("credential_env", std::string());
        c.mock_script = j.value("mock_script", std::string());
        if (j.contains("temperature")) {
            c.temperature = j.at("temperature").get<double>();
        }
        c.usd_per_1k_input = j.value("usd_per_1k_input", 0.0);
        c.usd_per_1k_output = j.value("usd_per_1k_output", 0.0);
        c.timeout_s = j.value("timeout_s", 120);
        c.replay_log = j.value("replay_log", std::string());
        if (j.contains("retry")) {
            const json& r = j.at("retry");
            c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
            c.retry.base_delay_s = r.value("base_delay_s", c.retry.base_delay_s);
            c.retry.max_delay_s = r.value("max_delay_s", c.retry.max_delay_s);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("provider config: ") + e.what());
    }
    return c;
}

// ---------------------------------------------------------------------------
// Usage

UsageRecord& UsageRecord::operator+=(const UsageRecord& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    input_chars += o.input_chars;
    output_chars += o.output_chars;
    requests += o.requests;
    cost_usd += o.cost_usd;
    return *this;
}

json to_json(const UsageRecord& u) {
    return {{"input_tokens", u.input_tokens}, {"output_tokens", u.output_tokens}, {"input_chars", u.input_chars},
            {"output_chars", u.output_chars}, {"requests", u.requests},           {"cost_usd", u.cost_usd}};
}

std::string_view to_string(SampleErrorKind k) {
    switch (k) {
        case SampleErrorKind::None: return "none";
        case SampleErrorKind::Auth: return "auth";
        case SampleErrorKind::RateLimit: return "rate_limit";
        case SampleErrorKind::Malformed: return "malformed";
        case SampleErrorKind::Transport: return "transport";
    }
    return "?";
}

std::vector<std::string> SampleResult::texts() const {
    std::vector<std::string> out;
    for (const SampleOutcome& o : outcomes) {
        if (o.text) {
            out.push_back(*o.text);
        }
    }
    return out;
}

std::size_t SampleResult::failures() const {
    return static_cast<std::size_t>(
        std::count_if(outcomes.begin(), outcomes.end(), [](const SampleOutcome& o) { return !o.ok(); }));
}

// ---------------------------------------------------------------------------
// Client

namespace {

struct HttpTarget {
    std::string origin;  // scheme://host[:port]
    std::string base;    // path prefix without trailing slash
};

HttpTarget split_url(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw ConfigError("endpoint must be an absolute URL: " + url);
    }
    const auto slash = url.find('/', scheme + 3);
    HttpTarget t;
    t.origin = url.substr(0, slash);
    t.base = slash == std::string::npos ? "" : url.substr(slash);
    while (!t.base.empty() && t.base.back() == '/') {
        t.base.pop_back();
    }
    return t;
}

struct Failure {
    SampleErrorKind kind;
    std::string message;
};

struct Exchange {
    std::optional<json> body;  // parsed 2xx body
    std::optional<Failure> failure;
};

struct Pending {
    std::vector<std::string> texts;
    UsageRecord usage;
    std::optional<Failure> failure;
};

std::vector<std::string> encode_images(const PromptBundle& b) {
    std::vector<std::string> out;
    out.reserve(b.images.size());
    for (const PromptImage& im : b.images) {
        const std::vector<std::uint8_t> png = encode_png(im.image.pixels);
        out.push_back(base64_encode(png));
    }
    return out;
}

}  // namespace

struct ModelClient::Impl {
    mutable std::mutex mu;
    UsageRecord total;
    json script;
    std::size_t cursor = 0;
    std::mutex log_mu;

    void log(const ProviderConfig& cfg, json line) {
        if (cfg.replay_log.empty()) {
            return;
        }
        std::lock_guard lock(log_mu);
        std::ofstream out(cfg.replay_log, std::ios::app);
        if (!out) {
            return;
        }
        out << line.dump() << '\n';
    }
};

ModelClient::ModelClient(ProviderConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
    cfg_.validate();
    if (cfg_.endpoint.empty()) {
        cfg_.endpoint = cfg_.default_endpoint();
    }
    if (cfg_.credential_env.empty()) {
        cfg_.credential_env = cfg_.default_credential_env();
    }
    if (cfg_.kind == ProviderKind::Mock) {
        impl_->script = cfg_.mock_inline ? *cfg_.mock_inline : read_json_file(cfg_.mock_script);
        if (!impl_->script.is_array() && !impl_->script.is_object()) {
            throw ConfigError("mock script must be a JSON list of texts or an object keyed by bundle hash");
        }
    } else {
        split_url(cfg_.endpoint);
    }
}

ModelClient::~ModelClient() = default;

UsageRecord ModelClient::usage() const {
    std::lock_guard lock(impl_->mu);
    return impl_->total;
}

namespace {

std::string entry_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

double cost_of(const ProviderConfig& cfg, const UsageRecord& u) {
    return static_cast<double>(u.input_tokens) / 1000.0 * cfg.usd_per_1k_input +
           static_cast<double>(u.output_tokens) / 1000.0 * cfg.usd_per_1k_output;
}

// POST with retries. Auth failures and non-retryable statuses return at once.
Exchange post_json(const ProviderConfig& cfg, ModelClient::Impl& impl, const std::string& path,
                   const httplib::Headers& headers, const json& body, const std::string& bundle_hash,
                   UsageRecord& usage) {
    const HttpTarget target = split_url(cfg.endpoint);
    const std::string payload = body.dump();
    Failure last{SampleErrorKind::Transport, "no attempt made"};
    for (int attempt = 1; attempt <= cfg.retry.max_attempts; ++attempt) {
        const double delay = cfg.retry.delay_before(attempt);
        if (delay > 0.0) {
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(target.origin);
        client.set_connection_timeout(std::min(cfg.timeout_s, 30), 0);
        client.set_read_timeout(cfg.timeout_s, 0);
        client.set_write_timeout(cfg.timeout_s, 0);
        auto res = client.Post(target.base + path, headers, payload, "application/json");
        ++usage.requests;
        if (!res) {
            last = {SampleErrorKind::Transport, "request failed: " + httplib::to_string(res.error())};
            impl.log(cfg, {{"provider", to_string(cfg.kind)}, {"bundle", bundle_hash}, {"attempt", attempt},
                           {"error", last.message}});
            continue;
        }
        impl.log(cfg, {{"provider", to_string(cfg.kind)}, {"bundle", bundle_hash}, {"attempt", attempt},
                       {"path", target.base + path}, {"status", res->status}, {"response", res->body}});
        const int status = res->status;
        if (status == 401 || status == 403) {
            return {std::nullopt, Failure{SampleErrorKind::Auth, "provider rejected credentials (HTTP " +
                                                                     std::to_string(status) + ")"}};
        }
        if (status == 429) {
            last = {SampleErrorKind::RateLimit, "rate limited (HTTP 429)"};
            continue;
        }
        if (status >= 500) {
            last = {SampleErrorKind::Transport, "provider error (HTTP " + std::to_string(status) + ")"};
            continue;
        }
        if (status < 200 || status >= 300) {
            return {std::nullopt, Failure{SampleErrorKind::Transport,
                                          "provider refused request (HTTP " + std::to_string(status) + ")"}};
        }
        try {
            return {json::parse(res->body), std::nullopt};
        } catch (const json::parse_error& e) {
            return {std::nullopt, Failure{SampleErrorKind::Malformed, std::string("unparsable body: ") + e.what()}};
        }
    }
    last.message += " after " + std::to_string(cfg.retry.max_attempts) + " attempt(s)";
    return {std::nullopt, last};
}

std::optional<std::string> credential(const ProviderConfig& cfg) {
    const char* v = std::getenv(cfg.credential_env.c_str());
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    return std::string(v);
}

std::string content_text(const json& content) {
    if (content.is_string()) {
        return content.get<std::string>();
    }
    if (content.is_array()) {
        std::string out;
        for (const json& part : content) {
            if (part.is_object() && part.contains("text") && part["text"].is_string()) {
                out += part["text"].get<std::string>();
            }
        }
        return out;
    }
    throw std::invalid_argument("content is neither text nor parts");
}

Pending openai_call(const ProviderConfig& cfg, ModelClient::Impl& impl, const PromptBundle& b,
                    const std::vector<std::string>& images, const std::string& key, const std::string& hash) {
    json parts = json::array();
    for (std::size_t k = 0; k < b.images.size(); ++k) {
        parts.push_back({{"type", "text"}, {"text", b.images[k].name + ":"}});
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + images[k]}}}});
    }
    parts.push_back({{"type", "text"}, {"text", b.text}});
    json body = {{"model", cfg.model}, {"n", b.samples}, {"messages", {{{"role", "user"}, {"content", parts}}}}};
    if (cfg.temperature) {
        body["temperature"] = *cfg.temperature;
    }
    Pending p;
    const Exchange ex = post_json(cfg, impl, "/chat/completions", {{"Authorization", "Bearer " + key}}, body, hash,
                                  p.usage);
    if (ex.failure) {
        p.failure = ex.failure;
        return p;
    }
    try {
        for (const json& choice : ex.body->at("choices")) {
            p.texts.push_back(content_text(choice.at("message").at("content")));
        }
        if (ex.body->contains("usage")) {
            p.usage.input_tokens += ex.body->at("usage").value("prompt_tokens", 0ULL);
            p.usage.output_tokens += ex.body->at("usage").value("completion_tokens", 0ULL);
        }
    } catch (const std::exception& e) {
        p.texts.clear();
        p.failure = Failure{SampleErrorKind::Malformed, std::string("unexpected payload: ") + e.what()};
    }
    return p;
}

Pending anthropic_call(const ProviderConfig& cfg, ModelClient::Impl& impl, const PromptBundle& b,
                       const std::vector<std::string>& images, const std::string& key, const std::string& hash) {
    json parts = json::array();
    for (std::size_t k = 0; k < b.images.size(); ++k) {
        parts.push_back({{"type", "text"}, {"text", b.images[k].name + ":"}});
        parts.push_back(
            {{"type", "image"},
             {"source", {{"type", "base64"}, {"media_type", "image/png"}, {"data", images[k]}}}});
    }
    parts.push_back({{"type", "text"}, {"text", b.text}});
    json body = {{"model", cfg.model}, {"max_tokens", 4096}, {"messages", {{{"role", "user"}, {"content", parts}}}}};
    if (cfg.temperature) {
        body["temperature"] = *cfg.temperature;
    }
    Pending p;
    const Exchange ex = post_json(cfg, impl, "/messages", {{"x-api-key", key}, {"anthropic-version", "2023-06-01"}},
                                  body, hash, p.usage);
    if (ex.failure) {
        p.failure = ex.failure;
        return p;
    }
    try {
        p.texts.push_back(content_text(ex.body->at("content")));
        if (ex.body->contains("usage")) {
            p.usage.input_tokens += ex.body->at("usage").value("input_tokens", 0ULL);
            p.usage.output_tokens += ex.body->at("usage").value("output_tokens", 0ULL);
        }
    } catch (const std::exception& e) {
        p.texts.clear();
        p.failure = Failure{SampleErrorKind::Malformed, std::string("unexpected payload: ") + e.what()};
    }
    return p;
}

Pending gemini_call(const ProviderConfig& cfg, ModelClient::Impl& impl, const PromptBundle& b,
                    const std::vector<std::string>& images, const std::string& key, const std::string& hash) {
    json parts = json::array();
    for (std::size_t k = 0; k < b.images.size(); ++k) {
        parts.push_back({{"text", b.images[k].name + ":"}});
        parts.push_back({{"inline_data", {{"mime_type", "image/png"}, {"data", images[k]}}}});
    }
    parts.push_back({{"text", b.text}});
    json body = {{"contents", {{{"role", "user"}, {"parts", parts}}}}};
    if (cfg.temperature) {
        body["generationConfig"] = {{"temperature", *cfg.temperature}};
    }
    Pending p;
    const Exchange ex = post_json(cfg, impl, "/models/" + cfg.model + ":generateContent", {{"x-goog-api-key", key}},
                                  body, hash, p.usage);
    if (ex.failure) {
        p.failure = ex.failure;
        return p;
    }
    try {
        const json& cand = ex.body->at("candidates").at(0);
        std::string text;
        for (const json& part : cand.at("content").at("parts")) {
            text += part.value("text", std::string());
        }
        p.texts.push_back(std::move(text));
        if (ex.body->contains("usageMetadata")) {
            p.usage.input_tokens += ex.body->at("usageMetadata").value("promptTokenCount", 0ULL);
            p.usage.output_tokens += ex.body->at("usageMetadata").value("candidatesTokenCount", 0ULL);
        }
    } catch (const std::exception& e) {
        p.texts.clear();
        p.failure = Failure{SampleErrorKind::Malformed, std::string("unexpected payload: ") + e.what()};
    }
    return p;
}

}  // namespace

SampleResult ModelClient::sample(const PromptBundle& bundle) {
    const std::size_t n = static_cast<std::size_t>(std::max(bundle.samples, 0));
    const std::string hash = bundle.hash();
    SampleResult result;
    result.usage.input_chars = 0;

    auto fail_rest = [&](SampleErrorKind kind, const std::string& message) {
        while (result.outcomes.size() < n) {
            result.outcomes.push_back({std::nullopt, kind, message});
        }
    };

    if (cfg_.kind == ProviderKind::Mock) {
        std::vector<std::string> texts;
        std::string missing;
        {
            std::lock_guard lock(impl_->mu);
            const json& s = impl_->script;
            if (s.is_array()) {
                while (texts.size() < n && impl_->cursor < s.size()) {
                    texts.push_back(entry_text(s[impl_->cursor++]));
                }
                missing = "mock script exhausted";
            } else {
                const json* entry = s.contains(hash) ? &s[hash] : (s.contains("*") ? &s["*"] : nullptr);
                if (entry == nullptr) {
                    missing = "no mock entry for bundle " + hash;
                } else if (entry->is_array()) {
                    for (std::size_t k = 0; k < n && k < entry->size(); ++k) {
                        texts.push_back(entry_text((*entry)[k]));
                    }
                    missing = "mock entry has only " + std::to_string(entry->size()) + " text(s)";
                } else {
                    texts.assign(n, entry_text(*entry));
                }
            }
        }
        result.usage.requests = 1;
        result.usage.input_chars = bundle.text.size();
        for (std::string& t : texts) {
            result.usage.output_chars += t.size();
            result.outcomes.push_back({std::move(t), SampleErrorKind::None, ""});
        }
        fail_rest(SampleErrorKind::Malformed, missing);
        impl_->log(cfg_, {{"provider", "mock"}, {"bundle", hash}, {"samples", n}, {"texts", result.texts()}});
    } else {
        const auto key = credential(cfg_);
        if (!key) {
            fail_rest(SampleErrorKind::Auth, "credential variable " + cfg_.credential_env + " is not set");
        } else {
            const std::vector<std::string> images = encode_images(bundle);
            std::vector<Pending> pending;
            if (cfg_.kind == ProviderKind::OpenAI) {
                pending.push_back(openai_call(cfg_, *impl_, bundle, images, *key, hash));
            } else {
                std::vector<std::future<Pending>> futures;
                for (std::size_t k = 0; k < n; ++k) {
                    futures.push_back(std::async(std::launch::async, [&] {
                        return cfg_.kind == ProviderKind::Anthropic
                                   ? anthropic_call(cfg_, *impl_, bundle, images, *key, hash)
                                   : gemini_call(cfg_, *impl_, bundle, images, *key, hash);
                    }));
                }
                for (auto& f : futures) {
                    pending.push_back(f.get());
                }
            }
            // One pending call per sample, except OpenAI where one call covers all of them.
            const std::size_t per_call = cfg_.kind == ProviderKind::OpenAI ? n : 1;
            std::vector<SampleOutcome> failed;
            for (Pending& p : pending) {
                result.usage += p.usage;
                for (std::string& t : p.texts) {
                    if (result.outcomes.size() < n) {
                        result.usage.output_chars += t.size();
                        result.outcomes.push_back({std::move(t), SampleErrorKind::None, ""});
                    }
                }
                if (p.failure) {
                    for (std::size_t k = p.texts.size(); k < per_call; ++k) {
                        failed.push_back({std::nullopt, p.failure->kind, p.failure->message});
                    }
                }
            }
            for (SampleOutcome& f : failed) {
                if (result.outcomes.size() < n) {
                    result.outcomes.push_back(std::move(f));
                }
            }
            fail_rest(SampleErrorKind::Malformed, "provider returned fewer choices than requested");
            result.usage.input_chars = bundle.text.size() * pending.size();
        }
    }
    result.usage.cost_usd = cost_of(cfg_, result.usage);
    {
        std::lock_guard lock(impl_->mu);
        impl_->total += result.usage;
    }
    return result;
}

}  // namespace tablepref
