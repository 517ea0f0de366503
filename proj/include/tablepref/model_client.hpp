// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tablepref/catalog.hpp"
#include "tablepref/error.hpp"
#include "tablepref/lifting.hpp"
#include "tablepref/method.hpp"
#include "tablepref/scene.hpp"

namespace tablepref {

inline constexpr int kDefaultSamples = 5;

struct PromptImage {
    std::string name;  // as referenced in the prompt text, e.g. "final_state_1.jpg"
    LiftedImage image;
};

/// Everything sent to the model for one query. Images are in attachment order.
struct PromptBundle {
    Method method = Method::MOGMA;
    std::string text;
    std::vector<PromptImage> images;
    int samples = kDefaultSamples;

    /// sha256 over text, image names and raw pixels.
    std::string hash() const;
    std::vector<std::string> image_names() const;
};

/// Problem-definition template used for a method.
std::string_view prompt_template(Method method);

/// Placement order text for a context arrangement, e.g. "plate (id 75), fork (id 25)".
std::string describe_order(const Arrangement& a, const Catalog& catalog);

/// Pure: identical inputs give identical bundles. Throws ConfigError when a
/// grid method has no grid, RenderError for unrenderable arrangements.
PromptBundle build_prompt(Method method, const PreferenceContext& context, const Catalog& catalog,
                          const Arrangement& initial, const std::optional<GridSpec>& grid,
                          int samples = kDefaultSamples);

enum class ProviderKind { OpenAI, Anthropic, Gemini, Mock };

std::string_view to_string(ProviderKind k);
/// Accepts "openai", "openai-compatible", "anthropic", ..., "mock". Throws ConfigError.
ProviderKind parse_provider_kind(std::string_view s);

struct RetryPolicy {
    int max_attempts = 3;
    double base_delay_s = 1.0;
    double max_delay_s = 16.0;

    /// Delay before attempt `attempt` (1-based; the first attempt has none).
    double delay_before(int attempt) const;
};

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Mock;
    std::string endpoint;        // base URL; empty selects the provider default
    std::string model;
    std::string credential_env;  // env var holding the API key; empty selects the provider default
    RetryPolicy retry;
    std::string mock_script;                   // path to a mock script
    std::optional<nlohmann::json> mock_inline;  // or the script itself
    std::optional<double> temperature;
    double usd_per_1k_input = 0.0;
    double usd_per_1k_output = 0.0;
    int timeout_s = 120;
    std::string replay_log;  // JSON-lines audit file, optional

    /// Throws ConfigError.
    void validate() const;
    std::string default_endpoint() const;
    std::string default_credential_env() const;
};

/// Reads {kind, endpoint, model, credential_env, retry:{max_attempts, base_delay_s,
/// max_delay_s}, mock_script, temperature, usd_per_1k_input, usd_per_1k_output,
/// timeout_s, replay_log}. Throws ConfigError.
ProviderConfig provider_config_from_json(const nlohmann::json& j);

struct UsageRecord {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    std::uint64_t input_chars = 0;
    std::uint64_t output_chars = 0;
    std::uint64_t requests = 0;
    double cost_usd = 0.0;

    UsageRecord& operator+=(const UsageRecord& o);
    bool operator==(const UsageRecord&) const = default;
};

nlohmann::json to_json(const UsageRecord& u);

enum class SampleErrorKind { None, Auth, RateLimit, Malformed, Transport };

std::string_view to_string(SampleErrorKind k);

struct SampleOutcome {
    std::optional<std::string> text;
    SampleErrorKind error = SampleErrorKind::None;
    std::string message;

    bool ok() const noexcept { return text.has_value(); }
};

struct SampleResult {
    std::vector<SampleOutcome> outcomes;  // exactly bundle.samples entries
    UsageRecord usage;                    // this call only

    std::vector<std::string> texts() const;
    std::size_t failures() const;
};

/// Thread-safe client for one provider configuration.
class ModelClient {
public:
    /// Validates the config and loads the mock script. Throws ConfigError or LoadError.
    explicit ModelClient(ProviderConfig cfg);
    ~ModelClient();
    ModelClient(const ModelClient&) = delete;
    ModelClient& operator=(const ModelClient&) = delete;

    /// Requests bundle.samples responses. Failures are reported per sample.
    SampleResult sample(const PromptBundle& bundle);

    /// Cumulative usage over all calls.
    UsageRecord usage() const;
    const ProviderConfig& config() const noexcept { return cfg_; }

    struct Impl;

private:
    ProviderConfig cfg_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tablepref
