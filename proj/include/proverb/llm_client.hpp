#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <semaphore>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "proverb/prompting.hpp"

namespace proverb {

enum class LlmProviderKind { RemoteHttp, ScriptedMock };

std::string_view llm_kind_name(LlmProviderKind kind) noexcept;
std::optional<LlmProviderKind> parse_llm_kind(std::string_view name) noexcept;

struct LlmProviderConfig {
    LlmProviderKind kind = LlmProviderKind::ScriptedMock;
    std::optional<std::string> endpoint;
    std::string model_name = "mock";
    double temperature = 0.0;
    size_t max_tokens = 1024;
    std::chrono::milliseconds timeout{60000};
    // Total attempts per prompt, including the first one.
    unsigned max_retries = 3;
    size_t max_concurrency = 4;
    std::chrono::milliseconds backoff_initial{500};
    std::optional<std::filesystem::path> script_path;
    std::optional<std::string> api_key;
    // Label used for judge verdicts; defaults to model_name.
    std::string tag;

    void validate() const;
    std::string effective_tag() const { return tag.empty() ? model_name : tag; }
    std::string provider_tag() const;
};

struct CompletionRequest {
    std::string model;
    std::string system;
    std::string user;
    double temperature = 0.0;
    size_t max_tokens = 0;
    std::string prompt_digest;
};

// Backends throw Error(ProviderUnavailable) for failures worth retrying.
class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string tag() const = 0;
};

class RemoteHttpProvider final : public CompletionProvider {
public:
    explicit RemoteHttpProvider(LlmProviderConfig config);
    std::string complete(const CompletionRequest& request) override;
    std::string tag() const override { return config_.provider_tag(); }

private:
    LlmProviderConfig config_;
};

// Canned outputs selected by prompt-digest prefix or by a regex searched in
// "<system>\n<user>". Script file:
//   {"default": "...", "rules": [{"digest_prefix"|"regex": "...", "output": "...",
//    "fail_times": N, "examples": ["..."]}], "delay_ms": 0}
// fail_times makes the first N calls per prompt fail; -1 fails every call.
class ScriptedMockProvider final : public CompletionProvider {
public:
    struct Rule {
        std::optional<std::string> digest_prefix;
        std::optional<std::string> regex_source;
        std::optional<std::regex> regex;
        std::string output;
        int fail_times = 0;
        std::vector<std::string> examples;
    };

    // Throws AmbiguousScript when rules are detectably overlapping.
    static std::shared_ptr<ScriptedMockProvider> from_json(const nlohmann::json& script, std::string name = "mock");
    static std::shared_ptr<ScriptedMockProvider> from_file(const std::filesystem::path& path);

    std::string complete(const CompletionRequest& request) override;
    std::string tag() const override { return "scripted_mock:" + name_; }

    // Index of the single matching rule; nullopt when none match. Throws
    // AmbiguousScript when several match.
    std::optional<size_t> match(const CompletionRequest& request) const;

    size_t calls() const noexcept { return calls_.load(); }
    size_t failures() const noexcept { return failures_.load(); }

private:
    ScriptedMockProvider() = default;

    std::string name_;
    std::vector<Rule> rules_;
    std::optional<std::string> default_output_;
    std::chrono::milliseconds delay_{0};

    std::mutex mutex_;
    std::unordered_map<std::string, int> attempts_by_digest_;
    std::atomic<size_t> calls_{0};
    std::atomic<size_t> failures_{0};
};

std::shared_ptr<CompletionProvider> make_provider(const LlmProviderConfig& config);

// SHA-256 over length-prefixed (model_name, temperature, system, user, template_version).
std::string prompt_digest(const PromptBundle& bundle, const LlmProviderConfig& config);

struct GenerationRecord {
    std::string proverb_id;
    std::optional<Strategy> strategy;
    std::string prompt_digest;
    std::string raw_output;
    std::string final_interpretation;
    bool extraction_fallback = false;
    std::chrono::milliseconds latency{0};
    bool from_cache = false;
    std::string provider_tag;
    unsigned attempts = 0;
};

nlohmann::ordered_json to_json(const GenerationRecord& r);
GenerationRecord generation_from_json(const nlohmann::json& j);

// Content-addressed record store: <dir>/<first two hex>/<digest>.json.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    std::filesystem::path path_for(std::string_view digest) const;
    // Throws CacheCorrupt on unreadable or inconsistent files.
    std::optional<GenerationRecord> lookup(std::string_view digest) const;
    void store(const GenerationRecord& record) const;
    const std::filesystem::path& directory() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
};

struct ClientStats {
    size_t provider_calls = 0;
    size_t cache_hits = 0;
    size_t coalesced = 0;
    size_t max_in_flight = 0;
};

// Cached, retried, concurrency-bounded completions for one provider config.
// Concurrent calls for the same digest share a single provider call.
class LlmClient {
public:
    LlmClient(LlmProviderConfig config, std::shared_ptr<CompletionProvider> provider,
              std::shared_ptr<const ResponseCache> cache);

    GenerationRecord complete(const PromptBundle& bundle);

    const LlmProviderConfig& config() const noexcept { return config_; }
    ClientStats stats() const;

private:
    GenerationRecord call_provider(const PromptBundle& bundle, const std::string& digest);

    LlmProviderConfig config_;
    std::shared_ptr<CompletionProvider> provider_;
    std::shared_ptr<const ResponseCache> cache_;
    std::counting_semaphore<> slots_;

    std::mutex mutex_;
    std::unordered_map<std::string, std::shared_future<GenerationRecord>> in_flight_;

    std::atomic<size_t> provider_calls_{0};
    std::atomic<size_t> cache_hits_{0};
    std::atomic<size_t> coalesced_{0};
    std::atomic<size_t> active_{0};
    std::atomic<size_t> max_active_{0};
};

}  // namespace proverb
