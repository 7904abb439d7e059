#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "proverb/embedding.hpp"
#include "proverb/judging.hpp"
#include "proverb/llm_client.hpp"
#include "proverb/prompting.hpp"

namespace proverb {

// Flat "key = value" configuration: one assignment per line, '#' comments,
// values are quoted strings, bare numbers or booleans, or single-line
// [arrays] of those. Dotted keys group related settings.
class FlatConfig {
public:
    static FlatConfig parse(std::string_view text);

    bool has(std::string_view key) const;
    std::optional<std::string> get_string(std::string_view key) const;
    std::optional<int64_t> get_int(std::string_view key) const;
    std::optional<double> get_double(std::string_view key) const;
    std::optional<bool> get_bool(std::string_view key) const;
    std::optional<std::vector<std::string>> get_list(std::string_view key) const;

    std::vector<std::string> keys() const;
    void set(std::string key, std::string value) { scalars_[std::move(key)] = std::move(value); }

private:
    std::map<std::string, std::string, std::less<>> scalars_;
    std::map<std::string, std::vector<std::string>, std::less<>> lists_;
};

struct RunConfig {
    std::filesystem::path corpus_path;
    std::vector<Strategy> strategies{kAllStrategies.begin(), kAllStrategies.end()};
    size_t k = 3;
    size_t n = 3;
    uint64_t seed = 42;

    EmbeddingProviderConfig embed;
    LlmProviderConfig llm;
    std::vector<LlmProviderConfig> judges;
    AccuracyScale accuracy_scale = AccuracyScale::Binary;

    std::string run_id = "default";
    std::filesystem::path output_dir = "runs";
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path templates_dir;
    std::optional<std::filesystem::path> index_path;
    std::optional<std::string> bertscore_url;

    bool skip_bertscore = false;
    bool score_raw = false;
    bool allow_overlap = false;
    bool dry_run = false;
    double max_missing_fraction = 0.10;

    // Verbatim config file contents, persisted as the run's config snapshot.
    std::string source_text;

    std::filesystem::path run_dir() const { return output_dir / run_id; }
    void validate() const;
};

// Default templates directory baked in at build time.
std::filesystem::path default_templates_dir();

// Relative paths resolve against base_dir. Unknown keys throw ConfigError.
RunConfig run_config_from_flat(const FlatConfig& flat, const std::filesystem::path& base_dir);

// Throws MissingConfig when the file does not exist.
RunConfig load_run_config(const std::filesystem::path& path);

// PROVERB_EMBED_ENDPOINT, PROVERB_LLM_ENDPOINT and PROVERB_LLM_API_KEY.
void apply_environment(RunConfig& config);

// Effective settings without secrets.
nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace proverb
