#include "proverb/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>

#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/text.hpp"

#ifndef PROVERB_DEFAULT_TEMPLATES_DIR
#define PROVERB_DEFAULT_TEMPLATES_DIR "templates"
#endif

namespace proverb {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(size_t line, const std::string& msg) {
    throw Error(ErrorCode::ConfigError, "line " + std::to_string(line) + ": " + msg);
}

// Parses a quoted string starting at s[pos] == '"'; advances pos past the closing quote.
std::string parse_quoted(std::string_view s, size_t& pos, size_t line) {
    std::string out;
    ++pos;
    while (pos < s.size()) {
        const char c = s[pos++];
        if (c == '"') return out;
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (pos >= s.size()) break;
        const char e = s[pos++];
        switch (e) {
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            default: config_error(line, std::string("unknown escape \\") + e);
        }
    }
    config_error(line, "unterminated string");
}

void expect_rest_empty(std::string_view rest, size_t line) {
    rest = text::trim(rest);
    if (!rest.empty() && rest.front() != '#') config_error(line, "unexpected text after value");
}

std::string parse_bare(std::string_view s, size_t& pos, std::string_view stops) {
    const size_t start = pos;
    while (pos < s.size() && stops.find(s[pos]) == std::string_view::npos) ++pos;
    return std::string(text::trim(s.substr(start, pos - start)));
}

}  // namespace

FlatConfig FlatConfig::parse(std::string_view input) {
    FlatConfig cfg;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < input.size()) {
        auto eol = input.find('\n', pos);
        if (eol == std::string_view::npos) eol = input.size();
        std::string_view line = input.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        const std::string_view trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string_view::npos) config_error(line_no, "expected key = value");
        const std::string key(text::trim(trimmed.substr(0, eq)));
        if (key.empty()) config_error(line_no, "empty key");
        for (char c : key) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) {
                config_error(line_no, "invalid key '" + key + "'");
            }
        }
        if (cfg.has(key)) config_error(line_no, "duplicate key '" + key + "'");

        const std::string_view value = text::trim(trimmed.substr(eq + 1));
        if (value.empty()) config_error(line_no, "missing value for '" + key + "'");
        size_t vpos = 0;
        if (value.front() == '"') {
            std::string s = parse_quoted(value, vpos, line_no);
            expect_rest_empty(value.substr(vpos), line_no);
            cfg.scalars_[key] = std::move(s);
        } else if (value.front() == '[') {
            std::vector<std::string> items;
            ++vpos;
            while (true) {
                while (vpos < value.size() && (value[vpos] == ' ' || value[vpos] == '\t')) ++vpos;
                if (vpos >= value.size()) config_error(line_no, "unterminated array");
                if (value[vpos] == ']') {
                    ++vpos;
                    break;
                }
                if (value[vpos] == '"') {
                    items.push_back(parse_quoted(value, vpos, line_no));
                } else {
                    std::string item = parse_bare(value, vpos, ",]");
                    if (item.empty()) config_error(line_no, "empty array element");
                    items.push_back(std::move(item));
                }
                while (vpos < value.size() && (value[vpos] == ' ' || value[vpos] == '\t')) ++vpos;
                if (vpos < value.size() && value[vpos] == ',') ++vpos;
            }
            expect_rest_empty(value.substr(vpos), line_no);
            cfg.lists_[key] = std::move(items);
        } else {
            std::string bare = parse_bare(value, vpos, "#");
            cfg.scalars_[key] = std::move(bare);
        }
    }
    return cfg;
}

bool FlatConfig::has(std::string_view key) const {
    return scalars_.find(key) != scalars_.end() || lists_.find(key) != lists_.end();
}

std::vector<std::string> FlatConfig::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : scalars_) out.push_back(k);
    for (const auto& [k, _] : lists_) out.push_back(k);
    return out;
}

std::optional<std::string> FlatConfig::get_string(std::string_view key) const {
    if (auto it = scalars_.find(key); it != scalars_.end()) return it->second;
    if (lists_.find(key) != lists_.end()) throw Error(ErrorCode::ConfigError, std::string(key) + ": expected a scalar");
    return std::nullopt;
}

std::optional<int64_t> FlatConfig::get_int(std::string_view key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc() || ptr != s->data() + s->size()) {
        throw Error(ErrorCode::ConfigError, std::string(key) + ": expected an integer, got '" + *s + "'");
    }
    return v;
}

std::optional<double> FlatConfig::get_double(std::string_view key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s->c_str(), &end);
    if (s->empty() || end != s->c_str() + s->size()) {
        throw Error(ErrorCode::ConfigError, std::string(key) + ": expected a number, got '" + *s + "'");
    }
    return v;
}

std::optional<bool> FlatConfig::get_bool(std::string_view key) const {
    auto s = get_string(key);
    if (!s) return std::nullopt;
    if (*s == "true") return true;
    if (*s == "false") return false;
    throw Error(ErrorCode::ConfigError, std::string(key) + ": expected true or false, got '" + *s + "'");
}

std::optional<std::vector<std::string>> FlatConfig::get_list(std::string_view key) const {
    if (auto it = lists_.find(key); it != lists_.end()) return it->second;
    if (auto it = scalars_.find(key); it != scalars_.end()) return std::vector<std::string>{it->second};
    return std::nullopt;
}

fs::path default_templates_dir() { return fs::path(PROVERB_DEFAULT_TEMPLATES_DIR); }

void RunConfig::validate() const {
    if (corpus_path.empty()) throw Error(ErrorCode::ConfigError, "corpus path is required");
    if (strategies.empty()) throw Error(ErrorCode::ConfigError, "at least one strategy is required");
    if (k == 0) throw Error(ErrorCode::ConfigError, "k must be positive");
    if (n == 0) throw Error(ErrorCode::ConfigError, "n must be positive");
    if (run_id.empty() || run_id.find('/') != std::string::npos || run_id == "." || run_id == "..") {
        throw Error(ErrorCode::ConfigError, "run_id must be a plain directory name");
    }
    if (max_missing_fraction < 0.0 || max_missing_fraction > 1.0) {
        throw Error(ErrorCode::ConfigError, "max_missing_fraction must lie in [0, 1]");
    }
    embed.validate();
    llm.validate();
    if (!dry_run && judges.empty()) throw Error(ErrorCode::ConfigError, "at least one judge is required");
    for (const auto& j : judges) j.validate();
}

namespace {

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "corpus", "strategies", "k", "n", "seed", "run_id", "output_dir", "cache_dir", "templates_dir", "index",
    "bertscore_url", "skip_bertscore", "score_raw", "allow_overlap", "accuracy_scale", "max_missing_fraction",
    "judges", "embed.kind", "embed.endpoint", "embed.model", "embed.dim", "embed.timeout_ms", "embed.max_batch"};

const std::set<std::string, std::less<>> kLlmFields = {
    "kind", "endpoint", "model", "temperature", "max_tokens", "timeout_ms", "max_retries", "max_concurrency",
    "backoff_ms", "script", "tag"};

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

size_t positive(const FlatConfig& flat, std::string_view key, size_t fallback) {
    auto v = flat.get_int(key);
    if (!v) return fallback;
    if (*v <= 0) throw Error(ErrorCode::ConfigError, std::string(key) + " must be positive");
    return static_cast<size_t>(*v);
}

LlmProviderConfig llm_from_flat(const FlatConfig& flat, const std::string& prefix, const fs::path& base,
                                const std::string& default_tag) {
    LlmProviderConfig c;
    if (auto kind = flat.get_string(prefix + "kind")) {
        auto parsed = parse_llm_kind(*kind);
        if (!parsed) throw Error(ErrorCode::ConfigError, prefix + "kind: unknown provider kind '" + *kind + "'");
        c.kind = *parsed;
    }
    if (auto v = flat.get_string(prefix + "endpoint")) c.endpoint = *v;
    if (auto v = flat.get_string(prefix + "model")) c.model_name = *v;
    if (auto v = flat.get_double(prefix + "temperature")) c.temperature = *v;
    c.max_tokens = positive(flat, prefix + "max_tokens", c.max_tokens);
    if (auto v = flat.get_int(prefix + "timeout_ms")) c.timeout = std::chrono::milliseconds(*v);
    if (auto v = flat.get_int(prefix + "max_retries")) {
        if (*v < 1) throw Error(ErrorCode::ConfigError, prefix + "max_retries must be at least 1");
        c.max_retries = static_cast<unsigned>(*v);
    }
    c.max_concurrency = positive(flat, prefix + "max_concurrency", c.max_concurrency);
    if (auto v = flat.get_int(prefix + "backoff_ms")) c.backoff_initial = std::chrono::milliseconds(*v);
    if (auto v = flat.get_string(prefix + "script")) c.script_path = resolve(base, *v);
    c.tag = flat.get_string(prefix + "tag").value_or(default_tag);
    return c;
}

}  // namespace

RunConfig run_config_from_flat(const FlatConfig& flat, const fs::path& base_dir) {
    RunConfig cfg;
    const auto judge_names = flat.get_list("judges").value_or(std::vector<std::string>{});

    for (const auto& key : flat.keys()) {
        if (kTopLevelKeys.contains(key)) continue;
        if (key.starts_with("llm.") && kLlmFields.contains(key.substr(4))) continue;
        bool judge_key = false;
        for (const auto& name : judge_names) {
            const std::string prefix = "judge." + name + ".";
            if (key.starts_with(prefix) && kLlmFields.contains(key.substr(prefix.size()))) judge_key = true;
        }
        if (!judge_key) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
    }

    if (auto v = flat.get_string("corpus")) cfg.corpus_path = resolve(base_dir, *v);
    if (auto list = flat.get_list("strategies")) {
        cfg.strategies.clear();
        for (const auto& name : *list) {
            auto s = parse_strategy(name);
            if (!s) throw Error(ErrorCode::ConfigError, "unknown strategy '" + name + "'");
            if (std::find(cfg.strategies.begin(), cfg.strategies.end(), *s) == cfg.strategies.end()) {
                cfg.strategies.push_back(*s);
            }
        }
    }
    cfg.k = positive(flat, "k", cfg.k);
    cfg.n = positive(flat, "n", cfg.n);
    if (auto v = flat.get_int("seed")) cfg.seed = static_cast<uint64_t>(*v);
    if (auto v = flat.get_string("run_id")) cfg.run_id = *v;
    cfg.output_dir = resolve(base_dir, flat.get_string("output_dir").value_or("runs"));
    cfg.cache_dir = resolve(base_dir, flat.get_string("cache_dir").value_or("cache"));
    if (auto v = flat.get_string("templates_dir")) {
        cfg.templates_dir = resolve(base_dir, *v);
    } else {
        cfg.templates_dir = default_templates_dir();
    }
    if (auto v = flat.get_string("index")) cfg.index_path = resolve(base_dir, *v);
    if (auto v = flat.get_string("bertscore_url")) cfg.bertscore_url = *v;
    cfg.skip_bertscore = flat.get_bool("skip_bertscore").value_or(false);
    cfg.score_raw = flat.get_bool("score_raw").value_or(false);
    cfg.allow_overlap = flat.get_bool("allow_overlap").value_or(false);
    if (auto v = flat.get_double("max_missing_fraction")) cfg.max_missing_fraction = *v;
    if (auto v = flat.get_string("accuracy_scale")) {
        auto s = parse_accuracy_scale(*v);
        if (!s) throw Error(ErrorCode::ConfigError, "unknown accuracy_scale '" + *v + "'");
        cfg.accuracy_scale = *s;
    }

    if (auto kind = flat.get_string("embed.kind")) {
        auto parsed = parse_embedding_kind(*kind);
        if (!parsed) throw Error(ErrorCode::ConfigError, "embed.kind: unknown provider kind '" + *kind + "'");
        cfg.embed.kind = *parsed;
    }
    if (auto v = flat.get_string("embed.endpoint")) cfg.embed.endpoint = *v;
    if (auto v = flat.get_string("embed.model")) cfg.embed.model_name = *v;
    cfg.embed.dim = positive(flat, "embed.dim", cfg.embed.dim);
    if (auto v = flat.get_int("embed.timeout_ms")) cfg.embed.timeout = std::chrono::milliseconds(*v);
    cfg.embed.max_batch = positive(flat, "embed.max_batch", cfg.embed.max_batch);

    cfg.llm = llm_from_flat(flat, "llm.", base_dir, "");
    for (const auto& name : judge_names) cfg.judges.push_back(llm_from_flat(flat, "judge." + name + ".", base_dir, name));
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::MissingConfig, "config file not found: " + path.string());
    const std::string content = read_file(path);
    RunConfig cfg = run_config_from_flat(FlatConfig::parse(content), path.parent_path());
    cfg.source_text = content;
    return cfg;
}

void apply_environment(RunConfig& config) {
    if (const char* v = std::getenv("PROVERB_EMBED_ENDPOINT"); v && *v) config.embed.endpoint = v;
    if (const char* v = std::getenv("PROVERB_LLM_ENDPOINT"); v && *v) config.llm.endpoint = v;
    if (const char* v = std::getenv("PROVERB_LLM_API_KEY"); v && *v) {
        config.llm.api_key = v;
        for (auto& j : config.judges) j.api_key = v;
    }
}

namespace {

nlohmann::ordered_json llm_json(const LlmProviderConfig& c) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(llm_kind_name(c.kind));
    j["endpoint"] = c.endpoint ? nlohmann::ordered_json(*c.endpoint) : nlohmann::ordered_json(nullptr);
    j["model"] = c.model_name;
    j["tag"] = c.effective_tag();
    j["temperature"] = c.temperature;
    j["max_tokens"] = c.max_tokens;
    j["timeout_ms"] = c.timeout.count();
    j["max_retries"] = c.max_retries;
    j["max_concurrency"] = c.max_concurrency;
    j["backoff_ms"] = c.backoff_initial.count();
    j["script"] = c.script_path ? nlohmann::ordered_json(c.script_path->string()) : nlohmann::ordered_json(nullptr);
    return j;
}

}  // namespace

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["corpus"] = c.corpus_path.string();
    j["strategies"] = nlohmann::ordered_json::array();
    for (Strategy s : c.strategies) j["strategies"].push_back(std::string(strategy_name(s)));
    j["k"] = c.k;
    j["n"] = c.n;
    j["seed"] = c.seed;
    j["run_id"] = c.run_id;
    j["output_dir"] = c.output_dir.string();
    j["cache_dir"] = c.cache_dir.string();
    j["templates_dir"] = c.templates_dir.string();
    j["index"] = c.index_path ? nlohmann::ordered_json(c.index_path->string()) : nlohmann::ordered_json(nullptr);
    j["bertscore_url"] = c.bertscore_url ? nlohmann::ordered_json(*c.bertscore_url) : nlohmann::ordered_json(nullptr);
    j["skip_bertscore"] = c.skip_bertscore;
    j["score_raw"] = c.score_raw;
    j["allow_overlap"] = c.allow_overlap;
    j["dry_run"] = c.dry_run;
    j["accuracy_scale"] = std::string(accuracy_scale_name(c.accuracy_scale));
    j["max_missing_fraction"] = c.max_missing_fraction;
    j["embed"] = {{"kind", std::string(embedding_kind_name(c.embed.kind))},
                  {"endpoint", c.embed.endpoint ? nlohmann::ordered_json(*c.embed.endpoint) : nlohmann::ordered_json(nullptr)},
                  {"model", c.embed.model_name},
                  {"dim", c.embed.dim},
                  {"timeout_ms", c.embed.timeout.count()},
                  {"max_batch", c.embed.max_batch}};
    j["llm"] = llm_json(c.llm);
    j["judges"] = nlohmann::ordered_json::array();
    for (const auto& judge : c.judges) j["judges"].push_back(llm_json(judge));
    return j;
}

}  // namespace proverb
