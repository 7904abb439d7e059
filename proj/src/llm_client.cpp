#include "proverb/llm_client.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <thread>

#include "proverb/digest.hpp"
#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/http.hpp"

namespace proverb {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view llm_kind_name(LlmProviderKind kind) noexcept {
    return kind == LlmProviderKind::RemoteHttp ? "remote_http" : "scripted_mock";
}

std::optional<LlmProviderKind> parse_llm_kind(std::string_view name) noexcept {
    if (name == "remote_http") return LlmProviderKind::RemoteHttp;
    if (name == "scripted_mock") return LlmProviderKind::ScriptedMock;
    return std::nullopt;
}

void LlmProviderConfig::validate() const {
    if (temperature < 0.0) throw Error(ErrorCode::ConfigError, "temperature must be >= 0");
    if (max_tokens == 0) throw Error(ErrorCode::ConfigError, "max_tokens must be positive");
    if (max_concurrency == 0) throw Error(ErrorCode::ConfigError, "max_concurrency must be positive");
    if (kind == LlmProviderKind::ScriptedMock && !script_path) {
        throw Error(ErrorCode::ConfigError, "scripted_mock provider requires a script path");
    }
    if (kind == LlmProviderKind::RemoteHttp && (!endpoint || endpoint->empty())) {
        throw Error(ErrorCode::ConfigError, "remote_http provider requires an endpoint");
    }
}

std::string LlmProviderConfig::provider_tag() const {
    return std::string(llm_kind_name(kind)) + ":" + model_name;
}

// ---------------------------------------------------------------------------
// Remote provider

RemoteHttpProvider::RemoteHttpProvider(LlmProviderConfig config) : config_(std::move(config)) {}

std::string RemoteHttpProvider::complete(const CompletionRequest& request) {
    ordered_json body;
    body["model"] = request.model;
    body["system"] = request.system;
    body["user"] = request.user;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;

    http::Headers headers;
    if (config_.api_key && !config_.api_key->empty()) headers.emplace_back("Authorization", "Bearer " + *config_.api_key);

    const http::Response resp = http::post_json(*config_.endpoint, body.dump(), config_.timeout, headers);
    if (!resp.ok()) throw Error(ErrorCode::ProviderUnavailable, *config_.endpoint + ": " + resp.describe());
    try {
        const json parsed = json::parse(resp.body);
        if (!parsed.is_object() || !parsed.contains("text") || !parsed["text"].is_string()) {
            throw Error(ErrorCode::ProviderUnavailable, *config_.endpoint + ": response lacks string 'text'");
        }
        return parsed["text"].get<std::string>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::ProviderUnavailable, *config_.endpoint + ": malformed JSON body");
    }
}

// ---------------------------------------------------------------------------
// Scripted mock

std::shared_ptr<ScriptedMockProvider> ScriptedMockProvider::from_json(const json& script, std::string name) {
    if (!script.is_object()) throw Error(ErrorCode::ScriptError, "script must be a JSON object");
    std::shared_ptr<ScriptedMockProvider> p(new ScriptedMockProvider());
    p->name_ = std::move(name);
    if (auto it = script.find("default"); it != script.end() && !it->is_null()) {
        p->default_output_ = it->get<std::string>();
    }
    if (auto it = script.find("delay_ms"); it != script.end()) p->delay_ = std::chrono::milliseconds(it->get<int>());

    if (auto it = script.find("rules"); it != script.end()) {
        if (!it->is_array()) throw Error(ErrorCode::ScriptError, "'rules' must be an array");
        for (const auto& r : *it) {
            Rule rule;
            const bool has_prefix = r.contains("digest_prefix");
            const bool has_regex = r.contains("regex");
            if (has_prefix == has_regex) {
                throw Error(ErrorCode::ScriptError, "each rule needs exactly one of digest_prefix or regex");
            }
            if (has_prefix) rule.digest_prefix = r["digest_prefix"].get<std::string>();
            if (has_regex) {
                rule.regex_source = r["regex"].get<std::string>();
                try {
                    rule.regex.emplace(*rule.regex_source, std::regex::ECMAScript);
                } catch (const std::regex_error& e) {
                    throw Error(ErrorCode::ScriptError, "bad regex '" + *rule.regex_source + "': " + e.what());
                }
            }
            if (!r.contains("output")) throw Error(ErrorCode::ScriptError, "rule without output");
            rule.output = r["output"].get<std::string>();
            rule.fail_times = r.value("fail_times", 0);
            if (r.contains("examples")) rule.examples = r["examples"].get<std::vector<std::string>>();
            p->rules_.push_back(std::move(rule));
        }
    }

    // Overlap detection: nested digest prefixes, regexes that match each
    // other's source text or examples, and examples claimed by two rules.
    auto rule_label = [](const Rule& r) { return r.digest_prefix ? "digest_prefix " + *r.digest_prefix : "regex " + *r.regex_source; };
    const auto& rules = p->rules_;
    for (size_t a = 0; a < rules.size(); ++a) {
        for (size_t b = a + 1; b < rules.size(); ++b) {
            const Rule& ra = rules[a];
            const Rule& rb = rules[b];
            bool overlap = false;
            if (ra.digest_prefix && rb.digest_prefix) {
                const auto& x = *ra.digest_prefix;
                const auto& y = *rb.digest_prefix;
                overlap = x.starts_with(y) || y.starts_with(x);
            } else if (ra.regex && rb.regex) {
                overlap = *ra.regex_source == *rb.regex_source ||
                          std::regex_search(*rb.regex_source, *ra.regex) ||
                          std::regex_search(*ra.regex_source, *rb.regex);
            }
            for (const auto& ex : ra.examples) overlap = overlap || (rb.regex && std::regex_search(ex, *rb.regex));
            for (const auto& ex : rb.examples) overlap = overlap || (ra.regex && std::regex_search(ex, *ra.regex));
            if (overlap) {
                throw Error(ErrorCode::AmbiguousScript, rule_label(ra) + " overlaps " + rule_label(rb));
            }
        }
    }
    return p;
}

std::shared_ptr<ScriptedMockProvider> ScriptedMockProvider::from_file(const fs::path& path) {
    json script;
    try {
        script = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ScriptError, path.string() + ": " + e.what());
    }
    return from_json(script, path.stem().string());
}

std::optional<size_t> ScriptedMockProvider::match(const CompletionRequest& request) const {
    const std::string haystack = request.system + "\n" + request.user;
    std::optional<size_t> found;
    for (size_t i = 0; i < rules_.size(); ++i) {
        const Rule& r = rules_[i];
        const bool hit = r.digest_prefix ? request.prompt_digest.starts_with(*r.digest_prefix)
                                         : std::regex_search(haystack, *r.regex);
        if (!hit) continue;
        if (found) throw Error(ErrorCode::AmbiguousScript, "prompt " + request.prompt_digest + " matches several rules");
        found = i;
    }
    return found;
}

std::string ScriptedMockProvider::complete(const CompletionRequest& request) {
    ++calls_;
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    const auto idx = match(request);
    if (!idx) {
        if (default_output_) return *default_output_;
        ++failures_;
        throw Error(ErrorCode::ProviderUnavailable, "no script rule matched prompt " + request.prompt_digest);
    }
    const Rule& rule = rules_[*idx];
    if (rule.fail_times != 0) {
        int attempt = 0;
        {
            std::lock_guard lock(mutex_);
            attempt = ++attempts_by_digest_[request.prompt_digest];
        }
        if (rule.fail_times < 0 || attempt <= rule.fail_times) {
            ++failures_;
            throw Error(ErrorCode::ProviderUnavailable, "scripted failure " + std::to_string(attempt));
        }
    }
    return rule.output;
}

std::shared_ptr<CompletionProvider> make_provider(const LlmProviderConfig& config) {
    config.validate();
    if (config.kind == LlmProviderKind::RemoteHttp) return std::make_shared<RemoteHttpProvider>(config);
    return ScriptedMockProvider::from_file(*config.script_path);
}

// ---------------------------------------------------------------------------
// Records and cache

std::string prompt_digest(const PromptBundle& bundle, const LlmProviderConfig& config) {
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.17g", config.temperature);
    return to_hex(Sha256Builder()
                      .field(config.model_name)
                      .field(temp)
                      .field(bundle.system_text)
                      .field(bundle.user_text)
                      .field(bundle.template_version)
                      .finish());
}

ordered_json to_json(const GenerationRecord& r) {
    ordered_json j;
    j["prompt_digest"] = r.prompt_digest;
    j["proverb_id"] = r.proverb_id;
    j["strategy"] = r.strategy ? ordered_json(std::string(strategy_name(*r.strategy))) : ordered_json(nullptr);
    j["raw_output"] = r.raw_output;
    j["final_interpretation"] = r.final_interpretation;
    j["extraction_fallback"] = r.extraction_fallback;
    j["latency_ms"] = r.latency.count();
    j["from_cache"] = r.from_cache;
    j["provider_tag"] = r.provider_tag;
    j["attempts"] = r.attempts;
    return j;
}

GenerationRecord generation_from_json(const json& j) {
    GenerationRecord r;
    r.prompt_digest = j.at("prompt_digest").get<std::string>();
    r.proverb_id = j.at("proverb_id").get<std::string>();
    if (!j.at("strategy").is_null()) {
        const auto s = parse_strategy(j.at("strategy").get<std::string>());
        if (!s) throw Error(ErrorCode::MalformedRecord, "unknown strategy in generation record");
        r.strategy = *s;
    }
    r.raw_output = j.at("raw_output").get<std::string>();
    const Extraction ex = extract_final(r.raw_output);
    r.final_interpretation = ex.text;
    r.extraction_fallback = ex.fallback;
    r.latency = std::chrono::milliseconds(j.value("latency_ms", 0));
    r.from_cache = j.value("from_cache", false);
    r.provider_tag = j.value("provider_tag", "");
    r.attempts = j.value("attempts", 0u);
    return r;
}

fs::path ResponseCache::path_for(std::string_view digest) const {
    return dir_ / std::string(digest.substr(0, 2)) / (std::string(digest) + ".json");
}

std::optional<GenerationRecord> ResponseCache::lookup(std::string_view digest) const {
    const fs::path path = path_for(digest);
    std::error_code ec;
    if (!fs::exists(path, ec)) return std::nullopt;
    try {
        GenerationRecord r = generation_from_json(json::parse(read_file(path)));
        if (r.prompt_digest != digest) throw Error(ErrorCode::CacheCorrupt, path.string() + ": digest mismatch");
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CacheCorrupt, path.string() + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CacheCorrupt) throw;
        throw Error(ErrorCode::CacheCorrupt, path.string() + ": " + e.detail());
    }
}

void ResponseCache::store(const GenerationRecord& record) const {
    GenerationRecord stored = record;
    stored.from_cache = false;
    write_file_atomic(path_for(record.prompt_digest), to_json(stored).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(LlmProviderConfig config, std::shared_ptr<CompletionProvider> provider,
                     std::shared_ptr<const ResponseCache> cache)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      cache_(std::move(cache)),
      slots_(static_cast<std::ptrdiff_t>(std::max<size_t>(config_.max_concurrency, 1))) {}

ClientStats LlmClient::stats() const {
    return {provider_calls_.load(), cache_hits_.load(), coalesced_.load(), max_active_.load()};
}

namespace {

GenerationRecord rebind(GenerationRecord r, const PromptBundle& bundle, bool from_cache) {
    r.proverb_id = bundle.proverb_id;
    r.strategy = bundle.strategy;
    r.from_cache = from_cache;
    return r;
}

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds initial, unsigned attempt) {
    thread_local std::mt19937 rng{std::random_device{}()};
    const auto base = initial.count() * (int64_t{1} << std::min(attempt - 1, 16u));
    std::uniform_int_distribution<int64_t> jitter(0, std::max<int64_t>(initial.count() / 2, 0));
    return std::chrono::milliseconds(base + jitter(rng));
}

}  // namespace

GenerationRecord LlmClient::call_provider(const PromptBundle& bundle, const std::string& digest) {
    const CompletionRequest request{config_.model_name, bundle.system_text, bundle.user_text, config_.temperature,
                                    config_.max_tokens, digest};
    const unsigned max_attempts = std::max(config_.max_retries, 1u);
    const auto started = std::chrono::steady_clock::now();
    std::string last_cause;
    for (unsigned attempt = 1; attempt <= max_attempts; ++attempt) {
        if (attempt > 1) std::this_thread::sleep_for(backoff_delay(config_.backoff_initial, attempt - 1));
        std::string output;
        bool ok = false;
        slots_.acquire();
        const size_t now_active = ++active_;
        size_t seen = max_active_.load();
        while (now_active > seen && !max_active_.compare_exchange_weak(seen, now_active)) {
        }
        ++provider_calls_;
        try {
            output = provider_->complete(request);
            ok = true;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProviderUnavailable) {
                --active_;
                slots_.release();
                throw;
            }
            last_cause = e.detail();
        } catch (...) {
            --active_;
            slots_.release();
            throw;
        }
        --active_;
        slots_.release();

        if (ok) {
            GenerationRecord r;
            r.proverb_id = bundle.proverb_id;
            r.strategy = bundle.strategy;
            r.prompt_digest = digest;
            r.raw_output = std::move(output);
            const Extraction ex = extract_final(r.raw_output);
            r.final_interpretation = ex.text;
            r.extraction_fallback = ex.fallback;
            r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
            r.provider_tag = provider_->tag();
            r.attempts = attempt;
            return r;
        }
    }
    throw Error(ErrorCode::ProviderExhausted,
                std::to_string(max_attempts) + " attempts, last cause: " + last_cause);
}

GenerationRecord LlmClient::complete(const PromptBundle& bundle) {
    const std::string digest = prompt_digest(bundle, config_);

    std::promise<GenerationRecord> promise;
    {
        std::unique_lock lock(mutex_);
        if (auto it = in_flight_.find(digest); it != in_flight_.end()) {
            auto shared = it->second;
            lock.unlock();
            ++coalesced_;
            return rebind(shared.get(), bundle, true);
        }
        in_flight_.emplace(digest, promise.get_future().share());
    }

    auto finish = [&] {
        std::lock_guard lock(mutex_);
        in_flight_.erase(digest);
    };

    try {
        if (auto cached = cache_->lookup(digest)) {
            ++cache_hits_;
            promise.set_value(*cached);
            finish();
            return rebind(std::move(*cached), bundle, true);
        }
        GenerationRecord fresh = call_provider(bundle, digest);
        cache_->store(fresh);
        promise.set_value(fresh);
        finish();
        return fresh;
    } catch (...) {
        promise.set_exception(std::current_exception());
        finish();
        throw;
    }
}

}  // namespace proverb
