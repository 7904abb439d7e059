#include "proverb/embedding.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "proverb/error.hpp"
#include "proverb/http.hpp"
#include "proverb/text.hpp"

namespace proverb {

EmbeddingVector make_embedding(std::span<const double> raw, std::string provider_tag) {
    double sum_sq = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v)) throw Error(ErrorCode::ProviderUnavailable, "non-finite embedding component");
        sum_sq += v * v;
    }
    if (raw.empty() || sum_sq == 0.0) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding has zero norm");
    }
    const double norm = std::sqrt(sum_sq);
    EmbeddingVector out;
    out.provider_tag = std::move(provider_tag);
    out.values.reserve(raw.size());
    for (double v : raw) out.values.push_back(static_cast<float>(v / norm));
    return out;
}

EmbeddingVector make_embedding(std::span<const float> raw, std::string provider_tag) {
    std::vector<double> widened(raw.begin(), raw.end());
    return make_embedding(std::span<const double>(widened), std::move(provider_tag));
}

double dot(std::span<const float> a, std::span<const float> b) noexcept {
    double acc = 0.0;
    const size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

std::string_view embedding_kind_name(EmbeddingProviderKind kind) noexcept {
    return kind == EmbeddingProviderKind::RemoteHttp ? "remote_http" : "deterministic_test";
}

std::optional<EmbeddingProviderKind> parse_embedding_kind(std::string_view name) noexcept {
    if (name == "remote_http") return EmbeddingProviderKind::RemoteHttp;
    if (name == "deterministic_test") return EmbeddingProviderKind::DeterministicTest;
    return std::nullopt;
}

void EmbeddingProviderConfig::validate() const {
    if (dim == 0) throw Error(ErrorCode::ConfigError, "embedding dim must be positive");
    if (max_batch == 0) throw Error(ErrorCode::ConfigError, "embedding max_batch must be positive");
    if (kind == EmbeddingProviderKind::RemoteHttp && (!endpoint || endpoint->empty())) {
        throw Error(ErrorCode::ConfigError, "remote_http embedding provider requires an endpoint");
    }
    if (kind == EmbeddingProviderKind::DeterministicTest && dim < 2) {
        throw Error(ErrorCode::ConfigError, "deterministic_test embedding requires dim >= 2");
    }
}

std::string EmbeddingProviderConfig::provider_tag() const {
    if (kind == EmbeddingProviderKind::DeterministicTest) return "deterministic_test:fnv1a-trigram";
    return "remote_http:" + model_name;
}

uint64_t fnv1a64(std::string_view bytes) noexcept {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

EmbeddingVector deterministic_test_embed(std::string_view text, size_t dim) {
    if (dim < 2) throw Error(ErrorCode::PreconditionViolation, "deterministic_test_embed requires dim >= 2");
    const std::string normalized = text::nfc(text);
    const std::vector<std::string> chars = text::code_points(normalized);

    std::vector<double> acc(dim, 0.0);
    auto add = [&](std::string_view gram) {
        const uint64_t h = fnv1a64(gram);
        acc[h % dim] += (h % 2 == 0) ? 1.0 : -1.0;
    };
    if (chars.size() >= 3) {
        for (size_t i = 0; i + 3 <= chars.size(); ++i) add(chars[i] + chars[i + 1] + chars[i + 2]);
    } else {
        for (const auto& c : chars) add(c);
    }

    bool all_zero = true;
    for (double v : acc) all_zero = all_zero && v == 0.0;
    // Empty text or fully cancelling buckets: fall back to a one-hot bucket of the whole text.
    if (all_zero) acc[fnv1a64(normalized) % dim] = 1.0;

    return make_embedding(std::span<const double>(acc), EmbeddingProviderConfig{}.provider_tag());
}

namespace {

std::vector<EmbeddingVector> remote_chunk(std::span<const std::string> texts, const EmbeddingProviderConfig& config) {
    nlohmann::json request;
    request["model"] = config.model_name;
    request["texts"] = nlohmann::json::array();
    for (const auto& t : texts) request["texts"].push_back(t);

    const std::string& endpoint = *config.endpoint;
    const http::Response resp = http::post_json(endpoint, request.dump(), config.timeout);
    if (!resp.ok()) throw Error(ErrorCode::ProviderUnavailable, endpoint + ": " + resp.describe());

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(resp.body);
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ProviderUnavailable, endpoint + ": malformed JSON body");
    }
    if (!body.is_object() || !body.contains("vectors") || !body["vectors"].is_array()) {
        throw Error(ErrorCode::ProviderUnavailable, endpoint + ": response lacks 'vectors' array");
    }
    const auto& vectors = body["vectors"];
    if (vectors.size() != texts.size()) {
        throw Error(ErrorCode::ProviderUnavailable, endpoint + ": expected " + std::to_string(texts.size()) +
                                                        " vectors, got " + std::to_string(vectors.size()));
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& v : vectors) {
        if (!v.is_array()) throw Error(ErrorCode::ProviderUnavailable, endpoint + ": vector is not an array");
        if (v.size() != config.dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "expected " + std::to_string(config.dim) + ", got " + std::to_string(v.size()));
        }
        std::vector<double> raw;
        raw.reserve(v.size());
        for (const auto& x : v) {
            if (!x.is_number()) throw Error(ErrorCode::ProviderUnavailable, endpoint + ": non-numeric component");
            raw.push_back(x.get<double>());
        }
        out.push_back(make_embedding(std::span<const double>(raw), config.provider_tag()));
    }
    return out;
}

}  // namespace

std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbeddingProviderConfig& config) {
    config.validate();
    if (texts.empty()) throw Error(ErrorCode::EmptyInput, "no texts to embed");
    for (size_t i = 0; i < texts.size(); ++i) {
        if (text::trim(texts[i]).empty()) {
            throw Error(ErrorCode::EmptyInput, "text at position " + std::to_string(i) + " is empty");
        }
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    if (config.kind == EmbeddingProviderKind::DeterministicTest) {
        for (const auto& t : texts) out.push_back(deterministic_test_embed(t, config.dim));
        return out;
    }
    for (size_t start = 0; start < texts.size(); start += config.max_batch) {
        const size_t count = std::min(config.max_batch, texts.size() - start);
        auto chunk = remote_chunk(texts.subspan(start, count), config);
        for (auto& v : chunk) out.push_back(std::move(v));
    }
    return out;
}

}  // namespace proverb
