#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace proverb {

// Unit-norm dense vector. Construct through make_embedding so the norm and
// finiteness invariants hold.
struct EmbeddingVector {
    std::vector<float> values;
    std::string provider_tag;

    size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

// L2-normalizes raw values. Throws ProviderUnavailable on non-finite or all-zero input.
EmbeddingVector make_embedding(std::span<const double> raw, std::string provider_tag);
EmbeddingVector make_embedding(std::span<const float> raw, std::string provider_tag);

// Left-to-right accumulation in double; the order is fixed so results are
// reproducible across runs.
double dot(std::span<const float> a, std::span<const float> b) noexcept;

enum class EmbeddingProviderKind { RemoteHttp, DeterministicTest };

struct EmbeddingProviderConfig {
    EmbeddingProviderKind kind = EmbeddingProviderKind::DeterministicTest;
    std::optional<std::string> endpoint;
    std::string model_name = "fnv1a-trigram";
    size_t dim = 384;
    std::chrono::milliseconds timeout{30000};
    size_t max_batch = 64;

    // Throws ConfigError when remote_http lacks an endpoint or dim/max_batch is zero.
    void validate() const;
    std::string provider_tag() const;
};

std::string_view embedding_kind_name(EmbeddingProviderKind kind) noexcept;
std::optional<EmbeddingProviderKind> parse_embedding_kind(std::string_view name) noexcept;

uint64_t fnv1a64(std::string_view bytes) noexcept;

// Signed feature hashing of character trigrams (unigrams for texts shorter
// than three code points) into dim buckets, then L2 normalization.
EmbeddingVector deterministic_test_embed(std::string_view text, size_t dim);

// One unit vector per input, in input order. Requests larger than
// config.max_batch are split; any failed chunk fails the whole call.
std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const EmbeddingProviderConfig& config);

}  // namespace proverb
