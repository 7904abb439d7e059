#pragma once

#include <array>
#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace proverb {

// NFC, lowercase, spaces around every Unicode punctuation character, split on
// whitespace runs.
std::vector<std::string> tokenize_mt(std::string_view text);

struct BleuReport {
    double score = 0.0;
    std::array<double, 4> precisions{};
    double brevity_penalty = 1.0;
    size_t candidate_len = 0;
    size_t reference_len = 0;
    bool smoothing_applied = false;
    // Clipped matches and candidate n-gram totals per order.
    std::array<size_t, 4> matches{};
    std::array<size_t, 4> totals{};
};

using TextPair = std::pair<std::string, std::string>;  // (candidate, reference)
using TokenPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

// Corpus-level BLEU-4 with a single reference per candidate. Orders n >= 2
// with no matches use p_n = 1 / (2 * candidate n-gram total); p_1 = 0 gives 0.
BleuReport corpus_bleu(std::span<const TextPair> pairs);
BleuReport corpus_bleu_tokens(std::span<const TokenPair> pairs);

struct BertScoreReport {
    double f1 = 0.0;
    std::string model_tag;
};

// Client for the BERTScore sidecar: POST <url>/score with
// {"pairs": [{"candidate", "reference"}]} -> {"f1": [...], "model_tag"}.
std::vector<BertScoreReport> bertscore_batch(std::span<const TextPair> pairs, const std::string& sidecar_url,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(120));

struct SidecarHealth {
    bool ready = false;
    std::string model_tag;
};
SidecarHealth bertscore_health(const std::string& sidecar_url,
                               std::chrono::milliseconds timeout = std::chrono::seconds(5));

}  // namespace proverb
