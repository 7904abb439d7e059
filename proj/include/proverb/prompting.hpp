#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proverb/corpus.hpp"
#include "proverb/embedding.hpp"
#include "proverb/templates.hpp"
#include "proverb/vecindex.hpp"

namespace proverb {

enum class Strategy { ZeroShot, ZeroShotCoT, FewShot, RagFewShot, CgCoT };

// Report row order.
inline constexpr std::array<Strategy, 5> kAllStrategies = {
    Strategy::ZeroShot, Strategy::ZeroShotCoT, Strategy::FewShot, Strategy::RagFewShot, Strategy::CgCoT};

// Stable identifier used in cache records, config files and JSON reports.
std::string_view strategy_name(Strategy s) noexcept;
// Human label used in the markdown table.
std::string_view strategy_label(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;

inline constexpr std::string_view kSentinel = "Final interpretation:";
inline constexpr std::string_view kCotTrigger = "Let’s think through this step-by-step.";

struct PromptBundle {
    // Empty for judge prompts.
    std::optional<Strategy> strategy;
    std::string proverb_id;
    std::string system_text;
    std::string user_text;
    std::vector<std::string> exemplar_ids;
    std::string template_version;

    bool operator==(const PromptBundle&) const = default;
};

std::string bundle_to_json(const PromptBundle& b);

// Renders a bundle from already-chosen exemplars. Pure.
PromptBundle render_bundle(Strategy strategy, const Proverb& p, std::span<const Proverb> exemplars,
                           const TemplateSet& templates);

PromptBundle build_zero_shot(const Proverb& p, const TemplateSet& templates);
PromptBundle build_zero_shot_cot(const Proverb& p, const TemplateSet& templates);

// Seeded Fisher-Yates over [0, pool_size) driven by std::mt19937_64; returns
// the first n indices of the shuffled order.
std::vector<size_t> seeded_sample(size_t pool_size, size_t n, uint64_t seed);

PromptBundle build_few_shot(const Proverb& p, const Corpus& dev_pool, size_t n, uint64_t seed,
                            const TemplateSet& templates);

// Embeds p's source text, searches the index and resolves hits against the
// exemplar corpus, in rank order.
std::vector<Proverb> retrieve_exemplars(const Proverb& p, const VectorIndex& index, const Corpus& exemplar_corpus,
                                        const EmbeddingProviderConfig& provider, size_t k);

PromptBundle build_rag_few_shot(const Proverb& p, const VectorIndex& index, const Corpus& exemplar_corpus,
                                const EmbeddingProviderConfig& provider, size_t k, const TemplateSet& templates);
PromptBundle build_cg_cot(const Proverb& p, const VectorIndex& index, const Corpus& exemplar_corpus,
                          const EmbeddingProviderConfig& provider, size_t k, const TemplateSet& templates);

struct Extraction {
    std::string text;
    bool fallback = false;
};

// Text after the last sentinel, trimmed; the whole text trimmed (fallback) when absent.
Extraction extract_final(std::string_view answer);

}  // namespace proverb
