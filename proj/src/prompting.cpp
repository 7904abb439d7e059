#include "proverb/prompting.hpp"

#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "proverb/error.hpp"
#include "proverb/text.hpp"

namespace proverb {

std::string_view strategy_name(Strategy s) noexcept {
    switch (s) {
        case Strategy::ZeroShot: return "zero_shot";
        case Strategy::ZeroShotCoT: return "zero_shot_cot";
        case Strategy::FewShot: return "few_shot";
        case Strategy::RagFewShot: return "rag_few_shot";
        case Strategy::CgCoT: return "cg_cot";
    }
    return "zero_shot";
}

std::string_view strategy_label(Strategy s) noexcept {
    switch (s) {
        case Strategy::ZeroShot: return "Zero-Shot";
        case Strategy::ZeroShotCoT: return "Zero-Shot-CoT";
        case Strategy::FewShot: return "Few-Shot";
        case Strategy::RagFewShot: return "RAG Few-Shot";
        case Strategy::CgCoT: return "CG-CoT";
    }
    return "Zero-Shot";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept {
    for (Strategy s : kAllStrategies) {
        if (strategy_name(s) == name) return s;
    }
    return std::nullopt;
}

std::string bundle_to_json(const PromptBundle& b) {
    nlohmann::ordered_json j;
    j["strategy"] = b.strategy ? nlohmann::ordered_json(std::string(strategy_name(*b.strategy))) : nlohmann::ordered_json(nullptr);
    j["proverb_id"] = b.proverb_id;
    j["template_version"] = b.template_version;
    j["exemplar_ids"] = b.exemplar_ids;
    j["system_text"] = b.system_text;
    j["user_text"] = b.user_text;
    return j.dump(2) + "\n";
}

namespace {

bool uses_exemplars(Strategy s) {
    return s == Strategy::FewShot || s == Strategy::RagFewShot || s == Strategy::CgCoT;
}

std::string render_exemplars(std::span<const Proverb> exemplars) {
    std::string out;
    for (size_t i = 0; i < exemplars.size(); ++i) {
        const Proverb& e = exemplars[i];
        if (i > 0) out += "\n\n";
        out += "Example " + std::to_string(i + 1) + "\n";
        out += "Proverb: " + e.yoruba_text + "\n";
        out += "Interpretation: " + e.reference_gloss;
        if (e.notes && !text::trim(*e.notes).empty()) out += "\nCultural note: " + *e.notes;
    }
    return out;
}

std::string render_steps(const std::vector<std::string>& steps) {
    std::string out;
    for (size_t i = 0; i < steps.size(); ++i) {
        if (i > 0) out += "\n";
        out += "Step " + std::to_string(i + 1) + ": " + steps[i];
    }
    return out;
}

}  // namespace

PromptBundle render_bundle(Strategy strategy, const Proverb& p, std::span<const Proverb> exemplars,
                           const TemplateSet& templates) {
    const PromptTemplate& t = templates.get(strategy_name(strategy));
    if (!uses_exemplars(strategy) && !exemplars.empty()) {
        throw Error(ErrorCode::PreconditionViolation,
                    std::string(strategy_name(strategy)) + " prompts take no exemplars");
    }

    std::map<std::string, std::string, std::less<>> values{{"proverb", p.yoruba_text}};
    if (uses_exemplars(strategy)) values["exemplars"] = render_exemplars(exemplars);
    if (strategy == Strategy::CgCoT) {
        if (t.steps.size() != 4) {
            throw Error(ErrorCode::TemplateError, "cg_cot template must define exactly four steps, found " +
                                                      std::to_string(t.steps.size()));
        }
        values["steps"] = render_steps(t.steps);
    }

    PromptBundle b;
    b.strategy = strategy;
    b.proverb_id = p.id;
    b.template_version = t.version;
    b.system_text = render_placeholders(t.system, values);
    b.user_text = render_placeholders(t.user, values);
    for (const Proverb& e : exemplars) b.exemplar_ids.push_back(e.id);

    if (count_occurrences(b.user_text, kSentinel) != 1) {
        throw Error(ErrorCode::TemplateError,
                    std::string(strategy_name(strategy)) + " prompt must contain the answer sentinel exactly once");
    }
    return b;
}

PromptBundle build_zero_shot(const Proverb& p, const TemplateSet& templates) {
    return render_bundle(Strategy::ZeroShot, p, {}, templates);
}

PromptBundle build_zero_shot_cot(const Proverb& p, const TemplateSet& templates) {
    return render_bundle(Strategy::ZeroShotCoT, p, {}, templates);
}

std::vector<size_t> seeded_sample(size_t pool_size, size_t n, uint64_t seed) {
    if (n > pool_size) {
        throw Error(ErrorCode::InsufficientExamples,
                    "need " + std::to_string(n) + ", available " + std::to_string(pool_size));
    }
    std::vector<size_t> order(pool_size);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(seed);
    // Rejection sampling keeps the draw unbiased and independent of the
    // standard library's distribution implementation.
    auto bounded = [&rng](uint64_t range) {
        const uint64_t threshold = (0 - range) % range;
        uint64_t x = rng();
        while (x < threshold) x = rng();
        return x % range;
    };
    for (size_t i = pool_size; i > 1; --i) {
        const size_t j = static_cast<size_t>(bounded(i));
        std::swap(order[i - 1], order[j]);
    }
    order.resize(n);
    return order;
}

PromptBundle build_few_shot(const Proverb& p, const Corpus& dev_pool, size_t n, uint64_t seed,
                            const TemplateSet& templates) {
    if (n == 0) throw Error(ErrorCode::PreconditionViolation, "few-shot n must be positive");
    for (const Proverb& d : dev_pool) {
        if (d.split != Split::Dev) {
            throw Error(ErrorCode::PreconditionViolation, "few-shot pool record " + d.id + " is not in the dev split");
        }
    }
    if (dev_pool.find(p.id) != nullptr) {
        throw Error(ErrorCode::PreconditionViolation, "query proverb " + p.id + " is in the few-shot pool");
    }
    std::vector<Proverb> chosen;
    for (size_t i : seeded_sample(dev_pool.size(), n, seed)) chosen.push_back(dev_pool.records()[i]);
    return render_bundle(Strategy::FewShot, p, chosen, templates);
}

std::vector<Proverb> retrieve_exemplars(const Proverb& p, const VectorIndex& index, const Corpus& exemplar_corpus,
                                        const EmbeddingProviderConfig& provider, size_t k) {
    if (provider.provider_tag() != index.provider_tag()) {
        throw Error(ErrorCode::StaleIndex, "index built with " + index.provider_tag() + ", query provider is " +
                                               provider.provider_tag());
    }
    const std::vector<std::string> query_text{p.yoruba_text};
    const auto query = embed_batch(query_text, provider);
    std::vector<Proverb> out;
    for (const RetrievalResult& hit : search(index, query.front(), k)) {
        const Proverb* e = exemplar_corpus.find(hit.proverb_id);
        if (e == nullptr) throw Error(ErrorCode::StaleIndex, "indexed id " + hit.proverb_id + " is not in the corpus");
        out.push_back(*e);
    }
    return out;
}

PromptBundle build_rag_few_shot(const Proverb& p, const VectorIndex& index, const Corpus& exemplar_corpus,
                                const EmbeddingProviderConfig& provider, size_t k, const TemplateSet& templates) {
    const auto exemplars = retrieve_exemplars(p, index, exemplar_corpus, provider, k);
    return render_bundle(Strategy::RagFewShot, p, exemplars, templates);
}

PromptBundle build_cg_cot(const Proverb& p, const VectorIndex& index, const Corpus& exemplar_corpus,
                          const EmbeddingProviderConfig& provider, size_t k, const TemplateSet& templates) {
    const auto exemplars = retrieve_exemplars(p, index, exemplar_corpus, provider, k);
    return render_bundle(Strategy::CgCoT, p, exemplars, templates);
}

Extraction extract_final(std::string_view answer) {
    const auto pos = answer.rfind(kSentinel);
    if (pos == std::string_view::npos) return {std::string(text::trim(answer)), true};
    return {std::string(text::trim(answer.substr(pos + kSentinel.size()))), false};
}

}  // namespace proverb
