#include "proverb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "proverb/error.hpp"
#include "proverb/http.hpp"
#include "proverb/text.hpp"

namespace proverb {

std::vector<std::string> tokenize_mt(std::string_view input) {
    const std::u32string chars = text::to_u32(text::lower(text::nfc(input)));
    std::vector<std::string> tokens;
    std::u32string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(text::to_utf8(current));
        current.clear();
    };
    for (char32_t cp : chars) {
        if (text::is_whitespace(cp)) {
            flush();
        } else if (text::is_punctuation(cp)) {
            flush();
            tokens.push_back(text::to_utf8(std::u32string(1, cp)));
        } else {
            current.push_back(cp);
        }
    }
    flush();
    return tokens;
}

namespace {

using NgramCounts = std::unordered_map<std::string, size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, size_t n) {
    NgramCounts counts;
    if (tokens.size() < n) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key;
        for (size_t k = 0; k < n; ++k) {
            key += std::to_string(tokens[i + k].size());
            key += ':';
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

}  // namespace

BleuReport corpus_bleu_tokens(std::span<const TokenPair> pairs) {
    if (pairs.empty()) throw Error(ErrorCode::EmptyPairs, "corpus_bleu needs at least one pair");

    BleuReport r;
    for (const auto& [cand, ref] : pairs) {
        r.candidate_len += cand.size();
        r.reference_len += ref.size();
        for (size_t n = 1; n <= 4; ++n) {
            const NgramCounts c = count_ngrams(cand, n);
            const NgramCounts rc = count_ngrams(ref, n);
            for (const auto& [gram, count] : c) {
                auto it = rc.find(gram);
                if (it != rc.end()) r.matches[n - 1] += std::min(count, it->second);
            }
            if (cand.size() >= n) r.totals[n - 1] += cand.size() - n + 1;
        }
    }
    if (r.candidate_len == 0) throw Error(ErrorCode::AllCandidatesEmpty, "every candidate is empty");

    for (size_t n = 0; n < 4; ++n) {
        r.precisions[n] = r.totals[n] == 0 ? 0.0 : static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]);
    }
    const double c = static_cast<double>(r.candidate_len);
    const double ref_len = static_cast<double>(r.reference_len);
    r.brevity_penalty = c >= ref_len ? 1.0 : std::exp(1.0 - ref_len / c);

    for (size_t n = 1; n < 4; ++n) {
        if (r.matches[n] == 0) {
            r.precisions[n] = 1.0 / (2.0 * static_cast<double>(std::max<size_t>(r.totals[n], 1)));
            r.smoothing_applied = true;
        }
    }
    if (r.matches[0] == 0) {
        r.score = 0.0;
        return r;
    }
    double log_sum = 0.0;
    for (double p : r.precisions) log_sum += std::log(p);
    r.score = std::clamp(100.0 * r.brevity_penalty * std::exp(log_sum / 4.0), 0.0, 100.0);
    return r;
}

BleuReport corpus_bleu(std::span<const TextPair> pairs) {
    std::vector<TokenPair> tokenized;
    tokenized.reserve(pairs.size());
    for (const auto& [cand, ref] : pairs) tokenized.emplace_back(tokenize_mt(cand), tokenize_mt(ref));
    return corpus_bleu_tokens(tokenized);
}

std::vector<BertScoreReport> bertscore_batch(std::span<const TextPair> pairs, const std::string& sidecar_url,
                                             std::chrono::milliseconds timeout) {
    if (pairs.empty()) return {};
    nlohmann::ordered_json body;
    body["pairs"] = nlohmann::ordered_json::array();
    for (const auto& [cand, ref] : pairs) body["pairs"].push_back({{"candidate", cand}, {"reference", ref}});

    std::string url = sidecar_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const http::Response resp = http::post_json(url + "/score", body.dump(), timeout);
    if (!resp.ok()) throw Error(ErrorCode::SidecarUnavailable, url + ": " + resp.describe());

    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(resp.body);
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::SidecarUnavailable, url + ": malformed JSON body");
    }
    if (!parsed.is_object() || !parsed.contains("f1") || !parsed["f1"].is_array()) {
        throw Error(ErrorCode::ShapeMismatch, url + ": response lacks 'f1' array");
    }
    const auto& f1 = parsed["f1"];
    if (f1.size() != pairs.size()) {
        throw Error(ErrorCode::ShapeMismatch,
                    "sent " + std::to_string(pairs.size()) + " pairs, got " + std::to_string(f1.size()) + " scores");
    }
    const std::string tag = parsed.value("model_tag", "");
    std::vector<BertScoreReport> out;
    out.reserve(f1.size());
    for (const auto& v : f1) {
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
            throw Error(ErrorCode::ShapeMismatch, url + ": non-finite score");
        }
        out.push_back({v.get<double>(), tag});
    }
    return out;
}

SidecarHealth bertscore_health(const std::string& sidecar_url, std::chrono::milliseconds timeout) {
    std::string url = sidecar_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const http::Response resp = http::get(url + "/health", timeout);
    SidecarHealth h;
    if (!resp.transport_error.empty()) return h;
    h.ready = resp.status == 200;
    try {
        const auto parsed = nlohmann::json::parse(resp.body);
        h.model_tag = parsed.value("model_tag", "");
    } catch (const nlohmann::json::exception&) {
    }
    return h;
}

}  // namespace proverb
