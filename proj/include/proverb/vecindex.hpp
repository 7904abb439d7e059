#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "proverb/corpus.hpp"
#include "proverb/embedding.hpp"

namespace proverb {

struct IndexEntry {
    std::string proverb_id;
    EmbeddingVector vector;

    bool operator==(const IndexEntry&) const = default;
};

// Flat exact-search index over retrieval-split proverbs.
class VectorIndex {
public:
    inline static constexpr uint32_t kFormatVersion = 1;

    VectorIndex() = default;

    // Throws PreconditionViolation on mixed dims/tags or duplicate ids.
    static VectorIndex from_entries(size_t dim, std::vector<IndexEntry> entries, std::string provider_tag,
                                    std::string corpus_checksum);

    size_t dim() const noexcept { return dim_; }
    size_t size() const noexcept { return entries_.size(); }
    const std::vector<IndexEntry>& entries() const noexcept { return entries_; }
    const std::string& provider_tag() const noexcept { return provider_tag_; }
    const std::string& corpus_checksum() const noexcept { return corpus_checksum_; }

    bool operator==(const VectorIndex&) const = default;

private:
    size_t dim_ = 0;
    std::vector<IndexEntry> entries_;
    std::string provider_tag_;
    std::string corpus_checksum_;
};

struct RetrievalResult {
    std::string proverb_id;
    double score = 0.0;
    size_t rank = 0;

    bool operator==(const RetrievalResult&) const = default;
};

VectorIndex build_index(const Corpus& retrieval_corpus, const EmbeddingProviderConfig& provider);

// Top min(k, size) entries by descending cosine, ties by ascending id.
std::vector<RetrievalResult> search(const VectorIndex& index, const EmbeddingVector& query, size_t k);

// PVIX container: magic, version, dim, count, provider tag, corpus checksum,
// entries, trailing SHA-256 over everything before it. Integers and floats
// are little-endian.
std::string serialize_index(const VectorIndex& index);
VectorIndex deserialize_index(std::string_view bytes);

void save_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_index(const std::filesystem::path& path);

}  // namespace proverb
