#include "proverb/vecindex.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <unordered_set>

#include "proverb/digest.hpp"
#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"

namespace proverb {

VectorIndex VectorIndex::from_entries(size_t dim, std::vector<IndexEntry> entries, std::string provider_tag,
                                      std::string corpus_checksum) {
    if (dim == 0) throw Error(ErrorCode::PreconditionViolation, "index dim must be positive");
    std::unordered_set<std::string> ids;
    for (const auto& e : entries) {
        if (e.vector.dim() != dim) {
            throw Error(ErrorCode::DimensionMismatch,
                        "expected " + std::to_string(dim) + ", got " + std::to_string(e.vector.dim()));
        }
        if (e.vector.provider_tag != provider_tag) {
            throw Error(ErrorCode::PreconditionViolation, "entry " + e.proverb_id + " has provider tag " +
                                                              e.vector.provider_tag + ", index uses " + provider_tag);
        }
        if (!ids.insert(e.proverb_id).second) throw Error(ErrorCode::DuplicateId, e.proverb_id);
    }
    VectorIndex idx;
    idx.dim_ = dim;
    idx.entries_ = std::move(entries);
    idx.provider_tag_ = std::move(provider_tag);
    idx.corpus_checksum_ = std::move(corpus_checksum);
    return idx;
}

VectorIndex build_index(const Corpus& retrieval_corpus, const EmbeddingProviderConfig& provider) {
    if (retrieval_corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "retrieval corpus is empty");
    std::vector<std::string> texts;
    texts.reserve(retrieval_corpus.size());
    for (const Proverb& p : retrieval_corpus) {
        if (p.split != Split::Retrieval) {
            throw Error(ErrorCode::PreconditionViolation,
                        "record " + p.id + " has split " + std::string(split_name(p.split)) + ", expected retrieval");
        }
        texts.push_back(p.yoruba_text);
    }
    std::vector<EmbeddingVector> vectors = embed_batch(texts, provider);

    std::vector<IndexEntry> entries;
    entries.reserve(vectors.size());
    for (size_t i = 0; i < vectors.size(); ++i) {
        entries.push_back({retrieval_corpus.records()[i].id, std::move(vectors[i])});
    }
    return VectorIndex::from_entries(provider.dim, std::move(entries), provider.provider_tag(),
                                     retrieval_corpus.checksum());
}

std::vector<RetrievalResult> search(const VectorIndex& index, const EmbeddingVector& query, size_t k) {
    if (query.dim() != index.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "expected " + std::to_string(index.dim()) + ", got " + std::to_string(query.dim()));
    }
    if (k == 0) throw Error(ErrorCode::PreconditionViolation, "k must be at least 1");

    std::vector<RetrievalResult> scored;
    scored.reserve(index.size());
    for (const auto& e : index.entries()) {
        const double s = std::clamp(dot(e.vector.values, query.values), -1.0, 1.0);
        scored.push_back({e.proverb_id, s, 0});
    }
    const size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [](const RetrievalResult& a, const RetrievalResult& b) {
                          if (a.score != b.score) return a.score > b.score;
                          return a.proverb_id < b.proverb_id;
                      });
    scored.resize(take);
    for (size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
    return scored;
}

namespace {

constexpr std::string_view kMagic = "PVIX";

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_bytes(std::string& out, std::string_view s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.append(s);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

    std::string str(const char* what) {
        const uint32_t len = u32(what);
        need(len, what);
        std::string s(bytes_.substr(pos_, len));
        pos_ += len;
        return s;
    }

    bool at_end() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) throw Error(ErrorCode::CorruptIndex, std::string("truncated at ") + what);
    }

    std::string_view bytes_;
    size_t pos_ = 0;
};

}  // namespace

std::string serialize_index(const VectorIndex& index) {
    std::string out;
    out.append(kMagic);
    put_u32(out, VectorIndex::kFormatVersion);
    put_u32(out, static_cast<uint32_t>(index.dim()));
    put_u32(out, static_cast<uint32_t>(index.size()));
    put_bytes(out, index.provider_tag());
    put_bytes(out, index.corpus_checksum());
    for (const auto& e : index.entries()) {
        put_bytes(out, e.proverb_id);
        for (float f : e.vector.values) put_u32(out, std::bit_cast<uint32_t>(f));
    }
    const Sha256 digest = sha256(out);
    out.append(reinterpret_cast<const char*>(digest.data()), digest.size());
    return out;
}

VectorIndex deserialize_index(std::string_view bytes) {
    constexpr size_t kMinSize = 4 + 4 + 32;
    if (bytes.size() < kMinSize) throw Error(ErrorCode::CorruptIndex, "file too short");
    if (bytes.substr(0, 4) != kMagic) throw Error(ErrorCode::CorruptIndex, "bad magic bytes");

    const std::string_view payload = bytes.substr(0, bytes.size() - 32);
    const Sha256 expected = sha256(payload);
    if (std::memcmp(expected.data(), bytes.data() + payload.size(), 32) != 0) {
        throw Error(ErrorCode::CorruptIndex, "digest mismatch");
    }

    Reader r(payload.substr(4));
    const uint32_t version = r.u32("version");
    if (version != VectorIndex::kFormatVersion) {
        throw Error(ErrorCode::VersionMismatch, "index format version " + std::to_string(version) + ", expected " +
                                                    std::to_string(VectorIndex::kFormatVersion));
    }
    const uint32_t dim = r.u32("dim");
    const uint32_t count = r.u32("count");
    std::string provider_tag = r.str("provider tag");
    std::string checksum = r.str("corpus checksum");
    if (dim == 0) throw Error(ErrorCode::CorruptIndex, "zero dim");

    std::vector<IndexEntry> entries;
    entries.reserve(std::min<size_t>(count, payload.size() / 4));
    for (uint32_t i = 0; i < count; ++i) {
        IndexEntry e;
        e.proverb_id = r.str("entry id");
        e.vector.provider_tag = provider_tag;
        e.vector.values.resize(dim);
        for (uint32_t d = 0; d < dim; ++d) e.vector.values[d] = r.f32("entry vector");
        entries.push_back(std::move(e));
    }
    if (!r.at_end()) throw Error(ErrorCode::CorruptIndex, "trailing bytes after entries");
    try {
        return VectorIndex::from_entries(dim, std::move(entries), std::move(provider_tag), std::move(checksum));
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptIndex, e.what());
    }
}

void save_index(const VectorIndex& index, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_index(index));
}

VectorIndex load_index(const std::filesystem::path& path) { return deserialize_index(read_file(path)); }

}  // namespace proverb
