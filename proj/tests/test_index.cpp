#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/retrieval_oracle.hpp"
#include "proverb/digest.hpp"
#include "proverb/embedding.hpp"
#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/vecindex.hpp"
#include "support.hpp"

using namespace proverb;
using testsupport::TempDir;

namespace {

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

EmbeddingVector random_unit(std::mt19937_64& rng, size_t dim) {
    std::normal_distribution<double> g;
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    return make_embedding(std::span<const double>(v), "rand");
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("deterministic embedder matches independent oracle") {
    for (const auto& c : testsupport::load_json(testsupport::fixture("oracle_fnv.json"))) {
        const auto text = c["text"].get<std::string>();
        const auto dim = c["dim"].get<size_t>();
        const auto expected = c["vector"].get<std::vector<float>>();
        const EmbeddingVector v = deterministic_test_embed(text, dim);
        CAPTURE(text);
        CAPTURE(dim);
        REQUIRE(v.dim() == dim);
        for (size_t i = 0; i < dim; ++i) CHECK(v.values[i] == expected[i]);
    }
}

TEST_CASE("deterministic embedder is unit norm and NFC invariant") {
    const auto a = deterministic_test_embed("Ìwà l'ẹ̀wà", 64);
    const auto b = deterministic_test_embed("I\xCC\x80wa\xCC\x80 l'e\xCC\xA3\xCC\x80wa\xCC\x80", 64);
    CHECK(a == b);
    CHECK(dot(a.values, a.values) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(a.provider_tag == "deterministic_test:fnv1a-trigram");
    CHECK(code_of([] { deterministic_test_embed("x", 1); }) == ErrorCode::PreconditionViolation);
}

TEST_CASE("make_embedding rejects degenerate input") {
    const std::vector<double> zero(4, 0.0);
    CHECK(code_of([&] { make_embedding(std::span<const double>(zero), "t"); }) == ErrorCode::ProviderUnavailable);
    const std::vector<double> nan{1.0, std::nan("")};
    CHECK(code_of([&] { make_embedding(std::span<const double>(nan), "t"); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("embed_batch validates input and preserves order") {
    EmbeddingProviderConfig cfg;
    cfg.dim = 16;
    CHECK(code_of([&] { embed_batch({}, cfg); }) == ErrorCode::EmptyInput);
    const std::vector<std::string> texts{"one", "two", "three"};
    const auto out = embed_batch(texts, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[1] == deterministic_test_embed("two", 16));
    EmbeddingProviderConfig remote;
    remote.kind = EmbeddingProviderKind::RemoteHttp;
    CHECK(code_of([&] { remote.validate(); }) == ErrorCode::ConfigError);
    remote.endpoint = "http://127.0.0.1:1/embed";
    remote.timeout = std::chrono::milliseconds(200);
    CHECK(code_of([&] { embed_batch(texts, remote); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("search agrees with full-sort brute force on random corpora") {
    std::mt19937_64 rng(1234);
    for (int corpus = 0; corpus < 100; ++corpus) {
        const size_t n = std::uniform_int_distribution<size_t>(1, 200)(rng);
        const size_t dim = std::uniform_int_distribution<size_t>(2, 64)(rng);
        std::vector<IndexEntry> entries;
        std::vector<std::pair<std::string, std::vector<float>>> raw;
        for (size_t i = 0; i < n; ++i) {
            // every tenth entry duplicates its predecessor to exercise tie-breaking
            EmbeddingVector v = (i % 10 == 9) ? entries.back().vector : random_unit(rng, dim);
            const std::string id = "p" + std::to_string(std::uniform_int_distribution<int>(0, 1 << 30)(rng)) + "_" +
                                   std::to_string(i);
            raw.emplace_back(id, v.values);
            entries.push_back({id, std::move(v)});
        }
        const VectorIndex idx = VectorIndex::from_entries(dim, entries, "rand", "sum");
        for (int q = 0; q < 20; ++q) {
            const EmbeddingVector query = random_unit(rng, dim);
            for (size_t k : {1, 3, 10}) {
                const auto got = search(idx, query, k);
                const auto want = oracle::brute_force_topk(raw, query.values, k);
                REQUIRE(got.size() == want.size());
                for (size_t i = 0; i < got.size(); ++i) {
                    CHECK(got[i].proverb_id == want[i].id);
                    CHECK(got[i].rank == i + 1);
                    CHECK(std::abs(got[i].score - want[i].score) <= 1e-6);
                }
            }
        }
    }
}

TEST_CASE("search edge cases") {
    const Corpus c = testsupport::fixture_corpus();
    EmbeddingProviderConfig cfg;
    cfg.dim = 64;
    const VectorIndex idx = build_index(filter_split(c, Split::Retrieval), cfg);
    CHECK(idx.size() == 10);
    const auto q = deterministic_test_embed("Ata kì í ṣe oúnjẹ, ìyọ̀ kì í ṣe omi", 64);
    const auto all = search(idx, q, 100);
    CHECK(all.size() == 10);
    CHECK(all.front().proverb_id == "r09");
    CHECK(all.front().score == doctest::Approx(1.0));
    for (size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].score >= all[i].score);
    CHECK(code_of([&] { search(idx, q, 0); }) == ErrorCode::PreconditionViolation);
    CHECK(code_of([&] { search(idx, deterministic_test_embed("x", 8), 1); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("build_index preconditions") {
    const Corpus c = testsupport::fixture_corpus();
    EmbeddingProviderConfig cfg;
    CHECK(code_of([&] { build_index(c, cfg); }) == ErrorCode::PreconditionViolation);
    CHECK(code_of([&] { build_index(Corpus{}, cfg); }) == ErrorCode::EmptyCorpus);
}

TEST_CASE("pvix round trip and integrity checks") {
    TempDir tmp;
    const Corpus retrieval = filter_split(testsupport::fixture_corpus(), Split::Retrieval);
    EmbeddingProviderConfig cfg;
    cfg.dim = 32;
    const VectorIndex idx = build_index(retrieval, cfg);
    CHECK(idx.corpus_checksum() == retrieval.checksum());
    save_index(idx, tmp / "i.pvix");
    const VectorIndex back = load_index(tmp / "i.pvix");
    CHECK(back == idx);
    const auto q = deterministic_test_embed("omi", 32);
    CHECK(search(back, q, 5) == search(idx, q, 5));

    const std::string bytes = serialize_index(idx);
    CHECK(bytes.substr(0, 4) == "PVIX");

    std::string flipped = bytes;
    flipped[bytes.size() / 2] ^= 0x01;
    CHECK(code_of([&] { deserialize_index(flipped); }) == ErrorCode::CorruptIndex);
    CHECK(code_of([&] { deserialize_index(bytes.substr(0, bytes.size() - 1)); }) == ErrorCode::CorruptIndex);
    CHECK(code_of([&] { deserialize_index("JUNK"); }) == ErrorCode::CorruptIndex);

    // future version with a valid trailing digest
    std::string future = bytes.substr(0, bytes.size() - 32);
    future[4] = 2;
    const Sha256 d = sha256(future);
    future.append(reinterpret_cast<const char*>(d.data()), d.size());
    CHECK(code_of([&] { deserialize_index(future); }) == ErrorCode::VersionMismatch);
    CHECK(code_of([&] { load_index(tmp / "missing.pvix"); }) == ErrorCode::IoError);
}
