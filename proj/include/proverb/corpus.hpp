#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace proverb {

enum class Split { Test, Dev, Retrieval };

inline constexpr Split kAllSplits[] = {Split::Test, Split::Dev, Split::Retrieval};

std::string_view split_name(Split s) noexcept;
std::optional<Split> parse_split(std::string_view name) noexcept;

struct Proverb {
    std::string id;
    std::string yoruba_text;
    std::string reference_gloss;
    Split split = Split::Test;
    std::optional<std::string> notes;

    bool operator==(const Proverb&) const = default;
};

// Immutable, id-sorted collection of proverbs with a content checksum.
class Corpus {
public:
    Corpus() = default;

    // Validates id uniqueness and non-empty text, sorts by id, computes the checksum.
    // Text is taken as given; load_corpus is responsible for NFC normalization.
    static Corpus from_records(std::vector<Proverb> records, std::string source_path = {});

    const std::vector<Proverb>& records() const noexcept { return records_; }
    const std::string& source_path() const noexcept { return source_path_; }
    // Hex SHA-256 of serialize_corpus(*this).
    const std::string& checksum() const noexcept { return checksum_; }

    size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const Proverb* find(std::string_view id) const noexcept;

    auto begin() const noexcept { return records_.begin(); }
    auto end() const noexcept { return records_.end(); }

    // Source path is provenance only and does not take part in equality.
    bool operator==(const Corpus& other) const {
        return records_ == other.records_ && checksum_ == other.checksum_;
    }

private:
    std::vector<Proverb> records_;
    std::string source_path_;
    std::string checksum_;
};

// One JSON object per line, keys in the order id, yoruba, gloss, split, notes.
std::string serialize_record(const Proverb& p);
std::string serialize_corpus(const Corpus& c);

Corpus load_corpus(const std::filesystem::path& path, const std::set<Split>& expected_splits = {});
Corpus parse_corpus(std::string_view content, std::string source_path = {},
                    const std::set<Split>& expected_splits = {});
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

Corpus filter_split(const Corpus& corpus, Split split);

// Throws CorpusOverlap when a test proverb's source text also appears in the
// dev or retrieval splits.
void check_disjoint(const Corpus& corpus);

}  // namespace proverb
