#include "proverb/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "proverb/digest.hpp"
#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/text.hpp"

namespace proverb {

using ordered_json = nlohmann::ordered_json;

std::string_view split_name(Split s) noexcept {
    switch (s) {
        case Split::Test: return "test";
        case Split::Dev: return "dev";
        case Split::Retrieval: return "retrieval";
    }
    return "test";
}

std::optional<Split> parse_split(std::string_view name) noexcept {
    for (Split s : kAllSplits) {
        if (split_name(s) == name) return s;
    }
    return std::nullopt;
}

const Proverb* Corpus::find(std::string_view id) const noexcept {
    auto it = std::lower_bound(records_.begin(), records_.end(), id,
                               [](const Proverb& p, std::string_view key) { return p.id < key; });
    if (it != records_.end() && it->id == id) return &*it;
    return nullptr;
}

Corpus Corpus::from_records(std::vector<Proverb> records, std::string source_path) {
    std::sort(records.begin(), records.end(), [](const Proverb& a, const Proverb& b) { return a.id < b.id; });
    for (size_t i = 0; i < records.size(); ++i) {
        const Proverb& p = records[i];
        if (text::trim(p.id).empty()) {
            throw Error(ErrorCode::MalformedRecord, "record with empty id");
        }
        if (text::trim(p.yoruba_text).empty() || text::trim(p.reference_gloss).empty()) {
            throw Error(ErrorCode::MalformedRecord, "record " + p.id + " has empty yoruba or gloss");
        }
        if (i > 0 && records[i - 1].id == p.id) {
            throw Error(ErrorCode::DuplicateId, p.id);
        }
    }
    Corpus c;
    c.records_ = std::move(records);
    c.source_path_ = std::move(source_path);
    c.checksum_ = sha256_hex(serialize_corpus(c));
    return c;
}

std::string serialize_record(const Proverb& p) {
    ordered_json j;
    j["id"] = p.id;
    j["yoruba"] = p.yoruba_text;
    j["gloss"] = p.reference_gloss;
    j["split"] = std::string(split_name(p.split));
    if (p.notes) j["notes"] = *p.notes;
    return j.dump();
}

std::string serialize_corpus(const Corpus& c) {
    std::string out;
    for (const Proverb& p : c.records()) {
        out += serialize_record(p);
        out += '\n';
    }
    return out;
}

namespace {

[[noreturn]] void malformed(size_t line, const std::string& reason) {
    throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": " + reason);
}

std::string required_text(const nlohmann::json& obj, const char* key, size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) malformed(line, std::string("missing key '") + key + "'");
    if (!it->is_string()) malformed(line, std::string("key '") + key + "' must be a string");
    return it->get<std::string>();
}

Proverb parse_line(std::string_view line, size_t line_no) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) malformed(line_no, "record must be a JSON object");
    for (const auto& [key, _] : obj.items()) {
        if (key != "id" && key != "yoruba" && key != "gloss" && key != "split" && key != "notes") {
            malformed(line_no, "unknown key '" + key + "'");
        }
    }

    Proverb p;
    p.id = required_text(obj, "id", line_no);
    const std::string split = required_text(obj, "split", line_no);
    const auto parsed_split = parse_split(split);
    if (!parsed_split) malformed(line_no, "unknown split '" + split + "'");
    p.split = *parsed_split;

    try {
        p.id = text::nfc(p.id);
        p.yoruba_text = text::nfc(required_text(obj, "yoruba", line_no));
        p.reference_gloss = text::nfc(required_text(obj, "gloss", line_no));
        if (auto it = obj.find("notes"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) malformed(line_no, "key 'notes' must be a string");
            p.notes = text::nfc(it->get<std::string>());
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MalformedRecord) throw;
        malformed(line_no, e.detail());
    }

    if (text::trim(p.id).empty()) malformed(line_no, "empty id");
    if (text::trim(p.yoruba_text).empty()) malformed(line_no, "empty yoruba text");
    if (text::trim(p.reference_gloss).empty()) malformed(line_no, "empty gloss");
    return p;
}

}  // namespace

Corpus parse_corpus(std::string_view content, std::string source_path, const std::set<Split>& expected_splits) {
    std::vector<Proverb> records;
    std::unordered_set<std::string> seen;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos < content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;

        Proverb p = parse_line(line, line_no);
        if (!seen.insert(p.id).second) throw Error(ErrorCode::DuplicateId, p.id);
        records.push_back(std::move(p));
    }

    if (records.empty()) throw Error(ErrorCode::EmptyCorpus, source_path.empty() ? "<memory>" : source_path);
    for (Split s : expected_splits) {
        const bool present =
            std::any_of(records.begin(), records.end(), [s](const Proverb& p) { return p.split == s; });
        if (!present) throw Error(ErrorCode::MissingSplit, std::string(split_name(s)));
    }
    return Corpus::from_records(std::move(records), std::move(source_path));
}

Corpus load_corpus(const std::filesystem::path& path, const std::set<Split>& expected_splits) {
    return parse_corpus(read_file(path), path.string(), expected_splits);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_corpus(corpus));
}

Corpus filter_split(const Corpus& corpus, Split split) {
    std::vector<Proverb> subset;
    for (const Proverb& p : corpus) {
        if (p.split == split) subset.push_back(p);
    }
    return Corpus::from_records(std::move(subset), corpus.source_path());
}

void check_disjoint(const Corpus& corpus) {
    std::unordered_map<std::string, std::string> exemplar_texts;
    for (const Proverb& p : corpus) {
        if (p.split != Split::Test) exemplar_texts.emplace(std::string(text::trim(p.yoruba_text)), p.id);
    }
    for (const Proverb& p : corpus) {
        if (p.split != Split::Test) continue;
        auto it = exemplar_texts.find(std::string(text::trim(p.yoruba_text)));
        if (it != exemplar_texts.end()) {
            throw Error(ErrorCode::CorpusOverlap,
                        "test proverb " + p.id + " duplicates exemplar " + it->second +
                            " (use --allow-overlap to permit)");
        }
    }
}

}  // namespace proverb
