#include "proverb/templates.hpp"

#include <nlohmann/json.hpp>

#include "proverb/digest.hpp"
#include "proverb/error.hpp"
#include "proverb/fsutil.hpp"
#include "proverb/text.hpp"

namespace proverb {

namespace {

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

}  // namespace

PromptTemplate parse_template(std::string name, std::string_view content) {
    PromptTemplate t;
    t.name = std::move(name);
    t.version = sha256_hex(content);

    enum class Section { None, System, User, Steps } section = Section::None;
    bool saw_system = false, saw_user = false;
    std::string system, user;
    size_t pos = 0;
    while (pos < content.size()) {
        auto eol = content.find('\n', pos);
        if (eol == std::string_view::npos) eol = content.size();
        std::string_view line = content.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (line == "[system]") {
            section = Section::System;
            saw_system = true;
            continue;
        }
        if (line == "[user]") {
            section = Section::User;
            saw_user = true;
            continue;
        }
        if (line == "[steps]") {
            section = Section::Steps;
            continue;
        }
        switch (section) {
            case Section::None:
                if (!text::trim(line).empty()) {
                    throw Error(ErrorCode::TemplateError, t.name + ": content before first section header");
                }
                break;
            case Section::System: system.append(line).push_back('\n'); break;
            case Section::User: user.append(line).push_back('\n'); break;
            case Section::Steps:
                if (!text::trim(line).empty()) t.steps.emplace_back(text::trim(line));
                break;
        }
    }
    if (!saw_system || !saw_user) throw Error(ErrorCode::TemplateError, t.name + ": needs [system] and [user] sections");
    t.system = strip_trailing_newlines(std::move(system));
    t.user = strip_trailing_newlines(std::move(user));
    return t;
}

std::vector<std::string> placeholders_in(std::string_view tmpl) {
    std::vector<std::string> names;
    size_t pos = 0;
    while ((pos = tmpl.find("{{", pos)) != std::string_view::npos) {
        const auto close = tmpl.find("}}", pos + 2);
        if (close == std::string_view::npos) throw Error(ErrorCode::TemplateError, "unterminated placeholder");
        names.emplace_back(tmpl.substr(pos + 2, close - pos - 2));
        pos = close + 2;
    }
    return names;
}

std::string render_placeholders(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    out.reserve(tmpl.size());
    size_t pos = 0;
    while (true) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string_view::npos) throw Error(ErrorCode::TemplateError, "unterminated placeholder");
        out.append(tmpl.substr(pos, open - pos));
        const std::string_view key = tmpl.substr(open + 2, close - open - 2);
        auto it = values.find(key);
        if (it == values.end()) throw Error(ErrorCode::TemplateError, "unknown placeholder {{" + std::string(key) + "}}");
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept {
    if (needle.empty()) return 0;
    size_t count = 0;
    for (size_t pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::TemplateError, manifest_path.string() + ": " + e.what());
    }
    if (!manifest.contains("templates") || !manifest["templates"].is_object()) {
        throw Error(ErrorCode::TemplateError, manifest_path.string() + ": missing 'templates' object");
    }

    TemplateSet set;
    set.dir_ = dir;
    for (const auto& [key, entry] : manifest["templates"].items()) {
        if (!entry.is_object() || !entry.contains("file") || !entry.contains("version")) {
            throw Error(ErrorCode::TemplateError, "manifest entry '" + key + "' needs file and version");
        }
        const std::string file = entry["file"].get<std::string>();
        const std::string expected = entry["version"].get<std::string>();
        PromptTemplate t = parse_template(key, read_file(dir / file));
        if (t.version != expected) {
            throw Error(ErrorCode::TemplateError,
                        "template " + file + " hashes to " + t.version + " but manifest pins " + expected);
        }
        set.templates_.emplace(key, std::move(t));
    }
    return set;
}

const PromptTemplate& TemplateSet::get(std::string_view key) const {
    auto it = templates_.find(key);
    if (it == templates_.end()) throw Error(ErrorCode::TemplateError, "no template named '" + std::string(key) + "'");
    return it->second;
}

bool TemplateSet::contains(std::string_view key) const { return templates_.find(key) != templates_.end(); }

}  // namespace proverb
