#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace proverb {

// One versioned template file. The file is split into sections introduced by
// a line "[system]", "[user]" or "[steps]"; version is the SHA-256 of the file.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string user;
    std::vector<std::string> steps;
    std::string version;
};

PromptTemplate parse_template(std::string name, std::string_view content);

// Substitutes {{name}} placeholders in a single pass; substituted values are
// never rescanned. Unknown placeholders throw TemplateError.
std::string render_placeholders(std::string_view tmpl, const std::map<std::string, std::string, std::less<>>& values);

// Names of all {{placeholders}} in order of appearance (duplicates kept).
std::vector<std::string> placeholders_in(std::string_view tmpl);

size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

// Templates loaded from a directory with a manifest.json of the form
// {"templates": {"<key>": {"file": "...", "version": "<sha256>"}}}.
// Each file is hashed at load and must match its manifest version.
class TemplateSet {
public:
    static TemplateSet load(const std::filesystem::path& dir);

    const PromptTemplate& get(std::string_view key) const;
    bool contains(std::string_view key) const;
    const std::filesystem::path& directory() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace proverb
