#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace proverb {

using Sha256 = std::array<uint8_t, 32>;

Sha256 sha256(std::span<const uint8_t> bytes);
Sha256 sha256(std::string_view bytes);

std::string to_hex(std::span<const uint8_t> bytes);
std::string sha256_hex(std::string_view bytes);

// Incremental hashing for streamed content.
class Sha256Builder {
public:
    Sha256Builder();
    ~Sha256Builder();
    Sha256Builder(const Sha256Builder&) = delete;
    Sha256Builder& operator=(const Sha256Builder&) = delete;

    Sha256Builder& update(std::string_view bytes);
    // Appends a length-prefixed field so adjacent fields cannot alias.
    Sha256Builder& field(std::string_view bytes);
    Sha256 finish();

private:
    void* ctx_;
};

}  // namespace proverb
