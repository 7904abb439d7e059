#include "proverb/digest.hpp"

#include <openssl/evp.h>

#include "proverb/error.hpp"

namespace proverb {

namespace {

EVP_MD_CTX* as_ctx(void* p) { return static_cast<EVP_MD_CTX*>(p); }

}  // namespace

Sha256Builder::Sha256Builder() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(as_ctx(ctx_), EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 init failed");
    }
}

Sha256Builder::~Sha256Builder() { EVP_MD_CTX_free(as_ctx(ctx_)); }

Sha256Builder& Sha256Builder::update(std::string_view bytes) {
    if (EVP_DigestUpdate(as_ctx(ctx_), bytes.data(), bytes.size()) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 update failed");
    }
    return *this;
}

Sha256Builder& Sha256Builder::field(std::string_view bytes) {
    update(std::to_string(bytes.size()));
    update(":");
    return update(bytes);
}

Sha256 Sha256Builder::finish() {
    Sha256 out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(as_ctx(ctx_), out.data(), &len) != 1 || len != out.size()) {
        throw Error(ErrorCode::IoError, "SHA-256 final failed");
    }
    return out;
}

Sha256 sha256(std::span<const uint8_t> bytes) {
    return Sha256Builder()
        .update(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()))
        .finish();
}

Sha256 sha256(std::string_view bytes) { return Sha256Builder().update(bytes).finish(); }

std::string to_hex(std::span<const uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) { return to_hex(sha256(bytes)); }

}  // namespace proverb
