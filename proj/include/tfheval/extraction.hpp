#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tfheval {

/// Outcome of pulling a program out of a model reply. `code` is empty exactly
/// when the reply is a Wrong Format response.
struct ExtractionResult {
    std::optional<std::string> code;
    std::size_t block_count = 0;

    bool wrong_format() const noexcept { return !code.has_value(); }
};

/// Bodies of every complete, non-blank triple-backtick block, in order.
std::vector<std::string> fenced_blocks(std::string_view text);

/// The last complete fenced block wins; no complete block means Wrong Format.
ExtractionResult extract_code(std::string_view response);

/// Strips comments and collapses whitespace. String and character literals
/// are kept intact apart from whitespace collapsing. Unterminated comments and
/// literals run to the end of input.
std::string normalize(std::string_view code);

struct Fingerprint {
    std::array<std::uint8_t, 32> digest{};  // SHA-256

    bool operator==(const Fingerprint&) const = default;
    std::string hex() const;
};

/// SHA-256 of normalize(code).
Fingerprint fingerprint(std::string_view code);

/// True iff the normalized candidate matches one of the previously failing
/// attempts in `failed_history`.
bool detect_repetition(std::span<const Fingerprint> failed_history, std::string_view candidate);

}  // namespace tfheval
