#include "tfheval/extraction.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/evp.h>

namespace tfheval {

namespace {

constexpr std::string_view kFence = "```";

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<std::string> fenced_blocks(std::string_view text) {
    std::vector<std::string> blocks;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find(kFence, pos);
        if (open == std::string_view::npos) break;
        const auto info_begin = open + kFence.size();
        const auto eol = text.find('\n', info_begin);
        const auto inline_close = text.find(kFence, info_begin);

        std::size_t body_begin = 0;
        std::size_t close = 0;
        if (inline_close != std::string_view::npos && (eol == std::string_view::npos || inline_close < eol)) {
            // ```single line```
            body_begin = info_begin;
            close = inline_close;
        } else {
            if (eol == std::string_view::npos) break;  // opening fence with nothing after it
            body_begin = eol + 1;
            close = text.find(kFence, body_begin);
            if (close == std::string_view::npos) break;  // unterminated block
        }

        auto body = text.substr(body_begin, close - body_begin);
        if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
        if (!blank(body)) blocks.emplace_back(body);
        pos = close + kFence.size();
    }
    return blocks;
}

ExtractionResult extract_code(std::string_view response) {
    auto blocks = fenced_blocks(response);
    ExtractionResult result;
    result.block_count = blocks.size();
    if (!blocks.empty()) {
        result.code = std::move(blocks.back());
    }
    return result;
}

std::string normalize(std::string_view code) {
    std::string out;
    out.reserve(code.size());
    bool pending_space = false;

    auto emit = [&](char c) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = true;
            return;
        }
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    };

    const std::size_t n = code.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = code[i];
        if (c == '/' && i + 1 < n && code[i + 1] == '/') {
            i += 2;
            while (i < n && code[i] != '\n') ++i;
            pending_space = true;
        } else if (c == '/' && i + 1 < n && code[i + 1] == '*') {
            const auto end = code.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
            pending_space = true;
        } else if (c == '"' || c == '\'') {
            emit(c);
            ++i;
            while (i < n) {
                const char d = code[i++];
                emit(d);
                if (d == '\\' && i < n) {
                    emit(code[i++]);
                } else if (d == c) {
                    break;
                }
            }
        } else {
            emit(c);
            ++i;
        }
    }
    return out;
}

std::string Fingerprint::hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(digest.size() * 2);
    for (auto b : digest) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xF]);
    }
    return s;
}

Fingerprint fingerprint(std::string_view code) {
    const auto normalized = normalize(code);
    Fingerprint fp;
    unsigned int len = 0;
    EVP_Digest(normalized.data(), normalized.size(), fp.digest.data(), &len, EVP_sha256(), nullptr);
    return fp;
}

bool detect_repetition(std::span<const Fingerprint> failed_history, std::string_view candidate) {
    const auto fp = fingerprint(candidate);
    return std::find(failed_history.begin(), failed_history.end(), fp) != failed_history.end();
}

}  // namespace tfheval
