#include "tfheval/lexer.hpp"

#include <array>
#include <cctype>

namespace tfheval {

namespace {

// Three-byte punctuators are tried first, then two-byte, then a single byte.
constexpr std::array<std::string_view, 5> kPunct3 = {"<<=", ">>=", "...", "->*", "<=>"};
constexpr std::array<std::string_view, 22> kPunct2 = {"->", "++", "--", "<<", ">>", "<=", ">=", "==",
                                                      "!=", "&&", "||", "+=", "-=", "*=", "/=", "%=",
                                                      "&=", "|=", "^=", "##", "::", ".*"};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

}  // namespace

TokenSequence lex(std::string_view code) {
    TokenSequence tokens;
    const std::size_t n = code.size();
    std::size_t i = 0;
    auto at = [&](std::size_t k) -> unsigned char { return k < n ? static_cast<unsigned char>(code[k]) : 0; };

    while (i < n) {
        const unsigned char c = at(i);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (c == '/' && at(i + 1) == '/') {
            while (i < n && code[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && at(i + 1) == '*') {
            const auto end = code.find("*/", i + 2);
            i = end == std::string_view::npos ? n : end + 2;
            continue;
        }
        const std::size_t begin = i;
        if (ident_start(c)) {
            while (i < n && ident_char(at(i))) ++i;
        } else if (std::isdigit(c) || (c == '.' && std::isdigit(at(i + 1)))) {
            ++i;
            while (i < n) {
                const unsigned char d = at(i);
                if ((d == '+' || d == '-') && (at(i - 1) == 'e' || at(i - 1) == 'E' || at(i - 1) == 'p' ||
                                               at(i - 1) == 'P')) {
                    ++i;
                } else if (ident_char(d) || d == '.') {
                    ++i;
                } else {
                    break;
                }
            }
        } else if (c == '"' || c == '\'') {
            ++i;
            while (i < n) {
                const char d = code[i++];
                if (d == '\\' && i < n) {
                    ++i;
                } else if (d == static_cast<char>(c)) {
                    break;
                }
            }
        } else {
            std::size_t len = 1;
            const auto rest = code.substr(i);
            for (auto p : kPunct3) {
                if (rest.starts_with(p)) len = 3;
            }
            if (len == 1) {
                for (auto p : kPunct2) {
                    if (rest.starts_with(p)) len = 2;
                }
            }
            i += len;
        }
        tokens.emplace_back(code.substr(begin, i - begin));
    }
    return tokens;
}

std::string detokenize(const TokenSequence& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

}  // namespace tfheval
