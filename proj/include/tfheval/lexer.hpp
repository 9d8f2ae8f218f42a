#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tfheval {

using TokenSequence = std::vector<std::string>;

/// C-family lexer for similarity scoring.
///
/// Token classes: identifiers/keywords `[A-Za-z_][A-Za-z0-9_]*`, pp-numbers
/// (a digit, or '.' then a digit, followed by alphanumerics, '_', '.', and
/// exponent signs), string and character literals (backslash escapes honoured;
/// an unterminated literal runs to end of input), punctuators by longest match,
/// and any other byte as a one-byte token. Comments and whitespace are dropped.
TokenSequence lex(std::string_view code);

/// Tokens joined by single spaces; lex(detokenize(lex(s))) == lex(s).
std::string detokenize(const TokenSequence& tokens);

}  // namespace tfheval
