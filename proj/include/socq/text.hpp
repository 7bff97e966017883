#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace socq::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Split on runs of whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

// Lowercased word tokens; punctuation characters become their own tokens.
// "Where do you live?" -> {"where", "do", "you", "live", "?"}
std::vector<std::string> tokenize(std::string_view s);

// Lowercased word tokens with punctuation dropped. Apostrophes stay inside words.
std::vector<std::string> words(std::string_view s);

// Sentences split on '.', '!' or '?' followed by whitespace (or end of text).
// Returned segments are trimmed substrings of the input.
std::vector<std::string> split_sentences(std::string_view s);

// Lowercase, collapse whitespace, strip terminal punctuation.
std::string normalize_question(std::string_view s);

// Inverse of tokenize for display: punctuation attaches to the previous word.
std::string detokenize(const std::vector<std::string>& tokens);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::vector<std::string> split(std::string_view s, char sep);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ULL);

}  // namespace socq::text
