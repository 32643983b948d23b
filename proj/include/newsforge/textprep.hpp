#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "newsforge/errors.hpp"

namespace newsforge {

using TokenSet = std::unordered_set<std::string>;

/// Knobs for the cleaning chain. The lists must hold lowercase tokens.
struct PrepConfig {
    bool lowercase = true;
    bool strip_punctuation = true;
    bool strip_urls_numbers = true;
    bool stem = true;
    TokenSet stopword_list;   // defaults to the builtin English list in the CLI
    TokenSet excluded_list;   // defaults to empty
};

struct TokenSequence {
    std::vector<std::string> tokens;
    std::int64_t source_doc = -1;
};

/// Replaces every punctuation or symbol character with a single space and
/// normalizes whitespace (runs collapsed, ends trimmed). When
/// strip_urls_numbers is set, URL-shaped substrings (scheme:// or www.
/// prefixes, up to the next whitespace) and ASCII digit runs are removed
/// first. ASCII is classified exactly; non-ASCII codepoints are matched
/// against the common Unicode punctuation and symbol blocks.
std::string remove_punctuation(const std::string& text, bool strip_urls_numbers = true);

/// Unicode-aware lowercase over ASCII, Latin-1, Latin Extended-A, Greek and
/// Cyrillic; other codepoints pass through. Idempotent.
std::string lowercase(const std::string& text);

/// Porter stemmer, the 1980 algorithm (steps 1a-5b). Operates on lowercase
/// ASCII words; tokens containing anything else are returned unchanged.
std::string stem(const std::string& token);

TokenSequence remove_stopwords(const TokenSequence& tokens, const TokenSet& stoplist);
TokenSequence remove_excluded(const TokenSequence& tokens, const TokenSet& excluded);

/// The full cleaning chain: URL/number/punctuation removal, lowercasing,
/// whitespace tokenization, stopword removal, excluded-word removal,
/// stemming. List filtering runs again after stemming and stemming is
/// iterated to a fixed point, so every surviving token is list-free and its
/// own stem; a document reduced to zero tokens yields an empty sequence.
TokenSequence preprocess(const std::string& text, const PrepConfig& config,
                         std::int64_t source_doc = -1);

/// Builtin English stopword list (the classic 174-word list).
const TokenSet& builtin_stopwords();

/// List file format: one token per line, UTF-8, `#` starts a comment.
/// Tokens are lowercased on load. Throws MissingFile.
TokenSet load_token_list(const std::string& path);

} // namespace newsforge
