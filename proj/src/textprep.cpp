#include "newsforge/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace newsforge {

namespace {

// --- minimal UTF-8 handling -------------------------------------------------

// Decodes the codepoint starting at `i`, advancing `i`. Invalid bytes are
// returned one at a time as-is so they survive the round trip untouched.
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const unsigned char c0 = static_cast<unsigned char>(s[i]);
    if (c0 < 0x80) {
        ++i;
        return c0;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((c0 & 0xE0) == 0xC0) { extra = 1; cp = c0 & 0x1F; }
    else if ((c0 & 0xF0) == 0xE0) { extra = 2; cp = c0 & 0x0F; }
    else if ((c0 & 0xF8) == 0xF0) { extra = 3; cp = c0 & 0x07; }
    else { ++i; return c0; }
    if (i + static_cast<std::size_t>(extra) >= s.size()) {
        // truncated sequence
        ++i;
        return c0;
    }
    for (int k = 1; k <= extra; ++k) {
        const unsigned char cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return c0;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += static_cast<std::size_t>(extra) + 1;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// --- character classes ------------------------------------------------------

bool is_ascii_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v';
}

// Punctuation and symbols. ASCII is exact; beyond that the common Unicode
// punctuation/symbol blocks are covered (Latin-1 punctuation, general
// punctuation, currency, arrows/math/technical, box drawing and dingbats,
// supplemental and CJK punctuation, fullwidth forms).
bool is_punct_or_symbol(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
               (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
    }
    if (cp == 0xA0 || cp == 0xAD) return true;  // nbsp, soft hyphen
    if (cp >= 0xA1 && cp <= 0xBF) {
        // Latin-1 block minus the letters/digits it contains.
        return cp != 0xAA && cp != 0xB2 && cp != 0xB3 && cp != 0xB5 && cp != 0xB9 &&
               cp != 0xBA && cp != 0xBC && cp != 0xBD && cp != 0xBE;
    }
    if (cp == 0xD7 || cp == 0xF7) return true;
    if (cp >= 0x2000 && cp <= 0x206F) return true;   // general punctuation
    if (cp >= 0x20A0 && cp <= 0x20CF) return true;   // currency symbols
    if (cp >= 0x2100 && cp <= 0x23FF) return true;   // letterlike, arrows, math, technical
    if (cp >= 0x2400 && cp <= 0x27BF) return true;   // control pictures .. dingbats
    if (cp >= 0x2E00 && cp <= 0x2E7F) return true;   // supplemental punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return true;   // CJK symbols and punctuation
    if (cp >= 0xFE30 && cp <= 0xFE4F) return true;   // CJK compatibility forms
    if (cp >= 0xFF01 && cp <= 0xFF0F) return true;   // fullwidth ASCII punctuation
    if (cp >= 0xFF1A && cp <= 0xFF20) return true;
    if (cp >= 0xFF3B && cp <= 0xFF40) return true;
    if (cp >= 0xFF5B && cp <= 0xFF65) return true;
    return false;
}

char32_t to_lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;  // Latin-1
    if (cp == 0x130) return 'i';                                 // dotted capital I
    if (cp == 0x178) return 0xFF;                                // Y with diaeresis
    if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
        return (cp % 2 == 0) ? cp + 1 : cp;                      // Latin Extended-A pairs
    }
    if (cp >= 0x139 && cp <= 0x148) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp >= 0x179 && cp <= 0x17E) {
        return (cp % 2 == 1) ? cp + 1 : cp;
    }
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;  // Greek
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;                 // Cyrillic
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
    return cp;
}

bool is_ascii_alnum(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

// Deletes URL-shaped substrings: from a "www." prefix or the scheme of a
// "scheme://" up to the next whitespace.
std::string strip_urls(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto skip_to_ws = [&](std::size_t from) {
        while (from < n && !is_ascii_space(static_cast<unsigned char>(text[from]))) ++from;
        return from;
    };
    while (i < n) {
        const bool at_boundary = out.empty() || !is_ascii_alnum(out.back());
        if (at_boundary && i + 4 <= n && text.compare(i, 4, "www.") == 0) {
            i = skip_to_ws(i);
            continue;
        }
        if (text[i] == ':' && i + 2 < n && text[i + 1] == '/' && text[i + 2] == '/') {
            // back up over the scheme already copied into `out`
            std::size_t s = out.size();
            while (s > 0 && (is_ascii_alnum(out[s - 1]) || out[s - 1] == '+' ||
                             out[s - 1] == '.' || out[s - 1] == '-')) {
                --s;
            }
            bool has_alpha = false;
            for (std::size_t p = s; p < out.size(); ++p) {
                if (std::isalpha(static_cast<unsigned char>(out[p]))) has_alpha = true;
            }
            if (has_alpha) {
                out.resize(s);
                i = skip_to_ws(i);
                continue;
            }
        }
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

std::string strip_digit_runs(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c >= '0' && c <= '9') continue;
        out.push_back(c);
    }
    return out;
}

} // namespace

std::string remove_punctuation(const std::string& text, bool strip_urls_numbers) {
    std::string work = text;
    if (strip_urls_numbers) {
        work = strip_digit_runs(strip_urls(work));
    }
    std::string out;
    out.reserve(work.size());
    bool pending_space = false;
    bool any_output = false;
    std::size_t i = 0;
    while (i < work.size()) {
        const char32_t cp = decode_utf8(work, i);
        if (is_ascii_space(cp) || is_punct_or_symbol(cp)) {
            pending_space = true;
            continue;
        }
        if (pending_space && any_output) out.push_back(' ');
        pending_space = false;
        encode_utf8(cp, out);
        any_output = true;
    }
    return out;
}

std::string lowercase(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        encode_utf8(to_lower_cp(decode_utf8(text, i)), out);
    }
    return out;
}

namespace {

TokenSequence filter_tokens(const TokenSequence& tokens, const TokenSet& drop) {
    TokenSequence out;
    out.source_doc = tokens.source_doc;
    if (drop.empty()) {
        out.tokens = tokens.tokens;
        return out;
    }
    out.tokens.reserve(tokens.tokens.size());
    for (const std::string& t : tokens.tokens) {
        if (drop.find(t) == drop.end()) out.tokens.push_back(t);
    }
    return out;
}

std::string stem_fixed_point(const std::string& token) {
    std::string cur = token;
    for (int iter = 0; iter < 4; ++iter) {
        std::string next = stem(cur);
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

} // namespace

TokenSequence remove_stopwords(const TokenSequence& tokens, const TokenSet& stoplist) {
    return filter_tokens(tokens, stoplist);
}

TokenSequence remove_excluded(const TokenSequence& tokens, const TokenSet& excluded) {
    return filter_tokens(tokens, excluded);
}

TokenSequence preprocess(const std::string& text, const PrepConfig& config,
                         std::int64_t source_doc) {
    std::string cleaned = config.strip_punctuation
                              ? remove_punctuation(text, config.strip_urls_numbers)
                              : text;
    if (config.lowercase) cleaned = lowercase(cleaned);

    TokenSequence seq;
    seq.source_doc = source_doc;
    std::istringstream in(cleaned);
    std::string tok;
    while (in >> tok) seq.tokens.push_back(tok);

    seq = remove_stopwords(seq, config.stopword_list);
    seq = remove_excluded(seq, config.excluded_list);

    if (config.stem) {
        TokenSequence stemmed;
        stemmed.source_doc = seq.source_doc;
        stemmed.tokens.reserve(seq.tokens.size());
        for (const std::string& t : seq.tokens) {
            std::string s = stem_fixed_point(t);
            // a stem may land back on a listed word; keep outputs list-free
            if (config.stopword_list.count(s) || config.excluded_list.count(s)) continue;
            if (!s.empty()) stemmed.tokens.push_back(std::move(s));
        }
        seq = std::move(stemmed);
    }
    return seq;
}

const TokenSet& builtin_stopwords() {
    static const TokenSet words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
        "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
        "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves",
        "what", "which", "who", "whom", "this", "that", "these", "those", "am", "is", "are",
        "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does",
        "did", "doing", "would", "should", "could", "ought", "i'm", "you're", "he's", "she's",
        "it's", "we're", "they're", "i've", "you've", "we've", "they've", "i'd", "you'd",
        "he'd", "she'd", "we'd", "they'd", "i'll", "you'll", "he'll", "she'll", "we'll",
        "they'll", "isn't", "aren't", "wasn't", "weren't", "hasn't", "haven't", "hadn't",
        "doesn't", "don't", "didn't", "won't", "wouldn't", "shan't", "shouldn't", "can't",
        "cannot", "couldn't", "mustn't", "let's", "that's", "who's", "what's", "here's",
        "there's", "when's", "where's", "why's", "how's", "a", "an", "the", "and", "but",
        "if", "or", "because", "as", "until", "while", "of", "at", "by", "for", "with",
        "about", "against", "between", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
        "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
        "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such",
        "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very",
    };
    return words;
}

TokenSet load_token_list(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw MissingFileError(path);
    TokenSet out;
    std::string line;
    while (std::getline(file, line)) {
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string tok;
        std::istringstream in(line);
        if (in >> tok) out.insert(lowercase(tok));
    }
    return out;
}

} // namespace newsforge
