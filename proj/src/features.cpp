#include "newsforge/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

namespace newsforge {

namespace {
const std::string kPadToken = "<pad>";
const std::string kUnkToken = "<unk>";
} // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens_by_id, int min_freq)
    : id_to_token_(std::move(tokens_by_id)), min_freq_(min_freq) {
    if (id_to_token_.size() < 2 || id_to_token_[0] != kPadToken || id_to_token_[1] != kUnkToken) {
        throw EmptyInputError("vocabulary must start with the reserved <pad> and <unk> entries");
    }
    token_to_id_.reserve(id_to_token_.size());
    for (std::size_t i = 2; i < id_to_token_.size(); ++i) {
        if (!token_to_id_.emplace(id_to_token_[i], static_cast<int>(i)).second) {
            throw EmptyInputError("duplicate vocabulary token \"" + id_to_token_[i] + "\"");
        }
    }
}

int Vocabulary::id(const std::string& token) const {
    const auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
    return id_to_token_.at(static_cast<std::size_t>(id));
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.find(token) != token_to_id_.end();
}

Vocabulary build_vocab(const std::vector<TokenSequence>& sequences, int min_freq) {
    if (sequences.empty()) throw EmptyInputError("build_vocab needs at least one sequence");
    if (min_freq < 1) throw BadRangeError("min_freq must be >= 1");

    // std::map keys give the lexicographic tie-break for free.
    std::map<std::string, std::int64_t> freq;
    for (const TokenSequence& seq : sequences) {
        for (const std::string& tok : seq.tokens) ++freq[tok];
    }
    std::vector<std::pair<std::string, std::int64_t>> entries;
    entries.reserve(freq.size());
    for (auto& kv : freq) {
        if (kv.second >= min_freq) entries.emplace_back(kv.first, kv.second);
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> tokens_by_id;
    tokens_by_id.reserve(entries.size() + 2);
    tokens_by_id.push_back(kPadToken);
    tokens_by_id.push_back(kUnkToken);
    for (auto& e : entries) tokens_by_id.push_back(std::move(e.first));
    return Vocabulary(std::move(tokens_by_id), min_freq);
}

EncodedSequence encode(const TokenSequence& tokens, const Vocabulary& vocab,
                       std::size_t max_len) {
    if (max_len < 1) throw BadRangeError("max_len must be >= 1");
    EncodedSequence out;
    out.ids.assign(max_len, kPadId);
    out.true_length = std::min(tokens.tokens.size(), max_len);
    for (std::size_t i = 0; i < out.true_length; ++i) {
        out.ids[i] = vocab.id(tokens.tokens[i]);
    }
    return out;
}

namespace {

EmbeddingTable fresh_table(const Vocabulary& vocab, std::size_t dim, Rng& rng) {
    EmbeddingTable table;
    table.matrix = Matrix(vocab.size(), dim);
    for (std::size_t r = 1; r < vocab.size(); ++r) {  // row 0 (PAD) stays zero
        for (std::size_t c = 0; c < dim; ++c) table.matrix(r, c) = rng.uniform(-0.05, 0.05);
    }
    return table;
}

} // namespace

EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    return fresh_table(vocab, dim, rng);
}

EmbeddingLoadResult load_embeddings(const std::string& path, const Vocabulary& vocab,
                                    std::size_t dim, std::uint64_t seed) {
    std::ifstream file(path);
    if (!file) throw MissingFileError(path);

    std::unordered_map<std::string, std::vector<double>> found;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(file, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t sp = line.find(' ');
        if (sp == std::string::npos || sp == 0) {
            throw MalformedLineError("line " + std::to_string(lineno) +
                                     ": expected `token value...`");
        }
        const std::string token = line.substr(0, sp);
        if (!vocab.contains(token)) continue;

        std::vector<double> values;
        values.reserve(dim);
        const char* p = line.c_str() + sp;
        const char* end = line.c_str() + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
            if (p >= end) break;
            double v = 0.0;
            const auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw MalformedLineError("line " + std::to_string(lineno) +
                                         ": bad real number near `" + std::string(p, end) + "`");
            }
            values.push_back(v);
            p = next;
        }
        if (values.size() != dim) {
            throw DimensionMismatchError("expected " + std::to_string(dim) + " values, found " +
                                         std::to_string(values.size()) + " at line " +
                                         std::to_string(lineno));
        }
        found[token] = std::move(values);
    }

    Rng rng(seed);
    EmbeddingLoadResult result;
    result.table = fresh_table(vocab, dim, rng);
    std::size_t hits = 0;
    for (std::size_t r = 2; r < vocab.size(); ++r) {
        const auto it = found.find(vocab.token(static_cast<int>(r)));
        if (it == found.end()) continue;
        ++hits;
        for (std::size_t c = 0; c < dim; ++c) result.table.matrix(r, c) = it->second[c];
    }
    const std::size_t real_tokens = vocab.size() - 2;
    result.coverage = real_tokens == 0
                          ? 0.0
                          : static_cast<double>(hits) / static_cast<double>(real_tokens);
    return result;
}

TfidfModel tfidf_fit(const std::vector<TokenSequence>& sequences, const Vocabulary& vocab) {
    if (sequences.empty()) throw EmptyInputError("tfidf_fit needs at least one sequence");
    std::vector<std::int64_t> df(vocab.size(), 0);
    std::vector<bool> seen(vocab.size(), false);
    for (const TokenSequence& seq : sequences) {
        std::fill(seen.begin(), seen.end(), false);
        for (const std::string& tok : seq.tokens) {
            const int id = vocab.id(tok);
            if (id >= 2 && !seen[static_cast<std::size_t>(id)]) {
                seen[static_cast<std::size_t>(id)] = true;
                ++df[static_cast<std::size_t>(id)];
            }
        }
    }
    TfidfModel model;
    model.vocabulary = vocab;
    model.doc_count = sequences.size();
    model.idf.assign(vocab.size(), 0.0);
    const double n = static_cast<double>(sequences.size());
    for (std::size_t id = 2; id < vocab.size(); ++id) {
        model.idf[id] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[id]))) + 1.0;
    }
    return model;
}

SparseVector tfidf_transform(const TokenSequence& tokens, const TfidfModel& model) {
    std::map<int, double> counts;
    for (const std::string& tok : tokens.tokens) {
        if (!model.vocabulary.contains(tok)) continue;  // OOV ignored
        counts[model.vocabulary.id(tok)] += 1.0;
    }
    SparseVector vec;
    vec.reserve(counts.size());
    double norm_sq = 0.0;
    for (const auto& [id, count] : counts) {
        const double w = count * model.idf[static_cast<std::size_t>(id)];
        vec.emplace_back(id, w);
        norm_sq += w * w;
    }
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [id, w] : vec) w *= inv;
    }
    return vec;
}

std::string tfidf_to_jsonl_line(const SparseVector& vec) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [id, w] : vec) j.push_back({id, w});
    return j.dump();
}

} // namespace newsforge
