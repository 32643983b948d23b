#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "newsforge/errors.hpp"
#include "newsforge/numerics.hpp"
#include "newsforge/textprep.hpp"

namespace newsforge {

constexpr int kPadId = 0;
constexpr int kUnkId = 1;

/// Token <-> id map with reserved PAD=0 and UNK=1. Ids >= 2 are assigned in
/// descending corpus-frequency order, ties broken lexicographically.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> tokens_by_id, int min_freq);

    int id(const std::string& token) const;        // kUnkId when absent
    const std::string& token(int id) const;        // "<pad>" / "<unk>" for reserved ids
    bool contains(const std::string& token) const;

    std::size_t size() const { return id_to_token_.size(); }  // includes PAD and UNK
    int min_freq() const { return min_freq_; }
    const std::vector<std::string>& id_to_token() const { return id_to_token_; }

private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
    int min_freq_ = 1;
};

/// Tokens with frequency >= min_freq, most frequent first. Throws EmptyInput
/// when no sequences are given. Deterministic and invariant to document
/// order.
Vocabulary build_vocab(const std::vector<TokenSequence>& sequences, int min_freq);

struct EncodedSequence {
    std::vector<int> ids;           // length max_len, PAD-filled past true_length
    std::size_t true_length = 0;
};

/// Unknown tokens map to UNK; longer sequences are truncated at the tail,
/// shorter ones padded with PAD.
EncodedSequence encode(const TokenSequence& tokens, const Vocabulary& vocab,
                       std::size_t max_len);

struct EmbeddingTable {
    Matrix matrix;          // |V| x dim; row kPadId is all zeros and stays so
    bool trainable = true;
};

struct EmbeddingLoadResult {
    EmbeddingTable table;
    double coverage = 0.0;  // fraction of non-reserved vocab tokens found in the file
};

/// GloVe text format: per line a token, a space, then `dim` decimal reals.
/// Vocab tokens found in the file get their rows copied; PAD stays zero; UNK
/// and missing tokens are drawn from seeded uniform(-0.05, 0.05). Throws
/// MissingFile, MalformedLine, DimensionMismatch.
EmbeddingLoadResult load_embeddings(const std::string& path, const Vocabulary& vocab,
                                    std::size_t dim, std::uint64_t seed);

/// Random table for training without pretrained vectors: uniform(-0.05, 0.05)
/// everywhere except the zero PAD row.
EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed);

struct TfidfModel {
    Vocabulary vocabulary;
    std::vector<double> idf;   // indexed by token id; reserved ids carry 0
    std::size_t doc_count = 0;
};

/// Smoothed idf: idf(t) = ln((1 + N) / (1 + df(t))) + 1. Throws EmptyInput.
TfidfModel tfidf_fit(const std::vector<TokenSequence>& sequences, const Vocabulary& vocab);

using SparseVector = std::vector<std::pair<int, double>>;  // (token id, weight), id-sorted

/// count(t) * idf(t) per in-vocabulary token, then L2-normalized. Documents
/// with no in-vocabulary tokens give the empty (zero) vector.
SparseVector tfidf_transform(const TokenSequence& tokens, const TfidfModel& model);

/// One JSON array of [id, weight] pairs per line.
std::string tfidf_to_jsonl_line(const SparseVector& vec);

} // namespace newsforge
