#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "newsforge/errors.hpp"

namespace newsforge {

/// Class codes are fixed: false news is 0, partially false is 1, true is 2.
enum class Label : int {
    False = 0,
    PartiallyFalse = 1,
    True = 2,
};

constexpr int kNumClasses = 3;

/// Case-insensitive mapping from a serialized label to its code.
/// Accepted spellings: "true"; "false"; "partially false" / "partially_false"
/// / "partial". Throws UnknownLabel for anything else.
Label encode_label(const std::string& raw);

/// Canonical serialized name for a label code ("false", "partially_false",
/// "true").
const std::string& label_name(Label label);

struct Document {
    std::int64_t id = 0;
    std::string text;
    Label label = Label::False;
    std::string source;  // may be empty
};

/// Immutable after load; class_counts is kept in sync with documents.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> documents);

    const std::vector<Document>& documents() const { return documents_; }
    std::size_t size() const { return documents_.size(); }
    bool empty() const { return documents_.empty(); }
    const Document& operator[](std::size_t i) const { return documents_[i]; }

    const std::array<std::int64_t, kNumClasses>& class_counts() const { return class_counts_; }

private:
    std::vector<Document> documents_;
    std::array<std::int64_t, kNumClasses> class_counts_{};
};

struct SplitPair {
    Corpus train;
    Corpus test;
    std::uint64_t seed = 0;
    double ratio = 0.0;
};

enum class CorpusFormat { csv, jsonl };

/// Loads a labeled corpus. CSV means a `text,label[,source]` header with
/// RFC-4180 quoting; JSONL means one object per line with `text`, `label`
/// and optional `source` string fields. Document ids follow record order
/// starting at 0. Throws MissingFile, MalformedRecord (with the record's
/// line number), UnknownLabel, EmptyCorpus.
Corpus load_corpus(const std::string& path, CorpusFormat format);

/// Guesses the format from the file extension (.csv / .jsonl / .json),
/// defaulting to jsonl.
CorpusFormat guess_format(const std::string& path);

/// Deterministic seeded split. |test| = round(ratio * N) with ties rounded
/// up. When stratified, per-class test counts follow largest-remainder
/// rounding of ratio * class_count (remainder ties broken by smaller class
/// code) so the total still equals round(ratio * N). Train and test keep the
/// input corpus order and are disjoint by id.
SplitPair split_corpus(const Corpus& corpus, double ratio, std::uint64_t seed, bool stratified);

} // namespace newsforge
