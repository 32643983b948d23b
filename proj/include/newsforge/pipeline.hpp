#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "newsforge/corpus.hpp"
#include "newsforge/metrics.hpp"
#include "newsforge/model.hpp"
#include "newsforge/training.hpp"

namespace newsforge {

/// Everything a run needs, serializable as a flat JSON object. Unknown keys
/// are rejected. `explicit_keys` records which fields were actually set (in
/// the file or by a flag) so evaluate/predict can detect conflicts with a
/// checkpoint's stored hyperparameters.
struct RunConfig {
    // paths
    std::string corpus_path;
    std::string format = "auto";  // auto | csv | jsonl
    std::string stoplist_path;    // empty -> builtin English list
    std::string excluded_path;    // empty -> no excluded-word list
    std::string embeddings_path;  // empty -> random embedding init
    std::string checkpoint_path = "model.json";
    std::string report_path = "report.json";
    std::string history_path = "history.csv";
    std::string tfidf_path = "tfidf.jsonl";

    // split
    double ratio = 0.2;
    bool stratified = true;
    std::uint64_t seed = 42;

    // preprocessing
    bool lowercase = true;
    bool strip_punctuation = true;
    bool strip_urls_numbers = true;
    bool stem = true;
    int min_freq = 1;

    // model
    std::size_t hidden = 128;
    std::size_t dense = 256;
    double dropout = 0.3;
    std::size_t max_len = 300;
    std::size_t embed_dim = 100;
    std::string pooling = "final_state";  // final_state | mean_concat

    // training
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double grad_clip_norm = 5.0;
    double eval_split = 0.1;

    // predict
    bool strict = false;

    std::set<std::string> explicit_keys;

    Hyper hyper() const;
    TrainConfig train_config() const;
};

/// Parses a config file, rejecting unknown keys (ConfigError). Every present
/// key lands in explicit_keys.
RunConfig load_run_config(const std::string& path);

struct IngestSummary {
    std::size_t total = 0;
    std::array<std::int64_t, kNumClasses> label_counts{};
    std::vector<std::pair<std::string, std::size_t>> source_counts;  // first-appearance order
    std::string text;  // printable block
};

IngestSummary run_ingest(const RunConfig& config);

struct TrainSummary {
    History history;
    std::size_t train_documents = 0;
    std::size_t dropped_empty = 0;  // documents that preprocessed to zero tokens
    double embedding_coverage = -1.0;  // -1 when no pretrained file was used
    std::string text;  // printable block with the final epoch metrics
};

/// split -> preprocess -> vocab/embeddings -> train; writes the checkpoint
/// and the history CSV, removing both files if anything aborts midway.
TrainSummary run_train(const RunConfig& config);

struct EvaluateSummary {
    ClassificationReport report;
    double loss = 0.0;
    std::size_t evaluated = 0;
    std::size_t dropped_empty = 0;
    std::string text;  // the formatted report block
};

/// Loads the checkpoint, rebuilds the held-out test split from (ratio, seed,
/// stratified), and writes the JSON report next to printing the text one.
EvaluateSummary run_evaluate(const RunConfig& config);

/// One output line per input line: `<label_name> <code> <p0> <p1> <p2>` with
/// 4-decimal probabilities, or UNSCORABLE for lines that preprocess to zero
/// tokens (an error instead when config.strict is set).
std::vector<std::string> run_predict(const RunConfig& config,
                                     const std::vector<std::string>& lines);

struct TfidfSummary {
    std::size_t documents = 0;
    std::size_t vocabulary = 0;  // including the two reserved ids
    std::string text;
};

/// Fits the TF-IDF baseline on the whole corpus and writes one JSONL line of
/// (id, weight) pairs per document.
TfidfSummary run_tfidf(const RunConfig& config);

} // namespace newsforge
