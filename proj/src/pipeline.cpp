#include "newsforge/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "newsforge/checkpoint.hpp"
#include "newsforge/textprep.hpp"

namespace newsforge {

namespace {

constexpr std::uint64_t kEmbeddingSeedSalt = 0xC2B2AE3D27D4EB4FULL;

Pooling parse_pooling(const std::string& name) {
    if (name == "final_state") return Pooling::final_state;
    if (name == "mean_concat") return Pooling::mean_concat;
    throw ConfigError("pooling must be final_state or mean_concat, got \"" + name + "\"");
}

CorpusFormat resolve_format(const RunConfig& config) {
    if (config.format == "csv") return CorpusFormat::csv;
    if (config.format == "jsonl") return CorpusFormat::jsonl;
    if (config.format == "auto") return guess_format(config.corpus_path);
    throw ConfigError("format must be auto, csv or jsonl, got \"" + config.format + "\"");
}

PrepConfig make_prep_config(const RunConfig& config) {
    PrepConfig prep;
    prep.lowercase = config.lowercase;
    prep.strip_punctuation = config.strip_punctuation;
    prep.strip_urls_numbers = config.strip_urls_numbers;
    prep.stem = config.stem;
    prep.stopword_list = config.stoplist_path.empty() ? builtin_stopwords()
                                                      : load_token_list(config.stoplist_path);
    if (!config.excluded_path.empty()) {
        prep.excluded_list = load_token_list(config.excluded_path);
    }
    return prep;
}

struct PreparedCorpus {
    std::vector<TokenSequence> sequences;  // only documents with >= 1 token
    std::vector<Label> labels;
    std::size_t dropped_empty = 0;
};

PreparedCorpus preprocess_corpus(const Corpus& corpus, const PrepConfig& prep) {
    PreparedCorpus out;
    out.sequences.reserve(corpus.size());
    out.labels.reserve(corpus.size());
    for (const Document& doc : corpus.documents()) {
        TokenSequence seq = preprocess(doc.text, prep, doc.id);
        if (seq.tokens.empty()) {
            ++out.dropped_empty;
            continue;
        }
        out.sequences.push_back(std::move(seq));
        out.labels.push_back(doc.label);
    }
    return out;
}

TrainData encode_all(const std::vector<TokenSequence>& sequences,
                     const std::vector<Label>& labels, const Vocabulary& vocab,
                     std::size_t max_len) {
    TrainData data;
    data.sequences.reserve(sequences.size());
    data.labels = labels;
    for (const TokenSequence& seq : sequences) {
        data.sequences.push_back(encode(seq, vocab, max_len));
    }
    return data;
}

void require_corpus_path(const RunConfig& config) {
    if (config.corpus_path.empty()) throw ConfigError("no corpus path configured");
}

std::string format_probability(double p) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.4f", p);
    return buf;
}

// evaluate/predict run under the checkpoint's hyper; explicitly configured
// values that contradict it are refused rather than silently ignored.
void check_hyper_conflicts(const RunConfig& config, const Hyper& stored) {
    auto conflict = [&](const char* key, auto configured, auto actual) {
        if (config.explicit_keys.count(key) && configured != actual) {
            std::ostringstream msg;
            msg << key << " is " << configured << " in the configuration but the checkpoint was "
                << "trained with " << actual;
            throw DimensionMismatchError(msg.str());
        }
    };
    conflict("hidden", config.hidden, stored.hidden);
    conflict("dense", config.dense, stored.dense);
    conflict("max_len", config.max_len, stored.max_len);
    conflict("embed_dim", config.embed_dim, stored.embed_dim);
    if (config.explicit_keys.count("pooling") &&
        parse_pooling(config.pooling) != stored.pooling) {
        throw DimensionMismatchError("pooling differs from the checkpoint's setting");
    }
}

} // namespace

Hyper RunConfig::hyper() const {
    Hyper h;
    h.hidden = hidden;
    h.dense = dense;
    h.dropout = dropout;
    h.max_len = max_len;
    h.embed_dim = embed_dim;
    h.pooling = parse_pooling(pooling);
    return h;
}

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.learning_rate = learning_rate;
    t.beta1 = beta1;
    t.beta2 = beta2;
    t.epsilon = epsilon;
    t.grad_clip_norm = grad_clip_norm;
    t.seed = seed;
    t.eval_split = eval_split;
    return t;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw MissingFileError(path);
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig config;
    auto set_string = [&](const char* key, std::string& field) {
        if (j.contains(key)) field = j.at(key).get<std::string>();
    };
    auto set_double = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    auto set_size = [&](const char* key, std::size_t& field) {
        if (j.contains(key)) field = j.at(key).get<std::size_t>();
    };
    auto set_bool = [&](const char* key, bool& field) {
        if (j.contains(key)) field = j.at(key).get<bool>();
    };

    static const std::set<std::string> known = {
        "corpus", "format", "stoplist", "excluded", "embeddings", "checkpoint", "report",
        "history", "tfidf", "ratio", "stratified", "seed", "lowercase", "strip_punctuation",
        "strip_urls_numbers", "stem", "min_freq", "hidden", "dense", "dropout", "max_len",
        "embed_dim", "pooling", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
        "epsilon", "grad_clip_norm", "eval_split", "strict"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown config key \"" + key + "\"");
        config.explicit_keys.insert(key);
    }

    try {
        set_string("corpus", config.corpus_path);
        set_string("format", config.format);
        set_string("stoplist", config.stoplist_path);
        set_string("excluded", config.excluded_path);
        set_string("embeddings", config.embeddings_path);
        set_string("checkpoint", config.checkpoint_path);
        set_string("report", config.report_path);
        set_string("history", config.history_path);
        set_string("tfidf", config.tfidf_path);
        set_double("ratio", config.ratio);
        set_bool("stratified", config.stratified);
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        set_bool("lowercase", config.lowercase);
        set_bool("strip_punctuation", config.strip_punctuation);
        set_bool("strip_urls_numbers", config.strip_urls_numbers);
        set_bool("stem", config.stem);
        if (j.contains("min_freq")) config.min_freq = j.at("min_freq").get<int>();
        set_size("hidden", config.hidden);
        set_size("dense", config.dense);
        set_double("dropout", config.dropout);
        set_size("max_len", config.max_len);
        set_size("embed_dim", config.embed_dim);
        set_string("pooling", config.pooling);
        set_size("epochs", config.epochs);
        set_size("batch_size", config.batch_size);
        set_double("learning_rate", config.learning_rate);
        set_double("beta1", config.beta1);
        set_double("beta2", config.beta2);
        set_double("epsilon", config.epsilon);
        set_double("grad_clip_norm", config.grad_clip_norm);
        set_double("eval_split", config.eval_split);
        set_bool("strict", config.strict);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config;
}

IngestSummary run_ingest(const RunConfig& config) {
    require_corpus_path(config);
    const Corpus corpus = load_corpus(config.corpus_path, resolve_format(config));

    IngestSummary summary;
    summary.total = corpus.size();
    summary.label_counts = corpus.class_counts();
    std::map<std::string, std::size_t> position;
    for (const Document& doc : corpus.documents()) {
        const std::string key = doc.source.empty() ? "(unknown)" : doc.source;
        const auto it = position.find(key);
        if (it == position.end()) {
            position.emplace(key, summary.source_counts.size());
            summary.source_counts.emplace_back(key, 1);
        } else {
            ++summary.source_counts[it->second].second;
        }
    }

    std::ostringstream out;
    out << "documents: " << summary.total << "\n";
    out << "labels:";
    for (int c = 0; c < kNumClasses; ++c) {
        out << " " << label_name(static_cast<Label>(c)) << "=" << summary.label_counts[c];
    }
    out << "\nsources:\n";
    for (const auto& [name, count] : summary.source_counts) {
        out << "  " << name << ": " << count << "\n";
    }
    summary.text = out.str();
    return summary;
}

TrainSummary run_train(const RunConfig& config) {
    require_corpus_path(config);
    const Corpus corpus = load_corpus(config.corpus_path, resolve_format(config));
    const SplitPair split = split_corpus(corpus, config.ratio, config.seed, config.stratified);
    if (split.train.empty()) throw EmptyCorpusError("the training split is empty");

    const PrepConfig prep = make_prep_config(config);
    PreparedCorpus prepared = preprocess_corpus(split.train, prep);
    if (prepared.sequences.empty()) {
        throw EmptyCorpusError("every training document preprocessed to zero tokens");
    }

    const Vocabulary vocab = build_vocab(prepared.sequences, config.min_freq);
    const Hyper hyper = config.hyper();

    std::optional<EmbeddingTable> pretrained;
    double coverage = -1.0;
    if (!config.embeddings_path.empty()) {
        EmbeddingLoadResult loaded = load_embeddings(config.embeddings_path, vocab,
                                                     hyper.embed_dim,
                                                     config.seed ^ kEmbeddingSeedSalt);
        pretrained = std::move(loaded.table);
        coverage = loaded.coverage;
    }

    const TrainData data = encode_all(prepared.sequences, prepared.labels, vocab, hyper.max_len);
    TrainResult result = train(data, vocab, pretrained, hyper, config.train_config());

    try {
        save_checkpoint(config.checkpoint_path, hyper, vocab, result.params);
        std::ofstream hist(config.history_path, std::ios::binary);
        if (!hist) throw MissingFileError("cannot open " + config.history_path + " for writing");
        hist << history_to_csv(result.history);
        if (!hist) throw MissingFileError("failed writing " + config.history_path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(config.checkpoint_path, ec);
        std::filesystem::remove(config.history_path, ec);
        throw;
    }

    TrainSummary summary;
    summary.history = std::move(result.history);
    summary.train_documents = data.sequences.size();
    summary.dropped_empty = prepared.dropped_empty;
    summary.embedding_coverage = coverage;

    std::ostringstream out;
    out << "trained on " << summary.train_documents << " documents";
    if (summary.dropped_empty > 0) {
        out << " (dropped " << summary.dropped_empty << " empty after preprocessing)";
    }
    out << "\n";
    if (coverage >= 0.0) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", coverage);
        out << "embedding coverage: " << buf << "\n";
    }
    if (!summary.history.empty()) {
        const EpochRecord& last = summary.history.back();
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "final epoch: train_loss=%.6f train_acc=%.6f eval_loss=%.6f eval_acc=%.6f\n",
                      last.train_loss, last.train_accuracy, last.eval_loss, last.eval_accuracy);
        out << buf;
    } else {
        out << "no epochs trained; checkpoint holds the initial parameters\n";
    }
    out << "checkpoint: " << config.checkpoint_path << "\nhistory: " << config.history_path
        << "\n";
    summary.text = out.str();
    return summary;
}

EvaluateSummary run_evaluate(const RunConfig& config) {
    require_corpus_path(config);
    const Checkpoint cp = load_checkpoint(config.checkpoint_path);
    check_hyper_conflicts(config, cp.hyper);

    const Corpus corpus = load_corpus(config.corpus_path, resolve_format(config));
    const SplitPair split = split_corpus(corpus, config.ratio, config.seed, config.stratified);
    if (split.test.empty()) throw EmptyCorpusError("the test split is empty");

    const PrepConfig prep = make_prep_config(config);
    PreparedCorpus prepared = preprocess_corpus(split.test, prep);
    if (prepared.sequences.empty()) {
        throw EmptyCorpusError("every test document preprocessed to zero tokens");
    }

    const TrainData data =
        encode_all(prepared.sequences, prepared.labels, cp.vocab, cp.hyper.max_len);
    const EvalResult eval = evaluate(cp.params, data, cp.hyper);

    EvaluateSummary summary;
    summary.loss = eval.loss;
    summary.evaluated = data.sequences.size();
    summary.dropped_empty = prepared.dropped_empty;
    summary.report = report(confusion(data.labels, eval.predictions));
    summary.text = format_report(summary.report);
    if (summary.dropped_empty > 0) {
        summary.text += "\nnote: " + std::to_string(summary.dropped_empty) +
                        " document(s) dropped (no tokens left after preprocessing)\n";
    }

    if (!config.report_path.empty()) {
        std::ofstream out(config.report_path, std::ios::binary);
        if (!out) throw MissingFileError("cannot open " + config.report_path + " for writing");
        out << report_to_json(summary.report) << "\n";
    }
    return summary;
}

std::vector<std::string> run_predict(const RunConfig& config,
                                     const std::vector<std::string>& lines) {
    const Checkpoint cp = load_checkpoint(config.checkpoint_path);
    check_hyper_conflicts(config, cp.hyper);
    const PrepConfig prep = make_prep_config(config);

    std::vector<std::string> out(lines.size());
    std::vector<EncodedSequence> batch;
    std::vector<std::size_t> batch_rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const TokenSequence seq = preprocess(lines[i], prep, static_cast<std::int64_t>(i));
        if (seq.tokens.empty()) {
            if (config.strict) {
                throw EmptyInputError("input line " + std::to_string(i + 1) +
                                      " preprocessed to zero tokens");
            }
            out[i] = "UNSCORABLE";
            continue;
        }
        batch.push_back(encode(seq, cp.vocab, cp.hyper.max_len));
        batch_rows.push_back(i);
    }

    // chunked so the per-sequence forward caches stay small
    const std::size_t chunk = 64;
    Rng rng(0);  // eval mode draws nothing
    for (std::size_t begin = 0; begin < batch.size(); begin += chunk) {
        const std::size_t end = std::min(begin + chunk, batch.size());
        const std::vector<EncodedSequence> slice(batch.begin() + static_cast<std::ptrdiff_t>(begin),
                                                 batch.begin() + static_cast<std::ptrdiff_t>(end));
        const ForwardResult fr = forward(slice, cp.params, cp.hyper, Mode::eval, rng);
        const std::vector<Label> labels = predict(fr.probs);
        for (std::size_t b = 0; b < slice.size(); ++b) {
            std::ostringstream line;
            line << label_name(labels[b]) << " " << static_cast<int>(labels[b]);
            for (int c = 0; c < kNumClasses; ++c) {
                line << " " << format_probability(fr.probs(b, static_cast<std::size_t>(c)));
            }
            out[batch_rows[begin + b]] = line.str();
        }
    }
    return out;
}

TfidfSummary run_tfidf(const RunConfig& config) {
    require_corpus_path(config);
    const Corpus corpus = load_corpus(config.corpus_path, resolve_format(config));
    const PrepConfig prep = make_prep_config(config);

    std::vector<TokenSequence> sequences;
    sequences.reserve(corpus.size());
    for (const Document& doc : corpus.documents()) {
        sequences.push_back(preprocess(doc.text, prep, doc.id));
    }
    const Vocabulary vocab = build_vocab(sequences, config.min_freq);
    const TfidfModel model = tfidf_fit(sequences, vocab);

    std::ofstream out(config.tfidf_path, std::ios::binary);
    if (!out) throw MissingFileError("cannot open " + config.tfidf_path + " for writing");
    for (const TokenSequence& seq : sequences) {
        out << tfidf_to_jsonl_line(tfidf_transform(seq, model)) << "\n";
    }
    if (!out) throw MissingFileError("failed writing " + config.tfidf_path);

    TfidfSummary summary;
    summary.documents = sequences.size();
    summary.vocabulary = vocab.size();
    std::ostringstream text;
    text << "wrote " << summary.documents << " vectors over a vocabulary of "
         << (summary.vocabulary - 2) << " tokens to " << config.tfidf_path << "\n";
    summary.text = text.str();
    return summary;
}

} // namespace newsforge
