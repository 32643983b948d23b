#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "newsforge/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string corpus;
    std::string format;
    std::string stoplist;
    std::string excluded;
    std::string embeddings;
    std::string checkpoint;
    std::string report;
    std::string history;
    std::string tfidf_out;
    std::string pooling;
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double ratio = 0.0;
    bool strict = false;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* epochs_opt = nullptr;
    CLI::Option* batch_opt = nullptr;
    CLI::Option* ratio_opt = nullptr;
    CLI::Option* corpus_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* stoplist_opt = nullptr;
    CLI::Option* excluded_opt = nullptr;
    CLI::Option* embeddings_opt = nullptr;
    CLI::Option* checkpoint_opt = nullptr;
    CLI::Option* report_opt = nullptr;
    CLI::Option* history_opt = nullptr;
    CLI::Option* tfidf_opt = nullptr;
    CLI::Option* pooling_opt = nullptr;
    CLI::Option* strict_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON run configuration; flags win over it");
    f.corpus_opt = cmd->add_option("--corpus", f.corpus, "labeled corpus file (csv or jsonl)");
    f.format_opt = cmd->add_option("--format", f.format, "corpus format: auto, csv or jsonl");
    f.stoplist_opt = cmd->add_option("--stoplist", f.stoplist,
                                     "stopword list file (one token per line)");
    f.excluded_opt = cmd->add_option("--excluded", f.excluded, "excluded-word list file");
    f.embeddings_opt = cmd->add_option("--embeddings", f.embeddings,
                                       "pretrained embeddings, GloVe text format");
    f.checkpoint_opt = cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint path");
    f.report_opt = cmd->add_option("--report", f.report, "JSON report output path");
    f.history_opt = cmd->add_option("--history", f.history, "training history CSV path");
    f.tfidf_opt = cmd->add_option("--tfidf", f.tfidf_out, "TF-IDF vectors output path (jsonl)");
    f.pooling_opt = cmd->add_option("--pooling", f.pooling,
                                    "sequence pooling: final_state or mean_concat");
    f.seed_opt = cmd->add_option("--seed", f.seed, "random seed (fallback: NEWSFORGE_SEED)");
    f.epochs_opt = cmd->add_option("--epochs", f.epochs, "training epochs");
    f.batch_opt = cmd->add_option("--batch-size", f.batch_size, "mini-batch size");
    f.ratio_opt = cmd->add_option("--ratio", f.ratio, "test split fraction");
    f.strict_opt = cmd->add_flag("--strict", f.strict,
                                 "fail instead of emitting UNSCORABLE lines");
}

newsforge::RunConfig build_config(const CommonFlags& f) {
    newsforge::RunConfig config;
    if (!f.config_path.empty()) config = newsforge::load_run_config(f.config_path);

    auto apply_string = [&](CLI::Option* opt, const std::string& value, std::string& field,
                            const char* key) {
        if (opt != nullptr && opt->count() > 0) {
            field = value;
            config.explicit_keys.insert(key);
        }
    };
    apply_string(f.corpus_opt, f.corpus, config.corpus_path, "corpus");
    apply_string(f.format_opt, f.format, config.format, "format");
    apply_string(f.stoplist_opt, f.stoplist, config.stoplist_path, "stoplist");
    apply_string(f.excluded_opt, f.excluded, config.excluded_path, "excluded");
    apply_string(f.embeddings_opt, f.embeddings, config.embeddings_path, "embeddings");
    apply_string(f.checkpoint_opt, f.checkpoint, config.checkpoint_path, "checkpoint");
    apply_string(f.report_opt, f.report, config.report_path, "report");
    apply_string(f.history_opt, f.history, config.history_path, "history");
    apply_string(f.tfidf_opt, f.tfidf_out, config.tfidf_path, "tfidf");
    apply_string(f.pooling_opt, f.pooling, config.pooling, "pooling");

    if (f.seed_opt->count() > 0) {
        config.seed = f.seed;
        config.explicit_keys.insert("seed");
    } else if (!config.explicit_keys.count("seed")) {
        if (const char* env = std::getenv("NEWSFORGE_SEED")) {
            try {
                config.seed = std::stoull(env);
            } catch (const std::exception&) {
                throw newsforge::ConfigError("NEWSFORGE_SEED is not an integer: " +
                                             std::string(env));
            }
        }
    }
    if (f.epochs_opt->count() > 0) {
        config.epochs = f.epochs;
        config.explicit_keys.insert("epochs");
    }
    if (f.batch_opt->count() > 0) {
        config.batch_size = f.batch_size;
        config.explicit_keys.insert("batch_size");
    }
    if (f.ratio_opt->count() > 0) {
        config.ratio = f.ratio;
        config.explicit_keys.insert("ratio");
    }
    if (f.strict_opt->count() > 0) {
        config.strict = true;
        config.explicit_keys.insert("strict");
    }
    return config;
}

std::vector<std::string> read_lines(std::istream& in) {
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"newsforge: three-way news classification with a from-scratch Bi-LSTM"};
    app.require_subcommand(1);

    CLI::App* ingest = app.add_subcommand("ingest", "load a corpus and print its counts");
    CLI::App* train = app.add_subcommand("train", "train a model; writes checkpoint + history");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "classification report on the held-out test split");
    CLI::App* predict = app.add_subcommand("predict", "label new text with a trained model");
    CLI::App* tfidf = app.add_subcommand("tfidf", "write TF-IDF baseline vectors as JSONL");

    CommonFlags ingest_flags, train_flags, eval_flags, predict_flags, tfidf_flags;
    add_common_flags(ingest, ingest_flags);
    add_common_flags(train, train_flags);
    add_common_flags(evaluate, eval_flags);
    add_common_flags(predict, predict_flags);
    add_common_flags(tfidf, tfidf_flags);

    std::string predict_text;
    std::string predict_input;
    predict->add_option("--text", predict_text, "classify this single text");
    predict->add_option("input", predict_input, "file of texts, one per line (default: stdin)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (ingest->parsed()) {
            std::cout << newsforge::run_ingest(build_config(ingest_flags)).text;
        } else if (train->parsed()) {
            std::cout << newsforge::run_train(build_config(train_flags)).text;
        } else if (evaluate->parsed()) {
            std::cout << newsforge::run_evaluate(build_config(eval_flags)).text;
        } else if (tfidf->parsed()) {
            std::cout << newsforge::run_tfidf(build_config(tfidf_flags)).text;
        } else if (predict->parsed()) {
            std::vector<std::string> lines;
            if (predict->count("--text") > 0) {
                lines.push_back(predict_text);
            } else if (!predict_input.empty()) {
                std::ifstream file(predict_input);
                if (!file) throw newsforge::MissingFileError(predict_input);
                lines = read_lines(file);
            } else {
                lines = read_lines(std::cin);
            }
            for (const std::string& out : newsforge::run_predict(build_config(predict_flags),
                                                                 lines)) {
                std::cout << out << "\n";
            }
        }
        return 0;
    } catch (const newsforge::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const newsforge::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
