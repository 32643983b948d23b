#include "newsforge/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace newsforge {

namespace {

const char* pooling_name(Pooling p) {
    return p == Pooling::final_state ? "final_state" : "mean_concat";
}

Pooling pooling_from_name(const std::string& name) {
    if (name == "final_state") return Pooling::final_state;
    if (name == "mean_concat") return Pooling::mean_concat;
    throw ConfigError("unknown pooling \"" + name + "\"");
}

} // namespace

std::string checkpoint_to_json(const Hyper& hyper, const Vocabulary& vocab,
                               const ModelParams& params) {
    nlohmann::json j;
    j["version"] = "1";
    j["hyper"] = {{"hidden", hyper.hidden},     {"dense", hyper.dense},
                  {"dropout", hyper.dropout},   {"max_len", hyper.max_len},
                  {"classes", hyper.classes},   {"embed_dim", hyper.embed_dim},
                  {"pooling", pooling_name(hyper.pooling)}};
    j["vocab"] = {{"id_to_token", vocab.id_to_token()}, {"min_freq", vocab.min_freq()}};
    nlohmann::json tensors;
    for (const auto& [name, tensor] : tensor_refs(params)) {
        tensors[name] = {{"rows", tensor->rows()}, {"cols", tensor->cols()},
                         {"data", tensor->data()}};
    }
    j["tensors"] = std::move(tensors);
    return j.dump();
}

void save_checkpoint(const std::string& path, const Hyper& hyper, const Vocabulary& vocab,
                     const ModelParams& params) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw MissingFileError("cannot open " + path + " for writing");
    file << checkpoint_to_json(hyper, vocab, params);
    file << "\n";
    if (!file) throw MissingFileError("failed writing " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw MissingFileError(path);
    nlohmann::json j;
    try {
        file >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("checkpoint " + path + " is not valid JSON: " + e.what());
    }
    try {
        if (j.at("version").get<std::string>() != "1") {
            throw ConfigError("unsupported checkpoint version");
        }
        Checkpoint cp;
        const nlohmann::json& h = j.at("hyper");
        cp.hyper.hidden = h.at("hidden").get<std::size_t>();
        cp.hyper.dense = h.at("dense").get<std::size_t>();
        cp.hyper.dropout = h.at("dropout").get<double>();
        cp.hyper.max_len = h.at("max_len").get<std::size_t>();
        cp.hyper.classes = h.at("classes").get<std::size_t>();
        cp.hyper.embed_dim = h.at("embed_dim").get<std::size_t>();
        cp.hyper.pooling = pooling_from_name(h.at("pooling").get<std::string>());

        cp.vocab = Vocabulary(j.at("vocab").at("id_to_token").get<std::vector<std::string>>(),
                              j.at("vocab").at("min_freq").get<int>());

        const nlohmann::json& tensors = j.at("tensors");
        for (auto& [name, tensor] : tensor_refs(cp.params)) {
            if (!tensors.contains(name)) {
                throw ConfigError("checkpoint is missing tensor \"" + name + "\"");
            }
            const nlohmann::json& t = tensors.at(name);
            *tensor = Matrix(t.at("rows").get<std::size_t>(), t.at("cols").get<std::size_t>(),
                             t.at("data").get<std::vector<double>>());
        }
        validate_params(cp.params, cp.hyper);
        if (cp.params.embedding.matrix.rows() != cp.vocab.size()) {
            throw ShapeMismatchError("embedding rows do not match the checkpoint vocabulary");
        }
        return cp;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("checkpoint " + path + " is malformed: " + e.what());
    }
}

} // namespace newsforge
