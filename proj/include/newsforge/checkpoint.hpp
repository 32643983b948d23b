#pragma once

#include <string>

#include "newsforge/features.hpp"
#include "newsforge/model.hpp"

namespace newsforge {

struct Checkpoint {
    Hyper hyper;
    Vocabulary vocab;
    ModelParams params;
};

/// Version-"1" checkpoint document: {version, hyper, vocab, tensors} with
/// full-precision decimal reals. Serialization is byte-deterministic.
std::string checkpoint_to_json(const Hyper& hyper, const Vocabulary& vocab,
                               const ModelParams& params);

void save_checkpoint(const std::string& path, const Hyper& hyper, const Vocabulary& vocab,
                     const ModelParams& params);

/// Throws MissingFile, Config (unsupported version or malformed document),
/// ShapeMismatch (tensors inconsistent with hyper/vocab).
Checkpoint load_checkpoint(const std::string& path);

} // namespace newsforge
