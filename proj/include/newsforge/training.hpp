#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "newsforge/corpus.hpp"
#include "newsforge/features.hpp"
#include "newsforge/model.hpp"

namespace newsforge {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 128;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double grad_clip_norm = 5.0;
    std::uint64_t seed = 42;
    double eval_split = 0.1;  // held-out slice of the training set, per-epoch metrics
};

struct EpochRecord {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double eval_loss = 0.0;
    double eval_accuracy = 0.0;
};

using History = std::vector<EpochRecord>;

struct AdamState {
    Grads m;
    Grads v;
    std::int64_t step = 0;
};

AdamState make_adam_state(const ModelParams& params);

struct CrossEntropyResult {
    double loss = 0.0;
    Matrix grad_logits;  // (probs - onehot) / B, the fused softmax gradient
};

/// Mean negative log-likelihood with probabilities clamped at 1e-12.
CrossEntropyResult cross_entropy(const Matrix& probs, const std::vector<Label>& labels);

/// Root of the summed squared entries over every tensor.
double global_norm(const Grads& grads);

/// One Adam update after clipping the gradients to grad_clip_norm by global
/// norm. Bias-corrected moments; the PAD embedding row is never touched, nor
/// is the embedding when it is marked non-trainable.
void adam_step(ModelParams& params, const Grads& grads, AdamState& state,
               const TrainConfig& cfg);

struct TrainData {
    std::vector<EncodedSequence> sequences;
    std::vector<Label> labels;
};

struct TrainResult {
    ModelParams params;
    History history;
};

/// Mini-batch training: per epoch a seeded shuffle, batches of batch_size
/// (last one smaller), forward/cross-entropy/backward/adam per batch, then
/// an eval-mode pass over the held-out eval_split slice. When the slice
/// rounds to zero documents the eval metrics are computed over the full
/// training set instead. Fully deterministic per seed. Throws EmptyCorpus
/// and NonFiniteLoss (with the epoch and batch index).
TrainResult train(const TrainData& data, const Vocabulary& vocab,
                  const std::optional<EmbeddingTable>& pretrained, const Hyper& hyper,
                  const TrainConfig& cfg);

struct EvalResult {
    double loss = 0.0;
    std::vector<Label> predictions;
};

/// Eval-mode pass over every sequence in the given order.
EvalResult evaluate(const ModelParams& params, const TrainData& data, const Hyper& hyper);

/// CSV with header epoch,train_loss,train_acc,eval_loss,eval_acc and
/// 6-decimal values; epochs count from 1.
std::string history_to_csv(const History& history);

} // namespace newsforge
