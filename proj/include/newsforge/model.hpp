#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "newsforge/corpus.hpp"
#include "newsforge/errors.hpp"
#include "newsforge/features.hpp"
#include "newsforge/numerics.hpp"

namespace newsforge {

/// How the two directions' hidden states become one sequence vector:
/// concatenated final states (default), or the mean over time of the
/// per-step concatenated outputs.
enum class Pooling { final_state, mean_concat };

struct Hyper {
    std::size_t hidden = 128;     // per direction; concat gives 2H
    std::size_t dense = 256;
    double dropout = 0.3;         // after embedding and after the dense layer
    std::size_t max_len = 300;
    std::size_t classes = 3;
    std::size_t embed_dim = 100;
    Pooling pooling = Pooling::final_state;
};

// Gate order used everywhere: input, forget, output, candidate.
enum GateIndex { kGateInput = 0, kGateForget = 1, kGateOutput = 2, kGateCandidate = 3 };
constexpr int kNumGates = 4;
extern const std::array<const char*, kNumGates> kGateNames;

struct LstmDirectionParams {
    std::array<Matrix, kNumGates> w_in;   // embed_dim x hidden
    std::array<Matrix, kNumGates> u_rec;  // hidden x hidden
    std::array<Matrix, kNumGates> bias;   // 1 x hidden
};

struct ModelParams {
    EmbeddingTable embedding;  // |V| x embed_dim
    LstmDirectionParams fwd;
    LstmDirectionParams bwd;
    Matrix dense_w;  // 2H x dense
    Matrix dense_b;  // 1 x dense
    Matrix out_w;    // dense x classes
    Matrix out_b;    // 1 x classes
};

/// Same tensor layout as ModelParams; the embedding member carries the
/// embedding-row gradients (its PAD row is always zero).
using Grads = ModelParams;

/// Fixed (name, tensor) enumeration shared by the optimizer, checkpointing
/// and the gradient checker.
std::vector<std::pair<std::string, Matrix*>> tensor_refs(ModelParams& p);
std::vector<std::pair<std::string, const Matrix*>> tensor_refs(const ModelParams& p);

/// Glorot-uniform weights, zero biases except the forget-gate bias at 1.
/// Without a pretrained table the embedding is uniform(-0.05, 0.05) with a
/// zero PAD row. Deterministic per seed.
ModelParams init_params(const Hyper& hyper, const Vocabulary& vocab,
                        const std::optional<EmbeddingTable>& pretrained, std::uint64_t seed);

/// Throws ShapeMismatch when params and hyper disagree.
void validate_params(const ModelParams& params, const Hyper& hyper);

struct LstmStepState {
    Matrix gate_i, gate_f, gate_o, gate_g;  // 1 x H, post-activation
    Matrix cell;                            // 1 x H
    Matrix hidden;                          // 1 x H
};

/// One step of the standard gate equations:
///   i = sigmoid(x W_i + h U_i + b_i)      f = sigmoid(x W_f + h U_f + b_f)
///   o = sigmoid(x W_o + h U_o + b_o)      g = tanh(x W_g + h U_g + b_g)
///   c = f * c_prev + i * g                h = o * tanh(c)
LstmStepState lstm_cell(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                        const LstmDirectionParams& p);

enum class Mode { train, eval };

struct SequenceCache {
    std::vector<int> ids;            // real tokens only (the true_length prefix)
    std::vector<Matrix> x;           // embedded input per position, post-dropout, 1 x d
    std::vector<Matrix> emb_mask;    // inverted-dropout masks; empty in eval mode
    std::vector<LstmStepState> fwd_steps;  // by position; processed left to right
    std::vector<LstmStepState> bwd_steps;  // by position; processed right to left
    Matrix rep;         // 1 x 2H
    Matrix z1;          // 1 x dense, pre-activation
    Matrix a1_used;     // post-relu, post-dropout
    Matrix dense_mask;  // empty in eval mode
};

struct ForwardCache {
    Hyper hyper;
    Mode mode = Mode::eval;
    std::vector<SequenceCache> sequences;
    bool consumed = false;
};

struct ForwardResult {
    Matrix logits;  // B x classes
    Matrix probs;   // B x classes, rows sum to 1
    ForwardCache cache;
};

/// Runs the network over a padded batch. PAD steps are skipped entirely, so
/// logits depend only on each sequence's true_length prefix; sequences may
/// carry any amount of PAD tail. Dropout (inverted) applies in train mode
/// only. Throws EmptySequenceInBatch for a zero-length sequence.
ForwardResult forward(const std::vector<EncodedSequence>& batch, const ModelParams& params,
                      const Hyper& hyper, Mode mode, Rng& rng);

/// Exact analytic gradients of the forward computation. The cache is
/// consumed; reusing it throws CacheMismatch. The PAD embedding row gradient
/// is forced to zero.
Grads backward(ForwardCache& cache, const Matrix& grad_logits, const ModelParams& params,
               const Hyper& hyper);

/// Argmax per row; ties resolve toward the smallest class code.
std::vector<Label> predict(const Matrix& probs);

} // namespace newsforge
