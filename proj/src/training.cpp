#include "newsforge/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace newsforge {

namespace {

// Distinct stream from the init_params draw order.
constexpr std::uint64_t kLoopSeedSalt = 0xA5B35705987649D1ULL;

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

} // namespace

AdamState make_adam_state(const ModelParams& params) {
    AdamState state;
    auto zero_of = [](const ModelParams& src) {
        Grads g = src;
        for (auto& [name, tensor] : tensor_refs(g)) tensor->fill(0.0);
        return g;
    };
    state.m = zero_of(params);
    state.v = zero_of(params);
    state.step = 0;
    return state;
}

CrossEntropyResult cross_entropy(const Matrix& probs, const std::vector<Label>& labels) {
    if (probs.rows() != labels.size()) {
        throw ShapeMismatchError("probs has " + std::to_string(probs.rows()) + " rows but " +
                                 std::to_string(labels.size()) + " labels were given");
    }
    if (probs.cols() != static_cast<std::size_t>(kNumClasses)) {
        throw ShapeMismatchError("probs must have 3 columns");
    }
    const std::size_t batch = probs.rows();
    const double inv_b = 1.0 / static_cast<double>(batch);

    CrossEntropyResult result;
    result.grad_logits = Matrix(batch, kNumClasses);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const int y = static_cast<int>(labels[b]);
        const double p = std::max(probs(b, static_cast<std::size_t>(y)), 1e-12);
        loss -= std::log(p);
        for (int c = 0; c < kNumClasses; ++c) {
            const double onehot = c == y ? 1.0 : 0.0;
            result.grad_logits(b, static_cast<std::size_t>(c)) =
                (probs(b, static_cast<std::size_t>(c)) - onehot) * inv_b;
        }
    }
    result.loss = loss * inv_b;
    return result;
}

double global_norm(const Grads& grads) {
    double sum_sq = 0.0;
    for (const auto& [name, tensor] : tensor_refs(grads)) {
        for (double x : tensor->data()) sum_sq += x * x;
    }
    return std::sqrt(sum_sq);
}

void adam_step(ModelParams& params, const Grads& grads, AdamState& state,
               const TrainConfig& cfg) {
    const double norm = global_norm(grads);
    const double scale = (cfg.grad_clip_norm > 0.0 && norm > cfg.grad_clip_norm)
                             ? cfg.grad_clip_norm / norm
                             : 1.0;

    state.step += 1;
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    auto param_refs = tensor_refs(params);
    const auto grad_refs = tensor_refs(grads);
    auto m_refs = tensor_refs(state.m);
    auto v_refs = tensor_refs(state.v);

    for (std::size_t i = 0; i < param_refs.size(); ++i) {
        Matrix& theta = *param_refs[i].second;
        const Matrix& g = *grad_refs[i].second;
        Matrix& m = *m_refs[i].second;
        Matrix& v = *v_refs[i].second;
        if (!theta.same_shape(g) || !theta.same_shape(m)) {
            throw ShapeMismatchError("gradient/state shape differs from params at " +
                                     param_refs[i].first);
        }
        const bool is_embedding = param_refs[i].first == "embedding";
        if (is_embedding && !params.embedding.trainable) continue;

        const std::size_t skip_below = is_embedding ? theta.cols() : 0;  // PAD row
        for (std::size_t k = skip_below; k < theta.size(); ++k) {
            const double ge = g.data()[k] * scale;
            m.data()[k] = cfg.beta1 * m.data()[k] + (1.0 - cfg.beta1) * ge;
            v.data()[k] = cfg.beta2 * v.data()[k] + (1.0 - cfg.beta2) * ge * ge;
            const double m_hat = m.data()[k] / bias1;
            const double v_hat = v.data()[k] / bias2;
            theta.data()[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

namespace {

struct EvalAccumulator {
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t count = 0;
    std::vector<Label> predictions;
};

void eval_pass(const ModelParams& params, const TrainData& data,
               const std::vector<std::size_t>& indices, const Hyper& hyper,
               std::size_t batch_size, EvalAccumulator& acc) {
    Rng unused_rng(0);  // eval mode draws nothing
    for (std::size_t begin = 0; begin < indices.size(); begin += batch_size) {
        const std::size_t end = std::min(begin + batch_size, indices.size());
        std::vector<EncodedSequence> batch;
        std::vector<Label> labels;
        batch.reserve(end - begin);
        labels.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            batch.push_back(data.sequences[indices[i]]);
            labels.push_back(data.labels[indices[i]]);
        }
        ForwardResult fr = forward(batch, params, hyper, Mode::eval, unused_rng);
        const CrossEntropyResult ce = cross_entropy(fr.probs, labels);
        acc.loss_sum += ce.loss * static_cast<double>(labels.size());
        const std::vector<Label> preds = predict(fr.probs);
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == labels[i]) ++acc.correct;
            acc.predictions.push_back(preds[i]);
        }
        acc.count += labels.size();
    }
}

} // namespace

TrainResult train(const TrainData& data, const Vocabulary& vocab,
                  const std::optional<EmbeddingTable>& pretrained, const Hyper& hyper,
                  const TrainConfig& cfg) {
    if (data.sequences.empty()) throw EmptyCorpusError("no training sequences");
    if (data.sequences.size() != data.labels.size()) {
        throw ShapeMismatchError("sequences and labels differ in length");
    }
    if (cfg.batch_size < 1) throw BadRangeError("batch_size must be >= 1");
    if (!(cfg.learning_rate > 0.0)) throw BadRangeError("learning_rate must be > 0");
    if (!(cfg.eval_split >= 0.0 && cfg.eval_split < 1.0)) {
        throw BadRangeError("eval_split must lie in [0,1)");
    }

    TrainResult result;
    result.params = init_params(hyper, vocab, pretrained, cfg.seed);
    AdamState adam = make_adam_state(result.params);
    Rng rng(cfg.seed ^ kLoopSeedSalt);

    const std::size_t n = data.sequences.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    const std::size_t n_eval = round_half_up(cfg.eval_split * static_cast<double>(n));
    std::vector<std::size_t> eval_idx(order.begin(),
                                      order.begin() + static_cast<std::ptrdiff_t>(n_eval));
    std::vector<std::size_t> fit_idx(order.begin() + static_cast<std::ptrdiff_t>(n_eval),
                                     order.end());
    if (fit_idx.empty()) throw EmptyCorpusError("eval_split left no training documents");
    // With no held-out slice the per-epoch eval runs over the training set.
    const std::vector<std::size_t>& eval_set = eval_idx.empty() ? fit_idx : eval_idx;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(fit_idx);
        double loss_sum = 0.0;
        std::size_t correct = 0;

        std::size_t batch_index = 0;
        for (std::size_t begin = 0; begin < fit_idx.size(); begin += cfg.batch_size) {
            const std::size_t end = std::min(begin + cfg.batch_size, fit_idx.size());
            std::vector<EncodedSequence> batch;
            std::vector<Label> labels;
            batch.reserve(end - begin);
            labels.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(data.sequences[fit_idx[i]]);
                labels.push_back(data.labels[fit_idx[i]]);
            }

            ForwardResult fr = forward(batch, result.params, hyper, Mode::train, rng);
            CrossEntropyResult ce = cross_entropy(fr.probs, labels);
            if (!std::isfinite(ce.loss)) {
                throw NonFiniteLossError("epoch " + std::to_string(epoch + 1) + ", batch " +
                                         std::to_string(batch_index + 1));
            }
            const Grads grads = backward(fr.cache, ce.grad_logits, result.params, hyper);
            adam_step(result.params, grads, adam, cfg);

            loss_sum += ce.loss * static_cast<double>(labels.size());
            const std::vector<Label> preds = predict(fr.probs);
            for (std::size_t i = 0; i < preds.size(); ++i) {
                if (preds[i] == labels[i]) ++correct;
            }
            ++batch_index;
        }

        EpochRecord record;
        record.train_loss = loss_sum / static_cast<double>(fit_idx.size());
        record.train_accuracy =
            static_cast<double>(correct) / static_cast<double>(fit_idx.size());

        EvalAccumulator acc;
        eval_pass(result.params, data, eval_set, hyper, cfg.batch_size, acc);
        record.eval_loss = acc.loss_sum / static_cast<double>(acc.count);
        record.eval_accuracy = static_cast<double>(acc.correct) / static_cast<double>(acc.count);

        if (!std::isfinite(record.eval_loss) || !std::isfinite(record.train_loss)) {
            throw NonFiniteLossError("epoch " + std::to_string(epoch + 1) + " summary");
        }
        result.history.push_back(record);
    }
    return result;
}

EvalResult evaluate(const ModelParams& params, const TrainData& data, const Hyper& hyper) {
    if (data.sequences.empty()) throw EmptyCorpusError("no sequences to evaluate");
    if (data.sequences.size() != data.labels.size()) {
        throw ShapeMismatchError("sequences and labels differ in length");
    }
    std::vector<std::size_t> indices(data.sequences.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;
    EvalAccumulator acc;
    eval_pass(params, data, indices, hyper, 64, acc);
    return {acc.loss_sum / static_cast<double>(acc.count), std::move(acc.predictions)};
}

std::string history_to_csv(const History& history) {
    std::string out = "epoch,train_loss,train_acc,eval_loss,eval_acc\n";
    char buf[160];
    for (std::size_t i = 0; i < history.size(); ++i) {
        const EpochRecord& r = history[i];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f\n", i + 1, r.train_loss,
                      r.train_accuracy, r.eval_loss, r.eval_accuracy);
        out += buf;
    }
    return out;
}

} // namespace newsforge
