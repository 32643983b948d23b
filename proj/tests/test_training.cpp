#include <cmath>

#include "doctest.h"

#include "newsforge/training.hpp"
#include "testutil.hpp"

using namespace newsforge;

namespace {

Hyper small_hyper() {
    Hyper h;
    h.hidden = 4;
    h.dense = 8;
    h.dropout = 0.0;
    h.max_len = 6;
    h.embed_dim = 4;
    return h;
}

} // namespace

TEST_CASE("cross_entropy: symmetry, perfect prediction, hand trace") {
    const Matrix uniform(2, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto r1 = cross_entropy(uniform, {Label::False, Label::True});
    CHECK(r1.loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    const Matrix onehot(1, 3, {0.0, 1.0, 0.0});
    const auto r2 = cross_entropy(onehot, {Label::PartiallyFalse});
    CHECK(r2.loss == doctest::Approx(0.0).epsilon(1e-9));

    const Matrix probs(1, 3, {0.5, 0.25, 0.25});
    const auto r3 = cross_entropy(probs, {Label::False});
    CHECK(r3.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r3.grad_logits(0, 0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(r3.grad_logits(0, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r3.grad_logits(0, 2) == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(cross_entropy(probs, {Label::False, Label::True}), ShapeMismatchError);
}

TEST_CASE("cross_entropy clamps vanishing probabilities") {
    const Matrix degenerate(1, 3, {0.0, 1.0, 0.0});
    const auto r = cross_entropy(degenerate, {Label::False});
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(-std::log(1e-12)));
}

namespace {

struct TinyModel {
    Hyper hyper;
    Vocabulary vocab;
    ModelParams params;
};

TinyModel make_tiny() {
    TinyModel t{small_hyper(), testutil::synthetic_vocab(8), {}};
    t.params = init_params(t.hyper, t.vocab, std::nullopt, 5);
    return t;
}

} // namespace

TEST_CASE("adam_step: zero gradient leaves parameters, advances the clock") {
    TinyModel t = make_tiny();
    const ModelParams before = t.params;
    AdamState state = make_adam_state(t.params);
    Grads zero = make_adam_state(t.params).m;  // zero tensors of the right shape
    TrainConfig cfg;
    adam_step(t.params, zero, state, cfg);
    CHECK(state.step == 1);
    const auto ra = tensor_refs(static_cast<const ModelParams&>(before));
    const auto rb = tensor_refs(static_cast<const ModelParams&>(t.params));
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].second->data() == rb[i].second->data());
}

TEST_CASE("adam_step: first step moves a scalar by about -lr") {
    TinyModel t = make_tiny();
    AdamState state = make_adam_state(t.params);
    Grads grads = make_adam_state(t.params).m;
    grads.dense_b(0, 0) = 0.3;  // global norm 0.3, below the clip

    TrainConfig cfg;
    cfg.learning_rate = 0.001;
    const double before = t.params.dense_b(0, 0);
    adam_step(t.params, grads, state, cfg);
    const double delta = t.params.dense_b(0, 0) - before;
    // m_hat = g, v_hat = g^2  ->  step = -lr * g / (|g| + eps)
    CHECK(delta == doctest::Approx(-0.001 * 0.3 / (0.3 + 1e-8)).epsilon(1e-9));
    CHECK(delta == doctest::Approx(-0.001).epsilon(1e-4));
}

TEST_CASE("adam_step: gradients above the clip norm are rescaled") {
    TinyModel t = make_tiny();
    AdamState state = make_adam_state(t.params);
    Grads grads = make_adam_state(t.params).m;
    grads.dense_b(0, 0) = 30.0;
    grads.dense_b(0, 1) = 40.0;  // global norm 50
    CHECK(global_norm(grads) == doctest::Approx(50.0));

    TrainConfig cfg;  // clip 5.0 -> scale 0.1 -> effective grads 3 and 4
    const double b0 = t.params.dense_b(0, 0);
    const double b1 = t.params.dense_b(0, 1);
    adam_step(t.params, grads, state, cfg);
    // first-step update with effective gradient g: -lr * g / (|g| + eps)
    CHECK(t.params.dense_b(0, 0) - b0 ==
          doctest::Approx(-cfg.learning_rate * 3.0 / (3.0 + cfg.epsilon)).epsilon(1e-9));
    CHECK(t.params.dense_b(0, 1) - b1 ==
          doctest::Approx(-cfg.learning_rate * 4.0 / (4.0 + cfg.epsilon)).epsilon(1e-9));

    // the documented scale factor restores the post-clip norm bound
    const double scale = cfg.grad_clip_norm / 50.0;
    double clipped_sq = 0.0;
    for (const auto& [name, tensor] : tensor_refs(static_cast<const ModelParams&>(grads))) {
        for (double x : tensor->data()) clipped_sq += (x * scale) * (x * scale);
    }
    CHECK(std::sqrt(clipped_sq) <= cfg.grad_clip_norm + 1e-9);
}

TEST_CASE("adam_step: PAD row and frozen embeddings stay put") {
    TinyModel t = make_tiny();
    AdamState state = make_adam_state(t.params);
    Grads grads = make_adam_state(t.params).m;
    for (std::size_t c = 0; c < 4; ++c) {
        grads.embedding.matrix(kPadId, c) = 1.0;  // must be ignored
        grads.embedding.matrix(3, c) = 1.0;
    }
    TrainConfig cfg;
    const double row3_before = t.params.embedding.matrix(3, 0);
    adam_step(t.params, grads, state, cfg);
    for (std::size_t c = 0; c < 4; ++c) CHECK(t.params.embedding.matrix(kPadId, c) == 0.0);
    CHECK(t.params.embedding.matrix(3, 0) != row3_before);

    TinyModel frozen = make_tiny();
    frozen.params.embedding.trainable = false;
    AdamState st2 = make_adam_state(frozen.params);
    const Matrix emb_before = frozen.params.embedding.matrix;
    adam_step(frozen.params, grads, st2, cfg);
    CHECK(frozen.params.embedding.matrix.data() == emb_before.data());
}

TEST_CASE("train: epochs=0 returns the initial parameters and empty history") {
    const Hyper h = small_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(8);
    const TrainData data = testutil::synthetic_encoded(6, 8, h.max_len, 3);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 9;
    const TrainResult r = train(data, vocab, std::nullopt, h, cfg);
    CHECK(r.history.empty());

    const ModelParams fresh = init_params(h, vocab, std::nullopt, 9);
    const auto ra = tensor_refs(static_cast<const ModelParams&>(r.params));
    const auto rb = tensor_refs(static_cast<const ModelParams&>(fresh));
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].second->data() == rb[i].second->data());
}

TEST_CASE("train: identical seed and data give bit-identical results") {
    const Hyper h = small_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(8);
    const TrainData data = testutil::synthetic_encoded(12, 8, h.max_len, 3);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.seed = 31;
    cfg.eval_split = 0.25;

    const TrainResult a = train(data, vocab, std::nullopt, h, cfg);
    const TrainResult b = train(data, vocab, std::nullopt, h, cfg);
    REQUIRE(a.history.size() == 3);
    REQUIRE(b.history.size() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(a.history[e].train_loss == b.history[e].train_loss);
        CHECK(a.history[e].train_accuracy == b.history[e].train_accuracy);
        CHECK(a.history[e].eval_loss == b.history[e].eval_loss);
        CHECK(a.history[e].eval_accuracy == b.history[e].eval_accuracy);
        CHECK(std::isfinite(a.history[e].train_loss));
        CHECK(std::isfinite(a.history[e].eval_loss));
    }
    const auto ra = tensor_refs(static_cast<const ModelParams&>(a.params));
    const auto rb = tensor_refs(static_cast<const ModelParams&>(b.params));
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].second->data() == rb[i].second->data());

    TrainConfig other = cfg;
    other.seed = 32;
    const TrainResult c = train(data, vocab, std::nullopt, h, other);
    CHECK(c.history[0].train_loss != a.history[0].train_loss);
}

TEST_CASE("train: dropout training is deterministic per seed as well") {
    Hyper h = small_hyper();
    h.dropout = 0.3;
    const Vocabulary vocab = testutil::synthetic_vocab(8);
    const TrainData data = testutil::synthetic_encoded(10, 8, h.max_len, 4);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 5;
    cfg.seed = 77;
    const TrainResult a = train(data, vocab, std::nullopt, h, cfg);
    const TrainResult b = train(data, vocab, std::nullopt, h, cfg);
    CHECK(a.history[1].train_loss == b.history[1].train_loss);
}

TEST_CASE("train: first adam step reduces the first-batch loss on separable data") {
    const Hyper h = small_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(8);
    int decreases = 0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        const TrainData data =
            testutil::synthetic_encoded(8, 8, h.max_len, 1000 + static_cast<std::uint64_t>(s));
        TrainConfig cfg;
        cfg.epochs = 0;
        cfg.seed = static_cast<std::uint64_t>(s);
        cfg.learning_rate = 0.01;

        ModelParams params = init_params(h, vocab, std::nullopt, cfg.seed);
        AdamState state = make_adam_state(params);
        Rng rng(1);
        ForwardResult fr = forward(data.sequences, params, h, Mode::eval, rng);
        CrossEntropyResult ce = cross_entropy(fr.probs, data.labels);
        const Grads grads = backward(fr.cache, ce.grad_logits, params, h);
        adam_step(params, grads, state, cfg);

        ForwardResult after = forward(data.sequences, params, h, Mode::eval, rng);
        const double new_loss = cross_entropy(after.probs, data.labels).loss;
        if (new_loss < ce.loss) ++decreases;
    }
    CHECK(decreases >= seeds - 1);
}

TEST_CASE("evaluate: counts, determinism, single-document composition") {
    const Hyper h = small_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(8);
    const TrainData data = testutil::synthetic_encoded(7, 8, h.max_len, 12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 2);

    const EvalResult r1 = evaluate(params, data, h);
    CHECK(r1.predictions.size() == 7);
    const EvalResult r2 = evaluate(params, data, h);
    CHECK(r1.loss == r2.loss);
    CHECK(r1.predictions == r2.predictions);

    TrainData single;
    single.sequences = {data.sequences[0]};
    single.labels = {data.labels[0]};
    const EvalResult rs = evaluate(params, single, h);
    Rng rng(0);
    const ForwardResult fr = forward(single.sequences, params, h, Mode::eval, rng);
    CHECK(rs.predictions[0] == predict(fr.probs)[0]);
    CHECK(rs.loss == doctest::Approx(cross_entropy(fr.probs, single.labels).loss));

    CHECK_THROWS_AS(evaluate(params, TrainData{}, h), EmptyCorpusError);
}

TEST_CASE("history csv format") {
    History history;
    history.push_back({1.098612, 0.333333, 1.095, 0.4});
    history.push_back({0.5, 0.875, 0.6, 0.75});
    const std::string csv = history_to_csv(history);
    CHECK(csv ==
          "epoch,train_loss,train_acc,eval_loss,eval_acc\n"
          "1,1.098612,0.333333,1.095000,0.400000\n"
          "2,0.500000,0.875000,0.600000,0.750000\n");
    CHECK(history_to_csv({}) == "epoch,train_loss,train_acc,eval_loss,eval_acc\n");
}

TEST_CASE("train rejects degenerate inputs") {
    const Hyper h = small_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(8);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(TrainData{}, vocab, std::nullopt, h, cfg), EmptyCorpusError);

    TrainData mismatched = testutil::synthetic_encoded(4, 8, h.max_len, 3);
    mismatched.labels.pop_back();
    CHECK_THROWS_AS(train(mismatched, vocab, std::nullopt, h, cfg), ShapeMismatchError);

    TrainConfig bad = cfg;
    bad.eval_split = 1.0;
    const TrainData data = testutil::synthetic_encoded(4, 8, h.max_len, 3);
    CHECK_THROWS_AS(train(data, vocab, std::nullopt, h, bad), BadRangeError);
}
