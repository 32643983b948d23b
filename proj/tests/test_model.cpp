#include <cmath>

#include "doctest.h"

#include "newsforge/model.hpp"
#include "testutil.hpp"

using namespace newsforge;

namespace {

Hyper tiny_hyper() {
    Hyper h;
    h.hidden = 3;
    h.dense = 8;
    h.dropout = 0.0;
    h.max_len = 5;
    h.embed_dim = 4;
    return h;
}

LstmDirectionParams zero_direction(std::size_t d, std::size_t h) {
    LstmDirectionParams p;
    for (int g = 0; g < kNumGates; ++g) {
        p.w_in[g] = Matrix(d, h);
        p.u_rec[g] = Matrix(h, h);
        p.bias[g] = Matrix(1, h);
    }
    return p;
}

} // namespace

TEST_CASE("init_params: default-sized shapes") {
    Hyper h;  // defaults: hidden 128, dense 256, embed 100
    const Vocabulary vocab = testutil::synthetic_vocab(50);
    const ModelParams p = init_params(h, vocab, std::nullopt, 3);

    CHECK(p.fwd.w_in[kGateInput].rows() == 100);
    CHECK(p.fwd.w_in[kGateInput].cols() == 128);
    CHECK(p.fwd.u_rec[kGateInput].rows() == 128);
    CHECK(p.fwd.u_rec[kGateInput].cols() == 128);
    CHECK(p.dense_w.rows() == 256);
    CHECK(p.dense_w.cols() == 256);
    CHECK(p.out_w.rows() == 256);
    CHECK(p.out_w.cols() == 3);
    CHECK(p.embedding.matrix.rows() == 50);
    CHECK(p.embedding.matrix.cols() == 100);
}

TEST_CASE("init_params: determinism, forget bias, PAD row") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams a = init_params(h, vocab, std::nullopt, 11);
    const ModelParams b = init_params(h, vocab, std::nullopt, 11);

    const auto ra = tensor_refs(a);
    const auto rb = tensor_refs(b);
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].second->data() == rb[i].second->data());
    }
    for (double x : a.fwd.bias[kGateForget].data()) CHECK(x == 1.0);
    for (double x : a.bwd.bias[kGateForget].data()) CHECK(x == 1.0);
    for (double x : a.fwd.bias[kGateInput].data()) CHECK(x == 0.0);
    for (std::size_t c = 0; c < h.embed_dim; ++c) CHECK(a.embedding.matrix(kPadId, c) == 0.0);

    const ModelParams c = init_params(h, vocab, std::nullopt, 12);
    CHECK(c.fwd.w_in[0].data() != a.fwd.w_in[0].data());
}

TEST_CASE("init_params validates the pretrained table shape") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    EmbeddingTable wrong;
    wrong.matrix = Matrix(12, 7);
    CHECK_THROWS_AS(init_params(h, vocab, wrong, 1), ShapeMismatchError);
    EmbeddingTable right;
    right.matrix = Matrix(12, 4);
    const ModelParams p = init_params(h, vocab, right, 1);
    CHECK(p.embedding.matrix.cols() == 4);
}

TEST_CASE("lstm_cell: zero fixed point") {
    const auto p = zero_direction(2, 3);
    const Matrix x(1, 2, {0.7, -0.3});
    const Matrix zero(1, 3);
    const LstmStepState s = lstm_cell(x, zero, zero, p);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(s.gate_i(0, k) == doctest::Approx(0.5));
        CHECK(s.gate_f(0, k) == doctest::Approx(0.5));
        CHECK(s.gate_o(0, k) == doctest::Approx(0.5));
        CHECK(s.gate_g(0, k) == doctest::Approx(0.0));
        CHECK(s.cell(0, k) == doctest::Approx(0.0));
        CHECK(s.hidden(0, k) == doctest::Approx(0.0));
    }
}

TEST_CASE("lstm_cell: scalar hand trace") {
    auto p = zero_direction(1, 1);
    p.bias[kGateCandidate](0, 0) = std::atanh(0.5);
    const Matrix x(1, 1, {0.0});
    const Matrix zero(1, 1);
    const LstmStepState s = lstm_cell(x, zero, zero, p);
    CHECK(s.cell(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(s.hidden(0, 0) == doctest::Approx(0.5 * std::tanh(0.25)).epsilon(1e-12));
    CHECK(s.hidden(0, 0) == doctest::Approx(0.12245).epsilon(1e-4));
}

TEST_CASE("lstm_cell: saturated gates retain the cell memory") {
    auto p = zero_direction(1, 1);
    p.bias[kGateForget](0, 0) = 20.0;   // f ~ 1
    p.bias[kGateInput](0, 0) = -20.0;   // i ~ 0
    const Matrix x(1, 1, {0.3});
    const Matrix h_prev(1, 1);
    const Matrix c_prev(1, 1, {10.0});
    const LstmStepState s = lstm_cell(x, h_prev, c_prev, p);
    CHECK(s.cell(0, 0) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("forward: shapes, probability rows, eval determinism") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 21);
    const TrainData data = testutil::synthetic_encoded(2, 12, h.max_len, 5);

    Rng rng(1);
    const ForwardResult fr = forward(data.sequences, params, h, Mode::eval, rng);
    CHECK(fr.logits.rows() == 2);
    CHECK(fr.logits.cols() == 3);
    for (std::size_t r = 0; r < 2; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 3; ++c) sum += fr.probs(r, c);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
    }

    Rng rng2(999);  // eval mode must ignore the rng entirely
    const ForwardResult again = forward(data.sequences, params, h, Mode::eval, rng2);
    CHECK(again.probs.data() == fr.probs.data());
}

TEST_CASE("forward rejects empty sequences in a batch") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 21);
    EncodedSequence empty;
    empty.ids.assign(h.max_len, kPadId);
    empty.true_length = 0;
    Rng rng(1);
    CHECK_THROWS_AS(forward({empty}, params, h, Mode::eval, rng), EmptySequenceInBatchError);
}

TEST_CASE("padding invariance: logits ignore the PAD tail") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 77);
    Rng rng(123);

    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 1 + rng.bounded(h.max_len);
        EncodedSequence shorter;
        shorter.true_length = len;
        shorter.ids.assign(len, 0);
        for (std::size_t t = 0; t < len; ++t) {
            shorter.ids[t] = 2 + static_cast<int>(rng.bounded(10));
        }
        EncodedSequence longer = shorter;
        longer.ids.resize(len + 1 + rng.bounded(20), kPadId);

        Rng r1(0), r2(0);
        const ForwardResult a = forward({shorter}, params, h, Mode::eval, r1);
        const ForwardResult b = forward({longer}, params, h, Mode::eval, r2);
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(std::abs(a.logits(0, c) - b.logits(0, c)) <= 1e-12);
        }
    }
}

TEST_CASE("backward: zero upstream gradient gives zero parameter gradients") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 4);
    const TrainData data = testutil::synthetic_encoded(3, 12, h.max_len, 6);

    Rng rng(1);
    ForwardResult fr = forward(data.sequences, params, h, Mode::eval, rng);
    const Matrix zero_grad(3, 3);
    const Grads grads = backward(fr.cache, zero_grad, params, h);
    for (const auto& [name, tensor] : tensor_refs(static_cast<const ModelParams&>(grads))) {
        for (double x : tensor->data()) CHECK(x == 0.0);
    }
}

TEST_CASE("backward consumes its cache exactly once") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 4);
    const TrainData data = testutil::synthetic_encoded(2, 12, h.max_len, 6);
    Rng rng(1);
    ForwardResult fr = forward(data.sequences, params, h, Mode::eval, rng);
    const Matrix g(2, 3);
    backward(fr.cache, g, params, h);
    CHECK_THROWS_AS(backward(fr.cache, g, params, h), CacheMismatchError);

    ForwardResult fr2 = forward(data.sequences, params, h, Mode::eval, rng);
    CHECK_THROWS_AS(backward(fr2.cache, Matrix(5, 3), params, h), CacheMismatchError);
}

TEST_CASE("gradient check: analytic BPTT matches central differences") {
    const Hyper h = tiny_hyper();  // V=12, d=4, H=3, len=5
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const TrainData data = testutil::synthetic_encoded(2, 12, h.max_len, 17);
    const auto report = testutil::gradient_check(h, vocab, data, 33, 6, 1e-5);
    CAPTURE(report.worst_tensor);
    CHECK(report.coords_checked >= 5 * 29);
    CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("gradient check holds for mean_concat pooling too") {
    Hyper h = tiny_hyper();
    h.pooling = Pooling::mean_concat;
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const TrainData data = testutil::synthetic_encoded(2, 12, h.max_len, 18);
    const auto report = testutil::gradient_check(h, vocab, data, 34, 6, 1e-5);
    CAPTURE(report.worst_tensor);
    CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("duplicate sequence in a batch doubles its embedding gradient") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 4);
    TrainData data = testutil::synthetic_encoded(1, 12, h.max_len, 6);

    Rng rng(1);
    Matrix g1(1, 3, {0.5, -0.2, -0.3});
    ForwardResult single = forward(data.sequences, params, h, Mode::eval, rng);
    const Grads grads_single = backward(single.cache, g1, params, h);

    const std::vector<EncodedSequence> doubled = {data.sequences[0], data.sequences[0]};
    Matrix g2(2, 3, {0.5, -0.2, -0.3, 0.5, -0.2, -0.3});
    ForwardResult dup = forward(doubled, params, h, Mode::eval, rng);
    const Grads grads_dup = backward(dup.cache, g2, params, h);

    for (std::size_t k = 0; k < grads_single.embedding.matrix.size(); ++k) {
        CHECK(grads_dup.embedding.matrix.data()[k] ==
              doctest::Approx(2.0 * grads_single.embedding.matrix.data()[k]).epsilon(1e-12));
    }
}

TEST_CASE("PAD embedding row has zero gradient") {
    const Hyper h = tiny_hyper();
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    const ModelParams params = init_params(h, vocab, std::nullopt, 4);
    const TrainData data = testutil::synthetic_encoded(3, 12, h.max_len, 9);
    Rng rng(1);
    ForwardResult fr = forward(data.sequences, params, h, Mode::eval, rng);
    Matrix g(3, 3);
    g.fill(0.1);
    const Grads grads = backward(fr.cache, g, params, h);
    for (std::size_t c = 0; c < h.embed_dim; ++c) {
        CHECK(grads.embedding.matrix(kPadId, c) == 0.0);
    }
}

TEST_CASE("predict: argmax with ties toward the smaller code") {
    const Matrix probs(3, 3, {0.1, 0.2, 0.7, 0.4, 0.4, 0.2, 0.2, 0.5, 0.3});
    const std::vector<Label> labels = predict(probs);
    CHECK(labels[0] == Label::True);
    CHECK(labels[1] == Label::False);          // 0.4 tie -> class 0
    CHECK(labels[2] == Label::PartiallyFalse);
}

TEST_CASE("predict(softmax(logits)) matches argmax of the logits") {
    Rng rng(55);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix logits = rand_uniform(rng, 4, 3, -6.0, 6.0);
        const std::vector<Label> via_probs = predict(softmax_rows(logits));
        const std::vector<Label> via_logits = predict(logits);
        CHECK(via_probs == via_logits);
    }
}

TEST_CASE("train-mode dropout: zero fraction near the rate, inverted scaling") {
    Hyper h = tiny_hyper();
    h.dropout = 0.3;
    h.embed_dim = 4;
    const Vocabulary vocab = testutil::synthetic_vocab(12);
    ModelParams params = init_params(h, vocab, std::nullopt, 4);
    // make embeddings distinctive so mask effects are visible
    for (std::size_t r = 1; r < params.embedding.matrix.rows(); ++r) {
        for (std::size_t c = 0; c < 4; ++c) params.embedding.matrix(r, c) = 1.0;
    }

    TrainData data;
    EncodedSequence seq;
    seq.ids.assign(5, 2);
    seq.true_length = 5;
    data.sequences.push_back(seq);

    Rng rng(808);
    std::size_t zeros = 0, draws = 0;
    bool scaling_ok = true;
    // 28 mask coordinates per forward (5 steps x 4 dims + 8 dense units)
    for (int rep = 0; rep < 3600; ++rep) {
        ForwardResult fr = forward(data.sequences, params, h, Mode::train, rng);
        for (const auto& sc : fr.cache.sequences) {
            auto tally = [&](double m) {
                ++draws;
                if (m == 0.0) {
                    ++zeros;
                } else if (std::abs(m - 1.0 / 0.7) > 1e-12) {
                    scaling_ok = false;
                }
            };
            for (const Matrix& mask : sc.emb_mask) {
                for (double m : mask.data()) tally(m);
            }
            for (double m : sc.dense_mask.data()) tally(m);
        }
    }
    CHECK(scaling_ok);
    CHECK(draws >= 100000);
    const double fraction = static_cast<double>(zeros) / static_cast<double>(draws);
    CHECK(std::abs(fraction - 0.3) <= 0.02);
}
