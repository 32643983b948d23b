#include "newsforge/model.hpp"

#include <cmath>

namespace newsforge {

const std::array<const char*, kNumGates> kGateNames = {"i", "f", "o", "g"};

std::vector<std::pair<std::string, Matrix*>> tensor_refs(ModelParams& p) {
    std::vector<std::pair<std::string, Matrix*>> refs;
    refs.reserve(2 + 3 * kNumGates * 2 + 4);
    refs.emplace_back("embedding", &p.embedding.matrix);
    const std::array<std::pair<const char*, LstmDirectionParams*>, 2> dirs = {
        std::make_pair("fwd", &p.fwd), std::make_pair("bwd", &p.bwd)};
    for (const auto& [dir_name, dir] : dirs) {
        for (int g = 0; g < kNumGates; ++g) {
            const std::string base = std::string(dir_name) + ".";
            refs.emplace_back(base + "W_" + kGateNames[g], &dir->w_in[g]);
            refs.emplace_back(base + "U_" + kGateNames[g], &dir->u_rec[g]);
            refs.emplace_back(base + "b_" + kGateNames[g], &dir->bias[g]);
        }
    }
    refs.emplace_back("dense.W", &p.dense_w);
    refs.emplace_back("dense.b", &p.dense_b);
    refs.emplace_back("out.W", &p.out_w);
    refs.emplace_back("out.b", &p.out_b);
    return refs;
}

std::vector<std::pair<std::string, const Matrix*>> tensor_refs(const ModelParams& p) {
    auto mutable_refs = tensor_refs(const_cast<ModelParams&>(p));
    std::vector<std::pair<std::string, const Matrix*>> refs;
    refs.reserve(mutable_refs.size());
    for (auto& [name, m] : mutable_refs) refs.emplace_back(name, m);
    return refs;
}

namespace {

Matrix glorot(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return rand_uniform(rng, fan_in, fan_out, -limit, limit);
}

} // namespace

namespace {

void validate_hyper(const Hyper& hyper) {
    if (hyper.classes != static_cast<std::size_t>(kNumClasses)) {
        throw ShapeMismatchError("the classifier is fixed at 3 output classes");
    }
    if (!(hyper.dropout >= 0.0 && hyper.dropout < 1.0)) {
        throw BadRangeError("dropout rate must lie in [0,1), got " +
                            std::to_string(hyper.dropout));
    }
    if (hyper.hidden < 1 || hyper.dense < 1 || hyper.embed_dim < 1 || hyper.max_len < 1) {
        throw BadRangeError("hidden, dense, embed_dim and max_len must all be positive");
    }
}

} // namespace

ModelParams init_params(const Hyper& hyper, const Vocabulary& vocab,
                        const std::optional<EmbeddingTable>& pretrained, std::uint64_t seed) {
    validate_hyper(hyper);
    Rng rng(seed);
    ModelParams p;
    if (pretrained.has_value()) {
        if (pretrained->matrix.rows() != vocab.size() ||
            pretrained->matrix.cols() != hyper.embed_dim) {
            throw ShapeMismatchError(
                "pretrained embedding is " + std::to_string(pretrained->matrix.rows()) + "x" +
                std::to_string(pretrained->matrix.cols()) + ", expected " +
                std::to_string(vocab.size()) + "x" + std::to_string(hyper.embed_dim));
        }
        p.embedding = *pretrained;
    } else {
        p.embedding.matrix = Matrix(vocab.size(), hyper.embed_dim);
        p.embedding.trainable = true;
        for (std::size_t r = 1; r < vocab.size(); ++r) {
            for (std::size_t c = 0; c < hyper.embed_dim; ++c) {
                p.embedding.matrix(r, c) = rng.uniform(-0.05, 0.05);
            }
        }
    }
    for (std::size_t c = 0; c < hyper.embed_dim; ++c) p.embedding.matrix(kPadId, c) = 0.0;

    const std::size_t d = hyper.embed_dim;
    const std::size_t h = hyper.hidden;
    for (LstmDirectionParams* dir : {&p.fwd, &p.bwd}) {
        for (int g = 0; g < kNumGates; ++g) {
            dir->w_in[g] = glorot(rng, d, h);
            dir->u_rec[g] = glorot(rng, h, h);
            dir->bias[g] = Matrix(1, h);
        }
        dir->bias[kGateForget].fill(1.0);
    }
    p.dense_w = glorot(rng, 2 * h, hyper.dense);
    p.dense_b = Matrix(1, hyper.dense);
    p.out_w = glorot(rng, hyper.dense, hyper.classes);
    p.out_b = Matrix(1, hyper.classes);
    return p;
}

void validate_params(const ModelParams& params, const Hyper& hyper) {
    validate_hyper(hyper);
    const std::size_t d = hyper.embed_dim;
    const std::size_t h = hyper.hidden;
    auto expect = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
        if (m.rows() != r || m.cols() != c) {
            throw ShapeMismatchError(std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                                     std::to_string(m.cols()) + ", expected " + std::to_string(r) +
                                     "x" + std::to_string(c));
        }
    };
    if (params.embedding.matrix.cols() != d) {
        throw ShapeMismatchError("embedding has dim " +
                                 std::to_string(params.embedding.matrix.cols()) + ", expected " +
                                 std::to_string(d));
    }
    for (const LstmDirectionParams* dir : {&params.fwd, &params.bwd}) {
        for (int g = 0; g < kNumGates; ++g) {
            expect(dir->w_in[g], d, h, "W");
            expect(dir->u_rec[g], h, h, "U");
            expect(dir->bias[g], 1, h, "b");
        }
    }
    expect(params.dense_w, 2 * h, hyper.dense, "dense.W");
    expect(params.dense_b, 1, hyper.dense, "dense.b");
    expect(params.out_w, hyper.dense, hyper.classes, "out.W");
    expect(params.out_b, 1, hyper.classes, "out.b");
}

LstmStepState lstm_cell(const Matrix& x_t, const Matrix& h_prev, const Matrix& c_prev,
                        const LstmDirectionParams& p) {
    const std::size_t h = h_prev.cols();
    std::array<Matrix, kNumGates> pre;
    Matrix scratch;
    for (int g = 0; g < kNumGates; ++g) {
        matmul_into(x_t, p.w_in[g], pre[g]);
        matmul_into(h_prev, p.u_rec[g], scratch);
        ew_into(EwOp::add, pre[g], scratch, pre[g]);
        ew_into(EwOp::add, pre[g], p.bias[g], pre[g]);
    }
    LstmStepState s;
    map_into(MapOp::sigmoid, pre[kGateInput], s.gate_i);
    map_into(MapOp::sigmoid, pre[kGateForget], s.gate_f);
    map_into(MapOp::sigmoid, pre[kGateOutput], s.gate_o);
    map_into(MapOp::tanh, pre[kGateCandidate], s.gate_g);

    s.cell = Matrix(1, h);
    s.hidden = Matrix(1, h);
    for (std::size_t k = 0; k < h; ++k) {
        s.cell(0, k) = s.gate_f(0, k) * c_prev(0, k) + s.gate_i(0, k) * s.gate_g(0, k);
        s.hidden(0, k) = s.gate_o(0, k) * std::tanh(s.cell(0, k));
    }
    return s;
}

namespace {

Matrix dropout_mask(Rng& rng, std::size_t n, double rate) {
    Matrix mask(1, n);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) {
        mask(0, i) = rng.next_double() < rate ? 0.0 : keep_scale;
    }
    return mask;
}

} // namespace

ForwardResult forward(const std::vector<EncodedSequence>& batch, const ModelParams& params,
                      const Hyper& hyper, Mode mode, Rng& rng) {
    validate_params(params, hyper);
    if (batch.empty()) throw ShapeMismatchError("forward got an empty batch");

    const std::size_t h = hyper.hidden;
    const std::size_t d = hyper.embed_dim;
    const bool use_dropout = mode == Mode::train && hyper.dropout > 0.0;

    ForwardResult result;
    result.logits = Matrix(batch.size(), hyper.classes);
    result.cache.hyper = hyper;
    result.cache.mode = mode;
    result.cache.sequences.resize(batch.size());

    const Matrix zero_state(1, h);
    Matrix scratch;

    for (std::size_t b = 0; b < batch.size(); ++b) {
        const EncodedSequence& seq = batch[b];
        if (seq.true_length == 0) {
            throw EmptySequenceInBatchError("sequence " + std::to_string(b) +
                                            " has true_length 0");
        }
        if (seq.true_length > seq.ids.size()) {
            throw ShapeMismatchError("true_length exceeds the id array");
        }
        SequenceCache& sc = result.cache.sequences[b];
        const std::size_t len = seq.true_length;
        sc.ids.assign(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(len));
        sc.x.resize(len);
        if (use_dropout) sc.emb_mask.resize(len);

        for (std::size_t t = 0; t < len; ++t) {
            const int id = sc.ids[t];
            if (id < 0 || static_cast<std::size_t>(id) >= params.embedding.matrix.rows()) {
                throw ShapeMismatchError("token id " + std::to_string(id) +
                                         " outside the embedding table");
            }
            Matrix x(1, d);
            const double* row = params.embedding.matrix.row_ptr(static_cast<std::size_t>(id));
            for (std::size_t c = 0; c < d; ++c) x(0, c) = row[c];
            if (use_dropout) {
                sc.emb_mask[t] = dropout_mask(rng, d, hyper.dropout);
                ew_into(EwOp::mul, x, sc.emb_mask[t], x);
            }
            sc.x[t] = std::move(x);
        }

        sc.fwd_steps.resize(len);
        {
            const Matrix* h_prev = &zero_state;
            const Matrix* c_prev = &zero_state;
            for (std::size_t t = 0; t < len; ++t) {
                sc.fwd_steps[t] = lstm_cell(sc.x[t], *h_prev, *c_prev, params.fwd);
                h_prev = &sc.fwd_steps[t].hidden;
                c_prev = &sc.fwd_steps[t].cell;
            }
        }
        sc.bwd_steps.resize(len);
        {
            const Matrix* h_prev = &zero_state;
            const Matrix* c_prev = &zero_state;
            for (std::size_t ti = len; ti-- > 0;) {
                sc.bwd_steps[ti] = lstm_cell(sc.x[ti], *h_prev, *c_prev, params.bwd);
                h_prev = &sc.bwd_steps[ti].hidden;
                c_prev = &sc.bwd_steps[ti].cell;
            }
        }

        sc.rep = Matrix(1, 2 * h);
        if (hyper.pooling == Pooling::final_state) {
            for (std::size_t k = 0; k < h; ++k) {
                sc.rep(0, k) = sc.fwd_steps[len - 1].hidden(0, k);
                sc.rep(0, h + k) = sc.bwd_steps[0].hidden(0, k);
            }
        } else {
            const double inv_len = 1.0 / static_cast<double>(len);
            for (std::size_t t = 0; t < len; ++t) {
                for (std::size_t k = 0; k < h; ++k) {
                    sc.rep(0, k) += sc.fwd_steps[t].hidden(0, k) * inv_len;
                    sc.rep(0, h + k) += sc.bwd_steps[t].hidden(0, k) * inv_len;
                }
            }
        }

        matmul_into(sc.rep, params.dense_w, sc.z1);
        ew_into(EwOp::add, sc.z1, params.dense_b, sc.z1);
        Matrix a1 = map(MapOp::relu, sc.z1);
        if (use_dropout) {
            sc.dense_mask = dropout_mask(rng, hyper.dense, hyper.dropout);
            ew_into(EwOp::mul, a1, sc.dense_mask, a1);
        }
        sc.a1_used = std::move(a1);

        matmul_into(sc.a1_used, params.out_w, scratch);
        ew_into(EwOp::add, scratch, params.out_b, scratch);
        for (std::size_t j = 0; j < hyper.classes; ++j) result.logits(b, j) = scratch(0, j);
    }

    result.probs = softmax_rows(result.logits);
    return result;
}

namespace {

Grads zero_like(const ModelParams& params) {
    Grads g;
    g.embedding.matrix = Matrix(params.embedding.matrix.rows(), params.embedding.matrix.cols());
    g.embedding.trainable = params.embedding.trainable;
    for (int dir = 0; dir < 2; ++dir) {
        const LstmDirectionParams& src = dir == 0 ? params.fwd : params.bwd;
        LstmDirectionParams& dst = dir == 0 ? g.fwd : g.bwd;
        for (int gate = 0; gate < kNumGates; ++gate) {
            dst.w_in[gate] = Matrix(src.w_in[gate].rows(), src.w_in[gate].cols());
            dst.u_rec[gate] = Matrix(src.u_rec[gate].rows(), src.u_rec[gate].cols());
            dst.bias[gate] = Matrix(src.bias[gate].rows(), src.bias[gate].cols());
        }
    }
    g.dense_w = Matrix(params.dense_w.rows(), params.dense_w.cols());
    g.dense_b = Matrix(params.dense_b.rows(), params.dense_b.cols());
    g.out_w = Matrix(params.out_w.rows(), params.out_w.cols());
    g.out_b = Matrix(params.out_b.rows(), params.out_b.cols());
    return g;
}

// out[r][c] += a[r] * b[c] for row vectors a (1xR) and b (1xC)
void accumulate_outer(const Matrix& a, const Matrix& b, Matrix& out) {
    for (std::size_t r = 0; r < out.rows(); ++r) {
        const double av = a(0, r);
        if (av == 0.0) continue;
        double* orow = out.row_ptr(r);
        const double* bv = b.row_ptr(0);
        for (std::size_t c = 0; c < out.cols(); ++c) orow[c] += av * bv[c];
    }
}

// out[r] += sum_c m[r][c] * vec[c]   (out += vec . M^T for row vectors)
void accumulate_mat_vecT(const Matrix& m, const Matrix& vec, Matrix& out) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* mrow = m.row_ptr(r);
        const double* v = vec.row_ptr(0);
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols(); ++c) acc += mrow[c] * v[c];
        out(0, r) += acc;
    }
}

// Backpropagation through one direction's unrolled steps. `steps` are cached
// by position; `forward_dir` tells which end the recurrence started from.
// dh_in holds the per-position incoming hidden-state gradients.
void bptt_direction(const std::vector<LstmStepState>& steps, const std::vector<Matrix>& x,
                    std::vector<Matrix>& dx, const std::vector<Matrix>& dh_in,
                    const LstmDirectionParams& p, LstmDirectionParams& grad, bool forward_dir) {
    const std::size_t len = steps.size();
    const std::size_t h = steps[0].hidden.cols();
    Matrix dh_carry(1, h), dc_carry(1, h);
    Matrix da(1, h);
    const Matrix zero_state(1, h);

    for (std::size_t n = 0; n < len; ++n) {
        // position processed (len-1-n)-th from the end of this direction's run
        const std::size_t t = forward_dir ? len - 1 - n : n;
        const LstmStepState& s = steps[t];
        const bool has_prev = forward_dir ? t > 0 : t + 1 < len;
        const LstmStepState* prev = nullptr;
        if (has_prev) prev = forward_dir ? &steps[t - 1] : &steps[t + 1];
        const Matrix& h_prev = prev ? prev->hidden : zero_state;
        const Matrix& c_prev = prev ? prev->cell : zero_state;

        Matrix dh = dh_carry;
        if (!dh_in[t].empty()) ew_into(EwOp::add, dh, dh_in[t], dh);
        Matrix dc = dc_carry;

        // o = sigmoid, h = o * tanh(c)
        for (std::size_t k = 0; k < h; ++k) {
            const double tc = std::tanh(s.cell(0, k));
            const double o = s.gate_o(0, k);
            da(0, k) = dh(0, k) * tc * o * (1.0 - o);
            dc(0, k) += dh(0, k) * o * (1.0 - tc * tc);
        }
        accumulate_outer(x[t], da, grad.w_in[kGateOutput]);
        accumulate_outer(h_prev, da, grad.u_rec[kGateOutput]);
        ew_into(EwOp::add, grad.bias[kGateOutput], da, grad.bias[kGateOutput]);
        accumulate_mat_vecT(p.w_in[kGateOutput], da, dx[t]);
        Matrix dh_next(1, h);
        accumulate_mat_vecT(p.u_rec[kGateOutput], da, dh_next);

        // f, i, g through c = f*c_prev + i*g
        struct GateRole {
            int gate;
            bool is_tanh;
        };
        const GateRole roles[3] = {{kGateForget, false}, {kGateInput, false},
                                   {kGateCandidate, true}};
        for (const GateRole& role : roles) {
            for (std::size_t k = 0; k < h; ++k) {
                double upstream;
                if (role.gate == kGateForget) {
                    upstream = dc(0, k) * c_prev(0, k);
                } else if (role.gate == kGateInput) {
                    upstream = dc(0, k) * s.gate_g(0, k);
                } else {
                    upstream = dc(0, k) * s.gate_i(0, k);
                }
                if (role.is_tanh) {
                    const double g = s.gate_g(0, k);
                    da(0, k) = upstream * (1.0 - g * g);
                } else {
                    const double a = role.gate == kGateForget ? s.gate_f(0, k) : s.gate_i(0, k);
                    da(0, k) = upstream * a * (1.0 - a);
                }
            }
            accumulate_outer(x[t], da, grad.w_in[role.gate]);
            accumulate_outer(h_prev, da, grad.u_rec[role.gate]);
            ew_into(EwOp::add, grad.bias[role.gate], da, grad.bias[role.gate]);
            accumulate_mat_vecT(p.w_in[role.gate], da, dx[t]);
            accumulate_mat_vecT(p.u_rec[role.gate], da, dh_next);
        }

        dh_carry = std::move(dh_next);
        for (std::size_t k = 0; k < h; ++k) dc_carry(0, k) = dc(0, k) * s.gate_f(0, k);
    }
}

} // namespace

Grads backward(ForwardCache& cache, const Matrix& grad_logits, const ModelParams& params,
               const Hyper& hyper) {
    if (cache.consumed) throw CacheMismatchError("forward cache already consumed");
    if (grad_logits.rows() != cache.sequences.size() || grad_logits.cols() != hyper.classes) {
        throw CacheMismatchError("grad_logits is " + std::to_string(grad_logits.rows()) + "x" +
                                 std::to_string(grad_logits.cols()) + " but the cache holds " +
                                 std::to_string(cache.sequences.size()) + " sequences");
    }
    if (cache.hyper.hidden != hyper.hidden || cache.hyper.dense != hyper.dense ||
        cache.hyper.embed_dim != hyper.embed_dim || cache.hyper.pooling != hyper.pooling) {
        throw CacheMismatchError("cache was built under a different hyper configuration");
    }
    cache.consumed = true;
    validate_params(params, hyper);

    const std::size_t h = hyper.hidden;
    const bool use_dropout = cache.mode == Mode::train && hyper.dropout > 0.0;
    Grads grads = zero_like(params);

    for (std::size_t b = 0; b < cache.sequences.size(); ++b) {
        SequenceCache& sc = cache.sequences[b];
        const std::size_t len = sc.ids.size();

        Matrix dlogits(1, hyper.classes);
        for (std::size_t j = 0; j < hyper.classes; ++j) dlogits(0, j) = grad_logits(b, j);

        // output layer
        accumulate_outer(sc.a1_used, dlogits, grads.out_w);
        ew_into(EwOp::add, grads.out_b, dlogits, grads.out_b);
        Matrix da1(1, hyper.dense);
        accumulate_mat_vecT(params.out_w, dlogits, da1);

        // dense dropout + relu
        if (use_dropout) ew_into(EwOp::mul, da1, sc.dense_mask, da1);
        for (std::size_t j = 0; j < hyper.dense; ++j) {
            if (sc.z1(0, j) <= 0.0) da1(0, j) = 0.0;
        }

        accumulate_outer(sc.rep, da1, grads.dense_w);
        ew_into(EwOp::add, grads.dense_b, da1, grads.dense_b);
        Matrix drep(1, 2 * h);
        accumulate_mat_vecT(params.dense_w, da1, drep);

        // distribute the representation gradient onto the two directions
        std::vector<Matrix> dh_fwd(len), dh_bwd(len);
        if (hyper.pooling == Pooling::final_state) {
            dh_fwd[len - 1] = Matrix(1, h);
            dh_bwd[0] = Matrix(1, h);
            for (std::size_t k = 0; k < h; ++k) {
                dh_fwd[len - 1](0, k) = drep(0, k);
                dh_bwd[0](0, k) = drep(0, h + k);
            }
        } else {
            const double inv_len = 1.0 / static_cast<double>(len);
            for (std::size_t t = 0; t < len; ++t) {
                dh_fwd[t] = Matrix(1, h);
                dh_bwd[t] = Matrix(1, h);
                for (std::size_t k = 0; k < h; ++k) {
                    dh_fwd[t](0, k) = drep(0, k) * inv_len;
                    dh_bwd[t](0, k) = drep(0, h + k) * inv_len;
                }
            }
        }

        std::vector<Matrix> dx(len);
        for (std::size_t t = 0; t < len; ++t) dx[t] = Matrix(1, hyper.embed_dim);

        bptt_direction(sc.fwd_steps, sc.x, dx, dh_fwd, params.fwd, grads.fwd, true);
        bptt_direction(sc.bwd_steps, sc.x, dx, dh_bwd, params.bwd, grads.bwd, false);

        // embedding rows (through the embedding dropout mask)
        for (std::size_t t = 0; t < len; ++t) {
            const int id = sc.ids[t];
            if (use_dropout) ew_into(EwOp::mul, dx[t], sc.emb_mask[t], dx[t]);
            double* grow = grads.embedding.matrix.row_ptr(static_cast<std::size_t>(id));
            for (std::size_t c = 0; c < hyper.embed_dim; ++c) grow[c] += dx[t](0, c);
        }
    }

    for (std::size_t c = 0; c < hyper.embed_dim; ++c) grads.embedding.matrix(kPadId, c) = 0.0;
    return grads;
}

std::vector<Label> predict(const Matrix& probs) {
    std::vector<Label> out;
    out.reserve(probs.rows());
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.cols(); ++c) {
            if (probs(r, c) > probs(r, best)) best = c;
        }
        out.push_back(static_cast<Label>(best));
    }
    return out;
}

} // namespace newsforge
