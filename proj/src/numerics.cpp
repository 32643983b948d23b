#include "newsforge/numerics.hpp"

#include <cmath>
#include <utility>

#include "json.hpp"

namespace newsforge {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

#ifndef NDEBUG
#define NEWSFORGE_CHECK_FINITE(m, where) check_finite(m, where)
#else
#define NEWSFORGE_CHECK_FINITE(m, where) ((void)0)
#endif

} // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeMismatchError("matrix data length " + std::to_string(data_.size()) +
                                 " does not match " + shape_str(*this));
    }
    check_finite(*this, "Matrix()");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::fill(double value) {
    for (double& x : data_) x = value;
}

void check_finite(const Matrix& m, const char* where) {
    for (double x : m.data()) {
        if (!std::isfinite(x)) {
            throw NonFiniteError(std::string("non-finite entry in ") + where);
        }
    }
}

void matmul_into(const Matrix& a, const Matrix& b, Matrix& out) {
    if (a.cols() != b.rows()) {
        throw ShapeMismatchError("matmul " + shape_str(a) + " x " + shape_str(b));
    }
    if (out.rows() != a.rows() || out.cols() != b.cols()) {
        out = Matrix(a.rows(), b.cols());
    } else {
        out.fill(0.0);
    }
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.row_ptr(i);
        double* orow = out.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b.row_ptr(p);
            for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    NEWSFORGE_CHECK_FINITE(out, "matmul");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix out;
    matmul_into(a, b, out);
    return out;
}

void ew_into(EwOp op, const Matrix& a, const Matrix& b, Matrix& out) {
    if (!a.same_shape(b)) {
        throw ShapeMismatchError("elementwise " + shape_str(a) + " vs " + shape_str(b));
    }
    if (!out.same_shape(a)) out = Matrix(a.rows(), a.cols());
    const std::size_t n = a.size();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    switch (op) {
        case EwOp::add:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
            break;
        case EwOp::sub:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
            break;
        case EwOp::mul:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
            break;
    }
    NEWSFORGE_CHECK_FINITE(out, "ew");
}

Matrix ew(EwOp op, const Matrix& a, const Matrix& b) {
    Matrix out;
    ew_into(op, a, b, out);
    return out;
}

double sigmoid(double x) {
    // Split on sign so exp never overflows.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void map_into(MapOp f, const Matrix& a, Matrix& out) {
    if (!out.same_shape(a)) out = Matrix(a.rows(), a.cols());
    const std::size_t n = a.size();
    const double* pa = a.data().data();
    double* po = out.data().data();
    switch (f) {
        case MapOp::sigmoid:
            for (std::size_t i = 0; i < n; ++i) po[i] = sigmoid(pa[i]);
            break;
        case MapOp::tanh:
            for (std::size_t i = 0; i < n; ++i) po[i] = std::tanh(pa[i]);
            break;
        case MapOp::relu:
            for (std::size_t i = 0; i < n; ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
            break;
    }
    NEWSFORGE_CHECK_FINITE(out, "map");
}

Matrix map(MapOp f, const Matrix& a) {
    Matrix out;
    map_into(f, a, out);
    return out;
}

Matrix softmax_rows(const Matrix& a) {
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* in = a.row_ptr(i);
        double* o = out.row_ptr(i);
        double mx = in[0];
        for (std::size_t j = 1; j < a.cols(); ++j) mx = std::max(mx, in[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) {
            o[j] = std::exp(in[j] - mx);
            sum += o[j];
        }
        for (std::size_t j = 0; j < a.cols(); ++j) o[j] /= sum;
    }
    NEWSFORGE_CHECK_FINITE(out, "softmax_rows");
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw BadRangeError("uniform requires lo < hi, got [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + ")");
    }
    return lo + next_double() * (hi - lo);
}

double Rng::normal(double mean, double stddev) {
    if (!(stddev > 0.0)) {
        throw BadRangeError("normal requires std > 0, got " + std::to_string(stddev));
    }
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
}

std::uint64_t Rng::bounded(std::uint64_t n) {
    if (n == 0) throw BadRangeError("bounded(0)");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

Matrix rand_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(lo, hi);
    return m;
}

Matrix rand_normal(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.normal(mean, stddev);
    return m;
}

std::string matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = m.data();
    return j.dump();
}

Matrix matrix_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

} // namespace newsforge
