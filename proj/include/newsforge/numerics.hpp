#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "newsforge/errors.hpp"

namespace newsforge {

/// Dense row-major matrix of 64-bit reals. This is the only numeric
/// substrate the model and training code use; everything is a value type
/// and all operations are pure unless named *_into.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);  // zero-filled
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void fill(double value);
    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class EwOp { add, sub, mul };
enum class MapOp { sigmoid, tanh, relu };

Matrix matmul(const Matrix& a, const Matrix& b);
void matmul_into(const Matrix& a, const Matrix& b, Matrix& out);

Matrix ew(EwOp op, const Matrix& a, const Matrix& b);
void ew_into(EwOp op, const Matrix& a, const Matrix& b, Matrix& out);

Matrix map(MapOp f, const Matrix& a);
void map_into(MapOp f, const Matrix& a, Matrix& out);

/// Per-row softmax with max-subtraction; each output row sums to 1 within
/// 1e-12 and the result is invariant under adding a constant to a row.
Matrix softmax_rows(const Matrix& a);

Matrix transpose(const Matrix& a);

double sigmoid(double x);

/// Throws NonFinite if any entry is NaN or infinite. Called automatically
/// after each op in debug builds; cheap enough to call by hand elsewhere.
void check_finite(const Matrix& m, const char* where);

/// Seedable pseudo-random generator with a fixed cross-platform algorithm:
/// xoshiro256** (Blackman & Vigna), state expanded from the 64-bit seed with
/// splitmix64. Identical seeds give identical streams on every platform;
/// no std:: distribution machinery is used anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0,1), 53-bit mantissa.
    double next_double();

    /// Uniform in [lo,hi). Throws BadRange unless lo < hi.
    double uniform(double lo, double hi);

    /// Normal via Box-Muller on the raw stream. Throws BadRange unless std > 0.
    double normal(double mean, double stddev);

    /// Unbiased integer in [0,n) by rejection sampling.
    std::uint64_t bounded(std::uint64_t n);

    /// In-place Fisher-Yates shuffle, consuming the stream back-to-front.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

Matrix rand_uniform(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi);
Matrix rand_normal(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev);

/// {rows, cols, data:[...]} with full-precision decimal reals.
std::string matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const std::string& text);

} // namespace newsforge
