#pragma once

#include <cstddef>
#include <vector>

namespace selfi {

// All in-memory math is on 64-bit floats; file storage narrows to 32-bit
// (see dataio). Loop order is fixed so results are reproducible bit for bit.

using Vector = std::vector<double>;

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool empty() const { return data.empty(); }
    std::size_t size() const { return data.size(); }
};

/// y[i] = sum_j A[i,j] * x[j]. Throws std::invalid_argument naming both
/// shapes on mismatch.
Vector matvec(const Matrix& a, const Vector& x);

/// matvec(w, x) + b.
Vector affine(const Matrix& w, const Vector& b, const Vector& x);

/// Elementwise max(0, x).
Vector relu(const Vector& x);

/// 1 / (1 + exp(-z)), branch on the sign of z so neither exp overflows.
double sigmoid(double z);

/// -log softmax(logits)[label] for a 2-class head, via max-subtracted
/// log-sum-exp. label must be 0 or 1.
double cross_entropy(const Vector& logits, int label);

/// Stable two-class softmax.
Vector softmax2(const Vector& logits);

/// softmax(logits)[1]: the fake-class probability used as the score.
double fake_probability(const Vector& logits);

double dot(const Vector& a, const Vector& b);

/// [a ; b]
Vector concat(const Vector& a, const Vector& b);

}  // namespace selfi
