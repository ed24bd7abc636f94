#include "selfi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace selfi {

namespace {

[[noreturn]] void throw_shape_error(const char* op, const Matrix& a, const Vector& x) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch: Matrix[" +
                                std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                "] vs Vector[" + std::to_string(x.size()) + "]");
}

}  // namespace

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols != x.size()) throw_shape_error("matvec", a, x);
    Vector out(a.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* row = a.data.data() + i * a.cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
    return out;
}

Vector affine(const Matrix& w, const Vector& b, const Vector& x) {
    if (w.cols != x.size()) throw_shape_error("affine", w, x);
    if (w.rows != b.size()) throw_shape_error("affine (bias)", w, b);
    Vector out = matvec(w, x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Vector relu(const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double cross_entropy(const Vector& logits, int label) {
    if (label != 0 && label != 1) {
        throw std::invalid_argument("cross_entropy: label must be 0 or 1, got " +
                                    std::to_string(label));
    }
    if (logits.size() != 2) {
        throw std::invalid_argument("cross_entropy: expected 2 logits, got " +
                                    std::to_string(logits.size()));
    }
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    return lse - logits[static_cast<std::size_t>(label)];
}

Vector softmax2(const Vector& logits) {
    const double m = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - m);
    const double e1 = std::exp(logits[1] - m);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
}

double fake_probability(const Vector& logits) {
    return softmax2(logits)[1];
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("dot: length mismatch: " + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

Vector concat(const Vector& a, const Vector& b) {
    Vector out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace selfi
