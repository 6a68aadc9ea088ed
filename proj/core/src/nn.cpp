#include "pathnet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathnet {

Matrix affine(const Matrix& x, const Matrix& w, const Matrix& bias) {
    if (x.cols() != w.rows()) {
        throw ShapeError("affine: input " + x.shape_str() + " does not conform with weights " +
                         w.shape_str());
    }
    if (bias.rows() != 1 || bias.cols() != w.cols()) {
        throw ShapeError("affine: bias " + bias.shape_str() + " does not conform with weights " +
                         w.shape_str());
    }
    Matrix out(x.rows(), w.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double* orow = out.row_ptr(i);
        const double* brow = bias.row_ptr(0);
        for (std::size_t j = 0; j < w.cols(); ++j) orow[j] = brow[j];
        const double* xrow = x.row_ptr(i);
        for (std::size_t k = 0; k < x.cols(); ++k) {
            const double xv = xrow[k];
            const double* wrow = w.row_ptr(k);
            for (std::size_t j = 0; j < w.cols(); ++j) orow[j] += xv * wrow[j];
        }
    }
    return out;
}

Matrix relu(const Matrix& x) {
    Matrix out = x;
    for (double& v : out.data()) v = std::max(0.0, v);
    return out;
}

Matrix softmax(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* row = logits.row_ptr(i);
        double* prow = p.row_ptr(i);
        double mx = row[0];
        for (std::size_t j = 1; j < logits.cols(); ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            prow[j] = std::exp(row[j] - mx);
            sum += prow[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) prow[j] /= sum;
    }
    return p;
}

LossGrad softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    if (logits.rows() == 0) throw std::invalid_argument("softmax_cross_entropy: empty batch");
    if (labels.size() != logits.rows()) {
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(logits.rows()) + " rows");
    }
    const std::size_t b = logits.rows();
    const std::size_t classes = logits.cols();
    for (std::size_t i = 0; i < b; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes) {
            throw std::invalid_argument("softmax_cross_entropy: label " +
                                        std::to_string(labels[i]) + " at row " +
                                        std::to_string(i) + " outside [0, " +
                                        std::to_string(classes) + ")");
        }
    }

    LossGrad out;
    out.grad_logits = softmax(logits);
    double total = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        double* prow = out.grad_logits.row_ptr(i);
        const std::size_t y = static_cast<std::size_t>(labels[i]);
        total += -std::log(std::max(prow[y], 1e-300));

        const double* lrow = logits.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < classes; ++j) {
            if (lrow[j] > lrow[best]) best = j;
        }
        if (best == y) ++out.correct;

        // p - onehot, scaled by 1/b to match the mean loss.
        prow[y] -= 1.0;
        for (std::size_t j = 0; j < classes; ++j) prow[j] /= static_cast<double>(b);
    }
    out.loss = total / static_cast<double>(b);
    return out;
}

void sgd_step_inplace(Matrix& params, const Matrix& grads, double lr, const Matrix* mask) {
    if (!params.same_shape(grads)) {
        throw ShapeError("sgd_step: params " + params.shape_str() + " vs grads " +
                         grads.shape_str());
    }
    if (mask && !params.same_shape(*mask)) {
        throw ShapeError("sgd_step: params " + params.shape_str() + " vs mask " +
                         mask->shape_str());
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (mask && mask->data()[i] == 0.0) continue;
        params.data()[i] -= lr * grads.data()[i];
    }
}

Matrix sgd_step(const Matrix& params, const Matrix& grads, double lr, const Matrix* mask) {
    Matrix out = params;
    sgd_step_inplace(out, grads, lr, mask);
    return out;
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
    Matrix grad(x.rows(), x.cols());
    Matrix probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = probe.data()[i];
        probe.data()[i] = orig + h;
        const double fp = f(probe);
        probe.data()[i] = orig - h;
        const double fm = f(probe);
        probe.data()[i] = orig;
        grad.data()[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* row = m.row_ptr(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < m.cols(); ++j) {
            if (row[j] > row[best]) best = j;
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

}  // namespace pathnet
