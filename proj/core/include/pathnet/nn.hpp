#pragma once

#include <functional>
#include <vector>

#include "pathnet/matrix.hpp"

namespace pathnet {

/// out[i,j] = sum_k x[i,k] * w[k,j] + bias[0,j]
Matrix affine(const Matrix& x, const Matrix& w, const Matrix& bias);

Matrix relu(const Matrix& x);

/// Row-wise softmax with max-subtraction.
Matrix softmax(const Matrix& logits);

struct LossGrad {
    double loss = 0.0;         // mean over the batch, >= 0
    Matrix grad_logits;        // d loss / d logits, same shape as logits
    std::size_t correct = 0;   // rows where argmax(logits) == label
};

/// Mean softmax cross-entropy over the batch plus its gradient w.r.t. the
/// logits. Labels are class indices in [0, C). Probabilities are clamped
/// at 1e-300 before the log.
LossGrad softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels);

/// params - lr * grads, applied only where mask is nonzero (everywhere if
/// mask is null). Masked-off entries keep their exact bit pattern.
Matrix sgd_step(const Matrix& params, const Matrix& grads, double lr,
                const Matrix* mask = nullptr);
void sgd_step_inplace(Matrix& params, const Matrix& grads, double lr,
                      const Matrix* mask = nullptr);

/// Central-difference gradient of a scalar function, one entry at a time.
/// Test oracle for every analytic gradient in the library.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double h);

std::vector<int> argmax_rows(const Matrix& m);

}  // namespace pathnet
