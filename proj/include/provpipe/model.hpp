#pragma once

#include <span>
#include <vector>

#include "provpipe/encoding.hpp"

namespace provpipe {

/// Weights and bias of the binary classifier (logistic regression).
struct ModelParams {
    std::vector<double> weights;
    double bias = 0.0;

    bool operator==(const ModelParams&) const = default;
};

struct TrainConfig {
    double learning_rate = 0.1;  // > 0
    std::size_t epochs = 1;      // >= 1
    double l2 = 0.0;             // lambda >= 0

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

struct UnlearnConfig {
    double tau = 0.0;  // finite, >= 0; 0 makes every update the identity

    void validate() const;
};

/// Mean regularized log-loss: probabilities are clamped to
/// [1e-12, 1 - 1e-12] before the logs, plus (l2/2)*||w||^2.
double logistic_loss(const ModelParams& params, const FeatureMatrix& features,
                     std::span<const double> labels, double l2);

struct Gradient {
    std::vector<double> weights;
    double bias = 0.0;
};

/// Mean over rows of (sigma(w.x+b) - y)*x plus l2*w; bias gradient is the
/// mean residual. Rows are accumulated sequentially (the reference order).
Gradient logistic_gradient(const ModelParams& params, const FeatureMatrix& features,
                           std::span<const double> labels, double l2);

/// Full-batch gradient descent from zero initialization; deterministic.
/// Throws ValidationError naming the epoch if parameters become non-finite.
ModelParams train_logistic(const FeatureMatrix& features, std::span<const double> labels,
                           const TrainConfig& cfg);

/// First-order unlearning update for replaced training rows:
///   theta' = theta - tau * sum_i( grad l(new_i) - grad l(old_i) )
/// with unregularized per-example log-loss gradients, summed (not averaged)
/// over the affected rows. The labels are shared positionally by old and new
/// rows. When new_rows == old_rows bitwise, the result is theta bitwise.
ModelParams unlearn_first_order(const ModelParams& params, const FeatureMatrix& old_rows,
                                const FeatureMatrix& new_rows, std::span<const double> labels,
                                const UnlearnConfig& cfg);

/// Deletion form (the new-rows-empty case):
///   theta' = theta + tau * sum_i grad l(removed_i)
ModelParams unlearn_delete(const ModelParams& params, const FeatureMatrix& removed_rows,
                           std::span<const double> removed_labels, const UnlearnConfig& cfg);

}  // namespace provpipe
