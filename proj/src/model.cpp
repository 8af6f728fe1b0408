#include "provpipe/model.hpp"

#include <cmath>

#include "provpipe/errors.hpp"

namespace provpipe {

namespace {

constexpr double kProbFloor = 1e-12;

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

double dot_plus_bias(const ModelParams& params, std::span<const double> x) {
    double z = params.bias;
    for (std::size_t d = 0; d < x.size(); ++d) {
        z += params.weights[d] * x[d];
    }
    return z;
}

void check_shapes(const ModelParams& params, const FeatureMatrix& features,
                  std::span<const double> labels) {
    if (params.weights.size() != features.n_dims()) {
        throw ValidationError("weight vector length does not match feature dimensions");
    }
    if (labels.size() != features.n_rows()) {
        throw ValidationError("label count does not match feature rows");
    }
}

bool all_finite(const ModelParams& params) {
    if (!std::isfinite(params.bias)) return false;
    for (double w : params.weights) {
        if (!std::isfinite(w)) return false;
    }
    return true;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("learning_rate must be positive and finite");
    }
    if (epochs < 1) {
        throw ValidationError("epochs must be >= 1");
    }
    if (!(l2 >= 0.0) || !std::isfinite(l2)) {
        throw ValidationError("l2 must be >= 0 and finite");
    }
}

void UnlearnConfig::validate() const {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ValidationError("tau must be >= 0 and finite");
    }
}

double logistic_loss(const ModelParams& params, const FeatureMatrix& features,
                     std::span<const double> labels, double l2) {
    check_shapes(params, features, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < features.n_rows(); ++i) {
        double p = sigmoid(dot_plus_bias(params, features.row(i)));
        p = std::min(std::max(p, kProbFloor), 1.0 - kProbFloor);
        total += -(labels[i] * std::log(p) + (1.0 - labels[i]) * std::log(1.0 - p));
    }
    double loss = total / static_cast<double>(features.n_rows());
    double reg = 0.0;
    for (double w : params.weights) reg += w * w;
    return loss + 0.5 * l2 * reg;
}

Gradient logistic_gradient(const ModelParams& params, const FeatureMatrix& features,
                           std::span<const double> labels, double l2) {
    check_shapes(params, features, labels);
    Gradient grad;
    grad.weights.assign(features.n_dims(), 0.0);
    for (std::size_t i = 0; i < features.n_rows(); ++i) {
        std::span<const double> x = features.row(i);
        double residual = sigmoid(dot_plus_bias(params, x)) - labels[i];
        for (std::size_t d = 0; d < x.size(); ++d) {
            grad.weights[d] += residual * x[d];
        }
        grad.bias += residual;
    }
    double inv_n = 1.0 / static_cast<double>(features.n_rows());
    for (std::size_t d = 0; d < grad.weights.size(); ++d) {
        grad.weights[d] = grad.weights[d] * inv_n + l2 * params.weights[d];
    }
    grad.bias *= inv_n;
    return grad;
}

ModelParams train_logistic(const FeatureMatrix& features, std::span<const double> labels,
                           const TrainConfig& cfg) {
    cfg.validate();
    if (features.n_rows() < 1) {
        throw ValidationError("cannot train on an empty matrix");
    }
    ModelParams params;
    params.weights.assign(features.n_dims(), 0.0);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        Gradient grad = logistic_gradient(params, features, labels, cfg.l2);
        for (std::size_t d = 0; d < params.weights.size(); ++d) {
            params.weights[d] -= cfg.learning_rate * grad.weights[d];
        }
        params.bias -= cfg.learning_rate * grad.bias;
        if (!all_finite(params)) {
            throw ValidationError("training diverged at epoch " + std::to_string(epoch));
        }
    }
    return params;
}

namespace {

/// Per-example unregularized gradient contribution, added into acc with the
/// given sign.
void accumulate_example(const ModelParams& params, std::span<const double> x, double label,
                        double sign, Gradient& acc) {
    double residual = sigmoid(dot_plus_bias(params, x)) - label;
    for (std::size_t d = 0; d < x.size(); ++d) {
        acc.weights[d] += sign * residual * x[d];
    }
    acc.bias += sign * residual;
}

ModelParams apply_step(const ModelParams& params, const Gradient& step, double tau) {
    ModelParams out = params;
    for (std::size_t d = 0; d < out.weights.size(); ++d) {
        out.weights[d] -= tau * step.weights[d];
    }
    out.bias -= tau * step.bias;
    if (!all_finite(out)) {
        throw ValidationError("unlearning produced non-finite parameters");
    }
    return out;
}

}  // namespace

ModelParams unlearn_first_order(const ModelParams& params, const FeatureMatrix& old_rows,
                                const FeatureMatrix& new_rows, std::span<const double> labels,
                                const UnlearnConfig& cfg) {
    cfg.validate();
    if (old_rows.n_rows() != new_rows.n_rows() || old_rows.n_dims() != new_rows.n_dims()) {
        throw ValidationError("old and new row blocks must have equal shape");
    }
    if (labels.size() != old_rows.n_rows()) {
        throw ValidationError("label count does not match affected rows");
    }
    if (old_rows.n_dims() != params.weights.size()) {
        throw ValidationError("row width does not match weight vector");
    }
    if (cfg.tau == 0.0) return params;

    Gradient step;
    step.weights.assign(params.weights.size(), 0.0);
    // Per-example difference so identical old/new rows cancel exactly.
    for (std::size_t i = 0; i < old_rows.n_rows(); ++i) {
        accumulate_example(params, new_rows.row(i), labels[i], +1.0, step);
        accumulate_example(params, old_rows.row(i), labels[i], -1.0, step);
    }
    return apply_step(params, step, cfg.tau);
}

ModelParams unlearn_delete(const ModelParams& params, const FeatureMatrix& removed_rows,
                           std::span<const double> removed_labels, const UnlearnConfig& cfg) {
    cfg.validate();
    if (removed_rows.n_rows() < 1) {
        throw ValidationError("unlearn_delete requires at least one removed row");
    }
    if (removed_labels.size() != removed_rows.n_rows()) {
        throw ValidationError("label count does not match removed rows");
    }
    if (removed_rows.n_dims() != params.weights.size()) {
        throw ValidationError("row width does not match weight vector");
    }
    if (cfg.tau == 0.0) return params;

    Gradient step;
    step.weights.assign(params.weights.size(), 0.0);
    for (std::size_t i = 0; i < removed_rows.n_rows(); ++i) {
        accumulate_example(params, removed_rows.row(i), removed_labels[i], -1.0, step);
    }
    return apply_step(params, step, cfg.tau);
}

}  // namespace provpipe
