#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enrichbench/vector_math.hpp"

namespace enrichbench {

struct LabeledVector {
    std::vector<double> features;
    std::string label;
};

std::vector<LabeledVector> labeled(std::span<const EmbeddingVector> vectors, std::span<const std::string> labels);

struct ClassifierHyper {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

// Multinomial logistic regression: scores = W x + b, softmax over labels.
class LinearClassifier {
public:
    LinearClassifier(std::vector<std::string> label_set, std::size_t dim);

    std::size_t num_labels() const noexcept { return label_set_.size(); }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<std::string>& label_set() const noexcept { return label_set_; }

    // Row-major num_labels x dim.
    std::vector<double>& weights() noexcept { return weights_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    std::vector<double>& bias() noexcept { return bias_; }
    const std::vector<double>& bias() const noexcept { return bias_; }

    // Index into label_set of the highest score; ties go to the earlier
    // label. Throws DimensionMismatch.
    std::size_t predict_index(std::span<const double> x) const;
    const std::string& predict(std::span<const double> x) const;

    // Per-epoch mean training objective recorded by fit_classifier,
    // starting with the objective at initialization.
    std::vector<double> loss_history;

private:
    std::vector<std::string> label_set_;
    std::size_t dim_;
    std::vector<double> weights_;
    std::vector<double> bias_;
};

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> grad_weights;  // same layout as weights()
    std::vector<double> grad_bias;
};

// Mean softmax cross-entropy over the examples plus (l2 / 2) * |W|^2 (the
// bias is not regularized), with its exact gradient. Labels are indices
// into the model's label_set.
LossAndGradient softmax_loss_and_gradient(const LinearClassifier& model,
                                          std::span<const std::vector<double>> features,
                                          std::span<const std::size_t> labels, double l2);

// Deterministic full-batch gradient descent from seed-initialized weights.
// label_set is the sorted distinct training labels. Each epoch takes one
// step of size learning_rate, halving it for that epoch while the step would
// raise the objective, so loss_history never increases.
// Throws SingleLabel (< 2 distinct labels), DimensionMismatch,
// std::invalid_argument (empty input or bad hyperparameters).
LinearClassifier fit_classifier(std::span<const LabeledVector> train, const ClassifierHyper& hyper = {});

// 100 * fraction of correct argmax predictions. Labels absent from the
// model's label_set count as wrong. Throws DimensionMismatch,
// std::invalid_argument for an empty test set.
double accuracy(const LinearClassifier& model, std::span<const LabeledVector> test);

}  // namespace enrichbench
