#include "enrichbench/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "enrichbench/errors.hpp"

namespace enrichbench {

namespace {

// Uniform in [-scale, scale), splitmix64 stream.
class InitStream {
public:
    explicit InitStream(std::uint64_t seed) : state_(seed) {}
    double next(double scale) {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * scale;
    }

private:
    std::uint64_t state_;
};

constexpr double kInitScale = 0.01;
constexpr int kMaxHalvings = 40;

}  // namespace

std::vector<LabeledVector> labeled(std::span<const EmbeddingVector> vectors, std::span<const std::string> labels) {
    if (vectors.size() != labels.size()) throw std::invalid_argument("vectors and labels differ in length");
    std::vector<LabeledVector> out;
    out.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) out.push_back({vectors[i].values, labels[i]});
    return out;
}

LinearClassifier::LinearClassifier(std::vector<std::string> label_set, std::size_t dim)
    : label_set_(std::move(label_set)), dim_(dim), weights_(label_set_.size() * dim, 0.0), bias_(label_set_.size(), 0.0) {}

std::size_t LinearClassifier::predict_index(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionMismatch(dim_, x.size());
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t k = 0; k < label_set_.size(); ++k) {
        double s = bias_[k];
        const double* row = weights_.data() + k * dim_;
        for (std::size_t d = 0; d < dim_; ++d) s += row[d] * x[d];
        if (k == 0 || s > best_score) {
            best = k;
            best_score = s;
        }
    }
    return best;
}

const std::string& LinearClassifier::predict(std::span<const double> x) const {
    return label_set_[predict_index(x)];
}

LossAndGradient softmax_loss_and_gradient(const LinearClassifier& model,
                                          std::span<const std::vector<double>> features,
                                          std::span<const std::size_t> labels, double l2) {
    if (features.size() != labels.size() || features.empty()) {
        throw std::invalid_argument("features and labels must be non-empty and equal in length");
    }
    const std::size_t K = model.num_labels();
    const std::size_t D = model.dim();
    const auto& W = model.weights();
    const auto& b = model.bias();

    LossAndGradient out;
    out.grad_weights.assign(K * D, 0.0);
    out.grad_bias.assign(K, 0.0);
    std::vector<double> logits(K);
    const double inv_n = 1.0 / static_cast<double>(features.size());

    for (std::size_t i = 0; i < features.size(); ++i) {
        const auto& x = features[i];
        if (x.size() != D) throw DimensionMismatch(D, x.size());
        if (labels[i] >= K) throw std::invalid_argument("label index out of range");
        double max_logit = -INFINITY;
        for (std::size_t k = 0; k < K; ++k) {
            double s = b[k];
            const double* row = W.data() + k * D;
            for (std::size_t d = 0; d < D; ++d) s += row[d] * x[d];
            logits[k] = s;
            max_logit = std::max(max_logit, s);
        }
        double z = 0.0;
        for (std::size_t k = 0; k < K; ++k) z += std::exp(logits[k] - max_logit);
        const double log_z = max_logit + std::log(z);
        out.loss += (log_z - logits[labels[i]]) * inv_n;
        for (std::size_t k = 0; k < K; ++k) {
            const double p = std::exp(logits[k] - log_z);
            const double coeff = (p - (k == labels[i] ? 1.0 : 0.0)) * inv_n;
            out.grad_bias[k] += coeff;
            double* grow = out.grad_weights.data() + k * D;
            for (std::size_t d = 0; d < D; ++d) grow[d] += coeff * x[d];
        }
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < W.size(); ++j) {
        sq += W[j] * W[j];
        out.grad_weights[j] += l2 * W[j];
    }
    out.loss += 0.5 * l2 * sq;
    return out;
}

LinearClassifier fit_classifier(std::span<const LabeledVector> train, const ClassifierHyper& hyper) {
    if (train.empty()) throw std::invalid_argument("fit_classifier needs training data");
    if (!(hyper.learning_rate > 0.0) || hyper.epochs < 0 || !(hyper.l2 >= 0.0)) {
        throw std::invalid_argument("invalid classifier hyperparameters");
    }
    const std::size_t dim = train.front().features.size();
    std::set<std::string> distinct;
    for (const auto& ex : train) {
        if (ex.features.size() != dim) throw DimensionMismatch(dim, ex.features.size());
        distinct.insert(ex.label);
    }
    if (distinct.size() < 2) throw SingleLabel("classifier needs at least two distinct labels");

    LinearClassifier model({distinct.begin(), distinct.end()}, dim);
    std::map<std::string, std::size_t> index_of;
    for (std::size_t k = 0; k < model.num_labels(); ++k) index_of[model.label_set()[k]] = k;

    std::vector<std::vector<double>> features;
    std::vector<std::size_t> labels;
    features.reserve(train.size());
    labels.reserve(train.size());
    for (const auto& ex : train) {
        features.push_back(ex.features);
        labels.push_back(index_of.at(ex.label));
    }

    InitStream init(hyper.seed);
    for (auto& w : model.weights()) w = init.next(kInitScale);

    auto current = softmax_loss_and_gradient(model, features, labels, hyper.l2);
    model.loss_history.push_back(current.loss);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        const auto W0 = model.weights();
        const auto b0 = model.bias();
        double step = hyper.learning_rate;
        bool accepted = false;
        for (int h = 0; h <= kMaxHalvings && !accepted; ++h, step *= 0.5) {
            for (std::size_t j = 0; j < W0.size(); ++j) model.weights()[j] = W0[j] - step * current.grad_weights[j];
            for (std::size_t k = 0; k < b0.size(); ++k) model.bias()[k] = b0[k] - step * current.grad_bias[k];
            auto next = softmax_loss_and_gradient(model, features, labels, hyper.l2);
            if (next.loss <= current.loss) {
                current = std::move(next);
                accepted = true;
            }
        }
        if (!accepted) {
            model.weights() = W0;
            model.bias() = b0;
        }
        model.loss_history.push_back(current.loss);
    }
    return model;
}

double accuracy(const LinearClassifier& model, std::span<const LabeledVector> test) {
    if (test.empty()) throw std::invalid_argument("accuracy needs at least one test example");
    std::size_t correct = 0;
    for (const auto& ex : test) {
        if (model.predict(ex.features) == ex.label) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace enrichbench
