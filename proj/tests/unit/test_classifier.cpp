#include "enrichbench/classifier.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "enrichbench/errors.hpp"

using namespace enrichbench;

namespace {

// Two clusters of radius 0.5 around (-5, 0) and (+5, 0).
std::vector<LabeledVector> clusters(std::uint64_t seed, int per_class) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), radius(0.0, 0.5);
    std::vector<LabeledVector> out;
    for (int i = 0; i < per_class; ++i) {
        for (const auto& [cx, label] : {std::pair{-5.0, std::string("left")}, std::pair{5.0, std::string("right")}}) {
            const double a = angle(rng), r = radius(rng);
            out.push_back({{cx + r * std::cos(a), r * std::sin(a)}, label});
        }
    }
    return out;
}

double loss_only(const LinearClassifier& m, const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                 double l2) {
    return softmax_loss_and_gradient(m, x, y, l2).loss;
}

}  // namespace

TEST_CASE("separated clusters are learned perfectly") {
    const auto train = clusters(1, 10);
    const auto test = clusters(2, 10);
    const auto model = fit_classifier(train);
    CHECK(model.label_set() == std::vector<std::string>{"left", "right"});
    CHECK(accuracy(model, train) == 100.0);
    CHECK(accuracy(model, test) == 100.0);
}

TEST_CASE("training loss never increases") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<LabeledVector> train;
    for (int i = 0; i < 60; ++i) train.push_back({{n(rng), n(rng), n(rng)}, std::to_string(i % 3)});
    ClassifierHyper h;
    h.learning_rate = 5.0;  // large enough that plain steps would overshoot
    h.epochs = 200;
    const auto model = fit_classifier(train, h);
    REQUIRE(model.loss_history.size() == 201);
    for (std::size_t i = 1; i < model.loss_history.size(); ++i) {
        CHECK(model.loss_history[i] <= model.loss_history[i - 1] + 1e-9);
    }
}

TEST_CASE("fitting is deterministic for a fixed seed") {
    const auto train = clusters(3, 5);
    const auto a = fit_classifier(train);
    const auto b = fit_classifier(train);
    CHECK(a.weights() == b.weights());
    CHECK(a.bias() == b.bias());
    ClassifierHyper h;
    h.seed = 1;
    CHECK(fit_classifier(train, h).weights() != a.weights());
}

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dim_d(1, 5), lab_d(2, 4), n_d(2, 12);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int instance = 0; instance < 50; ++instance) {
        const int dim = dim_d(rng), labels = lab_d(rng), count = n_d(rng);
        std::vector<std::string> label_set;
        for (int l = 0; l < labels; ++l) label_set.push_back("l" + std::to_string(l));
        LinearClassifier m(label_set, static_cast<std::size_t>(dim));
        for (auto& w : m.weights()) w = n(rng);
        for (auto& b : m.bias()) b = n(rng);
        std::vector<std::vector<double>> x(count, std::vector<double>(dim));
        std::vector<std::size_t> y(count);
        for (int i = 0; i < count; ++i) {
            for (auto& v : x[i]) v = n(rng);
            y[i] = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, labels - 1)(rng));
        }
        const double l2 = 0.01 * (instance % 3);
        const auto g = softmax_loss_and_gradient(m, x, y, l2);
        const double h = 1e-5;
        auto check = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = loss_only(m, x, y, l2);
            param = saved - h;
            const double down = loss_only(m, x, y, l2);
            param = saved;
            const double numeric = (up - down) / (2 * h);
            const double rel = std::fabs(analytic - numeric) / std::max({1e-8, std::fabs(analytic), std::fabs(numeric)});
            CHECK(rel < 1e-5);
        };
        for (std::size_t k = 0; k < m.weights().size(); ++k) check(m.weights()[k], g.grad_weights[k]);
        for (std::size_t k = 0; k < m.bias().size(); ++k) check(m.bias()[k], g.grad_bias[k]);
    }
}

TEST_CASE("accuracy rules") {
    LinearClassifier zero({"a", "b"}, 2);
    const std::vector<LabeledVector> balanced{{{1, 0}, "a"}, {{0, 1}, "b"}, {{2, 2}, "a"}, {{-1, 3}, "b"}};
    CHECK(accuracy(zero, balanced) == 50.0);
    CHECK(zero.predict(std::vector<double>{5, -5}) == "a");

    LinearClassifier oracle({"a", "b"}, 2);
    oracle.weights() = {1, 0, 0, 1};
    CHECK(accuracy(oracle, std::vector<LabeledVector>{{{1, 0}, "a"}, {{0, 1}, "b"}}) == 100.0);
    CHECK(accuracy(oracle, std::vector<LabeledVector>{{{1, 0}, "zzz"}}) == 0.0);
    CHECK_THROWS_AS(accuracy(oracle, std::vector<LabeledVector>{{{1, 0, 0}, "a"}}), DimensionMismatch);
    CHECK_THROWS_AS(accuracy(oracle, std::vector<LabeledVector>{}), std::invalid_argument);
}

TEST_CASE("accuracy is invariant to test order") {
    const auto model = fit_classifier(clusters(4, 6));
    auto test = clusters(5, 15);
    test.push_back({{0.1, 0.0}, "left"});
    test.push_back({{-0.1, 0.0}, "right"});
    const double base = accuracy(model, test);
    CHECK(base >= 0.0);
    CHECK(base <= 100.0);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(test.begin(), test.end(), rng);
        CHECK(accuracy(model, test) == base);
    }
}

TEST_CASE("fit errors") {
    CHECK_THROWS_AS(fit_classifier(std::vector<LabeledVector>{{{1, 2}, "a"}, {{2, 1}, "a"}}), SingleLabel);
    CHECK_THROWS_AS(fit_classifier(std::vector<LabeledVector>{{{1, 2}, "a"}, {{2}, "b"}}), DimensionMismatch);
    CHECK_THROWS_AS(fit_classifier(std::vector<LabeledVector>{}), std::invalid_argument);
    ClassifierHyper bad;
    bad.learning_rate = 0;
    CHECK_THROWS_AS(fit_classifier(clusters(1, 2), bad), std::invalid_argument);
}
