#include "enrichbench/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "enrichbench/errors.hpp"

using namespace enrichbench;

namespace {

std::vector<ScoredPair> make(const std::vector<double>& scores, const std::vector<int>& gold) {
    std::vector<ScoredPair> out;
    for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({"p" + std::to_string(i), scores[i], gold[i]});
    return out;
}

// Rank of each item from pairwise comparisons (ties: earlier input first),
// then precision at every positive rank.
double oracle_ap(const std::vector<double>& s, const std::vector<int>& g) {
    const std::size_t n = s.size();
    std::vector<int> gold_at_rank(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rank = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++rank;
        }
        gold_at_rank[rank] = g[i];
    }
    double sum = 0;
    int positives = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (gold_at_rank[k] == 1) {
            ++positives;
            sum += static_cast<double>(positives) / static_cast<double>(k);
        }
    }
    return sum / positives;
}

}  // namespace

TEST_CASE("average precision examples") {
    CHECK(average_precision(make({.9, .8, .7}, {1, 1, 0})) == 1.0);
    CHECK(std::fabs(average_precision(make({.9, .8, .7, .6}, {1, 0, 1, 0})) - 0.8333333) < 1e-7);
    CHECK(std::fabs(oracle_ap({.9, .8, .7, .6}, {1, 0, 1, 0}) - (1.0 + 2.0 / 3.0) / 2.0) < 1e-15);
}

TEST_CASE("single positive at rank r gives 1/r over all orderings, N <= 6") {
    for (int n = 2; n <= 6; ++n) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        do {
            // Item 0 is the only positive; scores follow the permutation.
            std::vector<double> scores(n);
            std::vector<int> gold(n, 0);
            gold[0] = 1;
            for (int i = 0; i < n; ++i) scores[i] = static_cast<double>(n - order[i]);
            const double expected = 1.0 / (order[0] + 1);
            CHECK(std::fabs(average_precision(make(scores, gold)) - expected) < 1e-15);
            CHECK(std::fabs(oracle_ap(scores, gold) - expected) < 1e-15);
        } while (std::next_permutation(order.begin(), order.end()));
    }
}

TEST_CASE("all positives ranked last hits the analytic worst case") {
    for (int n = 2; n <= 8; ++n) {
        for (int p = 1; p < n; ++p) {
            std::vector<double> scores(n);
            std::vector<int> gold(n, 0);
            for (int i = 0; i < n; ++i) {
                scores[i] = n - i;
                gold[i] = i >= n - p ? 1 : 0;
            }
            double worst = 0;
            for (int i = 1; i <= p; ++i) worst += static_cast<double>(i) / (n - p + i);
            worst /= p;
            CHECK(std::fabs(average_precision(make(scores, gold)) - worst) < 1e-12);
            CHECK(std::fabs(oracle_ap(scores, gold) - worst) < 1e-12);
        }
    }
}

TEST_CASE("ties keep input order") {
    CHECK(average_precision(make({.5, .5}, {1, 0})) == 1.0);
    CHECK(average_precision(make({.5, .5}, {0, 1})) == 0.5);
}

TEST_CASE("random balanced scores give AP near the positive rate") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> scores(1000);
    std::vector<int> gold(1000);
    for (int i = 0; i < 1000; ++i) {
        scores[i] = u(rng);
        gold[i] = i % 2;
    }
    const double ap100 = 100.0 * average_precision(make(scores, gold));
    CHECK(ap100 > 45.0);
    CHECK(ap100 < 55.0);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(average_precision(make({.1, .2}, {1, 1})), DegenerateLabels);
    CHECK_THROWS_AS(average_precision(make({.1, .2}, {0, 0})), DegenerateLabels);
    CHECK_THROWS_AS(average_precision(std::vector<ScoredPair>{}), DegenerateLabels);
    CHECK_THROWS_AS(average_precision(make({NAN, .2}, {1, 0})), std::invalid_argument);
    CHECK_THROWS_AS(average_precision(make({.1, .2}, {1, 2})), std::invalid_argument);
}
