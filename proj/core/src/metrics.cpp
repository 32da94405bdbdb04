#include "enrichbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "enrichbench/errors.hpp"

namespace enrichbench {

double average_precision(std::span<const ScoredPair> scored) {
    std::size_t positives = 0;
    for (const auto& p : scored) {
        if (!std::isfinite(p.score)) throw std::invalid_argument("non-finite score for pair " + p.pair_id);
        if (p.gold != 0 && p.gold != 1) throw std::invalid_argument("gold label must be 0 or 1");
        positives += static_cast<std::size_t>(p.gold);
    }
    if (positives == 0 || positives == scored.size()) {
        throw DegenerateLabels("average precision needs at least one positive and one negative");
    }

    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });

    double sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (scored[order[rank]].gold == 1) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return sum / static_cast<double>(positives);
}

}  // namespace enrichbench
