#pragma once

#include <span>
#include <string>

namespace enrichbench {

struct ScoredPair {
    std::string pair_id;
    double score = 0.0;  // cosine similarity; finite
    int gold = 0;        // 0 or 1
};

// Non-interpolated average precision: rank by descending score and average
// precision@k over the ranks k that hold a positive. Equal scores keep their
// input order (AP is tie-sensitive, so this is part of the contract).
//
// Throws DegenerateLabels unless there is at least one positive and one
// negative; std::invalid_argument for a non-finite score or non-binary gold.
double average_precision(std::span<const ScoredPair> scored);

}  // namespace enrichbench
