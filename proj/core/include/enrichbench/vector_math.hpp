#pragma once

#include <span>
#include <string>
#include <vector>

#include "enrichbench/hash.hpp"

namespace enrichbench {

// A provider-produced embedding. dim() is values.size(); every value is finite.
struct EmbeddingVector {
    std::vector<double> values;
    std::string provider_id;
    std::string model_id;
    Digest source_hash;  // sha256 of the exact embedded text

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const EmbeddingVector&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

// dot(a,b) / sqrt(|a|^2 |b|^2), clamped to [-1, 1]. Symmetric bit-for-bit,
// and exactly 1.0 for cosine(v, v).
// Throws DimensionMismatch for unequal lengths, ZeroVector for a zero input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Throws ZeroVector.
std::vector<double> l2_normalize(std::span<const double> v);
EmbeddingVector l2_normalize(const EmbeddingVector& v);

}  // namespace enrichbench
