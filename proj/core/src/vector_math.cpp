#include "enrichbench/vector_math.hpp"

#include <algorithm>
#include <cmath>

#include "enrichbench/errors.hpp"

namespace enrichbench {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Power-of-two rescale so squared norms stay in the normal range; exact.
std::vector<double> rescaled(std::span<const double> v, double largest) {
    const int shift = -std::ilogb(largest);
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x = std::ldexp(x, shift);
    return out;
}

double cosine_unchecked(std::span<const double> a, std::span<const double> b) {
    const double aa = dot(a, a);
    const double bb = dot(b, b);
    // sqrt(aa * bb) rather than sqrt(aa) * sqrt(bb): sqrt(x*x) == x exactly,
    // which makes self-similarity exactly 1.
    return std::clamp(dot(a, b) / std::sqrt(aa * bb), -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    const double ma = max_abs(a);
    const double mb = max_abs(b);
    if (ma == 0.0 || mb == 0.0) throw ZeroVector();
    const double aa = dot(a, a);
    const double bb = dot(b, b);
    if (std::isnormal(aa) && std::isnormal(bb) && std::isnormal(aa * bb)) {
        return cosine_unchecked(a, b);
    }
    return cosine_unchecked(rescaled(a, ma), rescaled(b, mb));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

std::vector<double> l2_normalize(std::span<const double> v) {
    const double norm = l2_norm(v);
    if (norm == 0.0) throw ZeroVector();
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x /= norm;
    return out;
}

EmbeddingVector l2_normalize(const EmbeddingVector& v) {
    EmbeddingVector out = v;
    out.values = l2_normalize(std::span<const double>(v.values));
    return out;
}

}  // namespace enrichbench
