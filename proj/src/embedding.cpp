#include "roadqa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roadqa/errors.hpp"

namespace roadqa {

namespace {

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> values, std::vector<float>& out) {
    if (values.empty()) throw ValidationError("cannot normalize an empty vector");
    double sq = 0.0;
    for (T v : values) sq += static_cast<double>(v) * static_cast<double>(v);
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("cannot normalize a zero or non-finite vector");
    out.reserve(values.size());
    for (T v : values) out.push_back(static_cast<float>(static_cast<double>(v) / norm));
    return EmbeddingVector::from_unit(std::move(out));
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::span<const double> values) {
    std::vector<float> out;
    return normalize_impl(values, out);
}

EmbeddingVector EmbeddingVector::normalized(std::span<const float> values) {
    std::vector<float> out;
    return normalize_impl(values, out);
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<float> values, double tolerance) {
    EmbeddingVector v(std::move(values));
    if (v.dim() == 0) throw ValidationError("embedding has dimension 0");
    const double n = v.norm();
    if (!(std::abs(n - 1.0) <= tolerance)) {
        throw ValidationError("embedding norm " + std::to_string(n) + " is not 1");
    }
    return v;
}

double EmbeddingVector::norm() const {
    double sq = 0.0;
    for (float x : values_) sq += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(sq);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dim() != v.dim()) {
        throw ValidationError("cosine of vectors with dimensions " + std::to_string(u.dim()) + " and " +
                              std::to_string(v.dim()));
    }
    const auto a = u.values();
    const auto b = v.values();
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return std::clamp(dot, -1.0, 1.0);
}

}  // namespace roadqa
