#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roadqa {

inline constexpr double kUnitNormTolerance = 1e-6;

/// Unit-norm sentence/paragraph embedding. Construction enforces the norm, so
/// any instance can be fed straight into a dot-product cosine.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    /// Scales `values` to unit length. Throws ValidationError for an empty or
    /// all-zero input.
    static EmbeddingVector normalized(std::span<const double> values);
    static EmbeddingVector normalized(std::span<const float> values);

    /// Adopts `values` verbatim; throws ValidationError unless the norm is
    /// within `tolerance` of 1.
    static EmbeddingVector from_unit(std::vector<float> values, double tolerance = kUnitNormTolerance);

    std::size_t dim() const { return values_.size(); }
    std::span<const float> values() const { return values_; }
    double norm() const;

    bool operator==(const EmbeddingVector&) const = default;

private:
    explicit EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {}

    std::vector<float> values_;
};

/// Dot product of two unit vectors, clamped to [-1, 1]. Throws
/// ValidationError on a dimension mismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

}  // namespace roadqa
