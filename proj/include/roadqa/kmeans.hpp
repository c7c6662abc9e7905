#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "roadqa/embedding.hpp"
#include "roadqa/types.hpp"

namespace roadqa {

using Point = std::vector<double>;

struct ClusterModel {
    int k = 5;
    std::vector<Point> centroids;
    /// Human-authored cluster id → action class; may be empty until an
    /// annotator has inspected the clusters.
    std::map<int, ActionClass> label_map;
};

struct KMeansResult {
    ClusterModel model;
    std::vector<int> assignments;
    int iterations = 0;
    /// Sum of squared Euclidean distances to the assigned centroid.
    double inertia = 0.0;
};

struct KMeansOptions {
    int max_iterations = 100;
    double tolerance = 1e-4;  // max centroid shift (Euclidean) to stop
};

/// Lloyd's algorithm seeded with k-means++. Deterministic for a fixed seed.
/// Throws ValidationError unless 0 < k <= points.size() and all points share
/// one dimension.
KMeansResult kmeans_fit(const std::vector<Point>& points, int k, std::uint64_t seed,
                        KMeansOptions options = {});
KMeansResult kmeans_fit(std::span<const EmbeddingVector> vectors, int k, std::uint64_t seed,
                        KMeansOptions options = {});

/// Nearest centroid by Euclidean distance; the lowest id wins ties.
int nearest_centroid(std::span<const double> point, const std::vector<Point>& centroids);
int nearest_centroid(const EmbeddingVector& v, const std::vector<Point>& centroids);

double squared_distance(std::span<const double> a, std::span<const double> b);

Point to_point(const EmbeddingVector& v);

/// Reads {"<cluster id>": "<class name>", ...}.
std::map<int, ActionClass> load_label_map(const std::filesystem::path& path);

}  // namespace roadqa
