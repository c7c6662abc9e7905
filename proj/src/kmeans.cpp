#include "roadqa/kmeans.hpp"

#include <cmath>
#include <limits>

#include "roadqa/errors.hpp"
#include "roadqa/qa_io.hpp"
#include "roadqa/rng.hpp"

namespace roadqa {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

Point to_point(const EmbeddingVector& v) {
    const auto values = v.values();
    return Point(values.begin(), values.end());
}

int nearest_centroid(std::span<const double> point, const std::vector<Point>& centroids) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        if (centroids[c].size() != point.size()) throw ValidationError("centroid dimension mismatch");
        const double d = squared_distance(point, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

int nearest_centroid(const EmbeddingVector& v, const std::vector<Point>& centroids) {
    const Point p = to_point(v);
    return nearest_centroid(p, centroids);
}

namespace {

std::vector<Point> kmeans_plus_plus(const std::vector<Point>& points, int k, Rng& rng) {
    const std::size_t n = points.size();
    std::vector<Point> centroids;
    centroids.push_back(points[rng.uniform_index(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);

    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double d : d2) total += d;
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            // Every point coincides with a chosen centroid.
            pick = rng.uniform_index(n);
        }
        centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
    }
    return centroids;
}

}  // namespace

KMeansResult kmeans_fit(const std::vector<Point>& points, int k, std::uint64_t seed, KMeansOptions options) {
    const std::size_t n = points.size();
    if (k <= 0 || static_cast<std::size_t>(k) > n) {
        throw ValidationError("k must be in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim || dim == 0) throw ValidationError("points must share a positive dimension");
    }

    Rng rng(seed);
    KMeansResult result;
    result.model.k = k;
    auto& centroids = result.model.centroids;
    centroids = kmeans_plus_plus(points, k, rng);
    result.assignments.assign(n, 0);

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) result.assignments[i] = nearest_centroid(points[i], centroids);

        std::vector<Point> sums(static_cast<std::size_t>(k), Point(dim, 0.0));
        std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(result.assignments[i]);
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
        }

        double max_shift = 0.0;
        for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
            Point next(dim);
            if (counts[c] == 0) {
                // Empty cluster: move it onto the point farthest from its centroid.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(result.assignments[i])]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                next = points[far];
            } else {
                for (std::size_t d = 0; d < dim; ++d) next[d] = sums[c][d] / static_cast<double>(counts[c]);
            }
            max_shift = std::max(max_shift, std::sqrt(squared_distance(next, centroids[c])));
            centroids[c] = std::move(next);
        }
        result.iterations = iter + 1;
        if (max_shift < options.tolerance) break;
    }

    result.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        result.assignments[i] = nearest_centroid(points[i], centroids);
        result.inertia += squared_distance(points[i], centroids[static_cast<std::size_t>(result.assignments[i])]);
    }
    return result;
}

KMeansResult kmeans_fit(std::span<const EmbeddingVector> vectors, int k, std::uint64_t seed, KMeansOptions options) {
    std::vector<Point> points;
    points.reserve(vectors.size());
    for (const auto& v : vectors) points.push_back(to_point(v));
    if (points.empty()) throw ValidationError("cannot cluster an empty set");
    return kmeans_fit(points, k, seed, options);
}

std::map<int, ActionClass> load_label_map(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 1, e.what());
    }
    if (!j.is_object()) throw ConfigError(path.string() + ": label map must be a JSON object");
    std::map<int, ActionClass> out;
    for (const auto& [key, value] : j.items()) {
        int id = 0;
        try {
            std::size_t used = 0;
            id = std::stoi(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw ConfigError(path.string() + ": cluster id \"" + key + "\" is not an integer");
        }
        if (!value.is_string()) throw ConfigError(path.string() + ": class for cluster " + key + " must be a string");
        try {
            out[id] = parse_action_class(value.get<std::string>());
        } catch (const ValidationError& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    return out;
}

}  // namespace roadqa
