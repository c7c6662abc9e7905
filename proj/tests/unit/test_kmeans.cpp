#include <fstream>
#include <set>

#include "doctest.h"
#include "roadqa/backend.hpp"
#include "roadqa/errors.hpp"
#include "roadqa/kmeans.hpp"
#include "roadqa/rng.hpp"
#include "test_support.hpp"

using namespace roadqa;
using namespace roadqa::testing;

namespace {

struct PlantedBlobs {
    std::vector<EmbeddingVector> vectors;
    std::vector<int> truth;
};

// Two tight blobs of unit vectors around orthogonal centers.
PlantedBlobs planted_blobs(std::size_t per_blob, std::uint64_t seed) {
    Rng rng(seed);
    PlantedBlobs out;
    for (int blob = 0; blob < 2; ++blob) {
        for (std::size_t i = 0; i < per_blob; ++i) {
            std::vector<double> v(16, 0.0);
            v[static_cast<std::size_t>(blob)] = 1.0;
            for (auto& x : v) x += 0.03 * rng.normal();
            out.vectors.push_back(EmbeddingVector::normalized(std::span<const double>(v)));
            out.truth.push_back(blob);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("k = 1 centroid is the arithmetic mean") {
    HashBackend backend(32, 0);
    const auto vectors = backend.embed({"a", "b", "c", "d", "e"});
    const auto fit = kmeans_fit(std::span<const EmbeddingVector>(vectors), 1, 0);
    REQUIRE(fit.model.centroids.size() == 1);
    for (std::size_t d = 0; d < 32; ++d) {
        double mean = 0.0;
        for (const auto& v : vectors) mean += v.values()[d];
        mean /= 5.0;
        CHECK(std::abs(fit.model.centroids[0][d] - mean) <= 1e-9);
    }
}

TEST_CASE("planted two-blob partition is recovered") {
    const auto blobs = planted_blobs(6, 17);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto fit = kmeans_fit(std::span<const EmbeddingVector>(blobs.vectors), 2, seed);
        // same partition up to label permutation
        const int flip = fit.assignments[0] == blobs.truth[0] ? 0 : 1;
        for (std::size_t i = 0; i < blobs.truth.size(); ++i) CHECK(fit.assignments[i] == (blobs.truth[i] ^ flip));
    }
}

TEST_CASE("k = n puts every point in its own cluster") {
    HashBackend backend(8, 1);
    const auto vectors = backend.embed({"p", "q", "r", "s", "t", "u"});
    const auto fit = kmeans_fit(std::span<const EmbeddingVector>(vectors), 6, 3);
    std::set<int> clusters(fit.assignments.begin(), fit.assignments.end());
    CHECK(clusters.size() == 6);
    CHECK(fit.inertia == doctest::Approx(0.0));
}

TEST_CASE("property: every point's centroid is its nearest, and fits are seed-deterministic") {
    HashBackend backend(12, 2);
    std::vector<std::string> texts;
    for (int i = 0; i < 60; ++i) texts.push_back("sentence " + std::to_string(i));
    const auto vectors = backend.embed(texts);
    for (int k : {2, 3, 5, 8}) {
        const auto fit = kmeans_fit(std::span<const EmbeddingVector>(vectors), k, 11);
        CHECK(fit.model.centroids.size() == static_cast<std::size_t>(k));
        CHECK(fit.iterations <= 100);
        for (std::size_t i = 0; i < vectors.size(); ++i) {
            const Point p = to_point(vectors[i]);
            const double own = squared_distance(p, fit.model.centroids[static_cast<std::size_t>(fit.assignments[i])]);
            for (const auto& c : fit.model.centroids) CHECK(own <= squared_distance(p, c));
        }
        const auto again = kmeans_fit(std::span<const EmbeddingVector>(vectors), k, 11);
        CHECK(again.assignments == fit.assignments);
        CHECK(again.model.centroids == fit.model.centroids);
    }
}

TEST_CASE("k outside [1, n] is rejected") {
    HashBackend backend(8, 1);
    const auto vectors = backend.embed({"a", "b", "c"});
    CHECK_THROWS_AS(kmeans_fit(std::span<const EmbeddingVector>(vectors), 0, 0), ValidationError);
    CHECK_THROWS_AS(kmeans_fit(std::span<const EmbeddingVector>(vectors), 4, 0), ValidationError);
}

TEST_CASE("label maps load from JSON") {
    TempDir dir;
    {
        std::ofstream out(dir / "labels.json");
        out << R"({"0":"accelerate","1":"slow","2":"stop","3":"merge","4":"turn"})";
    }
    const auto map = load_label_map(dir / "labels.json");
    CHECK(map.size() == 5);
    CHECK(map.at(3) == ActionClass::Merge);
    {
        std::ofstream out(dir / "bad.json");
        out << R"({"0":"reverse"})";
    }
    CHECK_THROWS_AS(load_label_map(dir / "bad.json"), ConfigError);
}
