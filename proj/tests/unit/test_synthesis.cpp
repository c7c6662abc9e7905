#include <algorithm>
#include <set>

#include "doctest.h"
#include "roadqa/errors.hpp"
#include "roadqa/synthesis.hpp"
#include "test_support.hpp"

using namespace roadqa;
using namespace roadqa::testing;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::vector<EmbeddingVector> as_embeddings(const std::vector<std::vector<double>>& raw) {
    std::vector<EmbeddingVector> out;
    for (const auto& r : raw) out.push_back(EmbeddingVector::normalized(std::span<const double>(r)));
    return out;
}

// Five orthogonal pairs: cause i ↦ e_{2i}, effect i ↦ e_{2i+1} in 10 dimensions.
std::vector<CausalPair> orthogonal_pairs(const TempDir& dir) {
    std::vector<CausalPair> pairs;
    std::vector<Json> rows;
    for (std::size_t i = 0; i < 5; ++i) {
        CausalPair p{"p" + std::to_string(i), "Cause number " + std::to_string(i) + ".",
                     "Effect number " + std::to_string(i) + ".", "fixture"};
        rows.push_back(embed_row(p.cause, basis(10, 2 * i)));
        rows.push_back(embed_row(p.effect, basis(10, 2 * i + 1)));
        pairs.push_back(p);
    }
    write_jsonl(rows, dir / "orth.jsonl");
    return pairs;
}

}  // namespace

TEST_CASE("normalize_justification produces declarative sentences") {
    CHECK(normalize_justification("to turn left") == "The car wants to turn left.");
    CHECK(normalize_justification("because the light turns red") == "The light turns red.");
    CHECK(normalize_justification("The car stops.") == "The car stops.");
    CHECK(normalize_justification("  the car slows down ") == "The car slows down.");
    CHECK(normalize_justification("Because traffic is moving!") == "Traffic is moving!");
    CHECK(normalize_justification("tomorrow it rains") == "Tomorrow it rains.");
    CHECK_THROWS_AS(normalize_justification("   "), ValidationError);
    CHECK_THROWS_AS(normalize_justification("because "), ValidationError);
}

TEST_CASE("deduplicate_pairs drops later near-duplicate causes") {
    HashBackend backend(64, 1);
    const std::vector<CausalPair> pairs = {{"a", "The light turns red.", "The car stops.", ""},
                                           {"b", "The light turns red.", "The car slows.", ""},
                                           {"c", "The road is clear.", "The car accelerates.", ""}};
    const auto kept = deduplicate_pairs(pairs, 0.9, backend);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "a");
    CHECK(kept[1].id == "c");
}

TEST_CASE("deduplicate_pairs keeps mutually orthogonal causes") {
    TempDir dir;
    const auto pairs = orthogonal_pairs(dir);
    FixtureBackend backend(dir / "orth.jsonl");
    CHECK(deduplicate_pairs(pairs, 0.9, backend) == pairs);
}

TEST_CASE("deduplicate_pairs matches the exhaustive pairwise oracle on 20 fixture pairs") {
    // Four anchor directions with controlled perturbations: some pairs of
    // causes sit well above 0.9 similarity, the rest well below.
    TempDir dir;
    Rng rng(2024);
    std::vector<std::vector<double>> raw;
    std::vector<CausalPair> pairs;
    std::vector<Json> rows;
    for (std::size_t i = 0; i < 20; ++i) {
        std::vector<double> v(8, 0.0);
        v[i % 4] = 1.0;
        const double spread = (i % 3 == 0) ? 0.05 : 1.5;
        for (auto& x : v) x += spread * (rng.uniform01() - 0.5);
        v = unit(v);
        raw.push_back(v);
        CausalPair p{"d" + std::to_string(i), "Cause " + std::to_string(i) + ".", "Effect " + std::to_string(i) + ".", ""};
        rows.push_back(embed_row(p.cause, v));
        pairs.push_back(p);
    }
    write_jsonl(rows, dir / "dedup.jsonl");
    FixtureBackend backend(dir / "dedup.jsonl");
    const auto kept = deduplicate_pairs(pairs, 0.9, backend);

    // Oracle: the greedy output is the unique subset that (1) has no kept pair
    // above the threshold and (2) has, for every dropped pair, an earlier kept
    // pair above it.
    std::set<std::string> kept_ids;
    for (const auto& p : kept) kept_ids.insert(p.id);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t j = 0; j < 20; ++j) {
            if (i != j) REQUIRE(std::abs(dot(raw[i], raw[j]) - 0.9) > 1e-4);  // no borderline cases
        }
        const bool is_kept = kept_ids.count(pairs[i].id) > 0;
        bool covered = false;
        for (std::size_t j = 0; j < i; ++j) {
            if (kept_ids.count(pairs[j].id) && dot(raw[i], raw[j]) > 0.9) covered = true;
        }
        CHECK(is_kept == !covered);
        dropped += !is_kept;
    }
    CHECK(dropped > 0);
    CHECK(dropped < 20);
    // output order preserved
    CHECK(std::is_sorted(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return std::stoi(a.id.substr(1)) < std::stoi(b.id.substr(1));
    }));
}

TEST_CASE("sample_distractors fails when every pool entry is too close to the answer") {
    const auto answer = as_embeddings({{1.0, 0.0, 0.0}})[0];
    const auto pool = as_embeddings({{1.0, 0.2, 0.0}, {1.0, 0.0, 0.3}, {0.9, 0.5, 0.5}});
    for (const auto& p : pool) REQUIRE(cosine(answer, p) >= 0.4);
    SynthesisConfig config;
    Rng rng(1);
    CHECK_THROWS_AS(sample_distractor_indices(answer, pool, 2, config, rng), SamplingExhausted);
    CHECK_THROWS_AS(sample_distractor_indices(answer, pool, 4, config, rng), SamplingExhausted);
}

TEST_CASE("sample_distractors output satisfies both similarity constraints") {
    // Pool mixes orthogonal directions with entries close to the answer and
    // near-copies of each other; the oracle recomputes every cosine.
    std::vector<std::vector<double>> raw = {basis(6, 1), basis(6, 2), basis(6, 3), basis(6, 4), basis(6, 5),
                                            unit({0.9, 0.1, 0, 0, 0, 0}), unit({0, 0.95, 0.05, 0, 0, 0}),
                                            unit({0, 0, 0, 0.7, 0.7, 0})};
    const auto pool = as_embeddings(raw);
    const std::vector<double> answer_raw = basis(6, 0);
    const auto answer = as_embeddings({answer_raw})[0];
    SynthesisConfig config;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const auto picks = sample_distractor_indices(answer, pool, 2, config, rng);
        REQUIRE(picks.size() == 2);
        CHECK(picks[0] != picks[1]);
        for (std::size_t a : picks) {
            CHECK(dot(raw[a], answer_raw) < 0.4);
            for (std::size_t b : picks) {
                if (a != b) CHECK(dot(raw[a], raw[b]) < 0.4);
            }
        }
    }
}

TEST_CASE("sample_distractors is deterministic under a fixed seed") {
    HashBackend backend(64, 0);
    const std::vector<std::string> pool = {"The car stops.", "The car accelerates.", "The car merges left.",
                                           "The car turns right.", "The car parks.", "The car waits."};
    SynthesisConfig config;
    Rng a(7);
    Rng b(7);
    const auto first = sample_distractors("The car slows.", pool, 2, config, backend, a);
    CHECK(first == sample_distractors("The car slows.", pool, 2, config, backend, b));
    CHECK(first.size() == 2);
}

TEST_CASE("build_mcqa in EP mode over orthogonal fixture pairs") {
    TempDir dir;
    const auto pairs = orthogonal_pairs(dir);
    FixtureBackend backend(dir / "orth.jsonl");
    SynthesisConfig config;
    Rng rng(3);
    const auto result = build_mcqa(pairs, config, backend, rng);
    REQUIRE(result.items.size() == 5);
    CHECK(result.skipped_pair_ids.empty());
    std::set<std::string> effects;
    for (const auto& p : pairs) effects.insert(p.effect);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& item = result.items[i];
        CHECK(item.partition == Partition::BddEp);
        CHECK(item.question == pairs[i].cause);
        CHECK(item.answer() == pairs[i].effect);
        CHECK(item.metadata.at("pair_id") == pairs[i].id);
        std::set<std::string> unique(item.candidates.begin(), item.candidates.end());
        CHECK(unique.size() == 3);
        for (const auto& c : item.candidates) CHECK(effects.count(c));
        // oracle: one-hot vectors → a distinct text is exactly orthogonal
        for (const auto& c : item.candidates) {
            for (const auto& d : item.candidates) {
                if (c != d) CHECK(cosine(backend.embed_one(c), backend.embed_one(d)) < 0.4);
            }
        }
    }
}

TEST_CASE("build_mcqa in CP mode swaps question and answer sides") {
    TempDir dir;
    const auto pairs = orthogonal_pairs(dir);
    FixtureBackend backend(dir / "orth.jsonl");
    SynthesisConfig config;
    config.mode = SynthesisMode::CausePrediction;
    Rng rng(3);
    const auto result = build_mcqa(pairs, config, backend, rng);
    REQUIRE(result.items.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(result.items[i].partition == Partition::BddCp);
        CHECK(result.items[i].question == pairs[i].effect);
        CHECK(result.items[i].answer() == pairs[i].cause);
        CHECK(result.items[i].id == "cp-" + pairs[i].id);
    }
}

TEST_CASE("build_mcqa rejects pools smaller than the candidate count") {
    HashBackend backend(16, 0);
    const std::vector<CausalPair> pairs = {{"a", "C1.", "E1.", ""}, {"b", "C2.", "E2.", ""}};
    SynthesisConfig config;
    Rng rng(0);
    CHECK_THROWS_AS(build_mcqa(pairs, config, backend, rng), ConfigError);
    config.num_candidates = 4;
    CHECK_THROWS_AS(build_mcqa(pairs, config, backend, rng), ConfigError);
}

TEST_CASE("build_mcqa skips items whose sampling is exhausted") {
    // Every effect is the same text, so no admissible distractors exist.
    HashBackend backend(32, 0);
    std::vector<CausalPair> pairs;
    for (int i = 0; i < 4; ++i) pairs.push_back({"s" + std::to_string(i), "Cause " + std::to_string(i) + ".", "The car stops.", ""});
    SynthesisConfig config;
    config.max_resample_attempts = 5;
    Rng rng(0);
    const auto result = build_mcqa(pairs, config, backend, rng);
    CHECK(result.items.empty());
    CHECK(result.skipped_pair_ids.size() == 4);
}

TEST_CASE("synthesis config invariants") {
    SynthesisConfig c;
    CHECK_NOTHROW(validate(c));
    c.distractor_upper_bound = 0.95;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.num_candidates = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.dedup_threshold = 1.5;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("synthesize output is byte-identical across runs") {
    HashBackend backend(128, 0);
    const auto pairs = load_pairs_file(data_dir() / "bdd_pairs_50.jsonl");
    SynthesisConfig config;
    config.rng_seed = 7;
    const auto a = synthesize(pairs, config, backend);
    const auto b = synthesize(pairs, config, backend);
    REQUIRE(a.synthesis.items == b.synthesis.items);
    TempDir dir;
    write_qa_file(a.synthesis.items, dir / "a.jsonl");
    write_qa_file(b.synthesis.items, dir / "b.jsonl");
    CHECK(read_text_file(dir / "a.jsonl") == read_text_file(dir / "b.jsonl"));
    config.rng_seed = 8;
    CHECK_FALSE(synthesize(pairs, config, backend).synthesis.items == a.synthesis.items);
}

TEST_CASE("classify_actions maps effects to the nearest centroid's class") {
    TempDir dir;
    // Five class exemplars on orthogonal axes; the merge row sentence shares
    // the merge axis with a small tilt.
    const std::vector<std::string> exemplars = {"The car accelerates", "The car slows slightly", "The car stops",
                                                "The car is moving to the left lane", "The car turns left and drives forward"};
    std::vector<Json> rows;
    std::vector<std::vector<double>> raw;
    for (std::size_t i = 0; i < 5; ++i) {
        raw.push_back(basis(5, i));
        rows.push_back(embed_row(exemplars[i], raw.back()));
    }
    const auto merge_example = unit({0.1, 0.0, 0.2, 0.95, 0.1});
    rows.push_back(embed_row("The car merges into the lane to its left", merge_example));
    Rng rng(5);
    std::vector<std::string> extra;
    std::vector<std::vector<double>> extra_raw;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> v(5);
        for (auto& x : v) x = rng.normal();
        v = unit(v);
        extra.push_back("random effect " + std::to_string(i));
        extra_raw.push_back(v);
        rows.push_back(embed_row(extra.back(), v));
    }
    write_jsonl(rows, dir / "cls.jsonl");
    FixtureBackend backend(dir / "cls.jsonl");

    ClusterModel model;
    model.k = 5;
    for (const auto& r : raw) model.centroids.push_back(r);
    model.label_map = {{0, ActionClass::Accelerate}, {1, ActionClass::Slow}, {2, ActionClass::Stop},
                       {3, ActionClass::Merge}, {4, ActionClass::Turn}};

    const auto self = classify_actions(exemplars, model, backend);
    CHECK(self == std::vector<ActionClass>{ActionClass::Accelerate, ActionClass::Slow, ActionClass::Stop,
                                           ActionClass::Merge, ActionClass::Turn});
    CHECK(classify_actions({"The car merges into the lane to its left"}, model, backend).front() == ActionClass::Merge);

    // Brute-force nearest centroid: the largest coordinate of a unit vector
    // against one-hot centroids.
    const auto labels = classify_actions(extra, model, backend);
    for (std::size_t i = 0; i < extra.size(); ++i) {
        const auto best = static_cast<int>(std::max_element(extra_raw[i].begin(), extra_raw[i].end()) - extra_raw[i].begin());
        CHECK(labels[i] == model.label_map.at(best));
    }

    model.label_map.erase(4);
    CHECK_THROWS_AS(classify_actions({"The car turns left and drives forward"}, model, backend), ConfigError);
}

TEST_CASE("filter_domain_questions drops catch-all and image questions") {
    const auto raw = load_qa_file(data_dir() / "hdt_raw.jsonl");
    const auto kept = filter_domain_questions(raw);
    std::vector<std::string> ids;
    for (const auto& item : kept) ids.push_back(item.id);
    CHECK(ids == std::vector<std::string>{"ca-car-001", "tx-moto-001", "tx-car-001", "tx-cdl-002"});
    // kept items are unchanged
    CHECK(kept[2] == raw[5]);

    auto clean = make_item("c", "Which lane is for passing?", {"Left", "Right", "Center", "Shoulder"}, 0, Partition::Hdt4);
    CHECK(filter_domain_questions({clean}) == std::vector<QAItem>{clean});
    auto catch_all = clean;
    catch_all.candidates[3] = "All of the above";
    CHECK(filter_domain_questions({catch_all}).empty());
    auto image = clean;
    image.question += " [image]";
    CHECK(filter_domain_questions({image}).empty());
}
