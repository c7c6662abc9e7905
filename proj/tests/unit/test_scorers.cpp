#include "doctest.h"
#include "roadqa/backend.hpp"
#include "roadqa/errors.hpp"
#include "roadqa/scorers.hpp"
#include "test_support.hpp"

using namespace roadqa;
using namespace roadqa::testing;

namespace {

const std::string kQuestion = "The car ahead brakes suddenly. What should you do?";
const std::vector<std::string> kCandidates{"Speed up", "Honk and pass", "Slow down"};

Paragraph paragraph(const std::string& id, const std::string& text) {
    return Paragraph{id, text, "m", 1, static_cast<int>(whitespace_tokens(text).size())};
}

// Two paragraphs; the question sits on paragraph p0's axis.
std::vector<Json> openbook_rows(const std::string& generated, bool include_generation = true) {
    std::vector<Json> rows{
        embed_row("Keep a safe following distance.", basis(6, 0)),
        embed_row("Parking rules.", basis(6, 1)),
        embed_row(kQuestion, unit({1.0, 0.2, 0, 0, 0, 0})),
        embed_row(kCandidates[0], basis(6, 2)),
        embed_row(kCandidates[1], basis(6, 3)),
        embed_row(kCandidates[2], basis(6, 4)),
    };
    if (generated != kCandidates[2]) rows.push_back(embed_row(generated, basis(6, 5)));
    if (include_generation) {
        rows.push_back(generate_row(render_prompt(kQuestion, kCandidates, "Keep a safe following distance."),
                                    generated));
    }
    return rows;
}

}  // namespace

TEST_CASE("make_statement fills blanks or appends") {
    CHECK(make_statement("The car ahead ___ because it sees a red light.", "stops") ==
          "The car ahead stops because it sees a red light.");
    CHECK(make_statement("You must notify the DMV within ______ days.", "5") ==
          "You must notify the DMV within 5 days.");
    CHECK(make_statement("The car is slowing down because", "it sees a stop sign.") ==
          "The car is slowing down because it sees a stop sign.");
    CHECK(make_statement("Between ___ and ___ o'clock", "x") == "Between x and x o'clock");
    CHECK(make_statement("snake__case", "y") == "snake__case y");
}

TEST_CASE("NLI margins decide the prediction") {
    TempDir dir;
    const auto item = make_item("q1", "The car stops.", {"It sees a red light", "It speeds up", "It merges"}, 0,
                                Partition::BddEp);
    write_jsonl({nli_row("The car stops.", "It sees a red light", 0.9, 0.05, 0.05),
                 nli_row("The car stops.", "It speeds up", 0.1, 0.3, 0.6),
                 nli_row("The car stops.", "It merges", 0.2, 0.5, 0.3)},
                dir / "fx.jsonl");
    FixtureBackend backend(dir / "fx.jsonl");
    const auto record = predict_nli(item, backend);
    CHECK(record.predicted_index == 0);
    CHECK(record.scorer_name == "nli");
    CHECK(record.candidate_scores[0] == doctest::Approx(0.85));
    CHECK(record.candidate_scores[1] == doctest::Approx(-0.5));
    CHECK(record.candidate_scores[2] == doctest::Approx(-0.1));
}

TEST_CASE("plausibility picks the highest score, ties to the lowest index") {
    const auto item = make_item("q2", "The car ___ at the light.", {"accelerates", "stops", "turns"}, 1,
                                Partition::BddEp);
    for (double shift : {0.0, 0.1, -7.5}) {
        TempDir dir;
        write_jsonl({plausibility_row("The car accelerates at the light.", 1.0 + shift),
                     plausibility_row("The car stops at the light.", 3.0 + shift),
                     plausibility_row("The car turns at the light.", 2.0 + shift)},
                    dir / "fx.jsonl");
        FixtureBackend backend(dir / "fx.jsonl");
        const auto record = predict_plausibility(item, backend);
        CHECK(record.predicted_index == 1);
        CHECK(record.candidate_scores == std::vector<double>{1.0 + shift, 3.0 + shift, 2.0 + shift});
    }
    TempDir dir;
    write_jsonl({plausibility_row("The car accelerates at the light.", 2.0),
                 plausibility_row("The car stops at the light.", 2.0),
                 plausibility_row("The car turns at the light.", 2.0)},
                dir / "fx.jsonl");
    FixtureBackend backend(dir / "fx.jsonl");
    CHECK(predict_plausibility(item, backend).predicted_index == 0);
}

TEST_CASE("property: scorers follow candidate permutations") {
    HashBackend backend(16, 21);
    const auto item = make_item("q3", "The truck slows down because", {"it sees traffic", "a light turns red",
                                                                        "a pedestrian crosses"},
                                0, Partition::BddCp);
    const auto base_nli = predict_nli(item, backend);
    const auto base_pl = predict_plausibility(item, backend);
    const std::vector<std::vector<std::size_t>> perms{{0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& perm : perms) {
        QAItem shuffled = item;
        for (std::size_t i = 0; i < 3; ++i) shuffled.candidates[i] = item.candidates[perm[i]];
        const auto nli = predict_nli(shuffled, backend);
        const auto pl = predict_plausibility(shuffled, backend);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(nli.candidate_scores[i] == base_nli.candidate_scores[perm[i]]);
            CHECK(pl.candidate_scores[i] == base_pl.candidate_scores[perm[i]]);
        }
        CHECK(perm[static_cast<std::size_t>(nli.predicted_index)] ==
              static_cast<std::size_t>(base_nli.predicted_index));
        CHECK(perm[static_cast<std::size_t>(pl.predicted_index)] ==
              static_cast<std::size_t>(base_pl.predicted_index));
    }
}

TEST_CASE("render_prompt lays out question, lettered candidates and context") {
    const auto prompt = render_prompt("Q?", {"one", "two", "three"}, "Some paragraph.");
    CHECK(prompt == "Q?\n\n(A) one\n(B) two\n(C) three\n\ncontext: Some paragraph.");
    CHECK_THROWS_AS(render_prompt("Q?", {"a"}, "p", "fancy"), ConfigError);
}

TEST_CASE("token_overlap is an F1 over tokens") {
    CHECK(token_overlap("Slow down", "slow down!") == doctest::Approx(1.0));
    CHECK(token_overlap("slow down now", "slow down") == doctest::Approx(0.8));
    CHECK(token_overlap("stop", "go") == 0.0);
    CHECK(token_overlap("", "go") == 0.0);
}

TEST_CASE("open-book picks the candidate matching the generated answer") {
    for (auto metric : {AnswerMetric::EmbeddingCosine, AnswerMetric::TokenOverlap}) {
        TempDir dir;
        write_jsonl(openbook_rows("Slow down"), dir / "fx.jsonl");
        FixtureBackend backend(dir / "fx.jsonl");
        const auto index = ParagraphIndex::build(
            {paragraph("m#0", "Keep a safe following distance."), paragraph("m#1", "Parking rules.")}, backend);
        ScorerConfig config;
        config.kind = ScorerKind::OpenBook;
        config.metric = metric;
        const auto item = make_item("q4", kQuestion, kCandidates, 2, Partition::Hdt3);
        const auto record = predict_openbook(item, index, backend, config);
        CHECK(record.predicted_index == 2);
        CHECK(record.metadata.at("paragraph_id") == "m#0");
        CHECK(record.metadata.at("generated_answer") == "Slow down");
        CHECK(record.candidate_scores[2] == doctest::Approx(1.0));
    }
}

TEST_CASE("open-book with an answer orthogonal to every candidate falls back to index 0") {
    TempDir dir;
    write_jsonl(openbook_rows("Pull over"), dir / "fx.jsonl");
    FixtureBackend backend(dir / "fx.jsonl");
    const auto index = ParagraphIndex::build(
        {paragraph("m#0", "Keep a safe following distance."), paragraph("m#1", "Parking rules.")}, backend);
    ScorerConfig config;
    config.kind = ScorerKind::OpenBook;
    const auto record = predict_openbook(make_item("q5", kQuestion, kCandidates, 2, Partition::Hdt3), index,
                                         backend, config);
    CHECK(record.predicted_index == 0);
    CHECK(record.candidate_scores == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("open-book generation failure yields an errored record") {
    TempDir dir;
    write_jsonl(openbook_rows("Slow down", false), dir / "fx.jsonl");
    FixtureBackend backend(dir / "fx.jsonl");
    const auto index = ParagraphIndex::build(
        {paragraph("m#0", "Keep a safe following distance."), paragraph("m#1", "Parking rules.")}, backend);
    ScorerConfig config;
    config.kind = ScorerKind::OpenBook;
    const auto records =
        score_items({make_item("q6", kQuestion, kCandidates, 2, Partition::Hdt3)}, config, backend, &index);
    REQUIRE(records.size() == 1);
    CHECK(records[0].errored());
    CHECK(records[0].predicted_index == -1);
    CHECK(records[0].candidate_scores.empty());
    CHECK(records[0].metadata.at("paragraph_id") == "m#0");
}

TEST_CASE("score_items requires a compatible index for open-book") {
    HashBackend backend(8, 1);
    ScorerConfig config;
    config.kind = ScorerKind::OpenBook;
    const auto items = std::vector<QAItem>{make_item("q7", "Q", {"a", "b", "c"}, 0, Partition::Hdt3)};
    CHECK_THROWS_AS(score_items(items, config, backend), ConfigError);
    HashBackend other(8, 2);
    const auto index = ParagraphIndex::build({paragraph("m#0", "text")}, other);
    CHECK_THROWS_AS(score_items(items, config, backend, &index), StaleIndexError);
}

TEST_CASE("NLI lookup misses surface the item id") {
    TempDir dir;
    write_jsonl({nli_row("x", "y", 0.5, 0.25, 0.25)}, dir / "fx.jsonl");
    FixtureBackend backend(dir / "fx.jsonl");
    const auto item = make_item("missing-item", "Q", {"a", "b", "c"}, 0, Partition::BddEp);
    try {
        predict_nli(item, backend);
        FAIL("expected a lookup error");
    } catch (const LookupError& e) {
        CHECK(std::string(e.what()).find("missing-item") != std::string::npos);
    }
}
