#include <thread>

#include "doctest.h"
#include "roadqa/backend.hpp"
#include "roadqa/server.hpp"
#include "test_support.hpp"

using namespace roadqa;
using namespace roadqa::testing;

namespace {

std::vector<Paragraph> manual() {
    return {Paragraph{"m#0", "Keep a safe following distance behind the car ahead.", "m", 1, 9},
            Paragraph{"m#1", "Park at least 15 feet from a fire hydrant.", "m", 1, 9},
            Paragraph{"m#2", "Signal before changing lanes.", "m", 1, 4}};
}

class RunningServer {
public:
    RunningServer(const ParagraphIndex& index, ModelBackend& backend) {
        ScorerConfig config;
        config.kind = ScorerKind::OpenBook;
        install_answer_routes(server_, index, backend, config);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~RunningServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

}  // namespace

TEST_CASE("retrieve endpoint returns ranked paragraphs") {
    HashBackend backend(32, 1);
    const auto index = ParagraphIndex::build(manual(), backend);
    RunningServer server(index, backend);
    auto client = server.client();

    auto res = client.Get("/v1/retrieve?q=Signal%20before%20changing%20lanes.&k=2");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = Json::parse(res->body);
    REQUIRE(body["results"].size() == 2);
    CHECK(body["results"][0]["paragraph_id"] == "m#2");
    CHECK(body["results"][0]["score"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(body["results"][0]["source"] == "m");

    res = client.Get("/v1/retrieve?q=lanes");
    REQUIRE(res);
    CHECK(Json::parse(res->body)["results"].size() == 1);

    for (const char* bad : {"/v1/retrieve", "/v1/retrieve?q=lanes&k=0", "/v1/retrieve?q=lanes&k=two",
                            "/v1/retrieve?q=%20"}) {
        res = client.Get(bad);
        REQUIRE(res);
        CHECK(res->status == 400);
        CHECK(Json::parse(res->body).contains("error"));
    }
}

TEST_CASE("answer endpoint runs the open-book scorer") {
    HashBackend backend(32, 1);
    const auto index = ParagraphIndex::build(manual(), backend);
    RunningServer server(index, backend);
    auto client = server.client();

    const Json request{{"question", "How close may you park to a fire hydrant?"},
                       {"candidates", {"5 feet", "10 feet", "15 feet"}}};
    auto res = client.Post("/v1/answer", request.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto body = Json::parse(res->body);
    CHECK(body["candidate_scores"].size() == 3);
    const int predicted = body["predicted_index"].get<int>();
    CHECK(predicted >= 0);
    CHECK(predicted < 3);
    // the hash generator echoes one of the lettered candidates
    CHECK(body["generated_answer"] == request["candidates"][static_cast<std::size_t>(predicted)]);
    CHECK(body["paragraph_id"].get<std::string>().rfind("m#", 0) == 0);

    for (const std::string bad : {std::string("not json"), std::string(R"({"question":"q"})"),
                                  std::string(R"({"question":"q","candidates":["only one"]})"),
                                  std::string(R"({"question":"q","candidates":["a",""]})"), std::string("[1]")}) {
        res = client.Post("/v1/answer", bad, "application/json");
        REQUIRE(res);
        CHECK(res->status == 400);
    }
}
