#include "roadqa/server.hpp"

#include "roadqa/errors.hpp"
#include "roadqa/qa_io.hpp"

namespace roadqa {

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, Json{{"error", message}});
}

// Maps library exceptions onto HTTP statuses around a handler body.
template <typename Fn>
void guarded(httplib::Response& res, Fn fn) {
    try {
        fn();
    } catch (const ValidationError& e) {
        reply_error(res, 400, e.what());
    } catch (const nlohmann::json::exception& e) {
        reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
        reply_error(res, 502, e.what());
    }
}

Partition partition_for(std::size_t candidate_count) {
    switch (candidate_count) {
        case 2: return Partition::Hdt2;
        case 3: return Partition::Hdt3;
        case 4: return Partition::Hdt4;
        case 5: return Partition::Hdt5;
        default: throw ValidationError("candidates must number between 2 and 5");
    }
}

}  // namespace

void install_answer_routes(httplib::Server& server, const ParagraphIndex& index, ModelBackend& backend,
                           ScorerConfig config) {
    check_compatible(index, backend);

    server.Get("/v1/retrieve", [&index, &backend](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (!req.has_param("q")) throw ValidationError("missing query parameter q");
            std::size_t k = 1;
            if (req.has_param("k")) {
                const std::string raw = req.get_param_value("k");
                std::size_t used = 0;
                long long parsed = 0;
                try {
                    parsed = std::stoll(raw, &used);
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != raw.size() || parsed < 1) throw ValidationError("k must be a positive integer");
                k = static_cast<std::size_t>(parsed);
            }
            Json results = Json::array();
            for (const auto& hit : retrieve(index, req.get_param_value("q"), k, backend)) {
                results.push_back({{"paragraph_id", hit.paragraph->id},
                                   {"text", hit.paragraph->text},
                                   {"source", hit.paragraph->source},
                                   {"score", hit.score}});
            }
            reply_json(res, 200, Json{{"results", results}});
        });
    });

    server.Post("/v1/answer", [&index, &backend, config](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const Json body = Json::parse(req.body);
            if (!body.is_object()) throw ValidationError("request body must be an object");
            QAItem item;
            item.id = "request";
            item.question = body.at("question").get<std::string>();
            item.candidates = body.at("candidates").get<std::vector<std::string>>();
            item.partition = partition_for(item.candidates.size());
            validate(item);

            const auto record = predict_openbook(item, index, backend, config);
            if (record.errored()) {
                reply_error(res, 502, *record.error);
                return;
            }
            reply_json(res, 200,
                       Json{{"predicted_index", record.predicted_index},
                            {"paragraph_id", record.metadata.at("paragraph_id")},
                            {"generated_answer", record.metadata.at("generated_answer")},
                            {"candidate_scores", record.candidate_scores}});
        });
    });
}

}  // namespace roadqa
