#include <cmath>

#include "httplib.h"
#include "roadqa/backend.hpp"
#include "roadqa/errors.hpp"
#include "roadqa/qa_io.hpp"

namespace roadqa {

namespace {

// Sidecars return float32 vectors normalized on their side.
constexpr double kRemoteNormTolerance = 1e-4;

struct Endpoint {
    std::string scheme_host_port;
    std::string base_path;
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    Endpoint ep;
    ep.scheme_host_port = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        ep.base_path = url.substr(path_start);
        while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
    }
    return ep;
}

Json post(const BackendConfig& config, const std::string& route, const Json& body) {
    const Endpoint ep = split_endpoint(config.endpoint);
    httplib::Client client(ep.scheme_host_port);
    const auto secs = config.timeout.count() / 1000;
    const auto usecs = (config.timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    const std::string path = ep.base_path + route;
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
        throw BackendError("POST " + config.endpoint + route + " failed: " + httplib::to_string(res.error()));
    }
    Json reply;
    try {
        reply = Json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendError("POST " + route + ": malformed response body: " + e.what());
    }
    if (res->status != 200) {
        std::string message = reply.is_object() && reply.contains("error") && reply["error"].is_string()
                                  ? reply["error"].get<std::string>()
                                  : res->body;
        throw BackendError("POST " + route + " returned HTTP " + std::to_string(res->status) + ": " + message);
    }
    if (!reply.is_object()) throw BackendError("POST " + route + ": response is not an object");
    return reply;
}

const Json& reply_array(const Json& reply, const char* field, std::size_t expected, const std::string& route) {
    auto it = reply.find(field);
    if (it == reply.end() || !it->is_array()) {
        throw BackendError("POST " + route + ": response lacks array \"" + field + "\"");
    }
    if (it->size() != expected) {
        throw BackendError("POST " + route + ": expected " + std::to_string(expected) + " results, got " +
                           std::to_string(it->size()));
    }
    return *it;
}

// Splits `inputs` into batch_size chunks, issues one request per chunk, and
// concatenates the per-chunk results in input order.
template <typename In, typename Out, typename Call>
std::vector<Out> batched(const std::vector<In>& inputs, std::size_t batch_size, Call call) {
    std::vector<Out> out;
    out.reserve(inputs.size());
    for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
        const std::size_t end = std::min(inputs.size(), start + batch_size);
        std::vector<In> chunk(inputs.begin() + static_cast<std::ptrdiff_t>(start),
                              inputs.begin() + static_cast<std::ptrdiff_t>(end));
        auto part = call(chunk);
        for (auto& x : part) out.push_back(std::move(x));
    }
    return out;
}

}  // namespace

RemoteBackend::RemoteBackend(BackendConfig config) : config_(std::move(config)) {
    config_.kind = BackendKind::Remote;
    validate(config_);
}

std::vector<EmbeddingVector> RemoteBackend::embed(const std::vector<std::string>& texts) {
    return batched<std::string, EmbeddingVector>(texts, config_.batch_size, [&](const std::vector<std::string>& chunk) {
        const Json reply = post(config_, "/v1/embed", Json{{"texts", chunk}});
        const Json& vectors = reply_array(reply, "vectors", chunk.size(), "/v1/embed");
        if (reply.contains("dim") && reply["dim"] != config_.dimension) {
            throw BackendError("/v1/embed: declared dim " + reply["dim"].dump() + " but configured " +
                               std::to_string(config_.dimension));
        }
        std::vector<EmbeddingVector> out;
        for (const auto& v : vectors) {
            std::vector<double> values;
            try {
                values = v.get<std::vector<double>>();
            } catch (const nlohmann::json::exception&) {
                throw BackendError("/v1/embed: vector is not an array of numbers");
            }
            if (values.size() != config_.dimension) {
                throw BackendError("/v1/embed: vector of dimension " + std::to_string(values.size()));
            }
            double sq = 0.0;
            for (double x : values) sq += x * x;
            if (std::abs(std::sqrt(sq) - 1.0) > kRemoteNormTolerance) {
                throw BackendError("/v1/embed: vector is not unit-norm");
            }
            out.push_back(EmbeddingVector::normalized(std::span<const double>(values)));
        }
        return out;
    });
}

std::vector<NLIScores> RemoteBackend::nli(const std::vector<PremiseHypothesis>& pairs) {
    return batched<PremiseHypothesis, NLIScores>(pairs, config_.batch_size, [&](const std::vector<PremiseHypothesis>& chunk) {
        Json body{{"pairs", Json::array()}};
        for (const auto& p : chunk) body["pairs"].push_back({{"premise", p.premise}, {"hypothesis", p.hypothesis}});
        const Json reply = post(config_, "/v1/nli", body);
        std::vector<NLIScores> out;
        for (const auto& s : reply_array(reply, "scores", chunk.size(), "/v1/nli")) {
            NLIScores scores;
            try {
                scores = {s.at("entail").get<double>(), s.at("neutral").get<double>(),
                          s.at("contradict").get<double>()};
                validate(scores);
            } catch (const std::exception& e) {
                throw BackendError(std::string("/v1/nli: bad score triple: ") + e.what());
            }
            out.push_back(scores);
        }
        return out;
    });
}

std::vector<double> RemoteBackend::plausibility(const std::vector<std::string>& statements) {
    return batched<std::string, double>(statements, config_.batch_size, [&](const std::vector<std::string>& chunk) {
        const Json reply = post(config_, "/v1/plausibility", Json{{"statements", chunk}});
        std::vector<double> out;
        for (const auto& s : reply_array(reply, "scores", chunk.size(), "/v1/plausibility")) {
            if (!s.is_number()) throw BackendError("/v1/plausibility: score is not a number");
            out.push_back(s.get<double>());
        }
        return out;
    });
}

std::string RemoteBackend::generate(const std::string& prompt, int max_length) {
    if (prompt.empty()) throw ValidationError("prompt must be non-empty");
    if (max_length < 1) throw ValidationError("max_length must be at least 1");
    const Json reply = post(config_, "/v1/generate", Json{{"prompt", prompt}, {"max_length", max_length}});
    auto it = reply.find("text");
    if (it == reply.end() || !it->is_string()) throw BackendError("/v1/generate: response lacks \"text\"");
    std::string text = it->get<std::string>();
    if (whitespace_tokens(text).empty()) throw BackendError("/v1/generate: empty generation");
    return text;
}

std::string RemoteBackend::fingerprint() const {
    return "remote:" + config_.endpoint + ":dim=" + std::to_string(config_.dimension);
}

}  // namespace roadqa
