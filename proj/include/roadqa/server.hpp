#pragma once

#include "httplib.h"
#include "roadqa/backend.hpp"
#include "roadqa/retrieval.hpp"
#include "roadqa/scorers.hpp"

namespace roadqa {

/// Registers the answering endpoints on `server`:
///   GET  /v1/retrieve?q=<text>&k=<n>        → {"results":[{paragraph_id,text,source,score}]}
///   POST /v1/answer {question,candidates[]} → {predicted_index,paragraph_id,generated_answer,candidate_scores}
/// Bad requests get HTTP 400 and backend failures HTTP 502, both with {"error": ...}.
/// `index` and `backend` must outlive the server.
void install_answer_routes(httplib::Server& server, const ParagraphIndex& index, ModelBackend& backend,
                           ScorerConfig config);

}  // namespace roadqa
