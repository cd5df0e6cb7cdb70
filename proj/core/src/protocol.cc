#include "echoreason/protocol.h"

#include <nlohmann/json.hpp>

#include "echoreason/errors.h"

namespace echoreason::protocol {

using nlohmann::json;

namespace {

json ParseObject(std::string_view body, std::string_view what) {
  json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded()) {
    throw ProtocolError(std::string(what) + ": body is not valid JSON");
  }
  if (!doc.is_object()) {
    throw ProtocolError(std::string(what) + ": body must be a JSON object");
  }
  return doc;
}

const json& Require(const json& doc, const char* key, std::string_view what) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw ProtocolError(std::string(what) + ": missing field '" + key + "'");
  }
  return *it;
}

std::string RequireString(const json& doc, const char* key, std::string_view what) {
  const json& v = Require(doc, key, what);
  if (!v.is_string()) {
    throw ProtocolError(std::string(what) + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::vector<std::string> RequireStrings(const json& doc, const char* key,
                                        std::string_view what) {
  const json& v = Require(doc, key, what);
  if (!v.is_array()) {
    throw ProtocolError(std::string(what) + ": field '" + key + "' must be an array");
  }
  std::vector<std::string> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    if (!item.is_string()) {
      throw ProtocolError(std::string(what) + ": field '" + key +
                          "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string Dump(const json& doc) {
  return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

std::string Encode(const JudgeRequest& req) {
  return Dump({{"step_text", req.step_text},
               {"questions", req.questions},
               {"available_views", req.available_views}});
}

std::string Encode(const SimilarityRequest& req) {
  return Dump({{"text", req.text},
               {"view_label", req.view_label},
               {"video_uri", req.video_uri}});
}

std::string Encode(const EmbedRequest& req) { return Dump({{"texts", req.texts}}); }

std::string Encode(const ScoreResponse& resp) { return Dump({{"score", resp.score}}); }

std::string Encode(const EmbedResponse& resp) {
  return Dump({{"vectors", resp.vectors}});
}

JudgeRequest DecodeJudgeRequest(std::string_view body) {
  constexpr std::string_view kWhat = "judge request";
  const json doc = ParseObject(body, kWhat);
  return {RequireString(doc, "step_text", kWhat),
          RequireStrings(doc, "questions", kWhat),
          RequireStrings(doc, "available_views", kWhat)};
}

SimilarityRequest DecodeSimilarityRequest(std::string_view body) {
  constexpr std::string_view kWhat = "similarity request";
  const json doc = ParseObject(body, kWhat);
  return {RequireString(doc, "text", kWhat), RequireString(doc, "view_label", kWhat),
          RequireString(doc, "video_uri", kWhat)};
}

EmbedRequest DecodeEmbedRequest(std::string_view body) {
  constexpr std::string_view kWhat = "embed request";
  const json doc = ParseObject(body, kWhat);
  return {RequireStrings(doc, "texts", kWhat)};
}

ScoreResponse DecodeScoreResponse(std::string_view body) {
  constexpr std::string_view kWhat = "score response";
  const json doc = ParseObject(body, kWhat);
  const json& v = Require(doc, "score", kWhat);
  if (!v.is_number()) throw ProtocolError("score response: 'score' must be a number");
  return {v.get<double>()};
}

EmbedResponse DecodeEmbedResponse(std::string_view body) {
  constexpr std::string_view kWhat = "embed response";
  const json doc = ParseObject(body, kWhat);
  const json& v = Require(doc, "vectors", kWhat);
  if (!v.is_array()) throw ProtocolError("embed response: 'vectors' must be an array");
  EmbedResponse resp;
  for (const auto& row : v) {
    if (!row.is_array()) {
      throw ProtocolError("embed response: each vector must be an array");
    }
    std::vector<double> vec;
    vec.reserve(row.size());
    for (const auto& x : row) {
      if (!x.is_number()) {
        throw ProtocolError("embed response: vector entries must be numbers");
      }
      vec.push_back(x.get<double>());
    }
    resp.vectors.push_back(std::move(vec));
  }
  return resp;
}

}  // namespace echoreason::protocol
