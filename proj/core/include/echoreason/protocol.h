#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace echoreason::protocol {

// HTTP+JSON verifier protocol. Bodies are compact JSON with keys in sorted
// order, which is what Encode produces. Decode throws ProtocolError on
// malformed bodies or missing / mistyped fields.

inline constexpr std::string_view kJudgePath = "/v1/judge";
inline constexpr std::string_view kSimilarityPath = "/v1/similarity";
inline constexpr std::string_view kEmbedPath = "/v1/embed";

struct JudgeRequest {
  std::string step_text;
  std::vector<std::string> questions;
  std::vector<std::string> available_views;

  bool operator==(const JudgeRequest&) const = default;
};

struct SimilarityRequest {
  std::string text;
  std::string view_label;
  std::string video_uri;

  bool operator==(const SimilarityRequest&) const = default;
};

struct EmbedRequest {
  std::vector<std::string> texts;

  bool operator==(const EmbedRequest&) const = default;
};

// Response of /v1/judge and /v1/similarity.
struct ScoreResponse {
  double score = 0.0;

  bool operator==(const ScoreResponse&) const = default;
};

struct EmbedResponse {
  std::vector<std::vector<double>> vectors;

  bool operator==(const EmbedResponse&) const = default;
};

std::string Encode(const JudgeRequest& req);
std::string Encode(const SimilarityRequest& req);
std::string Encode(const EmbedRequest& req);
std::string Encode(const ScoreResponse& resp);
std::string Encode(const EmbedResponse& resp);

JudgeRequest DecodeJudgeRequest(std::string_view body);
SimilarityRequest DecodeSimilarityRequest(std::string_view body);
EmbedRequest DecodeEmbedRequest(std::string_view body);
ScoreResponse DecodeScoreResponse(std::string_view body);
EmbedResponse DecodeEmbedResponse(std::string_view body);

}  // namespace echoreason::protocol
