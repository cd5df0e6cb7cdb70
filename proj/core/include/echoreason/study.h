#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/transcript.h"
#include "echoreason/views.h"

namespace echoreason {

struct Video {
  std::string id;
  std::string view_label;  // canonical view name
  std::string uri;
  // Synthetic text surrogate for the video content.
  std::optional<std::string> caption;

  bool operator==(const Video&) const = default;
};

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string unit;

  bool operator==(const Measurement&) const = default;
};

// One echocardiography case: labelled videos, measurements and the disease
// query. Ground truth is Yes or No when present.
struct EchoStudy {
  std::string patient_id;
  std::vector<Video> videos;
  std::vector<Measurement> measurements;
  std::string query;
  std::optional<Answer> ground_truth;

  std::set<std::string> AvailableViews() const;

  bool operator==(const EchoStudy&) const = default;
};

EchoStudy StudyFromJson(const nlohmann::json& doc, const ViewVocabulary& vocab,
                        const std::string& location = "study");
nlohmann::json StudyToJson(const EchoStudy& study);

// Accepts either a single study object or {"studies": [...]}.
std::vector<EchoStudy> StudiesFromJson(const nlohmann::json& doc,
                                       const ViewVocabulary& vocab,
                                       const std::string& location = "studies");
nlohmann::json StudiesToJson(const std::vector<EchoStudy>& studies);

}  // namespace echoreason
