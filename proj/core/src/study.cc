#include "echoreason/study.h"

#include <set>

#include "echoreason/errors.h"

namespace echoreason {

using nlohmann::json;

namespace {

[[noreturn]] void Fail(const std::string& location, const std::string& path,
                       const std::string& msg) {
  throw SchemaError(location, path, msg);
}

std::string StringField(const json& obj, const std::string& key,
                        const std::string& location, const std::string& path,
                        bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) Fail(location, path + key, "missing field");
    return {};
  }
  if (!it->is_string()) Fail(location, path + key, "expected a string");
  return it->get<std::string>();
}

}  // namespace

std::set<std::string> EchoStudy::AvailableViews() const {
  std::set<std::string> views;
  for (const auto& v : videos) views.insert(v.view_label);
  return views;
}

EchoStudy StudyFromJson(const json& doc, const ViewVocabulary& vocab,
                        const std::string& location) {
  if (!doc.is_object()) Fail(location, "", "study must be a JSON object");
  EchoStudy study;
  study.patient_id = StringField(doc, "patient_id", location, "");
  if (study.patient_id.empty()) Fail(location, "patient_id", "must not be empty");
  study.query = StringField(doc, "query", location, "");

  auto videos = doc.find("videos");
  if (videos == doc.end() || !videos->is_array()) {
    Fail(location, "videos", "expected an array");
  }
  for (std::size_t i = 0; i < videos->size(); ++i) {
    const json& jv = (*videos)[i];
    const std::string path = "videos[" + std::to_string(i) + "].";
    if (!jv.is_object()) Fail(location, path, "expected an object");
    Video v;
    v.id = StringField(jv, "id", location, path);
    const std::string label = StringField(jv, "view_label", location, path);
    auto canonical = vocab.Resolve(label);
    if (!canonical) {
      throw VocabularyError(location + ": " + path + "view_label: unknown view '" +
                            label + "'");
    }
    v.view_label = *canonical;
    v.uri = StringField(jv, "uri", location, path, false);
    if (auto c = jv.find("caption"); c != jv.end() && !c->is_null()) {
      if (!c->is_string()) Fail(location, path + "caption", "expected a string");
      v.caption = c->get<std::string>();
    }
    study.videos.push_back(std::move(v));
  }

  if (auto ms = doc.find("measurements"); ms != doc.end()) {
    if (!ms->is_array()) Fail(location, "measurements", "expected an array");
    for (std::size_t i = 0; i < ms->size(); ++i) {
      const json& jm = (*ms)[i];
      const std::string path = "measurements[" + std::to_string(i) + "].";
      if (!jm.is_object()) Fail(location, path, "expected an object");
      Measurement m;
      m.name = StringField(jm, "name", location, path);
      auto value = jm.find("value");
      if (value == jm.end() || !value->is_number()) {
        Fail(location, path + "value", "expected a number");
      }
      m.value = value->get<double>();
      m.unit = StringField(jm, "unit", location, path, false);
      study.measurements.push_back(std::move(m));
    }
  }

  if (auto gt = doc.find("ground_truth"); gt != doc.end() && !gt->is_null()) {
    if (!gt->is_string()) Fail(location, "ground_truth", "expected \"Yes\" or \"No\"");
    auto answer = AnswerFromName(gt->get<std::string>());
    if (!answer || *answer == Answer::kUnparsable) {
      Fail(location, "ground_truth", "expected \"Yes\" or \"No\"");
    }
    study.ground_truth = answer;
  }
  return study;
}

json StudyToJson(const EchoStudy& study) {
  json videos = json::array();
  for (const auto& v : study.videos) {
    json jv = {{"id", v.id}, {"view_label", v.view_label}, {"uri", v.uri}};
    if (v.caption) jv["caption"] = *v.caption;
    videos.push_back(std::move(jv));
  }
  json measurements = json::array();
  for (const auto& m : study.measurements) {
    measurements.push_back({{"name", m.name}, {"value", m.value}, {"unit", m.unit}});
  }
  json out = {{"patient_id", study.patient_id},
              {"query", study.query},
              {"videos", std::move(videos)},
              {"measurements", std::move(measurements)}};
  out["ground_truth"] =
      study.ground_truth ? json(AnswerName(*study.ground_truth)) : json(nullptr);
  return out;
}

std::vector<EchoStudy> StudiesFromJson(const json& doc, const ViewVocabulary& vocab,
                                       const std::string& location) {
  std::vector<EchoStudy> out;
  if (doc.is_object() && doc.contains("studies")) {
    const json& arr = doc["studies"];
    if (!arr.is_array()) Fail(location, "studies", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(StudyFromJson(arr[i], vocab,
                                  location + ":studies[" + std::to_string(i) + "]"));
      if (!ids.insert(out.back().patient_id).second) {
        throw DuplicateIdError(location + ": duplicate patient_id '" +
                               out.back().patient_id + "'");
      }
    }
    return out;
  }
  out.push_back(StudyFromJson(doc, vocab, location));
  return out;
}

json StudiesToJson(const std::vector<EchoStudy>& studies) {
  json arr = json::array();
  for (const auto& s : studies) arr.push_back(StudyToJson(s));
  return {{"studies", std::move(arr)}};
}

}  // namespace echoreason
