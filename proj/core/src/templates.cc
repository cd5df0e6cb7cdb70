#include "echoreason/templates.h"

#include <algorithm>
#include <map>

#include "echoreason/errors.h"
#include "echoreason/text.h"
#include "echoreason/verifiers.h"

namespace echoreason {

using nlohmann::json;

namespace {

// Walks a JSON document while keeping the field path for error messages.
class SchemaReader {
 public:
  explicit SchemaReader(std::string location) : location_(std::move(location)) {}

  [[noreturn]] void Fail(const std::string& path, const std::string& msg) const {
    throw SchemaError(location_, path, msg);
  }

  const json& Field(const json& obj, const std::string& path,
                    const std::string& key) const {
    if (!obj.is_object()) Fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) Fail(Join(path, key), "missing field");
    return *it;
  }

  std::string String(const json& obj, const std::string& path,
                     const std::string& key, bool allow_empty = false) const {
    const json& v = Field(obj, path, key);
    if (!v.is_string()) Fail(Join(path, key), "expected a string");
    auto s = v.get<std::string>();
    if (!allow_empty && TrimWhitespace(s).empty()) {
      Fail(Join(path, key), "must not be empty");
    }
    return s;
  }

  std::vector<std::string> StringList(const json& obj, const std::string& path,
                                      const std::string& key) const {
    const json& v = Field(obj, path, key);
    const std::string here = Join(path, key);
    if (!v.is_array()) Fail(here, "expected an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) Fail(Index(here, i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  std::vector<std::string> Views(const json& obj, const std::string& path,
                                 const std::string& key,
                                 const ViewVocabulary& vocab) const {
    auto raw = StringList(obj, path, key);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto canonical = vocab.Resolve(raw[i]);
      if (!canonical) {
        throw VocabularyError(location_ + ": " + Index(Join(path, key), i) +
                              ": unknown view name '" + raw[i] + "'");
      }
      if (std::find(out.begin(), out.end(), *canonical) != out.end()) {
        Fail(Index(Join(path, key), i), "duplicate view '" + *canonical + "'");
      }
      out.push_back(*canonical);
    }
    return out;
  }

  static std::string Join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string Index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }

  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

std::string JoinWords(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

}  // namespace

const std::vector<std::string>& ForbiddenInstructionPhrases() {
  static const std::vector<std::string> kPhrases = {
      "the patient has",      "this patient has",      "patient is diagnosed",
      "diagnosis is confirmed", "confirmed diagnosis of", "final diagnosis:",
      "the answer is",
  };
  return kPhrases;
}

std::string ReasoningTemplate::RetrievalKey() const {
  return name + " " + JoinWords(meta.knowledge_tags) + " " + meta.description +
         " " + meta.application_scenario;
}

ReasoningTemplate ParseTemplate(const json& doc, const ViewVocabulary& vocab,
                                const std::string& location) {
  SchemaReader r(location);
  if (!doc.is_object()) r.Fail("", "template must be a JSON object");

  ReasoningTemplate t;
  t.id = r.String(doc, "", "id");
  t.name = r.String(doc, "", "name");

  const json& meta = r.Field(doc, "", "meta");
  t.meta.knowledge_tags = r.StringList(meta, "meta", "knowledge_tags");
  if (t.meta.knowledge_tags.empty()) {
    r.Fail("meta.knowledge_tags", "must not be empty");
  }
  t.meta.description = r.String(meta, "meta", "description", true);
  t.meta.application_scenario =
      r.String(meta, "meta", "application_scenario", true);
  t.meta.views_required = r.Views(meta, "meta", "views_required", vocab);
  if (t.meta.views_required.empty()) {
    r.Fail("meta.views_required", "must not be empty");
  }
  t.meta.measurements_required =
      r.StringList(meta, "meta", "measurements_required");

  const json& steps = r.Field(doc, "", "steps");
  if (!steps.is_array()) r.Fail("steps", "expected an array");
  if (steps.empty()) r.Fail("steps", "must not be empty");

  for (std::size_t s = 0; s < steps.size(); ++s) {
    const std::string sp = SchemaReader::Index("steps", s);
    const json& js = steps[s];
    TemplateStep step;

    const json& idx = r.Field(js, sp, "index");
    if (!idx.is_number_integer()) r.Fail(sp + ".index", "expected an integer");
    step.index = idx.get<int>();
    if (step.index != static_cast<int>(s) + 1) {
      r.Fail(sp + ".index", "step indices must be contiguous from 1 (expected " +
                                std::to_string(s + 1) + ", got " +
                                std::to_string(step.index) + ")");
    }

    step.instruction = r.String(js, sp, "instruction");
    const std::string lowered = ToLowerAscii(step.instruction);
    for (const auto& phrase : ForbiddenInstructionPhrases()) {
      if (lowered.find(phrase) != std::string::npos) {
        r.Fail(sp + ".instruction",
               "contains patient-specific conclusion marker '" + phrase + "'");
      }
    }

    const json& qs = r.Field(js, sp, "questions");
    const std::string qp = sp + ".questions";
    if (!qs.is_array()) r.Fail(qp, "expected an array");
    if (qs.empty() || qs.size() > kMaxQuestionsPerStep) {
      r.Fail(qp, "expected 1.." + std::to_string(kMaxQuestionsPerStep) +
                     " questions, got " + std::to_string(qs.size()));
    }
    for (std::size_t q = 0; q < qs.size(); ++q) {
      const std::string qpath = SchemaReader::Index(qp, q);
      Question question;
      question.text = r.String(qs[q], qpath, "text");
      question.required_views = r.Views(qs[q], qpath, "required_views", vocab);
      for (const auto& v : question.required_views) {
        const auto& req = t.meta.views_required;
        if (std::find(req.begin(), req.end(), v) == req.end()) {
          r.Fail(qpath + ".required_views",
                 "view '" + v + "' is not listed in meta.views_required");
        }
      }
      step.questions.push_back(std::move(question));
    }
    t.steps.push_back(std::move(step));
  }
  return t;
}

std::vector<ReasoningTemplate> LoadTemplates(const std::filesystem::path& dir,
                                             const ViewVocabulary& vocab) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw ValidationError("template directory not found: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<ReasoningTemplate> templates;
  std::map<std::string, std::string> origin;
  for (const auto& file : files) {
    const std::string location = file.string();
    json doc = json::parse(ReadFile(file), nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw SchemaError(location, "", "invalid JSON");
    auto tmpl = ParseTemplate(doc, vocab, location);
    auto [it, inserted] = origin.emplace(tmpl.id, location);
    if (!inserted) {
      throw DuplicateIdError("duplicate template id '" + tmpl.id + "' in " +
                             location + " (first defined in " + it->second + ")");
    }
    templates.push_back(std::move(tmpl));
  }
  std::sort(templates.begin(), templates.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return templates;
}

json TemplateToJson(const ReasoningTemplate& t) {
  json steps = json::array();
  for (const auto& step : t.steps) {
    json qs = json::array();
    for (const auto& q : step.questions) {
      qs.push_back({{"text", q.text}, {"required_views", q.required_views}});
    }
    steps.push_back({{"index", step.index},
                     {"instruction", step.instruction},
                     {"questions", std::move(qs)}});
  }
  return {{"id", t.id},
          {"name", t.name},
          {"meta",
           {{"knowledge_tags", t.meta.knowledge_tags},
            {"description", t.meta.description},
            {"application_scenario", t.meta.application_scenario},
            {"views_required", t.meta.views_required},
            {"measurements_required", t.meta.measurements_required}}},
          {"steps", std::move(steps)}};
}

json FilteredTemplateToJson(const FilteredTemplate& f) {
  json steps = json::array();
  for (const auto& step : f.steps) {
    json qs = json::array();
    for (const auto& q : step.questions) {
      qs.push_back({{"text", q.text}, {"required_views", q.required_views}});
    }
    steps.push_back({{"index", step.index},
                     {"instruction", step.instruction},
                     {"questions", std::move(qs)}});
  }
  return {{"template_id", f.template_id},
          {"available_views", f.available_views},
          {"steps", std::move(steps)}};
}

const ReasoningTemplate* FindTemplate(std::span<const ReasoningTemplate> templates,
                                      std::string_view id) {
  for (const auto& t : templates) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

RetrievalResult Retrieve(std::string_view query,
                         std::span<const ReasoningTemplate> templates,
                         const Embedder& embedder) {
  if (templates.empty()) throw ValidationError("retrieve: no templates loaded");

  std::vector<std::string> texts;
  texts.reserve(templates.size() + 1);
  texts.emplace_back(query);
  for (const auto& t : templates) texts.push_back(t.RetrievalKey());

  const auto vectors = embedder.Embed(texts);
  if (vectors.size() != texts.size()) {
    throw VerifierError("embedder returned " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(texts.size()) + " texts");
  }

  std::vector<RankedTemplate> ranked;
  ranked.reserve(templates.size());
  for (std::size_t i = 0; i < templates.size(); ++i) {
    ranked.push_back({templates[i].id, Cosine(vectors[0], vectors[i + 1])});
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedTemplate& a, const RankedTemplate& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              return a.template_id < b.template_id;
            });

  RetrievalResult result;
  result.template_id = ranked.front().template_id;
  result.similarity = ranked.front().similarity;
  result.ranked_rest.assign(ranked.begin() + 1, ranked.end());
  return result;
}

json RetrievalToJson(const RetrievalResult& result) {
  json ranked = json::array();
  ranked.push_back(
      {{"template_id", result.template_id}, {"similarity", result.similarity}});
  for (const auto& r : result.ranked_rest) {
    ranked.push_back({{"template_id", r.template_id}, {"similarity", r.similarity}});
  }
  return {{"template_id", result.template_id},
          {"similarity", result.similarity},
          {"ranked", std::move(ranked)}};
}

FilteredTemplate FilterQuestions(const ReasoningTemplate& tmpl,
                                 const std::set<std::string>& available_views) {
  FilteredTemplate out;
  out.template_id = tmpl.id;
  out.available_views.assign(available_views.begin(), available_views.end());
  out.steps.reserve(tmpl.steps.size());
  for (const auto& step : tmpl.steps) {
    TemplateStep kept{step.index, step.instruction, {}};
    for (const auto& q : step.questions) {
      const bool ok = std::all_of(
          q.required_views.begin(), q.required_views.end(),
          [&](const std::string& v) { return available_views.count(v) > 0; });
      if (ok) kept.questions.push_back(q);
    }
    out.steps.push_back(std::move(kept));
  }
  return out;
}

}  // namespace echoreason
