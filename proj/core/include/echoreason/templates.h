#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/views.h"

namespace echoreason {

class Embedder;

inline constexpr std::size_t kMaxQuestionsPerStep = 5;

struct Question {
  std::string text;
  // Canonical view names; empty means the question is view-agnostic.
  std::vector<std::string> required_views;

  bool operator==(const Question&) const = default;
};

struct TemplateStep {
  int index = 0;
  std::string instruction;
  std::vector<Question> questions;

  bool operator==(const TemplateStep&) const = default;
};

struct TemplateMeta {
  std::vector<std::string> knowledge_tags;
  std::string description;
  std::string application_scenario;
  std::vector<std::string> views_required;
  std::vector<std::string> measurements_required;

  bool operator==(const TemplateMeta&) const = default;
};

// One reasoning template: name, retrieval metadata and the ordered
// diagnostic workflow.
struct ReasoningTemplate {
  std::string id;
  std::string name;
  TemplateMeta meta;
  std::vector<TemplateStep> steps;

  // name, knowledge tags, description and application scenario joined by
  // single spaces, in that order.
  std::string RetrievalKey() const;

  bool operator==(const ReasoningTemplate&) const = default;
};

// A template with its question lists narrowed to the views a study actually
// has. Step count always matches the source template; question lists may
// be empty.
struct FilteredTemplate {
  std::string template_id;
  std::vector<std::string> available_views;  // sorted
  std::vector<TemplateStep> steps;

  bool operator==(const FilteredTemplate&) const = default;
};

// Phrases that would leak a patient-specific conclusion into a step
// instruction. Matched case-insensitively.
const std::vector<std::string>& ForbiddenInstructionPhrases();

// Parses and validates one template document. `location` is used in error
// messages (usually the file path). View names are canonicalised through
// `vocab`.
ReasoningTemplate ParseTemplate(const nlohmann::json& doc,
                                const ViewVocabulary& vocab,
                                const std::string& location);

// Loads every *.json file in `dir`; result is sorted by id.
std::vector<ReasoningTemplate> LoadTemplates(const std::filesystem::path& dir,
                                             const ViewVocabulary& vocab);

nlohmann::json TemplateToJson(const ReasoningTemplate& tmpl);
nlohmann::json FilteredTemplateToJson(const FilteredTemplate& filtered);

const ReasoningTemplate* FindTemplate(std::span<const ReasoningTemplate> templates,
                                      std::string_view id);

struct RankedTemplate {
  std::string template_id;
  double similarity = 0.0;
};

struct RetrievalResult {
  std::string template_id;
  double similarity = 0.0;
  // Remaining templates, best first.
  std::vector<RankedTemplate> ranked_rest;
};

// Cosine nearest neighbour of `query` over the templates' retrieval keys.
// Ties go to the lexicographically smaller id.
RetrievalResult Retrieve(std::string_view query,
                         std::span<const ReasoningTemplate> templates,
                         const Embedder& embedder);

nlohmann::json RetrievalToJson(const RetrievalResult& result);

// Keeps only questions whose required views are all available (or that are
// view-agnostic). Does not modify `tmpl`.
FilteredTemplate FilterQuestions(const ReasoningTemplate& tmpl,
                                 const std::set<std::string>& available_views);

}  // namespace echoreason
