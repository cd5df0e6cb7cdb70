#pragma once

#include <stdexcept>
#include <string>

namespace echoreason {

// Coarse error classes; the CLI maps them onto exit codes.
enum class ErrorCategory {
  kValidation,  // malformed input files, schema and invariant violations
  kVerifier,    // judge / scorer / embedder / policy failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::kValidation, what) {}
};

class VerifierError : public Error {
 public:
  explicit VerifierError(const std::string& what)
      : Error(ErrorCategory::kVerifier, what) {}
};

// Template files.
class SchemaError : public ValidationError {
 public:
  SchemaError(const std::string& location, const std::string& field_path,
              const std::string& message);

  const std::string& location() const { return location_; }
  const std::string& field_path() const { return field_path_; }

 private:
  std::string location_;
  std::string field_path_;
};

class DuplicateIdError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class VocabularyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Numeric preconditions.
class InvalidTemplate : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GroupTooSmall : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LengthMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NoScoredSteps : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Verifiers and transport.
class EmptyQuestionSet : public VerifierError {
 public:
  using VerifierError::VerifierError;
};

class MissingCaption : public VerifierError {
 public:
  using VerifierError::VerifierError;
};

class TransportError : public VerifierError {
 public:
  using VerifierError::VerifierError;
};

class ProtocolError : public VerifierError {
 public:
  using VerifierError::VerifierError;
};

class RangeError : public VerifierError {
 public:
  using VerifierError::VerifierError;
};

class PolicyError : public VerifierError {
 public:
  using VerifierError::VerifierError;
};

}  // namespace echoreason
