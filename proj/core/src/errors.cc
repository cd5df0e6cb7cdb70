#include "echoreason/errors.h"

namespace echoreason {

SchemaError::SchemaError(const std::string& location,
                         const std::string& field_path,
                         const std::string& message)
    : ValidationError(location + ": " +
                      (field_path.empty() ? std::string("<root>") : field_path) +
                      ": " + message),
      location_(location),
      field_path_(field_path) {}

}  // namespace echoreason
