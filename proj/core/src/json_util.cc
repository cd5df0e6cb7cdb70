#include "echoreason/json_util.h"

namespace echoreason {

std::string DumpJson(const nlohmann::json& doc, bool pretty) {
  return doc.dump(pretty ? 2 : -1, ' ', false,
                  nlohmann::json::error_handler_t::replace) +
         "\n";
}

}  // namespace echoreason
