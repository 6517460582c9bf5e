#pragma once

#include <nlohmann/json.hpp>

namespace bigmas {

// All documents (workspace partitions, payloads, schemas, trace records) are
// plain JSON. nlohmann::json keeps object keys sorted, so dump() of equal
// documents is byte-identical; that is the canonical form used throughout.
using Json = nlohmann::json;

inline bool json_is_empty_value(const Json& j) {
    if (j.is_null()) return true;
    if (j.is_string()) return j.get_ref<const std::string&>().empty();
    if (j.is_array() || j.is_object()) return j.empty();
    return false;
}

} // namespace bigmas
