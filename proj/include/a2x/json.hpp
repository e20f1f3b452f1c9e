#pragma once

// JSON value conversions shared by mapping files, trigger specs and
// poison manifests. Key order is preserved so serialization is stable.

#include <json.hpp>

#include "a2x/dataio.hpp"

namespace a2x {

nlohmann::ordered_json to_json_value(const Mapping& m);
Mapping mapping_from_json_value(const nlohmann::ordered_json& j);

}  // namespace a2x
