#pragma once

#include <string>

#include <json.hpp>

#include "permanent/pipeline.hpp"

namespace permanent {

/// %.17g decimal and %a hexadecimal forms of a double.
std::string decimal(double v);
std::string hexfloat(double v);

/// Value object: decimal and hex strings, double-double parts for real
/// results, exact digits for integer results.
nlohmann::json value_json(const PermanentValue& v);

nlohmann::json to_json(const RunReport& report);
std::string to_text(const RunReport& report);

} // namespace permanent
