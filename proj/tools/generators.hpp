#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "permanent/matrix.hpp"

namespace permanent::tools {

struct Generated {
  AnySparse matrix;
  std::map<std::string, std::string> provenance;
};

/// Parses and runs a generator spec:
///   uniform:n,a                 every entry equals a (real)
///   sparse:n,density,seed       entries kept with probability density, values uniform in [-1,1]
///   binary:n,density,seed       integer 0/1 entries, 1 with probability density
///   dense:n,seed                values uniform in [-1,1]
Generated generate(std::string_view spec);

} // namespace permanent::tools
