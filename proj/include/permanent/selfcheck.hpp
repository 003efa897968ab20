#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "permanent/matrix.hpp"
#include "permanent/precision.hpp"

namespace permanent {

/// The 6x6 matrix with 13 nonzeros used in documentation and tests. Its
/// nonzero pattern has four entries that lie in no perfect matching.
SparsePair<double> sample_6x6();

struct SelfcheckHooks {
  /// Replaces the dense Gray-code kernel under test; defaults to perm_nw.
  std::function<DoubleDouble(const DenseMatrix<double>&)> dense_kernel;
  std::uint64_t seed = 20261015;
};

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the property suite at n <= 12 and prints one line per property.
std::vector<CheckOutcome> selfcheck(std::ostream& out, const SelfcheckHooks& hooks = {});

inline bool all_passed(const std::vector<CheckOutcome>& results) {
  for (const auto& r : results) {
    if (!r.passed) {
      return false;
    }
  }
  return true;
}

} // namespace permanent
