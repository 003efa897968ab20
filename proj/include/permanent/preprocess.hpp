#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "permanent/kernels.hpp"
#include "permanent/matrix.hpp"

namespace permanent {

// ---------------------------------------------------------------------------
// Matching and Dulmage-Mendelsohn filtering
// ---------------------------------------------------------------------------

/// Row/column bipartite graph of a nonzero pattern, adjacency in CRS form.
struct BipartiteGraph {
  int n = 0;
  std::vector<int> rptrs{0};
  std::vector<int> cids;

  template <MatrixScalar T>
  static BipartiteGraph of(const SparsePair<T>& s) {
    return {s.n(), s.crs().rptrs, s.crs().cids};
  }
};

struct Matching {
  std::vector<int> match_of_row; ///< column or -1
  std::vector<int> match_of_col; ///< row or -1

  int size() const;
  bool perfect() const;
};

/// Maximum-cardinality matching (Hopcroft-Karp, O(m sqrt(n))).
Matching max_matching(const BipartiteGraph& g);

/// Strongly connected components of the matching-oriented graph, computed on
/// n nodes where row i and its matched column form one node.
struct SccLabeling {
  std::vector<int> component_of_row; ///< dense ids in [0, count)
  int count = 0;
};

/// The matrix has no perfect matching, hence permanent exactly 0.
struct SingularVerdict {
  int matching_size = 0;
};

template <MatrixScalar T>
struct DmFiltered {
  SparsePair<T> matrix;
  Matching matching;
  SccLabeling labeling;
  std::size_t removed = 0;
};

template <MatrixScalar T>
using DmOutcome = std::variant<DmFiltered<T>, SingularVerdict>;

/// Deletes every nonzero that lies in no perfect matching. The permanent is
/// unchanged; a structurally singular input yields SingularVerdict.
template <MatrixScalar T>
DmOutcome<T> dm_filter(const SparsePair<T>& s);

/// After filtering, rows of one component only meet their own matched
/// columns, so the matrix is a direct sum of these square blocks and its
/// permanent is the product of theirs. Blocks come in component-id order.
template <MatrixScalar T>
std::vector<SparsePair<T>> scc_blocks(const DmFiltered<T>& filtered);

// ---------------------------------------------------------------------------
// Forbert-Marx decomposition
// ---------------------------------------------------------------------------

struct LineChoice {
  bool is_row = true;
  int index = 0;
  int nnz = 0;

  bool operator==(const LineChoice&) const = default;
};

/// A row or column with the fewest nonzeros. Ties go to the lowest index,
/// rows before columns. Requires n >= 1.
template <MatrixScalar T>
LineChoice min_nnz_row_col(const SparsePair<T>& s);

template <MatrixScalar T>
struct DecompTask {
  SparsePair<T> matrix;
  T multiplier = T(1);
  int depth = 0;
};

/// rc holds a single nonzero alpha: drop rc and alpha's column, scale by alpha.
template <MatrixScalar T>
DecompTask<T> d1compress(const DecompTask<T>& task, const LineChoice& rc);

/// rc holds exactly two nonzeros alpha, beta: returns [alpha*e + beta*d | B].
template <MatrixScalar T>
DecompTask<T> d2compress(const DecompTask<T>& task, const LineChoice& rc);

/// rc holds three or four nonzeros. Returns (A', A'') with alpha and beta
/// zeroed in A' and A'' = [alpha*e + beta*d | B], perm(A) = perm(A') + perm(A'').
template <MatrixScalar T>
std::pair<DecompTask<T>, DecompTask<T>> d34compress(const DecompTask<T>& task, const LineChoice& rc);

struct DecompLimits {
  std::uint64_t max_tasks = 10'000'000;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Leaves at or above this density run the dense kernel, others the sparse one.
  double dense_threshold = 0.30;
  /// Lines with at most this many nonzeros are decomposed further.
  int max_decompose_nnz = 4;
  Policy policy = Policy::DD;
  std::uint64_t workers = 1;
  bool aligned = true;
  const std::atomic<bool>* stop = nullptr;
};

struct DecompStats {
  std::uint64_t tasks = 0;
  std::uint64_t d1 = 0;
  std::uint64_t d2 = 0;
  std::uint64_t d34 = 0;
  std::uint64_t zero_pruned = 0;    ///< tasks dropped for an empty row or column
  std::uint64_t trivial_leaves = 0; ///< fully reduced 0x0 tasks
  std::uint64_t dense_leaves = 0;
  std::uint64_t sparse_leaves = 0;
  double leaf_n_sum = 0;
  double leaf_nnz_sum = 0;

  std::uint64_t kernel_leaves() const { return dense_leaves + sparse_leaves; }
  double average_leaf_n() const { return kernel_leaves() ? leaf_n_sum / kernel_leaves() : 0.0; }
  double average_leaf_nnz() const { return kernel_leaves() ? leaf_nnz_sum / kernel_leaves() : 0.0; }
};

template <MatrixScalar T>
struct DecompResult {
  PermanentOf<T> value;
  DecompStats stats;
};

/// Worklist-driven decomposition with kernel dispatch at the leaves.
/// Throws ImpossibleError for a leaf with n > 63 and TimeoutError when the
/// task count or deadline is exceeded.
template <MatrixScalar T>
DecompResult<T> decomp_ryser(const SparsePair<T>& s, const DecompLimits& limits = {});

} // namespace permanent
