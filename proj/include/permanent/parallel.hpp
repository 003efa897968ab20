#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "permanent/kernels.hpp"
#include "permanent/matrix.hpp"
#include "permanent/precision.hpp"

namespace permanent {

/// Inclusive range of global Gray-code iteration indices.
struct IterationRange {
  std::uint64_t start = 1;
  std::uint64_t end = 0;

  std::uint64_t size() const noexcept { return end >= start ? end - start + 1 : 0; }
  bool empty() const noexcept { return end < start; }
  bool operator==(const IterationRange&) const = default;
};

/// One unit of work: a worker id and the range it owns.
struct Leaf {
  std::uint32_t worker_id = 0;
  IterationRange range;
};

/// 2^(n-1) - 1, the number of loop iterations after the g = 0 term.
std::uint64_t total_iterations(int n);

struct ChunkPlan {
  int n = 0;
  std::uint64_t total = 0;
  std::uint64_t tau_requested = 0;
  std::uint64_t tau = 0;
  std::uint64_t chunk_size = 0;
  bool aligned = false;
  bool tau_clamped = false;
  std::vector<IterationRange> ranges;
  /// Leftover [tau*chunk_size + 1, total] of an aligned plan, run by one worker.
  std::optional<IterationRange> residual;

  /// Ranges followed by the residual, numbered 0, 1, ...
  std::vector<Leaf> leaves() const;
};

/// Splits [1, total] among tau workers. Unaligned chunks hold ceil(total/tau)
/// iterations; aligned chunks round that down to a power of two and leave a
/// residual range. tau > total is clamped. Requires 1 <= n <= 63, tau >= 1.
ChunkPlan plan_chunks(int n, std::uint64_t tau, bool aligned);

/// Same layout with an explicit chunk size; tau * chunk_size may not exceed
/// total. Any remainder becomes the residual.
ChunkPlan plan_with_chunk(int n, std::uint64_t tau, std::uint64_t chunk_size);

/// Two-level plan: P processes with W workers each. The flat plan holds P*W
/// leaves; process p owns leaves [p*W, (p+1)*W) and the residual, if any, is
/// appended to the last process.
struct HierarchyPlan {
  std::uint64_t processes = 0;
  std::uint64_t workers_per_process = 0;
  ChunkPlan flat;
  std::vector<std::vector<Leaf>> process_leaves;

  /// Contiguous span covered by process p.
  IterationRange superrange(std::size_t p) const;
};

/// Throws std::invalid_argument when P or W is zero or P*W exceeds total.
HierarchyPlan plan_hierarchy(int n, std::uint64_t processes, std::uint64_t workers_per_process, bool aligned);

/// For each local index l < chunk_size - 1, the number of distinct changed
/// columns across the plan's ranges at that index. The residual is excluded.
std::vector<int> cbl_alignment_report(const ChunkPlan& plan, std::uint64_t upto);

// ---------------------------------------------------------------------------
// Partials and reduction
// ---------------------------------------------------------------------------

struct ExactComplex {
  ExactSum re;
  ExactSum im;

  bool operator==(const ExactComplex&) const = default;
};

/// Exact value of a worker's signed subset-product sum. Real work is
/// flushed exactly from the policy accumulators, integer work is exact.
using PartialValue = std::variant<ExactSum, ExactComplex, BigInt>;

struct PartialResult {
  std::uint32_t worker_id = 0;
  IterationRange range;
  std::uint64_t iterations_done = 0;
  PartialValue value;
};

/// Value of a finished permanent computation.
using PermanentValue = std::variant<DoubleDouble, Complex, BigInt>;

/// Signed sum of p0 and all partials, doubled and sign-corrected.
///
/// The partials must carry ids 0..k-1 exactly once and their ranges must
/// tile [1, total_iterations(n)]; otherwise StructuralError. Input order does
/// not matter.
PermanentValue reduce(std::vector<PartialResult> partials, const PartialValue& p0, int n);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct EngineOptions {
  Policy policy = Policy::DD;
  /// The iteration space is cut into 2^block_log2_count canonical blocks;
  /// each block starts from a freshly jumped-in x and a fresh accumulator.
  /// Plans whose ranges start and end on block boundaries give bit-identical
  /// results whatever the worker count.
  int block_log2_count = 6;
  std::uint64_t threads = 0; ///< 0 = one per leaf
  const std::atomic<bool>* stop = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  /// Called once per finished leaf, serialized by the engine.
  std::function<void(const PartialResult&)> on_complete;
};

/// x_init + sum of the columns selected by Gray_{g_prev}, evaluated in
/// binary64 (complex128). For integer matrices the returned lanes are 2x.
template <MatrixScalar T>
std::vector<T> init_x_at(const DenseMatrix<T>& a, std::uint64_t g_prev);

/// x after serially walking g = 1..g from x_init, for cross-checks.
template <MatrixScalar T>
std::vector<T> walk_x_to(const DenseMatrix<T>& a, std::uint64_t g);

/// The g = 0 term, prod_i x_init[i].
template <MatrixScalar T>
PartialValue initial_term(const DenseMatrix<T>& a, Policy policy = Policy::DD);
template <MatrixScalar T>
PartialValue initial_term(const SparsePair<T>& s, Policy policy = Policy::DD);

template <MatrixScalar T>
PartialResult run_range(const DenseMatrix<T>& a, const Leaf& leaf, const EngineOptions& options = {});
template <MatrixScalar T>
PartialResult run_range(const SparsePair<T>& s, const Leaf& leaf, const EngineOptions& options = {});

/// Runs the given leaves on worker threads. Results come back in leaf order.
template <MatrixScalar T>
std::vector<PartialResult> run_leaves(const DenseMatrix<T>& a, const std::vector<Leaf>& leaves,
                                      const EngineOptions& options = {});
template <MatrixScalar T>
std::vector<PartialResult> run_leaves(const SparsePair<T>& s, const std::vector<Leaf>& leaves,
                                      const EngineOptions& options = {});

struct ParallelRun {
  PermanentValue value;
  ChunkPlan plan;
};

/// Plans, runs and reduces in one call.
template <MatrixScalar T>
ParallelRun perm_parallel(const DenseMatrix<T>& a, std::uint64_t tau, bool aligned,
                          const EngineOptions& options = {});
template <MatrixScalar T>
ParallelRun perm_parallel(const SparsePair<T>& s, std::uint64_t tau, bool aligned,
                          const EngineOptions& options = {});

/// Stable identity of a matrix's contents, recorded in partial files so a
/// merge can refuse partials of a different input.
template <MatrixScalar T>
std::uint64_t fingerprint(const SparsePair<T>& s);

} // namespace permanent
