#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "permanent/matrix.hpp"
#include "permanent/parallel.hpp"
#include "permanent/preprocess.hpp"

namespace permanent {

enum class RunMode { Serial, Parallel, MultiProcessMerge };
enum class Algorithm { Auto, Dense, Sparse, Decomp, NaiveOracle };

RunMode parse_run_mode(std::string_view name);
Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(RunMode m);
std::string_view to_string(Algorithm a);

struct RunConfig {
  RunMode mode = RunMode::Parallel;
  std::uint64_t workers = 0; ///< 0 = hardware concurrency
  std::uint64_t processes = 1;
  std::optional<std::uint64_t> process_index;
  Algorithm algorithm = Algorithm::Auto;
  Policy policy = Policy::DD;
  bool aligned = true;
  bool dm = false;
  bool fm = false;
  std::uint64_t task_limit = 10'000'000;
  std::optional<double> time_limit_seconds;
  double zero_tolerance = 0.0;
  double dense_threshold = 0.30;
  int max_decompose_nnz = 4;
  int block_log2_count = 6;
  std::string emit_partials; ///< directory; multi-process mode only
  std::string merge;         ///< directory; multi-process mode only
  const std::atomic<bool>* stop = nullptr;

  std::uint64_t effective_workers() const;
};

enum class RunStatus { Ok, Singular, Partial, Timeout, Impossible, Interrupted };
std::string_view to_string(RunStatus s);

struct PlanSummary {
  std::uint64_t total = 0;
  std::uint64_t tau = 0;
  std::uint64_t chunk_size = 0;
  bool aligned = false;
  bool tau_clamped = false;
  std::size_t ranges = 0;
  std::optional<IterationRange> residual;
  std::uint64_t processes = 1;
  std::uint64_t workers_per_process = 1;
};

PlanSummary summarize(const ChunkPlan& plan);

struct RunReport {
  RunStatus status = RunStatus::Ok;
  std::string reason;
  std::optional<PermanentValue> value;
  ScalarKind kind = ScalarKind::real64;
  int n = 0;
  std::size_t nnz = 0;
  double elapsed_seconds = 0.0;
  RunMode mode = RunMode::Parallel;
  Algorithm algorithm = Algorithm::Auto;
  Policy policy = Policy::DD;
  std::uint64_t workers = 1;
  std::vector<std::string> kernels; ///< what actually ran, per block
  std::optional<PlanSummary> plan;

  bool dm_applied = false;
  std::size_t nnz_after_dm = 0;
  int scc_count = 0;
  std::size_t blocks = 1;
  std::optional<DecompStats> decomp;

  /// Relative error against n! a^n when every entry equals a.
  std::optional<double> reference_error;

  std::vector<std::uint32_t> leaves_written;
  std::vector<std::uint32_t> leaves_skipped;
  std::size_t merged_files = 0;

  /// Free-form provenance of the input, e.g. generator and seed.
  std::map<std::string, std::string> input;
};

/// Runs the configured pipeline on one matrix. Timeouts, oversized kernels,
/// structural singularity and interruption are reported through the status;
/// configuration errors throw std::invalid_argument.
RunReport run(const RunConfig& config, const AnySparse& matrix);

/// Reduces the partial files of config.merge; needs no matrix.
RunReport merge_run(const RunConfig& config);

} // namespace permanent
