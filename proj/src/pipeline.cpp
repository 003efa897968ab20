#include "permanent/pipeline.hpp"

#include <chrono>
#include <stdexcept>
#include <thread>

#include "permanent/errors.hpp"
#include "permanent/kernels.hpp"
#include "permanent/partial_io.hpp"

namespace permanent {

RunMode parse_run_mode(std::string_view name) {
  if (name == "serial") return RunMode::Serial;
  if (name == "parallel") return RunMode::Parallel;
  if (name == "multi-process-merge" || name == "multi-process") return RunMode::MultiProcessMerge;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "auto") return Algorithm::Auto;
  if (name == "dense") return Algorithm::Dense;
  if (name == "sparse") return Algorithm::Sparse;
  if (name == "decomp") return Algorithm::Decomp;
  if (name == "naive-oracle" || name == "naive") return Algorithm::NaiveOracle;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(RunMode m) {
  switch (m) {
  case RunMode::Serial:
    return "serial";
  case RunMode::Parallel:
    return "parallel";
  case RunMode::MultiProcessMerge:
    return "multi-process-merge";
  }
  return "unknown";
}

std::string_view to_string(Algorithm a) {
  switch (a) {
  case Algorithm::Auto:
    return "auto";
  case Algorithm::Dense:
    return "dense";
  case Algorithm::Sparse:
    return "sparse";
  case Algorithm::Decomp:
    return "decomp";
  case Algorithm::NaiveOracle:
    return "naive-oracle";
  }
  return "unknown";
}

std::string_view to_string(RunStatus s) {
  switch (s) {
  case RunStatus::Ok:
    return "ok";
  case RunStatus::Singular:
    return "singular";
  case RunStatus::Partial:
    return "partial";
  case RunStatus::Timeout:
    return "timeout";
  case RunStatus::Impossible:
    return "impossible";
  case RunStatus::Interrupted:
    return "interrupted";
  }
  return "unknown";
}

std::uint64_t RunConfig::effective_workers() const {
  if (mode == RunMode::Serial) {
    return 1;
  }
  if (workers > 0) {
    return workers;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

PlanSummary summarize(const ChunkPlan& plan) {
  PlanSummary s;
  s.total = plan.total;
  s.tau = plan.tau;
  s.chunk_size = plan.chunk_size;
  s.aligned = plan.aligned;
  s.tau_clamped = plan.tau_clamped;
  s.ranges = plan.ranges.size();
  s.residual = plan.residual;
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
  const RunConfig& config;
  RunReport& report;
  std::optional<Clock::time_point> deadline;

  EngineOptions engine() const {
    EngineOptions o;
    o.policy = config.policy;
    o.block_log2_count = config.block_log2_count;
    o.stop = config.stop;
    o.deadline = deadline;
    o.threads = config.effective_workers();
    return o;
  }
};

template <MatrixScalar T>
PermanentOf<T> from_value(const PermanentValue& v) {
  return std::get<PermanentOf<T>>(v);
}

template <MatrixScalar T>
PermanentOf<T> multiply(const PermanentOf<T>& a, const PermanentOf<T>& b) {
  if constexpr (std::is_same_v<T, double>) {
    return dd_mul(a, b);
  } else {
    return a * b;
  }
}

void require_kernel_dim(int n) {
  if (n > kMaxKernelDim) {
    throw ImpossibleError("a " + std::to_string(n) + "x" + std::to_string(n) +
                          " kernel is required; kernels accept n <= " + std::to_string(kMaxKernelDim));
  }
}

template <MatrixScalar T>
PermanentOf<T> run_kernel(const SparsePair<T>& s, bool dense, Context& ctx) {
  require_kernel_dim(s.n());
  const bool serial = ctx.config.mode == RunMode::Serial;
  if (serial) {
    ctx.report.kernels.push_back(dense ? "dense-serial" : "sparse-serial");
    return dense ? perm_nw(sparse_to_dense(s), ctx.config.policy) : perm_spa(s, ctx.config.policy);
  }
  ctx.report.kernels.push_back(dense ? "dense-parallel" : "sparse-parallel");
  const ParallelRun r = dense ? perm_parallel(sparse_to_dense(s), ctx.config.effective_workers(),
                                              ctx.config.aligned, ctx.engine())
                              : perm_parallel(s, ctx.config.effective_workers(), ctx.config.aligned, ctx.engine());
  // Several blocks may run; the report keeps the plan of the largest.
  if (!ctx.report.plan || r.plan.total > ctx.report.plan->total) {
    ctx.report.plan = summarize(r.plan);
  }
  return from_value<T>(r.value);
}

template <MatrixScalar T>
PermanentOf<T> compute_block(const SparsePair<T>& s, Context& ctx) {
  if (s.n() == 0) {
    return PermanentOf<T>(1);
  }
  const RunConfig& c = ctx.config;
  const bool decompose = c.algorithm == Algorithm::Decomp || (c.fm && c.algorithm != Algorithm::NaiveOracle);
  if (decompose) {
    DecompLimits limits;
    limits.max_tasks = c.task_limit;
    limits.deadline = ctx.deadline;
    limits.policy = c.policy;
    limits.workers = c.effective_workers();
    limits.aligned = c.aligned;
    limits.stop = c.stop;
    limits.max_decompose_nnz = c.max_decompose_nnz;
    // An explicit kernel choice pins the leaf dispatch.
    limits.dense_threshold =
        c.algorithm == Algorithm::Dense ? 0.0 : (c.algorithm == Algorithm::Sparse ? 2.0 : c.dense_threshold);
    ctx.report.kernels.push_back("decomp");
    DecompResult<T> r = decomp_ryser(s, limits);
    if (!ctx.report.decomp) {
      ctx.report.decomp = DecompStats{};
    }
    DecompStats& acc = *ctx.report.decomp;
    acc.tasks += r.stats.tasks;
    acc.d1 += r.stats.d1;
    acc.d2 += r.stats.d2;
    acc.d34 += r.stats.d34;
    acc.zero_pruned += r.stats.zero_pruned;
    acc.trivial_leaves += r.stats.trivial_leaves;
    acc.dense_leaves += r.stats.dense_leaves;
    acc.sparse_leaves += r.stats.sparse_leaves;
    acc.leaf_n_sum += r.stats.leaf_n_sum;
    acc.leaf_nnz_sum += r.stats.leaf_nnz_sum;
    return r.value;
  }
  switch (c.algorithm) {
  case Algorithm::NaiveOracle:
    require_kernel_dim(s.n());
    ctx.report.kernels.push_back("naive-oracle");
    return PermanentOf<T>(perm_naive(sparse_to_dense(s)));
  case Algorithm::Dense:
    return run_kernel(s, true, ctx);
  case Algorithm::Sparse:
    return run_kernel(s, false, ctx);
  default:
    return run_kernel(s, density(s) >= c.dense_threshold, ctx);
  }
}

template <MatrixScalar T>
std::optional<double> uniform_reference_error(const SparsePair<T>& s, const PermanentOf<T>& value) {
  if constexpr (std::is_same_v<T, double>) {
    const auto n = static_cast<std::size_t>(s.n());
    if (n == 0 || n > static_cast<std::size_t>(kMaxKernelDim) || s.nnz() != n * n) {
      return std::nullopt;
    }
    const auto& vals = s.crs().vals;
    if (std::adjacent_find(vals.begin(), vals.end(), std::not_equal_to<>()) != vals.end()) {
      return std::nullopt;
    }
    return relative_error(value, reference_permanent(s.n(), vals.front())).value;
  } else {
    (void)s;
    (void)value;
    return std::nullopt;
  }
}

template <MatrixScalar T>
void emit_partials(const SparsePair<T>& s, Context& ctx) {
  const RunConfig& c = ctx.config;
  if (c.dm || c.fm || c.algorithm == Algorithm::Decomp || c.algorithm == Algorithm::NaiveOracle) {
    throw std::invalid_argument("partial emission supports the dense and sparse kernels without preprocessing");
  }
  require_kernel_dim(s.n());
  if (s.n() < 1) {
    throw std::invalid_argument("partial emission needs n >= 1");
  }
  const std::uint64_t workers = c.workers > 0 ? c.workers : 1;
  const HierarchyPlan h = plan_hierarchy(s.n(), c.processes, workers, c.aligned);
  const bool dense = c.algorithm == Algorithm::Dense ||
                     (c.algorithm == Algorithm::Auto && density(s) >= c.dense_threshold);

  PartialHeader header;
  header.n = s.n();
  header.kind = kind_of<T>();
  header.policy = c.policy;
  header.fingerprint = fingerprint(s);
  header.processes = c.processes;
  header.workers_per_process = workers;
  header.aligned = c.aligned;
  header.block_log2_count = c.block_log2_count;
  header.leaves = h.flat.leaves().size();
  header.p0 = initial_term(s, c.policy);

  PlanSummary summary = summarize(h.flat);
  summary.processes = c.processes;
  summary.workers_per_process = workers;
  ctx.report.plan = summary;
  ctx.report.kernels.push_back(dense ? "dense-emit" : "sparse-emit");

  std::vector<std::uint64_t> targets;
  if (c.process_index) {
    if (*c.process_index >= c.processes) {
      throw std::invalid_argument("process index out of range");
    }
    targets.push_back(*c.process_index);
  } else {
    for (std::uint64_t p = 0; p < c.processes; ++p) {
      targets.push_back(p);
    }
  }
  const std::optional<DenseMatrix<T>> dense_form =
      dense ? std::optional<DenseMatrix<T>>(sparse_to_dense(s)) : std::nullopt;
  for (std::uint64_t p : targets) {
    PartialWriter writer(partial_path(c.emit_partials, p), header);
    std::vector<Leaf> todo;
    for (const Leaf& leaf : h.process_leaves[p]) {
      const auto& done = writer.completed();
      if (std::find(done.begin(), done.end(), leaf.worker_id) != done.end()) {
        ctx.report.leaves_skipped.push_back(leaf.worker_id);
      } else {
        todo.push_back(leaf);
      }
    }
    EngineOptions opts = ctx.engine();
    opts.threads = workers;
    opts.on_complete = [&](const PartialResult& r) {
      writer.append(r);
      ctx.report.leaves_written.push_back(r.worker_id);
    };
    if (dense_form) {
      run_leaves(*dense_form, todo, opts);
    } else {
      run_leaves(s, todo, opts);
    }
  }
  ctx.report.status = RunStatus::Partial;
}

template <MatrixScalar T>
void run_typed(const SparsePair<T>& s, Context& ctx) {
  const RunConfig& c = ctx.config;
  RunReport& report = ctx.report;
  report.kind = kind_of<T>();
  report.n = s.n();
  report.nnz = s.nnz();

  if (c.mode == RunMode::MultiProcessMerge) {
    if (!c.emit_partials.empty()) {
      emit_partials(s, ctx);
      return;
    }
    throw std::invalid_argument("multi-process-merge mode needs an emit or merge directory");
  }
  if (s.n() == 0) {
    report.value = PermanentOf<T>(1);
    report.reason = "empty matrix; permanent defined as 1";
    return;
  }

  std::vector<SparsePair<T>> blocks;
  if (c.dm) {
    report.dm_applied = true;
    auto outcome = dm_filter(s);
    if (const auto* singular = std::get_if<SingularVerdict>(&outcome)) {
      report.status = RunStatus::Singular;
      report.value = PermanentOf<T>(0);
      report.nnz_after_dm = s.nnz();
      report.reason = "no perfect matching (maximum matching size " + std::to_string(singular->matching_size) +
                      " of " + std::to_string(s.n()) + ")";
      return;
    }
    auto& filtered = std::get<DmFiltered<T>>(outcome);
    report.nnz_after_dm = filtered.matrix.nnz();
    report.scc_count = filtered.labeling.count;
    blocks = scc_blocks(filtered);
  } else {
    blocks.push_back(s);
  }
  report.blocks = blocks.size();

  PermanentOf<T> value(1);
  for (const auto& block : blocks) {
    value = multiply<T>(value, compute_block(block, ctx));
  }
  report.value = value;
  report.reference_error = uniform_reference_error(s, value);
}

template <class F>
void guarded(RunReport& report, F&& f) {
  try {
    f();
  } catch (const TimeoutError& e) {
    report.status = RunStatus::Timeout;
    report.reason = e.what();
    report.value.reset();
  } catch (const ImpossibleError& e) {
    report.status = RunStatus::Impossible;
    report.reason = e.what();
    report.value.reset();
  } catch (const InterruptedError& e) {
    report.status = RunStatus::Interrupted;
    report.reason = e.what();
    report.value.reset();
  }
}

} // namespace

RunReport run(const RunConfig& config, const AnySparse& matrix) {
  const auto start = Clock::now();
  RunReport report;
  report.mode = config.mode;
  report.algorithm = config.algorithm;
  report.policy = config.policy;
  report.workers = config.effective_workers();
  Context ctx{config, report, std::nullopt};
  if (config.time_limit_seconds) {
    if (*config.time_limit_seconds <= 0) {
      throw std::invalid_argument("time limit must be positive");
    }
    ctx.deadline = start + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(*config.time_limit_seconds));
  }
  guarded(report, [&] { std::visit([&](const auto& s) { run_typed(s, ctx); }, matrix); });
  report.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

RunReport merge_run(const RunConfig& config) {
  const auto start = Clock::now();
  RunReport report;
  report.mode = RunMode::MultiProcessMerge;
  report.algorithm = config.algorithm;
  const MergeOutcome m = merge_partials(config.merge);
  report.policy = m.header.policy;
  report.kind = m.header.kind;
  report.n = m.header.n;
  report.value = m.value;
  report.merged_files = m.files;
  report.kernels.push_back("merge");
  const HierarchyPlan h = plan_hierarchy(m.header.n, m.header.processes, m.header.workers_per_process,
                                         m.header.aligned);
  PlanSummary summary = summarize(h.flat);
  summary.processes = m.header.processes;
  summary.workers_per_process = m.header.workers_per_process;
  report.plan = summary;
  report.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

} // namespace permanent
