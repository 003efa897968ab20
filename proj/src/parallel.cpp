#include "permanent/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <exception>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "permanent/errors.hpp"
#include "prepare.hpp"

namespace permanent {

std::uint64_t total_iterations(int n) {
  if (n < 1 || n > kMaxKernelDim) {
    throw DomainError("n must lie in [1, 63]");
  }
  return detail::total_iterations(n);
}

std::vector<Leaf> ChunkPlan::leaves() const {
  std::vector<Leaf> out;
  std::uint32_t id = 0;
  for (const auto& r : ranges) {
    out.push_back({id++, r});
  }
  if (residual) {
    out.push_back({id, *residual});
  }
  return out;
}

namespace {

ChunkPlan make_plan(int n, std::uint64_t tau_requested, std::uint64_t tau, std::uint64_t chunk, bool aligned) {
  ChunkPlan plan;
  plan.n = n;
  plan.total = detail::total_iterations(n);
  plan.tau_requested = tau_requested;
  plan.tau = tau;
  plan.chunk_size = chunk;
  plan.aligned = aligned;
  plan.tau_clamped = tau != tau_requested;
  for (std::uint64_t k = 0; k < tau; ++k) {
    IterationRange r{k * chunk + 1, std::min((k + 1) * chunk, plan.total)};
    if (!r.empty()) {
      plan.ranges.push_back(r);
    }
  }
  const std::uint64_t covered = tau * chunk;
  if (covered < plan.total) {
    plan.residual = IterationRange{covered + 1, plan.total};
  }
  return plan;
}

} // namespace

ChunkPlan plan_chunks(int n, std::uint64_t tau, bool aligned) {
  const std::uint64_t total = total_iterations(n);
  if (tau < 1) {
    throw std::invalid_argument("worker count must be at least 1");
  }
  const std::uint64_t t = std::min(tau, total);
  if (t == 0) {
    return make_plan(n, tau, 0, 0, aligned);
  }
  const std::uint64_t even = (total + t - 1) / t;
  const std::uint64_t chunk = aligned ? std::bit_floor(even) : even;
  return make_plan(n, tau, t, chunk, aligned);
}

ChunkPlan plan_with_chunk(int n, std::uint64_t tau, std::uint64_t chunk_size) {
  const std::uint64_t total = total_iterations(n);
  if (tau < 1 || chunk_size < 1) {
    throw std::invalid_argument("worker count and chunk size must be positive");
  }
  if (chunk_size > total / tau) {
    throw std::invalid_argument("tau * chunk_size exceeds the iteration count");
  }
  return make_plan(n, tau, tau, chunk_size, std::has_single_bit(chunk_size));
}

IterationRange HierarchyPlan::superrange(std::size_t p) const {
  const auto& leaves = process_leaves.at(p);
  if (leaves.empty()) {
    return {};
  }
  return {leaves.front().range.start, leaves.back().range.end};
}

HierarchyPlan plan_hierarchy(int n, std::uint64_t processes, std::uint64_t workers_per_process, bool aligned) {
  const std::uint64_t total = total_iterations(n);
  if (processes < 1 || workers_per_process < 1) {
    throw std::invalid_argument("process and worker counts must be positive");
  }
  if (processes > total / workers_per_process) {
    throw std::invalid_argument("processes * workers exceeds the iteration count " + std::to_string(total));
  }
  HierarchyPlan h;
  h.processes = processes;
  h.workers_per_process = workers_per_process;
  h.flat = plan_chunks(n, processes * workers_per_process, aligned);
  h.process_leaves.resize(processes);
  for (const Leaf& leaf : h.flat.leaves()) {
    const std::uint64_t p = std::min<std::uint64_t>(leaf.worker_id / workers_per_process, processes - 1);
    h.process_leaves[p].push_back(leaf);
  }
  return h;
}

std::vector<int> cbl_alignment_report(const ChunkPlan& plan, std::uint64_t upto) {
  std::vector<int> counts;
  if (plan.chunk_size < 2) {
    return counts;
  }
  const std::uint64_t limit = std::min(upto, plan.chunk_size - 1);
  for (std::uint64_t l = 0; l < limit; ++l) {
    std::set<int> columns;
    for (const auto& r : plan.ranges) {
      if (l < r.size()) {
        columns.insert(changed_bit(r.start + l).j);
      }
    }
    counts.push_back(static_cast<int>(columns.size()));
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Reduction
// ---------------------------------------------------------------------------

PermanentValue reduce(std::vector<PartialResult> partials, const PartialValue& p0, int n) {
  const std::uint64_t total = total_iterations(n);
  std::sort(partials.begin(), partials.end(),
            [](const PartialResult& a, const PartialResult& b) { return a.worker_id < b.worker_id; });
  for (std::size_t k = 0; k < partials.size(); ++k) {
    if (partials[k].worker_id != k) {
      throw StructuralError("partial results must carry worker ids 0.." + std::to_string(partials.size() - 1) +
                            " exactly once");
    }
    if (partials[k].value.index() != p0.index()) {
      throw StructuralError("partial result kinds do not match");
    }
    if (partials[k].iterations_done != partials[k].range.size()) {
      throw StructuralError("worker " + std::to_string(k) + " is incomplete");
    }
  }
  std::vector<IterationRange> ranges;
  for (const auto& p : partials) {
    ranges.push_back(p.range);
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const IterationRange& a, const IterationRange& b) { return a.start < b.start; });
  std::uint64_t next = 1;
  for (const auto& r : ranges) {
    if (r.empty() || r.start != next) {
      throw StructuralError("partial ranges do not tile the iteration space");
    }
    next = r.end + 1;
  }
  if (next != total + 1) {
    throw StructuralError("partial ranges do not cover the iteration space");
  }

  const bool negate = n % 2 == 0;
  return std::visit(
      [&](const auto& first) -> PermanentValue {
        using V = std::decay_t<decltype(first)>;
        V sum = first;
        for (const auto& p : partials) {
          const V& v = std::get<V>(p.value);
          if constexpr (std::is_same_v<V, ExactSum>) {
            sum.add(v);
          } else if constexpr (std::is_same_v<V, ExactComplex>) {
            sum.re.add(v.re);
            sum.im.add(v.im);
          } else {
            sum += v;
          }
        }
        if constexpr (std::is_same_v<V, ExactSum>) {
          sum.scale_pow2(1);
          if (negate) {
            sum.negate();
          }
          return sum.to_dd();
        } else if constexpr (std::is_same_v<V, ExactComplex>) {
          for (ExactSum* part : {&sum.re, &sum.im}) {
            part->scale_pow2(1);
            if (negate) {
              part->negate();
            }
          }
          return Complex(sum.re.to_double(), sum.im.to_double());
        } else {
          return detail::finish_integer(sum, n);
        }
      },
      p0);
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

template <class Mode>
PartialValue empty_partial() {
  if constexpr (std::is_same_v<Mode, detail::ComplexMode>) {
    return ExactComplex{};
  } else if constexpr (std::is_same_v<typename Mode::Entry, double>) {
    return ExactSum{};
  } else {
    return BigInt{};
  }
}

template <class Mode, class Value>
void flush(const Value& acc, PartialValue& out) {
  if constexpr (std::is_same_v<Mode, detail::ComplexMode>) {
    auto& c = std::get<ExactComplex>(out);
    c.re.add(acc.real());
    c.im.add(acc.imag());
  } else if constexpr (std::is_same_v<typename Mode::Entry, double>) {
    std::get<ExactSum>(out).add(acc);
  } else {
    std::get<BigInt>(out) += detail::to_bigint(acc);
  }
}

template <class Mode>
void flush_partial(const typename Mode::Partial& acc, PartialValue& out) {
  if constexpr (std::is_same_v<typename Mode::Partial, KahanAccumulator>) {
    auto& s = std::get<ExactSum>(out);
    s.add(acc.sum);
    s.add(acc.compensation);
  } else {
    flush<Mode>(acc, out);
  }
}

/// Prepared state for one (matrix, mode) pair; shared read-only by workers.
template <class Mode, class Cols>
class Runner {
public:
  Runner(Cols cols, std::vector<typename Mode::Lane> x_init, int block_log2_count)
      : cols_(std::move(cols)), x_init_(std::move(x_init)) {
    const int n = cols_.n;
    const int shift = std::max(0, n - 1 - std::max(0, block_log2_count));
    block_ = std::uint64_t{1} << shift;
  }

  PartialValue initial_term() const {
    PartialValue out = empty_partial<Mode>();
    flush<Mode>(detail::product<Mode>(std::span<const typename Mode::Lane>(x_init_)), out);
    return out;
  }

  PartialResult run(const Leaf& leaf, const detail::CancelToken& cancel) const {
    PartialResult result;
    result.worker_id = leaf.worker_id;
    result.range = leaf.range;
    result.value = empty_partial<Mode>();
    const std::uint64_t total = detail::total_iterations(cols_.n);
    if (leaf.range.empty()) {
      return result;
    }
    if (leaf.range.start < 1 || leaf.range.end > total) {
      throw std::out_of_range("iteration range outside [1, " + std::to_string(total) + "]");
    }
    std::vector<typename Mode::Lane> x;
    std::uint64_t cur = leaf.range.start;
    while (cur <= leaf.range.end) {
      cancel.check();
      const std::uint64_t block_end = ((cur - 1) / block_ + 1) * block_;
      const std::uint64_t piece_end = std::min(leaf.range.end, block_end);
      x = x_init_;
      detail::add_gray_columns<Mode>(cols_, cur - 1, std::span<typename Mode::Lane>(x));
      typename Mode::Partial acc{};
      detail::walk<Mode>(cols_, std::span<typename Mode::Lane>(x), cur, piece_end, acc, cancel);
      flush_partial<Mode>(acc, result.value);
      result.iterations_done += piece_end - cur + 1;
      cur = piece_end + 1;
    }
    return result;
  }

private:
  Cols cols_;
  std::vector<typename Mode::Lane> x_init_;
  std::uint64_t block_ = 1;
};

template <class Mode, MatrixScalar T>
auto make_runner(const DenseMatrix<T>& a, int block_log2_count) {
  return Runner<Mode, detail::DenseColumns<typename Mode::Entry>>(detail::dense_columns<Mode>(a),
                                                                    detail::initial_lanes<Mode>(a), block_log2_count);
}

template <class Mode, MatrixScalar T>
auto make_runner(const SparsePair<T>& s, int block_log2_count) {
  return Runner<Mode, detail::SparseColumns<typename Mode::Entry>>(detail::sparse_columns<Mode>(s),
                                                                     detail::initial_lanes<Mode>(s), block_log2_count);
}

template <class M>
void check_dimension(const M& m) {
  if (m.n() < 1) {
    throw DomainError("the permanent kernels need n >= 1");
  }
  if (m.n() > kMaxKernelDim) {
    throw ImpossibleError("kernel dimension " + std::to_string(m.n()) + " exceeds " + std::to_string(kMaxKernelDim));
  }
}

detail::CancelToken token_of(const EngineOptions& options) { return {options.stop, options.deadline}; }

template <class RunnerT>
std::vector<PartialResult> execute(const RunnerT& runner, const std::vector<Leaf>& leaves,
                                   const EngineOptions& options) {
  std::vector<PartialResult> results(leaves.size());
  if (leaves.empty()) {
    return results;
  }
  const detail::CancelToken cancel = token_of(options);
  std::size_t threads = options.threads == 0 ? leaves.size() : static_cast<std::size_t>(options.threads);
  threads = std::clamp<std::size_t>(threads, 1, std::min<std::size_t>(leaves.size(), 1024));

  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= leaves.size()) {
        return;
      }
      try {
        results[k] = runner.run(leaves[k], cancel);
        if (options.on_complete) {
          std::lock_guard lock(mutex);
          options.on_complete(results[k]);
        }
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next.store(leaves.size());
        return;
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(work);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return results;
}

template <MatrixScalar T>
using BasicMode = std::conditional_t<std::is_same_v<T, double>, detail::PlainMode,
                                     std::conditional_t<std::is_same_v<T, Complex>, detail::ComplexMode,
                                                        detail::WideIntegerMode>>;

// FNV-1a over a byte stream.
class Fnv {
public:
  void bytes(const void* p, std::size_t size) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ = (hash_ ^ c[i]) * 0x100000001b3ULL;
    }
  }
  template <class V>
  void value(const V& v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t hash() const { return hash_; }

private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

} // namespace

template <MatrixScalar T>
std::vector<T> init_x_at(const DenseMatrix<T>& a, std::uint64_t g_prev) {
  if (g_prev > detail::total_iterations(a.n())) {
    throw DomainError("g_prev must be below 2^(n-1)");
  }
  using Mode = BasicMode<T>;
  auto x = detail::initial_lanes<Mode>(a);
  detail::add_gray_columns<Mode>(detail::dense_columns<Mode>(a), g_prev, std::span<typename Mode::Lane>(x));
  return x;
}

template <MatrixScalar T>
std::vector<T> walk_x_to(const DenseMatrix<T>& a, std::uint64_t g) {
  if (g > detail::total_iterations(a.n())) {
    throw DomainError("g must be below 2^(n-1)");
  }
  using Mode = BasicMode<T>;
  auto x = detail::initial_lanes<Mode>(a);
  typename Mode::Partial acc{};
  if (g >= 1) {
    detail::walk<Mode>(detail::dense_columns<Mode>(a), std::span<typename Mode::Lane>(x), 1, g, acc,
                       detail::CancelToken{});
  }
  return x;
}

template <MatrixScalar T>
PartialValue initial_term(const DenseMatrix<T>& a, Policy policy) {
  return detail::with_mode<T>(a, policy, [&](auto mode) -> PartialValue {
    return make_runner<decltype(mode)>(a, 0).initial_term();
  });
}

template <MatrixScalar T>
PartialValue initial_term(const SparsePair<T>& s, Policy policy) {
  check_dimension(s);
  return detail::with_mode<T>(s, policy, [&](auto mode) -> PartialValue {
    return make_runner<decltype(mode)>(s, 0).initial_term();
  });
}

template <MatrixScalar T>
PartialResult run_range(const DenseMatrix<T>& a, const Leaf& leaf, const EngineOptions& options) {
  return detail::with_mode<T>(a, options.policy, [&](auto mode) -> PartialResult {
    return make_runner<decltype(mode)>(a, options.block_log2_count).run(leaf, token_of(options));
  });
}

template <MatrixScalar T>
PartialResult run_range(const SparsePair<T>& s, const Leaf& leaf, const EngineOptions& options) {
  check_dimension(s);
  return detail::with_mode<T>(s, options.policy, [&](auto mode) -> PartialResult {
    return make_runner<decltype(mode)>(s, options.block_log2_count).run(leaf, token_of(options));
  });
}

template <MatrixScalar T>
std::vector<PartialResult> run_leaves(const DenseMatrix<T>& a, const std::vector<Leaf>& leaves,
                                      const EngineOptions& options) {
  return detail::with_mode<T>(a, options.policy, [&](auto mode) -> std::vector<PartialResult> {
    return execute(make_runner<decltype(mode)>(a, options.block_log2_count), leaves, options);
  });
}

template <MatrixScalar T>
std::vector<PartialResult> run_leaves(const SparsePair<T>& s, const std::vector<Leaf>& leaves,
                                      const EngineOptions& options) {
  check_dimension(s);
  return detail::with_mode<T>(s, options.policy, [&](auto mode) -> std::vector<PartialResult> {
    return execute(make_runner<decltype(mode)>(s, options.block_log2_count), leaves, options);
  });
}

namespace {

template <MatrixScalar T, class M>
ParallelRun parallel_impl(const M& m, std::uint64_t tau, bool aligned, const EngineOptions& options) {
  ParallelRun out{PermanentValue{}, plan_chunks(m.n(), tau, aligned)};
  return detail::with_mode<T>(m, options.policy, [&](auto mode) -> ParallelRun {
    const auto runner = make_runner<decltype(mode)>(m, options.block_log2_count);
    EngineOptions opts = options;
    if (opts.threads == 0) {
      opts.threads = out.plan.tau;
    }
    auto partials = execute(runner, out.plan.leaves(), opts);
    out.value = reduce(std::move(partials), runner.initial_term(), m.n());
    return out;
  });
}

} // namespace

template <MatrixScalar T>
ParallelRun perm_parallel(const DenseMatrix<T>& a, std::uint64_t tau, bool aligned, const EngineOptions& options) {
  return parallel_impl<T>(a, tau, aligned, options);
}

template <MatrixScalar T>
ParallelRun perm_parallel(const SparsePair<T>& s, std::uint64_t tau, bool aligned, const EngineOptions& options) {
  check_dimension(s);
  return parallel_impl<T>(s, tau, aligned, options);
}

template <MatrixScalar T>
std::uint64_t fingerprint(const SparsePair<T>& s) {
  Fnv h;
  h.value(s.n());
  h.value(static_cast<int>(kind_of<T>()));
  for (const auto& t : s.triplets()) {
    h.value(t.row);
    h.value(t.col);
    if constexpr (std::is_same_v<T, double>) {
      h.value(t.value);
    } else if constexpr (std::is_same_v<T, Complex>) {
      h.value(t.value.real());
      h.value(t.value.imag());
    } else {
      const std::string digits = t.value.str();
      h.bytes(digits.data(), digits.size());
      h.value('\0');
    }
  }
  return h.hash();
}

#define PERMANENT_INSTANTIATE(T)                                                                                  \
  template std::vector<T> init_x_at<T>(const DenseMatrix<T>&, std::uint64_t);                                    \
  template std::vector<T> walk_x_to<T>(const DenseMatrix<T>&, std::uint64_t);                                    \
  template PartialValue initial_term<T>(const DenseMatrix<T>&, Policy);                                          \
  template PartialValue initial_term<T>(const SparsePair<T>&, Policy);                                           \
  template PartialResult run_range<T>(const DenseMatrix<T>&, const Leaf&, const EngineOptions&);                 \
  template PartialResult run_range<T>(const SparsePair<T>&, const Leaf&, const EngineOptions&);                  \
  template std::vector<PartialResult> run_leaves<T>(const DenseMatrix<T>&, const std::vector<Leaf>&,             \
                                                    const EngineOptions&);                                        \
  template std::vector<PartialResult> run_leaves<T>(const SparsePair<T>&, const std::vector<Leaf>&,              \
                                                    const EngineOptions&);                                        \
  template ParallelRun perm_parallel<T>(const DenseMatrix<T>&, std::uint64_t, bool, const EngineOptions&);       \
  template ParallelRun perm_parallel<T>(const SparsePair<T>&, std::uint64_t, bool, const EngineOptions&);        \
  template std::uint64_t fingerprint<T>(const SparsePair<T>&);

PERMANENT_INSTANTIATE(double)
PERMANENT_INSTANTIATE(Complex)
PERMANENT_INSTANTIATE(BigInt)

#undef PERMANENT_INSTANTIATE

} // namespace permanent
