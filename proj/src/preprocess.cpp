#include "permanent/preprocess.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include "permanent/errors.hpp"
#include "permanent/parallel.hpp"

namespace permanent {

int Matching::size() const {
  return static_cast<int>(std::count_if(match_of_row.begin(), match_of_row.end(), [](int c) { return c >= 0; }));
}

bool Matching::perfect() const { return size() == static_cast<int>(match_of_row.size()); }

Matching max_matching(const BipartiteGraph& g) {
  const int n = g.n;
  constexpr int kInf = std::numeric_limits<int>::max();
  Matching m{std::vector<int>(n, -1), std::vector<int>(n, -1)};

  // Cheap greedy start.
  for (int r = 0; r < n; ++r) {
    for (int p = g.rptrs[r]; p < g.rptrs[r + 1]; ++p) {
      if (m.match_of_col[g.cids[p]] < 0) {
        m.match_of_row[r] = g.cids[p];
        m.match_of_col[g.cids[p]] = r;
        break;
      }
    }
  }

  std::vector<int> dist(n);
  std::vector<int> it(n);
  std::vector<int> stack;
  for (;;) {
    // BFS layering from the free rows.
    std::queue<int> queue;
    for (int r = 0; r < n; ++r) {
      if (m.match_of_row[r] < 0) {
        dist[r] = 0;
        queue.push(r);
      } else {
        dist[r] = kInf;
      }
    }
    bool found = false;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int p = g.rptrs[u]; p < g.rptrs[u + 1]; ++p) {
        const int w = m.match_of_col[g.cids[p]];
        if (w < 0) {
          found = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          queue.push(w);
        }
      }
    }
    if (!found) {
      break;
    }

    // Layered augmenting paths, depth-first with an explicit stack.
    for (int r = 0; r < n; ++r) {
      it[r] = g.rptrs[r];
    }
    for (int root = 0; root < n; ++root) {
      if (m.match_of_row[root] >= 0) {
        continue;
      }
      stack.assign(1, root);
      while (!stack.empty()) {
        const int u = stack.back();
        if (it[u] == g.rptrs[u + 1]) {
          dist[u] = kInf;
          stack.pop_back();
          continue;
        }
        const int v = g.cids[it[u]];
        const int w = m.match_of_col[v];
        if (w < 0) {
          for (int x : stack) {
            const int c = g.cids[it[x]];
            m.match_of_row[x] = c;
            m.match_of_col[c] = x;
          }
          stack.clear();
        } else if (dist[w] != kInf && dist[w] == dist[u] + 1) {
          stack.push_back(w);
        } else {
          ++it[u];
        }
      }
    }
  }
  return m;
}

namespace {

SccLabeling contracted_scc(const BipartiteGraph& g, const Matching& m) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  Graph graph(g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int p = g.rptrs[i]; p < g.rptrs[i + 1]; ++p) {
      const int j = g.cids[p];
      if (j != m.match_of_row[i]) {
        // Unmatched edge oriented column -> row; the column is merged with
        // the row matched to it.
        boost::add_edge(m.match_of_col[j], i, graph);
      }
    }
  }
  std::vector<int> raw(g.n);
  const int count = boost::strong_components(graph, boost::make_iterator_property_map(raw.begin(),
                                                                                      get(boost::vertex_index, graph)));
  // Renumber by first occurrence in row order.
  std::vector<int> remap(count, -1);
  SccLabeling labels;
  labels.component_of_row.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    if (remap[raw[i]] < 0) {
      remap[raw[i]] = labels.count++;
    }
    labels.component_of_row[i] = remap[raw[i]];
  }
  return labels;
}

template <MatrixScalar T>
void require_square_task(const DecompTask<T>& task, const LineChoice& rc, int expected_low, int expected_high) {
  if (rc.index < 0 || rc.index >= task.matrix.n()) {
    throw std::out_of_range("line index out of range");
  }
  const int count = static_cast<int>(rc.is_row ? task.matrix.row_nnz(rc.index) : task.matrix.col_nnz(rc.index));
  if (count < expected_low || count > expected_high) {
    throw std::invalid_argument("line " + std::to_string(rc.index) + " has " + std::to_string(count) +
                                " nonzeros, expected " + std::to_string(expected_low) + ".." +
                                std::to_string(expected_high));
  }
}

template <MatrixScalar T>
DecompTask<T> transposed(const DecompTask<T>& t) {
  return {t.matrix.transposed(), t.multiplier, t.depth};
}

/// (column, value) pairs of row r, ascending by column.
template <MatrixScalar T>
std::vector<std::pair<int, T>> row_entries(const SparsePair<T>& s, int r) {
  const auto& crs = s.crs();
  std::vector<std::pair<int, T>> out;
  for (int p = crs.rptrs[r]; p < crs.rptrs[r + 1]; ++p) {
    out.emplace_back(crs.cids[p], crs.vals[p]);
  }
  return out;
}

// Row-form kernels. Each builds its result from triplets.

template <MatrixScalar T>
DecompTask<T> d1_row(const DecompTask<T>& task, int r) {
  const auto entries = row_entries(task.matrix, r);
  const int c = entries.front().first;
  const T& alpha = entries.front().second;
  std::vector<Triplet<T>> out;
  for (const auto& t : task.matrix.triplets()) {
    if (t.row == r || t.col == c) {
      continue;
    }
    out.push_back({t.row - (t.row > r), t.col - (t.col > c), t.value});
  }
  return {SparsePair<T>::from_triplets(task.matrix.n() - 1, std::move(out)), T(task.multiplier * alpha),
          task.depth + 1};
}

/// [alpha*e + beta*d | B]: drop row r, column c2 folds into column c1.
template <MatrixScalar T>
DecompTask<T> merged_minor(const DecompTask<T>& task, int r, int c1, const T& alpha, int c2, const T& beta) {
  std::vector<Triplet<T>> out;
  for (const auto& t : task.matrix.triplets()) {
    if (t.row == r) {
      continue;
    }
    const int row = t.row - (t.row > r);
    if (t.col == c1) {
      out.push_back({row, c1, T(beta * t.value)});
    } else if (t.col == c2) {
      out.push_back({row, c1, T(alpha * t.value)});
    } else {
      out.push_back({row, t.col - (t.col > c2), t.value});
    }
  }
  return {SparsePair<T>::from_triplets(task.matrix.n() - 1, std::move(out)), task.multiplier, task.depth + 1};
}

template <MatrixScalar T>
std::pair<DecompTask<T>, DecompTask<T>> d34_row(const DecompTask<T>& task, int r) {
  const auto entries = row_entries(task.matrix, r);
  const auto [c1, alpha] = entries[0];
  const auto [c2, beta] = entries[1];
  std::vector<Triplet<T>> zeroed;
  for (const auto& t : task.matrix.triplets()) {
    if (t.row == r && (t.col == c1 || t.col == c2)) {
      continue;
    }
    zeroed.push_back(t);
  }
  DecompTask<T> first{SparsePair<T>::from_triplets(task.matrix.n(), std::move(zeroed)), task.multiplier,
                      task.depth + 1};
  return {std::move(first), merged_minor(task, r, c1, alpha, c2, beta)};
}

template <MatrixScalar T>
void accumulate(PermanentOf<T>& total, const PermanentOf<T>& value, const T& multiplier) {
  if constexpr (std::is_same_v<T, double>) {
    total = dd_add(total, dd_mul(value, multiplier));
  } else {
    total += value * multiplier;
  }
}

} // namespace

template <MatrixScalar T>
DmOutcome<T> dm_filter(const SparsePair<T>& s) {
  const BipartiteGraph g = BipartiteGraph::of(s);
  Matching m = max_matching(g);
  if (!m.perfect()) {
    return SingularVerdict{m.size()};
  }
  SccLabeling labels = contracted_scc(g, m);
  std::vector<Triplet<T>> kept;
  for (const auto& t : s.triplets()) {
    if (labels.component_of_row[t.row] == labels.component_of_row[m.match_of_col[t.col]]) {
      kept.push_back(t);
    }
  }
  const std::size_t removed = s.nnz() - kept.size();
  return DmFiltered<T>{SparsePair<T>::from_triplets(s.n(), std::move(kept)), std::move(m), std::move(labels),
                       removed};
}

template <MatrixScalar T>
std::vector<SparsePair<T>> scc_blocks(const DmFiltered<T>& filtered) {
  const int n = filtered.matrix.n();
  const auto& comp = filtered.labeling.component_of_row;
  std::vector<int> local_row(n);
  std::vector<int> local_col(n);
  std::vector<int> sizes(filtered.labeling.count, 0);
  for (int i = 0; i < n; ++i) {
    local_row[i] = sizes[comp[i]]++;
  }
  // Columns follow their matched rows, keeping ascending column order.
  std::vector<int> col_count(filtered.labeling.count, 0);
  for (int j = 0; j < n; ++j) {
    const int c = comp[filtered.matching.match_of_col[j]];
    local_col[j] = col_count[c]++;
  }
  std::vector<std::vector<Triplet<T>>> parts(filtered.labeling.count);
  for (const auto& t : filtered.matrix.triplets()) {
    const int c = comp[t.row];
    if (comp[filtered.matching.match_of_col[t.col]] != c) {
      throw StructuralError("entry crosses components; matrix was not filtered");
    }
    parts[c].push_back({local_row[t.row], local_col[t.col], t.value});
  }
  std::vector<SparsePair<T>> blocks;
  blocks.reserve(parts.size());
  for (std::size_t c = 0; c < parts.size(); ++c) {
    blocks.push_back(SparsePair<T>::from_triplets(sizes[c], std::move(parts[c])));
  }
  return blocks;
}

template <MatrixScalar T>
LineChoice min_nnz_row_col(const SparsePair<T>& s) {
  if (s.n() < 1) {
    throw DomainError("min_nnz_row_col needs n >= 1");
  }
  LineChoice best{true, 0, static_cast<int>(s.row_nnz(0))};
  for (int i = 1; i < s.n(); ++i) {
    const int c = static_cast<int>(s.row_nnz(i));
    if (c < best.nnz) {
      best = {true, i, c};
    }
  }
  for (int j = 0; j < s.n(); ++j) {
    const int c = static_cast<int>(s.col_nnz(j));
    if (c < best.nnz) {
      best = {false, j, c};
    }
  }
  return best;
}

template <MatrixScalar T>
DecompTask<T> d1compress(const DecompTask<T>& task, const LineChoice& rc) {
  require_square_task(task, rc, 1, 1);
  if (!rc.is_row) {
    return transposed(d1_row(transposed(task), rc.index));
  }
  return d1_row(task, rc.index);
}

template <MatrixScalar T>
DecompTask<T> d2compress(const DecompTask<T>& task, const LineChoice& rc) {
  require_square_task(task, rc, 2, 2);
  if (!rc.is_row) {
    return transposed(d2compress(transposed(task), LineChoice{true, rc.index, rc.nnz}));
  }
  const auto entries = row_entries(task.matrix, rc.index);
  return merged_minor(task, rc.index, entries[0].first, entries[0].second, entries[1].first, entries[1].second);
}

template <MatrixScalar T>
std::pair<DecompTask<T>, DecompTask<T>> d34compress(const DecompTask<T>& task, const LineChoice& rc) {
  require_square_task(task, rc, 3, 4);
  if (!rc.is_row) {
    auto [a, b] = d34_row(transposed(task), rc.index);
    return {transposed(a), transposed(b)};
  }
  return d34_row(task, rc.index);
}

template <MatrixScalar T>
DecompResult<T> decomp_ryser(const SparsePair<T>& s, const DecompLimits& limits) {
  DecompResult<T> result{PermanentOf<T>(0), {}};
  EngineOptions engine;
  engine.policy = limits.policy;
  engine.stop = limits.stop;
  engine.deadline = limits.deadline;

  std::vector<DecompTask<T>> work;
  work.push_back({s, T(1), 0});
  while (!work.empty()) {
    if (++result.stats.tasks > limits.max_tasks) {
      throw TimeoutError("decomposition exceeded " + std::to_string(limits.max_tasks) + " tasks");
    }
    if (limits.stop != nullptr && limits.stop->load()) {
      throw InterruptedError("computation interrupted");
    }
    if (limits.deadline && std::chrono::steady_clock::now() > *limits.deadline) {
      throw TimeoutError("time limit exceeded");
    }
    DecompTask<T> task = std::move(work.back());
    work.pop_back();
    const int n = task.matrix.n();
    if (n == 0) {
      ++result.stats.trivial_leaves;
      accumulate<T>(result.value, PermanentOf<T>(1), task.multiplier);
      continue;
    }
    const LineChoice rc = min_nnz_row_col(task.matrix);
    if (rc.nnz == 0) {
      ++result.stats.zero_pruned;
      continue;
    }
    if (rc.nnz == 1) {
      ++result.stats.d1;
      work.push_back(d1compress(task, rc));
      continue;
    }
    if (rc.nnz == 2) {
      ++result.stats.d2;
      work.push_back(d2compress(task, rc));
      continue;
    }
    if (rc.nnz <= std::min(limits.max_decompose_nnz, 4)) {
      ++result.stats.d34;
      auto [a, b] = d34compress(task, rc);
      work.push_back(std::move(a));
      work.push_back(std::move(b));
      continue;
    }
    if (n > kMaxKernelDim) {
      throw ImpossibleError("decomposition left a " + std::to_string(n) + "x" + std::to_string(n) +
                            " submatrix; kernels accept n <= " + std::to_string(kMaxKernelDim));
    }
    result.stats.leaf_n_sum += n;
    result.stats.leaf_nnz_sum += static_cast<double>(task.matrix.nnz());
    ParallelRun run = [&] {
      if (density(task.matrix) >= limits.dense_threshold) {
        ++result.stats.dense_leaves;
        return perm_parallel(sparse_to_dense(task.matrix), limits.workers, limits.aligned, engine);
      }
      ++result.stats.sparse_leaves;
      return perm_parallel(task.matrix, limits.workers, limits.aligned, engine);
    }();
    accumulate<T>(result.value, std::get<PermanentOf<T>>(run.value), task.multiplier);
  }
  return result;
}

#define PERMANENT_INSTANTIATE(T)                                                                                 \
  template DmOutcome<T> dm_filter<T>(const SparsePair<T>&);                                                     \
  template std::vector<SparsePair<T>> scc_blocks<T>(const DmFiltered<T>&);                                      \
  template LineChoice min_nnz_row_col<T>(const SparsePair<T>&);                                                 \
  template DecompTask<T> d1compress<T>(const DecompTask<T>&, const LineChoice&);                                \
  template DecompTask<T> d2compress<T>(const DecompTask<T>&, const LineChoice&);                                \
  template std::pair<DecompTask<T>, DecompTask<T>> d34compress<T>(const DecompTask<T>&, const LineChoice&);     \
  template DecompResult<T> decomp_ryser<T>(const SparsePair<T>&, const DecompLimits&);

PERMANENT_INSTANTIATE(double)
PERMANENT_INSTANTIATE(Complex)
PERMANENT_INSTANTIATE(BigInt)

#undef PERMANENT_INSTANTIATE

} // namespace permanent
