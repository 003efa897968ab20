#include "permanent/matrix.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "permanent/errors.hpp"

namespace permanent {

std::string_view to_string(ScalarKind kind) {
  switch (kind) {
  case ScalarKind::real64:
    return "real64";
  case ScalarKind::complex128:
    return "complex128";
  case ScalarKind::integer:
    return "integer";
  }
  return "unknown";
}

ScalarKind kind_of(const Scalar& s) {
  return std::visit([]<class T>(const T&) { return kind_of<T>(); }, s);
}

template <MatrixScalar T>
DenseMatrix<T>::DenseMatrix(int n, std::vector<T> row_major) : n_(n), data_(std::move(row_major)) {
  if (n < 1 || n > kMaxKernelDim) {
    throw std::invalid_argument("dense matrix dimension must be in [1, 63], got " + std::to_string(n));
  }
  if (data_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n)) {
    throw std::invalid_argument("dense matrix needs n*n entries");
  }
  for (const T& v : data_) {
    if (!is_finite(v)) {
      throw std::invalid_argument("matrix entries must be finite");
    }
  }
}

template <MatrixScalar T>
DenseMatrix<T> DenseMatrix<T>::filled(int n, const T& value) {
  return DenseMatrix(n, std::vector<T>(static_cast<std::size_t>(n) * n, value));
}

template <MatrixScalar T>
DenseMatrix<T> DenseMatrix<T>::identity(int n) {
  std::vector<T> data(static_cast<std::size_t>(n) * n, T(0));
  for (int i = 0; i < n; ++i) {
    data[static_cast<std::size_t>(i) * n + i] = T(1);
  }
  return DenseMatrix(n, std::move(data));
}

template <MatrixScalar T>
DenseMatrix<T> DenseMatrix<T>::transposed() const {
  std::vector<T> out(data_.size());
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      out[static_cast<std::size_t>(j) * n_ + i] = (*this)(i, j);
    }
  }
  return DenseMatrix(n_, std::move(out));
}

template <MatrixScalar T>
std::vector<T> DenseMatrix<T>::column_major() const {
  return transposed().data_;
}

namespace {

void check_compressed(int n, const std::vector<int>& ptrs, const std::vector<int>& ids, std::size_t nvals,
                      const char* what) {
  const std::string name(what);
  if (n < 0 || n > kMaxSparseDim) {
    throw StructuralError(name + ": dimension out of range");
  }
  if (ptrs.size() != static_cast<std::size_t>(n) + 1) {
    throw StructuralError(name + ": pointer array must have n+1 entries");
  }
  if (ptrs.front() != 0 || ptrs.back() != static_cast<int>(ids.size())) {
    throw StructuralError(name + ": pointer array must start at 0 and end at nnz");
  }
  if (nvals != ids.size()) {
    throw StructuralError(name + ": index and value arrays differ in length");
  }
  for (int k = 0; k < n; ++k) {
    if (ptrs[k] > ptrs[k + 1]) {
      throw StructuralError(name + ": pointer array must be nondecreasing");
    }
    for (int p = ptrs[k]; p < ptrs[k + 1]; ++p) {
      if (ids[p] < 0 || ids[p] >= n) {
        throw StructuralError(name + ": index out of range");
      }
      if (p > ptrs[k] && ids[p] <= ids[p - 1]) {
        throw StructuralError(name + ": indices within a line must be strictly increasing");
      }
    }
  }
}

} // namespace

template <MatrixScalar T>
void CrsMatrix<T>::validate() const {
  check_compressed(n, rptrs, cids, vals.size(), "CRS");
}

template <MatrixScalar T>
void CcsMatrix<T>::validate() const {
  check_compressed(n, cptrs, rids, vals.size(), "CCS");
}

template <MatrixScalar T>
SparsePair<T>::SparsePair(CrsMatrix<T> crs, CcsMatrix<T> ccs) : crs_(std::move(crs)), ccs_(std::move(ccs)) {
  crs_.validate();
  ccs_.validate();
  if (crs_.n != ccs_.n || crs_.nnz() != ccs_.nnz()) {
    throw StructuralError("CRS and CCS disagree on dimension or nonzero count");
  }
  // Every CCS entry must appear in CRS with the same value; equal counts make
  // this a bijection.
  for (int j = 0; j < ccs_.n; ++j) {
    for (int p = ccs_.cptrs[j]; p < ccs_.cptrs[j + 1]; ++p) {
      const int i = ccs_.rids[p];
      const auto first = crs_.cids.begin() + crs_.rptrs[i];
      const auto last = crs_.cids.begin() + crs_.rptrs[i + 1];
      const auto it = std::lower_bound(first, last, j);
      if (it == last || *it != j || crs_.vals[it - crs_.cids.begin()] != ccs_.vals[p]) {
        throw StructuralError("CRS and CCS describe different nonzero sets");
      }
    }
  }
}

template <MatrixScalar T>
SparsePair<T> SparsePair<T>::from_triplets(int n, std::vector<Triplet<T>> entries) {
  if (n < 0 || n > kMaxSparseDim) {
    throw std::invalid_argument("sparse dimension out of range");
  }
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) {
      throw std::invalid_argument("triplet index out of range");
    }
    if (!is_finite(e.value)) {
      throw std::invalid_argument("matrix entries must be finite");
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });

  std::vector<Triplet<T>> merged;
  merged.reserve(entries.size());
  for (auto& e : entries) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col) {
      merged.back().value += e.value;
    } else {
      merged.push_back(std::move(e));
    }
  }
  std::erase_if(merged, [](const auto& e) { return is_zero(e.value); });

  CrsMatrix<T> crs;
  crs.n = n;
  crs.rptrs.assign(static_cast<std::size_t>(n) + 1, 0);
  crs.cids.reserve(merged.size());
  crs.vals.reserve(merged.size());
  for (const auto& e : merged) {
    ++crs.rptrs[e.row + 1];
    crs.cids.push_back(e.col);
    crs.vals.push_back(e.value);
  }
  for (int i = 0; i < n; ++i) {
    crs.rptrs[i + 1] += crs.rptrs[i];
  }

  CcsMatrix<T> ccs;
  ccs.n = n;
  ccs.cptrs.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& e : merged) {
    ++ccs.cptrs[e.col + 1];
  }
  for (int j = 0; j < n; ++j) {
    ccs.cptrs[j + 1] += ccs.cptrs[j];
  }
  ccs.rids.resize(merged.size());
  ccs.vals.resize(merged.size());
  std::vector<int> fill(ccs.cptrs.begin(), ccs.cptrs.end() - 1);
  // Row-major traversal leaves each column's rows sorted.
  for (const auto& e : merged) {
    const int slot = fill[e.col]++;
    ccs.rids[slot] = e.row;
    ccs.vals[slot] = e.value;
  }
  return SparsePair(std::move(crs), std::move(ccs));
}

template <MatrixScalar T>
std::vector<Triplet<T>> SparsePair<T>::triplets() const {
  std::vector<Triplet<T>> out;
  out.reserve(nnz());
  for (int i = 0; i < crs_.n; ++i) {
    for (int p = crs_.rptrs[i]; p < crs_.rptrs[i + 1]; ++p) {
      out.push_back({i, crs_.cids[p], crs_.vals[p]});
    }
  }
  return out;
}

template <MatrixScalar T>
SparsePair<T> SparsePair<T>::transposed() const {
  CrsMatrix<T> crs{ccs_.n, ccs_.cptrs, ccs_.rids, ccs_.vals};
  CcsMatrix<T> ccs{crs_.n, crs_.rptrs, crs_.cids, crs_.vals};
  return SparsePair(std::move(crs), std::move(ccs));
}

template <MatrixScalar T>
SparsePair<T> dense_to_sparse(const DenseMatrix<T>& a, double zero_tolerance) {
  if (!(zero_tolerance >= 0.0)) {
    throw std::invalid_argument("zero_tolerance must be nonnegative");
  }
  std::vector<Triplet<T>> entries;
  for (int i = 0; i < a.n(); ++i) {
    for (int j = 0; j < a.n(); ++j) {
      const T& v = a(i, j);
      if (!is_zero(v) && magnitude(v) > zero_tolerance) {
        entries.push_back({i, j, v});
      }
    }
  }
  return SparsePair<T>::from_triplets(a.n(), std::move(entries));
}

template <MatrixScalar T>
DenseMatrix<T> sparse_to_dense(const SparsePair<T>& s) {
  const int n = s.n();
  if (n < 1 || n > kMaxKernelDim) {
    throw std::invalid_argument("dense form requires 1 <= n <= 63");
  }
  std::vector<T> data(static_cast<std::size_t>(n) * n, T(0));
  const auto& crs = s.crs();
  for (int i = 0; i < n; ++i) {
    for (int p = crs.rptrs[i]; p < crs.rptrs[i + 1]; ++p) {
      data[static_cast<std::size_t>(i) * n + crs.cids[p]] = crs.vals[p];
    }
  }
  return DenseMatrix<T>(n, std::move(data));
}

template <MatrixScalar T>
double density(const SparsePair<T>& s) {
  if (s.n() < 1) {
    throw DomainError("density of an empty matrix");
  }
  const double n = s.n();
  return static_cast<double>(s.nnz()) / (n * n);
}

template <MatrixScalar T>
std::vector<T> row_sums(const DenseMatrix<T>& a) {
  std::vector<T> out(a.n(), T(0));
  for (int i = 0; i < a.n(); ++i) {
    for (int j = 0; j < a.n(); ++j) {
      out[i] += a(i, j);
    }
  }
  return out;
}

int dimension(const AnySparse& s) {
  return std::visit([](const auto& m) { return m.n(); }, s);
}

ScalarKind kind_of(const AnySparse& s) {
  return std::visit([]<class T>(const SparsePair<T>&) { return kind_of<T>(); }, s);
}

#define PERMANENT_INSTANTIATE(T)                                                  \
  template class DenseMatrix<T>;                                                  \
  template struct CrsMatrix<T>;                                                   \
  template struct CcsMatrix<T>;                                                   \
  template class SparsePair<T>;                                                   \
  template SparsePair<T> dense_to_sparse(const DenseMatrix<T>&, double);          \
  template DenseMatrix<T> sparse_to_dense(const SparsePair<T>&);                  \
  template double density(const SparsePair<T>&);                                  \
  template std::vector<T> row_sums(const DenseMatrix<T>&);

PERMANENT_INSTANTIATE(double)
PERMANENT_INSTANTIATE(Complex)
PERMANENT_INSTANTIATE(BigInt)

#undef PERMANENT_INSTANTIATE

} // namespace permanent
