#include "permanent/selfcheck.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "permanent/graycode.hpp"
#include "permanent/kernels.hpp"
#include "permanent/parallel.hpp"
#include "permanent/preprocess.hpp"

namespace permanent {

SparsePair<double> sample_6x6() {
  // A 3-cycle block on rows/columns 0..2, three singleton diagonal entries,
  // and four off-block entries that no perfect matching uses.
  return SparsePair<double>::from_triplets(6, {{0, 0, 2.0},
                                               {0, 1, 1.5},
                                               {0, 3, 0.5},
                                               {1, 1, 3.0},
                                               {1, 2, 2.0},
                                               {2, 0, 4.0},
                                               {2, 2, 1.0},
                                               {2, 5, 2.5},
                                               {3, 3, -2.0},
                                               {3, 4, 1.0},
                                               {4, 4, 0.5},
                                               {4, 5, 3.0},
                                               {5, 5, 1.25}});
}

namespace {

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

DenseMatrix<double> random_real(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (auto& x : v) {
    x = u(rng);
  }
  return DenseMatrix<double>(n, std::move(v));
}

class Suite {
public:
  Suite(std::ostream& out) : out_(out) {}

  template <class F>
  void check(const std::string& name, F&& f) {
    CheckOutcome o{name, false, {}};
    try {
      o.detail = f();
      o.passed = o.detail.empty();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    out_ << (o.passed ? "PASS " : "FAIL ") << name;
    if (!o.passed) {
      out_ << " -- " << o.detail;
    }
    out_ << '\n';
    results_.push_back(std::move(o));
  }

  std::vector<CheckOutcome> results() && { return std::move(results_); }

private:
  std::ostream& out_;
  std::vector<CheckOutcome> results_;
};

} // namespace

std::vector<CheckOutcome> selfcheck(std::ostream& out, const SelfcheckHooks& hooks) {
  const auto kernel = hooks.dense_kernel ? hooks.dense_kernel
                                         : [](const DenseMatrix<double>& a) { return perm_nw(a, Policy::DD); };
  std::mt19937_64 rng(hooks.seed);
  Suite suite(out);

  suite.check("oracle equivalence (60 random real matrices, n <= 8)", [&]() -> std::string {
    for (int t = 0; t < 60; ++t) {
      const int n = 2 + t % 7;
      const auto a = random_real(rng, n);
      const double ref = perm_naive(a);
      const double values[] = {perm_ryser_basic(a), kernel(a).hi, perm_spa(dense_to_sparse(a)).hi,
                               decomp_ryser(dense_to_sparse(a)).value.hi};
      for (double v : values) {
        if (!close(v, ref, 1e-9)) {
          std::ostringstream s;
          s << "n=" << n << " expected " << ref << " got " << v;
          return s.str();
        }
      }
    }
    return {};
  });

  suite.check("known permanents n! a^n (n = 10, 12)", [&]() -> std::string {
    for (int n : {10, 12}) {
      for (double a : {1.0, 0.91}) {
        const auto m = DenseMatrix<double>::filled(n, a);
        const auto ref = reference_permanent(n, a);
        const double e = relative_error(kernel(m), ref).value;
        if (!(e <= 1e-7)) {
          return "dd kernel error " + std::to_string(e) + " at n=" + std::to_string(n);
        }
        for (Policy p : {Policy::Kahan, Policy::DQ, Policy::QQ}) {
          const double ep = relative_error(perm_nw(m, p), ref).value;
          if (!(ep <= 1e-10)) {
            return std::string(to_string(p)) + " error " + std::to_string(ep);
          }
        }
      }
    }
    return {};
  });

  suite.check("binary matrices: integer kernel equals permutation count", [&]() -> std::string {
    std::bernoulli_distribution bit(0.5);
    for (int t = 0; t < 40; ++t) {
      const int n = 1 + t % 7;
      std::vector<BigInt> v(static_cast<std::size_t>(n) * n);
      for (auto& x : v) {
        x = bit(rng) ? 1 : 0;
      }
      const DenseMatrix<BigInt> a(n, v);
      if (perm_nw(a) != perm_naive(a) || perm_spa(dense_to_sparse(a)) != perm_naive(a)) {
        return "mismatch at n=" + std::to_string(n);
      }
    }
    return {};
  });

  suite.check("power-of-two chunks share changed-bit sequences (n <= 12)", [&]() -> std::string {
    for (int n = 3; n <= 12; ++n) {
      for (std::uint64_t tau : {2, 3, 4, 7, 8}) {
        const auto plan = plan_chunks(n, tau, true);
        for (int c : cbl_alignment_report(plan, plan.chunk_size)) {
          if (c != 1) {
            return "n=" + std::to_string(n) + " tau=" + std::to_string(tau);
          }
        }
      }
    }
    return {};
  });

  suite.check("changed-bit sequences are palindromes (k <= 12)", [&]() -> std::string {
    for (int k = 1; k <= 12; ++k) {
      const auto s = cbl_sequence(k);
      if (s.size() != (std::size_t{1} << k) - 1 || !std::equal(s.begin(), s.end(), s.rbegin())) {
        return "k=" + std::to_string(k);
      }
    }
    return {};
  });

  suite.check("partition invariance (n = 10, bit-identical)", [&]() -> std::string {
    const auto a = random_real(rng, 10);
    const auto ref = perm_parallel(a, 1, true).value;
    for (std::uint64_t tau : {2, 3, 7, 32}) {
      if (perm_parallel(a, tau, true).value != ref) {
        return "tau=" + std::to_string(tau);
      }
    }
    return {};
  });

  suite.check("redundant-entry filter on the 6x6 sample", [&]() -> std::string {
    const auto s = sample_6x6();
    const auto outcome = dm_filter(s);
    const auto* f = std::get_if<DmFiltered<double>>(&outcome);
    if (f == nullptr || f->removed != 4 || f->labeling.count != 4) {
      return "expected 4 removed entries and 4 components";
    }
    if (!close(perm_nw(sparse_to_dense(f->matrix)).hi, perm_naive(sparse_to_dense(s)), 1e-12)) {
      return "filtered permanent differs";
    }
    return {};
  });

  suite.check("decomposition identities (40 random matrices)", [&]() -> std::string {
    std::bernoulli_distribution keep(0.35);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 40; ++t) {
      const int n = 3 + t % 5;
      std::vector<Triplet<double>> e;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (keep(rng)) {
            e.push_back({i, j, u(rng)});
          }
        }
      }
      const auto s = SparsePair<double>::from_triplets(n, e);
      const double ref = perm_naive(sparse_to_dense(s));
      const double got = decomp_ryser(s).value.hi;
      if (!close(got, ref, 1e-10)) {
        return "n=" + std::to_string(n);
      }
    }
    return {};
  });

  suite.check("two_sum is error-free (10^4 samples)", [&]() -> std::string {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-60, 60);
    for (int t = 0; t < 10000; ++t) {
      const double a = std::ldexp(u(rng), ex(rng));
      const double b = std::ldexp(u(rng), ex(rng));
      const DoubleDouble s = two_sum(a, b);
      if (Extended(s.hi) + Extended(s.lo) != Extended(a) + Extended(b)) {
        return "inexact";
      }
    }
    return {};
  });

  return std::move(suite).results();
}

} // namespace permanent
