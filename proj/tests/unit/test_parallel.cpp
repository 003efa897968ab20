#include <doctest.h>

#include <atomic>
#include <random>

#include "permanent/errors.hpp"
#include "permanent/parallel.hpp"
#include "support/oracles.hpp"

using namespace permanent;

namespace {

void check_tiling(const ChunkPlan& plan) {
  std::uint64_t next = 1;
  for (const Leaf& leaf : plan.leaves()) {
    REQUIRE(leaf.range.start == next);
    REQUIRE(!leaf.range.empty());
    next = leaf.range.end + 1;
  }
  REQUIRE(next == plan.total + 1);
}

} // namespace

TEST_CASE("total iterations") {
  CHECK(total_iterations(1) == 0);
  CHECK(total_iterations(12) == 2047);
  CHECK(total_iterations(63) == (std::uint64_t{1} << 62) - 1);
  CHECK_THROWS_AS(total_iterations(0), DomainError);
  CHECK_THROWS_AS(total_iterations(64), DomainError);
}

TEST_CASE("chunk plans tile the iteration space (property)") {
  for (int n = 2; n <= 16; ++n) {
    for (std::uint64_t tau : {1, 2, 3, 4, 5, 7, 8, 16, 100}) {
      for (bool aligned : {false, true}) {
        const auto plan = plan_chunks(n, tau, aligned);
        check_tiling(plan);
        CHECK(plan.ranges.size() <= plan.tau);
        if (aligned) {
          CHECK(std::has_single_bit(plan.chunk_size));
          // Only the final range may be clipped at total.
          for (std::size_t k = 0; k + 1 < plan.ranges.size(); ++k) {
            CHECK(plan.ranges[k].size() == plan.chunk_size);
          }
          CHECK(plan.ranges.back().size() <= plan.chunk_size);
        }
      }
    }
  }
}

TEST_CASE("unaligned and aligned chunk sizes") {
  const auto u = plan_chunks(12, 3, false); // total 2047
  CHECK(u.chunk_size == 683);
  CHECK(u.ranges.back().end == 2047);
  CHECK(!u.residual);
  const auto a = plan_chunks(12, 3, true);
  CHECK(a.chunk_size == 512);
  REQUIRE(a.residual);
  CHECK(*a.residual == IterationRange{1537, 2047});
  const auto c = plan_chunks(3, 10, true); // total 3
  CHECK(c.tau_clamped);
  CHECK(c.tau == 3);
  CHECK_THROWS_AS(plan_chunks(5, 0, true), std::invalid_argument);
}

TEST_CASE("power-of-two chunks align changed bits; a 17-wide chunk does not") {
  const auto bad = plan_with_chunk(8, 4, 17);
  CHECK(!bad.aligned);
  const auto report = cbl_alignment_report(bad, 17);
  CHECK(report.front() == 3);
  CHECK(*std::max_element(report.begin(), report.end()) >= 3);
  const auto good = plan_with_chunk(8, 4, 16);
  CHECK(good.aligned);
  for (int c : cbl_alignment_report(good, 16)) {
    CHECK(c == 1);
  }
  CHECK_THROWS_AS(plan_with_chunk(8, 8, 17), std::invalid_argument);
}

TEST_CASE("hierarchy plans give each process a contiguous superrange") {
  const auto h = plan_hierarchy(12, 3, 2, true);
  CHECK(h.flat.leaves().size() == 7); // 6 ranges and a residual
  REQUIRE(h.process_leaves.size() == 3);
  CHECK(h.process_leaves[2].size() == 3);
  std::uint64_t next = 1;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto r = h.superrange(p);
    CHECK(r.start == next);
    next = r.end + 1;
  }
  CHECK(next == 2048);
  CHECK_THROWS_AS(plan_hierarchy(3, 2, 2, true), std::invalid_argument);
  CHECK_THROWS_AS(plan_hierarchy(5, 0, 2, true), std::invalid_argument);
}

TEST_CASE("jump-in x equals the serially walked and from-scratch x") {
  std::mt19937_64 rng(31);
  const auto a = oracle::uniform_dense(rng, 9);
  for (std::uint64_t g : {0ULL, 1ULL, 5ULL, 77ULL, 200ULL, 255ULL}) {
    const auto jump = init_x_at(a, g);
    const auto walked = walk_x_to(a, g);
    const auto ref = oracle::x_from_scratch(a, g);
    for (int i = 0; i < 9; ++i) {
      CHECK(jump[i] == doctest::Approx(ref[i]).epsilon(1e-12));
      CHECK(walked[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
  std::vector<BigInt> v;
  for (int k = 0; k < 36; ++k) {
    v.emplace_back(k % 7 - 3);
  }
  const DenseMatrix<BigInt> b(6, v);
  for (std::uint64_t g = 0; g < 32; ++g) {
    CHECK(init_x_at(b, g) == walk_x_to(b, g));
  }
}

TEST_CASE("parallel results equal the serial kernel for all kinds") {
  std::mt19937_64 rng(32);
  const auto a = oracle::uniform_dense(rng, 11);
  const double serial = perm_nw(a, Policy::QQ).hi;
  for (std::uint64_t tau : {1, 3, 8}) {
    for (Policy p : {Policy::DD, Policy::Kahan, Policy::DQ, Policy::QQ}) {
      EngineOptions o;
      o.policy = p;
      const auto r = perm_parallel(a, tau, true, o);
      CHECK(std::get<DoubleDouble>(r.value).hi == doctest::Approx(serial).epsilon(1e-12));
    }
  }
  const auto c = oracle::complex_dense(rng, 8);
  CHECK(std::abs(std::get<Complex>(perm_parallel(c, 4, false).value) - perm_nw(c)) < 1e-12);
  const auto s = oracle::sparse_integer(rng, 10, 0.4);
  CHECK(std::get<BigInt>(perm_parallel(s, 5, true).value) == perm_spa(s));
  CHECK(std::get<DoubleDouble>(perm_parallel(DenseMatrix<double>(1, {4.0}), 2, true).value).hi == 4.0);
}

TEST_CASE("partition invariance: bit-identical across tau and hierarchy (property)") {
  std::mt19937_64 rng(33);
  for (int n : {9, 12, 13}) {
    const auto a = oracle::uniform_dense(rng, n);
    const auto ref = perm_parallel(a, 1, true).value;
    for (std::uint64_t tau : {2, 5, 7, 32}) {
      REQUIRE(perm_parallel(a, tau, true).value == ref);
      REQUIRE(perm_parallel(dense_to_sparse(a), tau, true).value == ref);
      // Unaligned ranges cut through reduction blocks, so only closeness holds.
      const double unaligned = std::get<DoubleDouble>(perm_parallel(a, tau, false).value).hi;
      REQUIRE(unaligned == doctest::Approx(std::get<DoubleDouble>(ref).hi).epsilon(1e-12));
    }
  }
}

TEST_CASE("reduce rejects incomplete or overlapping partials") {
  std::mt19937_64 rng(34);
  const auto a = oracle::uniform_dense(rng, 8);
  const auto plan = plan_chunks(8, 4, true);
  auto parts = run_leaves(a, plan.leaves());
  const auto p0 = initial_term(a);
  CHECK(std::get<DoubleDouble>(reduce(parts, p0, 8)).hi == doctest::Approx(perm_nw(a).hi).epsilon(1e-13));
  std::reverse(parts.begin(), parts.end());
  CHECK_NOTHROW(reduce(parts, p0, 8));
  auto missing = parts;
  missing.pop_back();
  CHECK_THROWS_AS(reduce(missing, p0, 8), StructuralError);
  auto short_range = parts;
  short_range.front().iterations_done -= 1;
  CHECK_THROWS_AS(reduce(short_range, p0, 8), StructuralError);
  auto wrong_kind = parts;
  wrong_kind.front().value = BigInt(1);
  CHECK_THROWS_AS(reduce(wrong_kind, p0, 8), StructuralError);
}

TEST_CASE("completion callback fires once per leaf") {
  std::mt19937_64 rng(35);
  const auto a = oracle::uniform_dense(rng, 10);
  const auto plan = plan_chunks(10, 6, true);
  std::vector<std::uint32_t> seen;
  EngineOptions o;
  o.threads = 3;
  o.on_complete = [&](const PartialResult& r) { seen.push_back(r.worker_id); };
  run_leaves(a, plan.leaves(), o);
  std::sort(seen.begin(), seen.end());
  CHECK(seen.size() == plan.leaves().size());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("cancellation and deadlines surface as errors") {
  const auto a = DenseMatrix<double>::filled(20, 1.0);
  std::atomic<bool> stop{true};
  EngineOptions o;
  o.stop = &stop;
  CHECK_THROWS_AS(perm_parallel(a, 2, true, o), InterruptedError);
  EngineOptions d;
  d.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
  CHECK_THROWS_AS(perm_parallel(a, 2, true, d), TimeoutError);
}

TEST_CASE("fingerprints distinguish matrices") {
  const auto a = SparsePair<double>::from_triplets(2, {{0, 0, 1.0}, {1, 1, 2.0}});
  const auto b = SparsePair<double>::from_triplets(2, {{0, 0, 1.0}, {1, 1, 2.5}});
  const auto c = SparsePair<double>::from_triplets(2, {{0, 1, 1.0}, {1, 1, 2.0}});
  CHECK(fingerprint(a) == fingerprint(a.transposed().transposed()));
  CHECK(fingerprint(a) != fingerprint(b));
  CHECK(fingerprint(a) != fingerprint(c));
}
