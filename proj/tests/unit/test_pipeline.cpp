#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <json.hpp>

#include "permanent/pipeline.hpp"
#include "permanent/report.hpp"
#include "permanent/selfcheck.hpp"
#include "support/oracles.hpp"

using namespace permanent;
namespace fs = std::filesystem;

namespace {

AnySparse uniform(int n, double a) { return dense_to_sparse(DenseMatrix<double>::filled(n, a)); }

double real_value(const RunReport& r) { return std::get<DoubleDouble>(*r.value).hi; }

/// Test-side Gray-code Ryser. With corrupt_sign the (-1)^g factor is
/// dropped, the mutation the selfcheck must catch.
DoubleDouble fixture_kernel(const DenseMatrix<double>& a, bool corrupt_sign) {
  const int n = a.n();
  std::vector<double> x = oracle::x_from_scratch(a, 0);
  double total = 0;
  for (std::uint64_t g = 0; g < (std::uint64_t{1} << (n - 1)); ++g) {
    if (g > 0) {
      const int j = std::countr_zero(g);
      const double s = ((g ^ (g >> 1)) >> j) & 1U ? 1.0 : -1.0;
      for (int i = 0; i < n; ++i) {
        x[i] += s * a(i, j);
      }
    }
    double p = 1;
    for (double v : x) {
      p *= v;
    }
    total += (corrupt_sign || g % 2 == 0) ? p : -p;
  }
  return DoubleDouble((n % 2 == 1 ? 2.0 : -2.0) * total);
}

} // namespace

TEST_CASE("uniform 12x12 of ones gives 12! with zero reference error") {
  RunConfig c;
  const auto r = run(c, uniform(12, 1.0));
  CHECK(r.status == RunStatus::Ok);
  CHECK(real_value(r) == 479001600.0);
  REQUIRE(r.reference_error);
  CHECK(*r.reference_error <= 1e-10);
  CHECK(r.plan);
}

TEST_CASE("sample with redundant-entry filter reports 13 -> 9") {
  RunConfig c;
  c.dm = true;
  const auto r = run(c, sample_6x6());
  CHECK(r.dm_applied);
  CHECK(r.nnz == 13);
  CHECK(r.nnz_after_dm == 9);
  CHECK(r.scc_count == 4);
  CHECK(real_value(r) == -22.5);
}

TEST_CASE("all algorithm choices agree on a random 9x9") {
  std::mt19937_64 rng(61);
  const AnySparse m = dense_to_sparse(oracle::uniform_dense(rng, 9));
  std::vector<double> values;
  for (Algorithm a : {Algorithm::Dense, Algorithm::Sparse, Algorithm::Decomp, Algorithm::NaiveOracle}) {
    for (RunMode mode : {RunMode::Serial, RunMode::Parallel}) {
      RunConfig c;
      c.algorithm = a;
      c.mode = mode;
      c.workers = 3;
      values.push_back(real_value(run(c, m)));
    }
  }
  for (double v : values) {
    CHECK(oracle::rel_diff(v, values.front()) <= 1e-9);
  }
}

TEST_CASE("preprocessing combinations agree (property)") {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 40; ++t) {
    const AnySparse m = oracle::sparse_integer(rng, 4 + t % 6, 0.35);
    const BigInt ref = oracle::permutation_sum(oracle::densify(std::get<SparsePair<BigInt>>(m)));
    for (int mask = 0; mask < 4; ++mask) {
      RunConfig c;
      c.dm = mask & 1;
      c.fm = mask & 2;
      const auto r = run(c, m);
      REQUIRE(r.value);
      REQUIRE(std::get<BigInt>(*r.value) == ref);
      if (r.status == RunStatus::Singular) {
        REQUIRE(ref == 0);
      }
    }
  }
}

TEST_CASE("singular, empty, impossible and timeout statuses") {
  RunConfig dm;
  dm.dm = true;
  const auto singular = run(dm, SparsePair<double>::from_triplets(2, {{0, 0, 1.0}, {1, 0, 1.0}}));
  CHECK(singular.status == RunStatus::Singular);
  CHECK(real_value(singular) == 0.0);
  CHECK(!singular.reason.empty());

  const auto empty = run(RunConfig{}, SparsePair<double>::from_triplets(0, {}));
  CHECK(real_value(empty) == 1.0);

  std::vector<Triplet<double>> diag;
  for (int i = 0; i < 64; ++i) {
    diag.push_back({i, i, 2.0});
  }
  const auto big = SparsePair<double>::from_triplets(64, diag);
  CHECK(run(RunConfig{}, big).status == RunStatus::Impossible);
  CHECK(!run(RunConfig{}, big).value);
  const auto reduced = run(dm, big);
  CHECK(reduced.status == RunStatus::Ok);
  CHECK(real_value(reduced) == std::ldexp(1.0, 64));

  RunConfig slow;
  slow.time_limit_seconds = 1e-3;
  const auto t = run(slow, uniform(34, 1.0));
  CHECK(t.status == RunStatus::Timeout);
  CHECK(!t.value);
}

TEST_CASE("emitting partials and merging reproduces the parallel value") {
  std::mt19937_64 rng(63);
  const AnySparse m = dense_to_sparse(oracle::uniform_dense(rng, 12));
  const fs::path dir = fs::temp_directory_path() / "permanent-test-pipeline-emit";
  fs::remove_all(dir);
  RunConfig emit;
  emit.mode = RunMode::MultiProcessMerge;
  emit.processes = 4;
  emit.workers = 2;
  emit.emit_partials = dir.string();
  const auto e = run(emit, m);
  CHECK(e.status == RunStatus::Partial);
  CHECK(e.leaves_written.size() == 8);
  const auto again = run(emit, m);
  CHECK(again.leaves_written.empty());
  CHECK(again.leaves_skipped.size() == 8);
  RunConfig merge;
  merge.merge = dir.string();
  const auto merged = merge_run(merge);
  CHECK(merged.merged_files == 4);
  CHECK(*merged.value == *run(RunConfig{}, m).value);
  RunConfig bad = emit;
  bad.dm = true;
  CHECK_THROWS_AS(run(bad, m), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("reports are machine-parseable and stable") {
  RunConfig c;
  c.dm = true;
  c.fm = true;
  RunReport r = run(c, sample_6x6());
  r.input["path"] = "sample";
  const auto j = nlohmann::json::parse(to_json(r).dump());
  CHECK(j["status"] == "ok");
  CHECK(j["value"]["decimal"] == "-22.5");
  CHECK(j["value"]["hex"] == "-0x1.68p+4");
  CHECK(j["preprocess"]["dm"]["removed"] == 4);
  CHECK(j["matrix"]["input"]["path"] == "sample");
  CHECK(j["preprocess"].contains("fm"));
  RunReport r2 = run(c, sample_6x6());
  CHECK(to_json(r2)["value"] == j["value"]);
  CHECK(to_text(r).find("permanent:  -22.5") != std::string::npos);
  const auto integer = value_json(PermanentValue(BigInt("123456789012345678901234567890")));
  CHECK(integer["exact"] == "123456789012345678901234567890");
}

TEST_CASE("config names parse") {
  CHECK(parse_run_mode("multi-process-merge") == RunMode::MultiProcessMerge);
  CHECK(parse_algorithm("naive-oracle") == Algorithm::NaiveOracle);
  CHECK_THROWS_AS(parse_algorithm("gpu"), std::invalid_argument);
  CHECK_THROWS_AS(parse_run_mode("mpi"), std::invalid_argument);
}

TEST_CASE("selfcheck passes on a correct kernel and fails on a sign mutation") {
  std::ostringstream quiet;
  CHECK(all_passed(selfcheck(quiet)));
  SelfcheckHooks good;
  good.dense_kernel = [](const DenseMatrix<double>& a) { return fixture_kernel(a, false); };
  CHECK(all_passed(selfcheck(quiet, good)));
  SelfcheckHooks mutated;
  mutated.dense_kernel = [](const DenseMatrix<double>& a) { return fixture_kernel(a, true); };
  std::ostringstream out;
  const auto results = selfcheck(out, mutated);
  CHECK(!all_passed(results));
  CHECK(out.str().find("FAIL oracle equivalence") != std::string::npos);
}
