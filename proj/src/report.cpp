#include "permanent/report.hpp"

#include <cstdio>
#include <sstream>

namespace permanent {

std::string decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hexfloat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

nlohmann::json value_json(const PermanentValue& v) {
  nlohmann::json j;
  std::visit(
      [&](const auto& x) {
        using V = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<V, DoubleDouble>) {
          j["kind"] = "real64";
          j["decimal"] = decimal(x.hi);
          j["hex"] = hexfloat(x.hi);
          j["dd"] = {{"hi", hexfloat(x.hi)}, {"lo", hexfloat(x.lo)}};
        } else if constexpr (std::is_same_v<V, Complex>) {
          j["kind"] = "complex128";
          j["decimal"] = {decimal(x.real()), decimal(x.imag())};
          j["hex"] = {hexfloat(x.real()), hexfloat(x.imag())};
        } else {
          j["kind"] = "integer";
          j["exact"] = x.str();
          j["decimal"] = x.str();
          j["hex"] = hexfloat(x.template convert_to<double>());
        }
      },
      v);
  return j;
}

namespace {

nlohmann::json plan_json(const PlanSummary& p) {
  nlohmann::json j{{"total_iterations", p.total},
                   {"tau", p.tau},
                   {"chunk_size", p.chunk_size},
                   {"aligned", p.aligned},
                   {"tau_clamped", p.tau_clamped},
                   {"ranges", p.ranges},
                   {"processes", p.processes},
                   {"workers_per_process", p.workers_per_process}};
  if (p.residual) {
    j["residual"] = {p.residual->start, p.residual->end};
  } else {
    j["residual"] = nullptr;
  }
  return j;
}

} // namespace

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j;
  j["status"] = std::string(to_string(r.status));
  if (!r.reason.empty()) {
    j["reason"] = r.reason;
  }
  j["value"] = r.value ? value_json(*r.value) : nlohmann::json(nullptr);
  j["matrix"] = {{"n", r.n}, {"nnz", r.nnz}, {"kind", std::string(to_string(r.kind))}};
  for (const auto& [k, v] : r.input) {
    j["matrix"]["input"][k] = v;
  }
  j["config"] = {{"mode", std::string(to_string(r.mode))},
                 {"algorithm", std::string(to_string(r.algorithm))},
                 {"policy", std::string(to_string(r.policy))},
                 {"workers", r.workers}};
  j["kernels"] = r.kernels;
  j["elapsed_seconds"] = r.elapsed_seconds;
  j["plan"] = r.plan ? plan_json(*r.plan) : nlohmann::json(nullptr);
  nlohmann::json pre;
  if (r.dm_applied) {
    pre["dm"] = {{"nnz_before", r.nnz},
                 {"nnz_after", r.nnz_after_dm},
                 {"removed", r.nnz - r.nnz_after_dm},
                 {"scc_count", r.scc_count},
                 {"blocks", r.blocks}};
  }
  if (r.decomp) {
    const DecompStats& d = *r.decomp;
    pre["fm"] = {{"tasks", d.tasks},
                 {"d1", d.d1},
                 {"d2", d.d2},
                 {"d34", d.d34},
                 {"zero_pruned", d.zero_pruned},
                 {"trivial_leaves", d.trivial_leaves},
                 {"submatrices", d.kernel_leaves()},
                 {"dense_leaves", d.dense_leaves},
                 {"sparse_leaves", d.sparse_leaves},
                 {"average_n", d.average_leaf_n()},
                 {"average_nnz", d.average_leaf_nnz()}};
  }
  j["preprocess"] = pre.is_null() ? nlohmann::json::object() : pre;
  j["reference_relative_error"] = r.reference_error ? nlohmann::json(*r.reference_error) : nlohmann::json(nullptr);
  if (r.mode == RunMode::MultiProcessMerge) {
    j["partials"] = {{"written", r.leaves_written}, {"skipped", r.leaves_skipped}, {"merged_files", r.merged_files}};
  }
  return j;
}

std::string to_text(const RunReport& r) {
  std::ostringstream out;
  out << "status:     " << to_string(r.status) << '\n';
  if (!r.reason.empty()) {
    out << "reason:     " << r.reason << '\n';
  }
  if (r.value) {
    const auto v = value_json(*r.value);
    if (v["decimal"].is_array()) {
      out << "permanent:  " << v["decimal"][0].get<std::string>() << " + " << v["decimal"][1].get<std::string>()
          << "i\n";
    } else {
      out << "permanent:  " << v["decimal"].get<std::string>() << '\n';
      out << "hex:        " << v["hex"].get<std::string>() << '\n';
    }
  }
  out << "matrix:     n=" << r.n << " nnz=" << r.nnz << " kind=" << to_string(r.kind) << '\n';
  out << "run:        mode=" << to_string(r.mode) << " algorithm=" << to_string(r.algorithm)
      << " policy=" << to_string(r.policy) << " workers=" << r.workers << '\n';
  if (r.plan) {
    out << "plan:       tau=" << r.plan->tau << " chunk=" << r.plan->chunk_size
        << " aligned=" << (r.plan->aligned ? "yes" : "no") << " ranges=" << r.plan->ranges;
    if (r.plan->residual) {
      out << " residual=[" << r.plan->residual->start << "," << r.plan->residual->end << "]";
    }
    out << '\n';
  }
  if (r.dm_applied) {
    out << "dm:         nnz " << r.nnz << " -> " << r.nnz_after_dm << ", " << r.scc_count << " SCCs, " << r.blocks
        << " blocks\n";
  }
  if (r.decomp) {
    out << "fm:         " << r.decomp->kernel_leaves() << " submatrices (avg n " << r.decomp->average_leaf_n()
        << ", avg nnz " << r.decomp->average_leaf_nnz() << "), d1=" << r.decomp->d1 << " d2=" << r.decomp->d2
        << " d34=" << r.decomp->d34 << '\n';
  }
  if (r.reference_error) {
    out << "ref error:  " << *r.reference_error << '\n';
  }
  if (r.mode == RunMode::MultiProcessMerge) {
    out << "partials:   written=" << r.leaves_written.size() << " skipped=" << r.leaves_skipped.size()
        << " merged_files=" << r.merged_files << '\n';
  }
  out << "elapsed:    " << r.elapsed_seconds << " s\n";
  return out.str();
}

} // namespace permanent
