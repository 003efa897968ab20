#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "generators.hpp"
#include "permanent/errors.hpp"
#include "permanent/kernels.hpp"
#include "permanent/matrix_io.hpp"
#include "permanent/pipeline.hpp"
#include "permanent/report.hpp"
#include "permanent/selfcheck.hpp"

namespace {

using namespace permanent;

enum ExitCode : int {
  kOk = 0,
  kGeneric = 1,
  kUsage = 2,
  kParse = 3,
  kImpossible = 4,
  kTimeout = 5,
  kSingular = 6,
  kInterrupted = 130,
};

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) {
  g_stop.store(true);
  // A second Ctrl-C terminates immediately.
  std::signal(SIGINT, SIG_DFL);
}

struct Options {
  std::string input;
  std::string format = "auto";
  std::string generate;
  std::string mode;
  std::string algorithm = "auto";
  std::string policy = "dd";
  std::uint64_t workers = 0;
  std::uint64_t processes = 1;
  std::optional<std::uint64_t> process_index;
  bool aligned = true;
  std::vector<std::string> preprocess;
  std::uint64_t task_limit = 10'000'000;
  std::optional<double> time_limit;
  double zero_tolerance = 0.0;
  double dense_threshold = 0.30;
  int block_log2 = 6;
  std::string emit_partials;
  std::string merge;
  std::string report = "json";
  std::string output;
  bool strict_singular = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

/// Applies a JSON config file. Keys follow the flag names with underscores;
/// "processor_num" is accepted as an alias of "processes".
void apply_config_file(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file '" + path + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config file must hold a JSON object");
  }
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "input") o.input = v.get<std::string>();
      else if (key == "format") o.format = v.get<std::string>();
      else if (key == "generate") o.generate = v.get<std::string>();
      else if (key == "mode") o.mode = v.get<std::string>();
      else if (key == "algorithm") o.algorithm = v.get<std::string>();
      else if (key == "policy") o.policy = v.get<std::string>();
      else if (key == "workers") o.workers = v.get<std::uint64_t>();
      else if (key == "processes" || key == "processor_num") o.processes = v.get<std::uint64_t>();
      else if (key == "process_index") o.process_index = v.get<std::uint64_t>();
      else if (key == "aligned") o.aligned = v.get<bool>();
      else if (key == "preprocess") {
        o.preprocess = v.is_string() ? split_list(v.get<std::string>()) : v.get<std::vector<std::string>>();
      } else if (key == "task_limit") o.task_limit = v.get<std::uint64_t>();
      else if (key == "time_limit") o.time_limit = v.get<double>();
      else if (key == "zero_tolerance") o.zero_tolerance = v.get<double>();
      else if (key == "dense_threshold") o.dense_threshold = v.get<double>();
      else if (key == "block_log2") o.block_log2 = v.get<int>();
      else if (key == "emit_partials") o.emit_partials = v.get<std::string>();
      else if (key == "merge") o.merge = v.get<std::string>();
      else if (key == "report") o.report = v.get<std::string>();
      else if (key == "output") o.output = v.get<std::string>();
      else if (key == "strict_singular") o.strict_singular = v.get<bool>();
      else throw std::invalid_argument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw std::invalid_argument(std::string("config value has the wrong type: ") + e.what());
  }
}

RunConfig to_run_config(const Options& o) {
  RunConfig c;
  if (!o.mode.empty()) {
    c.mode = parse_run_mode(o.mode);
  } else if (!o.emit_partials.empty() || !o.merge.empty()) {
    c.mode = RunMode::MultiProcessMerge;
  }
  c.workers = o.workers;
  if (o.processes < 1) {
    throw std::invalid_argument("--processes must be at least 1");
  }
  c.processes = o.processes;
  c.process_index = o.process_index;
  c.algorithm = parse_algorithm(o.algorithm);
  c.policy = parse_policy(o.policy);
  c.aligned = o.aligned;
  for (const auto& p : o.preprocess) {
    if (p == "dm") c.dm = true;
    else if (p == "fm") c.fm = true;
    else if (p != "none") throw std::invalid_argument("unknown preprocess step '" + p + "'");
  }
  c.task_limit = o.task_limit;
  c.time_limit_seconds = o.time_limit;
  if (o.zero_tolerance < 0) {
    throw std::invalid_argument("--zero-tolerance must be non-negative");
  }
  c.zero_tolerance = o.zero_tolerance;
  c.dense_threshold = o.dense_threshold;
  c.block_log2_count = o.block_log2;
  c.emit_partials = o.emit_partials;
  c.merge = o.merge;
  c.stop = &g_stop;
  return c;
}

int exit_code_for(const RunReport& r, bool strict_singular) {
  switch (r.status) {
  case RunStatus::Ok:
  case RunStatus::Partial:
    return kOk;
  case RunStatus::Singular:
    return strict_singular ? kSingular : kOk;
  case RunStatus::Timeout:
    return kTimeout;
  case RunStatus::Impossible:
    return kImpossible;
  case RunStatus::Interrupted:
    return kInterrupted;
  }
  return kGeneric;
}

void emit_report(const RunReport& r, const Options& o) {
  std::string text = o.report == "text" ? to_text(r) : to_json(r).dump(2) + "\n";
  if (o.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(o.output);
    if (!out) {
      throw std::runtime_error("cannot write report to '" + o.output + "'");
    }
    out << text;
  }
}

/// policy x n -> relative error and wall time, serial dense kernel on
/// matrices with every entry equal to a.
int precision_table(const std::vector<int>& sizes, double a, std::ostream& out) {
  out << "policy,n,a,relative_error,seconds\n";
  for (Policy p : {Policy::DD, Policy::Kahan, Policy::DQ, Policy::QQ}) {
    for (int n : sizes) {
      const auto m = DenseMatrix<double>::filled(n, a);
      const auto start = std::chrono::steady_clock::now();
      const DoubleDouble v = perm_nw(m, p);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const double err = relative_error(v, reference_permanent(n, a)).value;
      char line[160];
      std::snprintf(line, sizeof line, "%s,%d,%.17g,%.6e,%.6f\n", std::string(to_string(p)).c_str(), n, a, err,
                    secs);
      out << line;
    }
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact matrix permanent engine"};
  Options o;
  std::string config_path;
  bool selfcheck_flag = false;
  std::string table_sizes;
  double table_value = 0.91;

  app.add_option("--config", config_path, "JSON config file; command-line flags override its values");
  app.add_option("-i,--input", o.input, "Matrix file (Matrix Market or dense text)");
  app.add_option("--format", o.format, "Input format: auto, mm, dense");
  app.add_option("--generate", o.generate,
                 "Built-in generator: uniform:n,a | sparse:n,density,seed | binary:n,density,seed | dense:n,seed");
  app.add_option("--mode", o.mode, "serial, parallel or multi-process-merge");
  app.add_option("--algorithm", o.algorithm, "auto, dense, sparse, decomp or naive-oracle");
  app.add_option("--policy", o.policy, "Accumulation policy: dd, kahan, dq, qq");
  app.add_option("--workers", o.workers, "Worker threads per process (0 = hardware concurrency)");
  app.add_option("--processes", o.processes, "Logical processes for partial emission");
  app.add_option("--process-index", o.process_index, "Emit only this process's partial file");
  app.add_flag("--aligned,!--no-aligned", o.aligned, "Round chunk sizes down to a power of two");
  app.add_option("--preprocess", o.preprocess, "Comma-separated preprocessing steps: dm, fm")->delimiter(',');
  app.add_option("--task-limit", o.task_limit, "Maximum decomposition tasks");
  app.add_option("--time-limit", o.time_limit, "Wall-clock limit in seconds");
  app.add_option("--zero-tolerance", o.zero_tolerance, "Entries with magnitude at or below this are dropped");
  app.add_option("--dense-threshold", o.dense_threshold, "Density at or above which the dense kernel is used");
  app.add_option("--block-log2", o.block_log2, "log2 of the block count used for deterministic reduction");
  app.add_option("--emit-partials", o.emit_partials, "Directory for per-process partial files");
  app.add_option("--merge", o.merge, "Directory of partial files to merge");
  app.add_option("--report", o.report, "Report format: json or text")->check(CLI::IsMember({"json", "text"}));
  app.add_option("-o,--output", o.output, "Write the report to this file instead of stdout");
  app.add_flag("--strict-singular", o.strict_singular, "Exit with a distinct code when no perfect matching exists");
  app.add_flag("--selfcheck", selfcheck_flag, "Run the built-in property suite");
  app.add_option("--precision-table", table_sizes, "Comma-separated sizes; prints a policy x n error CSV");
  app.add_option("--precision-value", table_value, "Entry value for --precision-table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (selfcheck_flag) {
      return all_passed(selfcheck(std::cout)) ? kOk : kGeneric;
    }
    if (!table_sizes.empty()) {
      std::vector<int> sizes;
      for (const auto& s : split_list(table_sizes)) {
        const int n = std::stoi(s);
        if (n < 1 || n > 30) {
          throw std::invalid_argument("--precision-table sizes must lie in [1,30]");
        }
        sizes.push_back(n);
      }
      return precision_table(sizes, table_value, std::cout);
    }

    // Config file first, then re-parse so explicit flags take precedence.
    if (!config_path.empty()) {
      Options from_file;
      apply_config_file(config_path, from_file);
      o = from_file;
      app.parse(argc, argv);
    }
    const RunConfig config = to_run_config(o);
    std::signal(SIGINT, on_sigint);

    if (!config.merge.empty()) {
      const RunReport r = merge_run(config);
      emit_report(r, o);
      return exit_code_for(r, o.strict_singular);
    }

    if (o.input.empty() == o.generate.empty()) {
      throw std::invalid_argument("exactly one of --input or --generate is required");
    }
    std::map<std::string, std::string> provenance;
    std::optional<AnySparse> matrix;
    if (!o.generate.empty()) {
      auto g = tools::generate(o.generate);
      matrix.emplace(std::move(g.matrix));
      provenance = std::move(g.provenance);
    } else {
      IngestOptions io;
      io.format = parse_input_format(o.format);
      io.zero_tolerance = config.zero_tolerance;
      // Preprocessing can reduce a large sparse input to small blocks.
      io.max_n = (config.dm || config.fm) ? kMaxSparseDim : kMaxKernelDim;
      try {
        matrix.emplace(ingest(o.input, io).matrix);
      } catch (const ImpossibleError& e) {
        RunReport r;
        r.status = RunStatus::Impossible;
        r.reason = e.what();
        r.mode = config.mode;
        r.algorithm = config.algorithm;
        r.policy = config.policy;
        r.input["path"] = o.input;
        emit_report(r, o);
        return kImpossible;
      }
      provenance["path"] = o.input;
    }

    RunReport r = run(config, *matrix);
    r.input = std::move(provenance);
    emit_report(r, o);
    return exit_code_for(r, o.strict_singular);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  } catch (const permanent::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const ImpossibleError& e) {
    std::cerr << "impossible: " << e.what() << '\n';
    return kImpossible;
  } catch (const TimeoutError& e) {
    std::cerr << "timeout: " << e.what() << '\n';
    return kTimeout;
  } catch (const InterruptedError& e) {
    std::cerr << "interrupted: " << e.what() << '\n';
    return kInterrupted;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kGeneric;
  }
}
