#include "permanent/partial_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "permanent/errors.hpp"

namespace permanent {

namespace {

constexpr const char* kMagic = "permanent-partials 1";

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex(const std::string& t, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v)) {
    throw ParseError("invalid floating-point component '" + t + "'", line);
  }
  return v;
}

void write_components(std::ostringstream& out, const ExactSum& s) {
  const auto parts = s.components();
  out << ' ' << parts.size();
  for (double p : parts) {
    out << ' ' << hex(p);
  }
}

std::string format_value(const PartialValue& v) {
  std::ostringstream out;
  std::visit(
      [&](const auto& x) {
        using V = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<V, ExactSum>) {
          out << "real";
          write_components(out, x);
        } else if constexpr (std::is_same_v<V, ExactComplex>) {
          out << "complex";
          write_components(out, x.re);
          write_components(out, x.im);
        } else {
          out << "int " << x.str();
        }
      },
      v);
  return out.str();
}

class Tokens {
public:
  Tokens(const std::string& line, std::size_t number) : number_(number) {
    std::istringstream in(line);
    std::string t;
    while (in >> t) {
      tokens_.push_back(t);
    }
  }

  bool done() const { return pos_ == tokens_.size(); }
  std::size_t line() const { return number_; }

  const std::string& next() {
    if (done()) {
      throw ParseError("unexpected end of line", number_);
    }
    return tokens_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::string& t = next();
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      throw ParseError("invalid unsigned integer '" + t + "'", number_);
    }
    return v;
  }

  void expect_end() const {
    if (!done()) {
      throw ParseError("trailing fields", number_);
    }
  }

private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  std::size_t number_;
};

ExactSum read_components(Tokens& tok) {
  const std::uint64_t count = tok.next_u64();
  if (count > 64) {
    throw ParseError("too many components", tok.line());
  }
  std::vector<double> parts;
  for (std::uint64_t k = 0; k < count; ++k) {
    parts.push_back(parse_hex(tok.next(), tok.line()));
  }
  return ExactSum::from_components(parts);
}

PartialValue read_value(Tokens& tok) {
  const std::string kind = tok.next();
  if (kind == "real") {
    return read_components(tok);
  }
  if (kind == "complex") {
    ExactComplex c;
    c.re = read_components(tok);
    c.im = read_components(tok);
    return c;
  }
  if (kind == "int") {
    const std::string& digits = tok.next();
    const bool ok = !digits.empty() &&
                    std::all_of(digits.begin() + (digits[0] == '-' ? 1 : 0), digits.end(),
                                [](unsigned char c) { return std::isdigit(c); }) &&
                    digits != "-";
    if (!ok) {
      throw ParseError("invalid integer payload", tok.line());
    }
    return BigInt(digits);
  }
  throw ParseError("unknown payload kind '" + kind + "'", tok.line());
}

ScalarKind parse_kind(const std::string& s, std::size_t line) {
  for (ScalarKind k : {ScalarKind::real64, ScalarKind::complex128, ScalarKind::integer}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw ParseError("unknown scalar kind '" + s + "'", line);
}

} // namespace

std::string format_header(const PartialHeader& h) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "n " << h.n << '\n';
  out << "kind " << to_string(h.kind) << '\n';
  out << "policy " << to_string(h.policy) << '\n';
  out << "fingerprint " << h.fingerprint << '\n';
  out << "processes " << h.processes << '\n';
  out << "workers " << h.workers_per_process << '\n';
  out << "aligned " << (h.aligned ? 1 : 0) << '\n';
  out << "block_log2 " << h.block_log2_count << '\n';
  out << "leaves " << h.leaves << '\n';
  out << "p0 " << format_value(h.p0) << '\n';
  out << "end-header\n";
  return out.str();
}

std::string format_record(const PartialResult& r) {
  std::ostringstream out;
  out << "worker " << r.worker_id << ' ' << r.range.start << ' ' << r.range.end << ' ' << r.iterations_done << ' '
      << format_value(r.value) << '\n';
  return out.str();
}

PartialFile read_partials(std::istream& in) {
  PartialFile file;
  std::string line;
  std::size_t number = 0;
  auto header_line = [&](const char* key) {
    if (!std::getline(in, line) || in.eof()) {
      throw ParseError(std::string("missing header field '") + key + "'", number + 1);
    }
    ++number;
    Tokens tok(line, number);
    if (tok.next() != key) {
      throw ParseError(std::string("expected header field '") + key + "'", number);
    }
    return tok;
  };

  if (!std::getline(in, line) || line != kMagic) {
    throw ParseError("not a partial-result file", 1);
  }
  number = 1;
  PartialHeader& h = file.header;
  {
    auto t = header_line("n");
    h.n = static_cast<int>(t.next_u64());
    t.expect_end();
  }
  {
    auto t = header_line("kind");
    h.kind = parse_kind(t.next(), t.line());
    t.expect_end();
  }
  {
    auto t = header_line("policy");
    try {
      h.policy = parse_policy(t.next());
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), t.line());
    }
    t.expect_end();
  }
  {
    auto t = header_line("fingerprint");
    h.fingerprint = t.next_u64();
    t.expect_end();
  }
  {
    auto t = header_line("processes");
    h.processes = t.next_u64();
    t.expect_end();
  }
  {
    auto t = header_line("workers");
    h.workers_per_process = t.next_u64();
    t.expect_end();
  }
  {
    auto t = header_line("aligned");
    h.aligned = t.next_u64() != 0;
    t.expect_end();
  }
  {
    auto t = header_line("block_log2");
    h.block_log2_count = static_cast<int>(t.next_u64());
    t.expect_end();
  }
  {
    auto t = header_line("leaves");
    h.leaves = t.next_u64();
    t.expect_end();
  }
  {
    auto t = header_line("p0");
    h.p0 = read_value(t);
    t.expect_end();
  }
  header_line("end-header").expect_end();
  if (h.n < 1 || h.n > kMaxKernelDim) {
    throw ParseError("dimension out of range", 2);
  }

  while (std::getline(in, line)) {
    ++number;
    if (in.eof()) {
      break; // interrupted write; the record is incomplete
    }
    if (line.empty()) {
      continue;
    }
    Tokens t(line, number);
    if (t.next() != "worker") {
      throw ParseError("expected a worker record", number);
    }
    PartialResult r;
    const std::uint64_t id = t.next_u64();
    if (id > UINT32_MAX) {
      throw ParseError("worker id out of range", number);
    }
    r.worker_id = static_cast<std::uint32_t>(id);
    r.range.start = t.next_u64();
    r.range.end = t.next_u64();
    r.iterations_done = t.next_u64();
    r.value = read_value(t);
    t.expect_end();
    file.records.push_back(std::move(r));
  }
  return file;
}

PartialFile read_partials(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  return read_partials(in);
}

std::filesystem::path partial_path(const std::filesystem::path& dir, std::uint64_t process) {
  return dir / ("process-" + std::to_string(process) + ".partial");
}

PartialWriter::PartialWriter(const std::filesystem::path& path, const PartialHeader& header) : path_(path) {
  if (std::filesystem::exists(path)) {
    const PartialFile existing = read_partials(path);
    if (!(existing.header == header)) {
      throw StructuralError("'" + path.string() + "' belongs to a different run");
    }
    for (const auto& r : existing.records) {
      completed_.push_back(r.worker_id);
    }
    // Drop a trailing partial line left by an interrupted write.
    std::ostringstream clean;
    clean << format_header(existing.header);
    for (const auto& r : existing.records) {
      clean << format_record(r);
    }
    std::ofstream out(path, std::ios::trunc);
    out << clean.str();
    if (!out) {
      throw std::runtime_error("cannot rewrite '" + path.string() + "'");
    }
    return;
  }
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  out << format_header(header);
  if (!out) {
    throw std::runtime_error("cannot write '" + path.string() + "'");
  }
}

void PartialWriter::append(const PartialResult& r) {
  std::ofstream out(path_, std::ios::app);
  out << format_record(r) << std::flush;
  if (!out) {
    throw std::runtime_error("cannot append to '" + path_.string() + "'");
  }
  completed_.push_back(r.worker_id);
}

MergeOutcome merge_partials(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".partial") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw StructuralError("no .partial files in '" + dir.string() + "'");
  }
  MergeOutcome outcome;
  std::map<std::uint32_t, PartialResult> by_id;
  for (const auto& path : files) {
    PartialFile f = read_partials(path);
    if (outcome.files == 0) {
      outcome.header = f.header;
    } else if (!(f.header == outcome.header)) {
      throw StructuralError("'" + path.string() + "' belongs to a different run");
    }
    ++outcome.files;
    for (auto& r : f.records) {
      auto [it, inserted] = by_id.try_emplace(r.worker_id, r);
      if (!inserted && !(it->second.range == r.range && it->second.value == r.value &&
                         it->second.iterations_done == r.iterations_done)) {
        throw StructuralError("conflicting records for worker " + std::to_string(r.worker_id));
      }
    }
  }
  if (by_id.size() != outcome.header.leaves) {
    throw StructuralError("expected " + std::to_string(outcome.header.leaves) + " worker records, found " +
                          std::to_string(by_id.size()));
  }
  std::vector<PartialResult> partials;
  for (auto& [id, r] : by_id) {
    partials.push_back(std::move(r));
  }
  outcome.records = partials.size();
  outcome.value = reduce(std::move(partials), outcome.header.p0, outcome.header.n);
  return outcome;
}

} // namespace permanent
