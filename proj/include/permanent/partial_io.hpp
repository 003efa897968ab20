#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "permanent/parallel.hpp"

namespace permanent {

/// Identity of a partitioned run. Every partial file of one run carries the
/// same header; merge refuses to mix files whose headers differ.
struct PartialHeader {
  int n = 0;
  ScalarKind kind = ScalarKind::real64;
  Policy policy = Policy::DD;
  std::uint64_t fingerprint = 0;
  std::uint64_t processes = 1;
  std::uint64_t workers_per_process = 1;
  bool aligned = true;
  int block_log2_count = 6;
  std::uint64_t leaves = 0;
  PartialValue p0;

  bool operator==(const PartialHeader&) const = default;
};

struct PartialFile {
  PartialHeader header;
  std::vector<PartialResult> records;
};

/// Line-oriented text. Real values are written as exact lists of hexadecimal
/// floating-point components, integers in decimal.
std::string format_header(const PartialHeader& h);
std::string format_record(const PartialResult& r);

/// Parses a partial file. A final line without a newline is treated as an
/// interrupted write and ignored; any other malformed line is a ParseError.
PartialFile read_partials(std::istream& in);
PartialFile read_partials(const std::filesystem::path& path);

/// Conventional file name for process p inside a partials directory.
std::filesystem::path partial_path(const std::filesystem::path& dir, std::uint64_t process);

/// Appends records to a partial file, creating it with the header when it
/// does not exist. An existing file must carry an identical header; its
/// completed worker ids are reported so a rerun can skip them.
class PartialWriter {
public:
  PartialWriter(const std::filesystem::path& path, const PartialHeader& header);

  const std::vector<std::uint32_t>& completed() const { return completed_; }
  void append(const PartialResult& r);

private:
  std::filesystem::path path_;
  std::vector<std::uint32_t> completed_;
};

struct MergeOutcome {
  PartialHeader header;
  PermanentValue value;
  std::size_t files = 0;
  std::size_t records = 0;
};

/// Reads every partial file of a directory and reduces them. Identical
/// duplicate records are tolerated; conflicting ones are a StructuralError.
MergeOutcome merge_partials(const std::filesystem::path& dir);

} // namespace permanent
