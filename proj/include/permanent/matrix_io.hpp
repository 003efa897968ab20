#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "permanent/matrix.hpp"

namespace permanent {

enum class InputFormat { Auto, MatrixMarket, DenseText };

/// "auto", "mm" / "matrix-market", "dense" / "dense-text".
InputFormat parse_input_format(std::string_view name);

struct IngestOptions {
  InputFormat format = InputFormat::Auto;
  /// Larger inputs raise ImpossibleError. Preprocessing may shrink a large
  /// sparse matrix, so callers that preprocess can raise this.
  int max_n = kMaxKernelDim;
  double zero_tolerance = 0.0;
};

struct Ingested {
  AnySparse matrix;
  InputFormat format = InputFormat::MatrixMarket;
  bool pattern = false;
};

/// Reads a matrix. Malformed input raises ParseError with a line number.
Ingested ingest(const std::filesystem::path& path, const IngestOptions& options = {});
Ingested ingest(std::istream& in, const IngestOptions& options = {});

/// Matrix Market coordinate or array data. Pattern matrices become integer
/// 0/1; symmetric, skew-symmetric and hermitian storage is expanded.
/// Duplicate coordinates are summed.
Ingested read_matrix_market(std::istream& in, int max_n = kMaxKernelDim);

/// One matrix row per line, whitespace separated; '#' starts a comment.
/// All-integer input yields the integer kind, anything else real.
Ingested read_dense_text(std::istream& in, int max_n = kMaxKernelDim);

/// Coordinate general output with round-trip precision.
void write_matrix_market(std::ostream& out, const AnySparse& matrix);

} // namespace permanent
