#include "generators.hpp"

#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace permanent::tools {

namespace {

std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_n(const std::string& s) {
  std::size_t used = 0;
  const long v = std::stol(s, &used);
  if (used != s.size() || v < 0 || v > kMaxSparseDim) {
    throw std::invalid_argument("bad generator dimension '" + s + "'");
  }
  return static_cast<int>(v);
}

double parse_real(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) {
    throw std::invalid_argument("bad generator value '" + s + "'");
  }
  return v;
}

std::uint64_t parse_seed(const std::string& s) {
  std::size_t used = 0;
  const unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) {
    throw std::invalid_argument("bad generator seed '" + s + "'");
  }
  return v;
}

double parse_density(const std::string& s) {
  const double d = parse_real(s);
  if (!(d >= 0.0 && d <= 1.0)) {
    throw std::invalid_argument("generator density must lie in [0,1]");
  }
  return d;
}

} // namespace

Generated generate(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("generator spec needs the form kind:args");
  }
  const std::string kind(spec.substr(0, colon));
  const auto args = split_args(spec.substr(colon + 1));
  std::map<std::string, std::string> provenance{{"generator", std::string(spec)}, {"generator_kind", kind}};

  const auto expect = [&](std::size_t count) {
    if (args.size() != count) {
      throw std::invalid_argument("generator '" + kind + "' takes " + std::to_string(count) + " arguments");
    }
  };

  if (kind == "uniform") {
    expect(2);
    const int n = parse_n(args[0]);
    const double a = parse_real(args[1]);
    std::vector<Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        t.push_back({i, j, a});
      }
    }
    provenance["value"] = args[1];
    return {SparsePair<double>::from_triplets(n, t), provenance};
  } else if (kind == "sparse" || kind == "dense") {
    const bool sparse = kind == "sparse";
    expect(sparse ? 3 : 2);
    const int n = parse_n(args[0]);
    const double d = sparse ? parse_density(args[1]) : 1.0;
    const std::uint64_t seed = parse_seed(args[sparse ? 2 : 1]);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(d);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    std::vector<Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (keep(rng)) {
          t.push_back({i, j, value(rng)});
        }
      }
    }
    provenance["seed"] = std::to_string(seed);
    provenance["density"] = sparse ? args[1] : "1";
    return {SparsePair<double>::from_triplets(n, t), provenance};
  } else if (kind == "binary") {
    expect(3);
    const int n = parse_n(args[0]);
    const double d = parse_density(args[1]);
    const std::uint64_t seed = parse_seed(args[2]);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution keep(d);
    std::vector<Triplet<BigInt>> t;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (keep(rng)) {
          t.push_back({i, j, BigInt(1)});
        }
      }
    }
    provenance["seed"] = std::to_string(seed);
    provenance["density"] = args[1];
    return {SparsePair<BigInt>::from_triplets(n, t), provenance};
  }
  throw std::invalid_argument("unknown generator '" + kind + "'");
}

} // namespace permanent::tools
