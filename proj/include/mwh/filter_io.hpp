#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mwh/lattice.hpp"
#include "mwh/trigmat.hpp"

namespace mwh {

struct CoeffSpec {
  std::vector<int> index;
  /// d*d entries, row-major.
  std::vector<double> re, im;
  bool operator==(const CoeffSpec&) const = default;
};

/// On-disk description of a filter bank (JSON, "schema": 1).
struct FilterSpec {
  std::string name;
  int n = 1;
  /// n*n entries, row-major.
  std::vector<std::int64_t> A;
  int d = 1;
  std::vector<CoeffSpec> coeffs;
  bool operator==(const FilterSpec&) const = default;
};

/// Throws ParseError with line/column or the offending field.
FilterSpec parse_filter_spec(const std::string& text);
std::string serialize_filter_spec(const FilterSpec& spec);

std::vector<std::string> builtin_names();
/// Throws UnknownBuiltin.
FilterSpec builtin_spec(const std::string& name);

MatTrigPoly spec_filter(const FilterSpec& spec);
IMat spec_dilation(const FilterSpec& spec);
FilterSpec make_spec(const std::string& name, const IMat& A, const MatTrigPoly& m);

struct LoadedFilter {
  FilterSpec spec;
  MatTrigPoly m;
  DilationSystem sys;
};

/// Builds filter and dilation system from a spec.
LoadedFilter load_filter(const FilterSpec& spec);
/// Reads a spec file (ParseError when unreadable or malformed).
LoadedFilter load_filter_file(const std::string& path);
LoadedFilter load_builtin(const std::string& name);

}  // namespace mwh
