#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mwh/filter_io.hpp"

namespace mwh {

struct AnalyzeOptions {
  double tol = 1e-8;
  int grid_level = 8;
  int max_depth = 200;
  std::uint64_t seed = 0x5eed;
  /// Tolerance of lattice-sum correlations.
  double corr_tol = 1e-6;
  /// Lattice cross-check tolerance when the fast route applies.
  double cross_check_tol = 1e-3;
  int kmax = 10;
  bool timings = false;
};

struct Finding {
  std::string module;
  std::string code;
  std::string message;
};

struct Report {
  nlohmann::ordered_json json;
  std::vector<Finding> findings;
};

/// Runs qmf -> E(l) -> support -> transition -> spectral -> algebra ->
/// Wedderburn -> projections -> certificates.  Failures in the first five
/// stages propagate as Error; later failures become findings.
Report analyze(const LoadedFilter& filter, const AnalyzeOptions& opt = {});

/// CSV of P(x) over [-4,4]^n: header, then x columns and re/im entries.
std::string products_csv(const LoadedFilter& filter, double tol);
/// CSV of a cascade run from s0 = first E1 vector at depth k.
std::string cascade_csv(const LoadedFilter& filter, int k);

}  // namespace mwh
