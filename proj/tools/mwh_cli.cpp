#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mwh/analyze.hpp"
#include "mwh/error.hpp"
#include "mwh/filter_io.hpp"

namespace fs = std::filesystem;

namespace {

int exit_code(mwh::ErrorCode c) {
  switch (c) {
    case mwh::ErrorCode::ParseError:
    case mwh::ErrorCode::UnknownBuiltin:
      return 2;
    case mwh::ErrorCode::BudgetExceeded:
    case mwh::ErrorCode::TolNotReached:
    case mwh::ErrorCode::TailBoundNotMet:
      return 4;
    default:
      return 3;
  }
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw mwh::Error(mwh::ErrorCode::PreconditionFailed, "cli", "cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer operator analysis of multiwavelet filter banks"};
  app.require_subcommand(1);

  std::string file, builtin, output;
  mwh::AnalyzeOptions opt;
  bool samples = false;
  auto* an = app.add_subcommand("analyze", "Run the full analysis and print a JSON report");
  an->add_option("file", file, "Filter spec JSON");
  an->add_option("--builtin", builtin, "Builtin filter name");
  an->add_option("--tol", opt.tol, "Spectral tolerance")->capture_default_str();
  an->add_option("--grid-level", opt.grid_level, "Sampling grid 2^level per dimension")->capture_default_str();
  an->add_option("--max-depth", opt.max_depth, "Cap on product and cascade depth")->capture_default_str();
  an->add_option("--seed", opt.seed, "Seed of the generic central element")->capture_default_str();
  an->add_option("--corr-tol", opt.corr_tol, "Lattice correlation tolerance")->capture_default_str();
  an->add_option("--output", output, "Directory for report.json and CSV samples");
  an->add_flag("--samples", samples, "Also emit products.csv and cascade.csv");
  an->add_flag("--timings", opt.timings, "Include per-stage timings in the report");

  auto* bl = app.add_subcommand("builtins", "List builtin filters");

  std::string export_name;
  auto* ex = app.add_subcommand("export", "Print the spec JSON of a builtin");
  ex->add_option("name", export_name, "Builtin filter name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*bl) {
      for (const auto& n : mwh::builtin_names()) std::cout << n << "\n";
      return 0;
    }
    if (*ex) {
      std::cout << mwh::serialize_filter_spec(mwh::builtin_spec(export_name));
      return 0;
    }
    if (file.empty() == builtin.empty()) {
      std::cerr << "error: give exactly one of a spec file or --builtin\n";
      return 2;
    }
    const mwh::LoadedFilter lf = builtin.empty() ? mwh::load_filter_file(file) : mwh::load_builtin(builtin);
    const mwh::Report rep = mwh::analyze(lf, opt);
    const std::string text = rep.json.dump(2) + "\n";
    if (output.empty()) {
      std::cout << text;
      if (samples) {
        std::cerr << "note: --samples needs --output\n";
      }
    } else {
      fs::create_directories(output);
      write_file(fs::path(output) / "report.json", text);
      if (samples) {
        // products need the QMF and E(l) hypotheses; otherwise report and skip
        try {
          write_file(fs::path(output) / "products.csv", mwh::products_csv(lf, 1e-10));
          write_file(fs::path(output) / "cascade.csv", mwh::cascade_csv(lf, std::min(30, opt.max_depth)));
        } catch (const mwh::Error& e) {
          if (e.code() != mwh::ErrorCode::PreconditionFailed) throw;
          std::cerr << "samples skipped: " << e.what() << "\n";
        }
      }
    }
    for (const auto& f : rep.findings) std::cerr << "finding: " << f.code << " [" << f.module << "]: " << f.message << "\n";
    return 0;
  } catch (const mwh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  }
}
