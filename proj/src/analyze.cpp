#include "mwh/analyze.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>

#include "mwh/cascade.hpp"
#include "mwh/error.hpp"
#include "mwh/harmonic.hpp"
#include "mwh/transfer.hpp"

namespace mwh {

namespace {

using json = nlohmann::ordered_json;

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

json vec_json(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cj(v[i]));
  return a;
}

json mat_json(const CMat& M) {
  json re = json::array(), im = json::array();
  for (Eigen::Index a = 0; a < M.rows(); ++a)
    for (Eigen::Index b = 0; b < M.cols(); ++b) {
      re.push_back(M(a, b).real());
      im.push_back(M(a, b).imag());
    }
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"re", re}, {"im", im}};
}

json poly_json(const MatTrigPoly& p) {
  json a = json::array();
  for (const auto& [k, M] : p.coeffs()) {
    json re = json::array(), im = json::array();
    for (int r = 0; r < p.rows(); ++r)
      for (int c = 0; c < p.cols(); ++c) {
        re.push_back(M(r, c).real());
        im.push_back(M(r, c).imag());
      }
    a.push_back(json{{"index", k}, {"re", re}, {"im", im}});
  }
  return a;
}

std::vector<RVec> box_grid(int n, int per_dim, double lo, double hi) {
  std::vector<RVec> pts = unit_grid(n, per_dim);
  for (RVec& x : pts)
    for (Eigen::Index c = 0; c < x.size(); ++c) x[c] = lo + (hi - lo) * x[c] * per_dim / (per_dim - 1);
  return pts;
}

int csv_points(int n) { return n == 1 ? 161 : (n == 2 ? 41 : 17); }

class Stages {
 public:
  Stages(Report& rep, bool timings) : rep_(rep), timings_(timings) {}

  /// Runs f; an Error becomes a finding and false is returned.
  bool optional(const std::string& name, const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    try {
      f();
    } catch (const Error& e) {
      rep_.findings.push_back({e.module(), std::string(to_string(e.code())), e.message()});
      ok = false;
    }
    record(name, t0);
    return ok;
  }

  void mandatory(const std::string& name, const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    record(name, t0);
  }

  json timings() const { return times_; }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point t0) {
    if (!timings_) return;
    times_[name] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }

  Report& rep_;
  bool timings_;
  json times_ = json::object();
};

}  // namespace

Report analyze(const LoadedFilter& filter, const AnalyzeOptions& opt) {
  Report rep;
  json& J = rep.json;
  Stages st(rep, opt.timings);
  const MatTrigPoly& m = filter.m;
  const DilationSystem& sys = filter.sys;
  if (m.n() != sys.n()) throw Error(ErrorCode::DimensionMismatch, "cli", "filter and dilation dimensions differ");

  J["schema"] = 1;
  json digits = json::array();
  for (const IVec& g : sys.digits()) digits.push_back(to_freq(g));
  J["filter"] = json{{"name", filter.spec.name}, {"n", sys.n()}, {"d", m.d()}, {"A", filter.spec.A},
                     {"q", sys.q()},          {"digits", digits}};

  double qmf_exact = 0;
  st.mandatory("qmf", [&] {
    const double grid = qmf_residual(m, sys, opt.grid_level);
    qmf_exact = qmf_residual_exact(m, sys);
    J["qmf_residual"] = json{{"grid", grid}, {"coefficient", qmf_exact}};
  });
  const bool qmf = qmf_exact <= 1e-10;

  ElReport el;
  st.mandatory("el", [&] {
    el = el_condition(m, sys, opt.tol);
    json basis = json::array();
    for (const CVec& v : el.E1_basis) basis.push_back(vec_json(v));
    J["el"] = json{{"holds", el.holds},
                   {"l", el.l},
                   {"reason", el.reason},
                   {"norm_m0", el.norm_m0},
                   {"spectral_margin", el.spectral_margin},
                   {"E1_basis", basis},
                   {"annihilation_residual", el.annihilation_residual},
                   {"adjoint_residual", el.adjoint_residual}};
  });

  std::optional<TransitionOperator> T;
  st.mandatory("support", [&] {
    const SupportSet K = invariant_support(m, sys);
    T.emplace(transition_operator(m, sys, K));
  });

  std::unique_ptr<TransferAnalysis> ta;
  bool spectral_ok = st.optional("spectral", [&] {
    try {
      SpectralData sd = spectral_data(*T, sys, opt.tol);
      ta = std::make_unique<TransferAnalysis>(m, sys, *T, std::move(sd));
    } catch (const DefectivePeripheralError& e) {
      json ev = json::array();
      for (cplx z : e.eigenvalues()) ev.push_back(cj(z));
      J["spectrum"] = json{{"eigenvalues", ev}, {"semisimple", false}};
      throw;
    }
  });
  if (!spectral_ok) {
    J["fixed_dim"] = nullptr;
  } else {
    const SpectralData& sd = ta->spectral();
    json ev = json::array(), per = json::array();
    for (cplx z : sd.eigenvalues) ev.push_back(cj(z));
    for (cplx z : sd.peripheral) per.push_back(cj(z));
    J["spectrum"] = json{{"eigenvalues", ev},
                         {"theta", sd.theta},
                         {"ess_radius_bound", sd.ess_radius},
                         {"peripheral", per},
                         {"semisimple", sd.semisimple_peripheral},
                         {"support_size", ta->support().size()},
                         {"transition_size", T->size()},
                         {"cesaro_defect", sd.cesaro_defect}};
    J["fixed_dim"] = ta->fixed_dim();
    json fb = json::array();
    for (const MatTrigPoly& h : sd.fixed_right) fb.push_back(poly_json(h));
    J["fixed_basis"] = fb;
  }

  json algebra = json{{"available", false}};
  std::unique_ptr<HarmonicAlgebra> alg;
  UnitCandidate unit;
  if (ta) {
    st.optional("unit", [&] {
      unit = unit_candidate(*ta, opt.grid_level);
      algebra["unit"] = poly_json(unit.h);
      algebra["min_eig"] = unit.cert.min_eig;
      algebra["unit_certificate"] = unit.cert.passed;
      if (!unit.cert.passed) {
        std::ostringstream os;
        os << "unit candidate T1(I) has minimum eigenvalue " << unit.cert.min_eig;
        throw Error(ErrorCode::NotInvertible, "harmonic", os.str());
      }
    });
    if (unit.cert.passed) {
      st.optional("algebra", [&] {
        alg = std::make_unique<HarmonicAlgebra>(*ta, unit, AlgebraOptions{opt.grid_level, 1e-6});
        algebra["route"] = alg->route();
        algebra["dim"] = alg->dim();
        algebra["star_fit_residual"] = alg->star_fit_residual();
      });
    }
    if (alg) {
      st.optional("wedderburn", [&] {
        const Wedderburn w = wedderburn(*alg, 1e-7, opt.seed);
        json ci = json::array();
        for (const MatTrigPoly& e : w.central_idempotents) ci.push_back(poly_json(e));
        algebra["blocks"] = w.blocks;
        algebra["center_dim"] = w.center_dim;
        algebra["central_idempotents"] = ci;
        algebra["idempotent_residuals"] = json{{"orthogonality", w.orthogonality_residual},
                                               {"sum", w.sum_residual},
                                               {"centrality", w.centrality_residual}};
        algebra["available"] = true;
      });
    }
  }
  if (!algebra["available"].get<bool>()) {
    if (!unit.cert.passed)
      algebra["reason"] = "NotInvertible";
    else if (!rep.findings.empty())
      algebra["reason"] = rep.findings.back().code;
  }
  J["algebra"] = algebra;

  json certs = json::object();
  json projections = json::array();
  if (ta && qmf && el.holds) {
    std::unique_ptr<ProductEvaluator> P;
    st.optional("products", [&] { P = std::make_unique<ProductEvaluator>(m, sys, el, qmf_exact, opt.max_depth); });
    StrongCertificate sc;
    bool strong_ok = false;
    if (P) {
      strong_ok = st.optional("strong", [&] {
        sc = strong_convergence_certificate(*ta, el, ta->project(MatTrigPoly::identity(sys.n(), m.d())), opt.kmax,
                                            opt.tol);
        certs["strong"] = json{{"pass", sc.pass},
                               {"failed_clause", sc.failed_clause},
                               {"failed_clauses", sc.failed_clauses},
                               {"sole_peripheral", sc.sole_peripheral},
                               {"dim", sc.dim},
                               {"l", sc.l},
                               {"dim_ok", sc.dim_ok},
                               {"decay_ok", sc.decay_ok},
                               {"kmax", sc.kmax_used},
                               {"tau_direct", sc.tau_direct},
                               {"tau_adjoint", sc.tau_adjoint},
                               {"unit_sum_residual", sc.unit_sum_residual}};
      });
      ProjectionSet ps;
      const bool proj_ok = strong_ok && st.optional("projections", [&] {
        ProjectionOptions po;
        po.correlation.tol = opt.corr_tol;
        po.cross_check_tol = opt.cross_check_tol;
        ps = minimal_projections(*ta, el, *P, alg.get(), sc.pass, po);
        for (const MinimalProjection& mp : ps.projections)
          projections.push_back(json{{"v", vec_json(mp.v)},
                                     {"route", mp.route},
                                     {"h", poly_json(mp.h)},
                                     {"idempotency", mp.idempotency},
                                     {"cut_dim", mp.cut_dim},
                                     {"dominance_min_eig", mp.dominance_min_eig},
                                     {"route_diff", mp.route_diff}});
        if (ps.lattice_available)
          J["correlation"] = json{{"radius", ps.lattice.radius},
                                  {"grid", ps.lattice.grid},
                                  {"shell_contrib", ps.lattice.shell_contrib},
                                  {"fit_residual", ps.lattice.fit_residual},
                                  {"harmonic_residual", ps.lattice.harmonic_residual},
                                  {"sample_error_bound", ps.lattice.sample_error_bound}};
      });
      if (proj_ok) {
        st.optional("pmra", [&] {
          MatTrigPoly hc(sys.n(), m.d());
          for (const MinimalProjection& mp : ps.projections) hc += mp.h;
          const int per = sys.n() == 1 ? 256 : (sys.n() == 2 ? 64 : 16);
          const PmraCertificate pc = pmra_certificate(hc, per, 1e-6);
          certs["pmra"] = json{{"pass", pc.pass},
                               {"idempotent", pc.idempotent},
                               {"nonvanishing", pc.nonvanishing},
                               {"idempotency_defect", pc.idempotency_defect},
                               {"worst_point", std::vector<double>(pc.worst_point.data(),
                                                                   pc.worst_point.data() + pc.worst_point.size())},
                               {"origin_norm", pc.origin_norm}};
        });
      }
      if (alg) {
        st.optional("psi", [&] {
          const PsiReport pr = psi_check(*alg, el, 20, opt.seed);
          certs["psi"] = json{{"unit_image", mat_json(pr.value)},
                              {"morphism_residual", pr.morphism_residual},
                              {"commutation_residual", pr.commutation_residual},
                              {"image_rank", pr.image_rank}};
        });
      }
      st.optional("cascade", [&] {
        const int k = std::min(30, opt.max_depth);
        const MatTrigPoly s0 = MatTrigPoly::constant(sys.n(), CMat(el.E1_basis.front()));
        const CascadeRun run = refinement_iterate(*P, m, sys, s0, k, box_grid(sys.n(), sys.n() == 1 ? 33 : 9, -4, 4));
        std::vector<double> dist;
        bool monotone = true;
        for (std::size_t j = 0; j < run.levels.size(); ++j) {
          dist.push_back(run.levels[j].sup_distance);
          if (j > 0 && run.levels[j].sup_distance > run.levels[j - 1].sup_distance + 1e-12) monotone = false;
        }
        certs["cascade"] = json{{"k", k},
                                {"label", strong_ok && sc.pass ? "strong" : "pointwise-only"},
                                {"sup_distance", dist},
                                {"monotone", monotone},
                                {"final_increment", run.levels.back().increment}};
      });
    }
  } else if (ta) {
    rep.findings.push_back({"cascade", "PreconditionFailed",
                            qmf ? "E(l) fails: " + el.reason : "QMF condition R1 = 1 fails"});
  }
  J["projections"] = projections;
  J["certificates"] = certs;

  json f = json::array();
  for (const Finding& fd : rep.findings)
    f.push_back(json{{"module", fd.module}, {"code", fd.code}, {"message", fd.message}});
  J["findings"] = f;
  if (opt.timings) J["timings"] = st.timings();
  return rep;
}

std::string products_csv(const LoadedFilter& filter, double tol) {
  const ElReport el = el_condition(filter.m, filter.sys, 1e-10);
  const ProductEvaluator P(filter.m, filter.sys, el, qmf_residual_exact(filter.m, filter.sys));
  const int n = filter.sys.n(), d = filter.m.d();
  std::ostringstream os;
  os.precision(17);
  for (int c = 0; c < n; ++c) os << "x" << c << ",";
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) os << "P_" << a << "_" << b << "_re,P_" << a << "_" << b << "_im,";
  os << "err\n";
  for (const RVec& x : box_grid(n, csv_points(n), -4, 4)) {
    const ProductEvaluation pe = P.evaluate(x, tol);
    for (int c = 0; c < n; ++c) os << x[c] << ",";
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) os << pe.value(a, b).real() << "," << pe.value(a, b).imag() << ",";
    os << pe.err << "\n";
  }
  return os.str();
}

std::string cascade_csv(const LoadedFilter& filter, int k) {
  const ElReport el = el_condition(filter.m, filter.sys, 1e-10);
  const ProductEvaluator P(filter.m, filter.sys, el, qmf_residual_exact(filter.m, filter.sys));
  const int n = filter.sys.n(), d = filter.m.d();
  const MatTrigPoly s0 = MatTrigPoly::constant(n, CMat(el.E1_basis.front()));
  const CascadeRun run = refinement_iterate(P, filter.m, filter.sys, s0, k, box_grid(n, csv_points(n), -4, 4));
  std::ostringstream os;
  os.precision(17);
  for (int c = 0; c < n; ++c) os << "x" << c << ",";
  for (int j = 0; j < d; ++j) os << "s" << j << "_re,s" << j << "_im,limit" << j << "_re,limit" << j << "_im" << (j + 1 < d ? "," : "\n");
  for (std::size_t t = 0; t < run.grid.size(); ++t) {
    for (int c = 0; c < n; ++c) os << run.grid[t][c] << ",";
    for (int j = 0; j < d; ++j)
      os << run.samples[t][j].real() << "," << run.samples[t][j].imag() << "," << run.limits[t][j].real() << ","
         << run.limits[t][j].imag() << (j + 1 < d ? "," : "\n");
  }
  return os.str();
}

}  // namespace mwh
