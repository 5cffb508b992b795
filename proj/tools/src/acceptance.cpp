#include "gammastab_cli/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "gammastab/example_data.hpp"
#include "gammastab/generators.hpp"
#include "gammastab/network_sim.hpp"
#include "gammastab_cli/exit_codes.hpp"

namespace gammastab::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

/// Everything criteria 3, 4 and 11 share.
struct ExampleContext {
  BundledExample ex = bundled_example();
  std::optional<NetworkDesign> net;
  std::string design_error;

  const NetworkDesign* design() {
    if (!net && design_error.empty()) {
      try {
        net = design_network(ex.agents, ex.adjacency, ex.A_o, ex.C_o, ex.reference, ex.gamma,
                             SyncOptions{1.0, ex.M, ex.N});
      } catch (const std::exception& e) {
        design_error = e.what();
      }
    }
    return net ? &*net : nullptr;
  }
};

CriterionResult criterion_regulator(ExampleContext& ctx) {
  CriterionResult r{1, "regulator solution matches the printed X_i, U_i", RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const AgentMatrices& a = ctx.ex.agents.front().nominal;
  const RegulatorSolution sol = solve_regulator_equations(a.A, a.B, a.C, ctx.ex.A_o, ctx.ex.C_o);
  r.seconds = seconds_since(t0);
  Index wi = 0, wj = 0;
  const double dx = (sol.X - ctx.ex.X_printed).cwiseAbs().maxCoeff();
  const double du = (sol.U - ctx.ex.U_printed).cwiseAbs().maxCoeff(&wi, &wj);
  std::ostringstream os;
  os << "max|X - X_printed| = " << fmt(dx) << ", max|U - U_printed| = " << fmt(du);
  if (du > 1e-6) {
    os << " at U(" << wi + 1 << "," << wj + 1 << "): computed " << sol.U(wi, wj)
       << ", printed " << ctx.ex.U_printed(wi, wj);
  }
  os << "; tolerance 1e-6, runtime limit 1 s";
  r.detail = os.str();
  r.status = dx <= 1e-6 && du <= 1e-6 && r.seconds < 1.0 ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

CriterionResult criterion_companion(ExampleContext& ctx) {
  CriterionResult r{2, "companion data s = 2, (0, 0.25), printed Phi_i and Psi_i", RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const PatternModel pm = build_pattern_companion(ctx.ex.A_o, ctx.ex.C_o);
  const AgentMatrices& a = ctx.ex.agents.front().nominal;
  const RegulatorSolution sol = solve_regulator_equations(a.A, a.B, a.C, ctx.ex.A_o, ctx.ex.C_o);
  const SteadyStateGenerator g = build_steady_state_generator(sol.U, pm);
  r.seconds = seconds_since(t0);
  const bool s_ok = pm.s == 2;
  double dc = 1.0;
  if (s_ok) dc = std::max(std::abs(pm.coefficients[0]), std::abs(pm.coefficients[1] - 0.25));
  const double dphi = (g.Phi - ctx.ex.Phi_printed).cwiseAbs().maxCoeff();
  const double dpsi = (g.Psi - ctx.ex.Psi_printed).cwiseAbs().maxCoeff();
  std::ostringstream os;
  os << "s = " << pm.s << ", coefficient error " << fmt(dc) << ", Phi error " << fmt(dphi)
     << ", Psi error " << fmt(dpsi) << " (limit 1e-12)";
  r.detail = os.str();
  r.status = s_ok && dc <= 1e-12 && dphi <= 1e-12 && dpsi == 0.0 ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

CriterionResult criterion_small_gain(ExampleContext& ctx) {
  CriterionResult r{3, "small-gain bound 1.7986, gamma 1.5 accepted, 2.0 rejected", RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const auto n = static_cast<Index>(ctx.ex.agents.size());
  const double bound = small_gain_bound(ctx.ex.reference.gamma_zeta, n);
  const bool accepted = ctx.design() != nullptr;
  int rejected_code = kExitOk;
  try {
    (void)design_network(ctx.ex.agents, ctx.ex.adjacency, ctx.ex.A_o, ctx.ex.C_o,
                         ctx.ex.reference, 2.0);
  } catch (const Error& e) {
    rejected_code = exit_code_for(e.kind());
  }
  r.seconds = seconds_since(t0);
  std::ostringstream os;
  os << "bound = " << fmt(bound, 6) << " (target 1.7986 +/- 1e-4), gamma 1.5 "
     << (accepted ? "accepted" : "failed: " + ctx.design_error) << ", gamma 2.0 exit code "
     << rejected_code;
  r.detail = os.str();
  r.status = std::abs(bound - 1.7986) <= 1e-4 && accepted && rejected_code == kExitSmallGain
                 ? RowStatus::kPass
                 : RowStatus::kFail;
  return r;
}

CriterionResult criterion_sync(ExampleContext& ctx, const AcceptanceOptions& opts) {
  CriterionResult r{4, "synchronization run: disagreement <= 1e-2 x amplitude, frequency 0.5 +/- 0.005",
                    RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const NetworkDesign* net = ctx.design();
  if (net == nullptr) {
    r.detail = "design failed: " + ctx.design_error;
    return r;
  }
  std::vector<Vec> w;
  if (opts.w_scale > 0.0) {
    Rng rng(opts.seed + 77);
    std::uniform_real_distribution<double> dist(-opts.w_scale, opts.w_scale);
    for (const AgentModel& a : net->agents) {
      Vec wi(a.ell());
      for (Index k = 0; k < wi.size(); ++k) wi(k) = std::clamp(dist(rng), -1.0, 1.0);
      w.push_back(wi);
    }
  }
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 120.0;
  cfg.seed = opts.seed;
  cfg.record_every = 10;
  std::ostringstream os;
  bool ok = false;
  try {
    const Trace tr = simulate_network(*net, random_initial_state(*net, cfg.seed), cfg, w);
    const double err = sync_error(tr);
    const double amp = tail_amplitude(tr);
    const double rec_dt = cfg.dt * static_cast<double>(cfg.record_every);
    double worst_freq = 0.0;
    bool freq_ok = true;
    const Index ycols = tr.agents * tr.outputs_per_agent;
    for (Index c = 0; c < ycols; ++c) {
      try {
        const double f = dominant_frequency(tail_signal(tr, c), rec_dt);
        if (std::abs(f - 0.5) > std::abs(worst_freq - 0.5)) worst_freq = f;
        freq_ok = freq_ok && std::abs(f - 0.5) <= 0.005;
      } catch (const Error&) {
        freq_ok = false;
      }
    }
    r.seconds = seconds_since(t0);
    os << "seed " << cfg.seed << ", tail disagreement " << fmt(err) << " vs amplitude "
       << fmt(amp) << " (ratio " << fmt(amp > 0 ? err / amp : INFINITY) << ", limit 1e-2)"
       << ", worst dominant frequency " << fmt(worst_freq, 6) << " rad/s, spectral abscissa "
       << fmt(spectral_abscissa(assemble_network_matrix(*net, w)));
    ok = amp > 0.0 && err <= 1e-2 * amp && freq_ok && r.seconds < 30.0;
  } catch (const Error& e) {
    r.seconds = seconds_since(t0);
    os << "simulation failed: " << e.what();
  }
  if (opts.w_scale > 0.0) os << "; w-scale " << opts.w_scale;
  r.detail = os.str();
  r.status = ok ? RowStatus::kPass : (opts.w_scale > 0.0 ? RowStatus::kWarn : RowStatus::kFail);
  return r;
}

CriterionResult criterion_svd_chain(const AcceptanceOptions& opts) {
  CriterionResult r{5, "SVD chain on random controllable pairs", RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const int count = opts.quick ? 20 : 200;
  Rng rng(opts.seed * 1000 + 5);
  std::uniform_int_distribution<Index> pick_n(1, 8);
  int failures = 0;
  Index max_l = 0;
  std::string first;
  for (int k = 0; k < count; ++k) {
    const Index n = pick_n(rng);
    std::uniform_int_distribution<Index> pick_m(1, n);
    const Index m = pick_m(rng);
    Mat a, b;
    random_controllable_pair(n, m, rng, a, b);
    try {
      const SvdChain chain = svd_reduction_chain(a, b);
      bool ok = chain.l <= n && numeric_rank(chain.Gamma_last) == chain.Gamma_last.rows();
      for (Index j = 0; j <= chain.l && ok; ++j) ok = pbh_controllable(chain.phi(j), chain.gamma(j));
      max_l = std::max(max_l, chain.l);
      if (!ok) {
        ++failures;
        if (first.empty()) first = "instance " + std::to_string(k) + " violates a chain property";
      }
    } catch (const Error& e) {
      ++failures;
      if (first.empty()) first = "instance " + std::to_string(k) + ": " + e.what();
    }
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(count) + " pairs, " + std::to_string(failures) +
             " failures, largest l = " + std::to_string(max_l) + (first.empty() ? "" : "; " + first);
  r.status = failures == 0 ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

CriterionResult criterion_output_annihilation(const AcceptanceOptions& opts) {
  CriterionResult r{6, "output annihilation C T_j^T = 0 and orthogonal T on generated systems",
                    RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const int count = opts.quick ? 20 : 200;
  Rng rng(opts.seed * 1000 + 6);
  int failures = 0;
  double worst_ct = 0.0, worst_orth = 0.0;
  std::string first;
  for (int k = 0; k < count; ++k) {
    const GeneratedSystem g = generate_normal_form_system(random_recipe(rng, 3, 3), rng);
    try {
      const NormalForm nf = normal_form(g.sys);
      const Mat& t = nf.T();
      const double orth = (t * t.transpose() - Mat::Identity(t.rows(), t.rows())).norm();
      double ct = 0.0;
      for (Index j = 1; j < nf.blocks(); ++j) {
        ct = std::max(ct, (g.sys.C * nf.transform.block(j).transpose()).norm());
      }
      worst_ct = std::max(worst_ct, ct);
      worst_orth = std::max(worst_orth, orth);
      if (nf.l != g.l || ct > 1e-10 || orth > 1e-12) {
        ++failures;
        if (first.empty()) first = "instance " + std::to_string(k) + " out of tolerance";
      }
    } catch (const Error& e) {
      ++failures;
      if (first.empty()) first = "instance " + std::to_string(k) + ": " + e.what();
    }
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(count) + " systems, " + std::to_string(failures) +
             " failures, worst |C T_j^T| = " + fmt(worst_ct) + ", worst |T T^T - I| = " +
             fmt(worst_orth) + (first.empty() ? "" : "; " + first);
  r.status = failures == 0 ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

struct CertifiedLoop {
  ClosedLoop loop;
  double gain = 0.0;
  std::string label;
};

// The certified loop in its structured coordinates: the same input-output
// map as the x-coordinate loop, without the ill-conditioning of large gains.
ClosedLoop structured_loop(const IosCertificate& cert) {
  return {cert.A_z, cert.R_z, cert.C_z};
}

double gain_horizon(const ClosedLoop& loop) {
  const double decay = -spectral_abscissa(loop.A);
  return std::clamp(25.0 / decay, 20.0, 400.0);
}

CriterionResult criterion_certificates(const AcceptanceOptions& opts, CriterionResult& out8,
                                   std::vector<CertifiedLoop>& loops) {
  CriterionResult r{7, "state-feedback certificates (gamma in 0.01, 0.1, 1, 10)", RowStatus::kFail, "", 0};
  out8 = {8, "output-feedback certificates on the same instances", RowStatus::kFail, "", 0};
  const int count = opts.quick ? 10 : 100;
  const double gammas[] = {0.01, 0.1, 1.0, 10.0};
  Rng rng(opts.seed * 1000 + 7);
  int fail7 = 0, fail8 = 0, escalated = 0;
  double worst7 = -INFINITY, worst8 = -INFINITY;
  std::string first7, first8;
  double t7 = 0.0, t8 = 0.0;
  std::uniform_int_distribution<Index> pick_nz(1, 3);
  for (int k = 0; k < count; ++k) {
    NormalFormRecipe recipe = random_recipe(rng, 2, 3, true);
    recipe.detectable = true;
    const GeneratedSystem g = generate_normal_form_system(recipe, rng);
    const Index nz = pick_nz(rng);
    Mat m = random_hurwitz(nz, rng);
    Mat nmat;
    do {
      nmat = gaussian(nz, recipe.m, rng);
    } while (!pbh_controllable(m, nmat));
    const Mat q = gaussian(recipe.m, nz, rng);
    for (double gamma : gammas) {
      auto s7 = Clock::now();
      std::optional<StateFeedbackResult> sf;
      try {
        sf = synthesize_state_feedback(normal_form(g.sys), gamma);
        const ClosedLoop loop = close_loop(g.sys, sf->K);
        const CertificateCheck chk = verify_certificate(loop, sf->certificate);
        const bool ok = is_hurwitz(loop.A) && chk.ok &&
                        std::abs(sf->certificate.gain() - gamma) <= 1e-12 * gamma;
        worst7 = std::max(worst7, chk.max_eig_z);
        escalated += sf->escalations > 0 ? 1 : 0;
        if (ok) {
          loops.push_back({structured_loop(sf->certificate), sf->certificate.gain(),
                           "state feedback, instance " + std::to_string(k) + ", gamma " + fmt(gamma)});
        } else {
          ++fail7;
          if (first7.empty()) first7 = "instance " + std::to_string(k) + ", gamma " + fmt(gamma) + ": " + chk.detail;
        }
      } catch (const Error& e) {
        ++fail7;
        if (first7.empty()) first7 = "instance " + std::to_string(k) + ", gamma " + fmt(gamma) + ": " + e.what();
      }
      t7 += seconds_since(s7);
      auto s8 = Clock::now();
      if (!sf) {
        ++fail8;
      } else {
        try {
          AugmentedPlant plant{g.sys.A, g.sys.B, g.sys.C, g.sys.R, m, nmat, q};
          const OutputFeedbackResult of = synthesize_output_feedback(plant, *sf);
          const CertificateCheck chk = verify_certificate(of.closed_loop, of.certificate);
          const bool ok = is_hurwitz(of.closed_loop.A) && chk.ok &&
                          of.certificate.gain() <= gamma * (1.0 + 1e-12);
          worst8 = std::max(worst8, chk.max_eig_z);
          if (ok) {
            loops.push_back({structured_loop(of.certificate), of.certificate.gain(),
                             "output feedback, instance " + std::to_string(k) + ", gamma " + fmt(gamma)});
          } else {
            ++fail8;
            if (first8.empty()) first8 = "instance " + std::to_string(k) + ", gamma " + fmt(gamma) + ": " + chk.detail;
          }
        } catch (const Error& e) {
          ++fail8;
          if (first8.empty()) first8 = "instance " + std::to_string(k) + ", gamma " + fmt(gamma) + ": " + e.what();
        }
      }
      t8 += seconds_since(s8);
    }
  }
  const int total = count * 4;
  r.seconds = t7;
  r.detail = std::to_string(total) + " syntheses, " + std::to_string(fail7) +
             " failures, largest certificate eigenvalue " + fmt(worst7) + " (psd_tol 1e-8), " +
             std::to_string(escalated) + " needed kappa escalation, runtime limit 60 s" +
             (first7.empty() ? "" : "; " + first7);
  r.status = fail7 == 0 && t7 < 60.0 ? RowStatus::kPass : RowStatus::kFail;
  out8.seconds = t8;
  out8.detail = std::to_string(total) + " controllers, " + std::to_string(fail8) +
                " failures, largest certificate eigenvalue " + fmt(worst8) +
                (first8.empty() ? "" : "; " + first8);
  out8.status = fail8 == 0 ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

CriterionResult criterion_interconnection(const AcceptanceOptions& opts) {
  CriterionResult r{9, "random interconnections under gamma < 1/(N gamma_zeta) decay below 1e-3",
                    RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const int count = opts.quick ? 5 : 20;
  Rng rng(opts.seed * 1000 + 9);
  std::uniform_int_distribution<Index> pick_n(1, 4), pick_ell(1, 2), pick_tau(1, 3);
  int failures = 0;
  double worst = 0.0;
  std::string first;
  for (int k = 0; k < count; ++k) {
    try {
      Interconnection ic;
      const Index agents = pick_n(rng);
      const Index ell = pick_ell(rng);
      std::vector<GeneratedSystem> plants;
      Index p_total = 0;
      for (Index i = 0; i < agents; ++i) {
        NormalFormRecipe recipe = random_recipe(rng, 2, 2);
        recipe.ell = ell;
        plants.push_back(generate_normal_form_system(recipe, rng));
        p_total += recipe.p;
      }
      const Index nt = pick_tau(rng);
      ic.sigma2.A = random_hurwitz(nt, rng);
      ic.sigma2.R = gaussian(nt, p_total, rng);
      ic.sigma2.C = gaussian(ell, nt, rng);
      const IosCertificate c2 = lyapunov_certificate(ic.sigma2);
      if (!verify_certificate(ic.sigma2, c2).ok) throw Error(ErrorKind::kInternalConsistency, "Sigma_2 certificate");
      ic.gamma_zeta = c2.gain();
      ic.gamma = 0.5 * small_gain_bound(ic.gamma_zeta, agents);
      for (const GeneratedSystem& g : plants) {
        const StateFeedbackResult sf = synthesize_state_feedback(normal_form(g.sys), ic.gamma);
        // Same input-output map as close_loop(g.sys, sf.K), realized in the
        // cascade coordinates, which stay well conditioned for tiny gamma.
        ic.sigma1.push_back({sf.cascade, sf.R_cascade, sf.C_cascade});
      }
      const Mat a = interconnection_matrix(ic);
      const Vec x0 = gaussian(a.rows(), 1, rng);
      const DecayReport rep = interconnection_sim(ic, x0);
      const double ratio = std::max(rep.y_final / std::max(rep.y_initial, 1e-300),
                                    rep.zeta_final / std::max(rep.zeta_initial, 1e-300));
      worst = std::max(worst, ratio);
      if (!rep.decayed) {
        ++failures;
        if (first.empty()) first = "instance " + std::to_string(k) + " did not decay";
      }
    } catch (const Error& e) {
      ++failures;
      if (first.empty()) first = "instance " + std::to_string(k) + ": " + e.what();
    }
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(count) + " interconnections, " + std::to_string(failures) +
             " failures, worst final/initial ratio " + fmt(worst) + (first.empty() ? "" : "; " + first);
  r.status = failures == 0 ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

CriterionResult criterion_soundness(const std::vector<CertifiedLoop>& loops) {
  CriterionResult r{10, "simulated gain <= certificate gain + 1e-3 on every certified loop",
                    RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  int failures = 0;
  double worst_excess = -INFINITY;
  std::string first;
  for (const CertifiedLoop& c : loops) {
    const double est = empirical_gain_estimate(c.loop, default_excitations(c.loop),
                                               gain_horizon(c.loop), 0.05);
    worst_excess = std::max(worst_excess, est - c.gain);
    if (est > c.gain + 1e-3) {
      ++failures;
      if (first.empty()) first = c.label + ": estimate " + fmt(est) + " vs gain " + fmt(c.gain);
    }
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(loops.size()) + " loops, " + std::to_string(failures) +
             " failures, largest (estimate - certificate gain) " + fmt(worst_excess) +
             (first.empty() ? "" : "; " + first);
  r.status = failures == 0 && !loops.empty() ? RowStatus::kPass : RowStatus::kFail;
  return r;
}

CriterionResult criterion_manifold(ExampleContext& ctx) {
  CriterionResult r{11, "manifold initialization keeps |e_i| <= 1e-6 for 120 s", RowStatus::kFail, "", 0};
  const auto t0 = Clock::now();
  const NetworkDesign* net = ctx.design();
  if (net == nullptr) {
    r.detail = "design failed: " + ctx.design_error;
    return r;
  }
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.horizon = 120.0;
  cfg.record_every = 10;
  Vec v(ctx.ex.A_o.rows());
  v.setZero();
  v(0) = 1.0;
  if (v.size() > 1) v(1) = 0.5;
  try {
    const Trace tr = simulate_network(*net, manifold_initial_state(*net, v), cfg);
    const double e = max_regulation_error(tr);
    r.detail = "max |e_i(t)| = " + fmt(e) + " over 120 s (limit 1e-6)";
    r.status = e <= 1e-6 ? RowStatus::kPass : RowStatus::kFail;
  } catch (const Error& e) {
    r.detail = std::string("simulation failed: ") + e.what();
  }
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
  std::vector<CriterionResult> rows;
  auto emit = [&](CriterionResult row) {
    if (opts.on_result) opts.on_result(row);
    rows.push_back(std::move(row));
  };
  auto guarded = [&](int id, const std::string& title, auto&& fn) {
    try {
      emit(fn());
    } catch (const std::exception& e) {
      emit({id, title, RowStatus::kFail, std::string("stage failed: ") + e.what(), 0});
    }
  };
  ExampleContext ctx;
  guarded(1, "regulator solution", [&] { return criterion_regulator(ctx); });
  guarded(2, "companion data", [&] { return criterion_companion(ctx); });
  guarded(3, "small-gain bound", [&] { return criterion_small_gain(ctx); });
  guarded(4, "synchronization run", [&] { return criterion_sync(ctx, opts); });
  guarded(5, "SVD chain", [&] { return criterion_svd_chain(opts); });
  guarded(6, "output annihilation", [&] { return criterion_output_annihilation(opts); });
  std::vector<CertifiedLoop> loops;
  CriterionResult row8;
  guarded(7, "state-feedback certificates", [&] { return criterion_certificates(opts, row8, loops); });
  if (row8.id == 8) {
    emit(row8);
  } else {
    emit({8, "output-feedback certificates", RowStatus::kFail, "not run", 0});
  }
  guarded(9, "interconnections", [&] { return criterion_interconnection(opts); });
  guarded(10, "certificate soundness", [&] { return criterion_soundness(loops); });
  guarded(11, "manifold initialization", [&] { return criterion_manifold(ctx); });
  return rows;
}

std::string format_row(const CriterionResult& row) {
  std::ostringstream os;
  const char* tag = row.status == RowStatus::kPass ? "PASS" : row.status == RowStatus::kWarn ? "WARN" : "FAIL";
  os << "[" << tag << "] " << std::setw(2) << row.id << " " << row.title << ": " << row.detail
     << " (" << std::fixed << std::setprecision(2) << row.seconds << " s)";
  return os.str();
}

}  // namespace gammastab::cli
