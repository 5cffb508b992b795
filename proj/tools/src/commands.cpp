#include "gammastab_cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>

#include "CLI11.hpp"
#include "gammastab/example_data.hpp"
#include "gammastab/network_sim.hpp"
#include "gammastab_cli/acceptance.hpp"
#include "gammastab_cli/exit_codes.hpp"

namespace gammastab::cli {

namespace fs = std::filesystem;

json certificate_to_json(const IosCertificate& cert) {
  json j = {{"P", matrix_to_json(cert.P)},
            {"alpha", cert.alpha},
            {"beta", cert.beta},
            {"gain", cert.gain()}};
  if (cert.has_coordinates()) {
    j["J"] = matrix_to_json(cert.J);
    j["P_z"] = matrix_to_json(cert.P_z);
    j["A_z"] = matrix_to_json(cert.A_z);
    j["R_z"] = matrix_to_json(cert.R_z);
    j["C_z"] = matrix_to_json(cert.C_z);
  }
  return j;
}

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::kInvalidInput, path + "." + key + ": required field is missing");
  }
  return j[key];
}

double number_field(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number()) throw Error(ErrorKind::kInvalidInput, path + "." + key + ": expected a number");
  return v.get<double>();
}

}  // namespace

IosCertificate certificate_from_json(const json& j, const std::string& path) {
  IosCertificate c;
  c.P = matrix_from_json(field(j, "P", path), path + ".P");
  c.alpha = number_field(j, "alpha", path);
  c.beta = number_field(j, "beta", path);
  if (j.contains("J")) {
    c.J = matrix_from_json(j["J"], path + ".J");
    c.P_z = matrix_from_json(field(j, "P_z", path), path + ".P_z");
    c.A_z = matrix_from_json(field(j, "A_z", path), path + ".A_z");
    c.R_z = matrix_from_json(field(j, "R_z", path), path + ".R_z");
    c.C_z = matrix_from_json(field(j, "C_z", path), path + ".C_z");
  }
  return c;
}

json closed_loop_to_json(const ClosedLoop& loop) {
  return {{"A", matrix_to_json(loop.A)}, {"R", matrix_to_json(loop.R)}, {"C", matrix_to_json(loop.C)}};
}

ClosedLoop closed_loop_from_json(const json& j, const std::string& path) {
  ClosedLoop l;
  l.A = matrix_from_json(field(j, "A", path), path + ".A");
  l.R = matrix_from_json(field(j, "R", path), path + ".R");
  l.C = matrix_from_json(field(j, "C", path), path + ".C");
  return l;
}

json check_to_json(const CertificateCheck& chk) {
  return {{"ok", chk.ok},
          {"p_positive", chk.p_positive},
          {"max_eig_structured", chk.max_eig_z},
          {"max_eig_x", chk.max_eig_x},
          {"x_tolerance", chk.x_tolerance},
          {"x_ok", chk.x_ok},
          {"consistency", chk.consistency},
          {"detail", chk.detail}};
}

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
  Tolerance base = Tolerance::from_environment();
};

ProjectConfig load(const std::string& file, const Tolerance& base) {
  if (file == "bundled") {
    ProjectConfig cfg = bundled_project();
    cfg.tolerance = base;
    return cfg;
  }
  return load_project(file, base);
}

void emit(Context& ctx, const json& report, const std::string& out_path) {
  ctx.out << report.dump(2) << '\n';
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw Error(ErrorKind::kInvalidInput, out_path + ": cannot write file");
    f << report.dump(2) << '\n';
  }
}

const SystemConfig& pick_system(const ProjectConfig& cfg, Index index) {
  if (index < 0 || index >= static_cast<Index>(cfg.systems.size())) {
    throw Error(ErrorKind::kInvalidInput, "--system index out of range");
  }
  return cfg.systems[static_cast<size_t>(index)];
}

LinearSystem linear_system(const SystemConfig& s, bool need_r) {
  LinearSystem sys{s.model.nominal.A, s.model.nominal.B, s.model.nominal.C, s.R};
  if (sys.R.size() == 0) {
    if (need_r) throw Error(ErrorKind::kInvalidInput, "synthesis needs the perturbation matrix R");
    sys.R = Mat::Zero(sys.A.rows(), 1);
  }
  return sys;
}

double resolve_gamma(const std::optional<double>& flag, const ProjectConfig& cfg) {
  const std::optional<double> g = flag ? flag : cfg.gamma;
  if (!g) throw Error(ErrorKind::kInvalidInput, "gamma is required (--gamma or \"gamma\" in the project)");
  if (!(*g > 0.0) || !std::isfinite(*g)) {
    throw Error(ErrorKind::kInvalidInput, "gamma must be positive and finite");
  }
  return *g;
}

json normal_form_report(const NormalForm& nf, const AssumptionReport& rep) {
  json blocks = json::array();
  for (Index j = 0; j < nf.blocks(); ++j) {
    const auto uj = static_cast<size_t>(j);
    blocks.push_back({{"A", matrix_to_json(nf.A_blocks[uj])},
                      {"B", matrix_to_json(nf.B_blocks[uj])},
                      {"R", matrix_to_json(nf.R_blocks[uj])}});
  }
  json sizes = json::array();
  for (Index h : nf.transform.heights) sizes.push_back(h);
  json ranks = json::array();
  for (Index r : nf.ranks) ranks.push_back(r);
  return {{"l", nf.l},
          {"ranks", ranks},
          {"block_sizes", sizes},
          {"assumptions",
           {{"controllable", rep.controllable},
            {"level_condition", rep.level_condition},
            {"detectable", rep.detectable}}},
          {"T", matrix_to_json(nf.T())},
          {"C_xi", matrix_to_json(nf.C_xi)},
          {"blocks", blocks}};
}

int cmd_normal_form(Context& ctx, const std::string& file, Index index, const std::string& out) {
  const ProjectConfig cfg = load(file, ctx.base);
  const LinearSystem sys = linear_system(pick_system(cfg, index), false);
  const NormalForm nf = normal_form(sys, cfg.tolerance);
  const AssumptionReport rep = check_assumptions(sys, nf.l, cfg.tolerance);
  emit(ctx, normal_form_report(nf, rep), out);
  return kExitOk;
}

json state_feedback_json(const StateFeedbackResult& sf) {
  json kappas = json::array();
  for (double k : sf.kappas) kappas.push_back(k);
  return {{"K", matrix_to_json(sf.K)}, {"kappas", kappas}, {"escalations", sf.escalations}};
}

int cmd_synthesize(Context& ctx, const std::string& file, Index index,
                   const std::optional<double>& gamma_flag, bool output_feedback,
                   const std::optional<double>& margin, const std::string& out) {
  const ProjectConfig cfg = load(file, ctx.base);
  const double gamma = resolve_gamma(gamma_flag, cfg);
  SynthesisOptions so;
  so.margin = margin ? *margin : cfg.margin;
  if (!(so.margin > 0.0)) throw Error(ErrorKind::kInvalidInput, "margin must be positive");
  const SystemConfig& s = pick_system(cfg, index);
  const LinearSystem sys = linear_system(s, true);
  const NormalForm nf = normal_form(sys, cfg.tolerance);
  const StateFeedbackResult sf = synthesize_state_feedback(nf, gamma, so, cfg.tolerance);

  json report;
  report["gamma"] = gamma;
  report["margin"] = so.margin;
  report["state_feedback"] = state_feedback_json(sf);
  ClosedLoop loop;
  IosCertificate cert;
  if (output_feedback) {
    if (s.M.rows() == 0) {
      throw Error(ErrorKind::kInvalidInput, "--output-feedback needs M, N and Q on the system");
    }
    const AugmentedPlant plant{sys.A, sys.B, sys.C, sys.R, s.M, s.N, s.Q};
    const OutputFeedbackResult of = synthesize_output_feedback(plant, sf, cfg.tolerance);
    const OutputFeedbackController& c = of.controller;
    report["type"] = "output-feedback";
    report["controller"] = {{"Kbar", matrix_to_json(c.Kbar)}, {"L", matrix_to_json(c.L)},
                            {"Abar", matrix_to_json(c.Abar)}, {"Bbar", matrix_to_json(c.Bbar)},
                            {"Cbar", matrix_to_json(c.Cbar)}, {"Rbar", matrix_to_json(c.Rbar)}};
    loop = of.closed_loop;
    cert = of.certificate;
  } else {
    report["type"] = "state-feedback";
    loop = close_loop(sys, sf.K);
    cert = sf.certificate;
  }
  const CertificateCheck chk = verify_certificate(loop, cert, cfg.tolerance);
  report["closed_loop"] = closed_loop_to_json(loop);
  report["spectral_abscissa"] = spectral_abscissa(loop.A);
  report["certificate"] = certificate_to_json(cert);
  report["check"] = check_to_json(chk);
  if (!chk.ok) {
    ctx.err << "error: certificate re-verification failed: " << chk.detail << '\n';
    return kExitSynthesis;
  }
  emit(ctx, report, out);
  return kExitOk;
}

int cmd_verify(Context& ctx, const std::string& file) {
  const json doc = load_json_file(file);
  const ClosedLoop loop = closed_loop_from_json(field(doc, "closed_loop", "$"), "$.closed_loop");
  const IosCertificate cert = certificate_from_json(field(doc, "certificate", "$"), "$.certificate");
  const CertificateCheck chk = verify_certificate(loop, cert, ctx.base);
  json report = check_to_json(chk);
  report["gain"] = cert.gain();
  report["hurwitz"] = is_hurwitz(loop.A);
  ctx.out << report.dump(2) << '\n';
  return chk.ok && is_hurwitz(loop.A) ? kExitOk : kExitSynthesis;
}

NetworkDesign build_network(const ProjectConfig& cfg, double gamma) {
  if (!cfg.has_network()) {
    throw Error(ErrorKind::kInvalidInput, "project needs graph, pattern and reference sections");
  }
  std::vector<AgentModel> agents;
  for (const SystemConfig& s : cfg.systems) agents.push_back(s.model);
  SyncOptions opts;
  opts.margin = cfg.margin;
  if (cfg.M) {
    opts.M = *cfg.M;
    opts.N = *cfg.N;
  }
  return design_network(agents, *cfg.adjacency, *cfg.A_o, *cfg.C_o, *cfg.reference, gamma, opts,
                        cfg.tolerance);
}

json network_report(const NetworkDesign& net) {
  json agents = json::array();
  for (size_t i = 0; i < net.designs.size(); ++i) {
    const SyncDesign& d = net.designs[i];
    agents.push_back({{"X", matrix_to_json(d.regulator.X)},
                      {"U", matrix_to_json(d.regulator.U)},
                      {"Phi", matrix_to_json(d.generator.Phi)},
                      {"Psi", matrix_to_json(d.generator.Psi)},
                      {"Upsilon", matrix_to_json(d.generator.Upsilon)},
                      {"M", matrix_to_json(d.internal_model.M)},
                      {"N", matrix_to_json(d.internal_model.N)},
                      {"T", matrix_to_json(d.internal_model.T)},
                      {"K", matrix_to_json(d.state_feedback.K)},
                      {"L", matrix_to_json(d.output_feedback.controller.L)},
                      {"certificate_gain", d.output_feedback.certificate.gain()},
                      {"controller_dimension", net.controllers[i].dim()}});
  }
  json warnings = json::array();
  for (const std::string& w : net.warnings) warnings.push_back(w);
  return {{"agents_count", net.agents.size()},
          {"gamma", net.gamma},
          {"small_gain_bound", net.bound},
          {"accepted", true},
          {"laplacian", matrix_to_json(net.graph.laplacian)},
          {"pattern_order", net.pattern.s},
          {"agents", agents},
          {"warnings", warnings}};
}

std::vector<Vec> uncertainty(const ProjectConfig& cfg) {
  bool any = false;
  for (const SystemConfig& s : cfg.systems) any = any || s.w.size() > 0;
  if (!any) return {};
  std::vector<Vec> w;
  for (const SystemConfig& s : cfg.systems) {
    w.push_back(s.w.size() > 0 ? s.w : Vec(Vec::Zero(s.model.ell())));
  }
  return w;
}

void write_trace_outputs(const Trace& tr, const json& metrics, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "trace.csv");
    if (!f) throw Error(ErrorKind::kInvalidInput, dir + ": cannot write trace.csv");
    write_csv(f, tr);
  }
  {
    std::ofstream f(fs::path(dir) / "metrics.json");
    f << metrics.dump(2) << '\n';
  }
  for (Index c = 0; c < tr.outputs.cols(); ++c) {
    std::ofstream f(fs::path(dir) / (tr.output_names[static_cast<size_t>(c)] + ".dat"));
    write_gnuplot_column(f, tr, c);
  }
}

json network_metrics(const NetworkDesign& net, const Trace& tr, double record_dt) {
  json m;
  m["seed"] = tr.seed;
  m["description"] = tr.description;
  m["max_regulation_error"] = max_regulation_error(tr);
  if (tr.agents >= 2) m["sync_error"] = sync_error(tr);
  m["tail_amplitude"] = tail_amplitude(tr);
  m["spectral_abscissa"] = spectral_abscissa(assemble_network_matrix(net));
  json freqs = json::array();
  for (Index c = 0; c < tr.agents * tr.outputs_per_agent; ++c) {
    try {
      freqs.push_back(dominant_frequency(tail_signal(tr, c), record_dt));
    } catch (const Error&) {
      freqs.push_back(nullptr);
    }
  }
  m["dominant_frequency"] = freqs;
  return m;
}

struct SimOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> horizon;
  std::optional<double> dt;
};

SimulationConfig apply_overrides(SimulationConfig sc, const SimOverrides& o) {
  if (o.seed) sc.sim.seed = *o.seed;
  if (o.horizon) sc.sim.horizon = *o.horizon;
  if (o.dt) sc.sim.dt = *o.dt;
  sc.sim.validate();
  return sc;
}

Trace run_network_sim(const NetworkDesign& net, const SimulationConfig& sc,
                      const std::vector<Vec>& w) {
  Vec x0;
  if (sc.initial == "manifold") {
    Vec v = sc.v0;
    if (v.size() == 0) {
      v = Vec::Zero(net.pattern.A_o.rows());
      v(0) = 1.0;
    }
    x0 = manifold_initial_state(net, v);
  } else {
    x0 = random_initial_state(net, sc.sim.seed);
  }
  return simulate_network(net, x0, sc.sim, w);
}

int cmd_sync(Context& ctx, const std::string& file, const std::optional<double>& gamma_flag,
             bool simulate, const std::string& out_dir, const SimOverrides& ov) {
  const ProjectConfig cfg = load(file, ctx.base);
  const double gamma = resolve_gamma(gamma_flag, cfg);
  const NetworkDesign net = build_network(cfg, gamma);
  json report = network_report(net);
  if (simulate) {
    const SimulationConfig sc = apply_overrides(cfg.simulation, ov);
    const Trace tr = run_network_sim(net, sc, uncertainty(cfg));
    const json metrics =
        network_metrics(net, tr, sc.sim.dt * static_cast<double>(sc.sim.record_every));
    report["simulation"] = metrics;
    if (!out_dir.empty()) write_trace_outputs(tr, metrics, out_dir);
  }
  emit(ctx, report, out_dir.empty() ? "" : (fs::path(out_dir) / "design.json").string());
  return kExitOk;
}

int cmd_simulate(Context& ctx, const std::string& file, const std::optional<double>& gamma_flag,
                 const std::string& out_dir, const SimOverrides& ov) {
  const ProjectConfig cfg = load(file, ctx.base);
  const double gamma = resolve_gamma(gamma_flag, cfg);
  const SimulationConfig sc = apply_overrides(cfg.simulation, ov);
  if (cfg.has_network()) {
    const NetworkDesign net = build_network(cfg, gamma);
    const Trace tr = run_network_sim(net, sc, uncertainty(cfg));
    const json metrics =
        network_metrics(net, tr, sc.sim.dt * static_cast<double>(sc.sim.record_every));
    if (!out_dir.empty()) write_trace_outputs(tr, metrics, out_dir);
    ctx.out << metrics.dump(2) << '\n';
    return kExitOk;
  }
  // Single system: state feedback at gamma, zero perturbation, seeded state.
  const LinearSystem sys = linear_system(cfg.systems.front(), true);
  SynthesisOptions so;
  so.margin = cfg.margin;
  const StateFeedbackResult sf = synthesize_state_feedback(normal_form(sys, cfg.tolerance), gamma, so,
                                                           cfg.tolerance);
  const ClosedLoop loop = close_loop(sys, sf.K);
  std::mt19937_64 rng(sc.sim.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec x0(sys.n());
  for (Index k = 0; k < x0.size(); ++k) x0(k) = dist(rng);
  SimConfig run = sc.sim;
  run.dt = stable_step(loop.A, run.dt);
  Trace tr = integrate({loop.A, Mat(), loop.C}, x0, run);
  tr.description = "single system, state feedback, zeta = 0";
  json metrics = {{"seed", run.seed},
                  {"dt", run.dt},
                  {"initial_output_norm", tr.outputs.row(0).norm()},
                  {"final_output_norm", tr.outputs.row(tr.outputs.rows() - 1).norm()},
                  {"description", tr.description}};
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "trace.csv");
    write_csv(f, tr);
    std::ofstream m(fs::path(out_dir) / "metrics.json");
    m << metrics.dump(2) << '\n';
  }
  ctx.out << metrics.dump(2) << '\n';
  return kExitOk;
}

int cmd_reproduce(Context& ctx, double w_scale, std::uint64_t seed, bool quick,
                  const std::string& out_dir, const std::string& write_config) {
  if (!(w_scale >= 0.0) || w_scale > 1.0) {
    throw Error(ErrorKind::kInvalidInput, "--w-scale must lie in [0, 1]");
  }
  const ProjectConfig cfg = bundled_project();
  if (!write_config.empty()) {
    std::ofstream f(write_config);
    if (!f) throw Error(ErrorKind::kInvalidInput, write_config + ": cannot write file");
    f << project_to_json(cfg).dump(2) << '\n';
  }
  const BundledExample ex = bundled_example();
  const AgentMatrices& a = ex.agents.front().nominal;
  const NormalForm nf = normal_form({a.A, a.B, a.C, Mat::Zero(a.A.rows(), 1)});
  ctx.out << "agent normal form: l = " << nf.l << ", ranks (";
  for (size_t k = 0; k < nf.ranks.size(); ++k) ctx.out << (k ? ", " : "") << nf.ranks[k];
  ctx.out << ")\n";
  ctx.out << "small-gain bound 1/(N gamma_zeta) = " << small_gain_bound(ex.reference.gamma_zeta, 4)
          << ", requested gamma = " << ex.gamma << "\n";
  if (quick) ctx.out << "quick mode: reduced instance counts in criteria 5-10\n";

  AcceptanceOptions opts;
  opts.quick = quick;
  opts.seed = seed;
  opts.w_scale = w_scale;
  opts.on_result = [&](const CriterionResult& row) { ctx.out << format_row(row) << '\n' << std::flush; };
  const auto rows = run_acceptance(opts);
  int passed = 0, warned = 0;
  json table = json::array();
  for (const CriterionResult& r : rows) {
    passed += r.passed() ? 1 : 0;
    warned += r.status == RowStatus::kWarn ? 1 : 0;
    table.push_back({{"id", r.id},
                     {"title", r.title},
                     {"status", r.passed() ? "pass" : r.status == RowStatus::kWarn ? "warn" : "fail"},
                     {"detail", r.detail},
                     {"seconds", r.seconds}});
  }
  ctx.out << passed << " of " << rows.size() << " criteria passed";
  if (warned > 0) ctx.out << ", " << warned << " reported as warnings";
  ctx.out << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "acceptance.json");
    f << json{{"seed", seed}, {"w_scale", w_scale}, {"quick", quick}, {"criteria", table}}.dump(2)
      << '\n';
  }
  return passed + warned == static_cast<int>(rows.size()) ? kExitOk : kExitAcceptance;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"gamma-stabilization synthesis and multi-agent synchronization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "gammastab 0.1.0");

  std::string file, out_path, out_dir, write_config;
  Index system_index = 0;
  std::optional<double> gamma, margin;
  bool output_feedback = false, simulate = false, quick = false;
  double w_scale = 0.0;
  std::uint64_t seed = 1;
  SimOverrides ov;

  auto* nf = app.add_subcommand("normal-form", "SVD normal form and assumption report");
  nf->add_option("file", file, "project JSON (or \"bundled\")")->required();
  nf->add_option("--system", system_index, "system index (0-based)");
  nf->add_option("--out", out_path, "also write the report here");

  auto* syn = app.add_subcommand("synthesize", "state- or output-feedback gamma-stabilizer");
  syn->add_option("file", file, "project JSON (or \"bundled\")")->required();
  syn->add_option("--system", system_index, "system index (0-based)");
  syn->add_option("--gamma", gamma, "requested external gain");
  syn->add_flag("--output-feedback", output_feedback, "observer-based controller; needs M, N, Q");
  syn->add_option("--margin", margin, "added to each kappa lower bound");
  syn->add_option("--out", out_path, "controller and certificate JSON");

  auto* sync = app.add_subcommand("sync", "distributed synchronization design");
  sync->add_option("file", file, "project JSON (or \"bundled\")")->required();
  sync->add_option("--gamma", gamma, "requested external gain");
  sync->add_flag("--simulate", simulate, "simulate the closed network");
  sync->add_option("--out-dir", out_dir, "design.json, trace.csv, metrics.json, *.dat");
  sync->add_option("--seed", ov.seed, "initial-state seed");
  sync->add_option("--horizon", ov.horizon, "simulation horizon in seconds");
  sync->add_option("--dt", ov.dt, "recording step in seconds");

  auto* sim = app.add_subcommand("simulate", "simulate a designed project");
  sim->add_option("file", file, "project JSON (or \"bundled\")")->required();
  sim->add_option("--gamma", gamma, "requested external gain");
  sim->add_option("--out-dir", out_dir, "trace.csv, metrics.json, *.dat");
  sim->add_option("--seed", ov.seed, "initial-state seed");
  sim->add_option("--horizon", ov.horizon, "simulation horizon in seconds");
  sim->add_option("--dt", ov.dt, "recording step in seconds");

  auto* rep = app.add_subcommand("reproduce-example", "run the bundled four-agent example and acceptance table");
  rep->add_option("--w-scale", w_scale, "uncertainty amplitude for the synchronization run");
  rep->add_option("--seed", seed, "seed for random instances and initial states");
  rep->add_flag("--quick", quick, "fewer random instances");
  rep->add_option("--out-dir", out_dir, "acceptance.json");
  rep->add_option("--write-config", write_config, "write the bundled project JSON here");

  auto* ver = app.add_subcommand("verify", "re-check the certificate in a saved controller file");
  ver->add_option("file", file, "controller JSON written by synthesize --out")->required();

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  for (std::string& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  Context ctx{out, err};
  try {
    if (*nf) return cmd_normal_form(ctx, file, system_index, out_path);
    if (*syn) return cmd_synthesize(ctx, file, system_index, gamma, output_feedback, margin, out_path);
    if (*sync) return cmd_sync(ctx, file, gamma, simulate, out_dir, ov);
    if (*sim) return cmd_simulate(ctx, file, gamma, out_dir, ov);
    if (*rep) return cmd_reproduce(ctx, w_scale, seed, quick, out_dir, write_config);
    if (*ver) return cmd_verify(ctx, file);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace gammastab::cli
