#include "gammastab/network_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gammastab {

NetworkLayout network_layout(const NetworkDesign& net) {
  NetworkLayout lay;
  for (size_t i = 0; i < net.agents.size(); ++i) {
    lay.agent_offset.push_back(lay.total);
    lay.plant_dim.push_back(net.agents[i].nominal.A.rows());
    lay.controller_dim.push_back(net.controllers.at(i).dim());
    lay.total += lay.plant_dim.back() + lay.controller_dim.back();
  }
  return lay;
}

namespace {

std::vector<AgentMatrices> evaluate_agents(const NetworkDesign& net,
                                           const std::vector<Vec>& w) {
  if (!w.empty() && w.size() != net.agents.size()) {
    throw Error(ErrorKind::kInvalidInput, "one uncertainty vector per agent is required");
  }
  std::vector<AgentMatrices> out;
  for (size_t i = 0; i < net.agents.size(); ++i) {
    const AgentModel& a = net.agents[i];
    if (w.empty()) {
      out.push_back(a.nominal);
    } else {
      if (!a.in_box(w[i])) {
        throw Error(ErrorKind::kInvalidInput, "uncertainty vector outside its declared box");
      }
      out.push_back(a.evaluate(w[i]));
    }
  }
  return out;
}

}  // namespace

Mat assemble_network_matrix(const NetworkDesign& net, const std::vector<Vec>& w) {
  const NetworkLayout lay = network_layout(net);
  const auto mats = evaluate_agents(net, w);
  const Mat& lap = net.graph.laplacian;
  const auto n_agents = static_cast<Index>(mats.size());
  Mat a = Mat::Zero(lay.total, lay.total);
  for (Index i = 0; i < n_agents; ++i) {
    const auto ui = static_cast<size_t>(i);
    const AgentController& c = net.controllers[ui];
    const Index xo = lay.agent_offset[ui];
    const Index nx = lay.plant_dim[ui];
    const Index co = xo + nx;
    const Index nc = lay.controller_dim[ui];
    a.block(xo, xo, nx, nx) = mats[ui].A;
    a.block(xo, co, nx, nc) = mats[ui].B * c.Cu;
    a.block(co, co, nc, nc) = c.Ak;
    a.block(co, xo, nc, nx) += c.By * mats[ui].C;
    // varsigma_i = sum_j a_ij (y_j - y_i) = -sum_j l_ij y_j.
    for (Index j = 0; j < n_agents; ++j) {
      if (lap(i, j) == 0.0) continue;
      const auto uj = static_cast<size_t>(j);
      a.block(co, lay.agent_offset[uj], nc, lay.plant_dim[uj]) -=
          lap(i, j) * c.Bs * mats[uj].C;
    }
  }
  return a;
}

Mat network_output_matrix(const NetworkDesign& net, const std::vector<Vec>& w) {
  const NetworkLayout lay = network_layout(net);
  const auto mats = evaluate_agents(net, w);
  const auto n_agents = static_cast<Index>(mats.size());
  const Index p = net.pattern.C_o.rows();
  Mat c = Mat::Zero(2 * n_agents * p, lay.total);
  for (Index i = 0; i < n_agents; ++i) {
    const auto ui = static_cast<size_t>(i);
    const Index xo = lay.agent_offset[ui];
    const Index nx = lay.plant_dim[ui];
    const Index vo = xo + nx + net.controllers[ui].n_chi;
    const Index nv = net.controllers[ui].n_v;
    c.block(i * p, xo, p, nx) = mats[ui].C;
    c.block((n_agents + i) * p, xo, p, nx) = mats[ui].C;
    c.block((n_agents + i) * p, vo, p, nv) = -net.pattern.C_o;
  }
  return c;
}

Vec random_initial_state(const NetworkDesign& net, std::uint64_t seed) {
  const NetworkLayout lay = network_layout(net);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vec x(lay.total);
  for (Index k = 0; k < lay.total; ++k) x(k) = dist(rng);
  return x;
}

Vec manifold_initial_state(const NetworkDesign& net, const Vec& v) {
  const NetworkLayout lay = network_layout(net);
  if (v.size() != net.pattern.A_o.rows()) {
    throw Error(ErrorKind::kInvalidInput, "pattern state has the wrong dimension");
  }
  Vec x = Vec::Zero(lay.total);
  for (size_t i = 0; i < net.agents.size(); ++i) {
    const SyncDesign& d = net.designs[i];
    const AgentController& c = net.controllers[i];
    const Index xo = lay.agent_offset[i];
    const Index nx = lay.plant_dim[i];
    const Index vo = xo + nx + c.n_chi;
    const Index eo = vo + c.n_v + c.n_zeta;
    x.segment(xo, nx) = d.regulator.X * v;
    x.segment(vo, c.n_v) = v;
    x.segment(eo, c.n_eta) = d.internal_model.T * d.generator.Upsilon * v;
  }
  return x;
}

double stable_step(const Mat& a, double dt) {
  const double rho = eigenvalues(a).cwiseAbs().maxCoeff();
  if (rho <= 0.0) return dt;
  return std::min(dt, 1.0 / rho);
}

Trace simulate_network(const NetworkDesign& net, const Vec& x0,
                       const SimConfig& config, const std::vector<Vec>& w) {
  config.validate();
  const Mat a = assemble_network_matrix(net, w);
  const Mat c = network_output_matrix(net, w);
  SimConfig run = config;
  const double h = stable_step(a, config.dt);
  if (h < config.dt) {
    const auto sub = static_cast<Index>(std::ceil(config.dt / h - 1e-9));
    run.dt = config.dt / static_cast<double>(sub);
    run.record_every = config.record_every * sub;
  }
  Trace tr = integrate({a, Mat(), c}, x0, run);
  const auto n_agents = static_cast<Index>(net.agents.size());
  const Index p = net.pattern.C_o.rows();
  tr.agents = n_agents;
  tr.outputs_per_agent = p;
  tr.output_names.clear();
  for (const char* prefix : {"y", "e"}) {
    for (Index i = 0; i < n_agents; ++i) {
      for (Index k = 0; k < p; ++k) {
        tr.output_names.push_back(std::string(prefix) + std::to_string(i + 1) + "_" +
                                  std::to_string(k + 1));
      }
    }
  }
  std::ostringstream os;
  os << "network N=" << n_agents << " gamma=" << net.gamma << " dt=" << run.dt
     << " horizon=" << config.horizon;
  tr.description = os.str();
  tr.seed = config.seed;
  return tr;
}

double max_regulation_error(const Trace& trace) {
  const Index width = trace.agents * trace.outputs_per_agent;
  if (trace.outputs.cols() != 2 * width) {
    throw Error(ErrorKind::kInvalidInput, "trace does not carry regulation errors");
  }
  double worst = 0.0;
  for (Index k = 0; k < trace.outputs.rows(); ++k) {
    for (Index i = 0; i < trace.agents; ++i) {
      worst = std::max(worst, trace.outputs.row(k)
                                  .segment(width + i * trace.outputs_per_agent,
                                           trace.outputs_per_agent)
                                  .norm());
    }
  }
  return worst;
}

Mat interconnection_matrix(const Interconnection& ic) {
  if (ic.sigma1.empty()) {
    throw Error(ErrorKind::kInvalidInput, "interconnection needs at least one loop");
  }
  const ClosedLoop& s2 = ic.sigma2;
  require_square(s2.A, "Sigma_2 A");
  const Index ell = s2.C.rows();
  Index n1 = 0, p = 0;
  for (const ClosedLoop& l : ic.sigma1) {
    require_square(l.A, "Sigma_1 A");
    if (l.R.rows() != l.A.rows() || l.R.cols() != ell || l.C.cols() != l.A.rows()) {
      throw Error(ErrorKind::kInvalidInput, "Sigma_1 loop dimensions disagree with zeta");
    }
    n1 += l.A.rows();
    p += l.C.rows();
  }
  if (s2.R.cols() != p || s2.R.rows() != s2.A.rows() || s2.C.cols() != s2.A.rows()) {
    throw Error(ErrorKind::kInvalidInput, "Sigma_2 dimensions disagree with y");
  }
  const Index nt = s2.A.rows();
  Mat a = Mat::Zero(n1 + nt, n1 + nt);
  Index off = 0, yoff = 0;
  for (const ClosedLoop& l : ic.sigma1) {
    const Index n = l.A.rows();
    a.block(off, off, n, n) = l.A;
    a.block(off, n1, n, nt) = l.R * s2.C;
    a.block(n1, off, nt, n) = s2.R.middleCols(yoff, l.C.rows()) * l.C;
    off += n;
    yoff += l.C.rows();
  }
  a.bottomRightCorner(nt, nt) = s2.A;
  return a;
}

DecayReport interconnection_sim(const Interconnection& ic, const Vec& x0,
                                double horizon, double dt, double threshold) {
  const auto n = static_cast<Index>(ic.sigma1.size());
  if (!small_gain_check(ic.gamma, ic.gamma_zeta, n)) {
    std::ostringstream os;
    os << "small-gain condition violated: gamma = " << ic.gamma
       << " is not below 1/(N gamma_zeta) = " << small_gain_bound(ic.gamma_zeta, n);
    throw Error(ErrorKind::kDesignRejection, os.str());
  }
  const Mat a = interconnection_matrix(ic);
  Index p = 0;
  for (const ClosedLoop& l : ic.sigma1) p += l.C.rows();
  Mat cy = Mat::Zero(p, a.rows());
  Index off = 0, yoff = 0;
  for (const ClosedLoop& l : ic.sigma1) {
    cy.block(yoff, off, l.C.rows(), l.A.rows()) = l.C;
    off += l.A.rows();
    yoff += l.C.rows();
  }
  Mat cz = Mat::Zero(ic.sigma2.C.rows(), a.rows());
  cz.rightCols(ic.sigma2.A.rows()) = ic.sigma2.C;

  DecayReport rep;
  const double sigma = -spectral_abscissa(a);
  if (!(sigma > 0.0)) {
    throw Error(ErrorKind::kDivergence, "interconnected system is not asymptotically stable");
  }
  rep.horizon = horizon > 0.0 ? horizon : std::max(10.0, 3.0 * std::log(1e4) / sigma);
  rep.dt = dt;
  SimConfig cfg;
  cfg.dt = rep.dt;
  cfg.stepper = Stepper::kExponential;
  cfg.horizon = rep.horizon;
  cfg.record_every = std::max<Index>(1, cfg.steps() / 2000);
  Mat c(p + cz.rows(), a.rows());
  c << cy, cz;
  const Trace tr = integrate({a, Mat(), c}, x0, cfg);
  const Index last = tr.outputs.rows() - 1;
  rep.y_initial = tr.outputs.row(0).head(p).norm();
  rep.zeta_initial = tr.outputs.row(0).tail(cz.rows()).norm();
  rep.y_final = tr.outputs.row(last).head(p).norm();
  rep.zeta_final = tr.outputs.row(last).tail(cz.rows()).norm();
  // A zero initial output is measured against the peak instead.
  double y_ref = rep.y_initial, z_ref = rep.zeta_initial;
  if (y_ref == 0.0 || z_ref == 0.0) {
    for (Index k = 0; k <= last; ++k) {
      y_ref = std::max(y_ref, tr.outputs.row(k).head(p).norm());
      z_ref = std::max(z_ref, tr.outputs.row(k).tail(cz.rows()).norm());
    }
  }
  rep.decayed = rep.y_final <= threshold * y_ref && rep.zeta_final <= threshold * z_ref;
  return rep;
}

}  // namespace gammastab
