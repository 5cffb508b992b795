#include "gammastab/mas_sync.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace gammastab {

void AgentModel::validate() const {
  require_square(nominal.A, "agent A");
  require_finite(nominal.A, "agent A");
  require_finite(nominal.B, "agent B");
  require_finite(nominal.C, "agent C");
  const Index n = nominal.A.rows();
  if (nominal.B.rows() != n || nominal.C.cols() != n || n == 0 ||
      nominal.B.cols() == 0 || nominal.C.rows() == 0) {
    throw Error(ErrorKind::kInvalidInput, "agent matrices have inconsistent dimensions");
  }
  for (const UncertainEntry& e : uncertain) {
    const Mat* target = e.matrix == 'A'   ? &nominal.A
                        : e.matrix == 'B' ? &nominal.B
                        : e.matrix == 'C' ? &nominal.C
                                          : nullptr;
    if (target == nullptr) {
      throw Error(ErrorKind::kInvalidInput, "uncertain entry must target A, B or C");
    }
    if (e.row < 0 || e.col < 0 || e.row >= target->rows() || e.col >= target->cols()) {
      throw Error(ErrorKind::kInvalidInput, "uncertain entry position out of range");
    }
    if (!(e.lower <= 0.0 && 0.0 <= e.upper) || !std::isfinite(e.coefficient)) {
      throw Error(ErrorKind::kInvalidInput,
                  "uncertainty box must contain the nominal value w = 0");
    }
  }
}

AgentMatrices AgentModel::evaluate(const Vec& w) const {
  if (w.size() != ell()) {
    throw Error(ErrorKind::kInvalidInput, "uncertainty vector has the wrong length");
  }
  AgentMatrices out = nominal;
  for (Index k = 0; k < ell(); ++k) {
    const UncertainEntry& e = uncertain[static_cast<size_t>(k)];
    if (w(k) == 0.0) continue;
    Mat& target = e.matrix == 'A' ? out.A : e.matrix == 'B' ? out.B : out.C;
    target(e.row, e.col) += e.coefficient * w(k);
  }
  return out;
}

bool AgentModel::in_box(const Vec& w) const {
  if (w.size() != ell()) return false;
  for (Index k = 0; k < ell(); ++k) {
    const UncertainEntry& e = uncertain[static_cast<size_t>(k)];
    if (w(k) < e.lower || w(k) > e.upper) return false;
  }
  return true;
}

namespace {

Vec sample_box(const AgentModel& agent, std::mt19937_64& rng) {
  Vec w(agent.ell());
  for (Index k = 0; k < agent.ell(); ++k) {
    const UncertainEntry& e = agent.uncertain[static_cast<size_t>(k)];
    std::uniform_real_distribution<double> dist(e.lower, e.upper);
    w(k) = dist(rng);
  }
  return w;
}

}  // namespace

std::vector<Vec> AgentModel::rank_deficient_samples(Index samples,
                                                    std::uint64_t seed,
                                                    const Tolerance& tol) const {
  std::mt19937_64 rng(seed);
  std::vector<Vec> bad;
  for (Index k = 0; k < samples; ++k) {
    const Vec w = sample_box(*this, rng);
    const AgentMatrices m = evaluate(w);
    if (numeric_rank(m.B, tol) < m.B.cols()) bad.push_back(w);
  }
  return bad;
}

PatternModel build_pattern_companion(const Mat& a_o, const Mat& c_o,
                                     const Tolerance& tol) {
  require_square(a_o, "A_o");
  require_finite(a_o, "A_o");
  require_finite(c_o, "C_o");
  if (c_o.cols() != a_o.rows()) {
    throw Error(ErrorKind::kInvalidInput, "C_o width must match A_o");
  }
  if (!pbh_detectable(a_o, c_o, tol)) {
    throw Error(ErrorKind::kAssumptionViolation,
                "pattern assumption violated: (A_o, C_o) is not detectable");
  }
  PatternModel pm;
  pm.A_o = a_o;
  pm.C_o = c_o;
  pm.coefficients = minimal_polynomial(a_o, tol);
  pm.s = static_cast<Index>(pm.coefficients.size());
  pm.A_bar = Mat::Zero(pm.s, pm.s);
  for (Index i = 0; i + 1 < pm.s; ++i) pm.A_bar(i, i + 1) = 1.0;
  for (Index k = 0; k < pm.s; ++k) {
    // Last row is (-alpha_s, ..., -alpha_1).
    pm.A_bar(pm.s - 1, k) = -pm.coefficients[static_cast<size_t>(pm.s - 1 - k)];
  }
  pm.C_bar = Mat::Zero(1, pm.s);
  pm.C_bar(0, 0) = 1.0;
  return pm;
}

Digraph laplacian_and_spanning_tree(const Mat& adjacency) {
  require_square(adjacency, "adjacency");
  require_finite(adjacency, "adjacency");
  const Index n = adjacency.rows();
  if (n == 0) throw Error(ErrorKind::kInvalidInput, "graph has no nodes");
  for (Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      throw Error(ErrorKind::kInvalidInput, "adjacency diagonal must be zero");
    }
    for (Index j = 0; j < n; ++j) {
      if (adjacency(i, j) < 0.0) {
        throw Error(ErrorKind::kInvalidInput, "adjacency weights must be non-negative");
      }
    }
  }
  Digraph g;
  g.adjacency = adjacency;
  g.laplacian = -adjacency;
  for (Index i = 0; i < n; ++i) g.laplacian(i, i) = adjacency.row(i).sum();

  // Information flows j -> i when a_ij > 0; look for a root reaching all.
  for (Index root = 0; root < n && !g.has_spanning_tree; ++root) {
    std::vector<char> seen(static_cast<size_t>(n), 0);
    std::vector<Index> stack{root};
    seen[static_cast<size_t>(root)] = 1;
    Index count = 1;
    while (!stack.empty()) {
      const Index j = stack.back();
      stack.pop_back();
      for (Index i = 0; i < n; ++i) {
        if (adjacency(i, j) > 0.0 && !seen[static_cast<size_t>(i)]) {
          seen[static_cast<size_t>(i)] = 1;
          ++count;
          stack.push_back(i);
        }
      }
    }
    g.has_spanning_tree = count == n;
  }
  return g;
}

void ReferenceModel::validate(Index l, Index p) const {
  require_square(A_zeta, "A_zeta");
  for (const Mat* m : {&B_o, &A_zeta, &B_zeta, &C_zeta}) require_finite(*m, "reference model");
  const Index nz = A_zeta.rows();
  if (B_o.rows() != l || C_zeta.cols() != nz || C_zeta.rows() != B_o.cols() ||
      B_zeta.rows() != nz || B_zeta.cols() != p) {
    throw Error(ErrorKind::kInvalidInput, "reference-model matrices have inconsistent dimensions");
  }
  if (!is_hurwitz(A_zeta)) {
    throw Error(ErrorKind::kAssumptionViolation, "reference model requires a Hurwitz A_zeta");
  }
  if (!(gamma_zeta > 0.0) || !std::isfinite(gamma_zeta)) {
    throw Error(ErrorKind::kInvalidInput, "gamma_zeta must be positive");
  }
}

std::vector<std::complex<double>> transmission_zero_violations(
    const AgentMatrices& agent, const Mat& a_o, const Tolerance& tol) {
  const Index n = agent.A.rows();
  const Index m = agent.B.cols();
  const Index p = agent.C.rows();
  const Eigen::VectorXcd ev = eigenvalues(a_o);
  std::vector<std::complex<double>> bad;
  using Cd = std::complex<double>;
  for (Index k = 0; k < ev.size(); ++k) {
    const Cd lambda = ev(k);
    bool dup = false;
    for (Index j = 0; j < k; ++j) dup = dup || std::abs(ev(j) - lambda) < 1e-12;
    if (dup) continue;
    Eigen::MatrixXcd test = Eigen::MatrixXcd::Zero(n + p, n + m);
    test.topLeftCorner(n, n) = agent.A.cast<Cd>();
    test.topLeftCorner(n, n).diagonal().array() -= lambda;
    test.topRightCorner(n, m) = agent.B.cast<Cd>();
    test.bottomLeftCorner(p, n) = agent.C.cast<Cd>();
    if (numeric_rank(test, tol) < n + m) bad.push_back(lambda);
  }
  return bad;
}

RegulatorSolution solve_regulator_equations(const Mat& a, const Mat& b,
                                            const Mat& c, const Mat& a_o,
                                            const Mat& c_o, const Tolerance& tol,
                                            VectorizationOrder order) {
  require_square(a, "A");
  require_square(a_o, "A_o");
  for (const Mat* m : {&a, &b, &c, &a_o, &c_o}) require_finite(*m, "regulator input");
  const Index n = a.rows(), m = b.cols(), p = c.rows(), l = a_o.rows();
  if (b.rows() != n || c.cols() != n || c_o.rows() != p || c_o.cols() != l) {
    throw Error(ErrorKind::kInvalidInput, "regulator equations: dimensions disagree");
  }
  const auto bad = transmission_zero_violations({a, b, c}, a_o, tol);
  if (!bad.empty()) {
    std::ostringstream os;
    os << "transmission-zero condition fails at lambda = " << bad.front().real()
       << (bad.front().imag() < 0 ? " - " : " + ") << std::abs(bad.front().imag())
       << "i";
    throw Error(ErrorKind::kTransmissionZero, os.str());
  }

  const Index nx = n * l, nu = m * l;
  const Mat il = Mat::Identity(l, l);
  Mat xblock(nx + p * l, nx);
  xblock << kron(a_o.transpose(), Mat::Identity(n, n)) - kron(il, a), kron(il, c);
  Mat ublock = Mat::Zero(nx + p * l, nu);
  ublock.topRows(nx) = -kron(il, b);
  Mat sys(nx + p * l, nx + nu);
  if (order == VectorizationOrder::kXFirst) {
    sys << xblock, ublock;
  } else {
    sys << ublock, xblock;
  }
  Vec rhs = Vec::Zero(nx + p * l);
  rhs.tail(p * l) = Eigen::Map<const Vec>(c_o.data(), c_o.size());

  Eigen::ColPivHouseholderQR<Mat> qr(sys);
  qr.setThreshold(tol.rank_tol);
  if (qr.rank() < sys.cols()) {
    throw Error(ErrorKind::kNumericalFailure,
                "regulator equations do not have a unique solution");
  }
  const Vec sol = qr.solve(rhs);
  const Vec xs = order == VectorizationOrder::kXFirst ? Vec(sol.head(nx)) : Vec(sol.tail(nx));
  const Vec us = order == VectorizationOrder::kXFirst ? Vec(sol.tail(nu)) : Vec(sol.head(nu));
  RegulatorSolution out;
  out.X = Eigen::Map<const Mat>(xs.data(), n, l);
  out.U = Eigen::Map<const Mat>(us.data(), m, l);

  const double scale = std::max({1.0, a.norm(), b.norm(), c.norm(), a_o.norm(), c_o.norm()}) *
                       std::max(1.0, out.X.norm() + out.U.norm());
  const double r1 = (out.X * a_o - a * out.X - b * out.U).norm();
  const double r2 = (c_o - c * out.X).norm();
  if (r1 > tol.eq_tol * scale || r2 > tol.eq_tol * scale) {
    throw Error(ErrorKind::kNumericalFailure,
                "regulator equations are inconsistent (residual above tolerance)");
  }
  return out;
}

SteadyStateGenerator build_steady_state_generator(const Mat& u,
                                                  const PatternModel& pattern,
                                                  const Tolerance&) {
  const Index m = u.rows();
  const Index l = pattern.A_o.rows();
  const Index s = pattern.s;
  if (u.cols() != l) {
    throw Error(ErrorKind::kInvalidInput, "U must have as many columns as A_o");
  }
  SteadyStateGenerator g;
  g.Phi = kron(Mat::Identity(m, m), pattern.A_bar);
  g.Psi = kron(Mat::Identity(m, m), pattern.C_bar);
  g.Upsilon.resize(m * s, l);
  for (Index j = 0; j < m; ++j) {
    Mat row = u.row(j);
    for (Index k = 0; k < s; ++k) {
      g.Upsilon.row(j * s + k) = row;
      row = row * pattern.A_o;
    }
  }
  const double scale = std::max(1.0, g.Upsilon.norm()) * (1.0 + pattern.A_o.norm() + g.Phi.norm());
  const double r1 = (g.Upsilon * pattern.A_o - g.Phi * g.Upsilon).norm();
  const double r2 = (u - g.Psi * g.Upsilon).norm();
  if (r1 > 1e-10 * scale || r2 > 1e-10 * scale) {
    throw Error(ErrorKind::kNumericalFailure,
                "steady-state generator identities fail; the minimal polynomial degree is wrong");
  }
  return g;
}

void default_internal_model(Index s, Index m, Mat& m_out, Mat& n_out) {
  Vec diag(s);
  for (Index k = 0; k < s; ++k) diag(k) = -0.5 * static_cast<double>(k + 1);
  m_out = kron(Mat::Identity(m, m), Mat(diag.asDiagonal()));
  n_out = kron(Mat::Identity(m, m), Mat::Ones(s, 1));
}

InternalModel build_internal_model(const AgentMatrices& nominal,
                                   const SteadyStateGenerator& gen, const Mat& m,
                                   const Mat& n, const Mat& x,
                                   const ReferenceModel& ref, const Tolerance& tol) {
  require_square(m, "M");
  if (m.rows() != gen.Phi.rows() || n.rows() != m.rows() || n.cols() != nominal.B.cols()) {
    throw Error(ErrorKind::kInvalidInput, "internal model: M and N dimensions disagree");
  }
  if (!is_hurwitz(m)) {
    throw Error(ErrorKind::kAssumptionViolation, "internal model requires a Hurwitz M");
  }
  if (!pbh_controllable(m, n, tol)) {
    throw Error(ErrorKind::kAssumptionViolation,
                "internal model requires (M, N) controllable");
  }
  InternalModel im;
  im.M = m;
  im.N = n;
  // Overlapping spectra surface as kNoUniqueSolution.
  im.T = solve_sylvester(gen.Phi, m, n * gen.Psi, tol);
  const Eigen::JacobiSVD<Mat> svd(im.T);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= tol.rank_tol * std::max(1.0, sv(0))) {
    throw Error(ErrorKind::kSynthesisFailure,
                "Sylvester solution T is numerically singular; choose a different M");
  }
  im.T_inv = im.T.inverse();
  im.Q = gen.Psi * im.T_inv;
  const Mat bplus = pinv(nominal.B, tol);
  im.E_eta = (im.T * gen.Upsilon - n * bplus * x) * ref.B_o * ref.C_zeta;
  return im;
}

AugmentedPlant build_augmented_system(const AgentMatrices& nominal,
                                      const InternalModel& im, const Mat& x,
                                      const ReferenceModel& ref,
                                      const Tolerance& tol) {
  AugmentedPlant plant;
  plant.A = nominal.A;
  plant.B = nominal.B;
  plant.C = nominal.C;
  plant.R = -x * ref.B_o * ref.C_zeta;
  plant.M = im.M;
  plant.N = im.N;
  plant.Q = im.Q;
  plant.validate();
  const Mat abar = plant.Abar(tol);
  const Index n = nominal.A.rows();
  const Index nz = im.M.rows();
  const double d1 = (abar.topRightCorner(n, nz) - nominal.B * im.Q).norm();
  const double d2 = (abar.bottomRightCorner(nz, nz) - (im.M + im.N * im.Q)).norm();
  if (d1 > 1e-12 * std::max(1.0, abar.norm()) || d2 > 1e-12 * std::max(1.0, abar.norm())) {
    throw Error(ErrorKind::kInternalConsistency, "augmented system structure check failed");
  }
  if (!pbh_detectable(abar, plant.Cbar(), tol)) {
    throw Error(ErrorKind::kInternalConsistency,
                "augmented pair (Abar, Cbar) is not detectable");
  }
  return plant;
}

SyncDesign design_agent(const AgentModel& agent, const PatternModel& pattern,
                        const ReferenceModel& ref, double gamma,
                        const SyncOptions& opts, const Tolerance& tol) {
  agent.validate();
  SyncDesign d;
  d.nominal = agent.nominal;
  const AgentMatrices& nom = d.nominal;
  if (numeric_rank(nom.B, tol) < nom.B.cols()) {
    throw Error(ErrorKind::kAssumptionViolation, "agent B must have full column rank");
  }
  d.regulator = solve_regulator_equations(nom.A, nom.B, nom.C, pattern.A_o, pattern.C_o, tol);
  d.generator = build_steady_state_generator(d.regulator.U, pattern, tol);
  Mat m = opts.M, n = opts.N;
  if (m.size() == 0 || n.size() == 0) default_internal_model(pattern.s, nom.B.cols(), m, n);
  d.internal_model = build_internal_model(nom, d.generator, m, n, d.regulator.X, ref, tol);
  d.plant = build_augmented_system(nom, d.internal_model, d.regulator.X, ref, tol);

  const LinearSystem base = d.plant.base();
  d.normal_form = normal_form(base, tol);
  const AssumptionReport rep = check_assumptions(base, d.normal_form.l, tol);
  if (!rep.detectable) {
    throw Error(ErrorKind::kAssumptionViolation,
                "detectability assumption violated: (A_i, C_i) is not detectable");
  }
  SynthesisOptions so;
  so.margin = opts.margin;
  d.state_feedback = synthesize_state_feedback(d.normal_form, gamma, so, tol);
  d.output_feedback = synthesize_output_feedback(d.plant, d.state_feedback, tol);
  return d;
}

AgentController assemble_distributed_controller(const SyncDesign& design,
                                                const PatternModel& pattern,
                                                const ReferenceModel& ref,
                                                Index agents, double gamma) {
  if (!small_gain_check(gamma, ref.gamma_zeta, agents)) {
    std::ostringstream os;
    os << "small-gain condition violated: gamma = " << gamma
       << " is not below 1/(N gamma_zeta) = " << small_gain_bound(ref.gamma_zeta, agents);
    throw Error(ErrorKind::kDesignRejection, os.str());
  }
  const OutputFeedbackController& of = design.output_feedback.controller;
  const InternalModel& im = design.internal_model;
  AgentController c;
  c.n_chi = of.Abar.rows();
  c.n_v = pattern.A_o.rows();
  c.n_zeta = ref.n_zeta();
  c.n_eta = im.M.rows();
  const Index dim = c.dim();
  const Index o_v = c.n_chi, o_z = o_v + c.n_v, o_e = o_z + c.n_zeta;
  const Index p = of.Cbar.rows();
  const Index m = of.Bbar.cols();

  c.Ak = Mat::Zero(dim, dim);
  c.Ak.topLeftCorner(c.n_chi, c.n_chi) = of.Abar - of.L * of.Cbar + of.Bbar * of.Kbar;
  c.Ak.block(0, o_v, c.n_chi, c.n_v) = -of.L * pattern.C_o;
  c.Ak.block(0, o_z, c.n_chi, c.n_zeta) = of.Rbar;
  c.Ak.block(o_v, o_v, c.n_v, c.n_v) = pattern.A_o;
  c.Ak.block(o_v, o_z, c.n_v, c.n_zeta) = ref.B_o * ref.C_zeta;
  c.Ak.block(o_z, o_z, c.n_zeta, c.n_zeta) = ref.A_zeta;
  c.Ak.block(o_e, 0, c.n_eta, c.n_chi) = im.N * of.Kbar;
  c.Ak.block(o_e, o_z, c.n_eta, c.n_zeta) = im.E_eta;
  c.Ak.block(o_e, o_e, c.n_eta, c.n_eta) = im.M + im.N * im.Q;

  c.By = Mat::Zero(dim, p);
  c.By.topRows(c.n_chi) = of.L;
  c.Bs = Mat::Zero(dim, p);
  c.Bs.block(o_z, 0, c.n_zeta, p) = ref.B_zeta;
  c.Cu = Mat::Zero(m, dim);
  c.Cu.leftCols(c.n_chi) = of.Kbar;
  c.Cu.rightCols(c.n_eta) = im.Q;
  return c;
}

NetworkDesign design_network(const std::vector<AgentModel>& agents,
                             const Mat& adjacency, const Mat& a_o, const Mat& c_o,
                             const ReferenceModel& ref, double gamma,
                             const SyncOptions& opts, const Tolerance& tol) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw Error(ErrorKind::kInvalidInput, "gamma must be positive and finite");
  }
  NetworkDesign net;
  net.graph = laplacian_and_spanning_tree(adjacency);
  const Index nagents = net.graph.agents();
  if (static_cast<Index>(agents.size()) != nagents) {
    throw Error(ErrorKind::kInvalidInput, "agent count does not match the graph");
  }
  if (!net.graph.has_spanning_tree) {
    throw Error(ErrorKind::kAssumptionViolation, "communication graph has no spanning tree");
  }
  net.pattern = build_pattern_companion(a_o, c_o, tol);
  for (const AgentModel& a : agents) {
    a.validate();
    if (a.nominal.C.rows() != c_o.rows()) {
      throw Error(ErrorKind::kInvalidInput, "agent output dimension differs from the pattern");
    }
  }
  ref.validate(a_o.rows(), c_o.rows());
  net.reference = ref;
  net.agents = agents;
  net.gamma = gamma;
  net.bound = small_gain_bound(ref.gamma_zeta, nagents);
  if (!small_gain_check(gamma, ref.gamma_zeta, nagents)) {
    std::ostringstream os;
    os << "small-gain condition violated: gamma = " << gamma
       << " is not below 1/(N gamma_zeta) = " << net.bound;
    throw Error(ErrorKind::kDesignRejection, os.str());
  }

  for (Index i = 0; i < nagents; ++i) {
    const AgentModel& agent = agents[static_cast<size_t>(i)];
    const auto bad_b = agent.rank_deficient_samples(64, 1000 + static_cast<std::uint64_t>(i), tol);
    if (!bad_b.empty()) {
      std::ostringstream os;
      os << "agent " << (i + 1) << ": B(w) loses column rank at " << bad_b.size()
         << " of 64 sampled points in the uncertainty box";
      net.warnings.push_back(os.str());
    }
    std::mt19937_64 rng(2000 + static_cast<std::uint64_t>(i));
    Index tz = 0;
    for (int k = 0; k < 64 && agent.ell() > 0; ++k) {
      const Vec w = sample_box(agent, rng);
      if (!transmission_zero_violations(agent.evaluate(w), a_o, tol).empty()) ++tz;
    }
    if (tz > 0) {
      std::ostringstream os;
      os << "agent " << (i + 1) << ": transmission-zero condition fails at " << tz
         << " of 64 sampled points in the uncertainty box";
      net.warnings.push_back(os.str());
    }
    net.designs.push_back(design_agent(agent, net.pattern, ref, gamma, opts, tol));
    net.controllers.push_back(assemble_distributed_controller(
        net.designs.back(), net.pattern, ref, nagents, gamma));
  }
  return net;
}

}  // namespace gammastab
