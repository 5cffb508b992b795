#include "gammastab/sim_engine.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace gammastab {

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error(ErrorKind::kInvalidInput, "dt must be positive");
  }
  if (!(horizon >= 10.0 * dt) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::kInvalidInput, "horizon must be at least 10 dt");
  }
  if (record_every < 1) {
    throw Error(ErrorKind::kInvalidInput, "record_every must be at least 1");
  }
}

Index SimConfig::steps() const {
  return static_cast<Index>(std::llround(std::ceil(horizon / dt - 1e-9)));
}

Vec Trace::agent_output(Index i, Index k) const {
  return outputs.row(k).segment(i * outputs_per_agent, outputs_per_agent).transpose();
}

Mat rk4_step_matrix(const Mat& a, double h) {
  require_square(a, "A");
  const Index n = a.rows();
  const Mat ha = h * a;
  // Horner form of the degree-4 Taylor polynomial.
  Mat acc = Mat::Identity(n, n) + ha / 4.0;
  acc = Mat::Identity(n, n) + ha * acc / 3.0;
  acc = Mat::Identity(n, n) + ha * acc / 2.0;
  return Mat::Identity(n, n) + ha * acc;
}

Trace integrate(const LtiModel& model, const Vec& x0, const SimConfig& config,
                const InputSignal& input, bool keep_states) {
  config.validate();
  require_square(model.A, "A");
  require_finite(model.A, "A");
  const Index n = model.A.rows();
  if (x0.size() != n) {
    throw Error(ErrorKind::kInvalidInput, "initial state has the wrong dimension");
  }
  if (!x0.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "initial state is not finite");
  }
  const bool has_c = model.C.size() > 0;
  if (has_c && model.C.cols() != n) {
    throw Error(ErrorKind::kInvalidInput, "output matrix has the wrong width");
  }
  if (input && model.B.rows() != n) {
    throw Error(ErrorKind::kInvalidInput, "input matrix has the wrong height");
  }

  const Index steps = config.steps();
  const double h = config.dt;
  const Index records = steps / config.record_every + 1 +
                        (steps % config.record_every != 0 ? 1 : 0);
  Trace tr;
  tr.seed = config.seed;
  const Index p = has_c ? model.C.rows() : n;
  tr.outputs.resize(records, p);
  tr.outputs_per_agent = p;
  if (keep_states) tr.states.resize(records, n);
  tr.t.reserve(static_cast<size_t>(records));

  Index rec = 0;
  auto record = [&](double t, const Vec& x) {
    tr.t.push_back(t);
    if (has_c) {
      tr.outputs.row(rec) = (model.C * x).transpose();
    } else {
      tr.outputs.row(rec) = x.transpose();
    }
    if (keep_states) tr.states.row(rec) = x.transpose();
    ++rec;
  };

  Vec x = x0;
  record(0.0, x);
  if (input && config.stepper == Stepper::kExponential) {
    throw Error(ErrorKind::kInvalidInput, "the exponential stepper takes no input signal");
  }
  Mat step;
  if (!input) {
    step = config.stepper == Stepper::kExponential ? Mat((model.A * h).exp())
                                                   : rk4_step_matrix(model.A, h);
  }
  Vec tmp(n);
  for (Index k = 1; k <= steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * h;
    if (input) {
      auto f = [&](double t, const Vec& s) -> Vec {
        return model.A * s + model.B * input(t);
      };
      const Vec k1 = f(t0, x);
      const Vec k2 = f(t0 + 0.5 * h, x + 0.5 * h * k1);
      const Vec k3 = f(t0 + 0.5 * h, x + 0.5 * h * k2);
      const Vec k4 = f(t0 + h, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      tmp.noalias() = step * x;
      x.swap(tmp);
    }
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "state became non-finite at t = " << static_cast<double>(k) * h;
      throw Error(ErrorKind::kDivergence, os.str());
    }
    if (k % config.record_every == 0 || k == steps) {
      record(static_cast<double>(k) * h, x);
    }
  }
  tr.final_state = x;
  for (Index j = 0; j < p; ++j) tr.output_names.push_back("y" + std::to_string(j + 1));
  return tr;
}

namespace {

Index tail_start(const Trace& tr, double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw Error(ErrorKind::kInvalidInput, "tail fraction must lie in (0, 1]");
  }
  const auto rows = static_cast<Index>(tr.t.size());
  if (rows == 0) throw Error(ErrorKind::kInvalidInput, "empty trace");
  const double t_end = tr.t.back();
  const double t_cut = t_end - tail_fraction * (t_end - tr.t.front());
  Index k = 0;
  while (k + 1 < rows && tr.t[static_cast<size_t>(k)] < t_cut) ++k;
  return k;
}

}  // namespace

double sync_error(const Trace& trace, double tail_fraction) {
  if (trace.agents < 2) {
    throw Error(ErrorKind::kInvalidInput, "sync error needs at least two agents");
  }
  const Index start = tail_start(trace, tail_fraction);
  double worst = 0.0;
  for (Index k = start; k < static_cast<Index>(trace.t.size()); ++k) {
    for (Index i = 0; i < trace.agents; ++i) {
      const Vec yi = trace.agent_output(i, k);
      for (Index j = i + 1; j < trace.agents; ++j) {
        worst = std::max(worst, (yi - trace.agent_output(j, k)).norm());
      }
    }
  }
  return worst;
}

double tail_amplitude(const Trace& trace, double tail_fraction) {
  const Index start = tail_start(trace, tail_fraction);
  double amp = 0.0;
  for (Index k = start; k < static_cast<Index>(trace.t.size()); ++k) {
    for (Index i = 0; i < trace.agents; ++i) {
      amp = std::max(amp, trace.agent_output(i, k).norm());
    }
  }
  return amp;
}

std::vector<double> tail_signal(const Trace& trace, Index column,
                                double tail_fraction) {
  const Index start = tail_start(trace, tail_fraction);
  std::vector<double> out;
  for (Index k = start; k < static_cast<Index>(trace.t.size()); ++k) {
    out.push_back(trace.outputs(k, column));
  }
  return out;
}

namespace {

// Residual energy of the least-squares fit a sin(wt) + b cos(wt) + c.
double fit_residual(const std::vector<double>& y, double dt, Index stride,
                    double omega) {
  Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  double yy = 0.0;
  const auto n = static_cast<Index>(y.size());
  for (Index k = 0; k < n; k += stride) {
    const double t = static_cast<double>(k) * dt;
    const Eigen::Vector3d phi(std::sin(omega * t), std::cos(omega * t), 1.0);
    const double v = y[static_cast<size_t>(k)];
    g.noalias() += phi * phi.transpose();
    rhs += v * phi;
    yy += v * v;
  }
  const Eigen::Vector3d theta = g.ldlt().solve(rhs);
  return yy - rhs.dot(theta);
}

}  // namespace

double dominant_frequency(const std::vector<double>& signal, double dt,
                          double flat_tol) {
  if (!(dt > 0.0)) throw Error(ErrorKind::kInvalidInput, "dt must be positive");
  const auto n = static_cast<Index>(signal.size());
  if (n < 8) throw Error(ErrorKind::kInvalidInput, "signal too short");
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : signal) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var < flat_tol) {
    throw Error(ErrorKind::kNoFrequency, "signal is flat; no dominant frequency");
  }

  const double span = static_cast<double>(n - 1) * dt;
  const Index stride = std::max<Index>(1, n / 4000);
  const double w_lo = std::numbers::pi / span;
  const double w_hi = std::numbers::pi / (dt * static_cast<double>(stride));
  double spacing = std::numbers::pi / (4.0 * span);
  const double max_points = 20000.0;
  if ((w_hi - w_lo) / spacing > max_points) spacing = (w_hi - w_lo) / max_points;

  double best_w = w_lo;
  double best_r = std::numeric_limits<double>::infinity();
  for (double w = w_lo; w <= w_hi; w += spacing) {
    const double r = fit_residual(signal, dt, stride, w);
    if (r < best_r) {
      best_r = r;
      best_w = w;
    }
  }

  // Golden-section refinement on the full-resolution signal.
  double a = std::max(1e-12, best_w - spacing);
  double b = best_w + spacing;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = fit_residual(signal, dt, 1, c);
  double fd = fit_residual(signal, dt, 1, d);
  for (int it = 0; it < 80 && (b - a) > 1e-10 * std::max(1.0, best_w); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = fit_residual(signal, dt, 1, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = fit_residual(signal, dt, 1, d);
    }
  }
  return 0.5 * (a + b);
}

void write_csv(std::ostream& os, const Trace& trace, bool with_states) {
  os << "t";
  for (const auto& name : trace.output_names) os << ',' << name;
  const bool states = with_states && trace.states.size() > 0;
  if (states) {
    for (Index j = 0; j < trace.states.cols(); ++j) os << ",x" << (j + 1);
  }
  os << '\n';
  os << std::setprecision(17);
  for (Index k = 0; k < static_cast<Index>(trace.t.size()); ++k) {
    os << trace.t[static_cast<size_t>(k)];
    for (Index j = 0; j < trace.outputs.cols(); ++j) os << ',' << trace.outputs(k, j);
    if (states) {
      for (Index j = 0; j < trace.states.cols(); ++j) os << ',' << trace.states(k, j);
    }
    os << '\n';
  }
}

void write_gnuplot_column(std::ostream& os, const Trace& trace, Index column) {
  if (column < 0 || column >= trace.outputs.cols()) {
    throw Error(ErrorKind::kInvalidInput, "output column out of range");
  }
  os << "# t " << trace.output_names.at(static_cast<size_t>(column)) << '\n';
  os << std::setprecision(12);
  for (Index k = 0; k < static_cast<Index>(trace.t.size()); ++k) {
    os << trace.t[static_cast<size_t>(k)] << ' ' << trace.outputs(k, column) << '\n';
  }
}

}  // namespace gammastab
