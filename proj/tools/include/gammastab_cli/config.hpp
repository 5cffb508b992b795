#pragma once

// Project files: one JSON document describing systems, graph, pattern,
// reference model, requested gain, tolerances and simulation settings.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gammastab/gamma_synthesis.hpp"
#include "gammastab/mas_sync.hpp"
#include "gammastab/sim_engine.hpp"

namespace gammastab::cli {

using nlohmann::json;

struct SystemConfig {
  std::string name;
  AgentModel model;
  /// Perturbation matrix R; empty when absent.
  Mat R;
  /// Optional z-subsystem (M, N, Q) for output feedback.
  Mat M;
  Mat N;
  Mat Q;
  /// Sampled uncertainty values used by simulation; empty means w = 0.
  Vec w;
};

struct SimulationConfig {
  SimConfig sim;
  /// "random" or "manifold".
  std::string initial = "random";
  /// Pattern state for manifold initialization; empty picks (1, 0, ...).
  Vec v0;
};

struct ProjectConfig {
  std::vector<SystemConfig> systems;
  std::optional<Mat> adjacency;
  std::optional<Mat> A_o;
  std::optional<Mat> C_o;
  std::optional<ReferenceModel> reference;
  std::optional<Mat> M;
  std::optional<Mat> N;
  std::optional<double> gamma;
  double margin = 1.0;
  Tolerance tolerance;
  SimulationConfig simulation;

  bool has_network() const { return adjacency && A_o && C_o && reference; }
};

/// Row-major nested arrays. Throws kInvalidInput naming `path`.
Mat matrix_from_json(const json& j, const std::string& path);
json matrix_to_json(const Mat& m);
Vec vector_from_json(const json& j, const std::string& path);
json vector_to_json(const Vec& v);

/// Schema-checked conversion; unknown fields are rejected and every matrix
/// dimension is cross-checked. Errors carry the JSON path of the field.
/// `base` supplies tolerance defaults (normally from the environment).
ProjectConfig parse_project(const json& doc, const Tolerance& base = {});

/// Reads and parses a file; parse errors report line and column.
ProjectConfig load_project(const std::string& path, const Tolerance& base = {});
json load_json_file(const std::string& path);

json project_to_json(const ProjectConfig& cfg);

/// Agents, pattern and reference model of the bundled example.
ProjectConfig bundled_project();

}  // namespace gammastab::cli
