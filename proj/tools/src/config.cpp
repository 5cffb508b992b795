#include "gammastab_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gammastab/example_data.hpp"

namespace gammastab::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

Index count(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < 0) fail(path, "must be non-negative");
  return static_cast<Index>(v);
}

void expect_shape(const Mat& m, Index rows, Index cols, const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    fail(path, os.str());
  }
}

}  // namespace

Mat matrix_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a matrix as an array of rows");
  const auto rows = static_cast<Index>(j.size());
  if (rows == 0) return Mat(0, 0);
  if (!j[0].is_array()) fail(path + "[0]", "expected a row array");
  const auto cols = static_cast<Index>(j[0].size());
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array()) fail(rp, "expected a row array");
    if (static_cast<Index>(row.size()) != cols) fail(rp, "ragged row length");
    for (Index k = 0; k < cols; ++k) {
      m(i, k) = number(row[static_cast<size_t>(k)], rp + "[" + std::to_string(k) + "]");
    }
  }
  return m;
}

json matrix_to_json(const Mat& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

Vec vector_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vec v(static_cast<Index>(j.size()));
  for (size_t k = 0; k < j.size(); ++k) {
    v(static_cast<Index>(k)) = number(j[k], path + "[" + std::to_string(k) + "]");
  }
  return v;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

namespace {

UncertainEntry parse_uncertain(const json& j, const std::string& path) {
  reject_unknown(j, path, {"matrix", "row", "col", "coefficient", "lower", "upper"});
  UncertainEntry e;
  if (!j.contains("matrix") || !j["matrix"].is_string()) fail(path + ".matrix", "required string A, B or C");
  const std::string which = j["matrix"].get<std::string>();
  if (which != "A" && which != "B" && which != "C") fail(path + ".matrix", "must be A, B or C");
  e.matrix = which[0];
  if (!j.contains("row") || !j.contains("col")) fail(path, "row and col are required");
  e.row = count(j["row"], path + ".row");
  e.col = count(j["col"], path + ".col");
  if (j.contains("coefficient")) e.coefficient = number(j["coefficient"], path + ".coefficient");
  if (j.contains("lower")) e.lower = number(j["lower"], path + ".lower");
  if (j.contains("upper")) e.upper = number(j["upper"], path + ".upper");
  if (!(e.lower <= 0.0 && 0.0 <= e.upper)) fail(path, "box [lower, upper] must contain 0");
  return e;
}

SystemConfig parse_system(const json& j, const std::string& path) {
  reject_unknown(j, path, {"name", "A", "B", "C", "R", "M", "N", "Q", "uncertain", "w"});
  SystemConfig s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail(path + ".name", "expected a string");
    s.name = j["name"].get<std::string>();
  }
  for (const char* key : {"A", "B", "C"}) {
    if (!j.contains(key)) fail(path + "." + key, "required matrix is missing");
  }
  s.model.nominal.A = matrix_from_json(j["A"], path + ".A");
  const Index n = s.model.nominal.A.rows();
  expect_shape(s.model.nominal.A, n, n, path + ".A");
  if (n == 0) fail(path + ".A", "must not be empty");
  s.model.nominal.B = matrix_from_json(j["B"], path + ".B");
  if (s.model.nominal.B.rows() != n || s.model.nominal.B.cols() == 0) {
    fail(path + ".B", "expected " + std::to_string(n) + " rows and at least one column");
  }
  s.model.nominal.C = matrix_from_json(j["C"], path + ".C");
  if (s.model.nominal.C.cols() != n || s.model.nominal.C.rows() == 0) {
    fail(path + ".C", "expected " + std::to_string(n) + " columns and at least one row");
  }
  const Index m = s.model.nominal.B.cols();
  if (j.contains("R")) {
    s.R = matrix_from_json(j["R"], path + ".R");
    if (s.R.rows() != n || s.R.cols() == 0) {
      fail(path + ".R", "expected " + std::to_string(n) + " rows and at least one column");
    }
  }
  const bool any_z = j.contains("M") || j.contains("N") || j.contains("Q");
  if (any_z) {
    for (const char* key : {"M", "N", "Q"}) {
      if (!j.contains(key)) fail(path + "." + key, "M, N and Q must be given together");
    }
    s.M = matrix_from_json(j["M"], path + ".M");
    const Index nz = s.M.rows();
    expect_shape(s.M, nz, nz, path + ".M");
    s.N = matrix_from_json(j["N"], path + ".N");
    expect_shape(s.N, nz, m, path + ".N");
    s.Q = matrix_from_json(j["Q"], path + ".Q");
    expect_shape(s.Q, m, nz, path + ".Q");
  }
  if (j.contains("uncertain")) {
    if (!j["uncertain"].is_array()) fail(path + ".uncertain", "expected an array");
    for (size_t k = 0; k < j["uncertain"].size(); ++k) {
      s.model.uncertain.push_back(
          parse_uncertain(j["uncertain"][k], path + ".uncertain[" + std::to_string(k) + "]"));
    }
  }
  try {
    s.model.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  if (j.contains("w")) {
    s.w = vector_from_json(j["w"], path + ".w");
    if (s.w.size() != s.model.ell()) fail(path + ".w", "needs one value per uncertain entry");
    if (!s.model.in_box(s.w)) fail(path + ".w", "outside the declared box");
  }
  return s;
}

ReferenceModel parse_reference(const json& j, const std::string& path) {
  reject_unknown(j, path, {"B_o", "A_zeta", "B_zeta", "C_zeta", "gamma_zeta"});
  for (const char* key : {"B_o", "A_zeta", "B_zeta", "C_zeta", "gamma_zeta"}) {
    if (!j.contains(key)) fail(path + "." + key, "required field is missing");
  }
  ReferenceModel r;
  r.B_o = matrix_from_json(j["B_o"], path + ".B_o");
  r.A_zeta = matrix_from_json(j["A_zeta"], path + ".A_zeta");
  r.B_zeta = matrix_from_json(j["B_zeta"], path + ".B_zeta");
  r.C_zeta = matrix_from_json(j["C_zeta"], path + ".C_zeta");
  r.gamma_zeta = number(j["gamma_zeta"], path + ".gamma_zeta");
  if (!(r.gamma_zeta > 0.0)) fail(path + ".gamma_zeta", "must be positive");
  return r;
}

}  // namespace

ProjectConfig parse_project(const json& doc, const Tolerance& base) {
  reject_unknown(doc, "$", {"systems", "graph", "pattern", "reference", "internal_model",
                            "gamma", "margin", "tolerances", "simulation"});
  ProjectConfig cfg;
  cfg.tolerance = base;
  if (!doc.contains("systems") || !doc["systems"].is_array() || doc["systems"].empty()) {
    fail("$.systems", "a non-empty array of systems is required");
  }
  for (size_t k = 0; k < doc["systems"].size(); ++k) {
    cfg.systems.push_back(parse_system(doc["systems"][k], "$.systems[" + std::to_string(k) + "]"));
  }
  if (doc.contains("graph")) {
    reject_unknown(doc["graph"], "$.graph", {"adjacency"});
    if (!doc["graph"].contains("adjacency")) fail("$.graph.adjacency", "required matrix is missing");
    cfg.adjacency = matrix_from_json(doc["graph"]["adjacency"], "$.graph.adjacency");
    const auto na = static_cast<Index>(cfg.systems.size());
    expect_shape(*cfg.adjacency, na, na, "$.graph.adjacency");
    for (Index i = 0; i < na; ++i) {
      for (Index j = 0; j < na; ++j) {
        const std::string p = "$.graph.adjacency[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        if ((*cfg.adjacency)(i, j) < 0.0) fail(p, "weights must be non-negative");
        if (i == j && (*cfg.adjacency)(i, j) != 0.0) fail(p, "diagonal must be zero");
      }
    }
  }
  if (doc.contains("pattern")) {
    reject_unknown(doc["pattern"], "$.pattern", {"A_o", "C_o"});
    for (const char* key : {"A_o", "C_o"}) {
      if (!doc["pattern"].contains(key)) fail(std::string("$.pattern.") + key, "required matrix is missing");
    }
    cfg.A_o = matrix_from_json(doc["pattern"]["A_o"], "$.pattern.A_o");
    const Index l = cfg.A_o->rows();
    expect_shape(*cfg.A_o, l, l, "$.pattern.A_o");
    cfg.C_o = matrix_from_json(doc["pattern"]["C_o"], "$.pattern.C_o");
    if (cfg.C_o->cols() != l) fail("$.pattern.C_o", "width must match A_o");
    for (size_t k = 0; k < cfg.systems.size(); ++k) {
      if (cfg.systems[k].model.nominal.C.rows() != cfg.C_o->rows()) {
        fail("$.systems[" + std::to_string(k) + "].C", "output dimension differs from pattern C_o");
      }
    }
  }
  if (doc.contains("reference")) {
    cfg.reference = parse_reference(doc["reference"], "$.reference");
    if (cfg.A_o) {
      try {
        cfg.reference->validate(cfg.A_o->rows(), cfg.C_o->rows());
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::kInvalidInput) fail("$.reference", e.what());
        throw;
      }
    }
  }
  if (doc.contains("internal_model")) {
    reject_unknown(doc["internal_model"], "$.internal_model", {"M", "N"});
    for (const char* key : {"M", "N"}) {
      if (!doc["internal_model"].contains(key)) {
        fail(std::string("$.internal_model.") + key, "M and N must be given together");
      }
    }
    cfg.M = matrix_from_json(doc["internal_model"]["M"], "$.internal_model.M");
    cfg.N = matrix_from_json(doc["internal_model"]["N"], "$.internal_model.N");
    expect_shape(*cfg.M, cfg.M->rows(), cfg.M->rows(), "$.internal_model.M");
    expect_shape(*cfg.N, cfg.M->rows(), cfg.systems.front().model.nominal.B.cols(),
                 "$.internal_model.N");
  }
  if (doc.contains("gamma")) {
    cfg.gamma = number(doc["gamma"], "$.gamma");
    if (!(*cfg.gamma > 0.0)) fail("$.gamma", "must be positive");
  }
  if (doc.contains("margin")) {
    cfg.margin = number(doc["margin"], "$.margin");
    if (!(cfg.margin > 0.0)) fail("$.margin", "must be positive");
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    reject_unknown(t, "$.tolerances", {"rank_tol", "eq_tol", "psd_tol"});
    if (t.contains("rank_tol")) cfg.tolerance.rank_tol = number(t["rank_tol"], "$.tolerances.rank_tol");
    if (t.contains("eq_tol")) cfg.tolerance.eq_tol = number(t["eq_tol"], "$.tolerances.eq_tol");
    if (t.contains("psd_tol")) cfg.tolerance.psd_tol = number(t["psd_tol"], "$.tolerances.psd_tol");
    try {
      cfg.tolerance.validate();
    } catch (const Error& e) {
      fail("$.tolerances", e.what());
    }
  }
  if (doc.contains("simulation")) {
    const json& s = doc["simulation"];
    reject_unknown(s, "$.simulation", {"dt", "horizon", "seed", "record_every", "initial", "v0"});
    SimConfig& sc = cfg.simulation.sim;
    if (s.contains("dt")) sc.dt = number(s["dt"], "$.simulation.dt");
    if (s.contains("horizon")) sc.horizon = number(s["horizon"], "$.simulation.horizon");
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !s["seed"].is_number_integer()) {
        fail("$.simulation.seed", "expected a non-negative integer");
      }
      sc.seed = static_cast<std::uint64_t>(count(s["seed"], "$.simulation.seed"));
    }
    if (s.contains("record_every")) {
      sc.record_every = count(s["record_every"], "$.simulation.record_every");
    }
    if (s.contains("initial")) {
      if (!s["initial"].is_string()) fail("$.simulation.initial", "expected a string");
      cfg.simulation.initial = s["initial"].get<std::string>();
      if (cfg.simulation.initial != "random" && cfg.simulation.initial != "manifold") {
        fail("$.simulation.initial", "must be \"random\" or \"manifold\"");
      }
    }
    if (s.contains("v0")) cfg.simulation.v0 = vector_from_json(s["v0"], "$.simulation.v0");
    try {
      sc.validate();
    } catch (const Error& e) {
      fail("$.simulation", e.what());
    }
  }
  return cfg;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kInvalidInput, path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" inside the message.
    throw Error(ErrorKind::kInvalidInput, path + ": " + e.what());
  }
}

ProjectConfig load_project(const std::string& path, const Tolerance& base) {
  return parse_project(load_json_file(path), base);
}

json project_to_json(const ProjectConfig& cfg) {
  json doc;
  doc["systems"] = json::array();
  for (const SystemConfig& s : cfg.systems) {
    json js;
    if (!s.name.empty()) js["name"] = s.name;
    js["A"] = matrix_to_json(s.model.nominal.A);
    js["B"] = matrix_to_json(s.model.nominal.B);
    js["C"] = matrix_to_json(s.model.nominal.C);
    if (s.R.size() > 0) js["R"] = matrix_to_json(s.R);
    if (s.M.rows() > 0) {
      js["M"] = matrix_to_json(s.M);
      js["N"] = matrix_to_json(s.N);
      js["Q"] = matrix_to_json(s.Q);
    }
    if (!s.model.uncertain.empty()) {
      js["uncertain"] = json::array();
      for (const UncertainEntry& e : s.model.uncertain) {
        js["uncertain"].push_back({{"matrix", std::string(1, e.matrix)},
                                   {"row", e.row},
                                   {"col", e.col},
                                   {"coefficient", e.coefficient},
                                   {"lower", e.lower},
                                   {"upper", e.upper}});
      }
    }
    if (s.w.size() > 0) js["w"] = vector_to_json(s.w);
    doc["systems"].push_back(js);
  }
  if (cfg.adjacency) doc["graph"]["adjacency"] = matrix_to_json(*cfg.adjacency);
  if (cfg.A_o) {
    doc["pattern"]["A_o"] = matrix_to_json(*cfg.A_o);
    doc["pattern"]["C_o"] = matrix_to_json(*cfg.C_o);
  }
  if (cfg.reference) {
    const ReferenceModel& r = *cfg.reference;
    doc["reference"] = {{"B_o", matrix_to_json(r.B_o)},
                        {"A_zeta", matrix_to_json(r.A_zeta)},
                        {"B_zeta", matrix_to_json(r.B_zeta)},
                        {"C_zeta", matrix_to_json(r.C_zeta)},
                        {"gamma_zeta", r.gamma_zeta}};
  }
  if (cfg.M) {
    doc["internal_model"]["M"] = matrix_to_json(*cfg.M);
    doc["internal_model"]["N"] = matrix_to_json(*cfg.N);
  }
  if (cfg.gamma) doc["gamma"] = *cfg.gamma;
  doc["margin"] = cfg.margin;
  doc["tolerances"] = {{"rank_tol", cfg.tolerance.rank_tol},
                       {"eq_tol", cfg.tolerance.eq_tol},
                       {"psd_tol", cfg.tolerance.psd_tol}};
  const SimConfig& sc = cfg.simulation.sim;
  doc["simulation"] = {{"dt", sc.dt},
                       {"horizon", sc.horizon},
                       {"seed", sc.seed},
                       {"record_every", sc.record_every},
                       {"initial", cfg.simulation.initial}};
  if (cfg.simulation.v0.size() > 0) doc["simulation"]["v0"] = vector_to_json(cfg.simulation.v0);
  return doc;
}

ProjectConfig bundled_project() {
  const BundledExample ex = bundled_example();
  ProjectConfig cfg;
  for (size_t i = 0; i < ex.agents.size(); ++i) {
    SystemConfig s;
    s.name = "agent" + std::to_string(i + 1);
    s.model = ex.agents[i];
    cfg.systems.push_back(s);
  }
  cfg.adjacency = ex.adjacency;
  cfg.A_o = ex.A_o;
  cfg.C_o = ex.C_o;
  cfg.reference = ex.reference;
  cfg.M = ex.M;
  cfg.N = ex.N;
  cfg.gamma = ex.gamma;
  cfg.simulation.sim.dt = 1e-3;
  cfg.simulation.sim.horizon = 120.0;
  cfg.simulation.sim.seed = 1;
  cfg.simulation.sim.record_every = 10;
  return cfg;
}

}  // namespace gammastab::cli
