#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gammastab_cli/commands.hpp"
#include "gammastab_cli/config.hpp"
#include "gammastab_cli/exit_codes.hpp"

using namespace gammastab;
using namespace gammastab::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "gammastab");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path tmp_dir() {
  const char* env = std::getenv("GAMMASTAB_TEST_TMP");
  const fs::path dir = env != nullptr ? fs::path(env) : fs::temp_directory_path() / "gammastab_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = tmp_dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string write_json(const std::string& name, const json& doc) {
  return write_file(name, doc.dump(2));
}

json scalar_project() {
  return json::parse(R"({
    "systems": [{"name": "integrator", "A": [[0]], "B": [[1]], "C": [[1]], "R": [[1]],
                 "M": [[-1]], "N": [[1]], "Q": [[0.5]]}],
    "gamma": 0.5
  })");
}

}  // namespace

TEST_CASE("normal form of the bundled agent") {
  const Run r = run({"normal-form", "bundled"});
  REQUIRE(r.code == kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["l"] == 1);
  CHECK(j["ranks"] == json::array({2, 2}));
  CHECK(j["assumptions"]["controllable"] == true);
  CHECK(j["assumptions"]["level_condition"] == true);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorKind::kInvalidInput) == 1);
  CHECK(exit_code_for(ErrorKind::kAssumptionViolation) == 2);
  CHECK(exit_code_for(ErrorKind::kTransmissionZero) == 2);
  CHECK(exit_code_for(ErrorKind::kSynthesisFailure) == 3);
  CHECK(exit_code_for(ErrorKind::kDesignRejection) == 4);

  const std::string file = write_json("scalar.json", scalar_project());
  CHECK(run({"synthesize", file}).code == kExitOk);
  CHECK(run({"synthesize", file, "--gamma", "0"}).code == kExitInput);
  CHECK(run({"synthesize", file, "--system", "3"}).code == kExitInput);
  CHECK(run({"no-such-command"}).code == kExitInput);
  CHECK(run({"synthesize", (tmp_dir() / "missing.json").string()}).code == kExitInput);

  json unc = scalar_project();
  unc["systems"][0] = json::parse(R"({"A": [[1, 0], [0, 2]], "B": [[1], [0]], "C": [[1, 1]],
                                      "R": [[1], [1]]})");
  const Run u = run({"synthesize", write_json("uncontrollable.json", unc)});
  CHECK(u.code == kExitAssumption);
  CHECK(u.err.find("controllab") != std::string::npos);

  json hot = scalar_project();
  hot["systems"][0]["M"] = json::array({json::array({1.0})});
  CHECK(run({"synthesize", write_json("hot_m.json", hot), "--output-feedback"}).code ==
        kExitAssumption);

  const Run g = run({"sync", "bundled", "--gamma", "2.0"});
  CHECK(g.code == kExitSmallGain);
  CHECK(g.err.find("small-gain") != std::string::npos);
}

TEST_CASE("schema errors name the offending field") {
  json doc = scalar_project();
  doc["systems"][0]["Z"] = 1;
  const Run r = run({"synthesize", write_json("unknown.json", doc)});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("$.systems[0].Z") != std::string::npos);

  json bad_shape = scalar_project();
  bad_shape["systems"][0]["B"] = json::array({json::array({1.0}), json::array({2.0})});
  const Run s = run({"synthesize", write_json("shape.json", bad_shape)});
  CHECK(s.code == kExitInput);
  CHECK(s.err.find("$.systems[0].B") != std::string::npos);

  json ragged = scalar_project();
  ragged["systems"][0]["A"] = json::array({json::array({1.0, 2.0}), json::array({3.0})});
  CHECK(run({"synthesize", write_json("ragged.json", ragged)}).code == kExitInput);

  CHECK_THROWS_AS(parse_project(json::parse(R"({"systems": []})")), Error);
  CHECK_THROWS_AS(parse_project(json::parse(R"({"systems": [{"A": [[0]], "B": [[1]], "C": [[1]]}],
                                                "tolerances": {"psd_tol": -1}})")),
                  Error);
}

TEST_CASE("parse errors report line and column") {
  const std::string file = write_file("broken.json", "{\n  \"systems\": [\n    {\"A\": [[0]],,}\n  ]\n}\n");
  const Run r = run({"normal-form", file});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.err.find("column") != std::string::npos);
}

TEST_CASE("project round trip") {
  const ProjectConfig cfg = bundled_project();
  const json doc = project_to_json(cfg);
  const ProjectConfig back = parse_project(json::parse(doc.dump()));
  CHECK(project_to_json(back) == doc);
  CHECK(back.systems.size() == 4);
  CHECK(back.has_network());
  CHECK(*back.gamma == 1.5);
  CHECK(back.systems[0].model.uncertain.size() == 4);
}

TEST_CASE("certificate files round trip bit for bit") {
  const std::string file = write_json("scalar_rt.json", scalar_project());
  const std::string out = (tmp_dir() / "controller.json").string();
  for (const char* mode : {"", "--output-feedback"}) {
    std::vector<std::string> args{"synthesize", file, "--out", out};
    if (*mode != '\0') args.emplace_back(mode);
    REQUIRE(run(args).code == kExitOk);
    const json saved = load_json_file(out);
    const IosCertificate cert = certificate_from_json(saved["certificate"], "$.certificate");
    const ClosedLoop loop = closed_loop_from_json(saved["closed_loop"], "$.closed_loop");
    CHECK(certificate_to_json(cert) == saved["certificate"]);
    CHECK(closed_loop_to_json(loop) == saved["closed_loop"]);
    CHECK(cert.gain() == doctest::Approx(0.5));

    const Run v = run({"verify", out});
    CHECK(v.code == kExitOk);
    CHECK(json::parse(v.out)["ok"] == true);
  }

  // A tampered certificate no longer verifies.
  json saved = load_json_file(out);
  saved["certificate"]["beta"] = 1e-6;
  const std::string tampered = write_json("tampered.json", saved);
  const Run v = run({"verify", tampered});
  CHECK(v.code == kExitSynthesis);
  CHECK(json::parse(v.out)["ok"] == false);
}

TEST_CASE("single-system simulation writes its outputs") {
  const std::string file = write_json("scalar_sim.json", scalar_project());
  const fs::path dir = tmp_dir() / "sim_out";
  fs::remove_all(dir);
  const Run r = run({"simulate", file, "--horizon", "5", "--dt", "0.01", "--seed", "3",
                     "--out-dir", dir.string()});
  REQUIRE(r.code == kExitOk);
  const json m = json::parse(r.out);
  CHECK(m["seed"] == 3);
  CHECK(m["final_output_norm"].get<double>() < m["initial_output_norm"].get<double>());
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(fs::exists(dir / "metrics.json"));
  std::ifstream csv(dir / "trace.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,y1");
}

TEST_CASE("help exits cleanly") {
  const Run r = run({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("normal-form") != std::string::npos);
}
