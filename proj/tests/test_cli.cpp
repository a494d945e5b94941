#include "doctest.h"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "periodbounds/cli.hpp"

using periodbounds::cli::run;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result invoke(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string &name) { return std::string(PERIODBOUNDS_TEST_TMP) + "/cli_" + name; }

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

TEST_CASE("cli constants") {
  const auto r = invoke({"constants", "--p", "2"});
  CHECK(r.code == 0);
  CHECK(r.out.find("c_p_inverse = 6.28318530718") != std::string::npos);
  const auto j = invoke({"constants", "--p", "3", "--out", tmp("c3.json")});
  CHECK(j.code == 0);
  const auto doc = json::parse(slurp(tmp("c3.json")));
  CHECK(doc["c_p_inverse"].get<double>() == doctest::Approx(6.093983998092345).epsilon(1e-14));
  CHECK(doc["meta"]["tool"] == "periodbounds");
  CHECK(doc["meta"]["config"]["p"].get<double>() == 3.0);
}

TEST_CASE("cli range and remark2") {
  const auto r = invoke({"range", "--threshold", "6"});
  CHECK(r.code == 0);
  CHECK(r.out.find("p_low = 1.42249535266") != std::string::npos);
  CHECK(r.out.find("contains [1.43, 3.35] = true") != std::string::npos);
  const auto e = invoke({"remark2", "--eps", "0"});
  CHECK(e.out.find("bound = 6.28318530718") != std::string::npos);
}

TEST_CASE("cli figure") {
  const auto r = invoke({"figure", "--pmin", "1.05", "--pmax", "4.0", "--step", "0.01"});
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  int comments = 0, rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) ++comments;
    else if (line == "p,c_p_inverse") header = true;
    else ++rows;
  }
  CHECK(comments >= 1);
  CHECK(header);
  CHECK(rows == 296);
  CHECK(r.out.find("2.00000000000,6.28318530718") != std::string::npos);
}

TEST_CASE("cli certify") {
  const auto r = invoke({"certify", "--field", "rotation", "--params", "L=1", "--p", "2"});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(std::abs(doc["TL"].get<double>() - 2 * 3.141592653589793) < 1e-4);
  for (const auto &b : doc["bounds"]) CHECK(b["satisfied"].get<bool>());
  CHECK(doc["tolerances"]["tol_cert"].get<double>() == 1e-3);

  const auto atoms = invoke({"certify", "--field", "remark1", "--params", "weights=1,1", "--params", "A=0",
                             "--params", "B=1", "--p", "3"});
  REQUIRE(atoms.code == 0);
  CHECK(std::abs(json::parse(atoms.out)["TL"].get<double>() - 2 * 3.141592653589793) < 1e-4);
}

TEST_CASE("cli simulate feeds lemma2") {
  const auto s = invoke({"simulate", "--field", "rotation", "--params", "L=1", "--dt", "0.01227184630308513",
                         "--steps", "512", "--out", tmp("orbit.csv")});
  REQUIRE(s.code == 0);
  const auto r = invoke({"lemma2", "--curve-file", tmp("orbit.csv"), "--p", "2"});
  REQUIRE(r.code == 0);
  const auto doc = json::parse(r.out);
  CHECK(std::abs(doc["Q"].get<double>() - 1) < 1e-3);
  CHECK(doc["holds"].get<bool>());
}

TEST_CASE("cli wirtinger and optimize artifacts are deterministic") {
  const std::vector<std::string> w = {"wirtinger", "--p", "2", "--N", "128", "--budget", "50", "--seed", "3"};
  auto w1 = w, w2 = w;
  w1.insert(w1.end(), {"--out", tmp("w1.json"), "--curve-out", tmp("w1.csv")});
  w2.insert(w2.end(), {"--out", tmp("w2.json"), "--curve-out", tmp("w2.csv")});
  REQUIRE(invoke(w1).code == 0);
  REQUIRE(invoke(w2).code == 0);
  CHECK(slurp(tmp("w1.json")) == slurp(tmp("w2.json")));
  CHECK(slurp(tmp("w1.csv")) == slurp(tmp("w2.csv")));
  CHECK(json::parse(slurp(tmp("w1.json")))["wirtinger"]["holds"].get<bool>());
  CHECK(invoke({"lemma2", "--curve-file", tmp("w1.csv"), "--p", "2"}).code == 0);

  const std::vector<std::string> o = {"optimize", "--p", "2", "--n", "2", "--K", "1", "--budget", "1000", "--seed", "1"};
  auto o1 = o, o2 = o;
  o1.insert(o1.end(), {"--out", tmp("o1.json"), "--trace-out", tmp("t1.csv")});
  o2.insert(o2.end(), {"--out", tmp("o2.json"), "--trace-out", tmp("t2.csv")});
  REQUIRE(invoke(o1).code == 0);
  REQUIRE(invoke(o2).code == 0);
  CHECK(slurp(tmp("o1.json")) == slurp(tmp("o2.json")));
  CHECK(slurp(tmp("t1.csv")) == slurp(tmp("t2.csv")));
  const auto doc = json::parse(slurp(tmp("o1.json")));
  for (const char *key : {"p", "n", "K", "budget", "seed", "best_TL", "lower_bound", "certificate_gap", "coeffs"}) {
    CHECK(doc.contains(key));
  }
  CHECK(slurp(tmp("t1.csv")).rfind("iteration,best_so_far\n", 0) == 0);
}

TEST_CASE("cli config file, flags win") {
  {
    std::ofstream cfg(tmp("run.ini"));
    cfg << "[constants]\np=3\n";
  }
  const auto from_file = invoke({"--config", tmp("run.ini"), "constants"});
  CHECK(from_file.code == 0);
  CHECK(from_file.out.find("c_p_inverse = 6.09398399809") != std::string::npos);
  const auto flag = invoke({"--config", tmp("run.ini"), "constants", "--p", "2"});
  CHECK(flag.out.find("c_p_inverse = 6.28318530718") != std::string::npos);
}

TEST_CASE("cli exit codes and single-line diagnostics") {
  auto single_line = [](const Result &r) {
    return !r.err.empty() && r.err.find('\n') == r.err.size() - 1;
  };
  const auto bad_p = invoke({"constants", "--p", "0.5"});
  CHECK(bad_p.code == 2);
  CHECK(single_line(bad_p));
  const auto unknown = invoke({"constants", "--p", "2", "--bogus"});
  CHECK(unknown.code == 2);
  CHECK(single_line(unknown));
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"range", "--threshold", "7"}).code == 2);
  CHECK(invoke({"remark2", "--eps", "1"}).code == 2);
  CHECK(invoke({"certify", "--field", "rotation", "--params", "L", "--p", "2"}).code == 2);

  const auto missing = invoke({"lemma2", "--curve-file", tmp("does_not_exist.csv"), "--p", "2"});
  CHECK(missing.code == 4);
  CHECK(single_line(missing));
  CHECK(invoke({"constants", "--p", "2", "--out", "/nonexistent-dir/x.json"}).code == 4);

  const auto spiral = invoke({"certify", "--field", "linear", "--params", "matrix=-1,1;-1,-1", "--p", "2"});
  CHECK(spiral.code == 3);
  CHECK(spiral.err.find("no_period_found") != std::string::npos);

  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"--version"}).code == 0);
}
