#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "priorinfo/cli.hpp"
#include "priorinfo/config.hpp"

using namespace priorinfo;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "priorinfo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("priorinfo_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_json(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::string error_of(const nlohmann::json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config errors name the offending key") {
  using nlohmann::json;
  const json beta = {{"family", "beta"}, {"alpha", 1}, {"beta", 1}};
  CHECK(error_of({{"model", {{"type", "binomial"}, {"n", -3}}}, {"base", beta}}).find("'model.n'") != std::string::npos);
  CHECK(error_of({{"model", {{"type", "poisson"}, {"n", 3}}}}).find("'model.type'") != std::string::npos);
  CHECK(error_of({{"model", {{"type", "binomial"}}}}).find("'model.n'") != std::string::npos);
  CHECK(error_of({{"base", {{"family", "cauchy"}}}}).find("'base.family'") != std::string::npos);
  CHECK(error_of({{"base", {{"family", "beta"}, {"alpha", -1}, {"beta", 1}}}}).find("'base'") != std::string::npos);
  CHECK(error_of({{"gamma", 1.5}}).find("'gamma'") != std::string::npos);
  CHECK(error_of({{"method", "magic"}}).find("'method'") != std::string::npos);
  CHECK(error_of({{"model", {{"type", "binomial"}, {"n", 5}}}, {"base", beta}, {"observed", 9}}).find("'observed'") !=
        std::string::npos);
  CHECK(error_of({{"scan", {{"kind", "betabinom"}, {"x", {{"name", "a"}, {"lo", 1}, {"hi", 2}, {"steps", 0}}}}}})
            .find("'scan.x") != std::string::npos);
  // Scale-normal with a beta prior is an unsupported pair
  CHECK(error_of({{"model", {{"type", "scale-normal"}, {"n", 5}}}, {"base", beta}}).find("'base'") != std::string::npos);
}

TEST_CASE("presets parse") {
  for (const char* name : {"bioassay_normal", "bioassay_cauchy", "bioassay_scan", "bioassay_reduction", "betabinom",
                           "jeffreys", "normal_vs_t3", "location_normal", "multinomial", "calibrate_t", "regress"})
    CHECK_NOTHROW(parse_config(load_config(name)));
  CHECK(resolve_config_path("normal_vs_t3.json") == resolve_config_path("normal_vs_t3"));
}

TEST_CASE("config hash is stable and ignores key order") {
  const nlohmann::json a = nlohmann::json::parse(R"({"gamma": 0.05, "seed": 7})");
  const nlohmann::json b = nlohmann::json::parse(R"({"seed": 7, "gamma": 0.05})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(nlohmann::json::parse(R"({"gamma": 0.05, "seed": 8})")));
  // FNV-1a of the empty object "{}"
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : std::string("{}")) h = (h ^ std::uint8_t(ch)) * 0x100000001b3ULL;
  CHECK(config_hash(nlohmann::json::object()) == h);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("kappa command") {
  const Run r = run({"kappa", "--lambda", "1"});
  CHECK(r.code == 0);
  CHECK(r.out.find("kappa(1) = 0.63662") != std::string::npos);
  const Run f = run({"kappa", "--lambda", "3", "--n", "20"});
  CHECK(f.out.find("0.848826") != std::string::npos);
  CHECK(f.out.find("(n=20") != std::string::npos);

  const std::string out = (scratch() / "kappa.csv").string();
  CHECK(run({"kappa", "--lambda-grid", "1:5:5", "--out", out}).code == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("lambda,kappa,quantile_ratio_sup\n") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 5);
}

TEST_CASE("pvalue command on the bioassay") {
  const Run r = run({"pvalue", "--config", "bioassay_normal"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("p-value 0.107308", 0) == 0);
  const Run c = run({"pvalue", "--config", "bioassay_cauchy"});
  CHECK(c.out.rfind("p-value 0.112983", 0) == 0);
}

TEST_CASE("check command with the base as its own alternative") {
  const std::string cfg = write_json("same.json", R"({"model": {"type": "location-normal", "n": 20},
      "base": {"family": "normal", "variance": 1}, "alt": {"family": "normal", "variance": 1}})");
  const Run r = run({"check", "--config", cfg});
  CHECK(r.code == 0);
  CHECK(r.out.find("level weakly-informative-at-level") != std::string::npos);
  CHECK(r.out.find("reduction=0 ") != std::string::npos);
  CHECK(r.out.find("uniform uniformly-wi") != std::string::npos);
  CHECK(run({"reduce", "--config", cfg}).out == "reduction 0  gamma=0.05\n");
}

TEST_CASE("exit codes") {
  CHECK(run({"kappa", "--lambda", "2"}).code == 0);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"pvalue", "--config", "no_such_preset"}).code == 1);
  CHECK(run({"pvalue", "--config", "bioassay_normal", "--gamma", "1.5"}).code == 1);
  CHECK(run({"scan", "--config", "betabinom", "--grid", "3y4"}).code == 1);
  const Run missing = run({"check", "--config", "bioassay_normal"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("'alt'") != std::string::npos);
  // a finite-n calibration at a tiny dof exhausts the integrator
  const std::string hard = write_json("hard.json", R"({"calibrate": {"family": "t", "lambda": 0.001, "p": 0.999999, "n": 5}})");
  const Run fail = run({"calibrate", "--config", hard});
  CHECK(fail.code == 2);
  CHECK(fail.err.rfind("numerical failure:", 0) == 0);
}

TEST_CASE("scan output is byte-identical across runs and records its provenance") {
  const std::string a = (scratch() / "a.csv").string(), b = (scratch() / "b.csv").string();
  const Run ra = run({"scan", "--config", "betabinom", "--grid", "20x20", "--seed", "99", "--out", a});
  const Run rb = run({"scan", "--config", "betabinom", "--grid", "20x20", "--seed", "99", "--out", b});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  const std::string csv = slurp(a);
  CHECK(csv == slurp(b));
  CHECK(csv.rfind("# priorinfo scan kind=betabinom", 0) == 0);
  CHECK(csv.find("seed=99") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 400);

  REQUIRE(fs::exists(a + ".config.json"));
  const auto doc = nlohmann::json::parse(slurp(a + ".config.json"));
  CHECK(doc["seed"] == 99);
  CHECK(doc["scan"]["x"]["steps"] == 20);
  CHECK(csv.find("config_hash=" + hex64(config_hash(doc))) != std::string::npos);

  // the same run from the recorded document reproduces the file
  const std::string c = (scratch() / "c.csv").string();
  CHECK(run({"scan", "--config", a + ".config.json", "--out", c}).code == 0);
  CHECK(slurp(c) == csv);
}

TEST_CASE("calibrate and regress commands") {
  const Run c = run({"calibrate", "--config", "calibrate_t"});
  CHECK(c.code == 0);
  CHECK(c.out.find("ratio=0.496041") != std::string::npos);
  const Run r = run({"regress", "--config", "regress"});
  CHECK(r.code == 0);
  CHECK(r.out.find("variance prior: ") != std::string::npos);
  CHECK(r.out.find("joint prior: ") != std::string::npos);
}
