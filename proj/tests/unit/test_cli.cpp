#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "ovf/serialization.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace ovf;
using ovf::io::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("ovf_cli_" + std::to_string(Catch::rngSeed()) + "_" +
                                       std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator()(const std::string& name) const { return (dir / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST_CASE("gen is byte deterministic") {
  Scratch s;
  const std::vector<std::string> base = {"gen", "--atoms", "1", "--case", "rank1",
                                         "--split", "0.3", "--seed", "7", "-o"};
  auto a = base, b = base;
  a.push_back(s("a.json"));
  b.push_back(s("b.json"));
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(s("a.json")) == slurp(s("b.json")));
  CHECK(!slurp(s("a.json")).empty());

  REQUIRE(run({"gen", "--atoms", "4", "--case", "mixed", "--twist", "--seed", "8", "-o",
               s("c.json")})
              .code == 0);
  CHECK(slurp(s("c.json")) != slurp(s("a.json")));
}

TEST_CASE("gen rejects bad configurations") {
  Scratch s;
  CHECK(run({"gen", "--atoms", "0", "-o", s("x.json")}).code == 2);
  CHECK(run({"gen", "--atoms", "2", "--case", "rank3", "-o", s("x.json")}).code == 2);
  CHECK(run({"gen", "--atoms", "2", "--split", "1.5", "-o", s("x.json")}).code == 2);
  CHECK(run({"gen", "--bogus"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK_FALSE(fs::exists(s("x.json")));
}

TEST_CASE("verify exit codes") {
  Scratch s;
  REQUIRE(run({"gen", "--atoms", "4", "--case", "mixed", "--twist", "-o", s("f.json")}).code == 0);
  const Run ok = run({"verify", s("f.json"), "--samples", "200", "-o", s("r.json")});
  CHECK(ok.code == 0);
  const json report = io::parse(slurp(s("r.json")));
  CHECK(report["pass"].get<bool>());
  CHECK(report.contains("tolerance"));

  VectorFieldTable F = io::field_from_json(io::parse(slurp(s("f.json"))));
  Matrix v = F.values();
  v.col(VectorFieldTable::column(2, Unit::e12)) += 0.1 * v.col(VectorFieldTable::column(2, Unit::e11));
  spit(s("bad.json"), io::dump(io::to_json(VectorFieldTable(F.space(), v))));
  const Run bad = run({"verify", s("bad.json"), "--samples", "200", "-o", s("r2.json")});
  CHECK(bad.code == 1);
  const std::string text = slurp(s("r2.json"));
  CHECK(text.find("\"pass\": false") != std::string::npos);
  CHECK(text.find("witness") != std::string::npos);

  const std::string full = slurp(s("f.json"));
  spit(s("trunc.json"), full.substr(0, full.size() / 2));
  CHECK(run({"verify", s("trunc.json")}).code == 2);
  CHECK(run({"verify", s("missing.json")}).code == 2);
  CHECK(run({"verify", s("f.json"), "-o", s("f.json")}).code == 2);
}

TEST_CASE("stationarize a case one atom") {
  Scratch s;
  REQUIRE(run({"gen", "--atoms", "1", "--case", "rank1", "--split", "0.3", "-o", s("f.json")})
              .code == 0);
  const Run r = run({"stationarize", s("f.json"), "-o", s("p.json"), "--report", s("r.json")});
  CHECK(r.code == 0);
  const StationaryPair p = io::pair_from_json(io::parse(slurp(s("p.json"))));
  CHECK(std::abs(p.phi[0](0, 0) - 0.7) < 1e-14);
  CHECK(std::abs(p.psi[0](0, 0) - 0.3) < 1e-14);
  CHECK(std::abs(p.phi[0](1, 1)) < 1e-14);
  CHECK(run({"check-pair", s("f.json"), s("p.json")}).code == 0);
  CHECK(r.out.find("rank1") != std::string::npos);
}

TEST_CASE("stationarize refuses broken input before solving") {
  Scratch s;
  REQUIRE(run({"gen", "--atoms", "3", "--case", "rank2", "-o", s("f.json")}).code == 0);
  VectorFieldTable F = io::field_from_json(io::parse(slurp(s("f.json"))));
  Matrix v = F.values();
  v.col(1) *= 1.5;
  spit(s("bad.json"), io::dump(io::to_json(VectorFieldTable(F.space(), v))));
  const Run r = run({"stationarize", s("bad.json"), "-o", s("p.json")});
  CHECK(r.code == 1);
  CHECK_FALSE(fs::exists(s("p.json")));
  CHECK(run({"roundtrip", s("f.json")}).code == 0);
}

TEST_CASE("projection tools") {
  Scratch s;
  REQUIRE(run({"proj", "build", "--a", "0.5", "--v", "1,0", "-o", s("p.json")}).code == 0);
  const BlockElement x = io::block_element_from_json(io::parse(slurp(s("p.json"))));
  CHECK((x[0] - Block::Constant(0.5)).norm() < 1e-16);

  REQUIRE(run({"proj", "build", "--a", "0.5", "--v", "-1,0", "-o", s("q.json")}).code == 0);
  const Run orth = run({"proj", "orth", s("p.json"), s("q.json")});
  CHECK(orth.code == 0);
  CHECK(orth.out.find("\"orthogonal\": true") != std::string::npos);

  REQUIRE(run({"proj", "build", "--kind", "e22", "-o", s("e.json")}).code == 0);
  CHECK(run({"proj", "orth", s("p.json"), s("e.json")}).code == 1);

  spit(s("np.json"), R"({"blocks": [[[[1, 0], [0.2, 0]], [[0.2, 0], [0, 0]]]]})");
  const Run np = run({"proj", "parse", s("np.json")});
  CHECK(np.code == 2);
  CHECK(np.err.find("residual") != std::string::npos);
  CHECK(run({"proj", "parse", s("p.json")}).code == 0);
  CHECK(run({"proj", "build", "--a", "1.5", "--v", "1,0"}).code == 2);
  CHECK(run({"proj", "build", "--a", "0.5", "--v", "2,0"}).code == 2);
}

TEST_CASE("refine reports and validates profiles") {
  Scratch s;
  const Run ok = run({"refine", test::data_path("profile_constant.json"), "--levels", "1,2,4",
                      "--csv", s("t.csv"), "-o", s("r.json")});
  CHECK(ok.code == 0);
  CHECK(slurp(s("t.csv")).rfind("level,", 0) == 0);
  CHECK(run({"refine", test::data_path("profile_linear.json")}).code == 0);

  json prof = io::parse(slurp(test::data_path("profile_linear.json")));
  prof.erase("r21");
  spit(s("bad.json"), io::dump(prof));
  CHECK(run({"refine", s("bad.json")}).code == 2);
  CHECK(run({"refine", test::data_path("profile_linear.json"), "--levels", "4,2"}).code == 2);
}

TEST_CASE("the installed binary honours the exit-code contract") {
  Scratch s;
  const std::string bin = OVF_BINARY;
  const auto sh = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(sh(bin + " gen --atoms 2 -o " + s("f.json")) == 0);
  CHECK(sh(bin + " verify " + s("f.json")) == 0);
  CHECK(sh(bin + " gen --atoms 0") == 2);
}
