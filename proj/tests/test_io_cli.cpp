#include <doctest.h>

#include "oracles.hpp"
#include "rstab/io.hpp"
#include "rstab/noise.hpp"
#include "rstab/variation.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>

using namespace rstab;

TEST_SUITE_BEGIN("io_cli");

namespace {

rough::RoughPathGrid sample_lift(std::uint64_t seed) {
  noise::NoiseSpec spec;
  spec.hurst = 0.45;
  spec.dim = 2;
  spec.fine_steps = 64;
  spec.seed = seed;
  return noise::sample_lift(spec);
}

#ifdef RSTAB_CLI_PATH
int run_cli(const std::string& args, std::string* out = nullptr) {
  std::string cmd = std::string(RSTAB_CLI_PATH) + " " + args + " >/tmp/rstab_cli_out.txt 2>&1";
  int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream is("/tmp/rstab_cli_out.txt");
    out->assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  }
  return WEXITSTATUS(status);
}
#endif

}  // namespace

TEST_CASE("CSV round trip: path and lift") {
  auto rp = sample_lift(42);
  io::write_csv("/tmp/rstab_lift.csv", rp);
  auto back = io::read_lift_csv("/tmp/rstab_lift.csv");
  CHECK((back.base.values - rp.base.values).norm() == 0.0);
  for (int k = 0; k < rp.size(); ++k)
    CHECK((back.area0[static_cast<std::size_t>(k)] - rp.area0[static_cast<std::size_t>(k)]).norm() ==
          0.0);

  io::write_csv("/tmp/rstab_path.csv", rp.base);
  auto path = io::read_path_csv("/tmp/rstab_path.csv");
  CHECK((path.values - rp.base.values).norm() == 0.0);
}

TEST_CASE("binary container: bit-exact round trip") {
  auto rp = sample_lift(43);
  io::write_binary("/tmp/rstab_lift.bin", rp);
  auto back = io::read_binary("/tmp/rstab_lift.bin");
  REQUIRE(back.size() == rp.size());
  for (int k = 0; k < rp.size(); ++k) {
    for (int i = 0; i < rp.dim(); ++i)
      CHECK(std::memcmp(&back.base.values(i, k), &rp.base.values(i, k), sizeof(double)) == 0);
    CHECK((back.area0[static_cast<std::size_t>(k)] - rp.area0[static_cast<std::size_t>(k)]).norm() ==
          0.0);
  }
  CHECK(back.base.times == rp.base.times);
}

TEST_CASE("malformed CSV reports the offending line") {
  {
    std::ofstream os("/tmp/rstab_bad.csv");
    os << "t,x_1\n0.0,1.0\n0.5,oops\n";
  }
  try {
    io::read_path_csv("/tmp/rstab_bad.csv");
    FAIL("expected ParseError");
  } catch (const io::ParseError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("fnv1a is stable") {
  CHECK(io::fnv1a("") == 14695981039346656037ULL);
  CHECK(io::fnv1a("a") != io::fnv1a("b"));
}

#ifdef RSTAB_CLI_PATH

TEST_CASE("cli: unknown flag is a usage error (64)") {
  CHECK(run_cli("pvar --no-such-flag") == 64);
}

TEST_CASE("cli: malformed CSV input exits 65 with the line number") {
  {
    std::ofstream os("/tmp/rstab_bad2.csv");
    os << "t,x_1\n0.0,1.0\nnope,2.0\n";
  }
  std::string out;
  CHECK(run_cli("pvar --input /tmp/rstab_bad2.csv --p 2.5 --norm path", &out) == 65);
  CHECK(out.find("line 3") != std::string::npos);
}

TEST_CASE("cli: sample-noise is idempotent under a fixed seed") {
  REQUIRE(run_cli("sample-noise --hurst 0.45 --steps 32 --seed 11 --lift --out /tmp/rstab_a.csv") ==
          0);
  REQUIRE(run_cli("sample-noise --hurst 0.45 --steps 32 --seed 11 --lift --out /tmp/rstab_b.csv") ==
          0);
  std::ifstream fa("/tmp/rstab_a.csv"), fb("/tmp/rstab_b.csv");
  std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}

TEST_CASE("cli: pvar value matches the library") {
  auto rp = sample_lift(44);
  io::write_csv("/tmp/rstab_cli_lift.csv", rp);
  std::string out;
  REQUIRE(run_cli("pvar --input /tmp/rstab_cli_lift.csv --p 2.5 --format csv", &out) == 0);
  double got = std::stod(out);
  CHECK(got == doctest::Approx(rough::rough_norm(rp, 2.5, 0, rp.size() - 1)).epsilon(1e-12));
}

TEST_CASE("cli: RSTAB_SEED environment fallback") {
  REQUIRE(run_cli("sample-noise --steps 32 --seed 17 --out /tmp/rstab_env_a.csv") == 0);
  std::string cmd = std::string("RSTAB_SEED=17 ") + RSTAB_CLI_PATH +
                    " sample-noise --steps 32 --out /tmp/rstab_env_b.csv >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  std::ifstream fa("/tmp/rstab_env_a.csv"), fb("/tmp/rstab_env_b.csv");
  std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(a == b);
}

TEST_CASE("cli: experiment presets are bit-reproducible from (config, seed)") {
  REQUIRE(run_cli("experiment --preset counterexample --out /tmp/rstab_rep1 --paths 2 --delta "
                  "0.0009765625 --seed 9") == 0);
  REQUIRE(run_cli("experiment --preset counterexample --out /tmp/rstab_rep2 --paths 2 --delta "
                  "0.0009765625 --seed 9") == 0);
  std::ifstream fa("/tmp/rstab_rep1/summary.json"), fb("/tmp/rstab_rep2/summary.json");
  std::string a((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  std::string b((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  CHECK(a == b);
  CHECK_FALSE(a.empty());
}

TEST_CASE("cli: experiment writes exactly one manifest") {
  REQUIRE(run_cli("experiment --preset counterexample --out /tmp/rstab_exp --paths 2 --delta "
                  "0.0009765625 --seed 3") == 0);
  std::ifstream m("/tmp/rstab_exp/manifest.json");
  CHECK(m.good());
  std::string s((std::istreambuf_iterator<char>(m)), std::istreambuf_iterator<char>());
  CHECK(s.find("config_hash") != std::string::npos);
  std::ifstream sj("/tmp/rstab_exp/summary.json");
  CHECK(sj.good());
}

#endif  // RSTAB_CLI_PATH

TEST_SUITE_END();
