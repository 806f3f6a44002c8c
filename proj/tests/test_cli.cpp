#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "wbary/mnist_ingest.hpp"
#include "wbary/trace.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "wbary_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& log = "log.txt") {
  const std::string cmd = std::string("\"") + WBARY_CLI + "\" " + args + " > \"" + (workdir() / log).string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("run a minimal quadratic config") {
  const auto cfg = workdir() / "quad.json";
  REQUIRE(run("preset quadratic --m 4 --out " + q(cfg)) == 0);
  REQUIRE(run("run --config " + q(cfg) + " --out " + q(workdir() / "a.csv"), "run.txt") == 0);
  const std::string out = slurp(workdir() / "run.txt");
  CHECK(out.find("final dual objective") != std::string::npos);
  CHECK(out.find("final consensus distance") != std::string::npos);
  REQUIRE(run("run --config " + q(cfg) + " --out " + q(workdir() / "b.csv")) == 0);
  CHECK(slurp(workdir() / "a.csv") == slurp(workdir() / "b.csv"));
  CHECK(wbary::read_csv(workdir() / "a.csv").rows.size() >= 2);

  REQUIRE(run("run --config " + q(cfg) + " --seed 9 --variant a2dwbn --horizon 4 --out " + q(workdir() / "c.csv")) == 0);
  const auto c = wbary::read_csv(workdir() / "c.csv");
  REQUIRE(c.rows.size() == 3);
  CHECK(c.rows.back().algorithm == "a2dwbn");
  CHECK(c.rows.back().seed == 9);
}

TEST_CASE("invalid configs exit nonzero with a field message") {
  const auto cfg = workdir() / "bad.json";
  REQUIRE(run("preset quadratic --m 4 --out " + q(cfg)) == 0);
  std::string text = slurp(cfg);
  const auto pos = text.find("\"tau_assumed\": 0");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 16, "\"tau_assumed\": 9");
  {
    std::ofstream(cfg) << text;
  }
  CHECK(run("run --config " + q(cfg) + " --out " + q(workdir() / "x.csv"), "err.txt") != 0);
  CHECK(slurp(workdir() / "err.txt").find("tau_assumed") != std::string::npos);
  CHECK(run("run --config " + q(workdir() / "nope.json")) != 0);
  CHECK(run("frobnicate") != 0);
}

TEST_CASE("diagnostics and the negative control") {
  CHECK(run("diagnostics", "diag.txt") == 0);
  const std::string good = slurp(workdir() / "diag.txt");
  CHECK(good.find("FAIL") == std::string::npos);
  CHECK(run("diagnostics --inject-wrong-theta", "diag_bad.txt") != 0);
  const std::string bad = slurp(workdir() / "diag_bad.txt");
  const std::string theta_line = bad.substr(0, bad.find('\n'));
  CHECK(theta_line.rfind("theta", 0) == 0);
  CHECK(theta_line.find("FAIL") != std::string::npos);
}

TEST_CASE("mnist-prepare emits a runnable config") {
  wbary::IdxImages img{6, 4, 4, std::vector<std::uint8_t>(96, 0)};
  wbary::IdxLabels labels{{3, 1, 3, 3, 7, 3}};
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t p = 0; p < 16; ++p) img.pixels[k * 16 + p] = static_cast<std::uint8_t>((p * 7 + k * 13) % 5 * 50);
  wbary::write_file_bytes(workdir() / "img.idx3", wbary::serialize_idx_images(img));
  wbary::write_file_bytes(workdir() / "lab.idx1", wbary::serialize_idx_labels(labels));
  const auto cfg = workdir() / "mnist.json";
  REQUIRE(run("mnist-prepare --images " + q(workdir() / "img.idx3") + " --labels " + q(workdir() / "lab.idx1") +
              " --digit 3 --m 4 --seed 2 --out " + q(cfg)) == 0);
  CHECK(slurp(cfg).find("\"discrete\"") != std::string::npos);
  CHECK(run("run --config " + q(cfg) + " --horizon 2 --out " + q(workdir() / "m.csv")) == 0);
  CHECK(run("mnist-prepare --images " + q(workdir() / "img.idx3") + " --labels " + q(workdir() / "lab.idx1") +
            " --digit 3 --m 5 --out " + q(cfg)) != 0);
}

TEST_CASE("help documents the config") {
  REQUIRE(run("--help", "help.txt") == 0);
  const std::string help = slurp(workdir() / "help.txt");
  for (const char* word : {"run", "diagnostics", "preset", "mnist-prepare", "tau_assumed", "eval_seed"})
    CHECK_MESSAGE(help.find(word) != std::string::npos, word);
  REQUIRE(run("run --help", "run_help.txt") == 0);
  const std::string run_help = slurp(workdir() / "run_help.txt");
  for (const char* flag : {"--config", "--out", "--seed", "--variant", "--horizon"})
    CHECK_MESSAGE(run_help.find(flag) != std::string::npos, flag);
}
