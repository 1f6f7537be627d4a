#include <doctest.h>

#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Result {
  int exit_code;
  std::string out;
};

// Runs the installed binary; stderr is left on the test's stderr.
Result run_cli(const std::string &args) {
  std::string cmd = std::string(POTACC_BIN) + " " + args;
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    out.append(buf.data(), n);
  int status = pclose(pipe);
  return Result{WEXITSTATUS(status), out};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("potacc-cli-" + std::to_string(getpid()) + "-" +
           std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string &name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("levels table is byte-stable (golden)") {
  Result r = run_cli("levels --scheme apot");
  CHECK(r.exit_code == 0);
  CHECK(r.out ==
        "pot_float,int8,pot_int,pot_int_e\n"
        "-0.625,-127,-10,-7\n"
        "-0.5,-102,-8,-6\n"
        "-0.375,-76,-6,-5\n"
        "-0.25,-51,-4,-4\n"
        "-0.1875,-38,-3,-1\n"
        "-0.125,-25,-2,-3\n"
        "-0.0625,-13,-1,-0\n"
        "0,0,0,2\n"
        "0.0625,13,1,0\n"
        "0.125,25,2,3\n"
        "0.1875,38,3,1\n"
        "0.25,51,4,4\n"
        "0.375,76,6,5\n"
        "0.5,102,8,6\n"
        "0.625,127,10,7\n");
}

TEST_CASE("levels --json emits one record per level") {
  Result r = run_cli("levels --scheme apot --json");
  CHECK(r.exit_code == 0);
  std::size_t count = 0, pos = 0;
  while ((pos = r.out.find("\"pot_int\"", pos)) != std::string::npos)
    ++count, ++pos;
  CHECK(count == 15);
}

TEST_CASE("unknown scheme exits 1 and lists the valid ones") {
  Result r = run_cli("levels --scheme int4 2>&1");
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("qkeras") != std::string::npos);
  CHECK(r.out.find("msq") != std::string::npos);
  CHECK(r.out.find("apot") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("levels 2>/dev/null").exit_code == 1);       // missing --scheme
  CHECK(run_cli("frobnicate 2>/dev/null").exit_code == 1);   // no such command
  CHECK(run_cli("2>/dev/null").exit_code == 1);              // no subcommand
  CHECK(run_cli("--help >/dev/null 2>&1").exit_code == 0);
}

TEST_CASE("pe-check passes for all schemes") {
  Result r = run_cli("pe-check");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  std::size_t count = 0, pos = 0;
  while ((pos = r.out.find("PASS", pos)) != std::string::npos) ++count, ++pos;
  CHECK(count == 3);
}

TEST_CASE("synth -> prep -> verify -> run pipeline") {
  TempDir tmp;
  Result synth = run_cli(
      "synth --input-dims 1x10x10x3 "
      "--layers conv:8:k3:s1:same,conv:6:k3:s2:same,fc:5 "
      "--scheme msq --seed 42 --out " + tmp.file("m.json"));
  CHECK(synth.exit_code == 0);

  Result prep = run_cli("prep --scheme msq --in " + tmp.file("m.json") +
                        " --out " + tmp.file("m.potw"));
  CHECK(prep.exit_code == 0);

  Result verify =
      run_cli("verify --model " + tmp.file("m.potw") + " --seed 5 --json");
  CHECK(verify.exit_code == 0);
  CHECK(verify.out.find("\"status\": \"ok\"") != std::string::npos);

  Result run_shift = run_cli("run --engine shift --model " + tmp.file("m.potw") +
                             " --random-input 9 --out " + tmp.file("a.tens"));
  CHECK(run_shift.exit_code == 0);
  Result run_mult = run_cli("run --engine mult --model " + tmp.file("m.potw") +
                            " --random-input 9 --out " + tmp.file("b.tens"));
  CHECK(run_mult.exit_code == 0);
  std::ifstream a(tmp.file("a.tens"), std::ios::binary);
  std::ifstream b(tmp.file("b.tens"), std::ios::binary);
  std::string abytes((std::istreambuf_iterator<char>(a)),
                     std::istreambuf_iterator<char>());
  std::string bbytes((std::istreambuf_iterator<char>(b)),
                     std::istreambuf_iterator<char>());
  CHECK(abytes == bbytes);

  // wrong scheme is a validation error
  Result bad = run_cli("prep --scheme apot --in " + tmp.file("m.json") +
                       " --out " + tmp.file("x.potw") + " 2>/dev/null");
  CHECK(bad.exit_code == 1);

  // shift engine on the int8-stage model is a stage error
  Result gated = run_cli("run --engine shift --model " + tmp.file("m.json") +
                         " --random-input 1 --out " + tmp.file("y.tens") +
                         " 2>/dev/null");
  CHECK(gated.exit_code == 1);
}

TEST_CASE("sim with a TOML accel file and overrides") {
  TempDir tmp;
  run_cli("synth --input-dims 1x14x14x16 --layers conv:32:k3:s1:same "
          "--scheme apot --seed 1 --out " + tmp.file("m.json"));
  std::ofstream(tmp.file("acc.toml"))
      << "# custom accelerator\n"
         "preset = \"pynq-z2\"\n"
         "gemm_units = 8\n"
         "lwgt_bytes_per_unit = 256K\n"
         "freq_mhz = 250.0\n"
         "name = \"my-board\"\n";
  Result r = run_cli("sim --model " + tmp.file("m.json") + " --accel " +
                     tmp.file("acc.toml") + " --report " + tmp.file("r.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("my-board") != std::string::npos);
  CHECK(r.out.find("8 GEMM units") != std::string::npos);
  CHECK(fs::exists(tmp.file("r.json")));

  std::ofstream(tmp.file("bad.toml")) << "gemm_units = 5\n";
  Result bad = run_cli("sim --model " + tmp.file("m.json") + " --accel " +
                       tmp.file("bad.toml") + " 2>/dev/null");
  CHECK(bad.exit_code == 1);

  Result ov = run_cli("sim --model " + tmp.file("m.json") +
                      " --accel pynq-z2 --set weight_bits=8 --json");
  CHECK(ov.exit_code == 0);
  CHECK(ov.out.find("\"weight_bits\": 8") != std::string::npos);
}

TEST_CASE("sweep subcommand emits ascending CSV plot data") {
  TempDir tmp;
  run_cli("synth --preset deit --scheme qkeras --seed 2 --out " +
          tmp.file("m.json"));
  Result r = run_cli("sweep --model " + tmp.file("m.json") +
                     " --accel pynq-z2 --axis lwgt --values 128K,256K,512K");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("lwgt,acc_cycles", 0) == 0);
  CHECK(r.out.find("131072,") != std::string::npos);
  CHECK(r.out.find("524288,") != std::string::npos);
}

TEST_CASE("quantize from a JSON array file") {
  TempDir tmp;
  std::ofstream(tmp.file("w.json")) << "[0.625, 0.1875, -0.0625]";
  Result r = run_cli("quantize --in " + tmp.file("w.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("scale,") != std::string::npos);
  CHECK(r.out.find("127") != std::string::npos);
  CHECK(r.out.find("38") != std::string::npos);
  CHECK(r.out.find("-13") != std::string::npos);
}

TEST_CASE("energy subcommand") {
  Result r = run_cli("energy --p-inference 2.0 --p-idle 1.0 --time-s 1.0");
  CHECK(r.exit_code == 0);
  CHECK(r.out.rfind("1", 0) == 0);
  Result bad = run_cli(
      "energy --p-inference 1.0 --p-idle 2.0 --time-s 1.0 2>/dev/null");
  CHECK(bad.exit_code == 1);
}

TEST_CASE("env var supplies the scheme (flags > env > config)") {
  // without env the bare command fails (see usage test); with env it works
  Result with_env = [&] {
    std::string cmd = "POTACC_SCHEME=apot " + std::string(POTACC_BIN) +
                      " levels";
    FILE *pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
      out.append(buf.data(), n);
    return Result{WEXITSTATUS(pclose(pipe)), out};
  }();
  CHECK(with_env.exit_code == 0);
  CHECK(with_env.out.find("-0.625") != std::string::npos);
}
