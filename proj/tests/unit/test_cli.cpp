#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "cpm/model_io.hpp"

using namespace cpm;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("cpm_cli_" + std::to_string(::getpid()) + "_" +
                                         std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& text = {}) const {
    const auto p = (path_ / name).string();
    if (!text.empty()) write_text_file(p, text);
    return p;
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

const char* kFourVariableModel =
    "cpm 1\n"
    "var X1 2\nvar X2 2\nvar X3 2\nvar X4 2\n"
    "dist P1 X1 X3\n0.1 0.2\n0.3 0.4\n"
    "dist P2 X2\n0.35 0.65\n"
    "dist P3 X1 X2 X3 X4\n"
    "0.02 0.05 0.07 0.03\n0.09 0.04 0.06 0.08\n"
    "0.05 0.06 0.10 0.04\n0.03 0.11 0.07 0.10\n"
    "end\n";

}  // namespace

TEST_CASE("check exit codes") {
  TempDir dir;
  const auto perfect = dir.file("perfect.cpm");
  REQUIRE(run({"gen", "perfect", "--seed", "3", "--num-vars", "5", "--out", perfect}).code == 0);
  auto r = run({"check", perfect, "--perfect", "--method", "both", "--format", "summary"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("verdict=true") != std::string::npos);
  CHECK(r.out.find("worst_deviation=") != std::string::npos);

  const auto bad = dir.file("bad.cpm");
  REQUIRE(run({"gen", "nonperfect", "--seed", "3", "--num-vars", "5", "--out", bad}).code == 0);
  r = run({"check", bad, "--perfect", "--format", "summary"});
  CHECK(r.code == cli::kCheckFailed);
  CHECK(r.out.find("verdict=false") != std::string::npos);
  CHECK(r.out.find("failing_index=") != std::string::npos);
}

TEST_CASE("oracle --eliminate on the four-variable model") {
  TempDir dir;
  const auto model = dir.file("four.cpm", kFourVariableModel);
  const auto r = run({"oracle", model, "--eliminate", "X1", "--format", "summary"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("verdict=true") != std::string::npos);
  CHECK(run({"oracle", model}).code == cli::kOk);
}

TEST_CASE("joint with a dominance violation exits 2 with the step") {
  TempDir dir;
  const auto model = dir.file("dom.cpm",
                              "cpm 1\nvar A 2\nvar B 2\nvar C 2\n"
                              "dist P1 A B\n0.25 0.25 0.25 0.25\n"
                              "dist P2 B C\n0.5 0.5 0 0\nend\n");
  const auto r = run({"joint", model});
  CHECK(r.code == cli::kError);
  CHECK(r.err.find("DominanceViolation") != std::string::npos);
  CHECK(r.err.find("failing_step=2") != std::string::npos);
}

TEST_CASE("eliminate writes a parseable reduced model") {
  TempDir dir;
  const auto model = dir.file("four.cpm", kFourVariableModel);
  const auto out = dir.file("reduced.cpm");
  auto r = run({"eliminate", model, "--var", "X1", "--keep-residual", "--out", out, "--format",
                "summary"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("touched=0,2") != std::string::npos);
  const auto reduced = read_model_file(out);
  CHECK(reduced.size() == 4);
  CHECK(reduced.names().back() == "residual");

  r = run({"eliminate", model, "--var", "X9"});
  CHECK(r.code == cli::kError);
  CHECK(r.err.find("UndeclaredVariable") != std::string::npos);
  r = run({"eliminate", model, "--var", "X1", "--var", "X1"});
  CHECK(r.code == cli::kError);
  CHECK(r.err.find("VariableAbsent") != std::string::npos);
  CHECK(run({"eliminate", model, "--var", "X1", "--var", "X1", "--ignore-missing"}).code == 0);
}

TEST_CASE("ipfp and joint produce models") {
  TempDir dir;
  const auto perfect = dir.file("perfect.cpm");
  REQUIRE(run({"gen", "perfect", "--seed", "9", "--out", perfect}).code == 0);
  const auto r = run({"ipfp", perfect, "--format", "summary", "--out", dir.file("fit.cpm")});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("cycles_used=1") != std::string::npos);

  const auto j = run({"joint", perfect});
  CHECK(j.code == cli::kOk);
  CHECK(parse_model(j.out).size() == 1);
}

TEST_CASE("bench refuses the joint of a long chain") {
  const auto r = run({"bench", "--chain-length", "26", "--trials", "2", "--format", "summary"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("joint.ran=false") != std::string::npos);
  CHECK(r.out.find("eliminate.peak_entries=8") != std::string::npos);

  const auto small = run({"bench", "--chain-length", "10", "--format", "summary"});
  CHECK(small.code == cli::kOk);
  CHECK(small.out.find("joint.ran=true") != std::string::npos);
  CHECK(small.out.find("eliminate.delta_vs_oracle=") != std::string::npos);
}

TEST_CASE("parse failures and usage errors exit 2") {
  TempDir dir;
  const auto model = dir.file("broken.cpm", "cpm 1\nvar X1 2\ndist P X1\n0.5 0.4\nend\n");
  const auto r = run({"joint", model});
  CHECK(r.code == cli::kError);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(run({"joint", model, "--renormalize"}).code == cli::kOk);
  CHECK(run({"frobnicate"}).code == cli::kError);
  CHECK(run({"joint", dir.file("missing.cpm")}).code == cli::kError);
  CHECK(run({"--help"}).code == cli::kOk);
}
