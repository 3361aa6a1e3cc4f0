#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "pedk/data/image.hpp"
#include "support.hpp"

using namespace pedk;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run(const std::string& args, const test::TempDir& dir) {
  const auto log = dir / "cli.log";
  const std::string command = std::string(PEDK_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  o.output = ss.str();
  return o;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    test::TempDir dir("cli");
    CHECK(run("--help", dir).code == 0);
    CHECK(run("", dir).code == 1);
    CHECK(run("frobnicate", dir).code == 1);
    CHECK(run("synth", dir).code == 1);
    CHECK(run("synth --out x --profile huge", dir).code == 1);
  }

  TEST_CASE("bad config field is a usage error naming the field") {
    test::TempDir dir("cli");
    write_file(dir / "bad.json", R"({"synth": {"bogus": 1}})");
    const auto o = run("synth --config " + (dir / "bad.json").string() + " --out " + (dir / "data").string(), dir);
    CHECK(o.code == 1);
    CHECK(o.output.find("bogus") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "data" / "manifest.json"));
  }

  TEST_CASE("missing inputs are data errors naming the path") {
    test::TempDir dir("cli");
    const auto missing = (dir / "nowhere").string();
    auto o = run("train --data " + missing + " --out " + (dir / "out").string(), dir);
    CHECK(o.code == 2);
    CHECK(o.output.find(missing) != std::string::npos);
    o = run("eval --data " + missing + " --models " + missing + " --out " + (dir / "out").string(), dir);
    CHECK(o.code == 2);
    data::write_png(dir / "blank.png", data::make_image(96, 96, 0.5f));
    std::filesystem::create_directories(dir / "models");
    o = run("detect " + (dir / "blank.png").string() + " --models " + (dir / "models").string(), dir);
    CHECK(o.code == 2);
    CHECK(o.output.find("barrel") != std::string::npos);
    o = run("detect " + (dir / "absent.png").string() + " --models " + (dir / "models").string(), dir);
    CHECK(o.code == 2);
  }
}
