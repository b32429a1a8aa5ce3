#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "doctest.h"

#include "dab/config.hpp"

using namespace dab;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open ", path.string());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_SUITE("cli_plumbing") {

TEST_CASE("the preset catalogue is stable") {
  auto names = preset_names();
  std::set<std::string> expect = {
      "cubic-k1",
      "two-cluster-k2",
      "blob-ood",
      "blob-calibration",
      "blob-calibration-margin",
      "tabular",
      "cifar10",
      "imagenet-pretrained-ood",
      "imagenet-pretrained-calibration",
      "imagenet-finetuned-ood",
      "imagenet-finetuned-calibration",
  };
  CHECK(std::set<std::string>(names.begin(), names.end()) == expect);
  CHECK(names.size() == expect.size());  // no duplicates
}

TEST_CASE("shipped preset files match the built-in definitions byte for byte") {
  const std::filesystem::path dir = DAB_PRESET_DIR;
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const std::string on_disk = slurp(dir / (name + ".cfg"));
    CHECK(on_disk == to_text(preset(name)));
  }
}

TEST_CASE("no stray files sit next to the presets") {
  const std::filesystem::path dir = DAB_PRESET_DIR;
  auto names = preset_names();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto fname = entry.path().filename().string();
    REQUIRE(fname.size() > 4);
    CHECK(fname.substr(fname.size() - 4) == ".cfg");
    const std::string stem = fname.substr(0, fname.size() - 4);
    CHECK(std::find(names.begin(), names.end(), stem) != names.end());
  }
}

TEST_CASE("preset files survive a parse round trip unchanged") {
  const std::filesystem::path dir = DAB_PRESET_DIR;
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    RunConfig parsed = parse_run_config(slurp(dir / (name + ".cfg")));
    CHECK(to_text(parsed) == to_text(preset(name)));
  }
}

}  // TEST_SUITE
