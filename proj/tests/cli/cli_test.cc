// Copyright 2026 The HierNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the command-line tool as a subprocess.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

// Runs the tool with `args`; stderr is merged into the captured output.
Result run(const std::string& args) {
  const std::string cmd = std::string(HIERNAS_CLI) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path work_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hiernas_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string config(const std::string& name) {
  return (fs::path(HIERNAS_SOURCE_DIR) / "configs" / name).string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("search writes the artifact set and a JSON summary") {
  const auto dir = work_dir("search");
  const auto r = run("search-evolve -c " + config("hierarchical.json") +
                     " --steps 120 --population 30 --seed 3 --out " + (dir / "run").string());
  REQUIRE(r.status == 0);
  const auto summary = json::parse(r.out);
  CHECK(summary["records"] == 120);
  CHECK(summary["completed"] == true);
  for (const char* f : {"config.json", "run_log.csv", "best_genotype.json", "checkpoint.json",
                        "dot/cell.dot"}) {
    CHECK(fs::exists(dir / "run" / f));
  }
  const auto cfg = json::parse(slurp(dir / "run" / "config.json"));
  CHECK(cfg["search"]["total_steps"] == 120);
  CHECK(cfg["search"]["population_size"] == 30);
  CHECK(cfg["search"]["seed"] == 3);

  const auto e = run("eval -c " + config("hierarchical.json") + " " +
                     (dir / "run" / "best_genotype.json").string());
  REQUIRE(e.status == 0);
  const auto ej = json::parse(e.out);
  CHECK(ej["fitness"].get<double>() == summary["best_fitness"].get<double>());
  CHECK(ej["param_count"] == summary["best_param_count"]);

  const auto rnd = run("search-random -c " + config("flat.json") +
                       " --population 25 --steps 25 --out " + (dir / "random").string());
  REQUIRE(rnd.status == 0);
  CHECK(json::parse(rnd.out)["records"] == 25);
  fs::remove_all(dir);
}

TEST_CASE("interrupted search resumes to the same log") {
  const auto dir = work_dir("resume");
  const std::string base = "search-evolve -c " + config("hierarchical.json") +
                           " --steps 150 --population 30 --seed 8 --out ";
  REQUIRE(run(base + (dir / "full").string()).status == 0);
  const auto partial = run(base + (dir / "part").string() + " --stop-after 70");
  REQUIRE(partial.status == 0);
  CHECK(json::parse(partial.out)["completed"] == false);
  const auto resumed = run("resume " + (dir / "part" / "checkpoint.json").string());
  REQUIRE(resumed.status == 0);
  const auto rj = json::parse(resumed.out);
  CHECK(rj["records"] == 150);
  CHECK(rj["out"] == (dir / "part").string());

  // Logs agree once the wall-time column is removed.
  const std::regex time_col("^([^,]*),[^,]*,");
  auto strip = [&](const fs::path& p) {
    std::ifstream in(p);
    std::string all;
    for (std::string line; std::getline(in, line);) all += std::regex_replace(line, time_col, "$1,") + "\n";
    return all;
  };
  CHECK(strip(dir / "full" / "run_log.csv") == strip(dir / "part" / "run_log.csv"));
  CHECK(slurp(dir / "full" / "best_genotype.json") == slurp(dir / "part" / "best_genotype.json"));

  const auto again = run("resume " + (dir / "part" / "checkpoint.json").string());
  CHECK(json::parse(again.out)["already_complete"] == true);

  const auto mismatch = run("resume " + (dir / "part" / "checkpoint.json").string() + " -c " +
                            config("flat.json"));
  CHECK(mismatch.status == 2);
  CHECK(json::parse(mismatch.out)["error"] == "IncompatibleCheckpoint");
  fs::remove_all(dir);
}

TEST_CASE("export-dot and inspect agree on the cell") {
  const auto dir = work_dir("inspect");
  REQUIRE(run("search-random -c " + config("hierarchical.json") +
              " --population 5 --steps 5 --out " + (dir / "run").string())
              .status == 0);
  const auto genotype = (dir / "run" / "best_genotype.json").string();
  const auto dot = run("export-dot " + genotype + " --out " + (dir / "dot").string());
  REQUIRE(dot.status == 0);
  CHECK(json::parse(dot.out)["graphs"] == 7);

  const auto inspect = run("inspect " + genotype + " --height 8 --width 8");
  REQUIRE(inspect.status == 0);
  auto arrows = [](const std::string& text) {
    int n = 0;
    for (auto p = text.find("->"); p != std::string::npos; p = text.find("->", p + 2)) ++n;
    return n;
  };
  // One arrow per motif edge; level-2 motifs are motif_<m>.dot, the top motif is the cell.
  const std::regex line("level (\\d+) motif (\\d+): \\d+ nodes, (\\d+) edges");
  int checked = 0;
  for (std::sregex_iterator it(inspect.out.begin(), inspect.out.end(), line), end; it != end; ++it) {
    const auto& m = *it;
    const std::string file = m[1] == "3" ? "cell.dot" : "motif_" + m[2].str() + ".dot";
    CHECK(arrows(slurp(dir / "dot" / file)) == std::stoi(m[3]));
    ++checked;
  }
  CHECK(checked == 7);
  CHECK(inspect.out.find("validation: ok") == 0);
  fs::remove_all(dir);
}

TEST_CASE("a trivial flat genotype has no parameters") {
  const auto dir = work_dir("trivial");
  const std::string text = R"({"version": 1, "id": 1, "levels": 2, "channels": 16,
    "motif_counts": [6, 1], "node_counts": [[4]],
    "motifs": [{"level": 2, "motif": 1, "nodes": 4, "edges": [[2, 1, 1], [3, 2, 1], [4, 3, 1]]}]})";
  std::ofstream(dir / "g.json") << text;
  const auto r = run("inspect " + (dir / "g.json").string());
  INFO(r.out);
  REQUIRE(r.status == 0);
  CHECK(r.out.find("cell parameters: 0\n") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("errors are reported as JSON with a nonzero status") {
  const auto missing = run("search-evolve -c /nonexistent.json");
  CHECK(missing.status == 2);
  CHECK(json::parse(missing.out)["error"] == "IoError");
  const auto bad_backend = run("eval -c " + config("flat.json") + " --fitness param /dev/null");
  CHECK(bad_backend.status != 0);
  const auto usage = run("no-such-command");
  CHECK(usage.status != 0);
}
