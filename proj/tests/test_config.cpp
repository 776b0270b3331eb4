#include "corrpersist/config.hpp"
#include "corrpersist/error.hpp"
#include "corrpersist/report_io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace corrpersist;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("corrpersist_test_config_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("defaults are the reference parameters") {
  const RunConfig c;
  CHECK(c.theta_grid == std::vector<std::size_t>{250, 500, 750, 1000});
  CHECK(c.L_grid == std::vector<std::size_t>{10, 25, 50, 100});
  CHECK(c.dT == 5);
  CHECK(c.theta_forward == 250);
  CHECK(c.smoothing_divisor == 3.0);
  CHECK(c.filter == FilterKind::Pmfg);
  CHECK(c.measure == SimilarityMeasure::EdgeSurvival);
  CHECK(c.f_test == 0.30);
  CHECK(c.p_max == 0.5);
  CHECK(c.knn_k == 5);
  CHECK(c.bootstrap.n_resamples == 10000);
  CHECK_FALSE(c.bootstrap.block_length);
  CHECK(c.bootstrap.ci_levels == std::vector<double>{0.95, 0.99});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("setting keys") {
  RunConfig c;
  c.set("theta_grid", "100, 200");
  c.set(" L_grid ", "5");
  c.set("filter", "mst");
  c.set("measure", "metacorrelation");
  c.set("block_length", "12");
  c.set("seed", "77");
  c.set("ci_levels", "0.9");
  c.set("knn", "false");
  c.set("f_test", "0.25");
  c.set("input_format", "long");
  CHECK(c.theta_grid == std::vector<std::size_t>{100, 200});
  CHECK(c.L_grid == std::vector<std::size_t>{5});
  CHECK(c.filter == FilterKind::Mst);
  CHECK(c.measure == SimilarityMeasure::Metacorrelation);
  CHECK(*c.bootstrap.block_length == 12);
  CHECK(c.bootstrap.seed == 77);
  CHECK(c.bootstrap.ci_levels == std::vector<double>{0.9});
  CHECK_FALSE(c.knn);
  CHECK(c.f_test == 0.25);
  CHECK(c.input_format == PriceFormat::Long);
  c.set("block_length", "auto");
  CHECK_FALSE(c.bootstrap.block_length);

  CHECK_THROWS_AS(c.set("colour", "red"), Error);
  CHECK_THROWS_AS(c.set("dT", "five"), Error);
  CHECK_THROWS_AS(c.set("dT", "-1"), Error);
  CHECK_THROWS_AS(c.set("theta_grid", ""), Error);
  CHECK_THROWS_AS(c.set("knn", "maybe"), Error);
  CHECK_THROWS_AS(c.set("filter", "tree"), Error);
  try {
    c.set("colour", "red");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
}

TEST_CASE("validation") {
  auto bad = [](const char* key, const char* value) {
    RunConfig c;
    c.set(key, value);
    CHECK_THROWS_AS(c.validate(), Error);
  };
  bad("theta_grid", "1");
  bad("L_grid", "0");
  bad("dT", "0");
  bad("f_test", "1");
  bad("f_test", "0");
  bad("p_max", "1.5");
  bad("knn_k", "4");
  bad("workers", "0");
  bad("n_resamples", "50");
  bad("ci_levels", "0.95,1.2");
  bad("smoothing_divisor", "0");
}

TEST_CASE("render round trips") {
  RunConfig c;
  c.set("theta_grid", "300,600");
  c.set("smoothing_divisor", "2.5");
  c.set("p_max", "0.4");
  c.set("output_dir", "somewhere/else");
  c.set("dump_graphs", "true");
  const auto text = c.render();
  const auto back = parse_config(text);
  CHECK(back.render() == text);
  CHECK(back.theta_grid == c.theta_grid);
  CHECK(back.smoothing_divisor == 2.5);
  CHECK(back.output_dir == "somewhere/else");
  CHECK(RunConfig{}.render() == parse_config(RunConfig{}.render()).render());
}

TEST_CASE("config text") {
  const auto c = parse_config(
      "# comment\n"
      "\n"
      "theta_grid = 250   # trailing comment\n"
      "L_grid=10,25\n"
      "n_resamples = 500\n");
  CHECK(c.theta_grid == std::vector<std::size_t>{250});
  CHECK(c.L_grid == std::vector<std::size_t>{10, 25});
  CHECK(c.bootstrap.n_resamples == 500);

  RunConfig base;
  base.dT = 7;
  CHECK(parse_config("theta_forward = 100\n", base).dT == 7);

  try {
    parse_config("dT = 5\nthis line is wrong\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("config line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("unknown_key = 1\n"), Error);
}

TEST_CASE("config files") {
  const auto dir = scratch("files");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "run.cfg") << "dT = 10\nfilter = mst\n";
  }
  const auto c = load_config_file(dir / "run.cfg");
  CHECK(c.dT == 10);
  CHECK(c.filter == FilterKind::Mst);
  CHECK_THROWS_AS(load_config_file(dir / "missing.cfg"), Error);
  fs::remove_all(dir);
}

TEST_CASE("number formatting") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.9, 6.02214076e23}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(csv_double(std::nan("")).empty());
  CHECK(csv_double(2.0) == "2");
}

TEST_CASE("atomic writes") {
  const auto dir = scratch("atomic");
  const auto target = dir / "nested" / "out.txt";
  write_file_atomic(target, "first\n");
  CHECK(slurp(target) == "first\n");
  write_file_atomic(target, "second\n");
  CHECK(slurp(target) == "second\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "nested")) ++entries;
  CHECK(entries == 1);  // no temp file left behind
  // A regular file where a directory is needed.
  CHECK_THROWS_AS(write_file_atomic(target / "child.txt", "x"), Error);
  fs::remove_all(dir);
}
