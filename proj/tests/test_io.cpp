#include <doctest.h>

#include <filesystem>
#include <string>

#include "fylab/error.hpp"
#include "fylab/io.hpp"

using namespace fylab;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fylab_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error");
  return ErrorKind::invariant;
}

}  // namespace

TEST_CASE("config round-trips losslessly") {
  RunConfig c;
  c.n = 4;
  c.s = 0.75;
  c.h = 1.0 / 3.0;
  c.M_list = {0.1, 1.0 / 7.0, 33.25};
  c.gamma_mode = "explicit";
  c.gamma_value = std::nextafter(2.0, 3.0);
  c.pure_power = true;
  c.out_dir = "some dir/out";
  const std::string text = format_config(c);
  const RunConfig back = parse_config(text);
  CHECK(back == c);
  CHECK(format_config(back) == text);
  CHECK(parse_config(format_config(RunConfig{})) == RunConfig{});
}

TEST_CASE("config parsing") {
  SUBCASE("comments, blank lines and partial files") {
    const RunConfig c = parse_config("# header\n\n[problem]\nn = 4   # dimension\ns=0.25\n");
    CHECK(c.n == 4);
    CHECK(c.s == 0.25);
    CHECK(c.M == RunConfig{}.M);
  }
  SUBCASE("malformed lines name the line") {
    for (const std::string text :
         {"[problem]\nn = three\n", "[problem]\nbogus = 1\n", "n = 3\n", "[nowhere]\n",
          "[problem]\nn 3\n", "[problem]\ns = 0.5 0.6\n"}) {
      try {
        parse_config(text);
        FAIL("accepted: ", text);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::config);
        CHECK(std::string(e.what()).find("line ") != std::string::npos);
      }
    }
  }
  SUBCASE("invalid values") {
    CHECK(kind_of([] { parse_config("[problem]\nn = 1\ns = 0.5\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config("[problem]\ngamma_mode = fitted\n"); }) == ErrorKind::config);
    CHECK(kind_of([] { parse_config("[grid]\nM_list = 1, , 2\n"); }) == ErrorKind::config);
  }
  SUBCASE("params follow the config") {
    RunConfig c;
    c.gamma_mode = "explicit";
    c.gamma_value = 1.5;
    const ProblemParams p = params_from_config(c);
    CHECK(p.gamma_ns == 1.5);
    CHECK(p.gamma_source == GammaSource::explicit_value);
  }
  SUBCASE("missing file is an io error") {
    CHECK(kind_of([] { load_config("/nonexistent/fylab.cfg"); }) == ErrorKind::io);
  }
}

TEST_CASE("CSV output is deterministic at full precision") {
  const auto dir = scratch_dir("csv");
  for (const char* name : {"a.csv", "b.csv"}) {
    CsvWriter csv((dir / name).string(), {"x", "y"});
    csv.row(std::vector<double>{0.1, 1.0 / 3.0});
    csv.row(std::vector<double>{-2.5e-300, 1e300});
    csv.close();
  }
  const std::string a = read_text((dir / "a.csv").string());
  CHECK(a == read_text((dir / "b.csv").string()));
  CHECK(a == "x,y\n0.10000000000000001,0.33333333333333331\n-2.5e-300,1.0000000000000001e+300\n");
  CsvWriter bad((dir / "c.csv").string(), {"x"});
  CHECK(kind_of([&] { bad.row(std::vector<double>{1.0, 2.0}); }) == ErrorKind::invariant);
  std::filesystem::remove_all(dir);
}

TEST_CASE("profile files") {
  const auto dir = scratch_dir("profiles");
  const Profile periodic = Profile::periodic(5.5, {1.0, 0.2, -0.01}, 0.25);
  write_json((dir / "p.json").string(), profile_to_json(periodic));
  const Profile back = load_profile((dir / "p.json").string());
  for (double t : {0.0, 1.3, 4.4}) CHECK(back.value(t) == periodic.value(t));

  write_json((dir / "one.json").string(), profile_to_json(Profile::constant()));
  CHECK(load_profile((dir / "one.json").string()).is_constant());

  write_profile_samples((dir / "s.csv").string(), periodic, -5.5, 5.5, 200);
  const Profile grid = load_profile((dir / "s.csv").string());
  REQUIRE(grid.grid_data() != nullptr);
  CHECK(grid.grid_data()->nodes.size() == 200);
  CHECK(std::abs(grid.value(0.3) - periodic.value(0.3)) < 1e-6);

  write_text((dir / "bad.json").string(), "{\"kind\": \"spiral\"}");
  CHECK(kind_of([&] { load_profile((dir / "bad.json").string()); }) == ErrorKind::config);
  write_text((dir / "bad.txt").string(), "1,2\n");
  CHECK(kind_of([&] { load_profile((dir / "bad.txt").string()); }) == ErrorKind::config);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest embeds the resolved config") {
  RunConfig c;
  c.m = 3;
  const auto manifest = make_manifest("verify", "statement", c, params_from_config(c), {"x.csv"});
  CHECK(manifest["config"]["verify"]["m"] == 3);
  CHECK(parse_config(manifest["config_text"].get<std::string>()) == c);
  CHECK(manifest["params"]["gamma_source"] == "closed_form");
  CHECK(manifest.contains("timestamp"));
}
