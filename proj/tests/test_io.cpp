#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qom/io.hpp"

using namespace qom;

static std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_CASE("numbers print with 12 significant digits and '.' separator") {
  CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(io::format_number(4.0 / 9.0) == "0.444444444444");
  CHECK(io::format_number(0.0) == "0");
  CHECK(io::format_number(-2.5e-11) == "-2.5e-11");
  CHECK(io::format_number(123456789012345.0) == "1.23456789012e+14");
}

TEST_CASE("csv files are byte-identical across reruns") {
  const std::string path = "test_io_tmp.csv";
  auto write = [&]() {
    io::CsvWriter w(path, {"zeta=0.25", "C=100"}, {"param_value", "fidelity"});
    w.row(std::vector<double>{0.25, 4.0 / 9.0});
    w.row(std::vector<double>{0.3, 0.5});
  };
  write();
  std::string first = slurp(path);
  write();
  CHECK(first == slurp(path));
  CHECK(first.find("# version=0.1.0\n") == 0);
  CHECK(first.find("# zeta=0.25\n") != std::string::npos);
  CHECK(first.find("param_value,fidelity\n") != std::string::npos);
  CHECK(first.find("0.444444444444") != std::string::npos);
  CHECK(first.find("\r") == std::string::npos);  // Unix newlines only
  std::remove(path.c_str());
}

TEST_CASE("csv writer rejects column mismatches") {
  const std::string path = "test_io_tmp2.csv";
  io::CsvWriter w(path, {}, {"a", "b"});
  CHECK_THROWS(w.row(std::vector<double>{1.0}));
  std::remove(path.c_str());
}

TEST_CASE("flat key-value config with sections and arrays") {
  auto cfg = io::Config::parse_string(
      "# comment line\n"
      "top = 3\n"
      "[steady]\n"
      "zeta = 0.25   # trailing comment\n"
      "n_fock = 10\n"
      "grid = 0.1, 0.2, 0.3\n"
      "flag = true\n");
  CHECK(cfg.get_int("top", 0) == 3);
  CHECK(cfg.get_double("steady.zeta", 0) == doctest::Approx(0.25));
  CHECK(cfg.get_int("steady.n_fock", 0) == 10);
  CHECK(cfg.get_bool("steady.flag", false));
  auto grid = cfg.get_double_array("steady.grid");
  REQUIRE(grid.size() == 3);
  CHECK(grid[1] == doctest::Approx(0.2));
  CHECK(cfg.get_double("missing", 7.5) == doctest::Approx(7.5));
  CHECK_FALSE(cfg.has("missing"));
  CHECK_THROWS(io::Config::parse_string("no equals sign here\n"));
  CHECK_THROWS(cfg.get_int("steady.zeta", 0));
}
