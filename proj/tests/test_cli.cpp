#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct CliFixture {
  fs::path dir;

  CliFixture() {
    dir = fs::temp_directory_path() / ("nakano_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string binary() const {
    const char* env = std::getenv("NAKANO_BIN");
    return env ? env : "./nakano";
  }

  std::string write_config(const char* name, const Json& config) const {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << config.dump(2);
    return p.string();
  }

  // Returns the process exit code and parses the report written to `out`.
  int run(const std::string& args, const fs::path& out, Json* report) const {
    const std::string cmd = binary() + " " + args + " --out " + out.string();
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (report && fs::exists(out)) {
      std::ifstream in(out);
      *report = Json::parse(in);
    }
    return code;
  }
};

Json identity_config() {
  return Json{
      {"command", "check-nakano"},
      {"grid", {{"mins", {-1.0, -1.0}}, {"maxs", {1.0, 1.0}}, {"points", {21, 21}},
                {"rank", 1}}},
      {"fields", {{"g", {{"entries", {{"1"}}}}}}},
  };
}

}  // namespace

TEST_CASE("check-nakano on the identity metric exits 0") {
  CliFixture fix;
  const std::string cfg = fix.write_config("id.json", identity_config());
  Json report;
  const int code = fix.run("check-nakano --config " + cfg, fix.dir / "r.json", &report);
  CHECK(code == 0);
  CHECK(report["schema"] == 1);
  CHECK(report["result"]["verdict"] == "semipositive");
  CHECK(report.contains("config"));
  CHECK(report.contains("wall_time_s"));
}

TEST_CASE("falsify on a concave weight exits 1 with violated_at") {
  CliFixture fix;
  Json config{
      {"command", "falsify"},
      {"grid", {{"mins", {-1.2, -1.2}}, {"maxs", {1.2, 1.2}}, {"points", {49, 49}},
                {"rank", 1}}},
      {"fields", {{"phi", {{"expr", "-x1^2 - x2^2"}}}}},
      {"falsifier", {{"center", {0.0, 0.0}}, {"radius", 1.0}, {"xi", {{1.0}, {0.0}}}}},
  };
  const std::string cfg = fix.write_config("f.json", config);
  Json report;
  const int code = fix.run("falsify --config " + cfg + " --csv " + (fix.dir / "t.csv").string(),
                           fix.dir / "r.json", &report);
  CHECK(code == 1);
  CHECK(report["result"]["outcome"].contains("violated_at"));
  std::ifstream csv(fix.dir / "t.csv");
  std::string head;
  std::getline(csv, head);
  CHECK(head == "s,term_curvature,term_gradient,total");
}

TEST_CASE("solve-d with a non-closed form exits 2 with a stable error code") {
  CliFixture fix;
  Json config{
      {"command", "solve-d"},
      {"grid", {{"mins", {-1.0, -1.0}}, {"maxs", {1.0, 1.0}}, {"points", {21, 21}},
                {"rank", 1}}},
      {"fields", {{"f", {{"components", {{"-x2"}, {"x1"}}}}}}},
  };
  const std::string cfg = fix.write_config("s.json", config);
  Json report;
  const int code = fix.run("solve-d --config " + cfg, fix.dir / "r.json", &report);
  CHECK(code == 2);
  CHECK(report["error"]["code"] == "ClosednessError");
}

TEST_CASE("--set overrides reach the resolved config") {
  CliFixture fix;
  const std::string cfg = fix.write_config("id.json", identity_config());
  Json report;
  const int code = fix.run("check-nakano --config " + cfg + " --set tolerances.tau=1e-5",
                           fix.dir / "r.json", &report);
  CHECK(code == 0);
  CHECK(report["config"]["tolerances"]["tau"] == 1e-5);
  CHECK(report["result"]["tau"] == 1e-5);
}

TEST_CASE("reports are byte-identical apart from wall time") {
  CliFixture fix;
  const std::string cfg = fix.write_config("id.json", identity_config());
  fix.run("check-nakano --config " + cfg + " --threads 1", fix.dir / "a.json", nullptr);
  fix.run("check-nakano --config " + cfg + " --threads 1", fix.dir / "b.json", nullptr);
  std::ifstream fa(fix.dir / "a.json"), fb(fix.dir / "b.json");
  Json a = Json::parse(fa), b = Json::parse(fb);
  a.erase("wall_time_s");
  b.erase("wall_time_s");
  CHECK(a.dump() == b.dump());
}

TEST_CASE("check-estimate exits 1 when the inequality fails") {
  CliFixture fix;
  Json config{
      {"command", "check-estimate"},
      {"grid", {{"mins", {-1.2}}, {"maxs", {1.2}}, {"points", {241}}, {"rank", 1}}},
      {"fields",
       {{"g", {{"entries", Json::array({Json::array({"exp(x1^2)"})})}}},
        {"psi", {{"expr", "64*(x1^2 - 0.25)"}}},
        {"f", {{"seed", {{"center", {0.0}}, {"radius", 1.0}, {"xi", {{1.0}}}}}}}}},
  };
  const std::string cfg = fix.write_config("est.json", config);
  Json report;
  const int code = fix.run("check-estimate --config " + cfg, fix.dir / "r.json", &report);
  CHECK(code == 1);
  CHECK(report["result"]["holds"] == false);
}

TEST_CASE("bochner and curvature commands complete") {
  CliFixture fix;
  Json bochner{
      {"command", "bochner"},
      {"grid", {{"mins", {-1.0, -1.0}}, {"maxs", {1.0, 1.0}}, {"points", {61, 61}},
                {"rank", 1}}},
      {"fields",
       {{"phi", {{"expr", "x1^2 + x2^2"}}},
        {"alpha", {{"seed", {{"center", {0.0, 0.0}}, {"radius", 0.8}, {"xi", {{0.7}, {0.7}}}}}}}}},
  };
  Json report;
  int code = fix.run("bochner --config " + fix.write_config("b.json", bochner),
                     fix.dir / "rb.json", &report);
  CHECK(code == 0);
  CHECK(report["result"]["relative"].get<double>() <= 1e-2);

  Json curvature{
      {"command", "curvature"},
      {"grid", {{"mins", {-1.0}}, {"maxs", {1.0}}, {"points", {101}}, {"rank", 1}}},
      {"fields", {{"phi", {{"expr", "x1^2"}}}}},
      {"dump", (fix.dir / "theta.nkf").string()},
  };
  code = fix.run("curvature --config " + fix.write_config("c.json", curvature),
                 fix.dir / "rc.json", &report);
  CHECK(code == 0);
  CHECK(report["result"]["max_abs_block_entry"].get<double>() ==
        doctest::Approx(2.0).epsilon(0.1));  // global max includes the O(h) boundary band
  CHECK(fs::exists(fix.dir / "theta.nkf"));
}

TEST_CASE("validate reports diagnostics without running numerics") {
  CliFixture fix;

  Json good = identity_config();
  const std::string cfg_good = fix.write_config("good.json", good);
  const std::string out =
      fix.binary() + " validate --config " + cfg_good + " > " + (fix.dir / "v.json").string();
  CHECK(std::system(out.c_str()) == 0);
  {
    std::ifstream in(fix.dir / "v.json");
    Json v = Json::parse(in);
    CHECK(v["diagnostics"].empty());
  }

  Json bad = identity_config();
  bad["fields"]["g"]["entries"] = Json::array({Json::array({"1", "0"})});  // not square
  bad["fields"]["phi"] = {{"file", "/nonexistent.nkf"}};   // missing file
  bad["fields"]["psi"] = {{"expr", "(x1"}};                // parse error
  const std::string cfg_bad = fix.write_config("bad.json", bad);
  const std::string cmd =
      fix.binary() + " validate --config " + cfg_bad + " > " + (fix.dir / "vb.json").string();
  CHECK(std::system(cmd.c_str()) == 0);  // validate always exits 0
  {
    std::ifstream in(fix.dir / "vb.json");
    Json v = Json::parse(in);
    CHECK(v["diagnostics"].size() >= 3);
  }
}
