// Apache License, Version 2.0, refer to LICENSE.txt

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "polyaurn/json_io.hpp"
#include "polyaurn/scheme_config.hpp"

using namespace polyaurn;
using nlohmann::json;

namespace {

// ---- config helpers ----

WeightScheme parse(const std::string& text) { return parse_scheme_config(json::parse(text)); }

// ---- CLI helpers ----

struct CliResult {
  int exit_code = -1;
  std::string out;
};

std::string cli_binary() {
  const char* env = std::getenv("POLYAURN_CLI");
  return env ? env : "";
}

CliResult run_cli(const std::string& args) {
  CliResult result;
  std::string cmd = cli_binary() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) result.out.append(buf, got);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("polyaurn_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name, const std::string& content) const {
    std::string full = (path / name).string();
    std::ofstream f(full, std::ios::binary);
    f << content;
    return full;
  }
};

}  // namespace

TEST_CASE("configs construct the intended schemes", "[config]") {
  WeightScheme py = parse(R"({"scheme": "pitman_yor", "alpha": "3/10", "theta": 1})");
  CHECK(py.kind() == SchemeKind::pitman_yor);
  CHECK(py.psi(1) == Rational(7, 10));
  CHECK(py.psi0(2) == Rational(8, 5));

  // decimal strings parse exactly, not through a double
  CHECK(parse(R"({"scheme": "pitman_yor", "alpha": "0.3", "theta": 1})").psi(1) ==
        Rational(7, 10));

  WeightScheme bm = parse(R"({"scheme": "blackwell_macqueen", "mu_total": "5/2"})");
  CHECK(bm.psi0(3) == Rational(5, 2));
  CHECK(bm.xi(2) == Rational(9, 2));

  WeightScheme fisher = parse(R"({"scheme": "fisher", "N": 100, "theta": "1"})");
  CHECK(fisher.kind() == SchemeKind::fisher);
  CHECK(fisher.psi(1) == Rational(101, 100));

  CHECK(parse(R"({"scheme": "random_n", "N": 3})").psi0(2) == Rational(1));
  CHECK(parse(R"({"scheme": "iid"})").kind() == SchemeKind::iid);

  WeightScheme custom = parse(
      R"({"scheme": "custom",
          "custom": {"psi": ["1", "4", 9], "psi0": [1, 1, 1], "xi": [2, 3, 4]}})");
  CHECK(custom.psi(2) == Rational(4));
  CHECK(custom.xi(3) == Rational(4));
}

TEST_CASE("configs reject floats, unknown fields, and missing fields", "[config]") {
  auto fails_mentioning = [](const std::string& text, const std::string& needle) {
    try {
      parse(text);
      FAIL("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  fails_mentioning(R"({"scheme": "pitman_yor", "alpha": 0.3, "theta": 1})", "alpha");
  fails_mentioning(R"({"scheme": "iid", "theta": 1})", "theta");
  fails_mentioning(R"({"scheme": "pitman_yor", "alpha": "1/2"})", "theta");
  fails_mentioning(R"({"scheme": "blackwell_macqueen"})", "mu_total");
  fails_mentioning(R"({"scheme": "dirichlet"})", "dirichlet");
  fails_mentioning(R"({"alpha": "1/2"})", "scheme");
  fails_mentioning(R"({"scheme": "fisher", "N": 2.5, "theta": 1})", "N");
  fails_mentioning(R"({"scheme": "fisher", "N": 0, "theta": 1})", "N");
  fails_mentioning(R"({"scheme": "random_n", "N": 2, "theta": 1})", "theta");
  fails_mentioning(R"({"scheme": "custom", "custom": {"psi": [1], "xi": [1]}})", "psi0");
  fails_mentioning(
      R"({"scheme": "custom", "custom": {"psi": [1], "psi0": [1], "xi": [1], "zeta": [1]}})",
      "zeta");
  fails_mentioning(R"({"scheme": "pitman_yor", "alpha": "abc", "theta": 1})", "alpha");

  // out-of-domain values pass config parsing but fail scheme construction
  CHECK_THROWS_AS(parse(R"({"scheme": "pitman_yor", "alpha": "3/2", "theta": 1})"),
                  ParameterError);
}

TEST_CASE("config files surface I/O and syntax problems by name", "[config]") {
  TempDir tmp;
  CHECK_THROWS_AS(load_scheme_config(tmp.file("no.json", "") + ".missing"), ConfigError);
  CHECK_THROWS_AS(load_scheme_config(tmp.file("bad.json", "{not json")), ConfigError);
  WeightScheme ok = load_scheme_config(tmp.file("ok.json", R"({"scheme": "iid"})"));
  CHECK(ok.kind() == SchemeKind::iid);
}

TEST_CASE("doubles survive the text round trip", "[json]") {
  for (double x : {0.5, 0.1, 1.0 / 3.0, 1e-300, 123456.75, 4.499205338329425}) {
    std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("path records round trip through NDJSON", "[json]") {
  SamplePath p;
  p.labels = {0, 1, 0};
  p.values = {0.5, 1.0 / 3.0, 0.5};
  p.replicate_id = 7;
  std::string line = path_record_line(p);
  CHECK(line.find("\"replicate\": 7") != std::string::npos);
  CHECK(line.find("\"n_blocks\": 2") != std::string::npos);

  SamplePath back = parse_path_record(line);
  CHECK(back.labels == p.labels);
  CHECK(back.values == p.values);  // bitwise, thanks to 17 significant digits
  CHECK(back.replicate_id == 7);

  std::stringstream io;
  write_paths_ndjson(io, {p, p});
  io << "\n";  // blank lines are skipped
  std::vector<SamplePath> all = read_paths_ndjson(io);
  REQUIRE(all.size() == 2);
  CHECK(all[1].values == p.values);

  std::stringstream bad("{\"labels\": [0]}\n\n{\"labels\": 3}\n");
  try {
    read_paths_ndjson(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("command line end to end", "[cli]") {
  if (cli_binary().empty()) SKIP("POLYAURN_CLI not set");
  TempDir tmp;
  std::string py = tmp.file("py.json", R"({"scheme": "pitman_yor", "alpha": "1/2", "theta": 1})");
  std::string bm = tmp.file("bm.json", R"({"scheme": "blackwell_macqueen", "mu_total": 1})");
  std::string fisher3 = tmp.file("f3.json", R"({"scheme": "fisher", "N": 3, "theta": 1})");
  std::string broken = tmp.file("broken.json",
      R"({"scheme": "custom", "custom": {"psi": [1, 4, 9], "psi0": [1, 1, 1], "xi": [2, 3, 4]}})");

  SECTION("exact computations") {
    CliResult seq = run_cli("exact seq-prob --scheme-config " + py + " --labels 0,1,0");
    CHECK(seq.exit_code == 0);
    CHECK(seq.out.find("\"1/8\"") != std::string::npos);

    CliResult eppf = run_cli("exact eppf --scheme-config " + py + " --sizes 2,1");
    CHECK(eppf.exit_code == 0);
    CHECK(eppf.out.find("\"1/8\"") != std::string::npos);

    CliResult exch = run_cli("exact exch-check --scheme-config " + py + " --max-i 4");
    CHECK(exch.exit_code == 0);
    CHECK(exch.out.find("\"pass\": true") != std::string::npos);

    CliResult caught = run_cli("exact exch-check --scheme-config " + broken + " --max-i 3");
    CHECK(caught.exit_code == 1);
    CHECK(caught.out.find("\"pass\": false") != std::string::npos);
    CHECK(caught.out.find("\"permutation\"") != std::string::npos);
  }

  SECTION("counterexample") {
    CliResult r = run_cli("counterexample --r 2 --theta 1 --alpha 1/2");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"3/32\"") != std::string::npos);
    CHECK(r.out.find("\"5/64\"") != std::string::npos);
    CHECK(r.out.find("\"equal\": false") != std::string::npos);
    CHECK(r.out.find("\"routes_agree\": true") != std::string::npos);

    CliResult dp = run_cli("counterexample --r 2 --theta 1 --alpha 0");
    CHECK(dp.exit_code == 0);
    CHECK(dp.out.find("\"equal\": true") != std::string::npos);
  }

  SECTION("validate") {
    CliResult good = run_cli("validate --scheme-config " + py + " --max-i 5");
    CHECK(good.exit_code == 0);
    CHECK(good.out.find("\"pass\": true") != std::string::npos);

    CliResult bad = run_cli("validate --scheme-config " + broken + " --max-i 3");
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("\"pass\": false") != std::string::npos);
    CHECK(bad.out.find("\"witness\"") != std::string::npos);
  }

  SECTION("argument and config errors exit 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("validate").exit_code == 2);  // missing required option
    CHECK(run_cli("validate --scheme-config /nonexistent.json").exit_code == 2);
    std::string stray = tmp.file("stray.json", R"({"scheme": "iid", "theta": 1})");
    CHECK(run_cli("validate --scheme-config " + stray).exit_code == 2);
    CHECK(run_cli("sample urn --scheme-config " + py + " --n 3 --format yaml").exit_code == 2);
    CHECK(run_cli("sample stick --scheme-config " + tmp.file("iid.json", R"({"scheme": "iid"})") +
                  " --n 3").exit_code == 2);
  }

  SECTION("sampling is reproducible and schedule-independent") {
    std::string cmd = "sample urn --scheme-config " + py + " --n 5 --replicates 20 --seed 42";
    CliResult a = run_cli(cmd);
    CliResult b = run_cli(cmd);
    CliResult c = run_cli(cmd + " --threads 4");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 20);
    CHECK(a.out.find("\"replicate\": 0") != std::string::npos);
    CHECK(a.out.find("\"replicate\": 19") != std::string::npos);

    CliResult csv = run_cli(cmd + " --format csv");
    CHECK(csv.exit_code == 0);
    CHECK(csv.out.rfind("replicate,n_blocks,labels,values\n", 0) == 0);

    CliResult stick = run_cli("sample stick --scheme-config " + py +
                              " --n 4 --replicates 3 --seed 7 --k-max 100");
    CHECK(stick.exit_code == 0);
    CHECK(std::count(stick.out.begin(), stick.out.end(), '\n') == 3);

    CliResult fsh = run_cli("sample fisher --scheme-config " + fisher3 +
                            " --n 4 --replicates 3 --seed 7");
    CHECK(fsh.exit_code == 0);
    CHECK(std::count(fsh.out.begin(), fsh.out.end(), '\n') == 3);

    CliResult atoms = run_cli("sample urn --scheme-config " + bm +
                              " --n 6 --replicates 2 --seed 1 --atoms 2");
    CHECK(atoms.exit_code == 0);
    CHECK(std::count(atoms.out.begin(), atoms.out.end(), '\n') == 2);
  }

  SECTION("diagnostics") {
    CliResult atrace = run_cli("diagnose a-trace --scheme-config " + bm + " --i-max 4");
    CHECK(atrace.exit_code == 0);
    CHECK(atrace.out.find("\"1/5\"") != std::string::npos);

    CliResult emp = run_cli("diagnose a-trace --scheme-config " + bm +
                            " --i-max 3 --mode empirical --replicates 200");
    CHECK(emp.exit_code == 0);
    CHECK(emp.out.find("\"exact\": false") != std::string::npos);

    CliResult fdp = run_cli("diagnose fisher-dp --N 100 --theta 1 --i 2");
    CHECK(fdp.exit_code == 0);
    CHECK(fdp.out.find("\"1/200\"") != std::string::npos);

    std::string paths = (tmp.path / "paths.ndjson").string();
    CHECK(run_cli("sample urn --scheme-config " + py +
                  " --n 3 --replicates 400 --seed 5 --out " + paths).exit_code == 0);
    CliResult cmp = run_cli("diagnose compare --scheme-config " + py + " --paths " + paths);
    CHECK(cmp.exit_code == 0);
    CHECK(cmp.out.find("\"chi_square\"") != std::string::npos);
    CHECK(cmp.out.find("\"p_value\"") != std::string::npos);

    CliResult cmp2 = run_cli("diagnose compare --paths " + paths + " --paths-b " + paths);
    CHECK(cmp2.exit_code == 0);
    CHECK(cmp2.out.find("\"tv\": 0") != std::string::npos);

    CliResult conv = run_cli("diagnose converge --scheme-config " + bm +
                             " --n 30 --checkpoints 1,10,30 --seed 3");
    CHECK(conv.exit_code == 0);
    CHECK(conv.out.find("\"trace\"") != std::string::npos);

    CliResult indep = run_cli("diagnose independence --scheme-config " + py +
                              " --n 10 --replicates 300 --seed 9");
    CHECK(indep.exit_code == 0);
    CHECK(indep.out.find("\"spearman_rho\"") != std::string::npos);
  }
}
