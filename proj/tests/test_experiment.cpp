#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "carpet/error.hpp"
#include "carpet/experiment.hpp"
#include "oracles.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace carpet;
namespace fs = std::filesystem;

namespace {

const char* kFiles[] = {"dimension.csv", "antichain.csv", "certificates.csv", "quantize.csv", "summary.csv"};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("carpetq_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

RunConfig small_config(const fs::path& out) {
    RunConfig rc;
    rc.carpet_path = CARPET_DATA_DIR "/desk1.json";
    rc.r_values = {2.0};
    rc.j_values = {0, 1, 2, 3};
    rc.k_grid = {1, 2, 4};
    rc.samples = 5000;
    rc.restarts = 2;
    rc.output_dir = out.string();
    return rc;
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("csv formatting") {
    CHECK(csv_number(0.1) == "0.10000000000000001");
    CHECK(csv_number(2.0) == "2");
    CHECK(csv_number(1e-20) == "9.9999999999999995e-21");
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_row({"a", "b,c"}) == "a,\"b,c\"\r\n");
}

TEST_CASE("list parsing") {
    CHECK(parse_real_list("0.5,1,2") == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(parse_int_list("0:3") == std::vector<int>{0, 1, 2, 3});
    CHECK(parse_int_list("0:2,7") == std::vector<int>{0, 1, 2, 7});
    CHECK_THROWS_AS(parse_int_list("3:1"), CarpetError);
    CHECK_THROWS_AS(parse_int_list("x"), CarpetError);
    CHECK_THROWS_AS(parse_real_list(""), CarpetError);
    CHECK_THROWS_AS(parse_real_list("1,abc"), CarpetError);
}

TEST_CASE("dimension csv") {
    const CarpetSpec spec = oracle::desk1();
    const std::vector<double> rs{0.5, 1, 2, 3};
    const std::string csv = dimension_csv(spec, rs);
    CHECK(csv.rfind("r,s_r,P_r,Q_r,eta_lo,eta_hi,H1,xi,M,H2,H3,H4,H5\r\n", 0) == 0);
    CHECK(lines(csv) == 5);
    CHECK(csv.find("\r\n2,1.36115764585981") != std::string::npos);
}

TEST_CASE("run writes five files and is reproducible") {
    const fs::path a = scratch("run_a"), b = scratch("run_b");
    const RunOutcome first = run(small_config(a));
    CHECK(first.exit_code == kExitPass);
    CHECK(first.message.empty());
    CHECK(first.files.size() == 5);
    const RunOutcome second = run(small_config(b));
    CHECK(second.exit_code == kExitPass);
    for (const char* f : kFiles) {
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const std::string summary = slurp(a / "summary.csv");
    CHECK(summary.rfind("r,s_r,slope,slope_err,band_ratio,all_certificates_pass\r\n", 0) == 0);
    CHECK(lines(summary) == 2);
    CHECK(summary.find(",true\r\n") != std::string::npos);
    CHECK(lines(slurp(a / "antichain.csv")) == 5);
    CHECK(lines(slurp(a / "quantize.csv")) == 4);
}

TEST_CASE("summary has one row per r") {
    const fs::path out = scratch("multi_r");
    RunConfig rc = small_config(out);
    rc.r_values = {1.0, 2.0};
    rc.j_values = {0, 1, 2};
    CHECK(run(rc).exit_code == kExitPass);
    CHECK(lines(slurp(out / "summary.csv")) == 3);
    CHECK(lines(slurp(out / "dimension.csv")) == 3);
}

TEST_CASE("invalid carpet stops before any output") {
    const fs::path dir = scratch("bad_grid");
    write(dir / "bad.json", R"({"m":3,"n":3,"entries":[[0,0,0.5],[1,1,0.5]]})");
    RunConfig rc = small_config(dir / "out");
    rc.carpet_path = (dir / "bad.json").string();
    const RunOutcome o = run(rc);
    CHECK(o.exit_code == kExitConfigError);
    CHECK(o.message.find("DegenerateGrid") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out"));

    rc = small_config(dir / "out");
    rc.carpet_path = (dir / "missing.json").string();
    CHECK(run(rc).exit_code == kExitConfigError);
}

TEST_CASE("invalid run settings are config errors") {
    const fs::path dir = scratch("bad_settings");
    RunConfig rc = small_config(dir / "out");
    rc.k_grid = {1, 10000};
    CHECK(run(rc).exit_code == kExitConfigError);
    rc = small_config(dir / "out");
    rc.r_values = {-1.0};
    CHECK(run(rc).exit_code == kExitConfigError);
    rc = small_config(dir / "out");
    rc.j_values = {-2};
    CHECK(run(rc).exit_code == kExitConfigError);
    CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("resource cap gives exit 3 and keeps partial output") {
    const fs::path out = scratch("capped");
    RunConfig rc = small_config(out);
    rc.j_values = {0, 5};
    rc.cap = 500;
    const RunOutcome o = run(rc);
    CHECK(o.exit_code == kExitResourceCap);
    CHECK(fs::exists(out / "dimension.csv"));
    CHECK(fs::exists(out / "certificates.csv"));
    CHECK(slurp(out / "certificates.csv").find(",cap,") != std::string::npos);
}

TEST_CASE("cli exit codes") {
    const std::string exe = CARPETQ_PATH;
    const std::string cfg = CARPET_DATA_DIR "/desk1.json";
    const fs::path dir = scratch("cli");
    CHECK(shell(exe + " validate --config " + cfg + " > /dev/null") == 0);
    CHECK(shell(exe + " dimension --config " + cfg + " --r 0.5,2 > " + (dir / "dim.csv").string()) == 0);
    CHECK(lines(slurp(dir / "dim.csv")) == 3);
    CHECK(shell(exe + " antichain --config " + cfg + " --r 2 --j 0:3 > " + (dir / "a.csv").string()) == 0);
    CHECK(slurp(dir / "a.csv").rfind("j,psi,k1,k2,sumE,H1_bound_ok,lemma31_max_ratio,lemma41_max_ratio,phi,s12_ok\r\n", 0) == 0);
    CHECK(shell(exe + " antichain --config " + cfg + " --r 2 --j 6 --cap 50 > /dev/null 2>&1") == 3);
    CHECK(shell(exe + " quantize --config " + cfg + " --r 2 --k 1,2 --samples 2000 --seed 3 > " +
                (dir / "q.csv").string()) == 0);
    CHECK(slurp(dir / "q.csv").rfind("k,e_k_r,iters,restarts_used\r\n", 0) == 0);
    CHECK(shell(exe + " proxy --config " + cfg + " --j 0:2 --samples 2000 > " + (dir / "p.csv").string()) == 0);
    CHECK(slurp(dir / "p.csv").rfind("j,psi,proxy,antichain_distortion\r\n0,2,0.25,", 0) == 0);

    write(dir / "bad.json", R"({"m":3,"n":3,"entries":[[0,0,0.5],[1,1,0.5]]})");
    CHECK(shell(exe + " validate --config " + (dir / "bad.json").string() + " 2> /dev/null") == 2);
    CHECK(shell(exe + " run --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string() +
                " 2> /dev/null") == 2);
    CHECK(shell(exe + " dimension --config " + cfg + " --r abc 2> /dev/null") == 2);
    CHECK(shell(exe + " nosuchcommand > /dev/null 2>&1") == 2);
}
