#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "kplane/kernels.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string cli = KPLANE_CLI_PATH;

struct Workdir {
    fs::path path;
    Workdir() {
        path = fs::temp_directory_path() / ("kplane_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
    std::string out(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const int rc = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Csv {
    std::string meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& path) {
    Csv csv;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            csv.meta = line.substr(2);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header_done) {
            csv.columns = cells;
            header_done = true;
        } else {
            std::vector<double> row;
            for (const auto& c : cells) row.push_back(std::stod(c));
            csv.rows.push_back(row);
        }
    }
    return csv;
}

}  // namespace

TEST_CASE("kernel subcommand writes a parseable table") {
    Workdir wd;
    const std::string out = wd.out("kern");
    CHECK(run("kernel --n 2 --k 1 --family theoremA --r-min 0.5 --r-max 4 --samples 16 --out " +
              out + " --quiet") == 0);
    auto csv = parse_csv(out + ".csv");
    REQUIRE(csv.columns == std::vector<std::string>{"r", "w", "psi"});
    REQUIRE(csv.rows.size() == 16);
    CHECK(csv.meta.find("family=theoremA") != std::string::npos);
    CHECK(csv.meta.find("lambda=") != std::string::npos);
    // inside the unit ball both w and psi are 1 for this pair
    for (const auto& row : csv.rows)
        if (row[0] <= 1.0) {
            CHECK(row[1] == 1.0);
            CHECK(row[2] == 1.0);
        }
}

TEST_CASE("kernel subcommand finds the sign change of the plane kernel") {
    Workdir wd;
    const std::string out = wd.out("kern42");
    CHECK(run("kernel --n 4 --k 2 --family theoremB --r-min 1.2 --r-max 1.4 --samples 200 --out " +
              out + " --quiet") == 0);
    auto csv = parse_csv(out + ".csv");
    // w = (5-3r^2)/(2r^7) vanishes at r = sqrt(5/3) ~ 1.29099
    double best_r = 0.0, best_w = 1e9;
    for (const auto& row : csv.rows)
        if (std::abs(row[1]) < std::abs(best_w)) {
            best_r = row[0];
            best_w = row[1];
        }
    CHECK(best_r == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-2));
    CHECK(std::abs(best_w) < 1e-3);
}

TEST_CASE("residual subcommand passes for matched pairs") {
    Workdir wd;
    CHECK(run("residual --n 2 --k 1 --family theoremA --tol 1e-6 --out " + wd.out("r21") +
              " --quiet") == 0);
    CHECK(run("residual --n 4 --k 2 --family theoremB --tol 1e-6 --out " + wd.out("r42") +
              " --quiet") == 0);
    auto csv = parse_csv(wd.out("r42") + ".csv");
    REQUIRE(csv.columns == std::vector<std::string>{"r", "lhs", "rhs", "abs_err", "ok"});
    for (const auto& row : csv.rows) {
        CHECK(row[3] <= 1e-6);
        CHECK(row[4] == 1.0);
    }
}

TEST_CASE("residual subcommand fails an impossible tolerance with exit 1") {
    Workdir wd;
    const std::string out = wd.out("rtight");
    CHECK(run("residual --n 4 --k 2 --family theoremB --tol 1e-30 --out " + out +
              " --quiet") == 1);
    CHECK(fs::exists(out + ".csv"));  // report still written
}

TEST_CASE("indicator mollifier with k >= 2 is refused") {
    Workdir wd;
    CHECK(run("residual --n 4 --k 2 --family theoremB --psi indicator --out " +
              wd.out("ref") + " --quiet") == 2);
    const int rc = std::system(
        (cli + " residual --n 4 --k 2 --family theoremB --psi indicator --out " +
         wd.out("ref2") + " 2>" + wd.out("err.txt") + " >/dev/null")
            .c_str());
    CHECK(WEXITSTATUS(rc) == 2);
    const std::string err = slurp(wd.out("err.txt"));
    CHECK(err.find("obstruction constant -1") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2") {
    Workdir wd;
    CHECK(run("kernel --n 2 --k 1 --r-min 0 --out " + wd.out("u1") + " --quiet") == 2);
    CHECK(run("invert --n 2 --k 1 --x 0.5,0 --steps 0 --out " + wd.out("u2") + " --quiet") == 2);
    CHECK(run("identity --n 2 --k 3 --out " + wd.out("u3") + " --quiet") == 2);  // k >= n
    CHECK(run("kernel --n 2 --k 1 --family theoremC --out " + wd.out("u4") + " --quiet") == 2);
    CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("identity subcommand, reduced and mc engines") {
    Workdir wd;
    CHECK(run("identity --n 3 --k 2 --family theoremB --a 0.5 --points 3 --tol 1e-4 --out " +
              wd.out("idr") + " --quiet") == 0);
    auto csv = parse_csv(wd.out("idr") + ".csv");
    for (const auto& row : csv.rows) CHECK(row[3] <= 1e-4);
    CHECK(run("identity --n 3 --k 2 --family theoremB --a 0.5 --points 3 --engine mc "
              "--samples 5000 --seed 7 --out " +
              wd.out("idm") + " --quiet") == 0);
}

TEST_CASE("invert subcommand reports a converging sweep") {
    Workdir wd;
    const std::string out = wd.out("inv");
    CHECK(run("invert --n 2 --k 1 --family theoremA --x 0.5,0 --a-start 1 --factor 0.5 "
              "--steps 6 --out " + out + " --quiet") == 0);
    auto csv = parse_csv(out + ".csv");
    REQUIRE(csv.columns ==
            std::vector<std::string>{"a", "estimate", "abs_err", "observed_order", "ok"});
    REQUIRE(csv.rows.size() == 6);
    for (std::size_t i = 1; i < csv.rows.size(); ++i) CHECK(csv.rows[i][2] < csv.rows[i - 1][2]);
}

TEST_CASE("infeasible subcommand tabulates obstruction constants") {
    Workdir wd;
    CHECK(run("infeasible --all --out " + wd.out("inf") + " --quiet") == 0);
    auto csv = parse_csv(wd.out("inf") + ".csv");
    CHECK(csv.rows.size() == 21);  // pairs with 2 <= k < n <= 8
    for (const auto& row : csv.rows) {
        CHECK(row[2] < 0.0);                       // all nonzero, negative
        CHECK(std::abs(row[2] - row[3]) < 1e-10);  // closed form vs quadrature
    }
    CHECK(run("infeasible --n 3 --k 1 --out " + wd.out("inf1") + " --quiet") == 2);
}

TEST_CASE("deterministic reruns are byte-identical") {
    Workdir wd;
    const std::string args =
        "identity --n 4 --k 2 --family theoremB --a 0.25 --points 3 --out ";
    CHECK(run(args + wd.out("d1") + " --quiet") == 0);
    CHECK(run(args + wd.out("d2") + " --quiet") == 0);
    CHECK(slurp(wd.out("d1") + ".csv") == slurp(wd.out("d2") + ".csv"));
    // the MC engine is deterministic given the seed
    const std::string mc_args =
        "identity --n 3 --k 1 --a 0.5 --points 2 --engine mc --samples 2000 --seed 11 --out ";
    CHECK(run(mc_args + wd.out("m1") + " --quiet") == 0);
    CHECK(run(mc_args + wd.out("m2") + " --quiet") == 0);
    CHECK(slurp(wd.out("m1") + ".csv") == slurp(wd.out("m2") + ".csv"));
}

TEST_CASE("manifest references existing files and parses back") {
    Workdir wd;
    const std::string out = wd.out("man");
    CHECK(run("kernel --n 2 --k 1 --seed 5 --out " + out + " --quiet") == 0);
    const json manifest = json::parse(slurp(out + ".manifest.json"));
    CHECK(manifest.at("command") == "kernel");
    CHECK(manifest.at("seed") == 5);
    CHECK(manifest.at("tool_version").is_string());
    const std::string ts = manifest.at("timestamp");
    CHECK(ts.size() == 20);  // YYYY-MM-DDTHH:MM:SSZ
    CHECK(ts[4] == '-');
    CHECK(ts[10] == 'T');
    CHECK(ts.back() == 'Z');
    CHECK(manifest.at("parameters").at("n") == "2");
    for (const auto& p : manifest.at("output_paths")) {
        CHECK(fs::exists(p.get<std::string>()));
    }
    // JSON mirror carries the same table
    const json mirror = json::parse(slurp(out + ".json"));
    CHECK(mirror.at("columns") == json::array({"r", "w", "psi"}));
    CHECK(mirror.at("rows").size() == 200);
}

TEST_CASE("csv values round-trip at full double precision") {
    Workdir wd;
    const std::string out = wd.out("digits");
    CHECK(run("kernel --n 2 --k 1 --r-min 1.5 --r-max 3 --samples 4 --out " + out +
              " --quiet") == 0);
    auto csv = parse_csv(out + ".csv");
    // 17 significant digits reproduce the exact double the library computes
    for (const auto& row : csv.rows)
        CHECK(row[1] == kplane::w_xray_eval(2, row[0], kplane::XrayMethod::ClosedForm));
}
