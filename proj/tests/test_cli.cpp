#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "stablegof/estimators.hpp"
#include "stablegof/random.hpp"
#include "stablegof/stable.hpp"

using namespace stablegof;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("stablegof_cli_" + std::to_string(::getpid()));
        fs::create_directories(dir / "cache");
        ::setenv("STABLEGOF_CACHE_DIR", (dir / "cache").c_str(), 1);
        ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& text) const {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

const Scratch& scratch() {
    static const Scratch s;
    return s;
}

std::string stable_data(double alpha, int n, std::uint64_t seed) {
    UniformSource u(seed);
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < n; ++i) os << rand_stable(alpha, u) << "\n";
    return os.str();
}

std::map<std::string, std::string> key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto c = line.find(',');
        if (c != std::string::npos) kv[line.substr(0, c)] = line.substr(c + 1);
    }
    return kv;
}

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("estimate reports asymptotic standard errors") {
    const std::string f = scratch().file("x.txt", stable_data(1.5, 300, 5));
    const Run r = run({"estimate", f});
    REQUIRE(r.code == cli::kOk);
    auto kv = key_values(r.out);
    const double alpha = std::stod(kv.at("alpha"));
    CHECK(alpha == doctest::Approx(1.5).epsilon(0.2));
    const double expect = std::sqrt(fisher_info(alpha).inverse()(2, 2) / 300.0);
    CHECK(std::stod(kv.at("se_alpha")) == doctest::Approx(expect).epsilon(1e-6));
    CHECK(kv.at("converged") == "true");

    const Run fixed = run({"estimate", f, "--alpha0", "1.5"});
    REQUIRE(fixed.code == cli::kOk);
    CHECK(key_values(fixed.out).at("alpha") == "1.5");
    CHECK(key_values(fixed.out).at("se_alpha") == "nan");
}

TEST_CASE("bad inputs map to exit codes") {
    CHECK(run({"estimate", scratch().file("empty.txt", "")}).code == cli::kInput);
    const Run c = run({"estimate", scratch().file("const.txt", "2\n2\n2\n2\n2\n")});
    CHECK(c.code == cli::kInput);
    CHECK(c.err.find("degenerate sample") != std::string::npos);
    CHECK(run({"estimate", scratch().file("junk.txt", "1\nabc\n")}).code == cli::kInput);
    CHECK(run({"estimate", scratch().path("missing.txt")}).code == cli::kInput);
    CHECK(run({"bogus"}).code == cli::kUsage);
    const std::string f = scratch().file("y.txt", stable_data(1.5, 100, 6));
    CHECK(run({"test", f, "--kappa", "1", "--hypothesis", "H2"}).code == cli::kUsage);
}

TEST_CASE("table reproduces tabulated values and is cached") {
    const std::string out = scratch().path("t.csv");
    const Run r = run({"table", "--alpha", "1.0,1.5", "--kappa", "1,2.5", "-o", out});
    REQUIRE(r.code == cli::kOk);
    std::map<std::string, double> got;
    std::istringstream is(slurp(out));
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("alpha", 0) == 0) continue;
        std::istringstream ls(line);
        std::string a, k, xi, v;
        std::getline(ls, a, ',');
        std::getline(ls, k, ',');
        std::getline(ls, xi, ',');
        std::getline(ls, v, ',');
        got[a + "/" + k + "/" + xi] = std::stod(v);
    }
    CHECK(got.size() == 8);
    CHECK(got.at("1/1/0.1") == doctest::Approx(0.988).epsilon(0.02));
    CHECK(got.at("1/1/0.05") == doctest::Approx(1.130).epsilon(0.02));

    const std::string again = scratch().path("t2.csv");
    REQUIRE(run({"table", "--alpha", "1.0,1.5", "--kappa", "1,2.5", "-o", again}).code == cli::kOk);
    CHECK(slurp(out) == slurp(again));
    CHECK(!fs::is_empty(scratch().dir / "cache"));
}

TEST_CASE("test needs a table covering the requested cell") {
    const std::string f = scratch().file("z.txt", stable_data(1.5, 100, 7));
    const Run none = run({"test", f, "--kappa", "1"});
    CHECK(none.code == cli::kInput);
    CHECK(none.err.find("stablegof table") != std::string::npos);

    const std::string tab = scratch().path("h2.csv");
    REQUIRE(run({"table", "--hypothesis", "H2", "--alpha", "1.5", "--kappa", "2.5", "-o", tab}).code == cli::kOk);
    const Run miss = run({"test", f, "--kappa", "1", "--hypothesis", "H2", "--alpha0", "1.5", "--table", tab});
    CHECK(miss.code == cli::kInput);
    CHECK(miss.err.find("stablegof table") != std::string::npos);
    const Run ok = run({"test", f, "--kappa", "2.5", "--hypothesis", "H2", "--alpha0", "1.5", "--table", tab, "--csv"});
    CHECK(ok.code == cli::kOk);
    CHECK(ok.out.find("0.1404") != std::string::npos);
}

TEST_CASE("simulate is reproducible and validates its config") {
    const std::string cfg = scratch().file("sim.ini",
                                           "[null]\nn = 30\nalpha = 1.5\nkappa = 1, 2.5\nreplications = 100\n"
                                           "seed = 11\n");
    const std::string a = scratch().path("a.csv"), b = scratch().path("b.csv");
    REQUIRE(run({"simulate", cfg, "-o", a}).code == cli::kOk);
    REQUIRE(run({"simulate", cfg, "-o", b, "--threads", "1"}).code == cli::kOk);
    auto body = [](const std::string& s) { return s.substr(s.find("# created")); };
    CHECK(body(slurp(a)) == body(slurp(b)));
    CHECK(slurp(a).find("null,critical,30,1.5") != std::string::npos);

    CHECK(run({"simulate", scratch().file("zero.ini", "[x]\nreplications = 0\n")}).code == cli::kInput);
    CHECK(run({"simulate", scratch().file("typo.ini", "[x]\nreplicatons = 200\n")}).code == cli::kInput);
}
