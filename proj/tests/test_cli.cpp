// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "psl2/cli.hpp"

using namespace psl2;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "psl2");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& text) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST_CASE("complex literals", "[cli]") {
    CHECK(parse_complex("2.5") == cplx(2.5, 0.0));
    CHECK(parse_complex("3i") == cplx(0.0, 3.0));
    CHECK(parse_complex("0.3+2i") == cplx(0.3, 2.0));
    CHECK(parse_complex("0.3-2i") == cplx(0.3, -2.0));
    CHECK(parse_complex("i") == cplx(0.0, 1.0));
    CHECK(parse_complex("-i") == cplx(0.0, -1.0));
    CHECK(parse_complex("1e-3-2e-2i") == cplx(1e-3, -2e-2));
    CHECK(parse_complex("-1.5e+1+i") == cplx(-15.0, 1.0));
    CHECK(parse_complex(" 1 + 2j ") == cplx(1.0, 2.0));
    for (auto bad : {"", "abc", "1+", "2ii", "1+xi", "nan"}) {
        INFO("'" << bad << "'");
        CHECK_THROWS_AS(parse_complex(bad), precondition_error);
    }
}

TEST_CASE("exit codes", "[cli]") {
    CHECK(run_cli({"eval", "kloosterman", "--m", "1", "--n", "1", "--ell", "3"}).code == cli::exit_pass);
    CHECK(run_cli({"verify", "gram", "--nu", "0.5i", "--pmax", "2"}).code == cli::exit_pass);
    CHECK(run_cli({}).code == cli::exit_usage);
    CHECK(run_cli({"eval", "nonsense"}).code == cli::exit_usage);
    CHECK(run_cli({"eval", "kloosterman", "--m", "1"}).code == cli::exit_usage);
    CHECK(run_cli({"eval", "kloosterman", "--m", "x", "--n", "1", "--ell", "3"}).code == cli::exit_usage);
    CHECK(run_cli({"eval", "gamma-p", "--p", "1", "--s", "0.5", "--nu", "0.3+"}).code == cli::exit_usage);
    CHECK(run_cli({"eval", "kloosterman", "--frobnicate", "1"}).code == cli::exit_usage);
    CHECK(run_cli({"verify", "nosuchsuite"}).code == cli::exit_usage);
    auto missing = run_cli({"trace", "--dataset", "/nonexistent/set.csv"});
    CHECK(missing.code == cli::exit_data);
    CHECK(missing.out.empty());
    auto bad = run_cli({"trace", "--dataset", PSL2_TEST_DATA "/bad_kappa.csv"});
    CHECK(bad.code == cli::exit_data);
    CHECK(bad.out.empty());
    CHECK(run_cli({"--help"}).code == cli::exit_pass);
}

TEST_CASE("config files and flag precedence", "[cli]") {
    auto cfg = temp_file("psl2_cli_test.cfg", "# Kloosterman sum\nm = 2\nn=3\nell=7\n");
    auto a = run_cli({"eval", "kloosterman", "--config", cfg});
    REQUIRE(a.code == 0);
    CHECK(a.out.find("m=2 n=3 ell=7") != std::string::npos);
    auto b = run_cli({"eval", "kloosterman", "--config", cfg, "--ell", "5"});
    REQUIRE(b.code == 0);
    CHECK(b.out.find("ell=5") != std::string::npos);
    auto c = cli::read_config(temp_file("psl2_cli_test2.cfg", "nu_cutoff=30\n"));
    CHECK(c.at("nu-cutoff") == "30");
    CHECK_THROWS_AS(cli::read_config(temp_file("psl2_cli_test3.cfg", "warp=9\n")), precondition_error);
    CHECK_THROWS_AS(cli::read_config(temp_file("psl2_cli_test4.cfg", "justtext\n")), precondition_error);
    CHECK(run_cli({"eval", "kloosterman", "--config", "/nonexistent.cfg"}).code != 0);
}

TEST_CASE("records output is deterministic", "[cli]") {
    std::vector<std::string> args = {"verify", "lie", "--points", "5", "--format", "records"};
    auto a = run_cli(args), b = run_cli(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind(record_header(), 0) == 0);
    auto c = run_cli({"verify", "lie", "--points", "5", "--format", "records", "--seed", "7"});
    CHECK(c.out != a.out);
    // --timing goes to stderr and leaves stdout alone
    auto d = run_cli({"verify", "lie", "--points", "5", "--format", "records", "--timing"});
    CHECK(d.out == a.out);
    CHECK(d.err.find("wall time") != std::string::npos);
}

TEST_CASE("CLI values equal the library", "[cli]") {
    auto r = run_cli({"eval", "gamma-p", "--p", "1", "--s", "0.8+0.3i", "--nu", "0.4i", "--format", "records"});
    REQUIRE(r.code == 0);
    std::string expect = format_complex(gamma_p(1, cplx(0.8, 0.3), cplx(0.0, 0.4)));
    CHECK(r.out.find(expect) != std::string::npos);
    auto k = run_cli({"eval", "bessel-kernel", "--nu", "3i", "--u", "1.3", "--format", "records"});
    REQUIRE(k.code == 0);
    CHECK(k.out.find(format_complex(bessel_kernel(cplx(0.0, 3.0), 1.3))) != std::string::npos);
    auto h = run_cli({"eval", "kloosterman", "--m", "4", "--n", "-6", "--ell", "25"});
    CHECK(h.out.find(format_complex(kloosterman_sum(4, -6, 25), cli::human_digits)) != std::string::npos);
}
