// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "psl2/spectra_data.hpp"

using namespace psl2;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() / ("psl2_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& text) const {
        auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

const char* manifest10 = "source=test\nN=10\nkappa_max=20\nprecision=1e-8\nnormalization_tag=cosh_normalized\n";
const char* header10 = "kappa,epsilon,norm_sq_rho1,t2,t3,t4,t5,t6,t7,t8,t9,t10\n";

std::string read_file(const std::string& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fixture_row(std::size_t i) {
    std::ifstream in(PSL2_TEST_DATA "/fixture10.csv");
    std::string line;
    for (std::size_t k = 0; k <= i; ++k) std::getline(in, line);
    std::getline(in, line);
    return line;
}

} // namespace

TEST_CASE("fixture loads in ascending kappa", "[spectra-data]") {
    auto ds = load(PSL2_TEST_DATA "/fixture10.csv");
    REQUIRE(ds.forms.size() == 10);
    for (std::size_t i = 1; i < ds.forms.size(); ++i) CHECK(ds.forms[i].kappa > ds.forms[i - 1].kappa);
    CHECK(ds.forms[0].kappa == Catch::Approx(9.533695261353559).epsilon(1e-15));
    CHECK(ds.forms[0].epsilon == -1);
    CHECK(ds.manifest.N == 10);
    CHECK(ds.complete_kappa() == 19.5);
    CHECK(validate(ds).pass());
}

TEST_CASE("empty table with a valid header", "[spectra-data]") {
    TempDir t;
    t.file("e.manifest", manifest10);
    auto ds = load(t.file("e.csv", header10));
    CHECK(ds.forms.empty());
    CHECK(validate(ds).pass());
}

TEST_CASE("malformed rows name the line", "[spectra-data]") {
    TempDir t;
    t.file("m.manifest", manifest10);
    std::string text = std::string(header10) + fixture_row(0) + "\n9.9,1,1.0,0.1,0.2\n";
    auto p = t.file("m.csv", text);
    try {
        load(p);
        FAIL("expected data_error");
    } catch (const data_error& e) {
        std::string w = e.what();
        CHECK(w.find(":3") != std::string::npos);
        CHECK(w.find("row 2") != std::string::npos);
    }
    t.file("n.manifest", manifest10);
    auto q = t.file("n.csv", std::string(header10) + "9.5x,1,1,0,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(load(q), data_error);
    t.file("z.manifest", manifest10);
    auto z = t.file("z.csv", std::string(header10) + "9.533695261353559,0,1,0,0,0,0,0,0,0,0,0\n");
    CHECK_THROWS_AS(load(z), data_error);
    t.file("h.manifest", manifest10);
    CHECK_THROWS_AS(load(t.file("h.csv", "kappa,eps,norm_sq_rho1,t2\n")), data_error);
    CHECK_THROWS_AS(load(t.file("nomanifest.csv", header10)), data_error);
}

TEST_CASE("validation flags a kappa below the bound", "[spectra-data][validation]") {
    auto ds = load(PSL2_TEST_DATA "/bad_kappa.csv");
    auto rep = validate(ds);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.records[0].spectral_ok);
    std::ostringstream os;
    write_validation(os, ds, rep);
    CHECK(os.str().find("result: FAIL") != std::string::npos);
}

TEST_CASE("validation flags broken multiplicativity", "[spectra-data][validation]") {
    auto ds = load(PSL2_TEST_DATA "/fixture10.csv");
    ds.forms[3].hecke[6] += 1e-4;
    auto rep = validate(ds);
    CHECK_FALSE(rep.pass());
    CHECK_FALSE(rep.records[3].hecke_ok);
    CHECK(rep.records[3].hecke_residual == Catch::Approx(1e-4).epsilon(1e-3));
    CHECK(rep.records[2].pass());
    CHECK(rep.failures() == 1);
}

TEST_CASE("normalization", "[spectra-data]") {
    auto ds = load(PSL2_TEST_DATA "/fixture10.csv");
    for (auto& r : ds.forms) {
        cplx a = normalize(r, 1), b = normalize(r, -1);
        CHECK(a.real() > 0.0);
        CHECK(b == double(r.epsilon) * a);
        CHECK(std::abs(std::abs(normalize(r, 2) / a) - std::abs(r.t(2))) < 1e-14);
        CHECK(r.t(6) == Catch::Approx(r.t(2) * r.t(3)).margin(1e-7));
        // cosh-normalized values carry the factor 1/4
        CHECK(std::norm(a) == Catch::Approx(r.norm_sq_rho1 / 4.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(normalize(ds.forms[0], 0), precondition_error);
    auto full = load(PSL2_DATA "/maass_sl2z.csv");
    REQUIRE_FALSE(full.holo.empty());
    CHECK(normalize(full.holo[0], -3) == 0.0);
    CHECK(std::abs(normalize(full.holo[0], 1)) > 0.0);
    CHECK(parse_normalization_tag("varrho") == NormalizationTag::varrho);
    CHECK_THROWS_AS(parse_normalization_tag("unit"), data_error);
}

TEST_CASE("CSV and JSON roundtrip bit-exactly", "[spectra-data]") {
    TempDir t;
    auto ds = load(PSL2_DATA "/maass_sl2z.csv");
    auto j = (t.dir / "rt.json").string();
    auto c = (t.dir / "rt.csv").string();
    save(ds, j);
    auto a = load(j);
    save(a, c);
    auto b = load(c);
    for (const auto* x : {&a, &b}) {
        REQUIRE(x->forms.size() == ds.forms.size());
        REQUIRE(x->holo.size() == ds.holo.size());
        for (std::size_t i = 0; i < ds.forms.size(); ++i) {
            CHECK(x->forms[i].kappa == ds.forms[i].kappa);
            CHECK(x->forms[i].epsilon == ds.forms[i].epsilon);
            CHECK(x->forms[i].norm_sq_rho1 == ds.forms[i].norm_sq_rho1);
            CHECK(x->forms[i].hecke == ds.forms[i].hecke);
        }
        for (std::size_t i = 0; i < ds.holo.size(); ++i) {
            CHECK(x->holo[i].k == ds.holo[i].k);
            CHECK(x->holo[i].norm_sq_rho1 == ds.holo[i].norm_sq_rho1);
            CHECK(x->holo[i].hecke == ds.holo[i].hecke);
        }
        CHECK(x->manifest.kappa_max == ds.manifest.kappa_max);
        CHECK(x->manifest.complete_below == ds.manifest.complete_below);
    }
    // the shipped JSON agrees with the shipped CSV
    auto shipped = load(PSL2_DATA "/maass_sl2z.json");
    REQUIRE(shipped.forms.size() == ds.forms.size());
    for (std::size_t i = 0; i < ds.forms.size(); ++i) CHECK(shipped.forms[i].kappa == ds.forms[i].kappa);
}

TEST_CASE("unknown normalization tag in a manifest is an error", "[spectra-data]") {
    TempDir t;
    t.file("u.manifest", "source=test\nN=10\nkappa_max=20\nprecision=1e-8\nnormalization_tag=mystery\n");
    CHECK_THROWS_AS(load(t.file("u.csv", header10)), data_error);
    auto j = t.file("u.json", R"({"manifest":{"source":"x","N":2,"kappa_max":10,"precision":1e-8,"normalization_tag":"mystery"},"forms":[]})");
    CHECK_THROWS_AS(load(j), data_error);
    CHECK_THROWS_AS(load(t.file("broken.json", "{ not json")), data_error);
}

TEST_CASE("the shipped dataset validates", "[spectra-data][validation]") {
    auto ds = load(PSL2_DATA "/maass_sl2z.csv");
    auto rep = validate(ds);
    CHECK(rep.pass());
    CHECK(rep.fitted_bound_constant < rep.bound_limit);
    CHECK(ds.forms.size() == 99);
    CHECK(ds.holo.size() == 8);
    std::size_t even = 0;
    for (auto& r : ds.forms) even += r.epsilon == 1;
    CHECK(even == 38);
    std::ostringstream os;
    write_validation(os, ds, rep);
    CHECK(os.str().find("result: PASS") != std::string::npos);
    CHECK(os.str() == read_file(PSL2_DATA "/VALIDATION.txt"));
}
