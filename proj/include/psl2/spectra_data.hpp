// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "error.hpp"
#include "spectral.hpp"
#include "specfun/complex.hpp"
#include "specfun/gamma.hpp"

namespace psl2 {

// Convention of the stored first-coefficient norm.
//   cosh_normalized   Maass: |rho(1)|^2 / cosh(pi kappa), rho the L^2-normalized Fourier coefficient
//   rho_squared       Maass: |rho(1)|^2 itself
//   petersson_inverse holomorphic: 1 / <f, f> for the Hecke eigenform f with a(1) = 1
//   varrho            either: |varrho_V(1)|^2 in the normalization of the sum formulas
enum class NormalizationTag { cosh_normalized, rho_squared, petersson_inverse, varrho };

inline NormalizationTag parse_normalization_tag(const std::string& s) {
    if (s == "cosh_normalized") return NormalizationTag::cosh_normalized;
    if (s == "rho_squared") return NormalizationTag::rho_squared;
    if (s == "petersson_inverse") return NormalizationTag::petersson_inverse;
    if (s == "varrho") return NormalizationTag::varrho;
    throw data_error("unknown normalization_tag '" + s + "'");
}

inline const char* to_string(NormalizationTag t) {
    switch (t) {
        case NormalizationTag::cosh_normalized: return "cosh_normalized";
        case NormalizationTag::rho_squared: return "rho_squared";
        case NormalizationTag::petersson_inverse: return "petersson_inverse";
        case NormalizationTag::varrho: return "varrho";
    }
    return "?";
}

namespace detail {

// t(n) from the stored table, extended by multiplicativity and the prime-power recursion
inline double hecke_lookup(const std::map<int, double>& t, int n) {
    if (n < 1) throw precondition_error("hecke: index must be positive");
    if (n == 1) return 1.0;
    if (auto it = t.find(n); it != t.end()) return it->second;
    int m = n;
    double out = 1.0;
    for (int p = 2; m > 1; ++p) {
        if (p * p > m) p = m;  // remaining cofactor is prime
        if (m % p) continue;
        int a = 0;
        while (m % p == 0) {
            m /= p;
            ++a;
        }
        auto tp = t.find(p);
        if (tp == t.end()) throw range_error("hecke: t(" + std::to_string(n) + ") needs t(p) beyond the table");
        double prev = 1.0, cur = tp->second;
        for (int j = 1; j < a; ++j) {
            double nx = tp->second * cur - prev;
            prev = cur;
            cur = nx;
        }
        out *= cur;
    }
    return out;
}

} // namespace detail

struct MaassFormRecord {
    double kappa = 0.0;
    int epsilon = 1;
    std::map<int, double> hecke;  // t(n), n >= 2
    double norm_sq_rho1 = 0.0;
    NormalizationTag normalization_tag = NormalizationTag::cosh_normalized;

    double t(int n) const { return detail::hecke_lookup(hecke, n); }
    SpectralParam param() const { return SpectralParam::principal(kappa); }
};

struct HoloFormRecord {
    int k = 0;  // weight 2k
    std::map<int, double> hecke;
    double norm_sq_rho1 = 0.0;
    NormalizationTag normalization_tag = NormalizationTag::petersson_inverse;

    double t(int n) const { return detail::hecke_lookup(hecke, n); }
    SpectralParam param() const { return SpectralParam::discrete(k); }
};

struct DatasetManifest {
    std::string source;
    int N = 0;
    double kappa_max = 0.0;
    double precision = 0.0;
    NormalizationTag normalization_tag = NormalizationTag::cosh_normalized;
    NormalizationTag holomorphic_normalization_tag = NormalizationTag::petersson_inverse;
    std::optional<double> complete_below;  // every form with kappa below this is present
    std::string holomorphic_file;
    std::map<std::string, std::string> extra;
};

struct SpectralDataset {
    DatasetManifest manifest;
    std::vector<MaassFormRecord> forms;  // ascending kappa
    std::vector<HoloFormRecord> holo;    // ascending k

    void require_precision(double tol) const {
        if (!(manifest.precision <= tol))
            throw data_error("dataset precision " + std::to_string(manifest.precision) + " is coarser than " +
                             std::to_string(tol));
    }
    // kappa up to which the Maass list is complete
    double complete_kappa() const { return manifest.complete_below.value_or(manifest.kappa_max); }
};

enum class DatasetFormat { delimited_text, structured_records };

// |varrho_V(1)|^2. |Gamma(1/2 + i kappa)|^2 = pi / cosh(pi kappa) turns |rho(1)|^2 into
// |rho(1)|^2 / (4 cosh(pi kappa)).
inline double varrho1_sq(const MaassFormRecord& r) {
    switch (r.normalization_tag) {
        case NormalizationTag::cosh_normalized: return 0.25 * r.norm_sq_rho1;
        case NormalizationTag::rho_squared: return 0.25 * r.norm_sq_rho1 / std::cosh(pi * r.kappa);
        case NormalizationTag::varrho: return r.norm_sq_rho1;
        default: throw data_error("Maass record carries a holomorphic normalization tag");
    }
}

// |varrho_V(1)|^2 = Gamma(2k) / (2^{4k} pi^{2k+1}) |rho(1)|^2
inline double varrho1_sq(const HoloFormRecord& r) {
    switch (r.normalization_tag) {
        case NormalizationTag::petersson_inverse:
            return std::exp(std::lgamma(2.0 * r.k) - 4.0 * r.k * std::log(2.0) - (2.0 * r.k + 1.0) * std::log(pi)) *
                   r.norm_sq_rho1;
        case NormalizationTag::varrho: return r.norm_sq_rho1;
        default: throw data_error("holomorphic record carries a Maass normalization tag");
    }
}

// varrho_V(n) = eps^{(1 - sgn n)/2} varrho_V(1) t(|n|), with varrho_V(1) taken real positive
// (only varrho(m) conj(varrho(n)) enters the sum formulas).
inline cplx normalize(const MaassFormRecord& r, int n) {
    if (n == 0) throw precondition_error("normalize: n must be nonzero");
    double v = std::sqrt(varrho1_sq(r)) * r.t(std::abs(n));
    return n < 0 && r.epsilon < 0 ? -v : v;
}

// holomorphic discrete series: varrho_V(n) vanishes for n < 0
inline cplx normalize(const HoloFormRecord& r, int n) {
    if (n == 0) throw precondition_error("normalize: n must be nonzero");
    if (n < 0) return 0.0;
    return std::sqrt(varrho1_sq(r)) * r.t(n);
}

// ---------------------------------------------------------------- parsing

namespace detail {

inline std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(trim(f));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline int significant_digits(const std::string& s) {
    int n = 0;
    bool lead = true;
    for (char c : s) {
        if (c == 'e' || c == 'E') break;
        if (c < '0' || c > '9') continue;
        if (lead && c == '0') continue;
        lead = false;
        ++n;
    }
    return n;
}

inline std::string where(const std::string& file, std::size_t line) {
    return file + ":" + std::to_string(line) + ": ";
}

inline double parse_double(const std::string& s, const std::string& ctx, bool digits_check) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (!s.empty() && *b == '+') ++b;
    auto r = std::from_chars(b, e, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(v))
        throw data_error(ctx + "non-numeric field '" + s + "'");
    if (digits_check && v != 0.0 && significant_digits(s) < 12)
        throw data_error(ctx + "field '" + s + "' has fewer than 12 significant digits");
    return v;
}

inline int parse_int(const std::string& s, const std::string& ctx) {
    int v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    if (!s.empty() && *b == '+') ++b;
    auto r = std::from_chars(b, e, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != e) throw data_error(ctx + "non-integer field '" + s + "'");
    return v;
}

// header columns t2..tN in order
inline int hecke_columns(const std::vector<std::string>& h, std::size_t first, const std::string& ctx) {
    int n = 1;
    for (std::size_t i = first; i < h.size(); ++i) {
        if (h[i] != "t" + std::to_string(n + 1)) throw data_error(ctx + "expected column t" + std::to_string(n + 1));
        ++n;
    }
    return n;
}

inline void check_duplicates(const std::vector<MaassFormRecord>& f, double precision, const std::string& file) {
    double tol = std::max(precision, 1e-12);
    for (std::size_t i = 1; i < f.size(); ++i)
        if (std::abs(f[i].kappa - f[i - 1].kappa) <= tol * std::max(1.0, f[i].kappa))
            throw data_error(file + ": duplicate kappa " + std::to_string(f[i].kappa));
}

inline void sort_dataset(SpectralDataset& ds) {
    std::stable_sort(ds.forms.begin(), ds.forms.end(),
                     [](const MaassFormRecord& a, const MaassFormRecord& b) { return a.kappa < b.kappa; });
    std::stable_sort(ds.holo.begin(), ds.holo.end(), [](const HoloFormRecord& a, const HoloFormRecord& b) { return a.k < b.k; });
}

} // namespace detail

inline DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open manifest " + path);
    DatasetManifest m;
    bool have_n = false, have_kmax = false, have_prec = false;
    std::string line;
    std::size_t ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw data_error(detail::where(path, ln) + "expected key=value");
        std::string k = detail::trim(line.substr(0, eq)), v = detail::trim(line.substr(eq + 1));
        std::string ctx = detail::where(path, ln);
        if (k == "source") m.source = v;
        else if (k == "N") { m.N = detail::parse_int(v, ctx); have_n = true; }
        else if (k == "kappa_max") { m.kappa_max = detail::parse_double(v, ctx, false); have_kmax = true; }
        else if (k == "precision") { m.precision = detail::parse_double(v, ctx, false); have_prec = true; }
        else if (k == "complete_below") m.complete_below = detail::parse_double(v, ctx, false);
        else if (k == "normalization_tag") m.normalization_tag = parse_normalization_tag(v);
        else if (k == "holomorphic_normalization_tag") m.holomorphic_normalization_tag = parse_normalization_tag(v);
        else if (k == "holomorphic_file") m.holomorphic_file = v;
        else m.extra[k] = v;
    }
    if (m.source.empty() || !have_n || !have_kmax || !have_prec)
        throw data_error(path + ": manifest needs source, N, kappa_max and precision");
    return m;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    char buf[64];
    out << "source=" << m.source << "\n";
    out << "N=" << m.N << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", m.kappa_max);
    out << "kappa_max=" << buf << "\n";
    if (m.complete_below) {
        std::snprintf(buf, sizeof buf, "%.17g", *m.complete_below);
        out << "complete_below=" << buf << "\n";
    }
    std::snprintf(buf, sizeof buf, "%.17g", m.precision);
    out << "precision=" << buf << "\n";
    out << "normalization_tag=" << to_string(m.normalization_tag) << "\n";
    out << "holomorphic_normalization_tag=" << to_string(m.holomorphic_normalization_tag) << "\n";
    if (!m.holomorphic_file.empty()) out << "holomorphic_file=" << m.holomorphic_file << "\n";
    for (auto& [k, v] : m.extra) out << k << "=" << v << "\n";
}

// Maass table: header kappa,epsilon,norm_sq_rho1,t2,...,tN
inline std::vector<MaassFormRecord> load_maass_csv(const std::string& path, NormalizationTag tag) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    std::size_t ln = 0;
    std::vector<std::string> head;
    while (std::getline(in, line)) {
        ++ln;
        if (!detail::trim(line).empty()) {
            head = detail::split_csv(line);
            break;
        }
    }
    if (head.size() < 3 || head[0] != "kappa" || head[1] != "epsilon" || head[2] != "norm_sq_rho1")
        throw data_error(detail::where(path, ln) + "header must start with kappa,epsilon,norm_sq_rho1");
    int N = detail::hecke_columns(head, 3, detail::where(path, ln));
    std::vector<MaassFormRecord> out;
    while (std::getline(in, line)) {
        ++ln;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split_csv(line);
        std::string ctx = detail::where(path, ln) + "row " + std::to_string(out.size() + 1) + ": ";
        if (f.size() != head.size()) throw data_error(ctx + "expected " + std::to_string(head.size()) + " fields");
        MaassFormRecord r;
        r.kappa = detail::parse_double(f[0], ctx, true);
        r.epsilon = detail::parse_int(f[1], ctx);
        if (r.epsilon != 1 && r.epsilon != -1) throw data_error(ctx + "epsilon must be +1 or -1");
        r.norm_sq_rho1 = detail::parse_double(f[2], ctx, true);
        if (!(r.norm_sq_rho1 > 0.0)) throw data_error(ctx + "norm_sq_rho1 must be positive");
        for (int n = 2; n <= N; ++n) r.hecke[n] = detail::parse_double(f[n + 1], ctx, true);
        r.normalization_tag = tag;
        out.push_back(std::move(r));
    }
    return out;
}

// holomorphic table: header k,norm_sq_rho1,t2,...,tN
inline std::vector<HoloFormRecord> load_holo_csv(const std::string& path, NormalizationTag tag) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    std::string line;
    std::size_t ln = 0;
    std::vector<std::string> head;
    while (std::getline(in, line)) {
        ++ln;
        if (!detail::trim(line).empty()) {
            head = detail::split_csv(line);
            break;
        }
    }
    if (head.size() < 2 || head[0] != "k" || head[1] != "norm_sq_rho1")
        throw data_error(detail::where(path, ln) + "header must start with k,norm_sq_rho1");
    int N = detail::hecke_columns(head, 2, detail::where(path, ln));
    std::vector<HoloFormRecord> out;
    while (std::getline(in, line)) {
        ++ln;
        if (detail::trim(line).empty()) continue;
        auto f = detail::split_csv(line);
        std::string ctx = detail::where(path, ln) + "row " + std::to_string(out.size() + 1) + ": ";
        if (f.size() != head.size()) throw data_error(ctx + "expected " + std::to_string(head.size()) + " fields");
        HoloFormRecord r;
        r.k = detail::parse_int(f[0], ctx);
        r.norm_sq_rho1 = detail::parse_double(f[1], ctx, true);
        if (!(r.norm_sq_rho1 > 0.0)) throw data_error(ctx + "norm_sq_rho1 must be positive");
        for (int n = 2; n <= N; ++n) r.hecke[n] = detail::parse_double(f[n], ctx, true);
        r.normalization_tag = tag;
        out.push_back(std::move(r));
    }
    return out;
}

namespace detail {

inline std::map<int, double> hecke_from_json(const nlohmann::json& j, const std::string& ctx) {
    std::map<int, double> t;
    if (!j.is_object()) throw data_error(ctx + "hecke must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        int n = parse_int(it.key(), ctx);
        if (n < 2) throw data_error(ctx + "hecke index must be >= 2");
        if (!it.value().is_number()) throw data_error(ctx + "hecke value must be numeric");
        t[n] = it.value().get<double>();
    }
    return t;
}

inline double json_number(const nlohmann::json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number()) throw data_error(ctx + "missing numeric field " + key);
    return j[key].get<double>();
}

} // namespace detail

inline SpectralDataset load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw data_error(path + ": " + e.what());
    }
    SpectralDataset ds;
    if (!j.contains("manifest") || !j.contains("forms")) throw data_error(path + ": needs manifest and forms");
    auto& m = j["manifest"];
    std::string mc = path + ": manifest: ";
    if (!m.contains("source") || !m["source"].is_string()) throw data_error(mc + "missing source");
    ds.manifest.source = m["source"].get<std::string>();
    ds.manifest.N = static_cast<int>(detail::json_number(m, "N", mc));
    ds.manifest.kappa_max = detail::json_number(m, "kappa_max", mc);
    ds.manifest.precision = detail::json_number(m, "precision", mc);
    if (m.contains("complete_below")) ds.manifest.complete_below = detail::json_number(m, "complete_below", mc);
    if (m.contains("normalization_tag"))
        ds.manifest.normalization_tag = parse_normalization_tag(m["normalization_tag"].get<std::string>());
    if (m.contains("holomorphic_normalization_tag"))
        ds.manifest.holomorphic_normalization_tag =
            parse_normalization_tag(m["holomorphic_normalization_tag"].get<std::string>());
    for (auto it = m.begin(); it != m.end(); ++it) {
        static const char* known[] = {"source", "N", "kappa_max", "precision", "complete_below",
                                      "normalization_tag", "holomorphic_normalization_tag"};
        if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) !=
            std::end(known))
            continue;
        ds.manifest.extra[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    std::size_t i = 0;
    for (auto& f : j["forms"]) {
        std::string ctx = path + ": forms[" + std::to_string(i++) + "]: ";
        MaassFormRecord r;
        r.kappa = detail::json_number(f, "kappa", ctx);
        double e = detail::json_number(f, "epsilon", ctx);
        if (e != 1.0 && e != -1.0) throw data_error(ctx + "epsilon must be +1 or -1");
        r.epsilon = static_cast<int>(e);
        r.norm_sq_rho1 = detail::json_number(f, "norm_sq_rho1", ctx);
        if (!(r.norm_sq_rho1 > 0.0)) throw data_error(ctx + "norm_sq_rho1 must be positive");
        if (f.contains("hecke")) r.hecke = detail::hecke_from_json(f["hecke"], ctx);
        r.normalization_tag = ds.manifest.normalization_tag;
        ds.forms.push_back(std::move(r));
    }
    i = 0;
    if (j.contains("holo"))
        for (auto& f : j["holo"]) {
            std::string ctx = path + ": holo[" + std::to_string(i++) + "]: ";
            HoloFormRecord r;
            r.k = static_cast<int>(detail::json_number(f, "k", ctx));
            r.norm_sq_rho1 = detail::json_number(f, "norm_sq_rho1", ctx);
            if (f.contains("hecke")) r.hecke = detail::hecke_from_json(f["hecke"], ctx);
            r.normalization_tag = ds.manifest.holomorphic_normalization_tag;
            ds.holo.push_back(std::move(r));
        }
    detail::sort_dataset(ds);
    detail::check_duplicates(ds.forms, ds.manifest.precision, path);
    return ds;
}

// Delimited text: the Maass table plus `<stem>.manifest`; the holomorphic table is named by the
// manifest key holomorphic_file, relative to the manifest.
inline SpectralDataset load_csv(const std::string& path) {
    namespace fs = std::filesystem;
    fs::path p(path);
    fs::path man = p;
    man.replace_extension(".manifest");
    SpectralDataset ds;
    ds.manifest = load_manifest(man.string());
    ds.forms = load_maass_csv(path, ds.manifest.normalization_tag);
    if (!ds.manifest.holomorphic_file.empty())
        ds.holo = load_holo_csv((man.parent_path() / ds.manifest.holomorphic_file).string(),
                                ds.manifest.holomorphic_normalization_tag);
    detail::sort_dataset(ds);
    detail::check_duplicates(ds.forms, ds.manifest.precision, path);
    return ds;
}

inline SpectralDataset load(const std::string& path, DatasetFormat fmt) {
    return fmt == DatasetFormat::structured_records ? load_json(path) : load_csv(path);
}

inline SpectralDataset load(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    return load(path, ext == ".json" ? DatasetFormat::structured_records : DatasetFormat::delimited_text);
}

// ---------------------------------------------------------------- saving

namespace detail {

inline std::string fmt17(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    // ensure at least 12 significant digits survive a reload check
    std::string s = b;
    if (v != 0.0 && significant_digits(s) < 12) {
        std::snprintf(b, sizeof b, "%.16e", v);
        s = b;
    }
    return s;
}

inline int hecke_max(const std::map<int, double>& t) { return t.empty() ? 1 : t.rbegin()->first; }

} // namespace detail

// Writes `path` (Maass table), `<stem>.manifest`, and the holomorphic table next to them.
inline void save_csv(const SpectralDataset& ds, const std::string& path) {
    namespace fs = std::filesystem;
    fs::path p(path), man = p;
    man.replace_extension(".manifest");
    DatasetManifest m = ds.manifest;
    if (!ds.holo.empty() && m.holomorphic_file.empty()) m.holomorphic_file = p.stem().string() + "_holomorphic.csv";
    if (ds.holo.empty()) m.holomorphic_file.clear();
    int N = 1;
    for (auto& r : ds.forms) N = std::max(N, detail::hecke_max(r.hecke));
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << "kappa,epsilon,norm_sq_rho1";
    for (int n = 2; n <= N; ++n) out << ",t" << n;
    out << "\n";
    for (auto& r : ds.forms) {
        out << detail::fmt17(r.kappa) << "," << r.epsilon << "," << detail::fmt17(r.norm_sq_rho1);
        for (int n = 2; n <= N; ++n) {
            auto it = r.hecke.find(n);
            if (it == r.hecke.end()) throw data_error("save_csv: ragged Hecke table");
            out << "," << detail::fmt17(it->second);
        }
        out << "\n";
    }
    out.close();
    save_manifest(m, man.string());
    if (!ds.holo.empty()) {
        int Nh = 1;
        for (auto& r : ds.holo) Nh = std::max(Nh, detail::hecke_max(r.hecke));
        std::ofstream h(man.parent_path() / m.holomorphic_file);
        if (!h) throw data_error("cannot write " + m.holomorphic_file);
        h << "k,norm_sq_rho1";
        for (int n = 2; n <= Nh; ++n) h << ",t" << n;
        h << "\n";
        for (auto& r : ds.holo) {
            h << r.k << "," << detail::fmt17(r.norm_sq_rho1);
            for (int n = 2; n <= Nh; ++n) {
                auto it = r.hecke.find(n);
                if (it == r.hecke.end()) throw data_error("save_csv: ragged Hecke table");
                h << "," << detail::fmt17(it->second);
            }
            h << "\n";
        }
    }
}

inline void save_json(const SpectralDataset& ds, const std::string& path) {
    nlohmann::ordered_json j;
    auto& m = j["manifest"];
    m["source"] = ds.manifest.source;
    m["N"] = ds.manifest.N;
    m["kappa_max"] = ds.manifest.kappa_max;
    if (ds.manifest.complete_below) m["complete_below"] = *ds.manifest.complete_below;
    m["precision"] = ds.manifest.precision;
    m["normalization_tag"] = to_string(ds.manifest.normalization_tag);
    m["holomorphic_normalization_tag"] = to_string(ds.manifest.holomorphic_normalization_tag);
    for (auto& [k, v] : ds.manifest.extra) m[k] = v;
    j["forms"] = nlohmann::ordered_json::array();
    for (auto& r : ds.forms) {
        nlohmann::ordered_json f;
        f["kappa"] = r.kappa;
        f["epsilon"] = r.epsilon;
        f["norm_sq_rho1"] = r.norm_sq_rho1;
        for (auto& [n, t] : r.hecke) f["hecke"][std::to_string(n)] = t;
        j["forms"].push_back(f);
    }
    j["holo"] = nlohmann::ordered_json::array();
    for (auto& r : ds.holo) {
        nlohmann::ordered_json f;
        f["k"] = r.k;
        f["norm_sq_rho1"] = r.norm_sq_rho1;
        for (auto& [n, t] : r.hecke) f["hecke"][std::to_string(n)] = t;
        j["holo"].push_back(f);
    }
    std::ofstream out(path);
    if (!out) throw data_error("cannot write " + path);
    out << j.dump(1) << "\n";
}

inline void save(const SpectralDataset& ds, const std::string& path, DatasetFormat fmt) {
    if (fmt == DatasetFormat::structured_records)
        save_json(ds, path);
    else
        save_csv(ds, path);
}

inline void save(const SpectralDataset& ds, const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    save(ds, path, ext == ".json" ? DatasetFormat::structured_records : DatasetFormat::delimited_text);
}

// ---------------------------------------------------------------- validation

// exponent in |t(n)| <= C n^{1/4 + 0.01}
inline constexpr double hecke_bound_exponent = 0.26;

struct RecordValidation {
    std::string label;  // "kappa=..." or "k=..."
    bool spectral_ok = true;
    double hecke_residual = 0.0;  // max |t(m)t(n) - sum_{d | (m,n)} t(mn/d^2)|
    bool hecke_ok = true;
    double bound_constant = 0.0;  // max |t(n)| / n^{0.26}
    bool bound_ok = true;
    bool pass() const { return spectral_ok && hecke_ok && bound_ok; }
};

struct ValidationReport {
    std::vector<RecordValidation> records;
    double fitted_bound_constant = 0.0;
    double hecke_tolerance = 0.0;
    double bound_limit = 0.0;
    bool manifest_ok = true;
    std::vector<std::string> problems;

    bool pass() const {
        if (!manifest_ok) return false;
        for (auto& r : records)
            if (!r.pass()) return false;
        return true;
    }
    std::size_t failures() const {
        std::size_t n = 0;
        for (auto& r : records) n += !r.pass();
        return n;
    }
};

namespace detail {

template <class Rec>
void hecke_checks(const Rec& r, double tol, double bound_limit, RecordValidation& v) {
    int N = hecke_max(r.hecke);
    auto t = [&](int n) { return n == 1 ? 1.0 : r.hecke.at(n); };
    for (int n = 2; n <= N; ++n)
        if (!r.hecke.count(n)) {
            v.hecke_ok = false;
            return;
        }
    for (int a = 2; a <= N; ++a)
        for (int b = a; a * b <= N; ++b) {
            int g = std::gcd(a, b);
            double rhs = 0.0;
            for (int d = 1; d <= g; ++d)
                if (g % d == 0) rhs += t(a * b / (d * d));
            double res = std::abs(t(a) * t(b) - rhs);
            v.hecke_residual = std::max(v.hecke_residual, res);
        }
    v.hecke_ok = v.hecke_residual <= tol;
    for (int n = 2; n <= N; ++n) v.bound_constant = std::max(v.bound_constant, std::abs(t(n)) / std::pow(n, hecke_bound_exponent));
    v.bound_ok = v.bound_constant <= bound_limit;
}

} // namespace detail

// Per-record checks: kappa bound, weight bound, Hecke multiplicativity within the dataset precision,
// and |t(n)| <= C n^{0.26} against `bound_limit`.
inline ValidationReport validate(const SpectralDataset& ds, double bound_limit = 4.0) {
    ValidationReport rep;
    rep.hecke_tolerance = std::max(10.0 * ds.manifest.precision, 1e-12);
    rep.bound_limit = bound_limit;
    if (!(ds.manifest.precision > 0.0)) {
        rep.manifest_ok = false;
        rep.problems.push_back("manifest precision must be positive");
    }
    double kmax = 0.0;
    for (std::size_t i = 0; i < ds.forms.size(); ++i) {
        auto& r = ds.forms[i];
        RecordValidation v;
        char b[64];
        std::snprintf(b, sizeof b, "kappa=%.12g", r.kappa);
        v.label = b;
        v.spectral_ok = r.kappa > kappa_lower_bound && (r.epsilon == 1 || r.epsilon == -1);
        detail::hecke_checks(r, rep.hecke_tolerance, bound_limit, v);
        rep.fitted_bound_constant = std::max(rep.fitted_bound_constant, v.bound_constant);
        kmax = std::max(kmax, r.kappa);
        if (i > 0 && r.kappa < ds.forms[i - 1].kappa) {
            rep.manifest_ok = false;
            rep.problems.push_back("forms not sorted by kappa");
        }
        rep.records.push_back(v);
    }
    for (auto& r : ds.holo) {
        RecordValidation v;
        v.label = "k=" + std::to_string(r.k);
        v.spectral_ok = r.k >= holomorphic_k_min;
        detail::hecke_checks(r, rep.hecke_tolerance, bound_limit, v);
        rep.records.push_back(v);
    }
    if (!ds.forms.empty() && kmax > ds.manifest.kappa_max * (1.0 + 1e-12)) {
        rep.manifest_ok = false;
        rep.problems.push_back("a form exceeds the manifest kappa_max");
    }
    return rep;
}

// Plain-text report, one line per record.
inline void write_validation(std::ostream& os, const SpectralDataset& ds, const ValidationReport& rep) {
    char b[256];
    os << "source: " << ds.manifest.source << "\n";
    std::snprintf(b, sizeof b, "maass forms: %zu  holomorphic forms: %zu  N: %d  kappa_max: %.15g  precision: %.3g\n",
                  ds.forms.size(), ds.holo.size(), ds.manifest.N, ds.manifest.kappa_max, ds.manifest.precision);
    os << b;
    std::snprintf(b, sizeof b, "hecke tolerance: %.3g  bound exponent: %.2f  fitted C: %.6f (limit %.3g)\n",
                  rep.hecke_tolerance, hecke_bound_exponent, rep.fitted_bound_constant, rep.bound_limit);
    os << b;
    for (auto& p : rep.problems) os << "problem: " << p << "\n";
    double worst = 0.0;
    for (auto& r : rep.records) {
        worst = std::max(worst, r.hecke_residual);
        std::snprintf(b, sizeof b, "%-28s kappa_bound=%s hecke_residual=%.3e bound_C=%.4f %s\n", r.label.c_str(),
                      r.spectral_ok ? "ok" : "FAIL", r.hecke_residual, r.bound_constant, r.pass() ? "pass" : "FAIL");
        os << b;
    }
    std::snprintf(b, sizeof b, "max hecke residual: %.3e\nresult: %s (%zu failing records)\n", worst,
                  rep.pass() ? "PASS" : "FAIL", rep.failures());
    os << b;
}

} // namespace psl2
