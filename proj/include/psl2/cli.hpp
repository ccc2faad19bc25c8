// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "error.hpp"
#include "jacquet.hpp"
#include "kirillov.hpp"
#include "kloosterman.hpp"
#include "report.hpp"
#include "spectra_data.hpp"
#include "spectral.hpp"
#include "suites.hpp"

namespace psl2::cli {

enum ExitCode : int { exit_pass = 0, exit_check_failure = 1, exit_usage = 2, exit_data = 3 };

enum class OutputFormat { human, records };

struct RunConfig {
    std::string command;  // eval, verify, trace
    std::string target;
    std::map<std::string, std::string> params;
    QuadratureSpec spec;
    std::string dataset;
    OutputFormat format = OutputFormat::human;
    std::uint64_t seed = 20240611;
    bool timing = false;
};

// Parameter names accepted on the command line (as --name) and in config files (as name=value).
inline const std::vector<std::string>& parameter_names() {
    static const std::vector<std::string> n = {
        "m",     "n",     "ell",    "p",      "s",         "nu",          "kappa",   "discrete-k", "u",
        "y",     "x",     "z",      "alpha",  "mu",        "delta",       "pmax",    "points",     "lo",
        "hi",    "bump-a", "gauss-rate", "nu-cutoff", "ell-max", "tol", "abs-tol", "rel-tol", "max-panels",
        "dataset", "format", "seed"};
    return n;
}

inline const std::vector<std::string>& eval_targets() {
    static const std::vector<std::string> t = {"whittaker", "bessel-kernel", "jacquet",     "kloosterman",
                                               "gamma-p",   "xi-kernel",     "transform-A", "transform-B"};
    return t;
}

namespace detail {

inline std::string normalize_key(std::string k) {
    for (char& c : k)
        if (c == '_') c = '-';
    return k;
}

inline std::string trim(const std::string& s) { return psl2::detail::trim(s); }

} // namespace detail

// Flat key=value file; '#' starts a comment.
inline std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw precondition_error("cannot open config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t ln = 0;
    const auto& known = parameter_names();
    while (std::getline(in, line)) {
        ++ln;
        auto h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw precondition_error(path + ":" + std::to_string(ln) + ": expected key=value");
        std::string k = detail::normalize_key(detail::trim(line.substr(0, eq)));
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw precondition_error(path + ":" + std::to_string(ln) + ": unknown key '" + k + "'");
        kv[k] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

// ---------------------------------------------------------------- typed parameter access

class Params {
public:
    explicit Params(const std::map<std::string, std::string>& kv) : kv_(kv) {}

    bool has(const std::string& k) const { return kv_.count(k) > 0; }

    std::string str(const std::string& k) const {
        auto it = kv_.find(k);
        if (it == kv_.end()) throw precondition_error("missing parameter --" + k);
        return it->second;
    }
    double real(const std::string& k) const {
        std::string v = str(k);
        std::size_t pos = 0;
        double d = 0.0;
        try {
            d = std::stod(v, &pos);
        } catch (...) {
            pos = 0;
        }
        if (pos != v.size() || !std::isfinite(d)) throw precondition_error("--" + k + " must be a real number, got '" + v + "'");
        return d;
    }
    double real(const std::string& k, double def) const { return has(k) ? real(k) : def; }
    std::int64_t integer(const std::string& k) const {
        std::string v = str(k);
        std::size_t pos = 0;
        long long d = 0;
        try {
            d = std::stoll(v, &pos);
        } catch (...) {
            pos = 0;
        }
        if (pos != v.size()) throw precondition_error("--" + k + " must be an integer, got '" + v + "'");
        return d;
    }
    std::int64_t integer(const std::string& k, std::int64_t def) const { return has(k) ? integer(k) : def; }
    cplx complex(const std::string& k) const {
        try {
            return parse_complex(str(k));
        } catch (const precondition_error& e) {
            throw precondition_error("--" + k + ": " + e.what());
        }
    }
    cplx complex(const std::string& k, cplx def) const { return has(k) ? complex(k) : def; }

    // spectral parameter from --discrete-k, --kappa or --nu
    std::optional<SpectralParam> spectral() const {
        if (has("discrete-k")) return SpectralParam::discrete(int(integer("discrete-k")));
        if (has("kappa")) return SpectralParam::principal(real("kappa"));
        if (has("nu")) {
            cplx nu = complex("nu");
            if (nu.real() != 0.0) throw precondition_error("--nu must be purely imaginary here (or use --discrete-k)");
            return SpectralParam::principal(nu.imag());
        }
        return std::nullopt;
    }

    std::string echo(const std::vector<std::string>& keys) const {
        std::string s;
        for (auto& k : keys)
            if (has(k)) {
                if (!s.empty()) s += ' ';
                s += k + "=" + str(k);
            }
        return s;
    }

private:
    const std::map<std::string, std::string>& kv_;
};

inline int delta_param(const Params& p) {
    auto d = p.integer("delta", 1);
    if (d != 1 && d != -1) throw precondition_error("--delta must be +1 or -1");
    return int(d);
}

inline constexpr double info_tol = std::numeric_limits<double>::infinity();

inline CheckRecord info(std::string check, std::string inputs, cplx value, double residual = 0.0) {
    return {std::move(check), std::move(inputs), value, residual, info_tol, true};
}

// ---------------------------------------------------------------- commands

inline std::vector<CheckRecord> cmd_eval(const RunConfig& cfg) {
    Params p(cfg.params);
    const auto& t = cfg.target;
    const auto& q = cfg.spec;
    std::string name = "eval." + t;
    if (t == "kloosterman") {
        double v = kloosterman_sum(p.integer("m"), p.integer("n"), p.integer("ell"));
        return {info(name, p.echo({"m", "n", "ell"}), v)};
    }
    if (t == "bessel-kernel") {
        double u = p.real("u");
        if (p.has("discrete-k")) {
            auto sp = SpectralParam::discrete(int(p.integer("discrete-k")));
            return {info(name, p.echo({"discrete-k", "u"}), bessel_kernel(sp, u))};
        }
        cplx nu = p.has("kappa") ? cplx(0.0, p.real("kappa")) : p.complex("nu");
        return {info(name, p.echo({"nu", "kappa", "u"}), bessel_kernel(nu, u))};
    }
    if (t == "gamma-p") {
        cplx v = gamma_p(int(p.integer("p")), p.complex("s"), p.complex("nu"), q);
        return {info(name, p.echo({"p", "s", "nu"}), v)};
    }
    if (t == "jacquet") {
        auto r = jacquet_a(int(p.integer("p")), p.complex("nu"), delta_param(p), p.real("y"), q);
        return {info(name, p.echo({"p", "nu", "delta", "y"}), r.value, r.error)};
    }
    if (t == "whittaker") {
        cplx a = p.complex("alpha"), mu = p.complex("mu");
        double z = p.real("z");
        if (!(z > 0.0)) throw precondition_error("--z must be positive");
        cplx v = whittaker_w_series(a, mu, z);
        double res = 0.0;
        bool integral = a.imag() == 0.0 && a.real() == std::round(a.real()) &&
                        !is_nonpositive_integer(a + mu + 0.5) && !is_nonpositive_integer(a - mu + 0.5);
        // integer first index: cross-check against the Jacquet-integral route
        if (integral) res = std::abs(v - whittaker_w(a, mu, z, q)) / std::max(std::abs(v), 1e-300);
        return {info(name, p.echo({"alpha", "mu", "z"}), v, res)};
    }
    if (t == "xi-kernel") {
        auto r = xi_kernel(p.real("u"), p.complex("nu", 0.0), q);
        return {info(name, p.echo({"u", "nu"}), r.value, r.error + r.tail)};
    }
    if (t == "transform-A") {
        auto f = SpectralWeight::gaussian(p.real("gauss-rate", 1.0));
        auto r = transform_A_quad(f, delta_param(p), p.real("x"), q);
        return {info(name, p.echo({"gauss-rate", "delta", "x"}), r.value, r.error)};
    }
    if (t == "transform-B") {
        auto phi = GeometricWeight::bump(p.real("lo", 1.0), p.real("hi", 2.0), p.real("bump-a", 3.0));
        auto r = transform_B_quad(phi, delta_param(p), p.complex("nu"), q);
        return {info(name, p.echo({"lo", "hi", "bump-a", "delta", "nu"}), r.value, r.error)};
    }
    throw precondition_error("unknown eval target '" + t + "'");
}

inline SuiteReport cmd_verify(const RunConfig& cfg) {
    Params p(cfg.params);
    SuiteOptions o;
    o.seed = cfg.seed;
    o.points = int(p.integer("points", o.points));
    if (o.points < 1) throw precondition_error("--points must be positive");
    o.pmax = int(p.integer("pmax", o.pmax));
    if (o.pmax < 0) throw precondition_error("--pmax must be nonnegative");
    o.param = p.spectral();
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), cfg.target) == names.end())
        throw precondition_error("unknown suite '" + cfg.target + "'");
    return run_suite(cfg.target, o);
}

inline std::vector<CheckRecord> cmd_trace(const RunConfig& cfg) {
    Params p(cfg.params);
    if (cfg.dataset.empty()) throw precondition_error("trace needs --dataset");
    auto m = p.integer("m", 1), n = p.integer("n", 1);
    double tol = p.real("tol", 1e-2);
    auto phi = GeometricWeight::bump(p.real("lo", 1.0), p.real("hi", 2.0), p.real("bump-a", 3.0));
    auto ds = load(cfg.dataset);
    SumFormulaOptions opt;
    opt.spec = cfg.spec;
    opt.spectral.nu_cutoff = p.real("nu-cutoff", 0.0);
    opt.ell_max = p.integer("ell-max", 0);
    auto r = sum_formula(m, n, phi, ds, opt);

    std::string in = "m=" + std::to_string(m) + " n=" + std::to_string(n) + " delta=" + std::to_string(r.delta);
    std::vector<CheckRecord> out;
    out.push_back(info("trace.geometric_side", in + " ell_max=" + std::to_string(r.truncation.ell_max), r.geometric_side));
    for (auto& g : r.geometric_terms)
        out.push_back(info("trace.geometric_term", "ell=" + std::to_string(g.ell), g.contribution));
    for (auto& c : r.contributions) out.push_back(info("trace.contribution", c.label, c.contribution, c.error));
    std::size_t disc = 0;
    for (auto& c : r.contributions) disc += c.param.is_discrete();
    out.push_back(info("trace.discrete_series", r.discrete_series_present ? "present" : "absent", double(disc)));
    out.push_back(info("trace.continuous_term", "cutoff=" + format_real(r.truncation.continuous_cutoff), r.continuous_term));
    out.push_back(info("trace.spectral_side",
                       in + " forms=" + std::to_string(r.truncation.num_forms) + " nu_cutoff=" +
                           format_real(r.truncation.nu_cutoff),
                       r.spectral_side));
    out.push_back(info("trace.truncation_budget", in, r.truncation_budget));
    out.push_back(info("trace.quadrature_budget", in, r.quadrature_budget));
    out.push_back(info("trace.residual", in, r.residual));
    out.push_back(make_check("trace.sum_formula", in, r.spectral_side - r.geometric_side, r.relative_error, tol));
    return out;
}

// ---------------------------------------------------------------- output

inline constexpr int human_digits = 15;

inline void emit(std::ostream& os, const std::vector<CheckRecord>& recs, OutputFormat f) {
    if (f == OutputFormat::records) {
        os << record_header() << "\n";
        for (auto& r : recs) os << record_line(r) << "\n";
        return;
    }
    for (auto& r : recs) {
        os << r.check;
        if (!r.inputs.empty()) os << " [" << r.inputs << "]";
        os << " = " << format_complex(r.value, human_digits);
        if (r.tol == info_tol) {
            if (r.residual != 0.0) os << "  (error " << format_real(r.residual, 3) << ")";
        } else {
            os << "  residual " << format_real(r.residual, 3) << " tol " << format_real(r.tol, 3) << (r.pass ? "  PASS" : "  FAIL");
        }
        os << "\n";
    }
}

// ---------------------------------------------------------------- entry point

inline RunConfig build_config(const std::string& command, const std::string& target,
                              const std::map<std::string, std::string>& file, const std::map<std::string, std::string>& flags,
                              bool timing) {
    RunConfig cfg;
    cfg.command = command;
    cfg.target = target;
    cfg.params = file;
    for (auto& [k, v] : flags) cfg.params[k] = v;  // flags override the file
    cfg.timing = timing;
    Params p(cfg.params);
    if (p.has("abs-tol")) cfg.spec.abs_tol = p.real("abs-tol");
    if (p.has("rel-tol")) cfg.spec.rel_tol = p.real("rel-tol");
    if (p.has("max-panels")) cfg.spec.max_panels = int(p.integer("max-panels"));
    cfg.spec.validate();
    if (p.has("dataset")) cfg.dataset = p.str("dataset");
    if (p.has("seed")) {
        auto s = p.integer("seed");
        if (s < 0) throw precondition_error("--seed must be nonnegative");
        cfg.seed = std::uint64_t(s);
    }
    if (p.has("format")) {
        auto f = p.str("format");
        if (f == "human") cfg.format = OutputFormat::human;
        else if (f == "records" || f == "structured-records") cfg.format = OutputFormat::records;
        else throw precondition_error("--format must be human or records");
    }
    return cfg;
}

inline int run_config(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckRecord> recs;
    bool pass = true;
    std::vector<std::string> failing;
    if (cfg.command == "eval") {
        recs = cmd_eval(cfg);
    } else if (cfg.command == "verify") {
        auto rep = cmd_verify(cfg);
        recs = rep.records;
        pass = rep.pass();
        failing = rep.failing();
    } else if (cfg.command == "trace") {
        recs = cmd_trace(cfg);
        for (auto& r : recs)
            if (!r.pass) {
                pass = false;
                failing.push_back(r.check);
            }
    } else {
        throw precondition_error("unknown command '" + cfg.command + "'");
    }
    // everything is computed before anything is printed
    emit(out, recs, cfg.format);
    if (cfg.timing)
        err << "wall time " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    if (!pass) {
        err << "failed:";
        for (auto& f : failing) err << " " << f;
        err << "\n";
        return exit_check_failure;
    }
    return exit_pass;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"PSL(2,R) spectral toolkit: evaluate, verify, trace"};
    app.require_subcommand(1);
    std::map<std::string, std::string> flags;
    std::string target, config;
    bool timing = false;
    std::map<std::string, CLI::Option*> opts;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "key=value file; flags override it");
        sub->add_flag("--timing", timing, "print wall time on stderr");
        for (auto& k : parameter_names()) {
            auto* o = sub->add_option("--" + k, flags[k]);
            opts[sub->get_name() + ":" + k] = o;
        }
    };
    auto* ev = app.add_subcommand("eval", "evaluate a function or transform");
    ev->add_option("target", target, "whittaker | bessel-kernel | jacquet | kloosterman | gamma-p | xi-kernel | "
                                      "transform-A | transform-B")
        ->required();
    add_common(ev);
    auto* ve = app.add_subcommand("verify", "run an identity suite");
    ve->add_option("target", target, "lie | jacquet | kirillov | mellin-pairs | gram | kloosterman-basic")->required();
    add_common(ve);
    auto* tr = app.add_subcommand("trace", "both sides of the Kloosterman sum formula");
    add_common(tr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    }
    CLI::App* sub = ev->parsed() ? ev : (ve->parsed() ? ve : tr);
    std::map<std::string, std::string> given;
    for (auto& k : parameter_names())
        if (opts[sub->get_name() + ":" + k]->count() > 0) given[k] = flags[k];
    try {
        std::map<std::string, std::string> file;
        if (!config.empty()) file = read_config(config);
        auto cfg = build_config(sub->get_name(), target, file, given, timing);
        return run_config(cfg, out, err);
    } catch (const data_error& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const convergence_error& e) {
        err << "check failure: " << e.what() << "\n";
        return exit_check_failure;
    } catch (const std::invalid_argument& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::domain_error& e) {
        err << "invalid parameter: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::range_error& e) {
        err << "out of range: " << e.what() << "\n";
        return exit_usage;
    }
}

} // namespace psl2::cli
