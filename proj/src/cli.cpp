#include "copoly/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "copoly/charges.hpp"
#include "copoly/limits.hpp"
#include "copoly/partition.hpp"
#include "copoly/phasediag.hpp"
#include "copoly/sampler.hpp"
#include "copoly/spectral.hpp"
#include "copoly/walk.hpp"

namespace copoly {

namespace {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ChargeSpec {
    RawCharges raw;
    std::vector<double> omega;  // phase-diagram family (optional)
    double p = 0.3;
    std::size_t n_max = 0;  // 0: not specified
};

std::vector<double> json_array(const json& j, const char* key) {
    if (!j.contains(key)) return {0.0};
    std::vector<double> v = j.at(key).get<std::vector<double>>();
    if (v.empty()) throw std::invalid_argument(std::string("empty array for ") + key);
    return v;
}

ChargeSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open input file: " + path);
    json j = json::parse(in);
    ChargeSpec spec;
    spec.raw.plus = json_array(j, "omega_plus");
    spec.raw.minus = json_array(j, "omega_minus");
    spec.raw.zero = json_array(j, "omega_zero");
    spec.raw.zero_tilde = json_array(j, "omega_zero_tilde");
    if (j.contains("omega")) spec.omega = j.at("omega").get<std::vector<double>>();
    if (j.contains("p")) spec.p = j.at("p").get<double>();
    if (j.contains("n_max")) spec.n_max = j.at("n_max").get<std::size_t>();
    return spec;
}

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.dim(); ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < m.dim(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

struct Workspace {
    WalkLaw walk;
    CycleCharges charges;
    KernelSet ks;
    FreeEnergyReport report;
};

Workspace make_workspace(const ChargeSpec& spec, const RunConfig& cfg, std::size_t min_table) {
    Workspace w;
    KernelSetOptions opt;
    opt.n_max = spec.n_max != 0 ? spec.n_max : cfg.n_max;
    opt.n_max = std::max(opt.n_max, min_table);
    w.walk = first_return_law(spec.p, opt.n_max);
    w.charges = normalize(spec.raw);
    w.ks = build_kernel_set(w.charges, w.walk, opt);
    w.report = free_energy(w.ks, cfg.cls_tol);
    return w;
}

// Output sink: a named file when a prefix is configured, else the stream.
class Sink {
  public:
    Sink(const RunConfig& cfg, std::ostream& out, const std::string& suffix) : out_(&out) {
        if (!cfg.output.empty()) {
            path_ = cfg.output + suffix;
            file_.open(path_);
            if (!file_) throw std::invalid_argument("cannot open output file: " + path_);
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }
    const std::string& path() const { return path_; }

  private:
    std::ostream* out_;
    std::ofstream file_;
    std::string path_;
};

Boundary parse_boundary(const std::string& s) {
    if (s == "free" || s == "f") return Boundary::free_end;
    if (s == "constrained" || s == "c") return Boundary::constrained;
    throw std::invalid_argument("boundary must be free or constrained");
}

GridAxis parse_grid(const std::string& s) {
    GridAxis g;
    if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &g.lo, &g.hi, &g.step) != 3)
        throw std::invalid_argument("grid must be lo:hi:step, got: " + s);
    return g;
}

int cmd_free_energy(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    Workspace w = make_workspace(spec, cfg, 2);
    json j;
    j["p"] = spec.p;
    j["period"] = w.charges.period;
    j["flipped"] = w.charges.flipped;
    j["h"] = w.charges.h;
    j["delta"] = w.report.delta;
    j["regime"] = regime_name(w.report.regime);
    j["F"] = w.report.free_energy;
    j["F_raw"] = w.report.raw_free_energy;
    j["z_residual"] = w.report.z_residual;
    j["xi"] = w.report.xi_at_f;
    j["tail_warning"] = w.ks.tail_warning;
    Sink sink(cfg, out, "free_energy.json");
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_classify(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    Workspace w = make_workspace(spec, cfg, 2);
    json j;
    j["delta"] = w.report.delta;
    j["regime"] = regime_name(w.report.regime);
    j["in_P_less"] = in_p_less(w.charges, w.report.delta, 1e-12, cfg.cls_tol);
    if (j["in_P_less"].get<bool>())
        j["warning"] = "limit depends on boundary conditions along [N] = eta";
    Sink sink(cfg, out, "classify.json");
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_partition(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    if (cfg.horizon == 0) throw std::invalid_argument("partition needs --N");
    Workspace w = make_workspace(spec, cfg, cfg.horizon);
    PartitionTable tab = constrained_dp(w.ks, w.report, cfg.horizon);
    free_dp(tab, w.ks, w.walk);
    Sink sink(cfg, out, "partition.csv");
    std::ostream& os = sink.stream();
    os << "n,logZc,logZf,logZplus,logZminus\n";
    for (std::size_t n = 0; n <= cfg.horizon; ++n) {
        os << n << "," << fmt(tab.log_zc(0, n)) << "," << fmt(tab.log_zf(0, n)) << ","
           << fmt(n > 0 ? tab.log_zp(0, n) : -std::numeric_limits<double>::infinity()) << ","
           << fmt(n > 0 ? tab.log_zm(0, n) : -std::numeric_limits<double>::infinity()) << "\n";
    }
    return 0;
}

int cmd_asymptotics(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    Workspace w = make_workspace(spec, cfg, 2);
    AsymptoticConstants ac = asymptotic_constants(w.ks, w.report.delta, cfg.cls_tol);
    // Residual of B Lambda = Lambda - mu, the normalization identity.
    double resid = 0.0;
    for (auto [amp, esc] : {std::pair{&ac.amp_c, &ac.escape_amp_c},
                            std::pair{&ac.amp_f, &ac.escape_amp_f}}) {
        Mat lhs = w.ks.b * (*amp);
        Mat rhs = (*amp) - (*esc);
        resid = std::max(resid, (lhs - rhs).max_abs() / amp->max_abs());
    }
    json j;
    j["delta"] = w.report.delta;
    j["resolvent"] = mat_to_json(ac.resolvent_b);
    j["Lambda_c"] = mat_to_json(ac.amp_c);
    j["Lambda_f"] = mat_to_json(ac.amp_f);
    j["mu_c"] = mat_to_json(ac.escape_amp_c);
    j["mu_f"] = mat_to_json(ac.escape_amp_f);
    j["normalization_residual"] = resid;
    Sink sink(cfg, out, "asymptotics.json");
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_limits(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    Workspace w = make_workspace(spec, cfg, 2);
    json j;
    j["delta"] = w.report.delta;
    j["regime"] = regime_name(w.report.regime);
    j["F"] = w.report.free_energy;
    const bool p_less = in_p_less(w.charges, w.report.delta, 1e-12, cfg.cls_tol);
    j["in_P_less"] = p_less;
    if (p_less) j["warning"] = "limit depends on boundary conditions along [N] = eta";
    if (w.report.regime == Regime::strictly_delocalized) {
        AsymptoticConstants ac = asymptotic_constants(w.ks, w.report.delta, cfg.cls_tol);
        GibbsDecomposition gd = gibbs_vectors(w.ks, ac, w.walk.c_tail);
        j["Lambda_c"] = mat_to_json(ac.amp_c);
        j["Lambda_f"] = mat_to_json(ac.amp_f);
        j["v_plus"] = gd.v_plus;
        j["v_minus"] = gd.v_minus;
        json rt = json::array();
        for (std::size_t eta = 0; eta < w.charges.period; ++eta) {
            rt.push_back({{"eta", eta}, {"boundary", "constrained"}, {"r", gd.r_c[eta]}});
            rt.push_back({{"eta", eta}, {"boundary", "free"}, {"r", gd.r_f[eta]}});
        }
        j["r"] = rt;
        SemiMarkovKernel k = defective_kernel(w.ks, ac, cfg.eta, parse_boundary(cfg.boundary));
        json rows = json::array();
        for (std::size_t a = 0; a < w.charges.period; ++a)
            rows.push_back({{"class", a}, {"escape", k.escape[a]}, {"row_mass", k.row_mass(a)}});
        j["kernel_rows"] = rows;
    } else {
        SemiMarkovKernel k = gamma_kernel(w.ks, w.report);
        json rows = json::array();
        for (std::size_t a = 0; a < w.charges.period; ++a)
            rows.push_back({{"class", a},
                            {"mean_holding", k.mean_holding(a)},
                            {"row_mass", k.row_mass(a)}});
        j["kernel_rows"] = rows;
    }
    Sink sink(cfg, out, "limits.json");
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_sample(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    const Boundary a = parse_boundary(cfg.boundary);
    const bool finite = cfg.horizon != 0;
    Workspace w = make_workspace(spec, cfg, finite ? cfg.horizon : 2);

    std::vector<PathSample> paths;
    paths.reserve(cfg.samples);
    if (finite) {
        PartitionTable tab = constrained_dp(w.ks, w.report, cfg.horizon);
        free_dp(tab, w.ks, w.walk);
        FiniteSampler sampler(w.ks, tab, w.walk);
        for (std::size_t s = 0; s < cfg.samples; ++s)
            paths.push_back(sampler.sample(a, cfg.seed + s));
    } else {
        const std::size_t horizon = 10000;
        if (w.report.regime == Regime::strictly_delocalized) {
            AsymptoticConstants ac = asymptotic_constants(w.ks, w.report.delta, cfg.cls_tol);
            GibbsDecomposition gd = gibbs_vectors(w.ks, ac, w.walk.c_tail);
            SemiMarkovKernel k = defective_kernel(w.ks, ac, cfg.eta, a);
            InfiniteSampler sampler(w.ks, k, &gd, cfg.eta, a, w.walk);
            for (std::size_t s = 0; s < cfg.samples; ++s)
                paths.push_back(sampler.sample(horizon, cfg.seed + s));
        } else {
            SemiMarkovKernel k = gamma_kernel(w.ks, w.report);
            InfiniteSampler sampler(w.ks, k, nullptr, cfg.eta, a, w.walk);
            for (std::size_t s = 0; s < cfg.samples; ++s)
                paths.push_back(sampler.sample(horizon, cfg.seed + s));
        }
    }

    if (cfg.samples == 1) {
        Sink sink(cfg, out, "path.csv");
        std::ostream& os = sink.stream();
        os << "n,S_n\n";
        for (std::size_t n = 0; n < paths[0].heights.size(); ++n)
            os << n << "," << paths[0].heights[n] << "\n";
        return 0;
    }
    // Batch summary.
    double contact_frac = 0.0, last_sign_plus = 0.0, endpoint_mean = 0.0, escaped = 0.0;
    for (const PathSample& ps : paths) {
        const double len = double(ps.heights.size() - 1);
        contact_frac += double(ps.contacts.size() - 1) / len;
        if (!ps.signs.empty() && ps.signs.back() == 1) last_sign_plus += 1.0;
        endpoint_mean += double(ps.heights.back());
        if (ps.escaped) escaped += 1.0;
    }
    const double m = double(cfg.samples);
    json j;
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    j["boundary"] = cfg.boundary;
    j["contact_fraction_mean"] = contact_frac / m;
    j["last_sign_plus_freq"] = last_sign_plus / m;
    j["endpoint_mean"] = endpoint_mean / m;
    j["escaped_freq"] = escaped / m;
    Sink sink(cfg, out, "sample_summary.json");
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_phase_diagram(const ChargeSpec& spec, const RunConfig& cfg, std::ostream& out) {
    if (spec.omega.empty())
        throw std::invalid_argument("phase-diagram needs an 'omega' array in the input spec");
    if (cfg.beta_grid.empty() || cfg.h_grid.empty())
        throw std::invalid_argument("phase-diagram needs --beta-grid and --h-grid");
    WalkLaw walk = first_return_law(spec.p, cfg.n_max);
    ScanOptions opt;
    opt.kernel.n_max = cfg.n_max;
    opt.cls_tol = cfg.cls_tol;
    std::vector<PhasePoint> grid =
        scan(spec.omega, walk, parse_grid(cfg.beta_grid), parse_grid(cfg.h_grid), opt);
    if (cfg.rho_mc) {
        for (PhasePoint& pt : grid)
            pt.rho_mc = rho_monte_carlo(spec.omega, pt.h, pt.beta, walk, cfg.mc_horizon,
                                        cfg.mc_samples, cfg.seed, opt.kernel);
    }
    Sink sink(cfg, out, "phase_diagram.csv");
    std::ostream& os = sink.stream();
    os << "beta,h,delta,F_gauged,f_raw,rho_fd,rho_mc,regime\n";
    for (const PhasePoint& pt : grid)
        os << fmt(pt.beta) << "," << fmt(pt.h) << "," << fmt(pt.delta) << ","
           << fmt(pt.f_gauged) << "," << fmt(pt.f_raw) << "," << fmt(pt.rho_fd) << ","
           << fmt(pt.rho_mc) << "," << regime_name(pt.regime) << "\n";
    return 0;
}

struct VerifyReporter {
    std::ostream& os;
    bool all_ok = true;
    void check(const std::string& name, bool ok, const std::string& detail = "") {
        os << (ok ? "[PASS] " : "[FAIL] ") << name;
        if (!detail.empty()) os << ": " << detail;
        os << "\n";
        all_ok = all_ok && ok;
    }
};

RawCharges random_charges(Rng& rng, std::size_t t) {
    auto draw = [&rng, t]() {
        std::vector<double> v(t);
        for (double& x : v) x = 2.0 * rng.u01() - 1.0;
        return v;
    };
    return RawCharges{draw(), draw(), draw(), draw()};
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    VerifyReporter rep{out};
    Rng rng(cfg.seed);

    // Enumeration vs DP on random instances.
    double worst = 0.0;
    for (std::size_t t : {1, 2, 3}) {
        for (double p : {0.1, 0.3}) {
            RawCharges raw = random_charges(rng, t);
            const std::size_t n = 8;
            BruteForce bf = brute_force(raw, p, n);
            WalkLaw walk = first_return_law(p, 64);
            CycleCharges c = normalize(raw);
            KernelSetOptions opt{.n_max = 32, .with_tail = false};
            KernelSet ks = build_kernel_set(c, walk, opt);
            FreeEnergyReport fr;  // tilt-free: B has no tail, keep b = 0
            fr.regime = Regime::critical;
            fr.xi_at_f.assign(t, 1.0 / double(t));
            PartitionTable tab = constrained_dp(ks, fr, n);
            free_dp(tab, ks, walk);
            worst = std::max(worst, std::fabs(std::log(bf.z_c) - tab.log_zc(0, n)));
            worst = std::max(worst, std::fabs(std::log(bf.z_f) - tab.log_zf(0, n)));
            for (std::size_t k = 1; k <= n; ++k) {
                const double dp = contact_marginal(ks, tab, Boundary::free_end, {k});
                worst = std::max(worst, std::fabs(dp - bf.single_f[k]));
            }
            worst = std::max(
                worst, std::fabs(endpoint_sign_prob(ks, tab, Boundary::free_end, walk) - bf.sign_f));
        }
    }
    rep.check("enumeration equivalence (Z, marginals, endpoint sign)", worst < 1e-10,
              "max deviation " + fmt(worst));

    // Matrix representation identity at several discount rates.
    worst = 0.0;
    for (int inst = 0; inst < 3; ++inst) {
        RawCharges raw = random_charges(rng, 2);
        WalkLaw walk = first_return_law(0.3, 4096);
        CycleCharges c = normalize(raw);
        KernelSet ks = build_kernel_set(c, walk, {.n_max = 2048, .with_tail = false});
        FreeEnergyReport fr = free_energy(ks);
        PartitionTable tab = constrained_dp(ks, fr, 120);
        for (double b : {0.0, 0.05}) {
            SpectralResult sr = spectral_at(ks, b);
            for (std::size_t n : {40, 87, 120}) {
                const double lhs = tab.log_zc(0, n);
                const double rhs = representation_log_zc(ks, sr, n);
                worst = std::max(worst, std::fabs(lhs - rhs));
            }
        }
    }
    rep.check("matrix representation identity", worst < 1e-10, "max log gap " + fmt(worst));

    // Kernel row normalizations in all regimes.
    {
        WalkLaw walk = first_return_law(0.3, std::size_t(1) << 16);
        worst = 0.0;
        for (double w0 : {0.4, -1.0}) {
            CycleCharges c = normalize({{0.0}, {0.0}, {w0}, {0.0}});
            KernelSet ks = build_kernel_set(c, walk, {});
            FreeEnergyReport fr = free_energy(ks);
            if (fr.regime == Regime::strictly_delocalized) {
                AsymptoticConstants ac = asymptotic_constants(ks, fr.delta);
                for (Boundary a : {Boundary::constrained, Boundary::free_end}) {
                    SemiMarkovKernel k = defective_kernel(ks, ac, 0, a);
                    worst = std::max(worst, std::fabs(k.row_mass(0) - 1.0));
                }
            } else {
                SemiMarkovKernel k = gamma_kernel(ks, fr);
                worst = std::max(worst, std::fabs(k.row_mass(0) - 1.0));
            }
        }
        rep.check("kernel row normalization", worst < 1e-10, "max |row - 1| " + fmt(worst));

        // Gibbs identities on a boundary-sensitive instance.
        CycleCharges c = normalize({{0.0}, {0.7, -0.7}, {-1.2}, {0.0}});
        KernelSet ks = build_kernel_set(c, walk, {});
        FreeEnergyReport fr = free_energy(ks);
        AsymptoticConstants ac = asymptotic_constants(ks, fr.delta);
        GibbsDecomposition gd = gibbs_vectors(ks, ac, walk.c_tail);
        double gap = 0.0;
        const std::vector<std::vector<std::size_t>> cylinders = {{2}, {1, 5}, {2, 3, 9}};
        for (const auto& cyl : cylinders) {
            auto [l1, r1] = superposition_check(ks, gd.v_plus, gd.v_minus, 0.37, cyl);
            gap = std::max(gap, std::fabs(l1 - r1));
            for (Boundary a : {Boundary::constrained, Boundary::free_end}) {
                auto [l2, r2] = decomposition_check(ks, ac, gd, 1, a, cyl);
                gap = std::max(gap, std::fabs(l2 - r2));
            }
        }
        rep.check("Gibbs superposition and decomposition identities", gap < 1e-10,
                  "max gap " + fmt(gap));
    }

    out << (rep.all_ok ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    return rep.all_ok ? 0 : 3;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.command == "verify") return cmd_verify(cfg, out);
        ChargeSpec spec = load_spec(cfg.input);
        if (cfg.command == "free-energy") return cmd_free_energy(spec, cfg, out);
        if (cfg.command == "classify") return cmd_classify(spec, cfg, out);
        if (cfg.command == "partition") return cmd_partition(spec, cfg, out);
        if (cfg.command == "asymptotics") return cmd_asymptotics(spec, cfg, out);
        if (cfg.command == "limits") return cmd_limits(spec, cfg, out);
        if (cfg.command == "sample") return cmd_sample(spec, cfg, out);
        if (cfg.command == "phase-diagram") return cmd_phase_diagram(spec, cfg, out);
        throw std::invalid_argument("unknown command: " + cfg.command);
    } catch (const std::exception& ex) {
        json j;
        j["error"] = ex.what();
        err << j.dump() << "\n";
        return 1;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"periodic copolymer/pinning models: exact partition functions, "
                 "free energy, infinite-volume kernels, and samplers"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&cfg](CLI::App* sub, bool needs_input) {
        sub->add_option("--input", cfg.input, "charge spec JSON")->required(needs_input);
        sub->add_option("--output", cfg.output, "output path prefix");
        sub->add_option("--seed", cfg.seed, "RNG seed (default 1905)");
        sub->add_option("--n-max", cfg.n_max, "kernel truncation horizon");
        sub->add_option("--cls-tol", cfg.cls_tol, "critical classification tolerance");
    };

    CLI::App* fe = app.add_subcommand("free-energy", "delta, regime and free energy");
    add_common(fe, true);
    CLI::App* cl = app.add_subcommand("classify", "regime classification");
    add_common(cl, true);
    CLI::App* pa = app.add_subcommand("partition", "log partition tables (CSV)");
    add_common(pa, true);
    pa->add_option("--N", cfg.horizon, "system size")->required();
    CLI::App* as = app.add_subcommand("asymptotics", "amplitude matrices (delta < 1)");
    add_common(as, true);
    CLI::App* li = app.add_subcommand("limits", "infinite-volume limit report");
    add_common(li, true);
    li->add_option("--eta", cfg.eta, "class of the approach subsequence");
    li->add_option("--boundary", cfg.boundary, "free | constrained");
    CLI::App* sa = app.add_subcommand("sample", "draw polymer paths");
    add_common(sa, true);
    sa->add_option("--N", cfg.horizon, "finite volume size (omit for infinite-volume)");
    sa->add_option("--samples", cfg.samples, "batch size");
    sa->add_option("--eta", cfg.eta, "class of the approach subsequence");
    sa->add_option("--boundary", cfg.boundary, "free | constrained");
    CLI::App* ph = app.add_subcommand("phase-diagram", "grid scan of the (beta, h) family");
    add_common(ph, true);
    ph->add_option("--beta-grid", cfg.beta_grid, "lo:hi:step")->required();
    ph->add_option("--h-grid", cfg.h_grid, "lo:hi:step")->required();
    ph->add_flag("--rho-mc", cfg.rho_mc, "Monte-Carlo order parameter at every point");
    ph->add_option("--mc-samples", cfg.mc_samples, "MC sample count");
    ph->add_option("--mc-horizon", cfg.mc_horizon, "MC system size");
    CLI::App* ve = app.add_subcommand("verify", "run the identity/oracle battery");
    add_common(ve, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    return run(cfg, std::cout, std::cerr);
}

}  // namespace copoly
