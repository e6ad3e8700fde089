// Copyright 2026 The bellcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bellcert/extract.hpp"
#include "bellcert/report.hpp"
#include "bellcert/robustness.hpp"

namespace bellcert::cli {

using report::Json;
using report::Verdict;

enum ExitCode : int { kPass = 0, kVerdictFailure = 1, kUsageError = 2, kInternalError = 3 };

/// Tolerances recognised by --tol.NAME=VALUE, with their defaults.
inline const std::map<std::string, double>& default_tolerances() {
    static const std::map<std::string, double> tol{
        {"sos", 1e-8},               // SOS identity defect relative to sum_x omega_x
        {"kernel", 1e-9},            // largest ||M_x psi||
        {"value", 1e-9},             // Bell value / spectral value vs 2^{n-1} sqrt(n)
        {"fidelity", 1.0 - 1e-6},    // extraction success threshold
        {"defect", 1e-8},            // generator and stabilizer defects
        {"slack", 1.05},             // robustness bound slack in the enforced regime
        {"exponent", 0.10},          // allowed |fitted exponent - 1/2|
        {"degeneracy", 1e-8},        // Schmidt block grouping
    };
    return tol;
}

struct RunConfig {
    std::string command;
    int n = 4;
    std::uint64_t seed = 0;
    std::map<std::string, double> tolerances = default_tolerances();
    std::string model = "state_mix";
    std::vector<double> eps_grid;
    int seeds = 3;
    int junk_a = 1;
    int junk_b = 1;
    std::string format = "json";
    std::string out;
    int threads = 1;
    std::string inject_fault;

    double tol(const std::string& name) const { return tolerances.at(name); }

    Json to_json() const {
        Json j{{"command", command}, {"n", n}, {"seed", seed}, {"model", model}, {"seeds", seeds},
               {"junk_a", junk_a}, {"junk_b", junk_b}, {"format", format}, {"threads", threads}};
        j["eps_grid"] = eps_grid;
        j["tolerances"] = Json(tolerances);
        if (!inject_fault.empty()) j["inject_fault"] = inject_fault;
        return j;
    }
};

/// Payload plus verdicts produced by one command.
struct Section {
    Json payload = Json::object();
    std::vector<Verdict> verdicts;
    Json rows = Json::array();  // CSV rows, when the command has natural rows
};

inline std::vector<double> default_eps_grid(const std::string& command) {
    if (command == "all") return log_grid(1e-4, 3e-2, 5);
    return log_grid(1e-4, 1e-1, 7);
}

// --- Commands ------------------------------------------------------------------

inline Section cmd_bounds(const RunConfig& cfg) {
    Section sec;
    const int n = cfg.n;
    const GameSpec g = build_game(n);
    const auto formula = local_bound_formula(n);
    const double q = quantum_bound(n);
    Json& p = sec.payload;
    p["n"] = n;
    p["local_bound_formula"] = formula;
    p["quantum_bound"] = q;
    p["ratio"] = q / static_cast<double>(formula);
    p["pseudoinverse_norm"] = sign_pseudoinverse_norm(g);
    if (n <= kMaxBruteForceSettings) {
        const auto brute = local_bound_bruteforce(g);
        p["local_bound_bruteforce"] = brute;
        p["local_bound_mismatch"] = static_cast<double>(brute > formula ? brute - formula : formula - brute);
        sec.verdicts.push_back(report::at_most("bruteforce_equals_formula", p["local_bound_mismatch"].get<double>(),
                                               0.0, "local_bound_mismatch"));
    } else {
        p["local_bound_bruteforce"] = "skipped: n>12";
    }
    if (clifford_dim(n) * clifford_dim(n) <= 1024) {
        const Strategy s = canonical_strategy(n);
        const double spectral = spectral_quantum_value(bell_operator(s));
        p["spectral_value"] = spectral;
        p["spectral_gap"] = std::abs(spectral - q);
        sec.verdicts.push_back(report::at_most("spectral_matches_quantum_bound", std::abs(spectral - q),
                                               cfg.tol("value"), "spectral_gap"));
    } else {
        p["spectral_value"] = "skipped: joint dimension > 1024";
    }
    return sec;
}

inline Section cmd_strategy(const RunConfig& cfg) {
    Section sec;
    const Strategy s = canonical_strategy(cfg.n);
    const double value = bell_value(s);
    const double q = quantum_bound(cfg.n);
    Json& p = sec.payload;
    p["n"] = cfg.n;
    p["m_star"] = clifford_dim(cfg.n);
    p["dim_a"] = s.state.dim_a;
    p["dim_b"] = s.state.dim_b;
    p["alice_observables"] = s.alice_obs.size();
    p["bob_observables"] = s.bob_obs.size();
    p["bell_value"] = value;
    p["quantum_bound"] = q;
    p["value_gap"] = std::abs(value - q);
    p["strategy_defect"] = strategy_defect(s);
    if (clifford_dim(cfg.n) <= 8) {
        Json gens = Json::array();
        for (const auto& b : s.bob_obs) gens.push_back(report::to_json(b));
        p["bob_generators"] = gens;
    }
    sec.verdicts.push_back(report::at_most("bell_value_matches_quantum_bound", p["value_gap"].get<double>(),
                                           cfg.tol("value"), "value_gap"));
    sec.verdicts.push_back(report::at_most("observables_are_involutions", p["strategy_defect"].get<double>(),
                                           cfg.tol("defect"), "strategy_defect"));
    return sec;
}

/// Test hook: deliberately break the canonical strategy.
inline Strategy faulty_strategy(const RunConfig& cfg) {
    Strategy s = canonical_strategy(cfg.n);
    if (cfg.inject_fault == "non-involutive") {
        s.bob_obs[0] *= 0.9;
    } else if (!cfg.inject_fault.empty()) {
        throw InvalidParameter("unknown fault '" + cfg.inject_fault + "'");
    }
    return s;
}

inline Section cmd_sos(const RunConfig& cfg) {
    Section sec;
    const Strategy s = faulty_strategy(cfg);
    const SosCertificate c = verify_sos_identity(s);
    const OptimalityDiagnostics d = optimality_diagnostics(s, cfg.tol("degeneracy"));
    Json cert{{"omegas", report::to_json(c.omegas)},
              {"identity_defect", c.identity_defect},
              {"relative_identity_defect", c.identity_defect / c.claimed_value},
              {"expectation_defect", c.expectation_defect},
              {"premise_defect", c.premise_defect},
              {"kernel_residuals", report::to_json(c.kernel_residuals)},
              {"max_kernel_residual", c.kernel_residuals.maxCoeff()},
              {"claimed_value", c.claimed_value},
              {"bell_value", c.bell_value},
              {"quantum_bound", quantum_bound(cfg.n)},
              {"claimed_value_gap", std::abs(c.claimed_value - quantum_bound(cfg.n))}};
    Json blocks = Json::array();
    for (const auto& b : d.blocks) {
        blocks.push_back({{"lambda", b.lambda}, {"multiplicity", b.multiplicity}, {"begin", b.begin}});
    }
    Json diag{{"bob_anticomm", report::to_json(d.bob_anticomm)},
              {"max_bob_anticomm", d.max_bob_anticomm},
              {"alice_anticomm_defect", d.alice_anticomm_defect},
              {"max_alice_effective_anticomm", d.max_alice_effective_anticomm},
              {"transpose_defects", report::to_json(d.transpose_defects)},
              {"transpose_defect", d.transpose_defect},
              {"alice_offblock", report::to_json(d.alice_offblock)},
              {"bob_offblock", report::to_json(d.bob_offblock)},
              {"max_offblock", d.max_offblock},
              {"schmidt_rank", d.schmidt_rank},
              {"schmidt_blocks", blocks}};
    sec.payload["certificate"] = cert;
    sec.payload["diagnostics"] = diag;
    sec.verdicts.push_back(report::at_most("sos_identity", c.identity_defect / c.claimed_value, cfg.tol("sos"),
                                           "certificate.relative_identity_defect"));
    sec.verdicts.push_back(report::at_most("sos_identity_premises", c.premise_defect, cfg.tol("defect"),
                                           "certificate.premise_defect"));
    sec.verdicts.push_back(report::at_most("kernel_residual", c.kernel_residuals.maxCoeff(), cfg.tol("kernel"),
                                           "certificate.max_kernel_residual"));
    sec.verdicts.push_back(report::at_most("claimed_value_matches_quantum_bound",
                                           std::abs(c.claimed_value - quantum_bound(cfg.n)), cfg.tol("value"),
                                           "certificate.claimed_value_gap"));
    return sec;
}

inline Json extraction_json(const ExtractionReport& r) {
    std::vector<int> perm = r.permutation;
    return Json{{"n", r.n},
                {"m_star", r.m_star},
                {"pair_count", r.pair_count},
                {"state_fidelity", r.state_fidelity},
                {"infidelity", 1.0 - r.state_fidelity},
                {"pair_fidelities", report::to_json(r.pair_fidelities)},
                {"alice_defects", report::to_json(r.alice_defects)},
                {"bob_defects", report::to_json(r.bob_defects)},
                {"max_generator_defect", r.max_generator_defect},
                {"alice_conjugate", r.alice_conjugate},
                {"bob_conjugate", r.bob_conjugate},
                {"junk_dims", {r.junk_dims.first, r.junk_dims.second}},
                {"junk_purity", r.junk_purity},
                {"stabilizer_residuals", report::to_json(r.stabilizer_residuals)},
                {"max_stabilizer_residual", r.stabilizer_residuals.maxCoeff()},
                {"odd_parity_mass", r.odd_parity_mass},
                {"precondition_defect", r.precondition_defect},
                {"u_alice_unitarity_defect", r.u_alice_unitarity_defect},
                {"v_bob_unitarity_defect", r.v_bob_unitarity_defect},
                {"max_unitarity_defect", std::max(r.u_alice_unitarity_defect, r.v_bob_unitarity_defect)},
                {"permutation", perm},
                {"success", r.success},
                {"failure_reason", r.failure_reason}};
}

inline Section cmd_extract(const RunConfig& cfg) {
    Section sec;
    const ScrambleResult sc = scramble(canonical_strategy(cfg.n), cfg.junk_a, cfg.junk_b, cfg.seed);
    const ExtractionReport r = extract_strategy(sc.strategy, cfg.tol("defect"), cfg.tol("fidelity"));
    sec.payload = extraction_json(r);
    sec.payload["scrambled_bell_value"] = bell_value(sc.strategy);
    sec.verdicts.push_back(report::at_least("extraction_fidelity", r.state_fidelity, cfg.tol("fidelity"),
                                            "state_fidelity"));
    sec.verdicts.push_back(report::at_most("generator_defect", r.max_generator_defect, cfg.tol("defect"),
                                           "max_generator_defect"));
    sec.verdicts.push_back(report::at_most("stabilizer_residual", r.stabilizer_residuals.maxCoeff(),
                                           cfg.tol("defect"), "max_stabilizer_residual"));
    sec.verdicts.push_back(report::at_most("unitarity", std::max(r.u_alice_unitarity_defect, r.v_bob_unitarity_defect),
                                           cfg.tol("defect"), "max_unitarity_defect"));
    return sec;
}

inline Json sample_row(const RobustnessSample& s, const SampleFlags& f) {
    return Json{{"eps", s.noise_param},
                {"seed", s.seed},
                {"delta", s.delta},
                {"state_distance", s.state_distance},
                {"reference_kernel_distance", s.reference_kernel_distance},
                {"max_residual", s.max_residual},
                {"rms_residual", s.rms_residual},
                {"sos_delta", s.sos_delta},
                {"sos_delta_general", s.sos_delta_general},
                {"max_anticomm", s.max_anticomm},
                {"alice_obs_deviation", s.alice_obs_deviation},
                {"bob_obs_deviation", s.bob_obs_deviation},
                {"bound_C", s.bound_values.C},
                {"bound_F", s.bound_values.F},
                {"bound_L", s.bound_values.L},
                {"bound_D", s.bound_values.D},
                {"bound_E", s.bound_values.E},
                {"in_regime", f.in_regime},
                {"residual_ratio_F", f.residual_ratio},
                {"rms_ratio_F", f.rms_ratio},
                {"distance_ratio_C", f.distance_ratio},
                {"anticomm_ratio_L", f.anticomm_ratio},
                {"residual_within_rigorous", f.residual_within_rigorous}};
}

inline Json fit_json(const PowerFit& f) {
    return Json{{"exponent", f.exponent}, {"stderr", f.exponent_stderr}, {"intercept", f.intercept}, {"points", f.points}};
}

inline Section cmd_robustness(const RunConfig& cfg) {
    Section sec;
    SweepOptions opts;
    opts.threads = cfg.threads;
    opts.distance_slack = cfg.tol("slack");
    const std::vector<double> grid = cfg.eps_grid.empty() ? default_eps_grid(cfg.command) : cfg.eps_grid;
    const ScalingReport rep = scaling_sweep(cfg.n, parse_noise_model(cfg.model), grid, cfg.seeds, opts);
    const auto& c = rep.constants;
    Json& p = sec.payload;
    p["constants"] = Json{{"F_n", c.F_n}, {"C_n", c.C_n}, {"K_n", c.K_n}, {"L_n", c.L_n}, {"H_n", c.H_n},
                          {"Q_n", c.Q_n}, {"D_n", c.D_n}, {"E_n", c.E_n}, {"lambda_min", c.lambda_min}};
    p["model"] = noise_model_name(rep.model);
    p["eps_grid"] = grid;
    p["regime"] = {opts.regime_low, opts.regime_high};
    p["regime_samples"] = rep.regime_samples;
    p["fits"] = Json{{"state_distance", fit_json(rep.state_distance_fit)},
                     {"reference_kernel_distance", fit_json(rep.reference_kernel_distance_fit)},
                     {"alice_obs_deviation", fit_json(rep.alice_deviation_fit)},
                     {"bob_obs_deviation", fit_json(rep.bob_deviation_fit)},
                     {"max_residual", fit_json(rep.max_residual_fit)}};
    p["max_residual_ratio_F"] = rep.max_residual_ratio;
    p["max_rms_ratio_F"] = rep.max_rms_ratio;
    p["max_distance_ratio_C"] = rep.max_distance_ratio;
    p["anticomm_slack_L"] = rep.anticomm_slack;
    p["all_residual_within_rigorous"] = rep.all_residual_within_rigorous;
    p["lambda_min_measured"] = rep.samples.empty() ? 0.0 : rep.samples.front().lambda_min_measured;
    p["exponent_offset"] = std::abs(rep.state_distance_fit.exponent - 0.5);
    Json samples = Json::array();
    for (std::size_t i = 0; i < rep.samples.size(); ++i) samples.push_back(sample_row(rep.samples[i], rep.flags[i]));
    p["samples"] = samples;
    sec.rows = samples;

    sec.verdicts.push_back(report::at_least("regime_samples", rep.regime_samples, 3.0, "regime_samples"));
    sec.verdicts.push_back(report::at_most("state_distance_exponent", std::abs(rep.state_distance_fit.exponent - 0.5),
                                           cfg.tol("exponent"), "exponent_offset = |fits.state_distance.exponent - 0.5|"));
    sec.verdicts.push_back(report::at_most("state_distance_bound", rep.max_distance_ratio, cfg.tol("slack"),
                                           "max_distance_ratio_C"));
    sec.verdicts.push_back(report::at_least("residual_rigorous_bound", rep.all_residual_within_rigorous ? 1.0 : 0.0, 1.0,
                                            "all_residual_within_rigorous"));
    return sec;
}

// --- Orchestration ---------------------------------------------------------------

inline Section run_command(const RunConfig& cfg) {
    if (cfg.command == "bounds") return cmd_bounds(cfg);
    if (cfg.command == "strategy") return cmd_strategy(cfg);
    if (cfg.command == "sos-check") return cmd_sos(cfg);
    if (cfg.command == "extract") return cmd_extract(cfg);
    if (cfg.command == "robustness") return cmd_robustness(cfg);
    Section all;
    const std::vector<std::pair<std::string, Section (*)(const RunConfig&)>> stages{
        {"bounds", cmd_bounds}, {"strategy", cmd_strategy}, {"sos", cmd_sos},
        {"extract", cmd_extract}, {"robustness", cmd_robustness}};
    for (const auto& [name, fn] : stages) {
        Section s = fn(cfg);
        all.payload[name] = s.payload;
        for (auto v : s.verdicts) {
            v.name = name + "." + v.name;
            v.source = name + "." + v.source;
            all.verdicts.push_back(v);
        }
        if (name == "robustness") all.rows = s.rows;
    }
    return all;
}

inline Json assemble(const RunConfig& cfg, const Section& sec) {
    Json verdicts = Json::object();
    bool passed = true;
    for (const auto& v : sec.verdicts) {
        verdicts[v.name] = v.to_json();
        passed = passed && v.pass();
    }
    return Json{{"schema_version", report::kSchemaVersion},
                {"config", cfg.to_json()},
                {"payload", sec.payload},
                {"verdicts", verdicts},
                {"passed", passed}};
}

inline std::string serialize(const RunConfig& cfg, const Section& sec) {
    if (cfg.format == "csv") {
        if (!sec.rows.empty()) return report::to_csv(sec.rows);
        Json rows = Json::array();
        for (const auto& v : sec.verdicts) {
            rows.push_back({{"check", v.name}, {"pass", v.pass()}, {"measured", v.measured},
                            {"threshold", v.threshold}, {"comparison", v.comparison}});
        }
        return report::to_csv(rows);
    }
    return report::to_canonical_json(assemble(cfg, sec));
}

inline std::string help_footer() {
    std::string s = "Tolerances (--tol.NAME=VALUE):\n";
    for (const auto& [k, v] : default_tolerances()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.10g", v);
        s += "  " + k + " = " + buf + "\n";
    }
    s += "Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 usage error, 3 internal error.\n"
         "Environment: BELLCERT_THREADS sets --threads when the flag is absent.\n";
    return s;
}

/// Strips --tol.NAME=VALUE (or --tol.NAME VALUE) from argv into cfg.
inline std::vector<std::string> extract_tolerances(int argc, const char* const* argv, RunConfig& cfg) {
    std::vector<std::string> rest;
    for (int i = 0; i < argc; ++i) {
        std::string a = argv[i];
        if (i == 0 || a.rfind("--tol.", 0) != 0) {
            rest.push_back(a);
            continue;
        }
        std::string body = a.substr(6);
        std::string name, value;
        const auto eq = body.find('=');
        if (eq != std::string::npos) {
            name = body.substr(0, eq);
            value = body.substr(eq + 1);
        } else {
            name = body;
            if (i + 1 >= argc) throw InvalidParameter("missing value for --tol." + name);
            value = argv[++i];
        }
        if (!default_tolerances().count(name)) throw InvalidParameter("unknown tolerance '" + name + "'");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != value.size() || !std::isfinite(v)) {
            throw InvalidParameter("bad value for --tol." + name + ": '" + value + "'");
        }
        cfg.tolerances[name] = v;
    }
    return rest;
}

inline bool write_output(const RunConfig& cfg, const std::string& text, std::ostream& out) {
    if (cfg.out.empty() || cfg.out == "-") {
        out << text;
        return static_cast<bool>(out);
    }
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) return false;
    f << text;
    return static_cast<bool>(f);
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"bellcert: certification toolkit for the n-setting parity Bell functional"};
    app.footer(help_footer());
    app.add_option("command", cfg.command, "bounds | strategy | sos-check | extract | robustness | all")
        ->required()
        ->check(CLI::IsMember({"bounds", "strategy", "sos-check", "extract", "robustness", "all"}));
    app.add_option("--n", cfg.n, "number of Bob settings")->capture_default_str()->check(CLI::Range(2, kMaxGameSettings));
    app.add_option("--seed", cfg.seed, "seed for adversaries and noise")->capture_default_str();
    app.add_option("--model", cfg.model, "noise model")
        ->capture_default_str()
        ->check(CLI::IsMember({"state_mix", "bob_rotate", "alice_rotate", "combined"}));
    app.add_option("--eps-grid", cfg.eps_grid, "comma-separated noise strengths in [0, 0.3]")->delimiter(',');
    app.add_option("--seeds", cfg.seeds, "noise seeds per grid point")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--junk-a", cfg.junk_a, "Alice junk dimension")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--junk-b", cfg.junk_b, "Bob junk dimension")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--format", cfg.format, "json | csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--out", cfg.out, "output path (default stdout)");
    app.add_option("--threads", cfg.threads, "worker threads for sweeps")
        ->envname("BELLCERT_THREADS")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--inject-fault", cfg.inject_fault, "test hook")->group("");

    std::vector<std::string> args;
    try {
        args = extract_tolerances(argc, argv, cfg);
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    std::vector<const char*> cargs;
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    for (double e : cfg.eps_grid) {
        if (!(e >= 0.0 && e <= kMaxNoise)) {
            err << "error: --eps-grid values must lie in [0, 0.3]\n";
            return kUsageError;
        }
    }

    auto error_report = [&](const std::string& type, const std::string& message) {
        Json j{{"schema_version", report::kSchemaVersion},
               {"config", cfg.to_json()},
               {"error", {{"type", type}, {"message", message}}},
               {"passed", false}};
        write_output(cfg, report::to_canonical_json(j), out);
        err << "error: " << message << "\n";
    };

    try {
        const Section sec = run_command(cfg);
        const std::string text = serialize(cfg, sec);
        if (!write_output(cfg, text, out)) {
            err << "error: cannot write to '" << cfg.out << "'\n";
            return kUsageError;
        }
        for (const auto& v : sec.verdicts) {
            if (!v.pass()) return kVerdictFailure;
        }
        return kPass;
    } catch (const InvalidParameter& e) {
        error_report("invalid_parameter", e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        error_report("internal", e.what());
        return kInternalError;
    }
}

}  // namespace bellcert::cli
