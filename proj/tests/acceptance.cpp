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

// Acceptance driver: prints one PASS/FAIL line per criterion and exits
// nonzero if any selected criterion fails. `--only K` runs criterion K alone.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "bellcert/bell.hpp"
#include "bellcert/clifford.hpp"
#include "bellcert/extract.hpp"
#include "bellcert/game.hpp"
#include "bellcert/robustness.hpp"
#include "bellcert/sos.hpp"

using namespace bellcert;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void fail(Outcome& o, const std::string& why) {
    if (o.pass) o.detail = why;
    o.pass = false;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Outcome classical_bound() {
    Outcome o;
    for (int n = 2; n <= 10; ++n) {
        const auto formula = local_bound_formula(n);
        const auto brute = local_bound_bruteforce(build_game(n));
        if (formula != brute) fail(o, fmt("n=%g formula %g != brute force %g", n, double(formula), double(brute)));
    }
    if (local_bound_formula(2) != 2 || local_bound_formula(3) != 6) fail(o, "anchors n=2 -> 2, n=3 -> 6 not met");
    if (o.pass) o.detail = "n=2..10 exact; anchors 2, 6";
    return o;
}

Outcome quantum_bound_reproduction() {
    Outcome o;
    double worst = 0.0, worst_spec = 0.0;
    for (int n = 2; n <= 10; ++n) {
        const double err = std::abs(bell_value(canonical_strategy(n)) - quantum_bound(n));
        worst = std::max(worst, err);
        if (err > 1e-9) fail(o, fmt("bell value off by %g at n=%g", err, n));
    }
    for (int n = 2; n <= 6; ++n) {
        const double err = std::abs(spectral_quantum_value(bell_operator(canonical_strategy(n))) - quantum_bound(n));
        worst_spec = std::max(worst_spec, err);
        if (err > 1e-9) fail(o, fmt("spectral value off by %g at n=%g", err, n));
    }
    if (o.pass) o.detail = fmt("max |value - 2^{n-1}sqrt(n)| = %.3g, spectral %.3g", worst, worst_spec);
    return o;
}

Outcome sos_certificate() {
    Outcome o;
    double worst_rel = 0.0, worst_kernel = 0.0;
    for (int n = 2; n <= 8; ++n) {
        const SosCertificate c = verify_sos_identity(canonical_strategy(n));
        const double rel = c.identity_defect / c.omegas.sum();
        const double kern = c.kernel_residuals.maxCoeff();
        worst_rel = std::max(worst_rel, rel);
        worst_kernel = std::max(worst_kernel, kern);
        if (rel > 1e-8) fail(o, fmt("identity defect %g (relative) at n=%g", rel, n));
        if (kern > 1e-10) fail(o, fmt("kernel residual %g at n=%g", kern, n));
    }
    if (o.pass) o.detail = fmt("max relative identity defect %.3g, max kernel residual %.3g", worst_rel, worst_kernel);
    return o;
}

CMatrix literal4(std::initializer_list<std::initializer_list<Complex>> rows) {
    CMatrix m(4, 4);
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (const auto& v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Outcome golden_example() {
    Outcome o;
    const Complex i = kI, z = 0.0;
    // sigma_z (x) 1, sigma_y (x) 1, sigma_x (x) sigma_z, sigma_x (x) sigma_y
    const CMatrix zi = literal4({{1, z, z, z}, {z, 1, z, z}, {z, z, -1, z}, {z, z, z, -1}});
    const CMatrix yi = literal4({{z, z, -i, z}, {z, z, z, -i}, {i, z, z, z}, {z, i, z, z}});
    const CMatrix xz = literal4({{z, z, 1, z}, {z, z, z, -1}, {1, z, z, z}, {z, -1, z, z}});
    const CMatrix xy = literal4({{z, z, z, -i}, {z, z, i, z}, {z, -i, z, z}, {i, z, z, z}});
    const std::vector<CMatrix> alice{zi, yi, xz, xy};
    const std::vector<CMatrix> bob{zi, -yi, xz, -xy};
    const CliffordBasis b = clifford_generators(4);
    for (int y = 0; y < 4; ++y) {
        if (b.alice_gens[static_cast<std::size_t>(y)] != alice[static_cast<std::size_t>(y)]) {
            fail(o, fmt("Alice generator %g differs from the golden operator", y + 1));
        }
        if (b.bob_gens[static_cast<std::size_t>(y)] != bob[static_cast<std::size_t>(y)]) {
            fail(o, fmt("Bob generator %g differs from the golden operator", y + 1));
        }
    }
    double min_fid = 1.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const ExtractionReport r = extract_strategy(scramble(canonical_strategy(4), 2, 2, seed).strategy);
        if (!r.success) fail(o, "extraction failed: " + r.failure_reason);
        if (r.pair_count != 2) fail(o, fmt("extracted %g pairs, expected 2", r.pair_count));
        min_fid = std::min(min_fid, r.state_fidelity);
        for (Eigen::Index k = 0; k < r.pair_fidelities.size(); ++k) min_fid = std::min(min_fid, r.pair_fidelities(k));
        if (r.max_generator_defect > 1e-8) fail(o, fmt("generator defect %g", r.max_generator_defect));
    }
    if (min_fid < 1.0 - 1e-9) fail(o, fmt("fidelity %.17g below 1-1e-9", min_fid));
    if (o.pass) o.detail = fmt("8 operators exact; 2 pairs, min fidelity 1 - %.3g", 1.0 - min_fid);
    return o;
}

Outcome round_trip() {
    Outcome o;
    double min_fid = 1.0, worst_defect = 0.0;
    int runs = 0;
    for (int n = 2; n <= 8; ++n) {
        for (int ja : {1, 2}) {
            for (int jb : {1, 2}) {
                for (std::uint64_t seed = 0; seed < 5; ++seed) {
                    const ScrambleResult sc = scramble(canonical_strategy(n), ja, jb, seed);
                    const ExtractionReport r = extract_strategy(sc.strategy);
                    ++runs;
                    if (!r.success) fail(o, fmt("n=%g seed=%g: ", n, double(seed)) + r.failure_reason);
                    min_fid = std::min(min_fid, r.state_fidelity);
                    worst_defect = std::max(worst_defect, r.max_generator_defect);
                }
            }
        }
    }
    if (min_fid < 1.0 - 1e-9) fail(o, fmt("min fidelity 1 - %.3g", 1.0 - min_fid));
    if (worst_defect > 1e-8) fail(o, fmt("generator defect %.3g", worst_defect));
    if (o.pass) {
        o.detail = fmt("%g runs, min fidelity 1 - %.3g, max generator defect %.3g", runs, 1.0 - min_fid, worst_defect);
    }
    return o;
}

Outcome block_structure() {
    Outcome o;
    double worst_value = 0.0, min_fid = 1.0;
    const std::vector<std::pair<std::vector<double>, std::vector<int>>> layouts{
        {{0.7, 0.3}, {1, 1}}, {{0.5, 0.3, 0.2}, {1, 2, 1}}, {{0.6, 0.4}, {2, 3}}};
    for (int n : {2, 3, 4}) {
        for (const auto& [w, c] : layouts) {
            const Strategy s = block_sum_strategy(n, w, c);
            const double err = std::abs(bell_value(s) - quantum_bound(n));
            worst_value = std::max(worst_value, err);
            if (err > 1e-9) fail(o, fmt("block sum value off by %g at n=%g", err, n));
            const BlockwiseReport r = extract_blockwise(s);
            if (!r.success) fail(o, fmt("blockwise extraction failed at n=%g", n));
            if (r.blocks.size() < 2) fail(o, fmt("only %g Schmidt blocks found", double(r.blocks.size())));
            min_fid = std::min(min_fid, r.min_fidelity);
        }
    }
    if (min_fid < 1.0 - 1e-9) fail(o, fmt("per-block fidelity 1 - %.3g", 1.0 - min_fid));
    if (o.pass) o.detail = fmt("value error %.3g, min per-block fidelity 1 - %.3g", worst_value, 1.0 - min_fid);
    return o;
}

Outcome conjugate_equivalence() {
    Outcome o;
    double worst = 0.0;
    for (int n = 2; n <= 6; ++n) {
        const Strategy s = canonical_strategy(n);
        const RMatrix a = correlators(s);
        const RMatrix b = correlators(transposed_strategy(s));
        if (a.rows() != static_cast<Eigen::Index>(pow2(n - 1)) || a.cols() != n) fail(o, "correlator table has wrong shape");
        const double err = (a - b).cwiseAbs().maxCoeff();
        worst = std::max(worst, err);
        if (err > 1e-12) fail(o, fmt("correlators differ by %g at n=%g", err, n));
    }
    if (o.pass) o.detail = fmt("max correlator difference %.3g over n=2..6", worst);
    return o;
}

Outcome robustness_scaling() {
    Outcome o;
    std::string summary;
    const std::vector<double> grid = log_grid(1e-4, 1e-1, 10);
    SweepOptions opts;
    opts.residual_slack = 1.01;
    opts.distance_slack = 1.05;
    for (int n : {2, 3, 4}) {
        for (NoiseModel m : {NoiseModel::StateMix, NoiseModel::BobRotate}) {
            const ScalingReport r = scaling_sweep(n, m, grid, 5, opts);
            const std::string tag = std::string("n=") + std::to_string(n) + " " + noise_model_name(m);
            const double ex = r.state_distance_fit.exponent;
            if (r.regime_samples < 3) fail(o, tag + ": fewer than 3 samples with delta in [1e-7, 1e-3]");
            if (!(ex >= 0.40 && ex <= 0.60)) fail(o, tag + fmt(": exponent %.4f outside [0.40, 0.60]", ex));
            if (!r.all_residual_within_F) {
                fail(o, tag + fmt(": max_x ||M_x psi|| / (F_n sqrt(delta)) = %.4f > 1.01", r.max_residual_ratio));
            }
            if (!r.all_distance_within_C) {
                fail(o, tag + fmt(": state_distance / (C_n sqrt(delta)) = %.4f > 1.05", r.max_distance_ratio));
            }
            summary += "\n    " + tag +
                       fmt(": exponent %.4f, residual/F %.3f, distance/C %.3f", ex, r.max_residual_ratio,
                           r.max_distance_ratio) +
                       fmt(", rms/F %.3f, anticomm/L slack %.1f", r.max_rms_ratio, r.anticomm_slack) +
                       (r.all_residual_within_rigorous ? ", sqrt(2 delta/omega) bound holds" : ", rigorous bound FAILS");
        }
    }
    o.detail = (o.pass ? std::string("all sweeps within bounds") : o.detail) + summary;
    return o;
}

Outcome walsh_identities() {
    Outcome o;
    for (int n = 2; n <= 8; ++n) {
        const GameSpec g = build_game(n);
        const auto sums = walsh_column_sums(g);
        for (int y = 0; y < n; ++y) {
            for (int yp = y; yp < n; ++yp) {
                const std::int64_t expect = y == yp ? g.rows() : 0;
                if (sums[static_cast<std::size_t>(walsh_sum_index(n, y, yp))] != expect) {
                    fail(o, fmt("column identity broken at n=%g (y=%g, y'=%g)", n, y, yp));
                }
            }
        }
        const auto gram = pair_coefficient_gram(g);
        for (Eigen::Index p = 0; p < gram.rows(); ++p) {
            for (Eigen::Index q = 0; q < gram.cols(); ++q) {
                if (gram(p, q) != (p == q ? g.rows() : 0)) fail(o, fmt("pair identity broken at n=%g", n));
            }
        }
    }
    if (o.pass) o.detail = "both identities exact for n=2..8";
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only K]\n", argv[0]);
            return 2;
        }
    }
    const std::vector<Criterion> criteria{
        {1, "classical bound closed form vs brute force", 30, classical_bound},
        {2, "quantum bound reproduction", 120, quantum_bound_reproduction},
        {3, "SOS certificate", 60, sos_certificate},
        {4, "four-setting golden operators and extraction", 10, golden_example},
        {5, "self-testing round trip", 300, round_trip},
        {6, "Schmidt block structure", 60, block_structure},
        {7, "conjugate strategy equivalence", 60, conjugate_equivalence},
        {8, "robustness scaling", 600, robustness_scaling},
        {9, "Walsh orthogonality identities", 60, walsh_identities},
    };
    bool all = true;
    bool ran = false;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) continue;
        ran = true;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) fail(o, fmt("runtime %.1f s exceeds %.0f s", secs, c.budget_seconds));
        std::printf("%s criterion %d (%s) [%.2f s]: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                    o.detail.c_str());
        std::fflush(stdout);
        all = all && o.pass;
    }
    if (!ran) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    return all ? 0 : 1;
}
