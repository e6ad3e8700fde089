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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bellcert/sos.hpp"

namespace bellcert {

struct RobustnessConstants {
    int n = 0;
    double F_n = 0.0;
    double lambda_min = 0.0;
    double C_n = 0.0;
    double K_n = 0.0;
    double L_n = 0.0;
    double H_n = 0.0;
    double Q_n = 0.0;
    double D_n = 0.0;
    double E_n = 0.0;
};

inline RobustnessConstants constants(int n) {
    if (n < 2) throw InvalidParameter("constants: n must be >= 2");
    RobustnessConstants c;
    c.n = n;
    const double rn = std::sqrt(static_cast<double>(n));
    const double tail = std::ldexp(1.0, -(n + 2)) / (static_cast<double>(n) * n);
    c.F_n = std::exp2(0.5 * (2 - n)) / std::sqrt(rn);
    c.lambda_min = 2.0 * rn;
    c.C_n = 1.0 / std::sqrt(c.lambda_min);
    c.K_n = n <= kMaxGameSettings ? sign_pseudoinverse_norm(build_game(n)) : 1.0;
    c.L_n = c.K_n / (std::ldexp(1.0, n + 1) * n);
    c.H_n = 2.0 * c.C_n + c.F_n + tail;
    c.Q_n = (0.5 + rn) * c.C_n + tail;
    c.D_n = c.F_n + c.Q_n + c.H_n;
    c.E_n = rn * c.H_n;
    return c;
}

enum class NoiseModel { StateMix, BobRotate, AliceRotate, Combined };

inline const char* noise_model_name(NoiseModel m) {
    switch (m) {
        case NoiseModel::StateMix: return "state_mix";
        case NoiseModel::BobRotate: return "bob_rotate";
        case NoiseModel::AliceRotate: return "alice_rotate";
        case NoiseModel::Combined: return "combined";
    }
    return "?";
}

inline NoiseModel parse_noise_model(const std::string& s) {
    if (s == "state_mix") return NoiseModel::StateMix;
    if (s == "bob_rotate") return NoiseModel::BobRotate;
    if (s == "alice_rotate") return NoiseModel::AliceRotate;
    if (s == "combined") return NoiseModel::Combined;
    throw InvalidParameter("unknown noise model '" + s + "'");
}

inline constexpr double kMaxNoise = 0.3;

/// Applies seeded noise of strength eps. The noise directions (orthogonal
/// state, Hermitian generators) depend only on the seed, so varying eps with
/// a fixed seed moves along a single ray.
inline Strategy perturb(const Strategy& s, NoiseModel model, double eps, std::uint64_t seed) {
    check_shape(s);
    if (!(eps >= 0.0 && eps <= kMaxNoise)) throw InvalidParameter("perturb: eps must lie in [0, 0.3]");
    Rng rng(seed);
    Strategy out = s;
    const bool mix = model == NoiseModel::StateMix || model == NoiseModel::Combined;
    const bool bob = model == NoiseModel::BobRotate || model == NoiseModel::Combined;
    const bool alice = model == NoiseModel::AliceRotate || model == NoiseModel::Combined;

    // Draw every direction unconditionally so the streams line up across models.
    CVector perp = rng.unit_vector(s.state.dim());
    perp -= s.state.amplitudes * (s.state.amplitudes.dot(perp));
    perp /= perp.norm();
    std::vector<CMatrix> hb, ha;
    for (std::size_t y = 0; y < s.bob_obs.size(); ++y) hb.push_back(rng.unit_hermitian(s.state.dim_b));
    for (std::size_t x = 0; x < s.alice_obs.size(); ++x) ha.push_back(rng.unit_hermitian(s.state.dim_a));

    if (mix) {
        out.state.amplitudes = std::sqrt(1.0 - eps * eps) * s.state.amplitudes + eps * perp;
        out.state.amplitudes /= out.state.amplitudes.norm();
    }
    if (bob) {
        for (std::size_t y = 0; y < s.bob_obs.size(); ++y) {
            const CMatrix u = exp_i_hermitian(hb[y], eps);
            out.bob_obs[y] = u * s.bob_obs[y] * u.adjoint();
        }
    }
    if (alice) {
        for (std::size_t x = 0; x < s.alice_obs.size(); ++x) {
            const CMatrix u = exp_i_hermitian(ha[x], eps);
            out.alice_obs[x] = u * s.alice_obs[x] * u.adjoint();
        }
    }
    return out;
}

/// Relative eigenvalue cutoff defining the numerical kernel of the SOS operator.
inline constexpr double kKernelCutoff = 1e-9;

struct KernelInfo {
    CMatrix basis;               // orthonormal kernel vectors as columns
    double lambda_min_measured;  // smallest eigenvalue above the cutoff
};

/// Numerical kernel of sum_x (omega_x/2) M_x^dag M_x. If `dim` is given, the
/// `dim` lowest eigenvectors are returned instead of thresholding.
inline KernelInfo sos_kernel(const ResidualOps& r, std::optional<Eigen::Index> dim = std::nullopt) {
    const HermitianEigen eig = eig_hermitian(sos_operator(r), 1e-8);
    const double top = std::max(eig.values.maxCoeff(), 1e-300);
    Eigen::Index k = 0;
    if (dim) {
        k = *dim;
    } else {
        while (k < eig.values.size() && eig.values(k) <= kKernelCutoff * top) ++k;
    }
    KernelInfo info;
    info.basis = eig.vectors.leftCols(k);
    info.lambda_min_measured = k < eig.values.size() ? eig.values(k) : std::numeric_limits<double>::quiet_NaN();
    return info;
}

struct BoundValues {
    double C = 0.0, F = 0.0, L = 0.0, D = 0.0, E = 0.0;
};

struct RobustnessSample {
    double noise_param = 0.0;
    std::uint64_t seed = 0;
    double delta = 0.0;
    double state_distance = 0.0;            // against the perturbed strategy's own near-kernel
    double reference_kernel_distance = 0.0; // against the reference kernel
    RVector residuals;                      // ||M~_x psi~||
    double max_residual = 0.0;
    double rms_residual = 0.0;
    RVector residual_rigorous_bounds;       // sqrt(2 delta / omega~_x)
    RVector omegas;
    RVector delta_x;                        // omega~_x^2 - n
    double delta_x_anticomm_defect = 0.0;   // same quantity rebuilt from anticommutators
    double sos_delta = 0.0;                 // sum (omega~/2) ||M~ psi~||^2
    double sos_delta_general = 0.0;         // sos_delta + (G_opt - sum omega~)
    double max_anticomm = 0.0;
    double alice_obs_deviation = 0.0;
    double bob_obs_deviation = 0.0;
    double lambda_min_measured = 0.0;
    BoundValues bound_values;
};

/// Measures deviations of a perturbed strategy from the reference. Both must
/// live on the same local dimensions.
inline RobustnessSample measure_sample(const Strategy& s_tilde, const Strategy& reference) {
    check_shape(s_tilde);
    check_shape(reference);
    if (s_tilde.state.dim_a != reference.state.dim_a || s_tilde.state.dim_b != reference.state.dim_b ||
        s_tilde.game.n != reference.game.n) {
        throw InvalidParameter("measure_sample: perturbed and reference strategies differ in shape");
    }
    const int n = reference.game.n;
    const double optimum = quantum_bound(n);
    RobustnessSample smp;
    smp.delta = optimum - bell_value(s_tilde);
    if (smp.delta < -1e-9) {
        throw InvariantViolation("measure_sample: Bell value exceeds the quantum bound, input corrupt");
    }
    const double d = std::max(smp.delta, 0.0);
    const double sd = std::sqrt(d);

    const ResidualOps ref = residual_ops(reference);
    const KernelInfo ref_kernel = sos_kernel(ref);
    smp.lambda_min_measured = ref_kernel.lambda_min_measured;
    const CVector& psi = s_tilde.state.amplitudes;
    smp.reference_kernel_distance =
        (psi - ref_kernel.basis * (ref_kernel.basis.adjoint() * psi)).norm();

    const ResidualOps own = residual_ops(s_tilde);
    const KernelInfo own_kernel = sos_kernel(own, ref_kernel.basis.cols());
    smp.state_distance = (psi - own_kernel.basis * (own_kernel.basis.adjoint() * psi)).norm();

    smp.omegas = own.omegas;
    smp.residuals.resize(own.size());
    smp.residual_rigorous_bounds.resize(own.size());
    smp.delta_x.resize(own.size());
    double weighted = 0.0;
    for (std::int64_t x = 0; x < own.size(); ++x) {
        smp.residuals(x) = own.apply(x, s_tilde.state).norm();
        weighted += own.omegas(x) / 2.0 * smp.residuals(x) * smp.residuals(x);
        smp.residual_rigorous_bounds(x) = std::sqrt(2.0 * d / own.omegas(x));
        smp.delta_x(x) = own.omegas(x) * own.omegas(x) - n;
    }
    smp.max_residual = smp.residuals.maxCoeff();
    smp.rms_residual = std::sqrt(smp.residuals.squaredNorm() / static_cast<double>(own.size()));
    smp.sos_delta = weighted;
    smp.sos_delta_general = weighted + (optimum - own.omegas.sum());

    const RMatrix anti = anticommutator_expectations(s_tilde.bob_obs, s_tilde.state, Side::B);
    for (int y = 0; y < n; ++y) {
        for (int yp = y + 1; yp < n; ++yp) smp.max_anticomm = std::max(smp.max_anticomm, std::abs(anti(y, yp)));
    }
    for (std::int64_t x = 0; x < own.size(); ++x) {
        double rebuilt = 0.0;
        for (int y = 0; y < n; ++y) {
            rebuilt += anti(y, y) / 2.0 - 1.0;  // <B_y^2> - 1, zero for involutions
            for (int yp = y + 1; yp < n; ++yp) rebuilt += reference.game.sign(x, y) * reference.game.sign(x, yp) * anti(y, yp);
        }
        smp.delta_x_anticomm_defect = std::max(smp.delta_x_anticomm_defect, std::abs(rebuilt - smp.delta_x(x)));
    }

    for (std::size_t x = 0; x < reference.alice_obs.size(); ++x) {
        smp.alice_obs_deviation = std::max(
            smp.alice_obs_deviation,
            state_weighted_norm(s_tilde.alice_obs[x] - reference.alice_obs[x], s_tilde.state, Side::A));
    }
    for (std::size_t y = 0; y < reference.bob_obs.size(); ++y) {
        smp.bob_obs_deviation = std::max(
            smp.bob_obs_deviation,
            state_weighted_norm(s_tilde.bob_obs[y] - reference.bob_obs[y], s_tilde.state, Side::B));
    }

    const RobustnessConstants c = constants(n);
    smp.bound_values = {c.C_n * sd, c.F_n * sd, c.L_n * sd, c.D_n * sd, c.E_n * sd};
    return smp;
}

/// Least-squares line log(y) = a + b log(x).
struct PowerFit {
    double exponent = std::numeric_limits<double>::quiet_NaN();
    double exponent_stderr = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
    int points = 0;
};

inline PowerFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    PowerFit fit;
    fit.points = static_cast<int>(lx.size());
    if (fit.points < 2) return fit;
    const double k = static_cast<double>(fit.points);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) return fit;
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    if (fit.points > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const double e = ly[i] - fit.intercept - fit.exponent * lx[i];
            sse += e * e;
        }
        fit.exponent_stderr = std::sqrt(sse / (k - 2.0) / sxx);
    }
    return fit;
}

struct DegenerateGrid : InvalidParameter {
    using InvalidParameter::InvalidParameter;
};

struct SweepOptions {
    double delta_floor = 1e-12;   // samples below this carry no scaling information
    double regime_low = 1e-7;     // enforced regime for bound checks and fits
    double regime_high = 1e-3;
    double residual_slack = 1.01;
    double distance_slack = 1.05;
    int threads = 1;
};

struct SampleFlags {
    bool in_regime = false;
    bool residual_within_F = false;   // max_x ||M~_x psi~|| <= F_n sqrt(delta) * slack
    bool residual_within_rigorous = false;
    bool distance_within_C = false;   // state_distance <= C_n sqrt(delta) * slack
    double residual_ratio = 0.0;      // max_residual / (F_n sqrt delta)
    double rms_ratio = 0.0;           // rms_residual / (F_n sqrt delta)
    double distance_ratio = 0.0;      // state_distance / (C_n sqrt delta)
    double anticomm_ratio = 0.0;      // max_anticomm / (L_n sqrt delta)
};

struct ScalingReport {
    int n = 0;
    NoiseModel model = NoiseModel::StateMix;
    RobustnessConstants constants;
    std::vector<RobustnessSample> samples;
    std::vector<SampleFlags> flags;
    PowerFit state_distance_fit;
    PowerFit reference_kernel_distance_fit;
    PowerFit alice_deviation_fit;
    PowerFit bob_deviation_fit;
    PowerFit max_residual_fit;
    int regime_samples = 0;
    double max_residual_ratio = 0.0;
    double max_rms_ratio = 0.0;
    double max_distance_ratio = 0.0;
    double anticomm_slack = 0.0;      // max anticomm_ratio in regime
    bool all_residual_within_F = true;
    bool all_residual_within_rigorous = true;
    bool all_distance_within_C = true;
};

/// Log-spaced grid of `points` values from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> out;
    if (points == 1) return {lo};
    for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    return out;
}

/// Perturbs the canonical strategy along `seeds` rays over eps_grid, measures
/// every sample and fits the scaling exponents against delta over the samples
/// inside [regime_low, regime_high].
inline ScalingReport scaling_sweep(int n, NoiseModel model, const std::vector<double>& eps_grid, int seeds,
                                   const SweepOptions& opts = {}) {
    if (eps_grid.empty() || seeds < 1) throw InvalidParameter("scaling_sweep: empty grid");
    const Strategy reference = canonical_strategy(n);
    ScalingReport rep;
    rep.n = n;
    rep.model = model;
    rep.constants = constants(n);
    const std::size_t total = eps_grid.size() * static_cast<std::size_t>(seeds);
    rep.samples.resize(total);
    std::vector<std::string> errors(total);

    auto work = [&](std::size_t i) {
        const std::uint64_t seed = static_cast<std::uint64_t>(i % static_cast<std::size_t>(seeds));
        const double eps = eps_grid[i / static_cast<std::size_t>(seeds)];
        try {
            RobustnessSample smp = measure_sample(perturb(reference, model, eps, seed), reference);
            smp.noise_param = eps;
            smp.seed = seed;
            rep.samples[i] = std::move(smp);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };
    const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(total)));
    if (threads == 1) {
        for (std::size_t i = 0; i < total; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < total; i += static_cast<std::size_t>(threads)) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw InvariantViolation("scaling_sweep: " + e);
    }

    bool any_informative = false;
    for (const auto& s : rep.samples) any_informative = any_informative || s.delta > opts.delta_floor;
    if (!any_informative) throw DegenerateGrid("scaling_sweep: every sample has delta below the numerical floor");

    std::vector<double> deltas, dist, refdist, adev, bdev, res;
    const auto& c = rep.constants;
    for (const auto& s : rep.samples) {
        SampleFlags f;
        const double sd = std::sqrt(std::max(s.delta, 0.0));
        f.in_regime = s.delta >= opts.regime_low && s.delta <= opts.regime_high;
        if (sd > 0.0) {
            f.residual_ratio = s.max_residual / (c.F_n * sd);
            f.rms_ratio = s.rms_residual / (c.F_n * sd);
            f.distance_ratio = s.state_distance / (c.C_n * sd);
            f.anticomm_ratio = s.max_anticomm / (c.L_n * sd);
        }
        f.residual_within_F = f.residual_ratio <= opts.residual_slack;
        f.distance_within_C = f.distance_ratio <= opts.distance_slack;
        f.residual_within_rigorous = true;
        for (Eigen::Index x = 0; x < s.residuals.size(); ++x) {
            f.residual_within_rigorous =
                f.residual_within_rigorous && s.residuals(x) <= s.residual_rigorous_bounds(x) * (1.0 + 1e-6) + 1e-12;
        }
        if (f.in_regime) {
            ++rep.regime_samples;
            deltas.push_back(s.delta);
            dist.push_back(s.state_distance);
            refdist.push_back(s.reference_kernel_distance);
            adev.push_back(s.alice_obs_deviation);
            bdev.push_back(s.bob_obs_deviation);
            res.push_back(s.max_residual);
            rep.max_residual_ratio = std::max(rep.max_residual_ratio, f.residual_ratio);
            rep.max_rms_ratio = std::max(rep.max_rms_ratio, f.rms_ratio);
            rep.max_distance_ratio = std::max(rep.max_distance_ratio, f.distance_ratio);
            rep.anticomm_slack = std::max(rep.anticomm_slack, f.anticomm_ratio);
            rep.all_residual_within_F = rep.all_residual_within_F && f.residual_within_F;
            rep.all_residual_within_rigorous = rep.all_residual_within_rigorous && f.residual_within_rigorous;
            rep.all_distance_within_C = rep.all_distance_within_C && f.distance_within_C;
        }
        rep.flags.push_back(f);
    }
    rep.state_distance_fit = fit_power_law(deltas, dist);
    rep.reference_kernel_distance_fit = fit_power_law(deltas, refdist);
    rep.alice_deviation_fit = fit_power_law(deltas, adev);
    rep.bob_deviation_fit = fit_power_law(deltas, bdev);
    rep.max_residual_fit = fit_power_law(deltas, res);
    return rep;
}

}  // namespace bellcert
