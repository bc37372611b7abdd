//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use zakharov_core::dynamics::{
    omega_functional, orbital_distance, run_ensemble, solitary_experiment, stability_experiment,
    ExperimentConfig, Perturbation, TorusWave,
};
use zakharov_core::spectral::{
    constrained_forms, eigenvalues, instability_intervals, l3_operator, l3_verdict, l4_verdict,
    lambda_from_rho, lame_eigen_analytic, lame_operator, Boundary, COINCIDENT, SIGN_MARGIN,
};
use zakharov_core::wavefamily::{
    build_wave, family_sweep, geometric_grid, mass_derivative, nu_threshold, solitary_wave,
};
use zakharov_core::{complete_e, complete_k, jacobi_sn_cn_dn, DnoidalWave, GridSpec, Modulus, TravelingWave};

// criterion 1
const PERIOD_TOL: f64 = 1e-12;
const ODE_TOL: f64 = 1e-9;
const ODE_POINTS: usize = 1024;
const SWEEP_POINTS: usize = 20;
const SWEEP_LO: f64 = 1.01;
const SWEEP_HI: f64 = 100.0;
const C1_SECONDS: f64 = 10.0;
// criterion 2
const MASS_TOL: f64 = 1e-10;
const MASS_QUAD_POINTS: usize = 8192;
const C2_SECONDS: f64 = 5.0;
// criterion 4
const SPECTRAL_N: usize = 512;
const ZERO_TOL: f64 = 1e-6;
const SIGN_TOL: f64 = 1e-4;
const SEPARATION: f64 = 1e-3;
const ALIGN_MIN: f64 = 0.9999;
const C4_SECONDS: f64 = 60.0;
// criterion 5
const LAME_TOL: f64 = 1e-8;
const WIDE_GAP: f64 = 1e-4;
const CLOSED_GAP: f64 = 1e-6;
const RHO1_TOL: f64 = 1e-12;
const MAP_TOL: f64 = 1e-5;
// criterion 6
const ALPHA0_TOL: f64 = 1e-5;
const FORM_MIN: f64 = 1e-3;
// criterion 7
const EVOLVE_N: usize = 256;
const EVOLVE_DT: f64 = 1e-4;
const EVOLVE_T: f64 = 5.0;
const DRIFT_TOL: f64 = 1e-7;
const EXACT_RHO: f64 = 1e-5;
const UV_RATIO: f64 = 10.0;
const C7_SECONDS: f64 = 300.0;
// criterion 8
const DELTAS: [f64; 2] = [1e-3, 1e-2];
const SUP_RATIO: f64 = 20.0;
const DELTA_B_TOL: f64 = 1e-8;
// criterion 9
const BOX: f64 = 80.0;
const SECH_TOL: f64 = 1e-6;
const SOLITARY_T: f64 = 10.0;
const SOLITARY_DELTA: f64 = 1e-3;
const TRACK_TOL: f64 = 1e-3;
// criterion 10
const KE_TOL: f64 = 1e-12;
const PENDULUM_TOL: f64 = 1e-10;
const GRID_Y: usize = 4096;
const GRID_THETA: usize = 512;
const BRUTE_TOL: f64 = 1e-6;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn periodic_trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    // integrand even and pi-periodic in t: the trapezoid rule on [0, pi) is spectral
    let h = PI / n as f64;
    (0..n).map(|j| f(j as f64 * h)).sum::<f64>() * h / 2.0
}

fn quad_k(k: f64) -> f64 {
    periodic_trapezoid(|t| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt(), 4096)
}

fn quad_e(k: f64) -> f64 {
    periodic_trapezoid(|t| (1.0 - k * k * t.sin().powi(2)).sqrt(), 4096)
}

/// RK4 on sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn.
fn pendulum(u: f64, k: f64) -> (f64, f64, f64) {
    let steps = 20_000;
    let h = u / steps as f64;
    let f = |y: [f64; 3]| [y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]];
    let mut y = [0.0, 1.0, 1.0];
    for _ in 0..steps {
        let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        let k1 = f(y);
        let k2 = f(add(y, k1, h / 2.0));
        let k3 = f(add(y, k2, h / 2.0));
        let k4 = f(add(y, k3, h));
        for i in 0..3 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    (y[0], y[1], y[2])
}

fn representative_waves() -> Vec<DnoidalWave> {
    let mut out = Vec::new();
    let speeds = [0.0, 0.5, -0.5];
    for (i, &l) in [2.0 * PI, 10.0, 20.0].iter().enumerate() {
        for (j, &f) in [1.5, 4.0, 16.0].iter().enumerate() {
            out.push(build_wave(l, speeds[(i + j) % 3], f * nu_threshold(l)).expect("wave"));
        }
    }
    out
}

/// A wave whose envelope is periodic on its own period: c L / (4 pi) = 1.
fn evolution_wave() -> DnoidalWave {
    let l = 8.0 * PI;
    build_wave(l, 0.5, 3.0 * nu_threshold(l)).expect("wave")
}

fn c1_family() -> Outcome {
    let start = Instant::now();
    let mut worst_period: f64 = 0.0;
    let mut worst_ode: f64 = 0.0;
    for &l in &[2.0 * PI, 10.0, 20.0] {
        for &c in &[0.0, 0.5, -0.5] {
            let thr = nu_threshold(l);
            let grid = geometric_grid(SWEEP_LO * thr, SWEEP_HI * thr, SWEEP_POINTS);
            let table = match family_sweep(l, c, &grid) {
                Ok(t) => t,
                Err(e) => return outcome(false, format!("sweep L={l} c={c}: {e}")),
            };
            for row in &table.rows {
                worst_period = worst_period.max(row.period_residual / l);
                let w = build_wave(l, c, row.nu).expect("wave");
                let rel = w.ode_residuals(ODE_POINTS).expect("residuals").relative_to(&w.residual_scales());
                worst_ode = worst_ode.max(rel.max());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_period <= PERIOD_TOL && worst_ode <= ODE_TOL && secs <= C1_SECONDS,
        format!("max |T-L|/L = {worst_period:.2e}, max relative ODE residual = {worst_ode:.2e}, {secs:.2} s"),
    )
}

fn c2_mass() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut min_slope = f64::INFINITY;
    for &l in &[2.0 * PI, 10.0, 20.0] {
        for &c in &[0.0, 0.5, -0.5] {
            let thr = nu_threshold(l);
            for nu in geometric_grid(SWEEP_LO * thr, SWEEP_HI * thr, SWEEP_POINTS) {
                let w = build_wave(l, c, nu).expect("wave");
                let h = l / MASS_QUAD_POINTS as f64;
                let quad: f64 = (0..MASS_QUAD_POINTS).map(|j| w.phi(j as f64 * h).powi(2)).sum::<f64>() * h;
                let closed = w.mass_integral();
                worst = worst.max((quad - closed).abs() / closed);
                let slope = mass_derivative(l, c, nu, 1e-6 * nu).expect("derivative");
                min_slope = min_slope.min(slope);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= MASS_TOL && min_slope > 0.0 && secs <= C2_SECONDS,
        format!("max relative mass error = {worst:.2e}, min d/dnu = {min_slope:.3e}, {secs:.2} s"),
    )
}

fn c3_monotone() -> Outcome {
    let mut failures = Vec::new();
    for &l in &[2.0 * PI, 10.0, 20.0] {
        for &c in &[0.0, 0.5, -0.5] {
            let thr = nu_threshold(l);
            let grid = geometric_grid(SWEEP_LO * thr, SWEEP_HI * thr, SWEEP_POINTS);
            let m = family_sweep(l, c, &grid).expect("sweep").monotonicity();
            if !(m.eta2_decreasing && m.k_increasing) {
                failures.push(format!("L={l:.3} c={c}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "eta2 strictly decreasing and k strictly increasing on all 9 sweeps".to_string()
        } else {
            format!("violations: {}", failures.join(", "))
        },
    )
}

fn c4_spectral() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut worst_zero: f64 = 0.0;
    let mut min_align: f64 = 1.0;
    for w in representative_waves() {
        let nu = w.nu();
        let v3 = l3_verdict(&w, SPECTRAL_N).expect("L3");
        let v4 = l4_verdict(&w, SPECTRAL_N).expect("L4");
        let e3 = &v3.eigenvalues;
        let e4 = &v4.eigenvalues;
        worst_zero = worst_zero.max(e3[1].abs() / nu).max(e4[0].abs() / nu);
        min_align = min_align.min(v3.alignment_phi_prime).min(v4.alignment_phi);
        let ok4 = e4[0].abs() <= ZERO_TOL * nu && e4[1] - e4[0] > SEPARATION * nu && v4.alignment_phi >= ALIGN_MIN;
        let ok3 = e3[0] < -SIGN_TOL * nu
            && e3[1].abs() <= ZERO_TOL * nu
            && e3[2] > SIGN_TOL * nu
            && e3[1] - e3[0] > SEPARATION * nu
            && e3[2] - e3[1] > SEPARATION * nu
            && e3[3] - e3[2] > SEPARATION * nu
            && v3.alignment_phi_prime >= ALIGN_MIN;
        if !(ok3 && ok4) {
            let p = w.params();
            bad.push(format!("(L={:.3}, c={}, nu={:.4}, k={:.6})", p.l, p.c, nu, p.k));
        }
    }
    assert_eq!((SIGN_MARGIN, COINCIDENT), (SIGN_TOL, ZERO_TOL));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad.is_empty() && secs <= C4_SECONDS,
        format!(
            "9 waves, max |zero eigenvalue|/nu = {worst_zero:.2e}, min alignment = {min_align:.8}, {secs:.1} s{}",
            if bad.is_empty() { String::new() } else { format!(", failing {}", bad.join(" ")) }
        ),
    )
}

fn c5_lame() -> Outcome {
    let mut worst_triple: f64 = 0.0;
    let mut gap_ok = true;
    let mut detail = Vec::new();
    for &k in &[0.3, 0.5, 0.8] {
        let m = Modulus::from_k(k).unwrap();
        let t = lame_eigen_analytic(m);
        let ev = eigenvalues(&lame_operator(m, SPECTRAL_N).unwrap(), 3, Boundary::Periodic).unwrap();
        worst_triple = worst_triple
            .max((ev[0] - t.rho0).abs())
            .max((ev[1] - t.rho1).abs())
            .max((ev[2] - t.rho2).abs());
        let gaps = instability_intervals(m, 10, SPECTRAL_N).expect("gaps");
        let wide = gaps.iter().filter(|g| g.width() > WIDE_GAP).count();
        let closed = gaps[3..].iter().map(|g| g.width()).fold(0.0, f64::max);
        gap_ok &= wide == 3 && closed <= CLOSED_GAP;
        detail.push(format!("k={k}: {wide} wide gaps, max width of gaps 4-10 = {closed:.1e}"));
    }
    let mut worst_rho1: f64 = 0.0;
    let mut worst_map: f64 = 0.0;
    for w in representative_waves().iter().step_by(4) {
        let t = lame_eigen_analytic(w.modulus());
        let direct = eigenvalues(&l3_operator(w, SPECTRAL_N).unwrap(), 3, Boundary::Periodic).unwrap();
        worst_rho1 = worst_rho1.max(lambda_from_rho(w, t.rho1).abs());
        worst_map = worst_map
            .max((lambda_from_rho(w, t.rho0) - direct[0]).abs() / w.nu())
            .max((lambda_from_rho(w, t.rho2) - direct[2]).abs() / w.nu());
    }
    outcome(
        worst_triple <= LAME_TOL && gap_ok && worst_rho1 <= RHO1_TOL && worst_map <= MAP_TOL,
        format!(
            "triple error {worst_triple:.1e}; {}; |lambda(rho1)| = {worst_rho1:.1e}; map error/nu = {worst_map:.1e}",
            detail.join("; ")
        ),
    )
}

fn c6_forms() -> Outcome {
    let mut worst_alpha0: f64 = 0.0;
    let mut min_alpha = f64::INFINITY;
    let mut min_beta = f64::INFINITY;
    for w in representative_waves() {
        let nu = w.nu();
        let f = constrained_forms(&w, SPECTRAL_N).expect("forms");
        worst_alpha0 = worst_alpha0.max(f.alpha0.abs() / nu);
        min_alpha = min_alpha.min(f.alpha / nu);
        min_beta = min_beta.min(f.beta / nu);
    }
    outcome(
        worst_alpha0 <= ALPHA0_TOL && min_alpha >= FORM_MIN && min_beta >= FORM_MIN,
        format!("max |alpha0|/nu = {worst_alpha0:.1e}, min alpha/nu = {min_alpha:.3e}, min beta/nu = {min_beta:.3e}"),
    )
}

fn evolve_cfg(delta: f64, seed: u64, t_end: f64) -> ExperimentConfig {
    ExperimentConfig {
        n: EVOLVE_N,
        t_end,
        dt: Some(EVOLVE_DT),
        save_interval: 0.05,
        perturbation: Perturbation {
            delta,
            seed,
            respect_mean_condition: true,
            renormalize: false,
        },
        ..ExperimentConfig::default()
    }
}

fn c7_conservation() -> Outcome {
    let start = Instant::now();
    let w = evolution_wave();
    let perturbed = stability_experiment(&w, &evolve_cfg(1e-2, 2024, EVOLVE_T)).expect("perturbed run");
    let exact = stability_experiment(&w, &evolve_cfg(0.0, 0, EVOLVE_T)).expect("exact run");
    let s = perturbed.summary();
    let e = exact.summary();
    let drift = s.drift_e.max(s.drift_q1).max(s.drift_q2);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        s.blow_up_t.is_none()
            && drift <= DRIFT_TOL
            && e.sup_rho <= EXACT_RHO
            && s.drift_q1_uv >= UV_RATIO * s.drift_q1.max(f64::MIN_POSITIVE)
            && secs <= C7_SECONDS,
        format!(
            "drift E/Q1/Q2 = {:.1e}/{:.1e}/{:.1e}, exact sup rho = {:.1e}, uV-form Q1 drift = {:.1e}, {secs:.1} s",
            s.drift_e, s.drift_q1, s.drift_q2, e.sup_rho, s.drift_q1_uv
        ),
    )
}

fn c8_orbital() -> Outcome {
    let w = evolution_wave();
    let keys: Vec<(u64, f64)> = DELTAS.iter().map(|&d| (7, d)).collect();
    let records = match run_ensemble(&w, &evolve_cfg(0.0, 7, EVOLVE_T), &keys) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let sums: Vec<_> = records.iter().map(|r| r.summary()).collect();
    let no_blow = sums.iter().all(|s| s.blow_up_t.is_none());
    let finite = sums.iter().all(|s| s.sup_rho.is_finite());
    let ratio = sums[1].sup_rho / sums[0].sup_rho;
    let db_ok = sums
        .iter()
        .all(|s| s.delta_b_change <= DELTA_B_TOL * s.delta_b0.abs().max(1.0));
    outcome(
        no_blow && finite && ratio <= SUP_RATIO && db_ok,
        format!(
            "sup rho = {:.3e} (1e-3), {:.3e} (1e-2), ratio = {ratio:.2}, max dB change = {:.1e}",
            sums[0].sup_rho,
            sums[1].sup_rho,
            sums[0].delta_b_change.max(sums[1].delta_b_change)
        ),
    )
}

fn c9_solitary() -> Outcome {
    // c = 1/2 and s = sqrt(-4 omega - c^2) = 80 / (8 pi), so the box 80/s = 8 pi
    // also satisfies c L / (4 pi) = 1
    let c = 0.5;
    let s = BOX / (8.0 * PI);
    let omega = -(s * s + c * c) / 4.0;
    let l = BOX / s;
    let sech = solitary_wave(omega, c).unwrap();
    let dn = build_wave(l, c, sech.nu()).expect("matching dnoidal wave");
    let sup = (0..4096)
        .map(|j| -l / 2.0 + l * j as f64 / 4096.0)
        .map(|x| (dn.phi(x) - sech.phi(x)).abs())
        .fold(0.0, f64::max);
    let cfg = ExperimentConfig {
        n: EVOLVE_N,
        t_end: SOLITARY_T,
        dt: None,
        save_interval: 0.1,
        perturbation: Perturbation {
            delta: SOLITARY_DELTA,
            seed: 99,
            respect_mean_condition: true,
            renormalize: false,
        },
        ..ExperimentConfig::default()
    };
    let r = match solitary_experiment(omega, c, BOX, &cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let sm = r.summary();
    let track = r
        .times
        .iter()
        .zip(&r.y_star)
        .map(|(t, y)| {
            let d = (y - c * t).rem_euclid(l);
            d.min(l - d)
        })
        .fold(0.0, f64::max);
    outcome(
        sup <= SECH_TOL && sm.blow_up_t.is_none() && sm.sup_rho.is_finite() && sm.sup_rho < 1.0 && track <= TRACK_TOL * l,
        format!(
            "L = {l:.4}, sup|dn - sech| = {sup:.1e}, sup rho = {:.3e}, max |y* - ct| = {track:.1e}",
            sm.sup_rho
        ),
    )
}

fn c10_oracles() -> Outcome {
    let mut ke: f64 = 0.0;
    for &k in &[0.1, 0.5, 0.8, 0.95] {
        let m = Modulus::from_k(k).unwrap();
        ke = ke
            .max((complete_k(m).unwrap() / quad_k(k) - 1.0).abs())
            .max((complete_e(m).unwrap() / quad_e(k) - 1.0).abs());
    }
    let mut jac: f64 = 0.0;
    for &(u, k) in &[(0.7, 0.6), (2.5, 0.9), (-1.2, 0.3), (4.0, 0.99)] {
        let t = jacobi_sn_cn_dn(u, Modulus::from_k(k).unwrap());
        let (s, c, d) = pendulum(u, k);
        jac = jac.max((t.sn - s).abs()).max((t.cn - c).abs()).max((t.dn - d).abs());
    }
    // brute-force (y, theta) grid, then local zoom, against the Fourier minimizer
    let w = evolution_wave();
    let tw = TorusWave::sample(&w, GridSpec::new(w.period(), EVOLVE_N).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = tw.grid().nodes();
    let l = tw.grid().l();
    let base = tw.exact_state(1.7).u;
    let coeffs: Vec<(Complex64, f64)> = (1..=8)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let p: f64 = StandardNormal.sample(&mut rng);
            (Complex64::new(a, b), p)
        })
        .collect();
    let u: Vec<Complex64> = base
        .iter()
        .zip(&x)
        .map(|(z, &x)| {
            let mut d = Complex64::new(0.0, 0.0);
            for (m, (a, p)) in coeffs.iter().enumerate() {
                d += a * (2.0 * PI * (m + 1) as f64 * x / l + p).cos();
            }
            z + d * 3e-3
        })
        .collect();
    let t = 1.7;
    let fit = orbital_distance(&tw, &u, t).unwrap();
    let f = |y: f64, th: f64| omega_functional(&tw, &u, t, y, th);
    let (mut by, mut bt, mut best) = (0.0, 0.0, f64::INFINITY);
    for i in 0..GRID_Y {
        let y = l * i as f64 / GRID_Y as f64;
        for j in 0..GRID_THETA {
            let th = 2.0 * PI * j as f64 / GRID_THETA as f64;
            let v = f(y, th);
            if v < best {
                (by, bt, best) = (y, th, v);
            }
        }
    }
    let (mut hy, mut ht) = (l / GRID_Y as f64, 2.0 * PI / GRID_THETA as f64);
    for _ in 0..40 {
        let mut next = (by, bt, best);
        for a in -4..=4 {
            for b in -4..=4 {
                let (y, th) = (by + a as f64 * hy / 4.0, bt + b as f64 * ht / 4.0);
                let v = f(y, th);
                if v < next.2 {
                    next = (y, th, v);
                }
            }
        }
        (by, bt, best) = next;
        hy /= 2.0;
        ht /= 2.0;
    }
    let brute = (best.max(0.0)).sqrt();
    let rho_err = (brute - fit.rho).abs();
    // Lamé diagonalization against the closed form is counted above; repeat at k = 0.5
    let m = Modulus::from_k(0.5).unwrap();
    let tr = lame_eigen_analytic(m);
    let ev = eigenvalues(&lame_operator(m, SPECTRAL_N).unwrap(), 3, Boundary::Periodic).unwrap();
    let lame = (ev[0] - tr.rho0).abs().max((ev[2] - tr.rho2).abs());
    outcome(
        ke <= KE_TOL && jac <= PENDULUM_TOL && rho_err <= BRUTE_TOL && lame <= LAME_TOL,
        format!(
            "K/E vs quadrature {ke:.1e}, sn/cn/dn vs pendulum {jac:.1e}, rho brute force {brute:.6e} vs {:.6e} ({rho_err:.1e}), Lame {lame:.1e}",
            fit.rho
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("family construction", c1_family),
        ("mass formula and slope", c2_mass),
        ("monotonicity chains", c3_monotone),
        ("spectral verdicts for L3 and L4", c4_spectral),
        ("Lame structure", c5_lame),
        ("constrained forms", c6_forms),
        ("conservation and exact-wave fixed point", c7_conservation),
        ("orbital stability runs", c8_orbital),
        ("solitary limit", c9_solitary),
        ("oracle layer", c10_oracles),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let o = run();
        println!(
            "criterion {id:>2} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
