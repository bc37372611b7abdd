use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::fourier::FourierGrid;
use super::{FieldState, GridSpec};
use crate::error::{Error, Result};
use crate::wavefamily::TravelingWave;

const NEWTON_ITERS: usize = 60;

/// A traveling wave sampled on a torus grid, with the Fourier data needed
/// for distances to its symmetry orbit.
#[derive(Debug, Clone)]
pub struct TorusWave {
    fg: FourierGrid,
    pub c: f64,
    pub omega: f64,
    pub nu: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub varphi: Vec<f64>,
    phi_hat: Vec<Complex64>,
    psi_hat: Vec<Complex64>,
    varphi_hat: Vec<Complex64>,
}

/// `c L / (4 pi)` must be an integer for `e^{i c x / 2}` to be `L`-periodic.
pub(crate) fn check_gauge(c: f64, l: f64) -> Result<()> {
    let q = c * l / (4.0 * PI);
    if (q - q.round()).abs() > 1e-9 * q.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "c L / (4 pi) = {q} is not an integer, so e^(i c x/2) phi(x) is not L-periodic"
        )));
    }
    Ok(())
}

impl TorusWave {
    /// Sample the wave at `x_j`, reading the profile on `[-L/2, L/2)`.
    pub fn sample(wave: &dyn TravelingWave, grid: GridSpec) -> Result<Self> {
        check_gauge(wave.speed(), grid.l())?;
        let l = grid.l();
        let wrap = |x: f64| x - l * (x / l).round();
        let xs = grid.nodes();
        let phi: Vec<f64> = xs.iter().map(|&x| wave.phi(wrap(x))).collect();
        let psi: Vec<f64> = xs.iter().map(|&x| wave.psi(wrap(x))).collect();
        let varphi: Vec<f64> = xs.iter().map(|&x| wave.varphi(wrap(x))).collect();
        let fg = FourierGrid::new(grid);
        Ok(Self {
            phi_hat: fg.fft_real(&phi),
            psi_hat: fg.fft_real(&psi),
            varphi_hat: fg.fft_real(&varphi),
            fg,
            c: wave.speed(),
            omega: wave.omega(),
            nu: wave.nu(),
            phi,
            psi,
            varphi,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.fg.grid()
    }

    pub fn fourier(&self) -> &FourierGrid {
        &self.fg
    }

    /// `(psi, varphi, e^{i c x/2} phi)` at `t = 0`.
    pub fn initial_state(&self) -> FieldState {
        self.exact_state(0.0)
    }

    /// `v = psi(x - ct)`, `V = varphi(x - ct)`,
    /// `u = e^{-i omega t} e^{i c (x - ct)/2} phi(x - ct)`; shifts by spectral interpolation.
    pub fn exact_state(&self, t: f64) -> FieldState {
        let fg = &self.fg;
        let y = -self.c * t;
        let moved = |hat: &[Complex64], samples: &[f64]| -> Vec<f64> {
            if t == 0.0 {
                samples.to_vec()
            } else {
                fg.ifft_real(&fg.shift(hat, y))
            }
        };
        let phi = moved(&self.phi_hat, &self.phi);
        let phase = -(self.omega + 0.5 * self.c * self.c) * t;
        let u = self
            .grid()
            .nodes()
            .iter()
            .zip(&phi)
            .map(|(&x, &p)| Complex64::from_polar(p, phase + 0.5 * self.c * x))
            .collect();
        FieldState {
            t,
            v: moved(&self.psi_hat, &self.psi),
            big_v: moved(&self.varphi_hat, &self.varphi),
            u,
        }
    }

    /// `(T_c u)(x) = e^{-i c (x - c t)/2} u(x)`
    pub fn gauge(&self, u: &[Complex64], t: f64) -> Vec<Complex64> {
        let xs = self.grid().nodes();
        u.iter()
            .zip(&xs)
            .map(|(z, &x)| z * Complex64::from_polar(1.0, -0.5 * self.c * (x - self.c * t)))
            .collect()
    }

    /// `||phi||_{1,nu}^2`
    pub fn scale(&self) -> f64 {
        self.fg.norm2_h1(&self.phi_hat, self.nu)
    }

    pub fn psi_norm(&self) -> f64 {
        self.fg.norm2(&self.psi_hat).sqrt()
    }

    pub fn phi_norm(&self) -> f64 {
        self.fg.norm2(&self.phi_hat).sqrt()
    }

    pub(crate) fn psi_hat(&self) -> &[Complex64] {
        &self.psi_hat
    }

    pub(crate) fn varphi_hat(&self) -> &[Complex64] {
        &self.varphi_hat
    }
}

/// Correlation `C(y) = sum_n X_n e^{i kappa_n y}` and its first two derivatives.
fn correlation(x: &[Complex64], kappa: &[f64], y: f64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (z, &k) in x.iter().zip(kappa) {
        let e = z * Complex64::from_polar(1.0, k * y);
        out[0] += e;
        out[1] += e * Complex64::new(0.0, k);
        out[2] -= e * (k * k);
    }
    out
}

#[derive(Clone, Copy)]
enum Objective {
    /// maximize `|C|^2`
    Modulus,
    /// maximize `Re C`
    Real,
}

impl Objective {
    fn value(self, c: Complex64) -> f64 {
        match self {
            Self::Modulus => c.norm_sqr(),
            Self::Real => c.re,
        }
    }

    /// First and second derivatives of the objective in `y`.
    fn slopes(self, c: [Complex64; 3]) -> (f64, f64) {
        match self {
            Self::Modulus => (
                2.0 * (c[0].conj() * c[1]).re,
                2.0 * (c[1].norm_sqr() + (c[0].conj() * c[2]).re),
            ),
            Self::Real => (c[1].re, c[2].re),
        }
    }
}

/// Maximize the objective over all shifts: grid scan by inverse FFT, then
/// quadratic interpolation and safeguarded Newton.
fn best_shift(fg: &FourierGrid, x: &[Complex64], objective: Objective) -> f64 {
    let n = fg.n();
    let h = fg.grid().h();
    let mut scan = x.to_vec();
    fg.ifft_in_place(&mut scan);
    let vals: Vec<f64> = scan.iter().map(|&c| objective.value(c)).collect();
    let j = (0..n).fold(0, |b, j| if vals[j] > vals[b] { j } else { b });
    let (fm, f0, fp) = (vals[(j + n - 1) % n], vals[j], vals[(j + 1) % n]);
    let curv = fm - 2.0 * f0 + fp;
    let mut y = j as f64 * h;
    if curv < 0.0 {
        y += 0.5 * h * (fm - fp) / curv;
    }
    let kappa = fg.kappa();
    let at = |y: f64| objective.value(correlation(x, kappa, y)[0]);
    let mut best = at(y);
    for _ in 0..NEWTON_ITERS {
        let (g, gg) = objective.slopes(correlation(x, kappa, y));
        let mut step = if gg < 0.0 { -g / gg } else { g.signum() * h };
        step = step.clamp(-h, h);
        let mut accepted = false;
        for _ in 0..30 {
            let trial = at(y + step);
            if trial >= best {
                y += step;
                best = trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() <= 1e-15 * fg.l() {
            break;
        }
    }
    y.rem_euclid(fg.l())
}

/// Result of minimizing `Omega(y, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitalFit {
    /// `sqrt(min Omega)`
    pub rho: f64,
    pub omega_min: f64,
    /// in `[0, L)`
    pub y_star: f64,
    /// in `[0, 2 pi)`
    pub theta_star: f64,
}

fn h1_correlation(wave: &TorusWave, w_hat: &[Complex64]) -> Vec<Complex64> {
    let s = wave.fg.quad_scale();
    w_hat
        .iter()
        .zip(&wave.phi_hat)
        .zip(wave.fg.kappa2())
        .map(|((a, b), k2)| a * b.conj() * ((k2 + wave.nu) * s))
        .collect()
}

fn residual(wave: &TorusWave, w_hat: &[Complex64], y: f64, theta: f64) -> Vec<Complex64> {
    let rot = Complex64::from_polar(1.0, theta);
    wave.fg
        .shift(w_hat, y)
        .iter()
        .zip(&wave.phi_hat)
        .map(|(a, b)| a * rot - b)
        .collect()
}

/// `Omega(y, theta) = ||e^{i theta} (T_c u)(. + y) - phi||_{1,nu}^2`, computed
/// from the residual.
pub fn omega_functional(wave: &TorusWave, u: &[Complex64], t: f64, y: f64, theta: f64) -> f64 {
    let w_hat = wave.fg.fft(&wave.gauge(u, t));
    wave.fg.norm2_h1(&residual(wave, &w_hat, y, theta), wave.nu)
}

/// Distance from `u` at time `t` to the orbit of `e^{i c x/2} phi` under
/// translations and phase rotations.
pub fn orbital_distance(wave: &TorusWave, u: &[Complex64], t: f64) -> Result<OrbitalFit> {
    if u.len() != wave.fg.n() {
        return Err(Error::InvalidInput(format!(
            "{} samples for a grid of {}",
            u.len(),
            wave.fg.n()
        )));
    }
    let w_hat = wave.fg.fft(&wave.gauge(u, t));
    let x = h1_correlation(wave, &w_hat);
    let y = best_shift(&wave.fg, &x, Objective::Modulus);
    let c = correlation(&x, wave.fg.kappa(), y)[0];
    let theta = (-c.arg()).rem_euclid(2.0 * PI);
    let omega_min = wave.fg.norm2_h1(&residual(wave, &w_hat, y, theta), wave.nu);
    Ok(OrbitalFit {
        rho: omega_min.sqrt(),
        omega_min,
        y_star: y,
        theta_star: theta,
    })
}

/// First-order conditions at a reported minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stationarity {
    /// `d Omega / dy`
    pub g_y: f64,
    /// `d Omega / d theta`
    pub g_theta: f64,
    /// `||phi||_{1,nu}^2`
    pub scale: f64,
    /// `int q phi psi` with `e^{i theta} (T_c u)(. + y) - phi = p + i q`
    pub q_phi_psi: f64,
    /// `int p (phi psi)'`
    pub p_dphipsi: f64,
}

pub fn stationarity_check(wave: &TorusWave, u: &[Complex64], t: f64, y: f64, theta: f64) -> Stationarity {
    let fg = &wave.fg;
    let w_hat = fg.fft(&wave.gauge(u, t));
    let x = h1_correlation(wave, &w_hat);
    let c = correlation(&x, fg.kappa(), y);
    let rot = Complex64::from_polar(1.0, theta);
    let xi = fg.ifft(&residual(wave, &w_hat, y, theta));
    let phipsi: Vec<f64> = wave.phi.iter().zip(&wave.psi).map(|(a, b)| a * b).collect();
    let dphipsi = fg.ifft_real(&fg.derivative(&fg.fft_real(&phipsi)));
    let h = fg.grid().h();
    Stationarity {
        g_y: -2.0 * (rot * c[1]).re,
        g_theta: 2.0 * (rot * c[0]).im,
        scale: wave.scale(),
        q_phi_psi: xi.iter().zip(&phipsi).map(|(z, w)| z.im * w).sum::<f64>() * h,
        p_dphipsi: xi.iter().zip(&dphipsi).map(|(z, w)| z.re * w).sum::<f64>() * h,
    }
}

/// `||f(. + y) - target||` for real `f`.
pub fn shift_distance(fg: &FourierGrid, f: &[f64], target_hat: &[Complex64], y: f64) -> f64 {
    let shifted = fg.shift(&fg.fft_real(f), y);
    let diff: Vec<Complex64> = shifted.iter().zip(target_hat).map(|(a, b)| a - b).collect();
    fg.norm2(&diff).sqrt()
}

/// `inf_y ||f(. + y) - target||` and the minimizing shift.
pub fn best_shift_distance(fg: &FourierGrid, f: &[f64], target_hat: &[Complex64]) -> (f64, f64) {
    let f_hat = fg.fft_real(f);
    let s = fg.quad_scale();
    let x: Vec<Complex64> = f_hat.iter().zip(target_hat).map(|(a, b)| a * b.conj() * s).collect();
    let y = best_shift(fg, &x, Objective::Real);
    (shift_distance(fg, f, target_hat, y), y)
}
