use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::fourier::{signed_index, FourierGrid};
use super::orbital::TorusWave;
use super::FieldState;
use crate::error::{Error, Result};

/// Seeded band-limited perturbation of a sampled wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub delta: f64,
    pub seed: u64,
    /// Keep `int v0 <= int psi`.
    pub respect_mean_condition: bool,
    /// Rescale `u0` so that `||u0|| = ||phi||`.
    pub renormalize: bool,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Modes `|n| <= N/8` with unit-normal coefficients; conjugate-symmetric when `real`.
fn band_limited(fg: &FourierGrid, rng: &mut ChaCha8Rng, real: bool, with_mean: bool) -> Vec<Complex64> {
    let n = fg.n();
    let top = (n / 8) as i64;
    let mut hat = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let s = signed_index(j, n);
        if s.abs() > top || (s == 0 && !with_mean) {
            continue;
        }
        if real && s < 0 {
            continue;
        }
        let re = normal(rng);
        let im = if real && s == 0 { 0.0 } else { normal(rng) };
        hat[j] = Complex64::new(re, im);
        if real && s > 0 {
            hat[n - j] = hat[j].conj();
        }
    }
    hat
}

/// `(psi + dv, varphi + dV, e^{i c x/2} (phi + xi))` with
/// `||xi||_{1,nu} = delta ||phi||_{1,nu}`, `||dv|| = ||dV|| = delta ||psi||`,
/// and `dV` of zero mean. Draw order: `xi`, then `dv`, then `dV`.
pub fn perturbed_state(wave: &TorusWave, p: &Perturbation) -> Result<FieldState> {
    if !(p.delta >= 0.0 && p.delta.is_finite()) {
        return Err(Error::InvalidInput(format!("delta = {} must be nonnegative", p.delta)));
    }
    let fg = wave.fourier();
    let mut state = wave.initial_state();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut xi = band_limited(fg, &mut rng, false, true);
    let mut dv = band_limited(fg, &mut rng, true, true);
    let mut dvv = band_limited(fg, &mut rng, true, false);

    if p.respect_mean_condition && dv[0].re > 0.0 {
        dv[0] = Complex64::new(0.0, 0.0);
    }
    let scale_to = |hat: &mut [Complex64], current: f64, target: f64| {
        let f = if current > 0.0 { target / current } else { 0.0 };
        hat.iter_mut().for_each(|z| *z *= f);
    };
    let psi = wave.psi_norm();
    let sizes = [fg.norm2_h1(&xi, wave.nu).sqrt(), fg.norm2(&dv).sqrt(), fg.norm2(&dvv).sqrt()];
    scale_to(&mut xi, sizes[0], p.delta * wave.scale().sqrt());
    scale_to(&mut dv, sizes[1], p.delta * psi);
    scale_to(&mut dvv, sizes[2], p.delta * psi);

    let xi = fg.ifft(&xi);
    let dv = fg.ifft_real(&dv);
    let dvv = fg.ifft_real(&dvv);
    let xs = fg.grid().nodes();
    for j in 0..fg.n() {
        let gauge = Complex64::from_polar(1.0, 0.5 * wave.c * xs[j]);
        state.u[j] = gauge * (wave.phi[j] + xi[j]);
        state.v[j] += dv[j];
        state.big_v[j] += dvv[j];
    }
    if p.renormalize {
        let norm = fg.norm2(&fg.fft(&state.u)).sqrt();
        let f = wave.phi_norm() / norm;
        state.u.iter_mut().for_each(|z| *z *= f);
    }
    Ok(state)
}
