use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fourier::FourierGrid;
use super::stepper::SpectralState;
use super::{FieldState, GridSpec};
use crate::error::Result;

/// Energy, momentum and mass.
///
/// ```text
/// E  = int |u_x|^2 + v |u|^2 + (v^2 + V^2) / 2
/// Q1 = int v V + Im(u_x conj(u))
/// Q2 = int |u|^2
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZakInvariants {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "Q1")]
    pub q1: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
}

impl ZakInvariants {
    pub(crate) fn of_spectral(fg: &FourierGrid, s: &SpectralState) -> Self {
        let w = fg.quad_scale();
        let kappa = fg.kappa();
        let kappa2 = fg.kappa2();
        let mut grad = 0.0;
        let mut mom_u = 0.0;
        let mut mass = 0.0;
        for j in 0..fg.n() {
            let a = s.u[j].norm_sqr();
            grad += kappa2[j] * a;
            mom_u += kappa[j] * a;
            mass += a;
        }
        let vv = fg.inner(&s.v, &s.v).re;
        let big = fg.inner(&s.big_v, &s.big_v).re;
        let cross = fg.inner(&s.v, &s.big_v).re;
        // v |u|^2 is a trigonometric polynomial of degree < N when all three
        // factors are dealiased, so the trapezoid sum is exact
        let u = fg.ifft(&s.u);
        let v = fg.ifft_real(&s.v);
        let potential: f64 = u.iter().zip(&v).map(|(z, x)| x * z.norm_sqr()).sum::<f64>() * fg.grid().h();
        Self {
            e: w * grad + potential + 0.5 * (vv + big),
            q1: cross + w * mom_u,
            q2: w * mass,
        }
    }

    /// Largest relative change against `reference`.
    pub fn relative_drift(&self, reference: &Self) -> [f64; 3] {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        [rel(self.e, reference.e), rel(self.q1, reference.q1), rel(self.q2, reference.q2)]
    }
}

pub fn invariants(grid: &GridSpec, s: &FieldState) -> Result<ZakInvariants> {
    s.check(grid)?;
    let fg = FourierGrid::new(*grid);
    Ok(ZakInvariants::of_spectral(&fg, &SpectralState::from_fields(&fg, s)))
}

/// `E - c Q1 - omega Q2`
pub fn functional_b(inv: &ZakInvariants, c: f64, omega: f64) -> f64 {
    inv.e - c * inv.q1 - omega * inv.q2
}

pub(crate) fn uv_momentum_spectral(fg: &FourierGrid, s: &SpectralState) -> Complex64 {
    let u = fg.ifft(&s.u);
    let big = fg.ifft_real(&s.big_v);
    let h = fg.grid().h();
    let cross: Complex64 = u.iter().zip(&big).map(|(z, x)| z * x).sum::<Complex64>() * h;
    let mom_u: f64 = s
        .u
        .iter()
        .zip(fg.kappa())
        .map(|(z, k)| k * z.norm_sqr())
        .sum::<f64>()
        * fg.quad_scale();
    cross + mom_u
}

/// `int u V + Im(u_x conj(u))`, complex-valued for generic `u`; tracked as a
/// diagnostic next to the conserved `v V` form.
pub fn uv_momentum(grid: &GridSpec, s: &FieldState) -> Result<Complex64> {
    s.check(grid)?;
    let fg = FourierGrid::new(*grid);
    Ok(uv_momentum_spectral(&fg, &SpectralState::from_fields(&fg, s)))
}
