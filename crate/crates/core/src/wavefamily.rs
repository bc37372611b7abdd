//! The curve of dnoidal traveling waves and its solitary limit.
//!
//! For fixed period `L` and speed `c` with `alpha = 1 - c^2 > 0`, each
//! `nu > 2 pi^2 / L^2` determines a unique profile
//!
//! ```text
//! phi(xi) = eta1 dn(eta1 xi / sqrt(2 alpha); k),   psi = -phi^2 / alpha,
//! varphi  = c psi - d0,
//! ```
//!
//! where `eta2` is the root of the period equation `T(eta2) = L` and
//! `eta1^2 + eta2^2 = 2 nu alpha`. Profiles are centered on their crest at
//! `xi = 0`.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_ke, dk_dmodulus, jacobi_sn_cn_dn, Modulus};
use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Left end of the initial root bracket, as a fraction of `sqrt(nu alpha)`.
const BRACKET_EPS: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 200;

/// Scalar data of one dnoidal wave.
///
/// The integration constants of the profile system are both zero and are not
/// stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    #[serde(rename = "L")]
    pub l: f64,
    pub c: f64,
    pub omega: f64,
    pub nu: f64,
    pub alpha: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub k: f64,
    /// `1 - k^2`, kept separately so `k -> 1` stays resolvable.
    pub kprime2: f64,
    pub d0: f64,
    #[serde(rename = "Aphi")]
    pub a_phi: f64,
}

impl WaveParams {
    pub fn modulus(&self) -> Modulus {
        Modulus::from_kprime2(self.kprime2).expect("kprime2 validated on construction")
    }
}

/// Smallest admissible `nu` for period `L`: the period infimum is `pi sqrt(2/nu)`.
pub fn nu_threshold(l: f64) -> f64 {
    2.0 * PI * PI / (l * l)
}

/// Profiles of a traveling wave `(psi, varphi, e^{i c x/2} phi)` in the
/// comoving frame, shared by the periodic and solitary families.
pub trait TravelingWave: Sync {
    fn speed(&self) -> f64;
    fn omega(&self) -> f64;
    /// `nu = -(omega + c^2/4)`
    fn nu(&self) -> f64 {
        -(self.omega() + 0.25 * self.speed() * self.speed())
    }
    fn alpha(&self) -> f64 {
        1.0 - self.speed() * self.speed()
    }
    fn phi(&self, x: f64) -> f64;
    fn phi_prime(&self, x: f64) -> f64;
    fn psi(&self, x: f64) -> f64;
    fn varphi(&self, x: f64) -> f64;
}

/// Sampled `(phi, psi, varphi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub varphi: Vec<f64>,
}

pub fn eval_profiles<W: TravelingWave + ?Sized>(wave: &W, xs: &[f64]) -> Profiles {
    Profiles {
        phi: xs.iter().map(|&x| wave.phi(x)).collect(),
        psi: xs.iter().map(|&x| wave.psi(x)).collect(),
        varphi: xs.iter().map(|&x| wave.varphi(x)).collect(),
    }
}

fn check_speed(c: f64) -> Result<f64> {
    let alpha = 1.0 - c * c;
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("1 - c^2 = {alpha} must be positive")));
    }
    Ok(alpha)
}

fn modulus_of(eta2: f64, nu: f64, alpha: f64) -> Result<(Modulus, f64)> {
    let s = 2.0 * nu * alpha - eta2 * eta2;
    // k'^2 = eta2^2 / (2 nu alpha - eta2^2), formed directly for k -> 1.
    Ok((Modulus::from_kprime2(eta2 * eta2 / s)?, s))
}

/// Fundamental period `T(eta2) = 2 sqrt(2 alpha) K(k) / sqrt(2 nu alpha - eta2^2)`.
pub fn period_of(eta2: f64, nu: f64, alpha: f64) -> Result<f64> {
    if !(nu > 0.0 && alpha > 0.0) {
        return Err(Error::Domain(format!(
            "period needs nu > 0 and alpha > 0 (nu = {nu}, alpha = {alpha})"
        )));
    }
    let upper = (nu * alpha).sqrt();
    if !(eta2 > 0.0 && eta2 < upper) {
        return Err(Error::Domain(format!(
            "eta2 = {eta2} outside (0, sqrt(nu alpha) = {upper})"
        )));
    }
    let (modulus, s) = modulus_of(eta2, nu, alpha)?;
    let (big_k, _) = complete_ke(modulus)?;
    Ok(2.0 * (2.0 * alpha).sqrt() * big_k / s.sqrt())
}

/// `dT/d eta2`, negative on the whole admissible interval.
pub fn period_slope(eta2: f64, nu: f64, alpha: f64) -> Result<f64> {
    let (modulus, s) = modulus_of(eta2, nu, alpha)?;
    let (big_k, _) = complete_ke(modulus)?;
    let dk = dk_dmodulus(modulus)?;
    let dk_deta = -2.0 * eta2 * nu * alpha / (modulus.k() * s * s);
    let root = 2.0 * (2.0 * alpha).sqrt();
    Ok(root * (eta2 * s.powf(-1.5) * big_k + s.powf(-0.5) * dk * dk_deta))
}

/// Solve `T(eta2) = L` for the unique `eta2` in `(0, sqrt(nu alpha))`.
///
/// Safeguarded Newton in `ln eta2` (the period grows like `-ln eta2` near
/// the solitary end) inside a bisection bracket.
pub fn solve_eta2(l: f64, c: f64, nu: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("period L = {l} must be positive")));
    }
    let alpha = check_speed(c)?;
    let threshold = nu_threshold(l);
    if !(nu > threshold) {
        return Err(Error::NoSolution(format!(
            "nu <= 2*pi^2/L^2 = {threshold}: every dnoidal period exceeds its infimum pi*sqrt(2/nu) = {}, which is >= L",
            PI * SQRT_2 / nu.sqrt()
        )));
    }
    let upper = (nu * alpha).sqrt();
    let gamma = |t: f64| period_of(t.exp(), nu, alpha).map(|p| p - l);

    let mut hi = (upper * (1.0 - BRACKET_EPS)).ln();
    if gamma(hi)? >= 0.0 {
        return Err(Error::NoSolution(format!(
            "nu = {nu} is too close to 2*pi^2/L^2 = {threshold} to resolve the root"
        )));
    }
    let mut lo = (upper * BRACKET_EPS).ln();
    while gamma(lo)? <= 0.0 {
        lo -= 3.0 * std::f64::consts::LN_10;
        if lo < -690.0 {
            return Err(Error::NoSolution(format!(
                "period equation root for nu = {nu} underflows"
            )));
        }
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..ROOT_MAX_ITER {
        let g = gamma(t)?;
        if g.abs() <= 1e-15 * l {
            break;
        }
        if g > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let eta = t.exp();
        let slope = eta * period_slope(eta, nu, alpha)?;
        let newton = t - g / slope;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
            t = next;
            break;
        }
        t = next;
    }
    Ok(t.exp())
}

/// One member of the dnoidal family.
#[derive(Debug, Clone, Copy)]
pub struct DnoidalWave {
    params: WaveParams,
    modulus: Modulus,
    big_k: f64,
    big_e: f64,
    /// `eta1 / sqrt(2 alpha)`, the argument scale of `dn`.
    scale: f64,
}

/// Build the wave of period `L`, speed `c` and parameter `nu`.
pub fn build_wave(l: f64, c: f64, nu: f64) -> Result<DnoidalWave> {
    let eta2 = solve_eta2(l, c, nu)?;
    let alpha = 1.0 - c * c;
    let (modulus, s) = modulus_of(eta2, nu, alpha)?;
    let eta1 = s.sqrt();
    let (big_k, big_e) = complete_ke(modulus)?;
    let params = WaveParams {
        l,
        c,
        omega: -nu - 0.25 * c * c,
        nu,
        alpha,
        eta1,
        eta2,
        k: modulus.k(),
        kprime2: modulus.m1(),
        d0: -(c * eta1 * eta1 / alpha) * big_e / big_k,
        a_phi: -(eta1 * eta1 * eta2 * eta2) / (4.0 * alpha),
    };
    let wave = DnoidalWave {
        params,
        modulus,
        big_k,
        big_e,
        scale: eta1 / (2.0 * alpha).sqrt(),
    };
    if let Some(m) = wave.gauge_mismatch() {
        log::warn!(
            "c L / (4 pi) = {m} is not an integer: e^(i c x/2) phi is not L-periodic"
        );
    }
    Ok(wave)
}

/// Residuals of the profile identities, see [`DnoidalWave::ode_residuals`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeResiduals {
    /// `phi'' - nu phi + phi^3 / alpha`
    pub second_order: f64,
    /// `(phi')^2 - (phi^2 - eta2^2)(eta1^2 - phi^2) / (2 alpha)`
    pub quadrature: f64,
    /// `(c^2 - 1) psi'' - (phi^2)''`
    pub coupled: f64,
}

impl OdeResiduals {
    pub fn max(&self) -> f64 {
        self.second_order.max(self.quadrature).max(self.coupled)
    }

    /// Componentwise ratio.
    pub fn relative_to(&self, scale: &OdeResiduals) -> OdeResiduals {
        OdeResiduals {
            second_order: self.second_order / scale.second_order,
            quadrature: self.quadrature / scale.quadrature,
            coupled: self.coupled / scale.coupled,
        }
    }
}

impl DnoidalWave {
    pub fn params(&self) -> &WaveParams {
        &self.params
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn complete_k(&self) -> f64 {
        self.big_k
    }

    pub fn complete_e(&self) -> f64 {
        self.big_e
    }

    pub fn period(&self) -> f64 {
        self.params.l
    }

    /// `Some(cL/4pi)` when that is not an integer (and `c != 0`).
    pub fn gauge_mismatch(&self) -> Option<f64> {
        let m = self.params.c * self.params.l / (4.0 * PI);
        ((m - m.round()).abs() > 1e-9).then_some(m)
    }

    fn triple(&self, x: f64) -> (f64, f64, f64) {
        let t = jacobi_sn_cn_dn(self.scale * x, self.modulus);
        (t.sn, t.cn, t.dn)
    }

    pub fn phi_second(&self, x: f64) -> f64 {
        let (sn, cn, dn) = self.triple(x);
        -self.params.eta1 * self.scale * self.scale * self.modulus.m() * dn * (cn * cn - sn * sn)
    }

    /// `psi''` from the closed form of `d^2 dn^2 / ds^2`.
    pub fn psi_second(&self, x: f64) -> f64 {
        let (sn, cn, dn) = self.triple(x);
        let m = self.modulus.m();
        let d2 = -2.0 * m * (cn * cn * dn * dn - sn * sn * dn * dn - m * sn * sn * cn * cn);
        -(self.params.eta1 * self.params.eta1 / self.params.alpha) * self.scale * self.scale * d2
    }

    /// Sup-norm residuals of the three profile identities on `n` points of one period.
    pub fn ode_residuals(&self, n: usize) -> Result<OdeResiduals> {
        if n < 64 {
            return Err(Error::InvalidInput(format!("need at least 64 samples, got {n}")));
        }
        let p = &self.params;
        let h = p.l / n as f64;
        let mut r = OdeResiduals {
            second_order: 0.0,
            quadrature: 0.0,
            coupled: 0.0,
        };
        for j in 0..n {
            let x = j as f64 * h;
            let phi = self.phi(x);
            let dphi = self.phi_prime(x);
            let d2phi = self.phi_second(x);
            let r1 = d2phi - p.nu * phi + phi.powi(3) / p.alpha;
            let r2 = dphi * dphi
                - (phi * phi - p.eta2 * p.eta2) * (p.eta1 * p.eta1 - phi * phi) / (2.0 * p.alpha);
            let r3 = (p.c * p.c - 1.0) * self.psi_second(x) - 2.0 * (dphi * dphi + phi * d2phi);
            r.second_order = r.second_order.max(r1.abs());
            r.quadrature = r.quadrature.max(r2.abs());
            r.coupled = r.coupled.max(r3.abs());
        }
        Ok(r)
    }

    /// Size of the largest term in each identity, for relative residuals.
    pub fn residual_scales(&self) -> OdeResiduals {
        let p = &self.params;
        let e2 = p.eta1 * p.eta1;
        let cubic = p.nu * p.eta1 + e2 * p.eta1 / p.alpha;
        let quartic = e2 * e2 / (2.0 * p.alpha);
        OdeResiduals {
            second_order: cubic,
            quadrature: quartic,
            coupled: 2.0 * (quartic + p.eta1 * cubic),
        }
    }

    /// `int_0^L phi^2 = 8 alpha K(k) E(k) / L`.
    pub fn mass_integral(&self) -> f64 {
        8.0 * self.params.alpha * self.big_k * self.big_e / self.params.l
    }
}

impl TravelingWave for DnoidalWave {
    fn speed(&self) -> f64 {
        self.params.c
    }

    fn omega(&self) -> f64 {
        self.params.omega
    }

    fn nu(&self) -> f64 {
        self.params.nu
    }

    fn alpha(&self) -> f64 {
        self.params.alpha
    }

    fn phi(&self, x: f64) -> f64 {
        self.params.eta1 * self.triple(x).2
    }

    fn phi_prime(&self, x: f64) -> f64 {
        let (sn, cn, _) = self.triple(x);
        -self.params.eta1 * self.scale * self.modulus.m() * sn * cn
    }

    fn psi(&self, x: f64) -> f64 {
        let dn = self.triple(x).2;
        -(self.params.eta1 * self.params.eta1 / self.params.alpha) * dn * dn
    }

    fn varphi(&self, x: f64) -> f64 {
        self.params.c * self.psi(x) - self.params.d0
    }
}

/// Central difference of the mass `int phi_nu^2` in `nu`.
pub fn mass_derivative(l: f64, c: f64, nu: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step h = {h} must be positive")));
    }
    if nu - h <= nu_threshold(l) {
        return Err(Error::Domain(format!(
            "stencil nu - h = {} leaves (2*pi^2/L^2, inf)",
            nu - h
        )));
    }
    let plus = build_wave(l, c, nu + h)?.mass_integral();
    let minus = build_wave(l, c, nu - h)?.mass_integral();
    Ok((plus - minus) / (2.0 * h))
}

/// Sech-profile solitary wave on the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitaryWave {
    pub omega: f64,
    pub c: f64,
    /// `sqrt(-4 omega - c^2)`
    width: f64,
    amplitude: f64,
}

pub fn solitary_wave(omega: f64, c: f64) -> Result<SolitaryWave> {
    let alpha = check_speed(c)?;
    let s2 = -4.0 * omega - c * c;
    if !(s2 > 0.0) {
        return Err(Error::Domain(format!(
            "4 omega + c^2 = {} must be negative",
            -s2
        )));
    }
    Ok(SolitaryWave {
        omega,
        c,
        width: s2.sqrt(),
        amplitude: (s2 * alpha / 2.0).sqrt(),
    })
}

impl SolitaryWave {
    /// `sqrt(-4 omega - c^2)`; profiles are functions of `width * x / 2`.
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phi_second(&self, x: f64) -> f64 {
        let b = 0.5 * self.width;
        let sech = 1.0 / (b * x).cosh();
        self.amplitude * b * b * (sech - 2.0 * sech.powi(3))
    }
}

impl TravelingWave for SolitaryWave {
    fn speed(&self) -> f64 {
        self.c
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn phi(&self, x: f64) -> f64 {
        self.amplitude / (0.5 * self.width * x).cosh()
    }

    fn phi_prime(&self, x: f64) -> f64 {
        let b = 0.5 * self.width;
        -self.amplitude * b * (b * x).tanh() / (b * x).cosh()
    }

    fn psi(&self, x: f64) -> f64 {
        let sech = 1.0 / (0.5 * self.width * x).cosh();
        (2.0 * self.omega + 0.5 * self.c * self.c) * sech * sech
    }

    fn varphi(&self, x: f64) -> f64 {
        self.c * self.psi(x)
    }
}

/// One row of a family sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub nu: f64,
    pub eta2: f64,
    pub eta1: f64,
    pub k: f64,
    pub omega: f64,
    pub d0: f64,
    pub mass: f64,
    #[serde(skip)]
    pub kprime2: f64,
    #[serde(skip)]
    pub period_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTable {
    #[serde(rename = "L")]
    pub l: f64,
    pub c: f64,
    pub rows: Vec<FamilyRow>,
}

/// Outcome of the adjacent-row monotonicity checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monotonicity {
    pub eta2_decreasing: bool,
    /// Checked as `k'^2` strictly decreasing, which stays resolvable after `k`
    /// itself rounds to one.
    pub k_increasing: bool,
    pub mass_increasing: bool,
}

impl Monotonicity {
    pub fn all(&self) -> bool {
        self.eta2_decreasing && self.k_increasing && self.mass_increasing
    }
}

pub const FAMILY_CSV_HEADER: &str = "nu,eta2,eta1,k,omega,d0,mass";

impl FamilyTable {
    pub fn monotonicity(&self) -> Monotonicity {
        let strictly = |f: &dyn Fn(&FamilyRow, &FamilyRow) -> bool| {
            self.rows.windows(2).all(|w| f(&w[0], &w[1]))
        };
        Monotonicity {
            eta2_decreasing: strictly(&|a, b| b.eta2 < a.eta2),
            k_increasing: strictly(&|a, b| b.kprime2 < a.kprime2 && b.k >= a.k),
            mass_increasing: strictly(&|a, b| b.mass > a.mass),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FAMILY_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let cols = [r.nu, r.eta2, r.eta1, r.k, r.omega, r.d0, r.mass].map(fmt_f64);
            out.push_str(&cols.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Build the family on an increasing `nu` grid. Rows keep the grid order.
pub fn family_sweep(l: f64, c: f64, nu_grid: &[f64]) -> Result<FamilyTable> {
    if nu_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("nu grid must be strictly increasing".into()));
    }
    let rows = nu_grid
        .par_iter()
        .map(|&nu| {
            let wave = build_wave(l, c, nu)
                .map_err(|e| Error::NoSolution(format!("construction failed at nu = {nu}: {e}")))?;
            let p = wave.params();
            let period = period_of(p.eta2, p.nu, p.alpha)?;
            Ok(FamilyRow {
                nu,
                eta2: p.eta2,
                eta1: p.eta1,
                k: p.k,
                omega: p.omega,
                d0: p.d0,
                mass: wave.mass_integral(),
                kprime2: p.kprime2,
                period_residual: (period - l).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyTable { l, c, rows })
}

/// `n` points geometrically spaced on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}
