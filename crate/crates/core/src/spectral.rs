//! Fourier discretization of the Hill operators `-d^2/dx^2 + shift + V(x)`.
//!
//! The operator acts on samples at `x_j = j L / N`. The second derivative is
//! the exact trigonometric one: on the periodic space the modes are
//! `e^{2 pi i n x / L}` with `|n| < N/2` plus the cosine Nyquist mode, on the
//! semi-periodic space they are `e^{i pi (2n+1) x / L}` with `|2n+1| < N`.
//! Multiplication by the potential is pointwise. In the exponential basis this
//! is the Galerkin matrix with the (aliased) discrete convolution of the
//! potential's DFT; working on samples keeps it real symmetric.
//!
//! The linearized operators around a dnoidal wave are
//! `L3 = -d^2 + nu + 3 psi` and `L4 = -d^2 + nu + psi`, and rescaling `L3` by
//! `x -> x eta1 / sqrt(2 alpha)` turns it into the Lamé operator
//! `-d^2 + 6 k^2 sn^2(x; k)` on `[0, 2K]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::elliptic::{complete_k, jacobi_sn_cn_dn, Modulus};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::wavefamily::{DnoidalWave, TravelingWave};

pub const DEFAULT_MODES: usize = 512;
const MIN_MODES: usize = 32;

/// Simplicity threshold, relative to `nu`.
pub const SIMPLE_GAP: f64 = 1e-3;
/// Coincidence threshold for zero or double eigenvalues, relative to `nu`.
pub const COINCIDENT: f64 = 1e-6;
/// Sign threshold for the negative and positive eigenvalues of `L3`.
pub const SIGN_MARGIN: f64 = 1e-4;
pub const ALIGNMENT_MIN: f64 = 0.9999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Semiperiodic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillOperator {
    l: f64,
    shift: f64,
    potential: Vec<f64>,
}

/// Build `-d^2/dx^2 + shift + V` on `[0, L]` from `N` uniform samples of `V`.
pub fn assemble(l: f64, shift: f64, potential: &[f64], n: usize) -> Result<HillOperator> {
    if n % 2 != 0 || n < MIN_MODES {
        return Err(Error::InvalidInput(format!(
            "mode count N = {n} must be even and at least {MIN_MODES}"
        )));
    }
    if potential.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} potential samples for N = {n}",
            potential.len()
        )));
    }
    if !(l > 0.0) {
        return Err(Error::InvalidInput(format!("period L = {l} must be positive")));
    }
    Ok(HillOperator {
        l,
        shift,
        potential: potential.to_vec(),
    })
}

/// Entries `t(|j - l|)` of the `-d^2/dx^2` matrix, in closed form.
fn laplacian_row(n: usize, l: f64, boundary: Boundary) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|m| {
            let theta = PI * m as f64 / nf;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            match boundary {
                Boundary::Periodic => {
                    let scale = (2.0 * PI / l).powi(2);
                    if m == 0 {
                        scale * (nf * nf / 12.0 + 1.0 / 6.0)
                    } else {
                        scale * sign / (2.0 * theta.sin().powi(2))
                    }
                }
                Boundary::Semiperiodic => {
                    let scale = (PI / l).powi(2);
                    if m == 0 {
                        scale * (nf * nf - 1.0) / 3.0
                    } else {
                        2.0 * scale * sign * theta.cos() / theta.sin().powi(2)
                    }
                }
            }
        })
        .collect()
}

impl HillOperator {
    pub fn n(&self) -> usize {
        self.potential.len()
    }

    pub fn period(&self) -> f64 {
        self.l
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.l / self.n() as f64;
        (0..self.n()).map(|j| j as f64 * h).collect()
    }

    pub fn matrix(&self, boundary: Boundary) -> DMatrix<f64> {
        let n = self.n();
        let row = laplacian_row(n, self.l, boundary);
        DMatrix::from_fn(n, n, |i, j| {
            let base = row[i.abs_diff(j)];
            if i == j {
                base + self.shift + self.potential[i]
            } else {
                base
            }
        })
    }

    /// Apply the periodic operator to samples.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let a = self.matrix(Boundary::Periodic);
        let v = nalgebra::DVector::from_column_slice(f);
        (a * v).as_slice().to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillSpectrum {
    pub boundary: Boundary,
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// Unit Euclidean norm on the sample grid, largest-magnitude entry positive.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eigenvectors: Vec<Vec<f64>>,
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn sorted_eigenvalues(a: DMatrix<f64>, m: usize) -> Vec<f64> {
    let mut vals: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(m);
    vals
}

fn spectrum(op: &HillOperator, m: usize, boundary: Boundary, vectors: bool) -> Result<HillSpectrum> {
    let n = op.n();
    if m > n {
        return Err(Error::InvalidInput(format!("requested {m} eigenpairs of an {n}x{n} operator")));
    }
    let a = op.matrix(boundary);
    if !vectors {
        return Ok(HillSpectrum {
            boundary,
            n,
            eigenvalues: sorted_eigenvalues(a, m),
            eigenvectors: Vec::new(),
        });
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(m);
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut v = eig.eigenvectors.column(i).iter().copied().collect::<Vec<_>>();
            fix_sign(&mut v);
            v
        })
        .collect();
    Ok(HillSpectrum {
        boundary,
        n,
        eigenvalues,
        eigenvectors,
    })
}

/// Lowest `m` eigenpairs with `chi(0) = chi(L)`, `chi'(0) = chi'(L)`.
pub fn periodic_spectrum(op: &HillOperator, m: usize) -> Result<HillSpectrum> {
    spectrum(op, m, Boundary::Periodic, true)
}

/// Lowest `m` eigenpairs with `eta(0) = -eta(L)`, `eta'(0) = -eta'(L)`.
pub fn semiperiodic_spectrum(op: &HillOperator, m: usize) -> Result<HillSpectrum> {
    spectrum(op, m, Boundary::Semiperiodic, true)
}

/// Eigenvalues only; cheaper for band-edge work.
pub fn eigenvalues(op: &HillOperator, m: usize, boundary: Boundary) -> Result<Vec<f64>> {
    Ok(spectrum(op, m, boundary, false)?.eigenvalues)
}

impl HillSpectrum {
    /// `||A chi - lambda chi||` for pair `i`.
    pub fn residual(&self, op: &HillOperator, i: usize) -> f64 {
        let a = op.matrix(self.boundary);
        let v = nalgebra::DVector::from_column_slice(&self.eigenvectors[i]);
        (&a * &v - v * self.eigenvalues[i]).norm()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", fmt_f64(*v)));
        }
        out
    }

    pub fn to_json(&self, with_vectors: bool) -> Result<String> {
        if with_vectors {
            Ok(serde_json::to_string(self)?)
        } else {
            let trimmed = HillSpectrum {
                eigenvectors: Vec::new(),
                ..self.clone()
            };
            Ok(serde_json::to_string(&trimmed)?)
        }
    }
}

/// `|<a, b>| / (|a| |b|)`
pub fn alignment(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot.abs() / (na * nb)
}

fn wave_operator(wave: &DnoidalWave, n: usize, weight: f64) -> Result<HillOperator> {
    let l = wave.period();
    let h = l / n as f64;
    let potential: Vec<f64> = (0..n).map(|j| weight * wave.psi(j as f64 * h)).collect();
    assemble(l, wave.nu(), &potential, n)
}

/// `L3 = -d^2 - (omega + c^2/4) + 3 psi`
pub fn l3_operator(wave: &DnoidalWave, n: usize) -> Result<HillOperator> {
    wave_operator(wave, n, 3.0)
}

/// `L4 = -d^2 - (omega + c^2/4) + psi`
pub fn l4_operator(wave: &DnoidalWave, n: usize) -> Result<HillOperator> {
    wave_operator(wave, n, 1.0)
}

/// `-d^2 + 6 k^2 sn^2(x; k)` on its period `[0, 2K]`.
pub fn lame_operator(modulus: Modulus, n: usize) -> Result<HillOperator> {
    let period = 2.0 * complete_k(modulus)?;
    let h = period / n as f64;
    let potential: Vec<f64> = (0..n)
        .map(|j| {
            let sn = jacobi_sn_cn_dn(j as f64 * h, modulus).sn;
            6.0 * modulus.m() * sn * sn
        })
        .collect();
    assemble(period, 0.0, &potential, n)
}

/// The three `2K`-periodic Lamé eigenvalues below the first double one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LameTriple {
    pub rho0: f64,
    pub rho1: f64,
    pub rho2: f64,
}

/// `rho1 = 4 + k^2` (eigenfunction `sn cn`) and the two roots
/// `2(1 + k^2) -/+ 2 sqrt(1 - k^2 + k^4)` carried by `1 - beta sn^2`.
pub fn lame_eigen_analytic(modulus: Modulus) -> LameTriple {
    let m = modulus.m();
    // (1 + m)^2 - 3m = 1 - m + m^2
    let disc = (1.0 - m * modulus.m1()).sqrt();
    LameTriple {
        rho0: 2.0 * (1.0 + m) - 2.0 * disc,
        rho1: 4.0 + m,
        rho2: 2.0 * (1.0 + m) + 2.0 * disc,
    }
}

/// Map a Lamé eigenvalue back to `L3`: `lambda = nu - 3 eta1^2/alpha + eta1^2 rho / (2 alpha)`.
pub fn lambda_from_rho(wave: &DnoidalWave, rho: f64) -> f64 {
    let p = wave.params();
    let e2 = p.eta1 * p.eta1;
    p.nu - 3.0 * e2 / p.alpha + e2 * rho / (2.0 * p.alpha)
}

/// One instability interval of a Hill equation; the first is `(-inf, lambda0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
}

impl Gap {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Pair up band edges: `(-inf, l0), (m0, m1), (l1, l2), (m2, m3), (l3, l4), ...`
fn gaps_from_edges(per: &[f64], semi: &[f64], n_gaps: usize) -> Vec<Gap> {
    let mut out = vec![Gap {
        lo: f64::NEG_INFINITY,
        hi: per[0],
    }];
    let mut j = 1;
    while out.len() < n_gaps {
        // gap j >= 1 uses indices (j-1, j) of the semi-periodic sequence for odd
        // j and of the periodic sequence for even j
        let (seq, i) = if j % 2 == 1 { (semi, j - 1) } else { (per, j - 1) };
        out.push(Gap {
            lo: seq[i],
            hi: seq[i + 1],
        });
        j += 1;
    }
    out
}

/// Band edges `lambda0 < mu0 <= mu1 < lambda1 <= lambda2 < mu2 <= ...` up to `count` pairs.
pub fn interlacing_holds(per: &[f64], semi: &[f64], tol: f64) -> bool {
    let mut merged = vec![per[0]];
    let mut i = 0;
    while 2 * i + 2 < per.len() && 2 * i + 1 < semi.len() {
        merged.extend_from_slice(&[semi[2 * i], semi[2 * i + 1], per[2 * i + 1], per[2 * i + 2]]);
        i += 1;
    }
    merged.windows(2).all(|w| w[1] >= w[0] - tol)
        && per.len() > 0
        && semi[0] > per[0]
}

/// Instability intervals of the Lamé equation with modulus `k`, including the
/// unbounded one below the spectrum.
///
/// The band edges are recomputed at `2N` modes; if any edge moves by more
/// than `1e-8` (relative to `max(1, |edge|)`) the result is rejected.
pub fn instability_intervals(modulus: Modulus, n_gaps: usize, n: usize) -> Result<Vec<Gap>> {
    if !(modulus.k() > 0.0 && modulus.m1() > 0.0) {
        return Err(Error::Domain(format!("modulus k = {} outside (0, 1)", modulus.k())));
    }
    if n < 512 {
        return Err(Error::InvalidInput(format!("N = {n} below 512 for band-edge work")));
    }
    let edges_needed = n_gaps + 2;
    let edges = |n: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let op = lame_operator(modulus, n)?;
        Ok((
            eigenvalues(&op, edges_needed, Boundary::Periodic)?,
            eigenvalues(&op, edges_needed, Boundary::Semiperiodic)?,
        ))
    };
    let (per, semi) = edges(n)?;
    let (per2, semi2) = edges(2 * n)?;
    for (a, b) in per.iter().zip(&per2).chain(semi.iter().zip(&semi2)) {
        if (a - b).abs() > 1e-8 * a.abs().max(1.0) {
            return Err(Error::Accuracy(format!(
                "band edge {a} moved to {b} under N doubling"
            )));
        }
    }
    Ok(gaps_from_edges(&per2, &semi2, n_gaps))
}

/// Smallest eigenvalue of the periodic operator on the orthogonal complement
/// of `constraints`.
pub fn constrained_rayleigh_min(op: &HillOperator, constraints: &[Vec<f64>]) -> Result<f64> {
    let n = op.n();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(constraints.len());
    for (idx, c) in constraints.iter().enumerate() {
        if c.len() != n {
            return Err(Error::InvalidInput(format!(
                "constraint {idx} has {} samples, operator has {n}",
                c.len()
            )));
        }
        let scale = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut v = c.clone();
        // modified Gram-Schmidt, two passes
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 1e-10 * scale) || scale == 0.0 {
            return Err(Error::RankDeficient(format!(
                "constraint {idx} lies in the span of the previous ones"
            )));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }

    let a = op.matrix(Boundary::Periodic);
    if basis.is_empty() {
        return Ok(sorted_eigenvalues(a, 1)[0]);
    }
    let q = DMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
    let aq = &a * &q;
    let qtaq = q.transpose() * &aq;
    // P A P = A - Q (AQ)^T - (AQ) Q^T + Q (Q^T A Q) Q^T; the constraint
    // directions are then lifted above the spectrum so they cannot be selected.
    let bound = (0..n)
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lift = 2.0 * bound + 1.0;
    let projected = &a - &q * aq.transpose() - &aq * q.transpose() + &q * qtaq * q.transpose()
        + &q * q.transpose() * lift;
    let sym = (&projected + projected.transpose()) * 0.5;
    Ok(sorted_eigenvalues(sym, 1)[0])
}

/// Checks on the spectrum of `L3` around a dnoidal wave.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L3Verdict {
    pub nu: f64,
    pub eigenvalues: Vec<f64>,
    pub alignment_phi_prime: f64,
    pub negative_first: bool,
    pub zero_second: bool,
    pub positive_third: bool,
    pub first_three_simple: bool,
    pub aligned: bool,
    pub rest_double: bool,
}

impl L3Verdict {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if !self.negative_first {
            f.push("lambda0 < -1e-4*nu");
        }
        if !self.zero_second {
            f.push("|lambda1| <= 1e-6*nu");
        }
        if !self.positive_third {
            f.push("lambda2 > 1e-4*nu");
        }
        if !self.first_three_simple {
            f.push("first three eigenvalues simple");
        }
        if !self.aligned {
            f.push("lambda1 eigenvector aligned with phi'");
        }
        if !self.rest_double {
            f.push("eigenvalues above lambda2 double");
        }
        f
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Checks on the spectrum of `L4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L4Verdict {
    pub nu: f64,
    pub eigenvalues: Vec<f64>,
    pub alignment_phi: f64,
    pub zero_first: bool,
    pub simple: bool,
    pub aligned: bool,
}

impl L4Verdict {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if !self.zero_first {
            f.push("|lambda0| <= 1e-6*nu");
        }
        if !self.simple {
            f.push("lambda0 simple");
        }
        if !self.aligned {
            f.push("lambda0 eigenvector aligned with phi");
        }
        f
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Widths above this count as open instability intervals.
pub const OPEN_GAP: f64 = 1e-4;
/// Widths at or below this count as closed.
pub const CLOSED_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LameVerdict {
    pub k: f64,
    pub gaps: Vec<Gap>,
    pub open: usize,
    /// Largest width among the gaps after the first three.
    pub max_closed_width: f64,
    pub three_open: bool,
    pub rest_closed: bool,
}

impl LameVerdict {
    pub fn failures(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if !self.three_open {
            f.push("exactly three open instability intervals");
        }
        if !self.rest_closed {
            f.push("higher gaps closed to 1e-6");
        }
        f
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Count open instability intervals among the first `n_gaps` (at least 4).
pub fn lame_verdict(modulus: Modulus, n_gaps: usize, n: usize) -> Result<LameVerdict> {
    if n_gaps < 4 {
        return Err(Error::InvalidInput(format!("need at least 4 gaps, got {n_gaps}")));
    }
    let gaps = instability_intervals(modulus, n_gaps, n)?;
    let open = gaps.iter().filter(|g| g.width() > OPEN_GAP).count();
    let max_closed_width = gaps[3..].iter().map(|g| g.width()).fold(0.0, f64::max);
    Ok(LameVerdict {
        k: modulus.k(),
        open,
        max_closed_width,
        three_open: open == 3 && gaps[..3].iter().all(|g| g.width() > OPEN_GAP),
        rest_closed: max_closed_width <= CLOSED_GAP,
        gaps,
    })
}

fn sampled(wave: &DnoidalWave, n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let h = wave.period() / n as f64;
    (0..n).map(|j| f(j as f64 * h)).collect()
}

pub fn l3_verdict(wave: &DnoidalWave, n: usize) -> Result<L3Verdict> {
    let nu = wave.nu();
    let spec = periodic_spectrum(&l3_operator(wave, n)?, 7)?;
    let ev = &spec.eigenvalues;
    let phi_prime = sampled(wave, n, |x| wave.phi_prime(x));
    let alignment_phi_prime = alignment(&spec.eigenvectors[1], &phi_prime);
    Ok(L3Verdict {
        nu,
        eigenvalues: ev.clone(),
        alignment_phi_prime,
        negative_first: ev[0] < -SIGN_MARGIN * nu,
        zero_second: ev[1].abs() <= COINCIDENT * nu,
        positive_third: ev[2] > SIGN_MARGIN * nu,
        first_three_simple: ev.windows(2).take(3).all(|w| w[1] - w[0] > SIMPLE_GAP * nu),
        aligned: alignment_phi_prime >= ALIGNMENT_MIN,
        rest_double: (ev[4] - ev[3]).abs() <= COINCIDENT * nu
            && (ev[6] - ev[5]).abs() <= COINCIDENT * nu,
    })
}

pub fn l4_verdict(wave: &DnoidalWave, n: usize) -> Result<L4Verdict> {
    let nu = wave.nu();
    let spec = periodic_spectrum(&l4_operator(wave, n)?, 4)?;
    let ev = &spec.eigenvalues;
    let phi = sampled(wave, n, |x| wave.phi(x));
    let alignment_phi = alignment(&spec.eigenvectors[0], &phi);
    Ok(L4Verdict {
        nu,
        eigenvalues: ev.clone(),
        alignment_phi,
        zero_first: ev[0].abs() <= COINCIDENT * nu,
        simple: ev[1] - ev[0] > SIMPLE_GAP * nu,
        aligned: alignment_phi >= ALIGNMENT_MIN,
    })
}

/// The two periodic quadratic-form infima around a dnoidal wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstrainedForms {
    /// `L3` on `{phi}^perp`
    pub alpha0: f64,
    /// `L3` on `{phi, (phi psi)'}^perp`
    pub alpha: f64,
    /// `L4` on `{phi psi}^perp`
    pub beta: f64,
}

pub fn constrained_forms(wave: &DnoidalWave, n: usize) -> Result<ConstrainedForms> {
    let p = wave.params();
    let phi = sampled(wave, n, |x| wave.phi(x));
    let phi_psi = sampled(wave, n, |x| wave.phi(x) * wave.psi(x));
    // (phi psi)' = -3 phi^2 phi' / alpha
    let d_phi_psi = sampled(wave, n, |x| -3.0 * wave.phi(x).powi(2) * wave.phi_prime(x) / p.alpha);
    let l3 = l3_operator(wave, n)?;
    let l4 = l4_operator(wave, n)?;
    Ok(ConstrainedForms {
        alpha0: constrained_rayleigh_min(&l3, &[phi.clone()])?,
        alpha: constrained_rayleigh_min(&l3, &[phi, d_phi_psi])?,
        beta: constrained_rayleigh_min(&l4, &[phi_psi])?,
    })
}
