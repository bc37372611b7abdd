//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Everything here goes through the arithmetic-geometric mean of `(1, k')`.
//! The modulus can be built from the complementary parameter `k'^2` so that
//! moduli extremely close to one keep full relative precision in `k'`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const AGM_MAX_ITER: usize = 64;

/// Elliptic modulus `k` together with its complement `k' = sqrt(1 - k^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modulus {
    k: f64,
    kprime: f64,
    m: f64,
    m1: f64,
}

impl Modulus {
    pub fn from_k(k: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k) {
            return Err(Error::Domain(format!("modulus k = {k} outside [0, 1]")));
        }
        let m = k * k;
        let m1 = (1.0 - k) * (1.0 + k);
        Ok(Self {
            k,
            kprime: m1.sqrt(),
            m,
            m1,
        })
    }

    /// Build from the parameter `m = k^2`.
    pub fn from_m(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Domain(format!("parameter m = {m} outside [0, 1]")));
        }
        let m1 = 1.0 - m;
        Ok(Self {
            k: m.sqrt(),
            kprime: m1.sqrt(),
            m,
            m1,
        })
    }

    /// Build from the complementary parameter `k'^2 = 1 - k^2`.
    pub fn from_kprime2(m1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m1) {
            return Err(Error::Domain(format!(
                "complementary parameter k'^2 = {m1} outside [0, 1]"
            )));
        }
        let m = 1.0 - m1;
        Ok(Self {
            k: m.sqrt(),
            kprime: m1.sqrt(),
            m,
            m1,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn kprime(&self) -> f64 {
        self.kprime
    }

    /// `k^2`
    pub fn m(&self) -> f64 {
        self.m
    }

    /// `k'^2`
    pub fn m1(&self) -> f64 {
        self.m1
    }
}

fn agm_converged(a: f64, b: f64) -> bool {
    (a - b).abs() <= 4.0 * f64::EPSILON * a
}

/// Complete elliptic integral of the first kind, `K(k) = pi / (2 AGM(1, k'))`.
pub fn complete_k(modulus: Modulus) -> Result<f64> {
    if modulus.m1 == 0.0 {
        return Err(Error::Domain("K(k) diverges at k = 1".into()));
    }
    let (mut a, mut b) = (1.0_f64, modulus.kprime);
    for _ in 0..AGM_MAX_ITER {
        if agm_converged(a, b) {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(PI / (2.0 * a))
}

/// Complete elliptic integral of the second kind.
///
/// Uses `E = K (1 - sum 2^(n-1) c_n^2)` along the same AGM sequence; the
/// leading term is folded in as `(1 + k'^2)/2` to avoid forming `1 - k^2/2`.
pub fn complete_e(modulus: Modulus) -> Result<f64> {
    if modulus.m1 == 0.0 {
        return Ok(1.0);
    }
    let (mut a, mut b) = (1.0_f64, modulus.kprime);
    let mut acc = 0.5 * (1.0 + modulus.m1);
    let mut weight = 1.0;
    for _ in 0..AGM_MAX_ITER {
        if agm_converged(a, b) {
            break;
        }
        let c = 0.5 * (a - b);
        acc -= weight * c * c;
        weight *= 2.0;
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(PI / (2.0 * a) * acc)
}

/// Both complete integrals from a single AGM pass.
pub fn complete_ke(modulus: Modulus) -> Result<(f64, f64)> {
    Ok((complete_k(modulus)?, complete_e(modulus)?))
}

/// `dK/dk = (E - k'^2 K) / (k k'^2)` for `k` in `(0, 1)`.
pub fn dk_dmodulus(modulus: Modulus) -> Result<f64> {
    if modulus.k == 0.0 {
        return Ok(0.0);
    }
    let (k_val, e_val) = complete_ke(modulus)?;
    Ok((e_val - modulus.m1 * k_val) / (modulus.k * modulus.m1))
}

/// Values of `sn`, `cn`, `dn` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi elliptic functions by descending Landen transformation.
///
/// The argument is first reduced modulo `4K` into `[-2K, 2K)`. At `k = 1` the
/// hyperbolic limits `(tanh, sech, sech)` are returned.
pub fn jacobi_sn_cn_dn(u: f64, modulus: Modulus) -> JacobiTriple {
    if modulus.m == 0.0 {
        let (s, c) = u.sin_cos();
        return JacobiTriple { sn: s, cn: c, dn: 1.0 };
    }
    if modulus.m1 == 0.0 {
        let sech = 1.0 / u.cosh();
        return JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    let quarter = complete_k(modulus).expect("k < 1 checked above");
    let period = 4.0 * quarter;
    let u = u - period * ((u + 2.0 * quarter) / period).floor();

    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = modulus.k;
    let mut b = modulus.kprime;
    let mut depth = 0;
    while depth < AGM_MAX_ITER && !agm_converged(a[depth], b) {
        let an = a[depth];
        a[depth + 1] = 0.5 * (an + b);
        c[depth + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        depth += 1;
    }

    let mut phi = (1u64 << depth) as f64 * a[depth] * u;
    for n in (1..=depth).rev() {
        let ratio = (c[n] / a[n] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + ratio.asin());
    }
    let (sn, cn) = phi.sin_cos();
    let ksn2 = modulus.m * sn * sn;
    let dn = if ksn2 < 0.5 {
        (1.0 - ksn2).sqrt()
    } else {
        (modulus.m1 + modulus.m * cn * cn).sqrt()
    };
    JacobiTriple { sn, cn, dn }
}
