//! Automorphisms of the unit disk and the conformal map between the disk
//! and the right half-disk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Disk automorphism `z ↦ e^{iα}(z + ξ)/(1 + ξ̄z)`, stored internally as
/// the SU(1,1) pair `z ↦ (az + b)/(b̄z + ā)` with `|a|² − |b|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusAut {
    a: Complex64,
    b: Complex64,
}

#[derive(Serialize, Deserialize)]
struct MoebiusParams {
    xi: Complex64,
    alpha: f64,
}

impl Serialize for MoebiusAut {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MoebiusParams {
            xi: self.xi(),
            alpha: self.alpha(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MoebiusAut {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let p = MoebiusParams::deserialize(d)?;
        MoebiusAut::new(p.xi, p.alpha).map_err(serde::de::Error::custom)
    }
}

impl MoebiusAut {
    pub fn identity() -> Self {
        MoebiusAut { a: ONE, b: Complex64::new(0.0, 0.0) }
    }

    pub fn new(xi: Complex64, alpha: f64) -> Result<Self> {
        let r2 = xi.norm_sqr();
        if !(r2 < 1.0) {
            return Err(Error::Parameter(format!("automorphism parameter |ξ| = {} is not < 1", r2.sqrt())));
        }
        let scale = 1.0 / (1.0 - r2).sqrt();
        let half = Complex64::from_polar(1.0, 0.5 * alpha);
        Ok(MoebiusAut {
            a: half * scale,
            b: half * xi * scale,
        })
    }

    pub fn rotation(alpha: f64) -> Self {
        MoebiusAut {
            a: Complex64::from_polar(1.0, 0.5 * alpha),
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// `z ↦ (z + s)/(1 + s z)` for real `s ∈ (−1, 1)`.
    pub fn real_translation(s: f64) -> Result<Self> {
        MoebiusAut::new(Complex64::new(s, 0.0), 0.0)
    }

    pub fn xi(&self) -> Complex64 {
        self.b / self.a
    }

    pub fn alpha(&self) -> f64 {
        (self.a / self.a.conj()).arg()
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.b.conj() * z + self.a.conj())
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let d = self.b.conj() * z + self.a.conj();
        1.0 / (d * d)
    }

    /// `|g'(e^{iθ})|`, the stretching factor of the boundary map.
    pub fn boundary_speed(&self, theta: f64) -> f64 {
        1.0 / (self.b.conj() * Complex64::from_polar(1.0, theta) + self.a.conj()).norm_sqr()
    }

    /// Image angle of `e^{iθ}`, in `[0, 2π)`.
    pub fn apply_angle(&self, theta: f64) -> f64 {
        self.apply(Complex64::from_polar(1.0, theta)).arg().rem_euclid(2.0 * PI)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MoebiusAut) -> Self {
        // matrix product [[a, b], [b̄, ā]] · [[c, d], [d̄, c̄]]
        let a = self.a * other.a + self.b * other.b.conj();
        let b = self.a * other.b + self.b * other.a.conj();
        MoebiusAut { a, b }.renormalized()
    }

    pub fn inverse(&self) -> Self {
        MoebiusAut {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// Drops the rotation part: `z ↦ (z + ξ)/(1 + ξ̄z)` with the same `ξ`.
    pub fn without_rotation(&self) -> Self {
        MoebiusAut::new(self.xi(), 0.0).unwrap_or(*self)
    }

    fn renormalized(self) -> Self {
        let det = self.a.norm_sqr() - self.b.norm_sqr();
        let s = 1.0 / det.sqrt();
        MoebiusAut {
            a: self.a * s,
            b: self.b * s,
        }
    }
}

/// Anti-conformal involution `z ↦ G(−conj(G⁻¹ z))`: the hyperbolic reflection
/// in the geodesic `G(iℝ ∩ 𝔻)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reflection {
    pub frame: MoebiusAut,
}

impl Reflection {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let w = self.frame.inverse().apply(z);
        self.frame.apply(-w.conj())
    }

    pub fn apply_angle(&self, theta: f64) -> f64 {
        self.apply(Complex64::from_polar(1.0, theta)).arg().rem_euclid(2.0 * PI)
    }

    /// `|d/dθ arg τ(e^{iθ})|`.
    pub fn boundary_speed(&self, theta: f64) -> f64 {
        let ginv = self.frame.inverse();
        let w = ginv.apply_angle(theta);
        ginv.boundary_speed(theta) * self.frame.boundary_speed(PI - w)
    }
}

/// Conformal map of the disk onto the right half-disk `H = {|z| < 1, Re z > 0}`
/// with `h(1) = −i`, `h(−1) = i`, `h(i) = 1`, `h(−i) = 0`.
pub fn half_disk_map(z: Complex64) -> Complex64 {
    // disk → upper half-plane → first quadrant → H
    if (ONE + z).norm() < 1e-150 {
        return I;
    }
    let mut w = I * (ONE - z) / (ONE + z);
    if w.im <= 0.0 {
        w.im = 0.0;
    }
    let m = -I * w.sqrt();
    I * (m - ONE) / (m + ONE)
}

/// Inverse of [`half_disk_map`].
pub fn half_disk_inverse(zeta: Complex64) -> Complex64 {
    if (I - zeta).norm() < 1e-150 {
        return -ONE;
    }
    let m = (zeta + I) / (I - zeta);
    let q = I * m;
    let w = q * q;
    -(w - I) / (w + I)
}

/// Complex derivative of [`half_disk_inverse`].
pub fn half_disk_inverse_derivative(zeta: Complex64) -> Complex64 {
    let d = I - zeta;
    let m = (zeta + I) / d;
    let q = I * m;
    let w = q * q;
    let dm = 2.0 * I / (d * d);
    let dw = 2.0 * q * I * dm;
    let wp = w + I;
    -2.0 * I / (wp * wp) * dw
}

/// Power exponent of the half-disk map at its corners: the corner angle
/// `π/2` is opened to a straight angle.
pub const HALF_DISK_POWER: f64 = 2.0;
