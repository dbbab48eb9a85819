//! Hyperbolic caps of the disk, their reflections and uniformizations, and
//! the fold/rearrange operations on circle measures.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use crate::disk::BoundaryFunction;
use crate::error::{Error, Result};
use crate::measure::{signed_angle, Cell, CircleMeasure};
use crate::moebius::{
    half_disk_inverse, half_disk_inverse_derivative, half_disk_map, MoebiusAut, Reflection, HALF_DISK_POWER,
};
use crate::quadrature::GaussLegendre;

pub const HERSCH_MAX_STEPS: usize = 200;
pub const HERSCH_TOLERANCE: f64 = 1e-12;
const HERSCH_MAX_STEP: f64 = 0.5;

/// Component of the disk cut off by a geodesic, whose boundary arc on the
/// unit circle has length `l` and midpoint `e^{iθp}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCap {
    pub l: f64,
    pub theta_p: f64,
}

impl HyperbolicCap {
    pub fn new(l: f64, theta_p: f64) -> Result<Self> {
        if !(l > 0.0 && l < TAU) || !theta_p.is_finite() {
            return Err(Error::Parameter(format!("cap needs 0 < l < 2π, got l = {l}")));
        }
        Ok(HyperbolicCap {
            l,
            theta_p: theta_p.rem_euclid(TAU),
        })
    }

    pub fn p(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta_p)
    }

    /// Möbius map taking the right half-disk onto the cap with `1 ↦ p`.
    pub fn frame(&self) -> MoebiusAut {
        let s = (FRAC_PI_4 - 0.25 * self.l).tan();
        MoebiusAut::rotation(self.theta_p).compose(&MoebiusAut::real_translation(s).expect("|s| < 1"))
    }

    /// Corner angles `θp − l/2` and `θp + l/2`.
    pub fn corners(&self) -> (f64, f64) {
        (self.theta_p - 0.5 * self.l, self.theta_p + 0.5 * self.l)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        signed_angle(theta - self.theta_p).abs() <= 0.5 * self.l
    }

    /// Interior angle at each corner: the geodesic meets the circle
    /// orthogonally.
    pub fn corner_angle(&self) -> f64 {
        PI / HALF_DISK_POWER
    }

    pub fn reflection(&self) -> Reflection {
        cap_reflection(self)
    }
}

/// Hyperbolic reflection in the geodesic bounding the cap.
pub fn cap_reflection(cap: &HyperbolicCap) -> Reflection {
    Reflection { frame: cap.frame() }
}

/// Automorphism `g` such that `g_*μ` has its center of mass at the origin,
/// with the rotation part removed.
pub fn hersch_normalize(mu: &CircleMeasure) -> Result<MoebiusAut> {
    let points: Vec<Complex64> = mu.nodes().iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
    hersch_points(&points, mu.weights())
}

fn hersch_points(points: &[Complex64], weights: &[f64]) -> Result<MoebiusAut> {
    let mass: f64 = weights.iter().sum();
    let support = weights.iter().filter(|&&w| w > 1e-14 * mass).count();
    if support <= 2 {
        return Err(Error::Normalization(format!(
            "measure is concentrated on {support} atoms"
        )));
    }
    let mut g = MoebiusAut::identity();
    let mut z = points.to_vec();
    for _ in 0..HERSCH_MAX_STEPS {
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (zi, &w) in z.iter().zip(weights) {
            s1 += w * zi;
            s2 += w * zi * zi;
        }
        if s1.norm() <= HERSCH_TOLERANCE * mass {
            return Ok(g.without_rotation());
        }
        // linearized centering condition m c − S₂ c̄ = S₁ for the step z ↦ (z − c)/(1 − c̄z)
        let (a11, a12, a22) = (mass - s2.re, -s2.im, mass + s2.re);
        let det = a11 * a22 - a12 * a12;
        if !(det > 0.0) {
            return Err(Error::Normalization("singular centering system".into()));
        }
        let mut c = Complex64::new((a22 * s1.re - a12 * s1.im) / det, (a11 * s1.im - a12 * s1.re) / det);
        if c.norm() > HERSCH_MAX_STEP {
            c *= HERSCH_MAX_STEP / c.norm();
        }
        let step = MoebiusAut::new(-c, 0.0)?;
        g = step.compose(&g);
        for zi in z.iter_mut() {
            *zi = step.apply(*zi);
            *zi /= zi.norm();
        }
    }
    Err(Error::Normalization(format!(
        "centering did not converge in {HERSCH_MAX_STEPS} steps"
    )))
}

/// Rotation angle taking the top eigenvector of the second-moment form to
/// `e₁`, in `(−π/2, π/2]`; zero for an isotropic form.
pub fn rotation_normalize(mu: &CircleMeasure) -> f64 {
    let q = mu.quad_form();
    if q.gap() <= 1e-12 * q.trace() {
        return 0.0;
    }
    let r = -0.5 * q.anisotropy().arg();
    if r <= -0.5 * PI {
        r + PI
    } else {
        r
    }
}

/// Hersch-centers and rotation-normalizes a measure.
pub fn normalize_measure(mu: &CircleMeasure) -> Result<CircleMeasure> {
    let g = hersch_normalize(mu)?;
    let centered = mu.pushforward(|t| g.apply_angle(t), true)?.with_provenance("hersch");
    let r = rotation_normalize(&centered);
    centered.rotated(r)
}

/// Conformal map `ψ(z) = G(h(k⁻¹(e^{iβ}z)))` of the disk onto a cap: `G` the
/// cap frame, `h` the half-disk map, `k` the centering automorphism and `β`
/// fixed by `ψ(p) = p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapMap {
    pub cap: HyperbolicCap,
    frame: MoebiusAut,
    hersch: MoebiusAut,
    beta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum ChainStage {
    Rotation { beta: f64 },
    InverseAutomorphism { map: MoebiusAut },
    HalfDiskPower { exponent: f64 },
    Frame { map: MoebiusAut },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CapMapDocument {
    version: u32,
    cap: HyperbolicCap,
    chain: Vec<ChainStage>,
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `h⁻¹(G⁻¹ z)`, with the corner `G(i)` sent to `−1`.
fn pre_hersch(frame_inv: &MoebiusAut, z: Complex64) -> Complex64 {
    half_disk_inverse(frame_inv.apply(z))
}

impl CapMap {
    pub fn new(cap: HyperbolicCap, hersch: MoebiusAut) -> Self {
        let beta = hersch.apply(I).arg() - cap.theta_p;
        CapMap {
            cap,
            frame: cap.frame(),
            hersch,
            beta,
        }
    }

    pub fn hersch(&self) -> MoebiusAut {
        self.hersch
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn forward(&self, z: Complex64) -> Complex64 {
        let r = Complex64::from_polar(1.0, self.beta);
        self.frame.apply(half_disk_map(self.hersch.inverse().apply(r * z)))
    }

    pub fn inverse(&self, z: Complex64) -> Complex64 {
        let w = pre_hersch(&self.frame.inverse(), z);
        Complex64::from_polar(1.0, -self.beta) * self.hersch.apply(w)
    }

    /// `arg ψ⁻¹(e^{iθ})` for `θ` on the cap arc.
    pub fn inverse_angle(&self, theta: f64) -> f64 {
        self.inverse(Complex64::from_polar(1.0, theta)).arg()
    }

    /// `(ψ⁻¹)'` composed with the frame: derivative of `ζ ↦ ψ⁻¹(G ζ)` on the
    /// right half-disk.
    pub fn inverse_derivative_in_frame(&self, zeta: Complex64) -> Complex64 {
        let w = half_disk_inverse(zeta);
        Complex64::from_polar(1.0, -self.beta) * self.hersch.derivative(w) * half_disk_inverse_derivative(zeta)
    }

    pub fn chain(&self) -> Vec<ChainStage> {
        vec![
            ChainStage::Rotation { beta: self.beta },
            ChainStage::InverseAutomorphism { map: self.hersch },
            ChainStage::HalfDiskPower { exponent: HALF_DISK_POWER },
            ChainStage::Frame { map: self.frame },
        ]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CapMapDocument {
            version: 1,
            cap: self.cap,
            chain: self.chain(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: CapMapDocument = serde_json::from_str(s)?;
        let cap = HyperbolicCap::new(doc.cap.l, doc.cap.theta_p)?;
        match doc.chain.as_slice() {
            [ChainStage::Rotation { beta }, ChainStage::InverseAutomorphism { map }, ChainStage::HalfDiskPower { exponent }, ChainStage::Frame { map: frame }] =>
            {
                if (*exponent - HALF_DISK_POWER).abs() > 1e-12 {
                    return Err(Error::Data(format!("unexpected power exponent {exponent}")));
                }
                Ok(CapMap {
                    cap,
                    frame: *frame,
                    hersch: *map,
                    beta: *beta,
                })
            }
            _ => Err(Error::Data("cap map chain must be rotation, automorphism, power, frame".into())),
        }
    }

    /// `2 ∫_H |d/dζ ψ⁻¹(Gζ)|² dA`, the energy of the lift of `t·ψ⁻¹` for a
    /// unit vector `t`, by tensor Gauss quadrature in polar coordinates.
    pub fn lift_energy_by_quadrature(&self, panels: usize) -> f64 {
        let gl = GaussLegendre::new(10);
        let mut total = 0.0;
        for i in 0..panels {
            let (r0, r1) = (i as f64 / panels as f64, (i + 1) as f64 / panels as f64);
            total += gl.integrate(r0, r1, |r| {
                let mut s = 0.0;
                for j in 0..panels {
                    let a0 = -0.5 * PI + PI * j as f64 / panels as f64;
                    let a1 = a0 + PI / panels as f64;
                    s += gl.integrate(a0, a1, |a| self.inverse_derivative_in_frame(Complex64::from_polar(r, a)).norm_sqr());
                }
                s * r
            });
        }
        2.0 * total
    }
}

/// `dμ_a`: the part of `μ` on the cap arc plus the reflection of the rest.
pub fn fold_measure(mu: &CircleMeasure, cap: &HyperbolicCap) -> Result<CircleMeasure> {
    let tau = cap.reflection();
    let half = 0.5 * cap.l;
    let tp = cap.theta_p;
    let (c0, c1) = cap.corners();
    let mu = &mu.split_at(&[c0, c1])?;
    let n = mu.len();
    let mut nodes = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    for (&t, c) in mu.nodes().iter().zip(mu.cells()) {
        let r = signed_angle(t - tp);
        let ds = (t - c.start).rem_euclid(TAU).min(c.width);
        let (lo, hi) = (r - ds, r - ds + c.width);
        if r.abs() <= half {
            let (a, b) = (lo.max(-half), hi.min(half));
            nodes.push(t);
            cells.push(Cell {
                start: tp + a,
                width: (b - a).max(0.0),
            });
        } else {
            let (a, b) = if r > 0.0 {
                (lo.max(half), hi.min(TAU - half))
            } else {
                (lo.max(-(TAU - half)), hi.min(-half))
            };
            let b = b.max(a);
            let start = tau.apply_angle(tp + b);
            let end = tau.apply_angle(tp + a);
            nodes.push(tau.apply_angle(t));
            let mut width = (end - start).rem_euclid(TAU);
            if width > TAU - 1e-9 {
                width = 0.0;
            }
            cells.push(Cell { start, width });
        }
    }
    Ok(CircleMeasure::from_parts(nodes, mu.weights().to_vec(), cells)?
        .with_provenance(format!("fold l={:.17e} p={:.17e}", cap.l, cap.theta_p)))
}

/// `dν_a = ψ_a^* dμ_a`.
pub fn rearrange_measure(folded: &CircleMeasure, map: &CapMap) -> Result<CircleMeasure> {
    let cap = map.cap;
    if let Some(t) = folded
        .nodes()
        .iter()
        .find(|&&t| signed_angle(t - cap.theta_p).abs() > 0.5 * cap.l + 1e-9)
    {
        return Err(Error::Measure(format!("atom at {t} lies outside the cap arc")));
    }
    Ok(folded
        .pushforward(|t| map.inverse_angle(t), true)?
        .with_provenance("rearrange"))
}

/// Uniformization of the cap normalized so that the rearranged measure of
/// `μ` is centered.
pub fn cap_uniformize(cap: &HyperbolicCap, mu: &CircleMeasure) -> Result<CapMap> {
    Ok(rearranged(mu, cap)?.map)
}

/// Folded and rearranged measures of `μ` for one cap.
#[derive(Debug, Clone)]
pub struct CapStage {
    pub map: CapMap,
    pub folded: CircleMeasure,
    pub rearranged: CircleMeasure,
}

pub fn rearranged(mu: &CircleMeasure, cap: &HyperbolicCap) -> Result<CapStage> {
    let folded = fold_measure(mu, cap)?;
    let ginv = cap.frame().inverse();
    let points: Vec<Complex64> = folded
        .nodes()
        .iter()
        .map(|&t| {
            let w = pre_hersch(&ginv, Complex64::from_polar(1.0, t));
            w / w.norm()
        })
        .collect();
    if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Map("folded atom sits on a cap corner".into()));
    }
    let k = hersch_points(&points, folded.weights())?;
    let map = CapMap::new(*cap, k);
    let rearranged = rearrange_measure(&folded, &map)?;
    Ok(CapStage {
        map,
        folded,
        rearranged,
    })
}

/// `ũ`: `u` on the cap arc, `u ∘ τ_a` on the rest of the circle.
pub fn lift_boundary_data(
    u: impl Fn(f64) -> f64,
    cap: &HyperbolicCap,
    cutoff: usize,
) -> Result<BoundaryFunction> {
    let tau = cap.reflection();
    let lifted = |t: f64| {
        if cap.contains_angle(t) {
            u(t)
        } else {
            u(tau.apply_angle(t))
        }
    };
    let (c0, c1) = cap.corners();
    for c in [c0, c1] {
        let mismatch = (u(c) - lifted(c - 1e-11)).abs().max((u(c) - lifted(c + 1e-11)).abs());
        if mismatch > 1e-8 {
            return Err(Error::Data(format!("lifted data jumps by {mismatch:.3e} at corner {c:.6}")));
        }
    }
    Ok(BoundaryFunction::from_fn(cutoff, lifted))
}

/// Boundary values of `u_a^t = X_t ∘ ψ_a⁻¹` on the cap arc.
pub fn comparison_data(map: &CapMap, t: Complex64) -> impl Fn(f64) -> f64 + '_ {
    move |theta| {
        let w = map.inverse(Complex64::from_polar(1.0, theta));
        w.re * t.re + w.im * t.im
    }
}

/// `sup_θ |ψ(e^{iθ}) − e^{iθ}|`.
pub fn distance_to_identity(map: &CapMap, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let z = Complex64::from_polar(1.0, TAU * i as f64 / samples as f64);
            (map.forward(z) - z).norm()
        })
        .fold(0.0, f64::max)
}

/// `sup_θ |ψ₁(e^{iθ}) − ψ₂(e^{iθ})|`.
pub fn boundary_distance(a: &CapMap, b: &CapMap, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let z = Complex64::from_polar(1.0, TAU * i as f64 / samples as f64);
            (a.forward(z) - b.forward(z)).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk::harmonic_energy;
    use crate::measure::measure_distance;
    use proptest::prelude::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn half_disk_cap_reflection_is_euclidean() {
        let cap = HyperbolicCap::new(PI, 0.0).unwrap();
        let tau = cap.reflection();
        for z in [c(0.3, 0.2), c(-0.5, 0.1), c(0.0, -0.7)] {
            assert!((tau.apply(z) - c(-z.re, z.im)).norm() < 1e-14);
        }
    }

    #[test]
    fn geodesic_points_are_fixed() {
        for (l, tp) in [(1.0, 0.3), (2.5, 2.0), (5.0, 4.0), (0.2, 1.0)] {
            let cap = HyperbolicCap::new(l, tp).unwrap();
            let tau = cap.reflection();
            let center = cap.p() / (0.5 * l).cos();
            let radius = (0.5 * l).tan().abs();
            // the geodesic arc inside the disk
            let z0 = Complex64::from_polar(1.0, tp - 0.5 * l) - center;
            let z1 = Complex64::from_polar(1.0, tp + 0.5 * l) - center;
            let (a0, mut a1) = (z0.arg(), z1.arg());
            if (a1 - a0).abs() > PI {
                a1 += if a1 < a0 { TAU } else { -TAU };
            }
            for k in 1..20 {
                let a = a0 + (a1 - a0) * k as f64 / 20.0;
                let g = center + Complex64::from_polar(radius, a);
                assert!(g.norm() < 1.0);
                assert!((tau.apply(g) - g).norm() < 1e-10, "l {l} point {g}");
            }
        }
    }

    #[test]
    fn cap_frame_places_the_arc() {
        let cap = HyperbolicCap::new(2.0, 1.0).unwrap();
        let g = cap.frame();
        assert!((g.apply(c(1.0, 0.0)) - cap.p()).norm() < 1e-14);
        let (a, b) = cap.corners();
        assert!((g.apply(c(0.0, -1.0)) - Complex64::from_polar(1.0, a)).norm() < 1e-14);
        assert!((g.apply(c(0.0, 1.0)) - Complex64::from_polar(1.0, b)).norm() < 1e-14);
        assert_eq!(cap.corner_angle(), PI / 2.0);
    }

    #[test]
    fn hersch_examples() {
        let u = CircleMeasure::uniform(512);
        assert!(hersch_normalize(&u).unwrap().xi().norm() < 1e-12);
        // uniform plus equal atoms at ±1
        let mut nodes = u.nodes().to_vec();
        let mut weights = u.weights().to_vec();
        nodes.extend([0.0, PI]);
        weights.extend([1.0, 1.0]);
        let m = CircleMeasure::from_atoms(nodes, weights).unwrap();
        assert!(hersch_normalize(&m).unwrap().xi().norm() < 1e-12);

        let mu = CircleMeasure::from_density(1024, |t| 1.0 + 0.5 * t.cos()).unwrap();
        let g = hersch_normalize(&mu).unwrap();
        assert!(g.xi().im.abs() < 1e-12 && g.xi().re < 0.0);
        // bisection over real translations
        let center = |s: f64| {
            let k = MoebiusAut::real_translation(s).unwrap();
            mu.integrate(|t| k.apply(Complex64::from_polar(1.0, t)).re)
        };
        let (mut lo, mut hi) = (-0.99, 0.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if center(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((g.xi().re - 0.5 * (lo + hi)).abs() < 1e-10);
        let pushed = mu.pushforward(|t| g.apply_angle(t), true).unwrap();
        assert!(pushed.center_of_mass().norm() < 1e-10);
    }

    #[test]
    fn degenerate_measure_is_rejected() {
        let m = CircleMeasure::from_atoms(vec![0.0, PI], vec![1.0, 1.0]).unwrap();
        assert!(matches!(hersch_normalize(&m), Err(Error::Normalization(_))));
    }

    #[test]
    fn rotation_examples() {
        let a = CircleMeasure::from_density(1024, |t| 1.0 + 0.3 * (2.0 * t).cos()).unwrap();
        assert!(rotation_normalize(&a).abs() < 1e-12);
        let b = CircleMeasure::from_density(1024, |t| 1.0 + 0.3 * (2.0 * t).sin()).unwrap();
        let r = rotation_normalize(&b);
        assert!((r + PI / 4.0).rem_euclid(PI).min(PI - (r + PI / 4.0).rem_euclid(PI)) < 1e-9);
        assert_eq!(rotation_normalize(&CircleMeasure::uniform(64)), 0.0);
        let n = normalize_measure(&b).unwrap();
        let q = n.quad_form();
        assert!(q.q12.abs() < 1e-9 && q.q11 > q.q22);
    }

    #[test]
    fn fold_of_uniform_on_half_disk() {
        let mu = CircleMeasure::uniform(1000);
        let cap = HyperbolicCap::new(PI, 0.0).unwrap();
        let f = fold_measure(&mu, &cap).unwrap();
        assert!((f.mass() - TAU).abs() < 1e-12);
        assert!(f.nodes().iter().all(|&t| cap.contains_angle(t)));
        let doubled = CircleMeasure::from_density(1000, |t| if signed_angle(t).abs() < 0.5 * PI { 2.0 } else { 0.0 }).unwrap();
        let d = measure_distance(&f, &doubled);
        assert!(d.weak < 1e-10, "{d:?}");
    }

    #[test]
    fn fold_of_cosine_density_matches_two_term_formula() {
        let rho = |t: f64| 1.0 + 0.5 * t.cos();
        let mu = CircleMeasure::from_density(4096, rho).unwrap();
        let cap = HyperbolicCap::new(PI, 0.0).unwrap();
        let f = fold_measure(&mu, &cap).unwrap();
        // τ(θ) = π − θ on the circle, so the folded density is ρ(θ) + ρ(π − θ)
        let expect = |t: f64| rho(t) + rho(PI - t);
        for t in [-1.2f64, -0.3, 0.5, 1.4] {
            let lo = t - 0.05;
            let hi = t + 0.05;
            let got = f.cdf(hi.rem_euclid(TAU)) - f.cdf(lo.rem_euclid(TAU));
            let gl = GaussLegendre::new(10);
            let want = gl.integrate(lo, hi, expect);
            assert!((got - want).abs() < 1e-5, "{t}: {got} vs {want}");
        }
    }

    fn test_measure() -> CircleMeasure {
        CircleMeasure::from_density(1024, |t| 1.0 + 0.3 * (2.0 * t).cos() + 0.1 * (3.0 * t).sin()).unwrap()
    }

    #[test]
    fn folding_identity_for_smooth_lifts() {
        let mu = test_measure();
        let cap = HyperbolicCap::new(2.0, 0.7).unwrap();
        let tau = cap.reflection();
        let f = fold_measure(&mu, &cap).unwrap();
        // folding splits the atoms straddling a corner, where the lift has a kink
        let (c0, c1) = cap.corners();
        let split = mu.split_at(&[c0, c1]).unwrap();
        for k in 0..20 {
            let (a, b) = (0.3 * k as f64, 1.0 + 0.1 * k as f64);
            let u = |t: f64| (a + b * t.cos()).sin() + (t * 2.0).cos() * b;
            let lift = |t: f64| if cap.contains_angle(t) { u(t) } else { u(tau.apply_angle(t)) };
            let lhs = split.integrate(lift);
            let rhs = f.integrate(u);
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
            assert!((mu.integrate(lift) - rhs).abs() < 1e-5);
        }
    }

    #[test]
    fn pipeline_conserves_and_centers() {
        let mu = test_measure();
        for (l, tp) in [(0.5, 0.2), (3.0, 2.0), (6.0, 5.0)] {
            let cap = HyperbolicCap::new(l, tp).unwrap();
            let st = rearranged(&mu, &cap).unwrap();
            let m = mu.mass();
            assert!((st.folded.mass() - m).abs() < 1e-10 * m);
            assert!((st.rearranged.mass() - m).abs() < 1e-10 * m);
            assert!((st.rearranged.quad_form().trace() - m).abs() < 1e-10 * m);
            assert!(st.rearranged.center_of_mass().norm() < 1e-8 * m);
            // duality ∫ X_t dν = ∫ ũ dμ
            let tau = cap.reflection();
            for t in [c(1.0, 0.0), c(0.0, 1.0)] {
                let u = comparison_data(&st.map, t);
                let lift = |x: f64| if cap.contains_angle(x) { u(x) } else { u(tau.apply_angle(x)) };
                let lhs = st.rearranged.integrate(|x| x.cos() * t.re + x.sin() * t.im);
                assert!((lhs - mu.integrate(lift)).abs() < 1e-6);
            }
            let p = st.map.forward(cap.p());
            assert!((p - cap.p()).norm() < 1e-10);
        }
    }

    #[test]
    fn cap_map_geometry() {
        let mu = test_measure();
        let cap = HyperbolicCap::new(2.5, 1.0).unwrap();
        let map = cap_uniformize(&cap, &mu).unwrap();
        let frame_inv = cap.frame().inverse();
        for k in 0..64 {
            let z = Complex64::from_polar(0.999, TAU * k as f64 / 64.0);
            let w = map.forward(z);
            let zeta = frame_inv.apply(w);
            assert!(zeta.re > -1e-12 && zeta.norm() < 1.0 + 1e-12, "image leaves the cap");
            assert!((map.inverse(w) - z).norm() < 1e-9);
            // Cauchy-Riemann residual
            let z = Complex64::from_polar(0.6, TAU * k as f64 / 64.0);
            let hs = 1e-5;
            let fx = (map.forward(z + hs) - map.forward(z - hs)) / (2.0 * hs);
            let fy = (map.forward(z + I * hs) - map.forward(z - I * hs)) / (2.0 * hs);
            assert!((fy - I * fx).norm() < 1e-8 * (1.0 + fx.norm()));
        }
        // the two corner preimages
        let (a, b) = cap.corners();
        for corner in [a, b] {
            let pre = map.inverse(Complex64::from_polar(1.0, corner));
            assert!((pre.norm() - 1.0).abs() < 1e-9);
            assert!((map.forward(pre) - Complex64::from_polar(1.0, corner)).norm() < 1e-7);
        }
        let back = CapMap::from_json(&map.to_json().unwrap()).unwrap();
        for k in 0..16 {
            let z = Complex64::from_polar(0.9, k as f64);
            assert!((back.forward(z) - map.forward(z)).norm() < 1e-13);
        }
    }

    #[test]
    fn near_full_cap_is_close_to_identity() {
        let mu = normalize_measure(&test_measure()).unwrap();
        let cap = HyperbolicCap::new(TAU - 0.01, 1.3).unwrap();
        let map = cap_uniformize(&cap, &mu).unwrap();
        assert!(distance_to_identity(&map, 2000) < 0.05);
    }

    #[test]
    fn lift_examples() {
        let cap = HyperbolicCap::new(PI, 0.0).unwrap();
        let c3 = lift_boundary_data(|_| 3.0, &cap, 64).unwrap();
        assert!(c3.samples().iter().all(|v| (v - 3.0).abs() < 1e-15));
        let y = lift_boundary_data(|t| t.sin(), &cap, 64).unwrap();
        for (i, v) in y.samples().iter().enumerate() {
            let t = TAU * i as f64 / y.samples().len() as f64;
            assert!((v - t.sin()).abs() < 1e-12);
        }
        let jump = lift_boundary_data(|t| if signed_angle(t) >= 1.6 { 1.0 } else { 0.0 }, &HyperbolicCap::new(3.2, 0.0).unwrap(), 64);
        assert!(matches!(jump, Err(Error::Data(_))));
    }

    #[test]
    fn lifted_comparison_function_is_not_harmonic() {
        let mu = test_measure();
        for (l, tp) in [(1.0, 0.0), (3.0, 2.0), (5.0, 4.0)] {
            let cap = HyperbolicCap::new(l, tp).unwrap();
            let map = cap_uniformize(&cap, &mu).unwrap();
            let quad = map.lift_energy_by_quadrature(24);
            assert!((quad - TAU).abs() < 1e-6, "quadrature energy {quad}");
            for t in [c(1.0, 0.0), c(0.0, 1.0)] {
                let lift = lift_boundary_data(comparison_data(&map, t), &cap, 1024).unwrap();
                let e = harmonic_energy(&lift).unwrap();
                assert!(e < TAU - 1e-6, "energy {e}");
            }
        }
    }

    proptest! {
        #[test]
        fn reflection_swaps_cap_and_complement(l in 0.1f64..6.1, tp in 0.0f64..TAU, r in 0.0f64..0.99, a in 0.0f64..TAU) {
            let cap = HyperbolicCap::new(l, tp).unwrap();
            let tau = cap.reflection();
            let z = Complex64::from_polar(r, a);
            prop_assert!((tau.apply(tau.apply(z)) - z).norm() < 1e-12 * (1.0 + 1.0 / (1.0 - r)));
            let side = |w: Complex64| cap.frame().inverse().apply(w).re;
            let s0 = side(z);
            prop_assume!(s0.abs() > 1e-6);
            prop_assert!(side(tau.apply(z)) * s0 < 0.0);
        }

        #[test]
        fn fold_conserves_mass(l in 0.05f64..6.2, tp in 0.0f64..TAU) {
            let mu = test_measure();
            let cap = HyperbolicCap::new(l, tp).unwrap();
            let f = fold_measure(&mu, &cap).unwrap();
            prop_assert!((f.mass() - mu.mass()).abs() < 1e-10 * mu.mass());
            prop_assert!(f.nodes().iter().all(|&t| signed_angle(t - cap.theta_p).abs() <= 0.5 * l + 1e-9));
        }
    }
}
