use num_complex::Complex64;
use std::f64::consts::PI;

use super::{ArcSegment, Density, Family, PlanarDomain};
use crate::error::{Error, Result};

fn c(x: f64, y: f64) -> Complex64 {
    Complex64::new(x, y)
}

/// Disk of the given radius centred at the origin, as one closed arc.
pub fn disk(radius: f64) -> Result<PlanarDomain> {
    let arcs = vec![ArcSegment::arc(c(0.0, 0.0), radius, 0.0, 2.0 * PI)?];
    PlanarDomain::new(format!("disk_r{radius}"), Family::Disk { radius }, arcs, Density::constant(1.0, 1))
}

/// Unit circle split into the right and left half circles (breakpoints at ∓i).
pub fn disk_two_arcs() -> Result<PlanarDomain> {
    let arcs = vec![
        ArcSegment::arc(c(0.0, 0.0), 1.0, -PI / 2.0, PI / 2.0)?,
        ArcSegment::arc(c(0.0, 0.0), 1.0, PI / 2.0, 3.0 * PI / 2.0)?,
    ];
    PlanarDomain::new("disk_two_arcs", Family::Disk { radius: 1.0 }, arcs, Density::constant(1.0, 2))
}

/// Right half of the unit disk: the arc first, then the diameter from `i` to `−i`.
pub fn half_disk() -> Result<PlanarDomain> {
    let arcs = vec![
        ArcSegment::arc(c(0.0, 0.0), 1.0, -PI / 2.0, PI / 2.0)?,
        ArcSegment::segment(c(0.0, 1.0), c(0.0, -1.0))?,
    ];
    let density = Density {
        coefficients: vec![vec![1.0], vec![0.0]],
    };
    PlanarDomain::new("half_disk", Family::HalfDisk, arcs, density)
}

/// Union of the unit disks centred at `±(1 − eps)`.
pub fn make_double_disk(eps: f64) -> Result<PlanarDomain> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::Parameter(format!("double disk needs 0 < eps <= 0.1, got {eps}")));
    }
    let d = 1.0 - eps;
    let delta = d.acos();
    let arcs = vec![
        ArcSegment::arc(c(d, 0.0), 1.0, -PI + delta, PI - delta)?,
        ArcSegment::arc(c(-d, 0.0), 1.0, delta, 2.0 * PI - delta)?,
    ];
    PlanarDomain::new(
        format!("double_disk_eps{eps}"),
        Family::DoubleDisk { eps },
        arcs,
        Density::constant(1.0, 2),
    )
}

/// Interior angle at either corner of the double disk, `π + 2 arccos(y0)`
/// with `y0 = √(2ε − ε²)` the corner height.
pub fn double_disk_corner_angle(eps: f64) -> f64 {
    let y0 = (2.0 * eps - eps * eps).sqrt();
    PI + 2.0 * y0.acos()
}

/// Union of `n` disks of radius `1 + eps` centred at `0, 2, …, 2(n − 1)`.
pub fn make_necklace(n: usize, eps: f64) -> Result<PlanarDomain> {
    if n < 2 {
        return Err(Error::Parameter(format!("necklace needs n >= 2, got {n}")));
    }
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::Parameter(format!("necklace needs 0 < eps <= 0.1, got {eps}")));
    }
    let r = 1.0 + eps;
    let y0 = (r * r - 1.0).sqrt();
    if !(y0 > 1e-6) {
        return Err(Error::Geometry(format!("necklace corners degenerate at eps = {eps}")));
    }
    let delta = (1.0 / r).acos();
    let last = 2.0 * (n as f64 - 1.0);
    let mut arcs = vec![ArcSegment::arc(c(0.0, 0.0), r, delta, 2.0 * PI - delta)?];
    for k in 1..n - 1 {
        arcs.push(ArcSegment::arc(c(2.0 * k as f64, 0.0), r, PI + delta, 2.0 * PI - delta)?);
    }
    arcs.push(ArcSegment::arc(c(last, 0.0), r, PI + delta, 3.0 * PI - delta)?);
    for k in (1..n - 1).rev() {
        arcs.push(ArcSegment::arc(c(2.0 * k as f64, 0.0), r, delta, PI - delta)?);
    }
    let pieces = arcs.len();
    PlanarDomain::new(
        format!("necklace_n{n}_eps{eps}"),
        Family::Necklace { n, eps },
        arcs,
        Density::constant(1.0, pieces),
    )
}

/// Two unit disks joined by a straight passage of length `eps` and width
/// `eps³`, symmetric in both axes. The disks are truncated by the lines
/// `y = ±eps³/2` where the passage attaches.
pub fn make_dumbbell(eps: f64) -> Result<PlanarDomain> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Parameter(format!("dumbbell needs 0 < eps < 0.5, got {eps}")));
    }
    let w = eps.powi(3);
    let centre = 1.0 + 0.5 * eps;
    let xj = centre - (1.0 - 0.25 * w * w).sqrt();
    let dd = (0.5 * w).asin();
    let arcs = vec![
        ArcSegment::segment(c(-xj, -0.5 * w), c(xj, -0.5 * w))?,
        ArcSegment::arc(c(centre, 0.0), 1.0, -PI + dd, PI - dd)?,
        ArcSegment::segment(c(xj, 0.5 * w), c(-xj, 0.5 * w))?,
        ArcSegment::arc(c(-centre, 0.0), 1.0, dd, 2.0 * PI - dd)?,
    ];
    PlanarDomain::new(
        format!("dumbbell_eps{eps}"),
        Family::Dumbbell {
            eps,
            passage_length: eps,
            passage_width: w,
        },
        arcs,
        Density::constant(1.0, 4),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    #[test]
    fn double_disk_corners() {
        let d = make_double_disk(0.1).unwrap();
        assert_eq!(d.corners.len(), 2);
        let mut ys: Vec<f64> = d.corners.iter().map(|c| c.point.im).collect();
        ys.sort_by(f64::total_cmp);
        assert!((ys[1] - 0.435_889_894_354_067_4).abs() < 1e-12);
        assert!((ys[0] + ys[1]).abs() < 1e-14);
        for corner in &d.corners {
            assert!(corner.point.re.abs() < 1e-14);
            assert!((corner.interior_angle - double_disk_corner_angle(0.1)).abs() < 1e-10);
        }
    }

    #[test]
    fn double_disk_mass_closed_form() {
        for eps in [0.1, 0.05, 0.01, 0.001] {
            let (m, a) = make_double_disk(eps).unwrap().mass_and_area();
            assert!((m - (4.0 * PI - 4.0 * (1.0 - eps).acos())).abs() < 1e-9);
            let y0 = (2.0 * eps - eps * eps).sqrt();
            let lens = 2.0 * (1.0 - eps).acos() - 2.0 * (1.0 - eps) * y0;
            assert!((a - (2.0 * PI - lens)).abs() < 1e-12);
        }
        let (m, _) = make_double_disk(0.1).unwrap().mass_and_area();
        assert!((m - 10.7622).abs() < 1e-4);
    }

    #[test]
    fn range_errors() {
        assert!(matches!(make_double_disk(0.0), Err(Error::Parameter(_))));
        assert!(make_double_disk(0.1).is_ok());
        assert!(make_double_disk(0.11).is_err());
        assert!(make_necklace(1, 0.05).is_err());
        assert!(make_dumbbell(0.3).is_ok());
        assert!(make_dumbbell(0.5).is_err());
    }

    #[test]
    fn necklace_structure() {
        let d = make_necklace(3, 0.05).unwrap();
        assert_eq!(d.corners.len(), 4);
        let r: f64 = 1.05;
        let delta = (1.0 / r).acos();
        let (m, _) = d.mass_and_area();
        assert!((m - r * (6.0 * PI - 8.0 * delta)).abs() < 1e-10);
        assert!(m < 6.0 * PI);
        // the two-disk necklace is a similar copy of a double disk
        let two = make_necklace(2, 0.05).unwrap();
        let scaled = two.similarity(Complex64::new(1.0 / r, 0.0), Complex64::new(-1.0 / r, 0.0)).unwrap();
        let eps_dd = 1.0 - 1.0 / r;
        let (m2, _) = scaled.mass_and_area();
        assert!((m2 - (4.0 * PI - 4.0 * (1.0 - eps_dd).acos())).abs() < 1e-10);
    }

    #[test]
    fn necklace_mass_tends_to_2_pi_n() {
        let m = make_necklace(4, 1e-6).unwrap().mass_and_area().0;
        assert!((m - 8.0 * PI).abs() < 0.02);
    }

    #[test]
    fn dumbbell_passage() {
        let d = make_dumbbell(0.1).unwrap();
        match d.family {
            Family::Dumbbell {
                passage_length,
                passage_width,
                ..
            } => {
                assert_eq!(passage_length, 0.1);
                assert!((passage_width - 0.001).abs() < 1e-18);
            }
            _ => panic!("wrong family"),
        }
        let bottom = &d.arcs[0];
        assert!((bottom.length() - 0.1).abs() < 1e-6);
        assert!((d.arcs[0].start().im - d.arcs[2].start().im + 0.001).abs() < 1e-15);
        assert_eq!(d.corners.len(), 4);
        for c in &d.corners {
            assert!((c.interior_angle - 1.5 * PI).abs() < 1e-3);
        }
        let (m, _) = d.mass_and_area();
        assert!((m - (4.0 * PI + 0.2)).abs() < 0.01);
    }

    fn contains_all(a: &[Complex64], b: &[Complex64]) -> bool {
        b.iter().all(|p| a.iter().any(|q| (p - q).norm() < 1e-12))
    }

    proptest! {
        #[test]
        fn dumbbell_double_symmetry(eps in 0.01f64..0.249) {
            let d = make_dumbbell(eps).unwrap();
            let v = d.vertices();
            let rx: Vec<_> = v.iter().map(|z| z.conj()).collect();
            let ry: Vec<_> = v.iter().map(|z| -z.conj()).collect();
            prop_assert!(contains_all(&v, &rx));
            prop_assert!(contains_all(&v, &ry));
        }

        #[test]
        fn rigid_motions_and_scaling(eps in 0.01f64..0.099, theta in 0.0f64..TAU,
                                     tx in -3.0f64..3.0, scale in 0.2f64..4.0, fam in 0usize..3) {
            let d = match fam {
                0 => make_double_disk(eps).unwrap(),
                1 => make_necklace(3, eps).unwrap(),
                _ => make_dumbbell(2.0 * eps).unwrap(),
            };
            let (m, a) = d.mass_and_area();
            let rot = d.similarity(Complex64::from_polar(1.0, theta), Complex64::new(tx, -tx)).unwrap();
            let (mr, ar) = rot.mass_and_area();
            prop_assert!((mr - m).abs() < 1e-9 * m);
            prop_assert!((ar - a).abs() < 1e-9 * a);
            let sc = d.similarity(Complex64::new(scale, 0.0), Complex64::new(0.0, 0.0)).unwrap();
            let (ms, as_) = sc.mass_and_area();
            prop_assert!((ms - scale * m).abs() < 1e-9 * scale * m);
            prop_assert!((as_ - scale * scale * a).abs() < 1e-9 * scale * scale * a);
        }

        #[test]
        fn generated_loops_close(eps in 0.001f64..0.099, n in 2usize..6) {
            for d in [make_double_disk(eps).unwrap(), make_necklace(n, eps).unwrap()] {
                let k = d.arcs.len();
                for i in 0..k {
                    prop_assert!((d.arcs[i].end() - d.arcs[(i + 1) % k].start()).norm() < 1e-12);
                }
            }
        }
    }
}
