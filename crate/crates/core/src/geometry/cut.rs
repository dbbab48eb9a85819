use num_complex::Complex64;

use super::{ArcSegment, Density, Family, MixedDomain, PlanarDomain, Point};
use crate::error::{Error, Result};

struct Piece {
    arc: ArcSegment,
    density: Vec<f64>,
    region: usize,
}

/// Splits `domain` along the vertical lines `Re z = x` for each `x` in
/// `cuts`. Each returned piece keeps its share of the original boundary as
/// Steklov and gets the cut segments as Neumann sides. Pieces are ordered
/// from left to right.
pub fn cut_half(domain: &PlanarDomain, cuts: &[f64]) -> Result<Vec<MixedDomain>> {
    let mut cuts = cuts.to_vec();
    cuts.sort_by(f64::total_cmp);
    if cuts.is_empty() {
        return Err(Error::Geometry("no cut lines given".into()));
    }
    let scale = domain
        .vertices()
        .iter()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let tol = 1e-10 * scale;

    // crossing points of every cut with the boundary
    let mut crossings: Vec<Vec<Point>> = vec![Vec::new(); cuts.len()];
    for (ci, &x) in cuts.iter().enumerate() {
        for arc in &domain.arcs {
            for s in arc.vertical_crossings(x) {
                let p = arc.point_at(s);
                if !crossings[ci].iter().any(|q| (q - p).norm() < tol) {
                    crossings[ci].push(p);
                }
            }
        }
        match crossings[ci].len() {
            0 => return Err(Error::Geometry(format!("cut Re z = {x} misses the domain"))),
            2 => {}
            k => {
                return Err(Error::Geometry(format!(
                    "cut Re z = {x} meets the boundary in {k} points, expected 2"
                )))
            }
        }
    }

    // split pieces at interior crossings and assign regions
    let mut pieces = Vec::new();
    for (k, arc) in domain.arcs.iter().enumerate() {
        let len = arc.length();
        let mut params: Vec<f64> = cuts
            .iter()
            .flat_map(|&x| arc.vertical_crossings(x))
            .filter(|&s| s > tol && s < len - tol)
            .collect();
        params.sort_by(f64::total_cmp);
        let mut bounds = vec![0.0];
        bounds.extend(params);
        bounds.push(len);
        for w in bounds.windows(2) {
            let sub = if w[0] == 0.0 && w[1] == len { arc.clone() } else { arc.sub(w[0], w[1])? };
            let mid = sub.point_at(0.5 * sub.length()).re;
            let region = cuts.iter().filter(|&&x| x < mid).count();
            pieces.push(Piece {
                arc: sub,
                density: domain.density.shifted(k, w[0]),
                region,
            });
        }
    }

    let on_cut = |p: Point| -> Option<usize> {
        (0..cuts.len()).find(|&ci| crossings[ci].iter().any(|q| (q - p).norm() < tol))
    };

    let n = pieces.len();
    let mut out = Vec::new();
    for region in 0..=cuts.len() {
        // chains: maximal runs of consecutive pieces in this region
        let members: Vec<usize> = (0..n).filter(|&i| pieces[i].region == region).collect();
        if members.is_empty() {
            return Err(Error::Geometry(format!("cut region {region} is empty")));
        }
        let mut chains: Vec<Vec<usize>> = Vec::new();
        for &i in &members {
            let prev = (i + n - 1) % n;
            if pieces[prev].region == region && members.len() < n {
                continue;
            }
            let mut chain = vec![i];
            let mut j = (i + 1) % n;
            while pieces[j].region == region && j != i {
                chain.push(j);
                j = (j + 1) % n;
            }
            chains.push(chain);
        }
        if chains.is_empty() {
            chains.push(members.clone());
        }

        let mut arcs = Vec::new();
        let mut density = Vec::new();
        let mut steklov = Vec::new();
        let mut used = vec![false; chains.len()];
        let mut current = 0;
        loop {
            used[current] = true;
            for &i in &chains[current] {
                arcs.push(pieces[i].arc.clone());
                density.push(pieces[i].density.clone());
                steklov.push(true);
            }
            let end = pieces[*chains[current].last().unwrap()].arc.end();
            let ci = on_cut(end)
                .ok_or_else(|| Error::Geometry("boundary chain does not end on a cut".into()))?;
            let other = crossings[ci]
                .iter()
                .copied()
                .find(|q| (q - end).norm() >= tol)
                .ok_or_else(|| Error::Geometry("degenerate cut segment".into()))?;
            arcs.push(ArcSegment::segment(end, other)?);
            density.push(vec![0.0]);
            steklov.push(false);
            let next = chains
                .iter()
                .position(|ch| (pieces[ch[0]].arc.start() - other).norm() < tol)
                .ok_or_else(|| Error::Geometry("cut piece does not close".into()))?;
            if next == 0 {
                break;
            }
            if used[next] {
                return Err(Error::Geometry("cut piece boundary revisits a chain".into()));
            }
            current = next;
        }
        if used.iter().any(|u| !u) {
            return Err(Error::Geometry(format!("cut region {region} is not connected")));
        }
        // snap the vertical segments exactly onto the cut line
        snap_cut_segments(&mut arcs);
        let family = Family::Piece {
            parent: Box::new(domain.family.clone()),
            region,
        };
        let piece = PlanarDomain::new(
            format!("{}_piece{region}", domain.id),
            family,
            arcs,
            Density { coefficients: density },
        )?;
        out.push(MixedDomain::new(piece, steklov)?);
    }
    Ok(out)
}

fn snap_cut_segments(arcs: &mut [ArcSegment]) {
    for arc in arcs.iter_mut() {
        if let ArcSegment::LineSegment { start, end } = arc {
            if (start.re - end.re).abs() < 1e-9 {
                let x = 0.5 * (start.re + end.re);
                *start = Complex64::new(x, start.im);
                *end = Complex64::new(x, end.im);
            }
        }
    }
}
