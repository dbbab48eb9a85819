//! Fourier computations on the unit disk: Dirichlet energy of harmonic
//! extensions, Rayleigh quotients against circle measures, and the exact
//! Steklov spectrum of the disk.

use rustfft::num_complex::Complex as FftComplex;
use rustfft::FftPlanner;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::measure::CircleMeasure;

pub const DEFAULT_CUTOFF: usize = 512;
pub const MAX_CUTOFF: usize = 4096;
const OVERSAMPLE: usize = 8;

/// Quadrature grid on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleGrid {
    pub angles: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CircleGrid {
    pub fn uniform(n: usize) -> Self {
        let h = TAU / n as f64;
        CircleGrid {
            angles: (0..n).map(|i| i as f64 * h).collect(),
            weights: vec![h; n],
        }
    }

    pub fn new(angles: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if angles.len() != weights.len() || angles.is_empty() {
            return Err(Error::Input("grid angles and weights differ in length".into()));
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) || angles[0] < 0.0 || *angles.last().unwrap() >= TAU {
            return Err(Error::Input("grid angles must increase strictly within [0, 2π)".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Input("grid weights must be positive".into()));
        }
        Ok(CircleGrid { angles, weights })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

/// Real function on the circle, held both as samples on a uniform grid of
/// `8K` points and as Fourier coefficients up to the cutoff `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    samples: Vec<f64>,
    pub a0: f64,
    /// `a[k-1]`, `b[k-1]` multiply `cos kθ`, `sin kθ` for `k = 1..=K`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Coefficients between `K` and the Nyquist limit, kept for the tail
    /// estimate.
    tail_a: Vec<f64>,
    tail_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub energy: f64,
    /// Energy carried by the resolved modes above the cutoff.
    pub tail: f64,
    /// `π K Σ_{k>K} (a_k² + b_k²)`.
    pub truncation_bound: f64,
    pub cutoff: usize,
}

impl BoundaryFunction {
    pub fn from_fn(cutoff: usize, f: impl Fn(f64) -> f64) -> Self {
        let n = OVERSAMPLE * cutoff;
        let samples: Vec<f64> = (0..n).map(|i| f(TAU * i as f64 / n as f64)).collect();
        Self::from_uniform_samples(cutoff, samples)
    }

    /// Samples on the uniform grid `θ_i = 2πi/N`; the cutoff is `N/8`.
    pub fn from_uniform_samples(cutoff: usize, samples: Vec<f64>) -> Self {
        let n = samples.len();
        assert!(n >= 2 * cutoff + 2, "grid too coarse for the cutoff");
        let mut buf: Vec<FftComplex<f64>> = samples.iter().map(|&v| FftComplex::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 2.0 / n as f64;
        let a0 = buf[0].re / n as f64;
        let half = n / 2 + 1;
        let mut a = Vec::with_capacity(cutoff);
        let mut b = Vec::with_capacity(cutoff);
        let mut tail_a = Vec::new();
        let mut tail_b = Vec::new();
        for (k, c) in buf.iter().enumerate().take(half).skip(1) {
            let s = if 2 * k == n { 0.5 * scale } else { scale };
            let (ak, bk) = (s * c.re, -s * c.im);
            if k <= cutoff {
                a.push(ak);
                b.push(bk);
            } else {
                tail_a.push(ak);
                tail_b.push(bk);
            }
        }
        BoundaryFunction {
            samples,
            a0,
            a,
            b,
            tail_a,
            tail_b,
        }
    }

    /// Resamples nonuniform data onto the dense uniform grid by periodic
    /// cubic interpolation.
    pub fn from_samples(grid: &CircleGrid, values: &[f64], cutoff: usize) -> Result<Self> {
        if values.len() != grid.len() || grid.len() < 4 {
            return Err(Error::Input("need at least four samples matching the grid".into()));
        }
        let n = OVERSAMPLE * cutoff;
        let samples = (0..n)
            .map(|i| periodic_cubic(&grid.angles, values, TAU * i as f64 / n as f64))
            .collect();
        Ok(Self::from_uniform_samples(cutoff, samples))
    }

    pub fn from_coefficients(a0: f64, a: Vec<f64>, b: Vec<f64>) -> Self {
        let cutoff = a.len().max(b.len()).max(1);
        let mut a = a;
        let mut b = b;
        a.resize(cutoff, 0.0);
        b.resize(cutoff, 0.0);
        let n = OVERSAMPLE * cutoff;
        let samples = (0..n)
            .map(|i| {
                let t = TAU * i as f64 / n as f64;
                a0 + (0..cutoff)
                    .map(|k| a[k] * ((k + 1) as f64 * t).cos() + b[k] * ((k + 1) as f64 * t).sin())
                    .sum::<f64>()
            })
            .collect();
        BoundaryFunction {
            samples,
            a0,
            a,
            b,
            tail_a: Vec::new(),
            tail_b: Vec::new(),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.a.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Value at `θ` by six-point Lagrange interpolation of the dense
    /// samples.
    pub fn eval(&self, theta: f64) -> f64 {
        let n = self.samples.len();
        let h = TAU / n as f64;
        let x = theta.rem_euclid(TAU) / h;
        let i = x.floor() as isize;
        let t = x - x.floor();
        let mut acc = 0.0;
        for j in -2..=3isize {
            let mut l = 1.0;
            for k in -2..=3isize {
                if k != j {
                    l *= (t - k as f64) / (j - k) as f64;
                }
            }
            acc += l * self.samples[(i + j).rem_euclid(n as isize) as usize];
        }
        acc
    }

    /// Value from the truncated Fourier series.
    pub fn eval_series(&self, theta: f64) -> f64 {
        self.a0
            + (0..self.a.len())
                .map(|k| {
                    let kt = (k + 1) as f64 * theta;
                    self.a[k] * kt.cos() + self.b[k] * kt.sin()
                })
                .sum::<f64>()
    }

    /// `Σ a_k² + b_k²` over all modes including the mean counted twice, so
    /// that Parseval reads `(1/π)∫f² = 2a₀² + Σ(a_k² + b_k²)`.
    pub fn coefficient_l2(&self) -> f64 {
        2.0 * self.a0 * self.a0
            + self.a.iter().chain(&self.tail_a).map(|v| v * v).sum::<f64>()
            + self.b.iter().chain(&self.tail_b).map(|v| v * v).sum::<f64>()
    }

    pub fn sample_l2(&self) -> f64 {
        let n = self.samples.len();
        self.samples.iter().map(|v| v * v).sum::<f64>() * TAU / n as f64
    }

    /// `π Σ k (a_k² + b_k²)` with a tail report; fails when the resolved
    /// modes above the cutoff carry more than 10% of the energy.
    pub fn harmonic_energy(&self) -> Result<EnergyReport> {
        let report = self.energy_report();
        if report.tail > 0.1 * report.energy.abs().max(f64::MIN_POSITIVE) && report.tail > 1e-14 {
            return Err(Error::Accuracy(format!(
                "energy tail {:.3e} exceeds 10% of {:.3e} at cutoff {}",
                report.tail,
                report.energy,
                self.cutoff()
            )));
        }
        Ok(report)
    }

    fn energy_report(&self) -> EnergyReport {
        let energy = PI
            * self
                .a
                .iter()
                .zip(&self.b)
                .enumerate()
                .map(|(k, (a, b))| (k + 1) as f64 * (a * a + b * b))
                .sum::<f64>();
        let k0 = self.a.len();
        let tail = PI
            * self
                .tail_a
                .iter()
                .zip(&self.tail_b)
                .enumerate()
                .map(|(k, (a, b))| (k0 + k + 1) as f64 * (a * a + b * b))
                .sum::<f64>();
        let tail_l2: f64 = self.tail_a.iter().chain(&self.tail_b).map(|v| v * v).sum();
        EnergyReport {
            energy,
            tail,
            truncation_bound: PI * k0 as f64 * tail_l2,
            cutoff: k0,
        }
    }
}

/// Energy of the harmonic extension of `f`, doubling the cutoff from
/// `DEFAULT_CUTOFF` until the tail test passes or `MAX_CUTOFF` is reached.
pub fn harmonic_energy_of(f: impl Fn(f64) -> f64) -> Result<EnergyReport> {
    let mut cutoff = DEFAULT_CUTOFF;
    loop {
        let bf = BoundaryFunction::from_fn(cutoff, &f);
        match bf.harmonic_energy() {
            Ok(r) => return Ok(r),
            Err(e) if cutoff >= MAX_CUTOFF => return Err(e),
            Err(_) => cutoff *= 2,
        }
    }
}

pub fn harmonic_energy(f: &BoundaryFunction) -> Result<f64> {
    Ok(f.harmonic_energy()?.energy)
}

/// `E(f) / ∫ f² dμ`.
pub fn rayleigh_quotient(f: &BoundaryFunction, mu: &CircleMeasure) -> Result<f64> {
    let energy = harmonic_energy(f)?;
    let denom = mu.integrate(|t| {
        let v = f.eval(t);
        v * v
    });
    if !(denom > 0.0) {
        return Err(Error::DegenerateTestFunction(
            "test function vanishes on the support of the measure".into(),
        ));
    }
    Ok(energy / denom)
}

/// `k`-th Steklov eigenvalue of the unit disk with unit density.
pub fn disk_oracle(k: usize) -> f64 {
    k.div_ceil(2) as f64
}

fn hermite(p1: f64, p2: f64, m1: f64, m2: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p1 + (t3 - 2.0 * t2 + t) * m1 + (-2.0 * t3 + 3.0 * t2) * p2 + (t3 - t2) * m2
}

/// Periodic cubic Hermite interpolation on increasing nodes in `[0, 2π)`,
/// slopes from the three-point nonuniform difference formula.
pub fn periodic_cubic(nodes: &[f64], values: &[f64], theta: f64) -> f64 {
    let n = nodes.len();
    let x = theta.rem_euclid(TAU);
    // index of the last node <= x, wrapping below the first node
    let j = match nodes.partition_point(|&t| t <= x) {
        0 => n - 1,
        p => p - 1,
    };
    let node = |k: isize| -> (f64, f64) {
        let m = k.rem_euclid(n as isize) as usize;
        let wraps = k.div_euclid(n as isize) as f64;
        (nodes[m] + TAU * wraps, values[m])
    };
    let j = j as isize;
    let (x0, y0) = node(j - 1);
    let (x1, y1) = node(j);
    let (x2, y2) = node(j + 1);
    let (x3, y3) = node(j + 2);
    let mut xx = x;
    if x1 > xx {
        xx += TAU;
    }
    let slope = |xa: f64, ya: f64, xb: f64, yb: f64, xc: f64, yc: f64| {
        let h0 = xb - xa;
        let h1 = xc - xb;
        ((yb - ya) / h0 * h1 + (yc - yb) / h1 * h0) / (h0 + h1)
    };
    let m1 = slope(x0, y0, x1, y1, x2, y2);
    let m2 = slope(x1, y1, x2, y2, x3, y3);
    let h = x2 - x1;
    let t = (xx - x1) / h;
    hermite(y1, y2, m1 * h, m2 * h, t)
}
