//! Reaction-coordinate distributions `f_i(x)` and inverse-CDF sampling.

use crate::error::{invalid, Error, Result};
use crate::io::csv_table;

/// Normalization tolerance for a [`PositionDistribution`].
pub const MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    /// Piecewise-constant density; `grid` holds bin centers.
    Histogram,
    /// Density sampled at grid points and integrated by the trapezoidal rule.
    Sampled,
}

/// Density of a reaction coordinate on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDistribution {
    grid: Vec<f64>,
    density: Vec<f64>,
    width: f64,
    kind: DistributionKind,
}

impl PositionDistribution {
    /// A histogram with `counts.len()` bins of `width`, first bin starting at
    /// `lower`. Counts are normalized to unit area.
    pub fn from_counts(lower: f64, width: f64, counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(invalid("counts", "no bins"));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(invalid("width", "must be positive"));
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::UnnormalizedDistribution { mass: 0.0 });
        }
        let norm = 1.0 / (total as f64 * width);
        let grid = (0..counts.len())
            .map(|i| lower + (i as f64 + 0.5) * width)
            .collect();
        let density = counts.iter().map(|c| *c as f64 * norm).collect();
        Ok(Self {
            grid,
            density,
            width,
            kind: DistributionKind::Histogram,
        })
    }

    /// A density sampled on the uniform grid `x_j = start + j·spacing`.
    pub fn from_samples(start: f64, spacing: f64, density: Vec<f64>) -> Result<Self> {
        if density.len() < 2 {
            return Err(invalid("density", "need at least two grid points"));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(invalid("spacing", "must be positive"));
        }
        if let Some(v) = density.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(invalid(
                "density",
                format!("value {v} is negative or non-finite"),
            ));
        }
        let grid = (0..density.len())
            .map(|j| start + j as f64 * spacing)
            .collect();
        Ok(Self {
            grid,
            density,
            width: spacing,
            kind: DistributionKind::Sampled,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Bin width (histogram) or grid spacing (sampled density).
    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Integral of the density.
    pub fn mass(&self) -> f64 {
        match self.kind {
            DistributionKind::Histogram => self.density.iter().sum::<f64>() * self.width,
            DistributionKind::Sampled => trapezoid(&self.density, self.width),
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::UnnormalizedDistribution { mass });
        }
        Ok(())
    }

    /// `∫ g(x) f(x) dx` with the quadrature matching the kind.
    pub fn expectation(&self, g: impl Fn(f64) -> f64) -> f64 {
        let vals: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(x, f)| g(*x) * f)
            .collect();
        match self.kind {
            DistributionKind::Histogram => vals.iter().sum::<f64>() * self.width,
            DistributionKind::Sampled => trapezoid(&vals, self.width),
        }
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|x| x) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expectation(|x| (x - m) * (x - m)) / self.mass()
    }

    /// The same density translated by `dx`.
    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            grid: self.grid.iter().map(|x| x + dx).collect(),
            ..self.clone()
        }
    }

    /// Number of strict local maxima, treating runs of equal values as one
    /// point.
    pub fn local_maxima(&self) -> usize {
        peaks(&self.density).len()
    }

    /// Number of local maxima whose topographic prominence is at least
    /// `rel_prominence` times the global maximum. Filters sampling noise in
    /// histograms.
    pub fn count_modes(&self, rel_prominence: f64) -> usize {
        let max = self.density.iter().cloned().fold(0.0, f64::max);
        let threshold = rel_prominence * max;
        let (vals, _) = dedup_runs(&self.density);
        peaks(&self.density)
            .into_iter()
            .filter(|&(i, _)| prominence(&vals, i) >= threshold)
            .count()
    }

    /// Inverse-CDF sampler over this distribution.
    pub fn sampler(&self) -> Result<InverseCdf> {
        self.check_normalized()?;
        InverseCdf::new(self)
    }

    /// `(x, f(x))` rows.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let rows: Vec<Vec<f64>> = self
            .grid
            .iter()
            .zip(&self.density)
            .map(|(x, f)| vec![*x, *f])
            .collect();
        csv_table(comments, &["x", "f"], &rows)
    }
}

pub(crate) fn trapezoid(vals: &[f64], h: f64) -> f64 {
    if vals.len() < 2 {
        return 0.0;
    }
    let inner: f64 = vals[1..vals.len() - 1].iter().sum();
    h * (inner + 0.5 * (vals[0] + vals[vals.len() - 1]))
}

fn dedup_runs(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut vals = Vec::with_capacity(v.len());
    let mut starts = Vec::with_capacity(v.len());
    for (i, x) in v.iter().enumerate() {
        if vals.last() != Some(x) {
            vals.push(*x);
            starts.push(i);
        }
    }
    (vals, starts)
}

/// `(index into the deduplicated sequence, original index)` of every peak.
fn peaks(v: &[f64]) -> Vec<(usize, usize)> {
    let (vals, starts) = dedup_runs(v);
    let n = vals.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || vals[i] > vals[i - 1];
            let right = i + 1 == n || vals[i] > vals[i + 1];
            left && right && vals[i] > 0.0 && n > 1
        })
        .map(|i| (i, starts[i]))
        .collect()
}

fn prominence(vals: &[f64], i: usize) -> f64 {
    let h = vals[i];
    let mut left_min = h;
    for &v in vals[..i].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &vals[i + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Inverse cumulative distribution over a [`PositionDistribution`].
///
/// Histograms are sampled uniformly within the selected bin. Sampled
/// densities use the trapezoidal CDF at the grid points with linear
/// interpolation in between.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    knots: Vec<f64>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(d: &PositionDistribution) -> Result<Self> {
        let (knots, mut cdf) = match d.kind {
            DistributionKind::Histogram => {
                let lower = d.grid[0] - 0.5 * d.width;
                let knots: Vec<f64> = (0..=d.grid.len())
                    .map(|i| lower + i as f64 * d.width)
                    .collect();
                let mut cdf = Vec::with_capacity(knots.len());
                let mut acc = 0.0;
                cdf.push(0.0);
                for f in &d.density {
                    acc += f * d.width;
                    cdf.push(acc);
                }
                (knots, cdf)
            }
            DistributionKind::Sampled => {
                let mut cdf = Vec::with_capacity(d.grid.len());
                let mut acc = 0.0;
                cdf.push(0.0);
                for w in d.density.windows(2) {
                    acc += 0.5 * (w[0] + w[1]) * d.width;
                    cdf.push(acc);
                }
                (d.grid.clone(), cdf)
            }
        };
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::UnnormalizedDistribution { mass: total });
        }
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(Self { knots, cdf })
    }

    /// Maps `u ∈ [0, 1)` to a coordinate.
    pub fn sample(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        // first knot whose cdf exceeds u, so zero-mass intervals are skipped
        let j = self
            .cdf
            .partition_point(|c| *c <= u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[j - 1], self.cdf[j]);
        let (x0, x1) = (self.knots[j - 1], self.knots[j]);
        if c1 > c0 {
            x0 + (u - c0) / (c1 - c0) * (x1 - x0)
        } else {
            x0
        }
    }
}
