use std::fmt::Write as _;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::gw_tree::OffspringDistribution;

/// A distribution function on `[0, 1]` sampled at `t_i = i / G`, linear in between.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedCDF {
    values: Vec<f64>,
}

impl DiscretizedCDF {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("a CDF grid needs at least two points".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("CDF values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("CDF values must be nondecreasing".into()));
        }
        if *values.last().expect("len >= 2") != 1.0 {
            return Err(Error::InvalidArgument("CDF must reach 1 at t = 1".into()));
        }
        Ok(Self { values })
    }

    /// The uniform law on `[0, 1]`.
    pub fn uniform(grid: usize) -> Self {
        Self { values: (0..=grid).map(|i| i as f64 / grid as f64).collect() }
    }

    /// Point mass at `x`, rounded up to the next grid point.
    pub fn point_mass(x: f64, grid: usize) -> Self {
        let at = (x * grid as f64 - 1e-9).ceil().clamp(0.0, grid as f64) as usize;
        Self { values: (0..=grid).map(|i| if i >= at { 1.0 } else { 0.0 }).collect() }
    }

    /// Number of cells `G`.
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.grid_size() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `F(t)`, 0 below the grid and 1 above it.
    pub fn eval(&self, t: f64) -> f64 {
        let g = self.grid_size() as f64;
        if t < 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let u = t * g;
        let i = u.floor() as usize;
        let frac = u - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// `∫ t dF = ∫_0^1 (1 - F(t)) dt` for the piecewise-linear `F`.
    pub fn mean(&self) -> f64 {
        let h = self.cell_width();
        self.values.windows(2).map(|w| 1.0 - 0.5 * (w[0] + w[1])).sum::<f64>() * h
    }

    /// Smallest `t` with `F(t) >= p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let h = self.cell_width();
        match self.values.iter().position(|&v| v >= p) {
            None => 1.0,
            Some(0) => 0.0,
            Some(i) => {
                let (lo, hi) = (self.values[i - 1], self.values[i]);
                let frac = if hi > lo { (p - lo) / (hi - lo) } else { 1.0 };
                (i as f64 - 1.0 + frac) * h
            }
        }
    }

    /// Mass of `(x - r, x + r]` with `r` in grid cells.
    pub fn mass_near(&self, x: f64, cells: f64) -> f64 {
        let r = cells * self.cell_width();
        self.eval(x + r) - self.eval(x - r)
    }

    /// Kolmogorov distance, evaluated on the finer of the two grids.
    pub fn sup_distance(&self, other: &DiscretizedCDF) -> f64 {
        let fine = self.grid_size().max(other.grid_size());
        (0..=fine)
            .map(|i| {
                let t = i as f64 / fine as f64;
                (self.eval(t) - other.eval(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Two-column `t,F(t)` CSV with a header line.
    pub fn to_csv(&self) -> String {
        let g = self.grid_size() as f64;
        let mut out = String::from("t,F(t)\n");
        for (i, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.10},{:.12e}", i as f64 / g, v).expect("write to string");
        }
        out
    }
}

/// `K : F ↦ Σ_k p_k F^{*k}(t / (1 - t))` on a fixed grid.
///
/// Masses sit on grid points (`w_0 = F(0)`, `w_i = F(t_i) - F(t_{i-1})`), so
/// convolution powers stay on the grid; off-grid evaluation interpolates the
/// cumulative sums linearly.
pub struct CdfOperator {
    weights: Vec<(u32, f64)>,
    grid: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `u_i = i G / (G - i)`: the grid position of `t_i / (1 - t_i)`.
    positions: Vec<f64>,
}

impl CdfOperator {
    pub fn new(xi: &OffspringDistribution, grid: usize) -> Result<Self> {
        if grid < 2 {
            return Err(Error::InvalidArgument("CDF grid needs at least 2 cells".into()));
        }
        let k_max = xi.k_max() as usize;
        let len = (k_max * grid + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let weights = (1..=xi.k_max()).map(|k| (k, xi.p(k))).filter(|(_, p)| *p > 0.0).collect();
        let g = grid as f64;
        let positions = (0..grid).map(|i| i as f64 * g / (g - i as f64)).collect();
        Ok(Self {
            weights,
            grid,
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            positions,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid
    }

    pub fn apply(&self, f: &DiscretizedCDF) -> Result<DiscretizedCDF> {
        if f.grid_size() != self.grid {
            return Err(Error::InvalidArgument(format!(
                "CDF has {} cells, operator expects {}",
                f.grid_size(),
                self.grid
            )));
        }
        let mut spectrum: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); self.len];
        let mut prev = 0.0;
        for (slot, &v) in spectrum.iter_mut().zip(&f.values) {
            *slot = Complex64::new(v - prev, 0.0);
            prev = v;
        }
        self.forward.process(&mut spectrum);

        let mut out = vec![0.0f64; self.grid + 1];
        let mut power = vec![Complex64::new(1.0, 0.0); self.len];
        let mut k_done = 0u32;
        let mut buffer = vec![Complex64::new(0.0, 0.0); self.len];
        let scale = 1.0 / self.len as f64;
        for &(k, p) in &self.weights {
            while k_done < k {
                for (acc, s) in power.iter_mut().zip(&spectrum) {
                    *acc *= s;
                }
                k_done += 1;
            }
            buffer.copy_from_slice(&power);
            self.inverse.process(&mut buffer);
            let support = k as usize * self.grid;
            let mut cumulative = Vec::with_capacity(support + 1);
            let mut acc = 0.0;
            for c in &buffer[..=support] {
                acc += c.re * scale;
                cumulative.push(acc.clamp(0.0, 1.0));
            }
            for (i, &u) in self.positions.iter().enumerate().skip(1) {
                out[i] += p * convolution_cdf(&cumulative, u);
            }
        }
        out[0] = 0.0;
        out[self.grid] = 1.0;
        let mut running = 0.0f64;
        for v in out.iter_mut() {
            running = running.max(v.clamp(0.0, 1.0));
            *v = running;
        }
        Ok(DiscretizedCDF { values: out })
    }
}

/// `F^{*k}` at grid position `u`, from cumulative masses on `0..=kG`.
fn convolution_cdf(cumulative: &[f64], u: f64) -> f64 {
    let last = cumulative.len() - 1;
    if u >= last as f64 {
        return 1.0;
    }
    let j = u.floor() as usize;
    let frac = u - j as f64;
    cumulative[j] + frac * (cumulative[j + 1] - cumulative[j])
}

/// One application of the operator; see [`CdfOperator`] to reuse FFT plans.
pub fn apply_cdf_operator(f: &DiscretizedCDF, xi: &OffspringDistribution) -> Result<DiscretizedCDF> {
    CdfOperator::new(xi, f.grid_size())?.apply(f)
}

#[derive(Clone, Debug)]
pub struct FixedPointOptions {
    pub grid: usize,
    /// Stop once the sup-norm change between iterates is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting iterate; the uniform law when `None`.
    pub initial: Option<DiscretizedCDF>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { grid: 4096, tol: 1e-6, max_iter: 200, initial: None }
    }
}

#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub cdf: DiscretizedCDF,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm change after each iteration.
    pub changes: Vec<f64>,
}

/// Iterates the operator from the initial CDF until it settles or `max_iter` runs out.
///
/// Running out is reported through `converged = false`, not as an error.
pub fn cdf_fixed_point(xi: &OffspringDistribution, opts: &FixedPointOptions) -> Result<FixedPoint> {
    let op = CdfOperator::new(xi, opts.grid)?;
    let mut current = match &opts.initial {
        Some(f) => f.clone(),
        None => DiscretizedCDF::uniform(opts.grid),
    };
    let mut changes = Vec::new();
    for it in 1..=opts.max_iter {
        let next = op.apply(&current)?;
        let change = next.values.iter().zip(&current.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        changes.push(change);
        current = next;
        if change <= opts.tol {
            return Ok(FixedPoint { cdf: current, iterations: it, converged: true, changes });
        }
    }
    Ok(FixedPoint { cdf: current, iterations: opts.max_iter, converged: false, changes })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(text: &str) -> OffspringDistribution {
        OffspringDistribution::parse(text).unwrap()
    }

    #[test]
    fn cdf_validation() {
        assert!(DiscretizedCDF::new(vec![0.0]).is_err());
        assert!(DiscretizedCDF::new(vec![0.0, 0.5, 0.4, 1.0]).is_err());
        assert!(DiscretizedCDF::new(vec![0.0, 0.5, 0.9]).is_err());
        assert!(DiscretizedCDF::new(vec![0.0, 1.5, 1.0]).is_err());
        assert!(DiscretizedCDF::new(vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn uniform_summaries() {
        let f = DiscretizedCDF::uniform(1000);
        assert!((f.mean() - 0.5).abs() < 1e-12);
        assert!((f.quantile(0.25) - 0.25).abs() < 1e-12);
        assert!((f.eval(0.3337) - 0.3337).abs() < 1e-12);
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.eval(2.0), 1.0);
    }

    #[test]
    fn point_mass_is_a_fixed_point_for_deterministic_offspring() {
        for d in 2..=4u32 {
            let g = 1024;
            let gamma = f64::from(d - 1) / f64::from(d);
            let f = DiscretizedCDF::point_mass(gamma, g);
            let out = apply_cdf_operator(&f, &OffspringDistribution::deterministic(d).unwrap()).unwrap();
            assert!(out.mass_near(gamma, 1.0) > 1.0 - 1e-9, "d={d}");
        }
    }

    #[test]
    fn unit_atom_under_one_child_moves_to_half() {
        let g = 512;
        let f = DiscretizedCDF::point_mass(1.0, g);
        let out = apply_cdf_operator(&f, &xi("p1=1")).unwrap();
        assert!(out.eval(0.5 - 2.0 / g as f64) < 1e-12);
        assert!(out.mass_near(0.5, 1.0) > 1.0 - 1e-9);
    }

    #[test]
    fn output_is_a_valid_cdf() {
        let out = apply_cdf_operator(&DiscretizedCDF::uniform(256), &xi("p1=1/3,p2=1/3,p5=1/3")).unwrap();
        assert!(DiscretizedCDF::new(out.values().to_vec()).is_ok());
        assert_eq!(out.values()[0], 0.0);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let op = CdfOperator::new(&xi("p2=1"), 64).unwrap();
        assert!(op.apply(&DiscretizedCDF::uniform(32)).is_err());
    }

    #[test]
    fn stalled_iteration_is_flagged() {
        let opts = FixedPointOptions { grid: 256, tol: 0.0, max_iter: 3, initial: None };
        let fp = cdf_fixed_point(&xi("p1=1"), &opts).unwrap();
        assert!(!fp.converged);
        assert_eq!((fp.iterations, fp.changes.len()), (3, 3));
    }
}
