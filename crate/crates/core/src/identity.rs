//! Two-sided check of the radial counting identity
//!
//! ```text
//! Σ_x w F_N(|x| a)  ≈  (2σ_{N-1}/σ_N) ∫_0^1 N_ν(τ/a_N) (a_N/τ)^N (1 - τ²)^{(N-3)/2} dτ
//! ```
//!
//! for `a ∈ A_N^+` with `a_N/a_{N-1} < 1/4`. The error is expected to decay
//! like `M(ν) (a_N/a_{N-1})^{2/3}` or faster.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Atom, AtomicMeasure};
use crate::quadrature::{integrate_adaptive, integrate_cosine_mapped, AdaptiveOptions, RulePair};
use crate::spherical::{f_n, sphere_area, DiagonalScaling, QuadratureConfig};

/// `|Π a_j - 1|` tolerance.
pub const DET_TOL: f64 = 1e-12;

/// A diagonal `a ∈ A_N^+` of determinant one with `a_N/a_{N-1} < 1/4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityProbe {
    a: DiagonalScaling,
}

impl IdentityProbe {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let a = DiagonalScaling::new(entries)?;
        let det: f64 = a.entries().iter().product();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::domain(format!("probe must have determinant 1, got {det}")));
        }
        let probe = Self { a };
        let ratio = probe.ratio();
        if !(ratio < 0.25) {
            return Err(Error::domain(format!("probe needs a_N/a_(N-1) < 1/4, got {ratio}")));
        }
        Ok(probe)
    }

    /// `diag(e^t, e^{-t})`.
    pub fn planar(t: f64) -> Result<Self> {
        Self::new(vec![t.exp(), (-t).exp()])
    }

    pub fn scaling(&self) -> &DiagonalScaling {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn ratio(&self) -> f64 {
        let e = self.a.entries();
        e[e.len() - 1] / e[e.len() - 2]
    }

    pub fn smallest(&self) -> f64 {
        self.a.smallest()
    }
}

fn check_dims(nu: &AtomicMeasure, a: &IdentityProbe) -> Result<()> {
    if nu.dimension() != a.dim() {
        return Err(Error::domain(format!(
            "measure lives in R^{} but the probe is {}-dimensional",
            nu.dimension(),
            a.dim()
        )));
    }
    Ok(())
}

/// Atoms of norm `< 1/a_N` grouped by equal norm: `(|x|, total weight)`.
fn norm_groups(nu: &AtomicMeasure, a: &IdentityProbe) -> Result<Vec<(f64, f64)>> {
    let atoms = nu.atoms_within(1.0 / a.smallest())?;
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let mut last_sq = f64::NAN;
    for Atom { point, weight } in &atoms {
        let sq: f64 = point.iter().map(|v| v * v).sum();
        if sq == 0.0 {
            return Err(Error::domain("an atom at the origin makes both sides infinite"));
        }
        if sq == last_sq {
            groups.last_mut().expect("group exists").1 += weight;
        } else {
            groups.push((sq.sqrt(), *weight));
            last_sq = sq;
        }
    }
    Ok(groups)
}

/// `Σ w F_N(|x| a)` over the atoms with `|x| a_N < 1`.
pub fn identity_lhs(nu: &AtomicMeasure, a: &IdentityProbe, cfg: &QuadratureConfig) -> Result<f64> {
    check_dims(nu, a)?;
    let groups = norm_groups(nu, a)?;
    let terms = groups
        .par_iter()
        .map(|&(r, w)| Ok(w * f_n(&a.scaling().scaled(r)?, cfg)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(terms.iter().sum())
}

/// The principal term on the right, integrated exactly between the jumps of
/// `N_ν(τ/a_N)` at `τ_i = a_N |x_i|`.
///
/// At `N = 2` each piece has the antiderivative `-a_N² (1 - τ²)^{1/2}/τ`, and
/// the pieces telescope into one closed-form term per atom norm. For `N ≥ 3`
/// each piece is integrated by adaptive quadrature.
pub fn identity_rhs(nu: &AtomicMeasure, a: &IdentityProbe, cfg: &QuadratureConfig) -> Result<f64> {
    check_dims(nu, a)?;
    let n = a.dim();
    let an = a.smallest();
    let groups = norm_groups(nu, a)?;
    let c = 2.0 * sphere_area(n - 1)? / sphere_area(n)?;
    if n == 2 {
        let total: f64 = groups
            .iter()
            .map(|&(r, w)| {
                let tau = an * r;
                w * an * an * (1.0 - tau * tau).sqrt() / tau
            })
            .sum();
        return Ok(c * total);
    }

    let exponent = (n as f64 - 3.0) / 2.0;
    let nf = n as i32;
    let opts = AdaptiveOptions {
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        max_panels: cfg.panel_count,
    };
    let rules = RulePair::default();
    let pieces = (0..groups.len())
        .into_par_iter()
        .map(|i| {
            let lo = an * groups[i].0;
            let hi = groups.get(i + 1).map_or(1.0, |g| an * g.0);
            let f = |tau: f64| Ok((an / tau).powi(nf) * (1.0 - tau * tau).max(0.0).powf(exponent));
            let piece = if hi < 1.0 {
                integrate_adaptive(f, lo, hi, &rules, &opts)
            } else {
                integrate_cosine_mapped(f, lo, hi, &rules, &opts)
            };
            piece.map(|p| p.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut cumulative = 0.0;
    let mut total = 0.0;
    for (g, piece) in groups.iter().zip(&pieces) {
        cumulative += g.1;
        total += cumulative * piece;
    }
    Ok(c * total)
}

/// The same principal term for a prescribed growth function `N(R)`, e.g. a
/// continuum surrogate. Uses `τ = sin θ`.
pub fn identity_rhs_from_growth<G>(growth: G, a: &IdentityProbe, cfg: &QuadratureConfig) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let n = a.dim();
    let an = a.smallest();
    let c = 2.0 * sphere_area(n - 1)? / sphere_area(n)?;
    let opts = AdaptiveOptions {
        abs_tol: cfg.abs_tol,
        rel_tol: cfg.rel_tol,
        max_panels: cfg.panel_count,
    };
    let integral = integrate_adaptive(
        |theta: f64| {
            let (s, co) = theta.sin_cos();
            if s == 0.0 {
                return Ok(0.0);
            }
            let r = s / an;
            Ok(growth(r) / r.powi(n as i32) * co.powi(n as i32 - 2))
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        &RulePair::default(),
        &opts,
    )?;
    Ok(c * integral.value)
}

/// One row of the error table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub t: f64,
    pub ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_error: f64,
}

/// Log-log fit of `|lhs - rhs|` against `a_N/a_{N-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `+∞` when fewer than two rows have a nonzero error.
    pub slope: f64,
    pub intercept: f64,
    /// `log err - (intercept + slope log ratio)` per fitted row.
    pub residuals: Vec<f64>,
    pub rows: Vec<ErrorRow>,
    /// `M(ν)` truncated at the largest `1/a_N` of the grid.
    pub m_bound: f64,
    /// Smallest `C` with `err ≤ C M(ν) ratio^{2/3}` on every row.
    pub fitted_constant: f64,
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::precondition("t grid is empty"));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("t grid must be strictly increasing"));
    }
    if let Some(t) = t_grid.iter().find(|t| !((-2.0 * **t).exp() < 0.25)) {
        return Err(Error::domain(format!("t = {t} violates e^(-2t) < 1/4")));
    }
    Ok(())
}

/// Both sides along `a(t) = diag(e^t, e^{-t})`.
pub fn error_table(nu: &AtomicMeasure, t_grid: &[f64], cfg: &QuadratureConfig) -> Result<Vec<ErrorRow>> {
    check_t_grid(t_grid)?;
    t_grid
        .iter()
        .map(|&t| {
            let a = IdentityProbe::planar(t)?;
            let lhs = identity_lhs(nu, &a, cfg)?;
            let rhs = identity_rhs(nu, &a, cfg)?;
            Ok(ErrorRow {
                t,
                ratio: a.ratio(),
                lhs,
                rhs,
                abs_error: (lhs - rhs).abs(),
            })
        })
        .collect()
}

pub fn error_decay_fit(nu: &AtomicMeasure, t_grid: &[f64], cfg: &QuadratureConfig) -> Result<DecayFit> {
    let rows = error_table(nu, t_grid, cfg)?;
    let t_max = t_grid[t_grid.len() - 1];
    let m = nu.m_bound(t_max.exp())?;
    let fitted_constant = if m > 0.0 {
        rows.iter()
            .map(|r| r.abs_error / (m * r.ratio.powf(2.0 / 3.0)))
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| (r.ratio.ln(), r.abs_error.ln()))
        .collect();
    let (slope, intercept, residuals) = if points.len() < 2 {
        (f64::INFINITY, f64::NAN, Vec::new())
    } else {
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let residuals = points.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
        (slope, intercept, residuals)
    };
    Ok(DecayFit {
        slope,
        intercept,
        residuals,
        rows,
        m_bound: m,
        fitted_constant,
    })
}
