//! The modular Eisenstein series
//!
//! ```text
//! E(z, s) = ½ Σ_{gcd(c, d) = 1} y^s / |cz + d|^{2s},   Re s > 1,
//! ```
//!
//! summed over the primitive vectors `w = (d, c)` through
//! `|cz + d|²/y = |g_z w|²` with `g_z = (1/√y)[[1, x], [0, y]]`.
//!
//! Truncated sums come with a bracket for the omitted terms built from the
//! quadratic bound `N(R) ≤ τ(R² + 1)` on the number of orbit points of norm
//! `< R`. `τ` is fitted on the enumerated range and inflated by half.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::GrowthReport;
use crate::orbits::{count, orbit_norms_sq, quadratic_bound_check, sum_over_orbit, Mat2, OrbitSpec};

/// Safety factor applied to the fitted quadratic-bound constant.
pub const TAU_INFLATION: f64 = 1.5;

/// Residue of `E(z, s)` at `s = 1`: the reciprocal of the area `π/3` of the
/// modular surface.
pub const RESIDUE: f64 = 3.0 / PI;

/// A point `x + iy` of the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperHalfPoint {
    pub x: f64,
    pub y: f64,
}

impl UpperHalfPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0 && y.is_finite() && x.is_finite()) {
            return Err(Error::domain(format!("need Im z > 0, got z = {x} + {y}i")));
        }
        Ok(Self { x, y })
    }

    /// `g_z` with `g_z⁻¹ i = z` up to the stabilizer of `i`.
    pub fn matrix(&self) -> Mat2 {
        Mat2::new(1.0, self.x, 0.0, self.y) / self.y.sqrt()
    }

    /// `z + dx`.
    pub fn translated(&self, dx: f64) -> Self {
        Self { x: self.x + dx, y: self.y }
    }

    /// `-1/z`.
    pub fn inverted(&self) -> Self {
        let r2 = self.x * self.x + self.y * self.y;
        Self {
            x: -self.x / r2,
            y: self.y / r2,
        }
    }
}

/// A truncated Eisenstein sum with a bound on the omitted terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EisensteinSum {
    pub s: Complex64,
    /// Terms with `|cz + d|² < radius² y` are summed.
    pub radius: f64,
    pub terms: u64,
    pub partial: Complex64,
    /// `|E(z, s) - partial| ≤ tail_bound`; for real `s` the tail is also
    /// nonnegative.
    pub tail_bound: f64,
    pub tau: f64,
}

impl EisensteinSum {
    /// Lower end of the bracket (real part, exact for real `s`).
    pub fn lower(&self) -> f64 {
        if self.s.im == 0.0 {
            self.partial.re
        } else {
            self.partial.re - self.tail_bound
        }
    }

    pub fn upper(&self) -> f64 {
        self.partial.re + self.tail_bound
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower() <= value && value <= self.upper()
    }
}

fn check_s(s: Complex64) -> Result<()> {
    if !(s.re > 1.0 && s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::domain(format!("the series needs Re s > 1, got s = {s}")));
    }
    Ok(())
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// Geometric grid of radii in `[1, radius]` for the quadratic-bound fit.
fn tau_grid(radius: f64) -> Vec<f64> {
    let k = 48;
    let top = radius.max(1.0);
    (0..=k).map(|i| top.powf(i as f64 / k as f64)).collect()
}

/// `U` with `½ Σ_{|gw| ≥ ρ} |gw|^{-2σ} ≤ U` given `N(R) ≤ τ(R² + 1)`.
fn tail_upper(sigma: f64, rho: f64, n_rho: f64, tau: f64) -> f64 {
    let bound = sigma
        * tau
        * (rho.powf(2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0) + rho.powf(-2.0 * sigma) / (2.0 * sigma));
    (bound - 0.5 * n_rho * rho.powf(-2.0 * sigma)).max(0.0)
}

fn fitted_tau(g: &Mat2, radius: f64) -> Result<f64> {
    Ok(TAU_INFLATION * quadratic_bound_check(OrbitSpec::Primitive, &[*g], &tau_grid(radius))?)
}

/// `E(z, s)` summed over `|cz + d|² < radius² y`, with the tail bracket.
///
/// With `tolerance = Some(t)` a tail bound above `t` is reported as a
/// convergence error carrying the partial sum and the bound.
pub fn eisenstein_primitive_sum(
    z: &UpperHalfPoint,
    s: Complex64,
    radius: f64,
    tolerance: Option<f64>,
) -> Result<EisensteinSum> {
    check_s(s)?;
    check_radius(radius)?;
    let g = z.matrix();
    let partial = 0.5
        * sum_over_orbit(OrbitSpec::Primitive, &g, radius, |u, v| {
            let l = (u * u + v * v).ln();
            Complex64::new(-s.re * l, -s.im * l).exp()
        })?;
    let terms = count(OrbitSpec::Primitive, &g, radius)?;
    let tau = fitted_tau(&g, radius)?;
    let tail_bound = tail_upper(s.re, radius, terms as f64, tau);
    if let Some(t) = tolerance {
        if tail_bound > t {
            return Err(Error::Convergence {
                message: format!("Eisenstein tail bound {tail_bound:.3e} exceeds {t:.3e} at radius {radius}"),
                estimate: partial.re,
                error: tail_bound,
            });
        }
    }
    Ok(EisensteinSum {
        s,
        radius,
        terms,
        partial,
        tail_bound,
        tau,
    })
}

/// `½ Σ |gw|^{-2s}` for several real `s` from one sorted list of squared
/// norms, summed in fixed-size chunks in list order.
fn half_power_sums(norms_sq: &[f64], s_values: &[f64]) -> Vec<f64> {
    const CHUNK: usize = 1 << 16;
    let partials: Vec<Vec<f64>> = norms_sq
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; s_values.len()];
            for &q in chunk {
                let l = q.ln();
                for (a, s) in acc.iter_mut().zip(s_values) {
                    *a += (-s * l).exp();
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; s_values.len()];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total.iter().map(|t| 0.5 * t).collect()
}

/// `N(R)` from a sorted list of squared norms (open ball).
fn count_below(norms_sq: &[f64], r: f64) -> usize {
    let r2 = r * r;
    norms_sq.partition_point(|&q| q < r2)
}

/// One grid point of the residue probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueRow {
    pub epsilon: f64,
    pub s: f64,
    /// `(s - 1) E(z, s)` with the tail taken from the fitted orbit density.
    pub value: f64,
    /// Band from the largest deviation of `N(R)/R²` in the fit window.
    pub lower: f64,
    pub upper: f64,
    /// Upper end of the rigorous quadratic-bound bracket; its lower end is
    /// `(s - 1)` times the partial sum.
    pub rigorous_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueProbe {
    pub z: UpperHalfPoint,
    pub radius: f64,
    pub rows: Vec<ResidueRow>,
    /// Polynomial extrapolation to `ε = 0` of the rows with the `c = 0`
    /// terms `(s - 1) y^s` taken out; their limit is exactly 0.
    pub extrapolant: f64,
    /// Polynomial extrapolation of the rows as they are.
    pub plain_extrapolant: f64,
    pub target: f64,
    /// Fit of `N(R)/R²` near the truncation radius.
    pub density: GrowthReport,
}

impl ResidueProbe {
    pub fn relative_error(&self) -> f64 {
        (self.extrapolant - self.target).abs() / self.target
    }
}

/// Value at 0 of the interpolating polynomial through `(x_i, y_i)` (Neville).
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::precondition("extrapolation needs at least one point"));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut p: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (x[i], x[i + k]);
            if xi == xk {
                return Err(Error::domain("extrapolation nodes must be distinct"));
            }
            p[i] = (xk * p[i] - xi * p[i + 1]) / (xk - xi);
        }
    }
    Ok(p[0])
}

/// Default truncation radius of the residue probe.
pub const RESIDUE_RADIUS: f64 = 1500.0;

/// `(s - 1)E(z, s)` at `s = 1 + ε` along a decreasing `ε` grid, extrapolated
/// to `ε = 0`.
///
/// Real `s > 1` lies in the sector `|s - 1| < σ(Re s - 1)` exactly when
/// `σ > 1`. Near `s = 1` the quadratic-bound tail is far too wide to be
/// useful, so the value uses the tail of a continuum with the density of
/// orbit points fitted on `[ρ/4, ρ]`.
///
/// The two terms with `c = 0` sum to `y^s` exactly. `(s - 1) y^s` tends to
/// 0, but its Taylor coefficients in `ε` grow with `log y` and spoil a
/// low-order extrapolation away from `y = 1`, so the main extrapolant
/// handles that part in closed form.
pub fn residue_probe(z: &UpperHalfPoint, sigma: f64, eps_grid: &[f64], radius: f64) -> Result<ResidueProbe> {
    if !(sigma > 1.0) {
        return Err(Error::domain(format!(
            "real points s > 1 lie in the sector only for σ > 1, got σ = {sigma}"
        )));
    }
    check_radius(radius)?;
    if eps_grid.is_empty() {
        return Err(Error::precondition("ε grid is empty"));
    }
    if eps_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) || eps_grid.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::domain("ε grid must be positive and strictly decreasing"));
    }
    let g = z.matrix();
    let norms = orbit_norms_sq(OrbitSpec::Primitive, &g, radius)?;
    let s_values: Vec<f64> = eps_grid.iter().map(|e| 1.0 + e).collect();
    let sums = half_power_sums(&norms, &s_values);

    let window: Vec<(f64, f64)> = (0..=24)
        .map(|i| {
            let r = radius * (0.25 + 0.75 * i as f64 / 24.0);
            (r, count_below(&norms, r) as f64 / (r * r))
        })
        .collect();
    let density = GrowthReport::from_samples(window)?;
    let c = density.fitted_constant;
    let delta = density.max_abs_residual_tail;
    let tau = fitted_tau(&g, radius)?;
    let n_rho = norms.len() as f64;

    let rows: Vec<ResidueRow> = eps_grid
        .iter()
        .zip(&sums)
        .map(|(&eps, &partial)| {
            let s = 1.0 + eps;
            let continuum = s * radius.powf(2.0 - 2.0 * s) / (2.0 * s - 2.0);
            let boundary = 0.5 * n_rho * radius.powf(-2.0 * s);
            let tail = c * continuum - boundary;
            ResidueRow {
                epsilon: eps,
                s,
                value: eps * (partial + tail),
                lower: eps * (partial + tail - delta * continuum),
                upper: eps * (partial + tail + delta * continuum),
                rigorous_upper: eps * (partial + tail_upper(s, radius, n_rho, tau)),
            }
        })
        .collect();
    let plain_extrapolant =
        extrapolate_to_zero(&rows.iter().map(|r| (r.epsilon, r.value)).collect::<Vec<_>>())?;
    let separated: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.epsilon, r.value - r.epsilon * z.y.powf(r.s)))
        .collect();
    let extrapolant = extrapolate_to_zero(&separated)?;
    Ok(ResidueProbe {
        z: *z,
        radius,
        rows,
        extrapolant,
        plain_extrapolant,
        target: RESIDUE,
        density,
    })
}

/// Both sides of `(s - 1)E(z, s) = s(s - 1) ∫_0^∞ N(R) R^{-1-2s} dR` as
/// intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StieltjesCheck {
    pub s: f64,
    pub r_max: f64,
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    /// Difference of the interval midpoints.
    pub gap: f64,
}

impl StieltjesCheck {
    pub fn brackets_overlap(&self) -> bool {
        self.lhs.0 <= self.rhs.1 && self.rhs.0 <= self.lhs.1
    }

    pub fn lhs_width(&self) -> f64 {
        self.lhs.1 - self.lhs.0
    }
}

/// The left side sums the series up to `r_max`; the right side integrates
/// the counting function exactly between consecutive orbit norms. The parts
/// beyond `r_max` are bracketed with the quadratic bound on one side and
/// monotonicity of `N` on the other.
pub fn stieltjes_representation_check(z: &UpperHalfPoint, s: f64, r_max: f64) -> Result<StieltjesCheck> {
    check_s(Complex64::new(s, 0.0))?;
    check_radius(r_max)?;
    let g = z.matrix();
    let norms = orbit_norms_sq(OrbitSpec::Primitive, &g, r_max)?;
    let partial = half_power_sums(&norms, &[s])[0];
    let tau = fitted_tau(&g, r_max)?;
    let n_max = norms.len() as f64;
    let u = tail_upper(s, r_max, n_max, tau);
    let lhs = ((s - 1.0) * partial, (s - 1.0) * (partial + u));

    // ∫ N(R) R^{-1-2s} dR over (r_i, r_{i+1}) with N constant there.
    let mut integral = 0.0;
    let mut i = 0;
    while i < norms.len() {
        let q = norms[i];
        let mut j = i;
        while j < norms.len() && norms[j] == q {
            j += 1;
        }
        let lo = q.powf(-s);
        let hi = norms.get(j).map_or(r_max.powf(-2.0 * s), |&next| next.powf(-s));
        integral += j as f64 * (lo - hi) / (2.0 * s);
        i = j;
    }
    let beyond_lo = n_max * r_max.powf(-2.0 * s) / (2.0 * s);
    let beyond_hi = tau * (r_max.powf(2.0 - 2.0 * s) / (2.0 * s - 2.0) + r_max.powf(-2.0 * s) / (2.0 * s));
    let k = s * (s - 1.0);
    let rhs = (k * (integral + beyond_lo), k * (integral + beyond_hi.max(beyond_lo)));
    Ok(StieltjesCheck {
        s,
        r_max,
        lhs,
        rhs,
        gap: 0.5 * (lhs.0 + lhs.1) - 0.5 * (rhs.0 + rhs.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZETA2: f64 = PI * PI / 6.0;
    const CATALAN: f64 = 0.915_965_594_177_219_015;

    fn zeta4() -> f64 {
        PI.powi(4) / 90.0
    }

    fn i() -> UpperHalfPoint {
        UpperHalfPoint::new(0.0, 1.0).unwrap()
    }

    fn real(s: f64) -> Complex64 {
        Complex64::new(s, 0.0)
    }

    #[test]
    fn value_at_i_and_two_matches_epstein_identity() {
        let exact = 2.0 * ZETA2 * CATALAN / zeta4();
        assert!((exact - 2.7842).abs() < 1e-4);
        let e = eisenstein_primitive_sum(&i(), real(2.0), 400.0, Some(1e-4)).unwrap();
        assert!(e.contains(exact), "{e:?} vs {exact}");
        assert!(e.tail_bound < 1e-4);
    }

    #[test]
    fn tight_tolerance_is_a_convergence_error() {
        let err = eisenstein_primitive_sum(&i(), real(1.5), 50.0, Some(1e-6)).unwrap_err();
        match err {
            Error::Convergence { estimate, error, .. } => {
                assert!(estimate > 0.0 && error > 1e-6);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn domain_checks() {
        assert!(UpperHalfPoint::new(0.0, 0.0).is_err());
        assert!(eisenstein_primitive_sum(&i(), real(1.0), 10.0, None).is_err());
        assert!(residue_probe(&i(), 0.5, &[0.5], 100.0).is_err());
        assert!(residue_probe(&i(), 2.0, &[0.25, 0.5], 100.0).is_err());
    }

    #[test]
    fn large_s_is_dominated_by_the_four_unit_terms() {
        let e = eisenstein_primitive_sum(&i(), real(40.0), 20.0, None).unwrap();
        assert!((e.partial.re - 2.0).abs() < 1e-10);
        assert!(e.contains(2.0) || e.lower() >= 2.0);
    }

    #[test]
    fn invariance_under_translation_and_inversion() {
        let z = UpperHalfPoint::new(0.5, 1.0).unwrap();
        let a = eisenstein_primitive_sum(&z, real(2.0), 300.0, None).unwrap();
        let b = eisenstein_primitive_sum(&z.translated(1.0), real(2.0), 300.0, None).unwrap();
        let c = eisenstein_primitive_sum(&z.inverted(), real(2.0), 300.0, None).unwrap();
        assert!((a.partial.re - b.partial.re).abs() < 1e-9);
        for other in [&b, &c] {
            assert!(a.lower() <= other.upper() && other.lower() <= a.upper());
        }
    }

    #[test]
    fn positivity_and_complex_argument() {
        let z = UpperHalfPoint::new(0.2, 1.3).unwrap();
        let e = eisenstein_primitive_sum(&z, real(1.7), 200.0, None).unwrap();
        assert!(e.partial.re > 0.0 && e.partial.im == 0.0);
        let w = eisenstein_primitive_sum(&z, Complex64::new(2.0, 3.0), 200.0, None).unwrap();
        assert!(w.partial.im != 0.0);
        // Conjugate symmetry E(z, s̄) = conj E(z, s).
        let wc = eisenstein_primitive_sum(&z, Complex64::new(2.0, -3.0), 200.0, None).unwrap();
        assert!((w.partial - wc.partial.conj()).norm() < 1e-12);
    }

    #[test]
    fn brackets_are_nested_in_the_radius() {
        let z = UpperHalfPoint::new(0.1, 1.7).unwrap();
        let mut prev: Option<EisensteinSum> = None;
        for r in [20.0, 40.0, 80.0, 160.0] {
            let e = eisenstein_primitive_sum(&z, real(2.5), r, None).unwrap();
            if let Some(p) = prev {
                assert!(e.lower() >= p.lower() - 1e-12 && e.upper() <= p.upper() + 1e-12);
            }
            prev = Some(e);
        }
    }

    #[test]
    fn residue_at_i_is_three_over_pi() {
        let p = residue_probe(&i(), 2.0, &[0.5, 0.25, 0.125], 600.0).unwrap();
        assert!(p.relative_error() < 0.01, "{p:?}");
        // At y = 1 the separated part is linear in ε and both routes agree.
        assert!((p.extrapolant - p.plain_extrapolant).abs() < 1e-12);
        for r in &p.rows {
            assert!(r.lower <= r.value && r.value <= r.upper && r.value <= r.rigorous_upper);
        }
    }

    #[test]
    fn neville_recovers_polynomials() {
        let pts: Vec<(f64, f64)> = [0.5, 0.25, 0.125]
            .iter()
            .map(|&e| (e, 3.0 - 2.0 * e + 5.0 * e * e))
            .collect();
        assert!((extrapolate_to_zero(&pts).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn stieltjes_brackets_overlap() {
        let c2 = stieltjes_representation_check(&i(), 2.0, 300.0).unwrap();
        assert!(c2.brackets_overlap(), "{c2:?}");
        let z = UpperHalfPoint::new(0.3, 1.1).unwrap();
        let c3 = stieltjes_representation_check(&z, 3.0, 300.0).unwrap();
        assert!(c3.brackets_overlap(), "{c3:?}");
        assert!(c3.lhs_width() < c2.lhs_width());
    }

    #[test]
    fn empty_counting_range() {
        let c = stieltjes_representation_check(&i(), 6.0, 0.9).unwrap();
        assert_eq!(c.lhs.0, 0.0);
        assert!(c.brackets_overlap());
    }
}
