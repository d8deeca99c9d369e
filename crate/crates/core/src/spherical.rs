//! Spherical integrals over rotated ellipsoids.
//!
//! For a diagonal scaling `λ = diag(λ_1, …, λ_N)` with `λ_1 > … > λ_N > 0`,
//! `F_N(λ)` is the normalized Haar measure of the rotations `k ∈ SO(N)` with
//! `λ k e_N` inside the open unit ball, i.e. the fraction of the unit sphere
//! `S_{N-1}` on which `Σ λ_j² u_j² < 1`.
//!
//! Slicing the sphere along the first coordinate gives the recursion
//!
//! ```text
//! F_N(λ) = (σ_{N-1}/σ_N) ∫_{-a}^{a} (1 - u²)^{(N-3)/2} F_{N-1}(μ(λ, u)) du,
//! μ_j(λ, u) = λ_j ((1 - u²)/(1 - λ_1² u²))^{1/2},   j = 2, …, N,
//! ```
//!
//! with `a = a(λ)` the eccentricity, down to the closed form
//! `F_2(λ) = (2/π) asin a(λ)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_cosine_mapped, AdaptiveOptions, RulePair};
use crate::sampling::par_blocks;

/// A strictly decreasing vector of positive scale factors, `N ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalScaling {
    entries: Vec<f64>,
}

impl DiagonalScaling {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::domain(format!(
                "diagonal scaling needs N >= 2 entries, got {}",
                entries.len()
            )));
        }
        if entries.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::domain("diagonal scaling entries must be positive and finite"));
        }
        if entries.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::domain(format!(
                "diagonal scaling must be strictly decreasing: {entries:?}"
            )));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn largest(&self) -> f64 {
        self.entries[0]
    }

    pub fn smallest(&self) -> f64 {
        self.entries[self.entries.len() - 1]
    }

    /// `r·λ`, still strictly decreasing for `r > 0`.
    pub fn scaled(&self, r: f64) -> Result<Self> {
        Self::new(self.entries.iter().map(|x| x * r).collect())
    }
}

/// Panel budget and tolerances for each level of the recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub panel_count: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl QuadratureConfig {
    pub fn new(panel_count: usize, abs_tol: f64, rel_tol: f64) -> Result<Self> {
        if panel_count < 8 {
            return Err(Error::domain(format!("panel_count must be >= 8, got {panel_count}")));
        }
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        Ok(Self {
            panel_count,
            abs_tol,
            rel_tol,
        })
    }

    fn adaptive(&self) -> AdaptiveOptions {
        AdaptiveOptions {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_panels: self.panel_count,
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panel_count: 64,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
        }
    }
}

/// Surface area `σ_N` of the unit sphere `S_{N-1} ⊂ R^N`.
pub fn sphere_area(n: usize) -> Result<f64> {
    match n {
        0 => Err(Error::domain("sphere_area needs N >= 1")),
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        _ => Ok(2.0 * PI * sphere_area(n - 2)? / (n as f64 - 2.0)),
    }
}

/// Volume `σ_N / N` of the unit ball in `R^N`.
pub fn ball_volume(n: usize) -> Result<f64> {
    Ok(sphere_area(n)? / n as f64)
}

/// `a(λ) = ((1 - λ_N²)/(λ_1² - λ_N²))^{1/2}`, defined for `λ_1 > 1 > λ_N`.
pub fn eccentricity(lambda: &DiagonalScaling) -> Result<f64> {
    let (l1, ln) = (lambda.largest(), lambda.smallest());
    if !(l1 > 1.0 && ln < 1.0) {
        return Err(Error::precondition(format!(
            "eccentricity needs λ_1 > 1 > λ_N, got λ_1 = {l1}, λ_N = {ln}"
        )));
    }
    Ok(eccentricity_raw(l1, ln))
}

fn eccentricity_raw(l1: f64, ln: f64) -> f64 {
    ((1.0 - ln * ln) / (l1 * l1 - ln * ln)).sqrt()
}

/// Closed form of `F_2`.
pub fn f2(lambda: &DiagonalScaling) -> Result<f64> {
    if lambda.dim() != 2 {
        return Err(Error::domain(format!("f2 needs N = 2, got N = {}", lambda.dim())));
    }
    Ok(f2_raw(lambda.entries[0], lambda.entries[1]))
}

fn f2_raw(l1: f64, l2: f64) -> f64 {
    if l1 <= 1.0 {
        1.0
    } else if l2 >= 1.0 {
        0.0
    } else {
        2.0 / PI * eccentricity_raw(l1, l2).asin()
    }
}

/// `F_N(λ)` by the dimensional recursion; exact closed form at `N = 2`.
pub fn f_n(lambda: &DiagonalScaling, cfg: &QuadratureConfig) -> Result<f64> {
    let rules = RulePair::default();
    f_slice(&lambda.entries, cfg, &rules)
}

fn f_slice(lambda: &[f64], cfg: &QuadratureConfig, rules: &RulePair) -> Result<f64> {
    let n = lambda.len();
    let l1 = lambda[0];
    let ln = lambda[n - 1];
    if l1 <= 1.0 {
        return Ok(1.0);
    }
    if ln >= 1.0 {
        return Ok(0.0);
    }
    if n == 2 {
        return Ok(f2_raw(l1, ln));
    }

    // Kinks of the integrand sit where some μ_j(u) crosses 1.
    let a = eccentricity_raw(l1, ln);
    let mut cuts: Vec<f64> = lambda[1..n - 1]
        .iter()
        .filter(|&&lj| lj < 1.0)
        .map(|&lj| eccentricity_raw(l1, lj))
        .filter(|&b| b > 0.0 && b < a)
        .collect();
    cuts.push(0.0);
    cuts.push(a);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let exponent = (n as f64 - 3.0) / 2.0;
    let mut mu = vec![0.0; n - 1];
    let mut integrand = |u: f64| -> Result<f64> {
        let u2 = u * u;
        let factor = ((1.0 - u2) / (1.0 - l1 * l1 * u2)).sqrt();
        for (m, l) in mu.iter_mut().zip(&lambda[1..]) {
            *m = l * factor;
        }
        let weight = if n == 3 { 1.0 } else { (1.0 - u2).powf(exponent) };
        Ok(weight * f_slice(&mu, cfg, rules)?)
    };

    let opts = cfg.adaptive();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_cosine_mapped(&mut integrand, w[0], w[1], rules, &opts)?.value;
    }
    let value = 2.0 * sphere_area(n - 1)? / sphere_area(n)? * total;
    Ok(value.clamp(0.0, 1.0))
}

/// Monte Carlo estimate of `F_N(λ)` from uniform points on the sphere.
///
/// Returns `(estimate, standard error)`.
pub fn f_n_oracle(lambda: &DiagonalScaling, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::precondition(format!(
            "the spherical Monte Carlo oracle needs at least 1000 samples, got {samples}"
        )));
    }
    if lambda.largest() <= 1.0 {
        return Ok((1.0, 0.0));
    }
    if lambda.smallest() >= 1.0 {
        return Ok((0.0, 0.0));
    }
    let sq: Vec<f64> = lambda.entries.iter().map(|l| l * l).collect();
    let hits: u64 = par_blocks(samples, seed, |rng, count| {
        let mut hits = 0u64;
        for _ in 0..count {
            let mut norm = 0.0;
            let mut quad = 0.0;
            for s in &sq {
                let g: f64 = rng.sample(StandardNormal);
                norm += g * g;
                quad += s * g * g;
            }
            if quad < norm {
                hits += 1;
            }
        }
        hits
    })
    .into_iter()
    .sum();
    let p = hits as f64 / samples as f64;
    Ok((p, (p * (1.0 - p) / samples as f64).sqrt()))
}

/// The constant `η(c) = 2c²(c/(c² - 1)^{1/2} - 1)` bounding the `N = 2`
/// gradient residual.
pub fn eta_planar(c: f64) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::domain(format!("η(c) needs c > 1, got {c}")));
    }
    Ok(2.0 * c * c * (c / (c * c - 1.0).sqrt() - 1.0))
}

/// Principal term `(2σ_{N-1}/σ_N)(1 - λ_N²)^{(N-3)/2}`.
pub fn gradient_principal_term(lambda: &DiagonalScaling) -> Result<f64> {
    let n = lambda.dim();
    let ln = lambda.smallest();
    Ok(2.0 * sphere_area(n - 1)? / sphere_area(n)? * (1.0 - ln * ln).powf((n as f64 - 3.0) / 2.0))
}

/// Signed residual of the radial-derivative identity, in units of
/// `principal / λ_{N-1}²`.
///
/// The directional derivative `∇F_N(λ)·λ` is taken by central differences
/// with one Richardson step. The step for coordinate `j` is `10⁻⁴ λ_j`,
/// capped at a tenth of the distance from `λ_j` to the saturation value 1 and
/// to its neighbours so that every shifted point stays in the same regime.
pub fn gradient_identity_residual(
    lambda: &DiagonalScaling,
    c: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let n = lambda.dim();
    let e = &lambda.entries;
    if !(c > 1.0 && e[n - 2] > c && e[n - 1] < 1.0) {
        return Err(Error::precondition(format!(
            "gradient identity needs λ_(N-1) > c > 1 > λ_N, got c = {c}, λ = {e:?}"
        )));
    }
    let rules = RulePair::default();
    let mut radial = 0.0;
    for j in 0..n {
        let lj = e[j];
        let mut h = 1e-4 * lj;
        h = h.min(0.1 * (1.0 - lj).abs());
        if j > 0 {
            h = h.min(0.1 * (e[j - 1] - lj));
        }
        if j + 1 < n {
            h = h.min(0.1 * (lj - e[j + 1]));
        }
        if !(h > 1e-300) || lj + h == lj {
            return Err(Error::Numeric(format!(
                "finite-difference step underflow at coordinate {j} (λ_j = {lj})"
            )));
        }
        let mut shifted = e.clone();
        let mut diff = |step: f64| -> Result<f64> {
            shifted[j] = lj + step;
            let up = f_slice(&shifted, cfg, &rules)?;
            shifted[j] = lj - step;
            let down = f_slice(&shifted, cfg, &rules)?;
            Ok((up - down) / (2.0 * step))
        };
        let coarse = diff(h)?;
        let fine = diff(0.5 * h)?;
        let derivative = (4.0 * fine - coarse) / 3.0;
        radial += lj * derivative;
    }
    let prod: f64 = e[..n - 1].iter().product();
    let principal = gradient_principal_term(lambda)?;
    let residual = prod * radial + principal;
    let scale = principal / (e[n - 2] * e[n - 2]);
    let ratio = residual / scale;
    if !ratio.is_finite() {
        return Err(Error::Numeric("gradient residual is not finite".into()));
    }
    Ok(ratio)
}

/// Largest observed `F_N(λ)·λ_1⋯λ_{N-1}` over the given scalings, an empirical
/// value for the constant in the upper bound `F_N(λ) ≤ C_N/(λ_1⋯λ_{N-1})`.
pub fn fit_upper_bound_constant(
    lambdas: &[DiagonalScaling],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let mut best: f64 = 0.0;
    for l in lambdas {
        let f = f_n(l, cfg)?;
        let prod: f64 = l.entries[..l.dim() - 1].iter().product();
        best = best.max(f * prod);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ds(v: &[f64]) -> DiagonalScaling {
        DiagonalScaling::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1).unwrap(), 2.0);
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, epsilon = 1e-15);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, epsilon = 1e-15);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, epsilon = 1e-14);
        assert!(matches!(sphere_area(0), Err(Error::Domain(_))));
    }

    #[test]
    fn sphere_area_matches_beta_recursion() {
        // σ_N = σ_{N-1} B((N-1)/2, 1/2), with B evaluated by quadrature.
        for n in 2..8usize {
            let a = (n as f64 - 1.0) / 2.0;
            let rules = RulePair::default();
            let opts = AdaptiveOptions {
                abs_tol: 1e-13,
                rel_tol: 1e-13,
                max_panels: 500,
            };
            // B(a, 1/2) = ∫_{-1}^{1} (1 - u²)^{a - 1} du
            let beta = integrate_cosine_mapped(
                |u| Ok((1.0 - u * u).powf(a - 1.0)),
                -1.0,
                1.0,
                &rules,
                &opts,
            )
            .unwrap()
            .value;
            assert_relative_eq!(
                sphere_area(n).unwrap(),
                sphere_area(n - 1).unwrap() * beta,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn eccentricity_examples() {
        assert_relative_eq!(
            eccentricity(&ds(&[2.0, 0.5])).unwrap(),
            1.0 / 5f64.sqrt(),
            epsilon = 1e-15
        );
        assert_relative_eq!(
            eccentricity(&ds(&[10.0, 0.1])).unwrap(),
            (0.99f64 / 99.99).sqrt(),
            epsilon = 1e-15
        );
        assert!(eccentricity(&ds(&[3.0, 1.0 - 1e-12])).unwrap() < 1e-6);
        assert!(matches!(eccentricity(&ds(&[0.9, 0.5])), Err(Error::Precondition(_))));
        assert!(matches!(eccentricity(&ds(&[3.0, 1.5])), Err(Error::Precondition(_))));
        let l = ds(&[7.0, 3.0, 0.2]);
        assert!(eccentricity(&l).unwrap() < 1.0 / 7.0);
    }

    #[test]
    fn f2_examples() {
        assert_eq!(f2(&ds(&[0.9, 0.5])).unwrap(), 1.0);
        assert_eq!(f2(&ds(&[3.0, 1.5])).unwrap(), 0.0);
        let v = f2(&ds(&[2.0, 0.5])).unwrap();
        assert_relative_eq!(v, 2.0 / PI * (1.0 / 5f64.sqrt()).asin(), epsilon = 1e-15);
        assert!((v - 0.2951672).abs() < 1e-7);
        assert!(f2(&ds(&[3.0, 2.0, 1.0])).is_err());
    }

    #[test]
    fn saturation_ties() {
        assert_eq!(f2(&ds(&[1.0, 0.5])).unwrap(), 1.0);
        assert_eq!(f2(&ds(&[2.0, 1.0])).unwrap(), 0.0);
        let cfg = QuadratureConfig::default();
        assert_eq!(f_n(&ds(&[1.0, 0.7, 0.2]), &cfg).unwrap(), 1.0);
        assert_eq!(f_n(&ds(&[3.0, 2.0, 1.0]), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn recursion_base_is_closed_form() {
        let cfg = QuadratureConfig::default();
        for l in [[2.0, 0.5], [1.3, 0.99], [50.0, 0.01]] {
            let l = ds(&l);
            assert_eq!(f_n(&l, &cfg).unwrap(), f2(&l).unwrap());
        }
    }

    #[test]
    fn near_unit_sphere_in_three_dimensions() {
        let cfg = QuadratureConfig::default();
        let v = f_n(&ds(&[0.99, 0.98, 0.97]), &cfg).unwrap();
        assert!(v > 0.99 && v <= 1.0);
        // Just past saturation the value is set by the shape, not the size.
        let l = ds(&[1.001, 0.9995, 0.999]);
        let v = f_n(&l, &cfg).unwrap();
        let (est, se) = f_n_oracle(&l, 200_000, 3).unwrap();
        assert!((v - est).abs() <= 4.0 * se + 1e-4, "{v} vs {est} ± {se}");
    }

    #[test]
    fn spheroid_has_closed_form_in_three_dimensions() {
        // For λ = (L, L, l) with l < 1 < L the admissible set on S² is the
        // band |u_3| > ((L² - 1)/(L² - l²))^{1/2}; its area fraction is
        // 1 - that threshold. Nudge the repeated entry to keep λ strictly
        // decreasing.
        let cfg = QuadratureConfig::default();
        let (big, small) = (3.0f64, 0.5f64);
        let exact = 1.0 - ((big * big - 1.0) / (big * big - small * small)).sqrt();
        let v = f_n(&ds(&[big + 1e-9, big, small]), &cfg).unwrap();
        assert!((v - exact).abs() < 1e-7, "{v} vs {exact}");
    }

    #[test]
    fn oracle_trivial_cases() {
        assert_eq!(f_n_oracle(&ds(&[0.9, 0.2]), 1000, 1).unwrap(), (1.0, 0.0));
        assert_eq!(f_n_oracle(&ds(&[2.0, 1.1]), 1000, 1).unwrap(), (0.0, 0.0));
        assert!(matches!(
            f_n_oracle(&ds(&[2.0, 0.5]), 999, 1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn oracle_matches_planar_closed_form() {
        let l = ds(&[2.0, 0.5]);
        let (est, se) = f_n_oracle(&l, 1_000_000, 42).unwrap();
        let exact = f2(&l).unwrap();
        assert!((est - exact).abs() <= 3.0 * se, "{est} ± {se} vs {exact}");
        assert!((est - 0.2952).abs() < 0.0015);
    }

    #[test]
    fn planar_gradient_residual_is_bounded_by_eta() {
        let cfg = QuadratureConfig::default();
        let eta = eta_planar(2.0).unwrap();
        assert_relative_eq!(eta, 8.0 * (2.0 / 3f64.sqrt() - 1.0), epsilon = 1e-14);
        let r = gradient_identity_residual(&ds(&[4.0, 0.3]), 2.0, &cfg).unwrap();
        // Exact value at N = 2: λ_1²(1 - λ_1/(λ_1² - 1)^{1/2}).
        let exact = 16.0 * (1.0 - 4.0 / 15f64.sqrt());
        assert!((r - exact).abs() < 1e-6, "{r} vs {exact}");
        assert!(r.abs() <= eta);
        for l1 in [10.0, 100.0, 1000.0] {
            let r = gradient_identity_residual(&ds(&[l1, 0.3]), 2.0, &cfg).unwrap();
            assert!(r.abs() <= eta, "λ_1 = {l1}: {r}");
        }
    }

    #[test]
    fn gradient_residual_preconditions() {
        let cfg = QuadratureConfig::default();
        assert!(matches!(
            gradient_identity_residual(&ds(&[1.5, 0.3]), 2.0, &cfg),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            gradient_identity_residual(&ds(&[4.0, 0.3]), 1.0, &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::new(7, 1e-8, 1e-8).is_err());
        assert!(QuadratureConfig::new(8, 0.0, 1e-8).is_err());
        assert!(QuadratureConfig::new(8, 1e-8, 1e-8).is_ok());
    }

    #[test]
    fn scaling_validation() {
        assert!(DiagonalScaling::new(vec![1.0]).is_err());
        assert!(DiagonalScaling::new(vec![1.0, 1.0]).is_err());
        assert!(DiagonalScaling::new(vec![1.0, -1.0]).is_err());
        assert!(DiagonalScaling::new(vec![1.0, 2.0]).is_err());
    }
}
