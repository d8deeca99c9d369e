//! Locally finite atomic measures on `R^N` and their growth analytics.
//!
//! A measure is backed by an [`AtomSource`] that can list its atoms inside
//! any ball around the origin. Balls are open everywhere: an atom at norm
//! exactly `R` is not in `B(0, R)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::spherical::ball_volume;

/// A weighted point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Vec<f64>, weight: f64) -> Self {
        Self { point, weight }
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.point)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Something that can enumerate the atoms of a measure ball by ball.
pub trait AtomSource: Send + Sync + fmt::Debug {
    fn dimension(&self) -> usize;

    /// Whether `ν(-U) = ν(U)`.
    fn is_even(&self) -> bool;

    /// Short description written into point-set headers.
    fn generator_id(&self) -> String;

    /// Calls `visit(point, weight)` for every atom of norm `< radius`, in an
    /// unspecified but deterministic order.
    fn visit_within(&self, radius: f64, visit: &mut dyn FnMut(&[f64], f64)) -> Result<()>;

    /// Mass of `{x : |h x| < r}` for invertible `h`.
    fn mass_in_ellipsoid(&self, h: &DMatrix<f64>, r: f64) -> Result<f64> {
        let h_inv = invert(h)?;
        let reach = r * operator_norm(&h_inv);
        let mut mass = 0.0;
        let r2 = r * r;
        let mut y = vec![0.0; self.dimension()];
        self.visit_within(reach * (1.0 + 1e-12), &mut |x, w| {
            apply_into(h, x, &mut y);
            if norm_sq(&y) < r2 {
                mass += w;
            }
        })?;
        Ok(mass)
    }
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

pub(crate) fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("matrix is not invertible"))
}

pub(crate) fn apply_into(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
    let n = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate().take(n) {
            s += m[(i, j)] * xj;
        }
        *o = s;
    }
}

/// An atomic measure with `M(ν) < ∞`, shared cheaply between threads.
#[derive(Debug, Clone)]
pub struct AtomicMeasure {
    source: Arc<dyn AtomSource>,
}

impl AtomicMeasure {
    pub fn new<S: AtomSource + 'static>(source: S) -> Self {
        Self {
            source: Arc::new(source),
        }
    }

    pub fn from_arc(source: Arc<dyn AtomSource>) -> Self {
        Self { source }
    }

    /// The zero measure on `R^dim`.
    pub fn zero(dim: usize) -> Self {
        Self::new(FiniteAtoms {
            dim,
            even: true,
            id: "zero".into(),
            atoms: Vec::new(),
        })
    }

    pub fn source(&self) -> &Arc<dyn AtomSource> {
        &self.source
    }

    pub fn dimension(&self) -> usize {
        self.source.dimension()
    }

    pub fn is_even(&self) -> bool {
        self.source.is_even()
    }

    pub fn generator_id(&self) -> String {
        self.source.generator_id()
    }

    pub fn visit_within(&self, radius: f64, visit: &mut dyn FnMut(&[f64], f64)) -> Result<()> {
        self.source.visit_within(radius, visit)
    }

    /// Atoms of norm `< radius`, sorted by norm (ties broken by coordinates).
    pub fn atoms_within(&self, radius: f64) -> Result<Vec<Atom>> {
        let mut atoms = Vec::new();
        self.source.visit_within(radius, &mut |x, w| {
            atoms.push(Atom::new(x.to_vec(), w));
        })?;
        sort_atoms(&mut atoms);
        Ok(atoms)
    }

    /// Finite snapshot of the atoms of norm `< radius`.
    pub fn snapshot(&self, radius: f64) -> Result<FiniteAtoms> {
        Ok(FiniteAtoms {
            dim: self.dimension(),
            even: self.is_even(),
            id: self.generator_id(),
            atoms: self.atoms_within(radius)?,
        })
    }

    /// `N_ν(R) = ν(B(0, R))`.
    pub fn growth_function(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let id = DMatrix::identity(self.dimension(), self.dimension());
        self.source.mass_in_ellipsoid(&id, r)
    }

    /// `sup_{0 < R ≤ R_max} N_ν(R)/R^N`, attained just above an atom norm
    /// or at the endpoint.
    pub fn m_bound(&self, r_max: f64) -> Result<f64> {
        check_radius(r_max)?;
        let n = self.dimension() as f64;
        let atoms = self.atoms_within(r_max)?;
        let mut best: f64 = 0.0;
        let mut cum = 0.0;
        let mut i = 0;
        while i < atoms.len() {
            let sq = atoms[i].norm_sq();
            if sq == 0.0 {
                return Err(Error::domain("an atom at the origin has unbounded growth ratio"));
            }
            while i < atoms.len() && atoms[i].norm_sq() == sq {
                cum += atoms[i].weight;
                i += 1;
            }
            best = best.max(cum / sq.powf(n / 2.0));
        }
        best = best.max(cum / r_max.powf(n));
        Ok(best)
    }

    /// The image measure `gν` (atoms `g x`), for `|det g - 1| ≤ 1e-12`.
    pub fn apply_linear(&self, g: &DMatrix<f64>) -> Result<AtomicMeasure> {
        let n = self.dimension();
        if g.nrows() != n || g.ncols() != n {
            return Err(Error::domain(format!(
                "matrix is {}x{}, measure lives in R^{n}",
                g.nrows(),
                g.ncols()
            )));
        }
        let det = g.determinant();
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("linear map must be unimodular, det = {det}")));
        }
        let g_inv = invert(g)?;
        Ok(AtomicMeasure::new(LinearImage {
            inner: self.clone(),
            inv_norm: operator_norm(&g_inv),
            g: g.clone(),
        }))
    }

    /// `T_R ν`: atoms `x/R` with weights `w/R^N`.
    pub fn rescale(&self, r: f64) -> Result<AtomicMeasure> {
        check_radius(r)?;
        Ok(AtomicMeasure::new(Rescaled {
            inner: self.clone(),
            factor: r,
        }))
    }

    /// `(1/T) ∫_0^T N_ν(R)/R^N dR`, evaluated exactly from the atom norms.
    ///
    /// Each atom at norm `ρ < T` contributes `w ∫_ρ^T R^{-N} dR`. The sum is
    /// accumulated in `grid` radial shells, innermost first.
    pub fn cesaro_growth(&self, t: f64, grid: usize) -> Result<f64> {
        check_radius(t)?;
        if grid < 100 {
            return Err(Error::precondition(format!("cesaro grid must be >= 100, got {grid}")));
        }
        let n = self.dimension() as f64;
        let mut shells = vec![0.0; grid];
        let mut origin = false;
        self.source.visit_within(t, &mut |x, w| {
            let rho = norm_sq(x).sqrt();
            if rho == 0.0 {
                origin = true;
                return;
            }
            let contribution = if n == 1.0 {
                (t / rho).ln()
            } else {
                (rho.powf(1.0 - n) - t.powf(1.0 - n)) / (n - 1.0)
            };
            let k = ((rho / t) * grid as f64) as usize;
            shells[k.min(grid - 1)] += w * contribution;
        })?;
        if origin {
            return Err(Error::domain("an atom at the origin has unbounded growth ratio"));
        }
        Ok(shells.iter().sum::<f64>() / t)
    }

    /// `R^{-N} Σ w ψ(x/R)`.
    pub fn test_function_sum(&self, psi: &TestFunction, r: f64) -> Result<f64> {
        check_radius(r)?;
        let n = self.dimension();
        let reach = r * psi.support_radius(n);
        if reach == 0.0 {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        let mut y = vec![0.0; n];
        self.source.visit_within(reach * (1.0 + 1e-12), &mut |x, w| {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi / r;
            }
            sum += w * psi.eval(&y);
        })?;
        Ok(sum / r.powi(n as i32))
    }

    /// Comparator `c ∫ψ dm` for [`Self::test_function_sum`].
    pub fn test_function_target(&self, psi: &TestFunction, c: f64) -> Result<f64> {
        Ok(c * psi.lebesgue_integral(self.dimension())?)
    }

    /// Masses `T_R ν(t g B(0,1))` along `r_grid` for each probe `(g, t)`,
    /// compared with `c t^N σ_N/N`.
    pub fn weyl_criterion(
        &self,
        r_grid: &[f64],
        probes: &[(DMatrix<f64>, f64)],
        c_expected: f64,
    ) -> Result<Vec<ProbeReport>> {
        if !self.is_even() {
            return Err(Error::precondition("the Weyl criterion needs an even measure"));
        }
        if probes.is_empty() {
            return Err(Error::precondition("the Weyl criterion needs at least one probe"));
        }
        let n = self.dimension();
        let mut out = Vec::with_capacity(probes.len());
        for (g, t) in probes {
            check_radius(*t)?;
            let det = g.determinant();
            if (det - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!("probe matrix must be unimodular, det = {det}")));
            }
            let g_inv = invert(g)?;
            let mut samples = Vec::with_capacity(r_grid.len());
            for &r in r_grid {
                check_radius(r)?;
                let mass = self.source.mass_in_ellipsoid(&g_inv, r * t)?;
                samples.push((r, mass / r.powi(n as i32)));
            }
            let target = c_expected * t.powi(n as i32) * ball_volume(n)?;
            out.push(ProbeReport {
                matrix: g.iter().copied().collect(),
                t: *t,
                target,
                report: GrowthReport::from_samples(samples)?,
            });
        }
        Ok(out)
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("radius must be positive and finite, got {r}")))
    }
}

pub(crate) fn sort_atoms(atoms: &mut [Atom]) {
    atoms.sort_by(|a, b| {
        a.norm_sq()
            .total_cmp(&b.norm_sq())
            .then_with(|| {
                for (x, y) in a.point.iter().zip(&b.point) {
                    let c = x.total_cmp(y);
                    if c.is_ne() {
                        return c;
                    }
                }
                std::cmp::Ordering::Equal
            })
            .then_with(|| a.weight.total_cmp(&b.weight))
    });
}

/// Result of one Weyl probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// Probe matrix in column-major order.
    pub matrix: Vec<f64>,
    pub t: f64,
    pub target: f64,
    pub report: GrowthReport,
}

impl ProbeReport {
    /// Relative deviation of the last sample from the target.
    pub fn final_relative_error(&self) -> f64 {
        let last = self.report.samples.last().map(|s| s.1).unwrap_or(0.0);
        if self.target == 0.0 {
            last.abs()
        } else {
            (last - self.target).abs() / self.target.abs()
        }
    }
}

/// Samples `(R, value)` of a growth ratio with a fitted limiting constant.
///
/// The fit is the mean over the tail (the upper half of the grid); the
/// residual is the largest deviation from it over the same tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub samples: Vec<(f64, f64)>,
    pub fitted_constant: f64,
    pub max_abs_residual_tail: f64,
}

impl GrowthReport {
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("growth report needs at least one sample"));
        }
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::domain("growth report radii must be strictly increasing"));
        }
        let start = samples.len() / 2;
        let tail = &samples[start..];
        let fitted = tail.iter().map(|s| s.1).sum::<f64>() / tail.len() as f64;
        let resid = tail
            .iter()
            .map(|s| (s.1 - fitted).abs())
            .fold(0.0, f64::max);
        Ok(Self {
            samples,
            fitted_constant: fitted,
            max_abs_residual_tail: resid,
        })
    }

    pub fn last_value(&self) -> f64 {
        self.samples.last().map(|s| s.1).unwrap_or(f64::NAN)
    }
}

/// A finite, norm-sorted list of atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteAtoms {
    dim: usize,
    even: bool,
    id: String,
    atoms: Vec<Atom>,
}

impl FiniteAtoms {
    /// Validates dimensions, weights and, when `even` is claimed, the `±`
    /// pairing of atoms.
    pub fn new(dim: usize, mut atoms: Vec<Atom>, even: bool, id: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        for a in &atoms {
            if a.point.len() != dim {
                return Err(Error::domain(format!(
                    "atom {:?} does not live in R^{dim}",
                    a.point
                )));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::domain(format!("atom weight must be positive, got {}", a.weight)));
            }
            if a.point.iter().any(|x| !x.is_finite()) {
                return Err(Error::domain("atom coordinates must be finite"));
            }
        }
        sort_atoms(&mut atoms);
        if even {
            let mut negated: Vec<Atom> = atoms
                .iter()
                .map(|a| Atom::new(a.point.iter().map(|x| -x + 0.0).collect(), a.weight))
                .collect();
            sort_atoms(&mut negated);
            let canon = |v: &[Atom]| -> Vec<Atom> {
                v.iter()
                    .map(|a| Atom::new(a.point.iter().map(|x| x + 0.0).collect(), a.weight))
                    .collect()
            };
            if canon(&negated) != canon(&atoms) {
                return Err(Error::domain("atoms claimed even are not symmetric under x -> -x"));
            }
        }
        Ok(Self {
            dim,
            even,
            id: id.into(),
            atoms,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn into_measure(self) -> AtomicMeasure {
        AtomicMeasure::new(self)
    }
}

impl AtomSource for FiniteAtoms {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn is_even(&self) -> bool {
        self.even
    }

    fn generator_id(&self) -> String {
        self.id.clone()
    }

    fn visit_within(&self, radius: f64, visit: &mut dyn FnMut(&[f64], f64)) -> Result<()> {
        let r2 = radius * radius;
        for a in &self.atoms {
            if a.norm_sq() >= r2 {
                break;
            }
            visit(&a.point, a.weight);
        }
        Ok(())
    }
}

#[derive(Debug)]
struct LinearImage {
    inner: AtomicMeasure,
    g: DMatrix<f64>,
    inv_norm: f64,
}

impl AtomSource for LinearImage {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn is_even(&self) -> bool {
        self.inner.is_even()
    }

    fn generator_id(&self) -> String {
        format!("linear({:?})∘{}", self.g.as_slice(), self.inner.generator_id())
    }

    fn visit_within(&self, radius: f64, visit: &mut dyn FnMut(&[f64], f64)) -> Result<()> {
        let r2 = radius * radius;
        let mut y = vec![0.0; self.dimension()];
        let g = &self.g;
        self.inner
            .visit_within(radius * self.inv_norm * (1.0 + 1e-12), &mut |x, w| {
                apply_into(g, x, &mut y);
                if norm_sq(&y) < r2 {
                    visit(&y, w);
                }
            })
    }

    fn mass_in_ellipsoid(&self, h: &DMatrix<f64>, r: f64) -> Result<f64> {
        self.inner.source.mass_in_ellipsoid(&(h * &self.g), r)
    }
}

#[derive(Debug)]
struct Rescaled {
    inner: AtomicMeasure,
    factor: f64,
}

impl AtomSource for Rescaled {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn is_even(&self) -> bool {
        self.inner.is_even()
    }

    fn generator_id(&self) -> String {
        format!("rescale({})∘{}", self.factor, self.inner.generator_id())
    }

    fn visit_within(&self, radius: f64, visit: &mut dyn FnMut(&[f64], f64)) -> Result<()> {
        let n = self.dimension();
        let r = self.factor;
        let scale = r.powi(n as i32);
        let mut y = vec![0.0; n];
        let r2 = radius * radius;
        self.inner.visit_within(radius * r * (1.0 + 1e-12), &mut |x, w| {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = xi / r;
            }
            if norm_sq(&y) < r2 {
                visit(&y, w / scale);
            }
        })
    }

    fn mass_in_ellipsoid(&self, h: &DMatrix<f64>, r: f64) -> Result<f64> {
        let n = self.dimension();
        Ok(self.inner.source.mass_in_ellipsoid(h, r * self.factor)?
            / self.factor.powi(n as i32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Integer vectors of `Z² \ {0}` in a box, as a finite measure.
    pub(crate) fn z2(k: i64) -> AtomicMeasure {
        let mut atoms = Vec::new();
        for m in -k..=k {
            for n in -k..=k {
                if (m, n) != (0, 0) {
                    atoms.push(Atom::new(vec![m as f64, n as f64], 1.0));
                }
            }
        }
        FiniteAtoms::new(2, atoms, true, "z2-box").unwrap().into_measure()
    }

    #[test]
    fn growth_function_uses_open_balls() {
        let nu = z2(20);
        assert_eq!(nu.growth_function(1.0).unwrap(), 0.0);
        assert_eq!(nu.growth_function(1.5).unwrap(), 8.0);
        assert_eq!(nu.growth_function(1.0 + 1e-9).unwrap(), 4.0);
        assert_eq!(AtomicMeasure::zero(2).growth_function(5.0).unwrap(), 0.0);
    }

    #[test]
    fn m_bound_examples() {
        assert_eq!(z2(20).m_bound(10.0).unwrap(), 4.0);
        let single = FiniteAtoms::new(3, vec![Atom::new(vec![0.0, 2.0, 0.0], 3.0)], false, "one")
            .unwrap()
            .into_measure();
        assert_eq!(single.m_bound(5.0).unwrap(), 3.0 / 8.0);
        assert_eq!(AtomicMeasure::zero(2).m_bound(5.0).unwrap(), 0.0);
    }

    #[test]
    fn apply_linear_example() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let img = z2(20).apply_linear(&g).unwrap();
        assert_eq!(img.growth_function(1.5).unwrap(), 4.0);
        assert_eq!(img.atoms_within(1.5).unwrap().len(), 4);
        let id = DMatrix::identity(2, 2);
        let same = z2(5).apply_linear(&id).unwrap();
        assert_eq!(
            same.atoms_within(4.0).unwrap(),
            z2(5).atoms_within(4.0).unwrap()
        );
        let bad = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(z2(3).apply_linear(&bad), Err(Error::Domain(_))));
    }

    #[test]
    fn rescale_examples() {
        let nu = z2(30);
        let r = nu.rescale(10.0).unwrap();
        assert_eq!(
            r.growth_function(1.0).unwrap(),
            nu.growth_function(10.0).unwrap() / 100.0
        );
        let one = nu.rescale(1.0).unwrap();
        assert_eq!(one.atoms_within(7.0).unwrap(), nu.atoms_within(7.0).unwrap());
        let ab = nu.rescale(2.0).unwrap().rescale(3.0).unwrap();
        let c = nu.rescale(6.0).unwrap();
        for rad in [0.3, 1.0, 2.5, 4.0] {
            assert_eq!(ab.growth_function(rad).unwrap(), c.growth_function(rad).unwrap());
        }
    }

    #[test]
    fn cesaro_of_single_atom_is_exact() {
        let nu = FiniteAtoms::new(2, vec![Atom::new(vec![0.0, 2.0], 5.0)], false, "one")
            .unwrap()
            .into_measure();
        // (1/T)·5·(1/2 - 1/T) at T = 10
        let v = nu.cesaro_growth(10.0, 100).unwrap();
        assert!((v - 0.5 * (0.5 - 0.1)).abs() < 1e-15);
        assert_eq!(AtomicMeasure::zero(2).cesaro_growth(10.0, 100).unwrap(), 0.0);
        assert!(nu.cesaro_growth(10.0, 99).is_err());
    }

    #[test]
    fn finite_atoms_validate_evenness() {
        let odd = vec![Atom::new(vec![1.0, 0.0], 1.0)];
        assert!(FiniteAtoms::new(2, odd.clone(), true, "x").is_err());
        assert!(FiniteAtoms::new(2, odd, false, "x").is_ok());
        let bad_w = vec![
            Atom::new(vec![1.0, 0.0], 1.0),
            Atom::new(vec![-1.0, 0.0], 2.0),
        ];
        assert!(FiniteAtoms::new(2, bad_w, true, "x").is_err());
    }

    #[test]
    fn weyl_requires_even_measure_and_probes() {
        let odd = FiniteAtoms::new(2, vec![Atom::new(vec![1.0, 0.0], 1.0)], false, "x")
            .unwrap()
            .into_measure();
        let probe = vec![(DMatrix::identity(2, 2), 1.0)];
        assert!(matches!(
            odd.weyl_criterion(&[1.0], &probe, 1.0),
            Err(Error::Precondition(_))
        ));
        assert!(z2(3).weyl_criterion(&[1.0], &[], 1.0).is_err());
        let zero = AtomicMeasure::zero(2).weyl_criterion(&[1.0, 2.0], &probe, 1.0).unwrap();
        assert_eq!(zero[0].report.samples, vec![(1.0, 0.0), (2.0, 0.0)]);
    }

    #[test]
    fn test_function_sum_of_ball_is_rescaled_mass() {
        let nu = z2(40);
        let ball = TestFunction::ball(1.0).unwrap();
        for r in [3.0, 7.5, 20.0] {
            let a = nu.test_function_sum(&ball, r).unwrap();
            let b = nu.rescale(r).unwrap().growth_function(1.0).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert_eq!(nu.test_function_sum(&TestFunction::Zero, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn growth_report_validation() {
        assert!(GrowthReport::from_samples(vec![]).is_err());
        assert!(GrowthReport::from_samples(vec![(2.0, 1.0), (1.0, 1.0)]).is_err());
        let r = GrowthReport::from_samples(vec![(1.0, 9.0), (2.0, 3.0), (3.0, 3.2), (4.0, 2.8)])
            .unwrap();
        assert!((r.fitted_constant - 3.0).abs() < 1e-12);
        assert!((r.max_abs_residual_tail - 0.2).abs() < 1e-12);
    }
}
