//! Orbits of integer vectors under `SL(2,Z)` and `Γ₀(M)`, counted inside
//! ellipses `{w : |g w| < R}`.
//!
//! The scan walks the integer rows of the ellipse `g⁻¹B(0, R)` along one
//! coordinate axis. Each row's integer interval comes from the quadratic form
//! `gᵀg`; its endpoints are then checked against `|g w|² < R²` directly, so
//! the scan agrees point for point with a brute-force loop that uses the same
//! membership test.
//!
//! Counts of primitive and `Γ₀(M)` orbits go through Möbius inversion over
//! full-lattice counts, which needs only the per-row interval lengths.
//! Enumeration filters points by `gcd` instead.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gamma0_index, gcd, mobius_table};
use crate::error::{Error, Result};
use crate::measure::{Atom, AtomSource, AtomicMeasure, FiniteAtoms, GrowthReport};

pub type Mat2 = Matrix2<f64>;

/// Largest absolute integer coordinate the scan will visit. Squared norms of
/// such vectors stay far inside the exact `i64` range.
pub const COORDINATE_LIMIT: f64 = (1u64 << 30) as f64;

/// `|det g - 1|` tolerance for unimodular inputs.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Which set of integer vectors is being counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitSpec {
    /// `Z² \ {0}`.
    FullLattice,
    /// `SL(2,Z)·e₁`, the primitive vectors.
    Primitive,
    /// `Γ₀(M)·e₁`: primitive `(a, c)` with `M | c`.
    Gamma0 { level: u32 },
}

impl OrbitSpec {
    pub fn gamma0(level: u32) -> Result<Self> {
        if level < 2 {
            return Err(Error::domain(format!("Γ₀(M) needs level M >= 2, got {level}")));
        }
        Ok(OrbitSpec::Gamma0 { level })
    }

    #[inline]
    pub fn contains(&self, a: i64, b: i64) -> bool {
        match *self {
            OrbitSpec::FullLattice => a != 0 || b != 0,
            OrbitSpec::Primitive => gcd(a, b) == 1,
            OrbitSpec::Gamma0 { level } => b % level as i64 == 0 && gcd(a, b) == 1,
        }
    }

    /// Classical value of `lim N(g, R)/R²`: `π`, `6/π`, `6/(π [SL(2,Z):Γ₀(M)])`.
    pub fn reference_limit(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            OrbitSpec::FullLattice => PI,
            OrbitSpec::Primitive => 6.0 / PI,
            OrbitSpec::Gamma0 { level } => 6.0 / (PI * gamma0_index(level as u64) as f64),
        }
    }
}

impl fmt::Display for OrbitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitSpec::FullLattice => write!(f, "full"),
            OrbitSpec::Primitive => write!(f, "primitive"),
            OrbitSpec::Gamma0 { level } => write!(f, "gamma0:{level}"),
        }
    }
}

impl FromStr for OrbitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" | "full_lattice" => Ok(OrbitSpec::FullLattice),
            "primitive" => Ok(OrbitSpec::Primitive),
            other => {
                if let Some(level) = other.strip_prefix("gamma0:") {
                    let level = level
                        .parse::<u32>()
                        .map_err(|e| Error::domain(format!("bad Γ₀ level `{level}`: {e}")))?;
                    OrbitSpec::gamma0(level)
                } else {
                    Err(Error::domain(format!(
                        "unknown orbit `{other}` (expected full, primitive or gamma0:<M>)"
                    )))
                }
            }
        }
    }
}

/// `Card(g Γ v ∩ B(0, R))` query data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountQuery {
    pub g: Mat2,
    pub radius: f64,
}

impl CountQuery {
    pub fn new(g: Mat2, radius: f64) -> Result<Self> {
        check_unimodular(&g)?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::domain(format!("radius must be >= 0, got {radius}")));
        }
        Ok(Self { g, radius })
    }
}

pub fn check_unimodular(g: &Mat2) -> Result<()> {
    let det = g.determinant();
    if (det - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::domain(format!("matrix must have determinant 1, got {det}")));
    }
    Ok(())
}

/// Operator norm of a 2×2 matrix.
pub fn norm2(m: &Mat2) -> f64 {
    let a = m.norm_squared();
    let d = m.determinant();
    ((a + (a * a - 4.0 * d * d).max(0.0).sqrt()) / 2.0).sqrt()
}

/// One integer row `{outer} × [lo, hi]` of an ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Row {
    pub outer: i64,
    pub lo: i64,
    pub hi: i64,
}

impl Row {
    pub fn len(&self) -> u64 {
        if self.hi >= self.lo {
            (self.hi - self.lo + 1) as u64
        } else {
            0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// Integer points `w` with `|g w| < R`, organised in rows.
#[derive(Debug, Clone)]
pub struct EllipseScan {
    g: Mat2,
    r2: f64,
    outer_axis: usize,
    rows: Vec<Row>,
}

impl EllipseScan {
    /// Plans the scan; `g` needs only to be invertible.
    pub fn new(g: &Mat2, radius: f64) -> Result<Self> {
        let det = g.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::domain("ellipse matrix must be invertible"));
        }
        let inv = g.try_inverse().ok_or_else(|| Error::domain("ellipse matrix must be invertible"))?;
        let reach = radius * norm2(&inv);
        if reach > COORDINATE_LIMIT {
            return Err(Error::Size(format!(
                "coordinates up to {reach:.3e} exceed the exact-integer limit {COORDINATE_LIMIT:.3e}"
            )));
        }
        let r2 = radius * radius;
        let q = g.transpose() * g;
        let det_q = det * det;
        // Walk along the axis with the shorter extent: fewer, longer rows.
        let outer_axis = if q[(1, 1)] <= q[(0, 0)] { 0 } else { 1 };
        let inner_axis = 1 - outer_axis;
        let q_in = q[(inner_axis, inner_axis)];
        let q_mix = q[(0, 1)];
        let extent = (radius * (q_in / det_q).sqrt()).floor() as i64 + 1;

        let mut scan = Self {
            g: *g,
            r2,
            outer_axis,
            rows: Vec::new(),
        };
        if radius == 0.0 {
            return Ok(scan);
        }
        let rows: Vec<Row> = (-extent..=extent)
            .map(|o| {
                let of = o as f64;
                let center = -q_mix * of / q_in;
                let disc = q_in * r2 - det_q * of * of;
                let half = disc.max(0.0).sqrt() / q_in;
                let mut lo = (center - half).ceil() as i64;
                let mut hi = (center + half).floor() as i64;
                while scan.inside_row(o, lo - 1) {
                    lo -= 1;
                }
                while lo <= hi && !scan.inside_row(o, lo) {
                    lo += 1;
                }
                while scan.inside_row(o, hi + 1) {
                    hi += 1;
                }
                while hi >= lo && !scan.inside_row(o, hi) {
                    hi -= 1;
                }
                Row { outer: o, lo, hi }
            })
            .filter(|r| !r.is_empty())
            .collect();
        scan.rows = rows;
        Ok(scan)
    }

    #[inline]
    pub fn point(&self, outer: i64, inner: i64) -> (i64, i64) {
        if self.outer_axis == 0 {
            (outer, inner)
        } else {
            (inner, outer)
        }
    }

    #[inline]
    fn inside_row(&self, outer: i64, inner: i64) -> bool {
        let (a, b) = self.point(outer, inner);
        self.inside(a, b)
    }

    /// `|g w|² < R²` with `w = (a, b)`.
    #[inline]
    pub fn inside(&self, a: i64, b: i64) -> bool {
        image_norm_sq(&self.g, a, b) < self.r2
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Number of integer points, the origin included.
    pub fn lattice_points(&self) -> u64 {
        self.rows.iter().map(Row::len).sum()
    }
}

#[inline]
pub fn image(g: &Mat2, a: i64, b: i64) -> (f64, f64) {
    let (af, bf) = (a as f64, b as f64);
    (g[(0, 0)] * af + g[(0, 1)] * bf, g[(1, 0)] * af + g[(1, 1)] * bf)
}

#[inline]
pub fn image_norm_sq(g: &Mat2, a: i64, b: i64) -> f64 {
    let (x, y) = image(g, a, b);
    x * x + y * y
}

/// Nonzero integer vectors with `|g w| < r`; `g` invertible.
fn count_full(g: &Mat2, r: f64) -> Result<u64> {
    if r <= 0.0 {
        return Ok(0);
    }
    let scan = EllipseScan::new(g, r)?;
    // The origin is always inside an open ball of positive radius.
    Ok(scan.lattice_points() - 1)
}

/// `Card(g Γ v ∩ B(0, r))` by Möbius inversion over full-lattice counts.
pub fn count(spec: OrbitSpec, g: &Mat2, r: f64) -> Result<u64> {
    if r <= 0.0 {
        return Ok(0);
    }
    let inv = g.try_inverse().ok_or_else(|| Error::domain("matrix must be invertible"))?;
    let reach = r * norm2(&inv);
    if reach > COORDINATE_LIMIT {
        return Err(Error::Size(format!(
            "coordinates up to {reach:.3e} exceed the exact-integer limit {COORDINATE_LIMIT:.3e}"
        )));
    }
    match spec {
        OrbitSpec::FullLattice => count_full(g, r),
        OrbitSpec::Primitive | OrbitSpec::Gamma0 { .. } => {
            let level = match spec {
                OrbitSpec::Gamma0 { level } => level as i64,
                _ => 1,
            };
            // Any nonzero w has |w| >= 1, so |g w| >= 1/|g⁻¹|; beyond
            // d = r |g⁻¹| the dilated counts vanish.
            let d_max = reach.floor() as usize + 1;
            let mu = mobius_table(d_max);
            let terms: Vec<i128> = (1..=d_max)
                .into_par_iter()
                .filter(|&d| mu[d] != 0)
                .map(|d| -> Result<i128> {
                    let sub = level / gcd(level, d as i64);
                    let gd = g * Mat2::new(1.0, 0.0, 0.0, sub as f64);
                    Ok(mu[d] as i128 * count_full(&gd, r / d as f64)? as i128)
                })
                .collect::<Result<Vec<_>>>()?;
            let total: i128 = terms.iter().sum();
            Ok(u64::try_from(total).expect("Möbius sum of counts is nonnegative"))
        }
    }
}

/// Same count by scanning every lattice point and filtering by orbit
/// membership. Slower; used to cross-check [`count`].
pub fn count_by_enumeration(spec: OrbitSpec, g: &Mat2, r: f64) -> Result<u64> {
    if r <= 0.0 {
        return Ok(0);
    }
    let scan = EllipseScan::new(g, r)?;
    let per_row: Vec<u64> = scan
        .rows()
        .par_iter()
        .map(|row| {
            (row.lo..=row.hi)
                .filter(|&i| {
                    let (a, b) = scan.point(row.outer, i);
                    spec.contains(a, b)
                })
                .count() as u64
        })
        .collect();
    Ok(per_row.iter().sum())
}

/// Applies `f(x, y)` to every orbit point `(x, y) = g w` with `|g w| < r` and
/// sums the results row by row in a fixed order.
pub fn sum_over_orbit<T, F>(spec: OrbitSpec, g: &Mat2, r: f64, f: F) -> Result<T>
where
    T: Send + Copy + Default + std::ops::Add<Output = T>,
    F: Fn(f64, f64) -> T + Sync,
{
    if r <= 0.0 {
        return Ok(T::default());
    }
    let scan = EllipseScan::new(g, r)?;
    let per_row: Vec<T> = scan
        .rows()
        .par_iter()
        .map(|row| {
            let mut acc = T::default();
            for i in row.lo..=row.hi {
                let (a, b) = scan.point(row.outer, i);
                if spec.contains(a, b) {
                    let (x, y) = image(g, a, b);
                    acc = acc + f(x, y);
                }
            }
            acc
        })
        .collect();
    Ok(per_row.into_iter().fold(T::default(), |a, b| a + b))
}

/// Squared norms `|g w|²` of all orbit vectors with `|g w| < r`, sorted.
pub fn orbit_norms_sq(spec: OrbitSpec, g: &Mat2, r: f64) -> Result<Vec<f64>> {
    if r <= 0.0 {
        return Ok(Vec::new());
    }
    let scan = EllipseScan::new(g, r)?;
    let mut all: Vec<f64> = scan
        .rows()
        .par_iter()
        .flat_map_iter(|row| {
            let scan = &scan;
            (row.lo..=row.hi).filter_map(move |i| {
                let (a, b) = scan.point(row.outer, i);
                spec.contains(a, b).then(|| image_norm_sq(g, a, b))
            })
        })
        .collect();
    all.sort_by(f64::total_cmp);
    Ok(all)
}

/// Integer vectors `w` of the orbit with `|g w| < r`, row order.
fn orbit_vectors(spec: OrbitSpec, g: &Mat2, r: f64) -> Result<Vec<(i64, i64)>> {
    if r <= 0.0 {
        return Ok(Vec::new());
    }
    let scan = EllipseScan::new(g, r)?;
    let per_row: Vec<Vec<(i64, i64)>> = scan
        .rows()
        .par_iter()
        .map(|row| {
            (row.lo..=row.hi)
                .map(|i| scan.point(row.outer, i))
                .filter(|&(a, b)| spec.contains(a, b))
                .collect()
        })
        .collect();
    Ok(per_row.into_iter().flatten().collect())
}

/// The orbit points `g w` inside `B(0, R)`, sorted by norm.
pub fn enumerate_orbit(spec: OrbitSpec, q: &CountQuery) -> Result<FiniteAtoms> {
    let atoms = orbit_vectors(spec, &q.g, q.radius)?
        .into_iter()
        .map(|(a, b)| {
            let (x, y) = image(&q.g, a, b);
            Atom::new(vec![x, y], 1.0)
        })
        .collect();
    FiniteAtoms::new(2, atoms, true, orbit_id(spec, &q.g))
}

fn orbit_id(spec: OrbitSpec, g: &Mat2) -> String {
    format!(
        "orbit:{spec}:g=[{},{};{},{}]",
        g[(0, 0)],
        g[(0, 1)],
        g[(1, 0)],
        g[(1, 1)]
    )
}

/// `N(g, R)/R²` along `r_grid`, with the fitted limit.
pub fn count_asymptotic(spec: OrbitSpec, g: &Mat2, r_grid: &[f64]) -> Result<GrowthReport> {
    check_unimodular(g)?;
    let samples = r_grid
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(Error::domain(format!("grid radius must be positive, got {r}")));
            }
            Ok((r, count(spec, g, r)? as f64 / (r * r)))
        })
        .collect::<Result<Vec<_>>>()?;
    GrowthReport::from_samples(samples)
}

/// `max Card/(R² + 1)` over the sample matrices and the grid.
pub fn quadratic_bound_check(spec: OrbitSpec, g_samples: &[Mat2], r_grid: &[f64]) -> Result<f64> {
    if g_samples.is_empty() {
        return Err(Error::precondition("quadratic bound check needs at least one matrix"));
    }
    let mut tau: f64 = 0.0;
    for g in g_samples {
        check_unimodular(g)?;
        for &r in r_grid {
            let c = count(spec, g, r)? as f64;
            tau = tau.max(c / (r * r + 1.0));
        }
    }
    Ok(tau)
}

/// The orbit `g Γ v` as a lazily enumerated even measure.
#[derive(Debug, Clone)]
pub struct OrbitMeasure {
    spec: OrbitSpec,
    g: Mat2,
}

impl OrbitMeasure {
    pub fn new(spec: OrbitSpec, g: Mat2) -> Result<Self> {
        check_unimodular(&g)?;
        Ok(Self { spec, g })
    }

    pub fn measure(spec: OrbitSpec, g: Mat2) -> Result<AtomicMeasure> {
        Ok(AtomicMeasure::new(Self::new(spec, g)?))
    }

    pub fn spec(&self) -> OrbitSpec {
        self.spec
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.g
    }
}

impl AtomSource for OrbitMeasure {
    fn dimension(&self) -> usize {
        2
    }

    fn is_even(&self) -> bool {
        true
    }

    fn generator_id(&self) -> String {
        orbit_id(self.spec, &self.g)
    }

    fn visit_within(&self, radius: f64, visit: &mut dyn FnMut(&[f64], f64)) -> Result<()> {
        for (a, b) in orbit_vectors(self.spec, &self.g, radius)? {
            let (x, y) = image(&self.g, a, b);
            visit(&[x, y], 1.0);
        }
        Ok(())
    }

    fn mass_in_ellipsoid(&self, h: &DMatrix<f64>, r: f64) -> Result<f64> {
        if h.nrows() != 2 || h.ncols() != 2 {
            return Err(Error::domain("orbit measures live in R²"));
        }
        let h2 = Mat2::new(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
        Ok(count(self.spec, &(h2 * self.g), r)? as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Double loop over the bounding box, same membership test.
    fn brute(spec: OrbitSpec, g: &Mat2, r: f64) -> Vec<(i64, i64)> {
        let inv = g.try_inverse().unwrap();
        let k = (r * norm2(&inv)).ceil() as i64 + 1;
        let mut out = Vec::new();
        for a in -k..=k {
            for b in -k..=k {
                if spec.contains(a, b) && image_norm_sq(g, a, b) < r * r {
                    out.push((a, b));
                }
            }
        }
        out.sort();
        out
    }

    fn unimodular(a: f64, b: f64, t: f64) -> Mat2 {
        // rotation · diag(e^t, e^-t) · shear
        let (s, c) = a.sin_cos();
        Mat2::new(c, -s, s, c) * Mat2::new(t.exp(), 0.0, 0.0, (-t).exp()) * Mat2::new(1.0, b, 0.0, 1.0)
    }

    #[test]
    fn primitive_at_identity() {
        let q = CountQuery::new(Mat2::identity(), 1.5).unwrap();
        let pts = enumerate_orbit(OrbitSpec::Primitive, &q).unwrap();
        assert_eq!(pts.len(), 8);
        let full = enumerate_orbit(OrbitSpec::FullLattice, &CountQuery::new(Mat2::identity(), 1.0).unwrap())
            .unwrap();
        assert!(full.is_empty());
    }

    #[test]
    fn gamma0_level_two_small_radius() {
        let q = CountQuery::new(Mat2::identity(), 2.5).unwrap();
        let pts = enumerate_orbit(OrbitSpec::gamma0(2).unwrap(), &q).unwrap();
        let mut expected = brute(OrbitSpec::gamma0(2).unwrap(), &Mat2::identity(), 2.5);
        // (±1, 0) and (±1, ±2).
        assert_eq!(expected.len(), 6);
        let mut got: Vec<(i64, i64)> = pts
            .atoms()
            .iter()
            .map(|a| (a.point[0] as i64, a.point[1] as i64))
            .collect();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn enumeration_matches_brute_force_on_random_matrices() {
        for (i, spec) in [OrbitSpec::FullLattice, OrbitSpec::Primitive, OrbitSpec::gamma0(3).unwrap()]
            .into_iter()
            .cycle()
            .take(21)
            .enumerate()
        {
            let x = i as f64;
            let g = unimodular(0.7 * x, (1.3 * x).sin() * 2.0, (0.37 * x).cos() * 1.2);
            let r = 5.0 + 2.2 * x;
            let mut got = orbit_vectors(spec, &g, r).unwrap();
            got.sort();
            assert_eq!(got, brute(spec, &g, r), "spec {spec} g {g} r {r}");
            assert_eq!(count(spec, &g, r).unwrap(), got.len() as u64);
            assert_eq!(count_by_enumeration(spec, &g, r).unwrap(), got.len() as u64);
        }
    }

    #[test]
    fn size_guard() {
        let g = Mat2::new(1e-6, 0.0, 0.0, 1e6);
        assert!(matches!(EllipseScan::new(&g, 1e4), Err(Error::Size(_))));
        assert!(matches!(count(OrbitSpec::Primitive, &g, 1e4), Err(Error::Size(_))));
    }

    #[test]
    fn empty_queries() {
        let g = Mat2::identity();
        assert_eq!(count(OrbitSpec::Primitive, &g, 0.0).unwrap(), 0);
        assert_eq!(count(OrbitSpec::Primitive, &g, 0.99).unwrap(), 0);
        assert_eq!(quadratic_bound_check(OrbitSpec::Primitive, &[g], &[0.5]).unwrap(), 0.0);
        assert!(quadratic_bound_check(OrbitSpec::Primitive, &[], &[1.0]).is_err());
    }

    #[test]
    fn limits_at_moderate_radius() {
        let g = Mat2::identity();
        let r = 400.0;
        let full = count(OrbitSpec::FullLattice, &g, r).unwrap() as f64 / (r * r);
        let prim = count(OrbitSpec::Primitive, &g, r).unwrap() as f64 / (r * r);
        assert!((full / PI - 1.0).abs() < 0.005);
        assert!((prim / (6.0 / PI) - 1.0).abs() < 0.01);
    }

    #[test]
    fn orbit_measure_mass_matches_enumeration() {
        let g = unimodular(0.3, 0.4, 0.5);
        let nu = OrbitMeasure::measure(OrbitSpec::Primitive, g).unwrap();
        let h = DMatrix::from_row_slice(2, 2, &[1.5, 0.2, -0.1, 0.68]);
        let fast = nu.source().mass_in_ellipsoid(&h, 17.0).unwrap();
        let mut slow = 0.0;
        let hinv_norm = crate::measure::operator_norm(&h.clone().try_inverse().unwrap());
        nu.visit_within(17.0 * hinv_norm + 1.0, &mut |x, w| {
            let y0 = h[(0, 0)] * x[0] + h[(0, 1)] * x[1];
            let y1 = h[(1, 0)] * x[0] + h[(1, 1)] * x[1];
            if y0 * y0 + y1 * y1 < 289.0 {
                slow += w;
            }
        })
        .unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn parse_specs() {
        assert_eq!("primitive".parse::<OrbitSpec>().unwrap(), OrbitSpec::Primitive);
        assert_eq!("full".parse::<OrbitSpec>().unwrap(), OrbitSpec::FullLattice);
        assert_eq!("gamma0:4".parse::<OrbitSpec>().unwrap(), OrbitSpec::Gamma0 { level: 4 });
        assert!("gamma0:1".parse::<OrbitSpec>().is_err());
        assert!("hecke".parse::<OrbitSpec>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn counts_are_even_and_nested(
            angle in 0.0f64..6.3,
            shear in -3.0f64..3.0,
            stretch in -1.5f64..1.5,
            r in 0.5f64..60.0,
        ) {
            let g = unimodular(angle, shear, stretch);
            let full = count(OrbitSpec::FullLattice, &g, r).unwrap();
            let prim = count(OrbitSpec::Primitive, &g, r).unwrap();
            let g2 = count(OrbitSpec::Gamma0 { level: 2 }, &g, r).unwrap();
            prop_assert_eq!(full % 2, 0);
            prop_assert_eq!(prim % 2, 0);
            prop_assert_eq!(g2 % 2, 0);
            prop_assert!(g2 <= prim && prim <= full);
        }

        #[test]
        fn mobius_count_matches_gcd_filter(
            angle in 0.0f64..6.3,
            shear in -2.0f64..2.0,
            stretch in -1.0f64..1.0,
            r in 0.5f64..50.0,
            level in 2u32..7,
        ) {
            let g = unimodular(angle, shear, stretch);
            for spec in [OrbitSpec::Primitive, OrbitSpec::Gamma0 { level }] {
                prop_assert_eq!(
                    count(spec, &g, r).unwrap(),
                    count_by_enumeration(spec, &g, r).unwrap()
                );
            }
        }
    }
}
