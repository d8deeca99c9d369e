//! Haar-random unimodular lattices in the plane and Monte Carlo checks of
//! Siegel's mean value formulas.
//!
//! A point `z = x + iy` of the modular fundamental domain gives the lattice
//! spanned by the columns of `(1/√y)[[1, x], [0, y]]`, whose vectors have
//! squared norms `|m + n z|²/y`. Drawing `z` from `dx dy/y²` on the domain and
//! rotating by a uniform angle samples the invariant probability on the space
//! of covolume-one lattices.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::TestFunction;
use crate::error::{Error, Result};
use crate::orbits::{count, sum_over_orbit, Mat2, OrbitSpec};
use crate::sampling::{par_blocks, Moments};

/// `ζ(2)`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Smallest sample count accepted by the Monte Carlo routines.
pub const MIN_SAMPLES: usize = 1000;

/// A covolume-one lattice `basis · Z²` with the parameters it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice2D {
    pub basis: Mat2,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Lattice2D {
    /// Requires `|x| ≤ 1/2` and `x² + y² ≥ 1`.
    pub fn from_parameters(x: f64, y: f64, theta: f64) -> Result<Self> {
        if !(x.abs() <= 0.5 && y > 0.0 && x * x + y * y >= 1.0 - 1e-12) || !theta.is_finite() {
            return Err(Error::domain(format!(
                "(x, y) = ({x}, {y}) is outside the fundamental domain"
            )));
        }
        let (s, c) = theta.sin_cos();
        let rot = Mat2::new(c, -s, s, c);
        let shape = Mat2::new(1.0, x, 0.0, y) / y.sqrt();
        Ok(Self {
            basis: rot * shape,
            x,
            y,
            theta,
        })
    }

    /// `Z²` itself.
    pub fn standard() -> Self {
        Self::from_parameters(0.0, 1.0, 0.0).expect("i lies in the fundamental domain")
    }

    pub fn covolume(&self) -> f64 {
        self.basis.determinant().abs()
    }

    /// Length of a shortest nonzero vector.
    pub fn shortest_vector(&self) -> f64 {
        // z is reduced, so 1 is a shortest element of Z + zZ.
        1.0 / self.y.sqrt()
    }

    /// The same lattice with the basis replaced by `basis · γ`.
    pub fn rebased(&self, gamma: &Mat2) -> Result<Mat2> {
        let det = gamma.determinant();
        let integral = gamma.iter().all(|v| v.fract() == 0.0);
        if !(integral && det == 1.0) {
            return Err(Error::domain("change of basis must lie in SL(2, Z)"));
        }
        Ok(self.basis * gamma)
    }
}

/// One draw from the invariant probability on unimodular planar lattices.
pub fn sample_lattice<R: Rng + ?Sized>(rng: &mut R) -> Lattice2D {
    let accept_scale = 3f64.sqrt() / 2.0;
    let x = loop {
        let x: f64 = rng.random_range(-0.5..=0.5);
        let accept = accept_scale / (1.0 - x * x).sqrt();
        if rng.random::<f64>() < accept {
            break x;
        }
    };
    // 1 - U with U in [0, 1) is uniform on (0, 1].
    let u = 1.0 - rng.random::<f64>();
    let y = (1.0 - x * x).sqrt() / u;
    let theta = rng.random_range(0.0..2.0 * PI);
    Lattice2D::from_parameters(x, y, theta).expect("sampler stays in the fundamental domain")
}

fn orbit_of(primitive_only: bool) -> OrbitSpec {
    if primitive_only {
        OrbitSpec::Primitive
    } else {
        OrbitSpec::FullLattice
    }
}

/// `Σ ψ(b w)` over nonzero (or primitive) integer vectors `w`.
pub fn siegel_transform_basis(basis: &Mat2, psi: &TestFunction, primitive_only: bool) -> Result<f64> {
    let reach = psi.support_radius(2);
    if reach == 0.0 {
        return Ok(0.0);
    }
    sum_over_orbit(orbit_of(primitive_only), basis, reach, |x, y| psi.eval(&[x, y]))
}

pub fn siegel_transform(lattice: &Lattice2D, psi: &TestFunction, primitive_only: bool) -> Result<f64> {
    siegel_transform_basis(&lattice.basis, psi, primitive_only)
}

/// Monte Carlo mean of a Siegel transform with its target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiegelEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub target: f64,
}

impl SiegelEstimate {
    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == self.target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - self.target).abs() / self.std_error
        }
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::precondition(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

/// `∫ψ dm` for the full lattice and `∫ψ dm/ζ(2)` for primitive vectors.
pub fn siegel_target(psi: &TestFunction, primitive_only: bool) -> Result<f64> {
    let integral = psi.lebesgue_integral(2)?;
    Ok(if primitive_only { integral / ZETA2 } else { integral })
}

pub fn verify_siegel(
    psi: &TestFunction,
    primitive_only: bool,
    n_samples: usize,
    seed: u64,
) -> Result<SiegelEstimate> {
    check_samples(n_samples)?;
    let blocks = par_blocks(n_samples, seed, |rng, k| -> Result<Moments> {
        let mut m = Moments::default();
        for _ in 0..k {
            let l = sample_lattice(rng);
            m.push(siegel_transform(&l, psi, primitive_only)?);
        }
        Ok(m)
    });
    let moments = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    let total: Moments = moments.into_iter().collect();
    Ok(SiegelEstimate {
        mean: total.mean,
        std_error: total.std_error(),
        n_samples,
        target: siegel_target(psi, primitive_only)?,
    })
}

/// Per-sample transforms, in sample order.
pub fn siegel_samples(
    psi: &TestFunction,
    primitive_only: bool,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_samples(n_samples)?;
    let blocks = par_blocks(n_samples, seed, |rng, k| -> Result<Vec<f64>> {
        (0..k)
            .map(|_| siegel_transform(&sample_lattice(rng), psi, primitive_only))
            .collect()
    });
    Ok(blocks.into_iter().collect::<Result<Vec<_>>>()?.concat())
}

/// `E|N_L(R)/R² - π|` over random lattices, one row `(R, deviation)` per grid
/// radius. Every radius is evaluated on the same lattices.
pub fn growth_l1_convergence(r_grid: &[f64], n_samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    check_samples(n_samples)?;
    if r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::domain("grid radii must be positive"));
    }
    let blocks = par_blocks(n_samples, seed, |rng, k| -> Result<Vec<f64>> {
        let mut sums = vec![0.0; r_grid.len()];
        for _ in 0..k {
            let l = sample_lattice(rng);
            for (s, &r) in sums.iter_mut().zip(r_grid) {
                let c = count(OrbitSpec::FullLattice, &l.basis, r)? as f64;
                *s += (c / (r * r) - PI).abs();
            }
        }
        Ok(sums)
    });
    let mut totals = vec![0.0; r_grid.len()];
    for b in blocks {
        for (t, s) in totals.iter_mut().zip(b?) {
            *t += s;
        }
    }
    Ok(r_grid
        .iter()
        .zip(totals)
        .map(|(&r, t)| (r, t / n_samples as f64))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_adaptive, AdaptiveOptions, RulePair};
    use crate::sampling::block_rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn samples_are_unimodular_and_reduced() {
        let mut rng = block_rng(7, 0);
        for _ in 0..20000 {
            let l = sample_lattice(&mut rng);
            assert!((l.covolume() - 1.0).abs() <= 1e-10);
            assert!(l.x.abs() <= 0.5 && l.x * l.x + l.y * l.y >= 1.0);
            assert!(l.shortest_vector() <= 1.0747);
        }
    }

    #[test]
    fn mean_inverse_height_matches_domain_quadrature() {
        // (3/π) ∫_F y^{-1} dx dy / y², inner integral after y = y0/u.
        let opts = AdaptiveOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_panels: 200,
        };
        let rules = RulePair::default();
        let outer = integrate_adaptive(
            |x| {
                let y0 = (1.0f64 - x * x).sqrt();
                Ok(integrate_adaptive(|u| Ok(u / (y0 * y0)), 0.0, 1.0, &rules, &opts)?.value)
            },
            -0.5,
            0.5,
            &rules,
            &opts,
        )
        .unwrap()
        .value;
        let expected = 3.0 / PI * outer;
        assert_relative_eq!(expected, 3.0 * 3f64.ln() / (2.0 * PI), max_relative = 1e-12);

        let n = 100_000;
        let moments: Moments = par_blocks(n, 11, |rng, k| {
            let mut m = Moments::default();
            for _ in 0..k {
                m.push(1.0 / sample_lattice(rng).y);
            }
            m
        })
        .into_iter()
        .collect();
        assert!(
            (moments.mean - expected).abs() < 4.0 * moments.std_error(),
            "{} vs {expected} ± {}",
            moments.mean,
            moments.std_error()
        );
    }

    #[test]
    fn transforms_on_the_square_lattice() {
        let z2 = Lattice2D::standard();
        let ball = TestFunction::ball(1.5).unwrap();
        assert_eq!(siegel_transform(&z2, &ball, false).unwrap(), 8.0);
        assert_eq!(siegel_transform(&z2, &ball, true).unwrap(), 8.0);
        assert_eq!(siegel_transform(&z2, &TestFunction::Zero, false).unwrap(), 0.0);
        let tiny = TestFunction::ball(0.99).unwrap();
        assert_eq!(siegel_transform(&z2, &tiny, false).unwrap(), 0.0);
        // Open box (-1.5, 1.5)²: the same 8 vectors.
        let cube = TestFunction::cube(1.5).unwrap();
        assert_eq!(siegel_transform(&z2, &cube, false).unwrap(), 8.0);
    }

    #[test]
    fn small_sample_counts_are_refused() {
        let ball = TestFunction::ball(1.0).unwrap();
        assert!(matches!(verify_siegel(&ball, false, 999, 1), Err(Error::Precondition(_))));
        assert!(growth_l1_convergence(&[1.0], 10, 1).is_err());
    }

    #[test]
    fn estimates_are_reproducible() {
        let hat = TestFunction::hat(1.0).unwrap();
        let a = verify_siegel(&hat, false, 5000, 3).unwrap();
        let b = verify_siegel(&hat, false, 5000, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.z_score() < 4.0, "{a:?}");
    }

    #[test]
    fn l1_deviation_at_tiny_radius_is_recorded() {
        let rows = growth_l1_convergence(&[0.5, 5.0], 2000, 5).unwrap();
        assert!(rows[0].1 > 0.0 && rows[0].1.is_finite());
        assert!(rows[1].1 < rows[0].1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn change_of_basis_leaves_transform_unchanged(
            seed in 0u64..10_000,
            a in -3i32..4, b in -3i32..4, c in -3i32..4,
            primitive in any::<bool>(),
        ) {
            // Build γ = [[a, b], [c, d]] ∈ SL(2, Z) when possible.
            let (a, b, c) = (a as f64, b as f64, c as f64);
            prop_assume!(a != 0.0 && ((1.0 + b * c) % a) == 0.0);
            let gamma = Mat2::new(a, b, c, (1.0 + b * c) / a);
            let l = sample_lattice(&mut block_rng(seed, 0));
            let psi = TestFunction::ball(2.5).unwrap();
            let direct = siegel_transform(&l, &psi, primitive).unwrap();
            let rebased = siegel_transform_basis(&l.rebased(&gamma).unwrap(), &psi, primitive).unwrap();
            prop_assert_eq!(direct, rebased);
        }

        #[test]
        fn rotation_leaves_radial_transforms_unchanged(seed in 0u64..10_000, phi in 0.0f64..6.3) {
            let l = sample_lattice(&mut block_rng(seed, 1));
            let turned = Lattice2D::from_parameters(l.x, l.y, l.theta + phi).unwrap();
            for psi in [TestFunction::hat(2.0).unwrap(), TestFunction::gaussian(0.7, 2.0).unwrap()] {
                let v0 = siegel_transform(&l, &psi, false).unwrap();
                let v1 = siegel_transform(&turned, &psi, false).unwrap();
                prop_assert!((v0 - v1).abs() <= 1e-12 * v0.abs().max(1.0));
            }
        }
    }
}
