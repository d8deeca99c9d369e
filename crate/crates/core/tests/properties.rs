use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use siegel_core::eisenstein::{eisenstein_primitive_sum, UpperHalfPoint};
use siegel_core::measure::{Atom, FiniteAtoms};
use siegel_core::orbits::{count, Mat2, OrbitSpec};
use siegel_core::pointset::{parse_point_set, point_set_to_string};
use siegel_core::spherical::{f_n, DiagonalScaling, QuadratureConfig};

fn even_atoms() -> impl Strategy<Value = FiniteAtoms> {
    prop::collection::vec(((-50.0f64..50.0), (-50.0f64..50.0), (0.1f64..3.0)), 1..40).prop_map(|pts| {
        let atoms = pts
            .into_iter()
            .flat_map(|(x, y, w)| [Atom::new(vec![x, y], w), Atom::new(vec![-x, -y], w)])
            .collect();
        FiniteAtoms::new(2, atoms, true, "random").unwrap()
    })
}

/// Words in `[[1, 1], [0, 1]]` and `[[0, -1], [1, 0]]`.
fn sl2z() -> impl Strategy<Value = Mat2> {
    prop::collection::vec((0u8..2, -3i32..4), 0..6).prop_map(|word| {
        word.into_iter().fold(Mat2::identity(), |m, (kind, k)| {
            let step = if kind == 0 {
                Mat2::new(1.0, k as f64, 0.0, 1.0)
            } else {
                Mat2::new(0.0, -1.0, 1.0, 0.0)
            };
            m * step
        })
    })
}

fn unimodular() -> impl Strategy<Value = Mat2> {
    ((-1.5f64..1.5), (0.4f64..2.5), (0.0f64..6.3)).prop_map(|(x, y, th)| {
        let (s, c) = th.sin_cos();
        let rot = Mat2::new(c, -s, s, c);
        rot * Mat2::new(1.0, x, 0.0, y) / y.sqrt()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spherical_fraction_shrinks_as_the_ellipsoid_grows(
        a in 1.05f64..6.0, b in 0.3f64..1.0, c in 0.05f64..0.3, grow in 1.01f64..2.0, j in 0usize..3,
    ) {
        let cfg = QuadratureConfig::default();
        let base = vec![a, b, c];
        let mut bigger = base.clone();
        bigger[j] *= grow;
        bigger.sort_by(|x, y| y.total_cmp(x));
        prop_assume!(bigger.windows(2).all(|w| w[0] > w[1]));
        let f0 = f_n(&DiagonalScaling::new(base).unwrap(), &cfg).unwrap();
        let f1 = f_n(&DiagonalScaling::new(bigger).unwrap(), &cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&f0));
        prop_assert!(f1 <= f0 + 1e-9, "{f1} > {f0}");
    }

    #[test]
    fn rescaling_moves_the_growth_bound(set in even_atoms(), r in 0.2f64..5.0, t in 1.0f64..40.0) {
        let nu = set.into_measure();
        let lhs = nu.rescale(r).unwrap().m_bound(t).unwrap();
        let rhs = nu.m_bound(r * t).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn linear_images_count_preimages(set in even_atoms(), g in unimodular(), r in 1.0f64..80.0) {
        let nu = set.clone().into_measure();
        let gd = DMatrix::from_column_slice(2, 2, g.as_slice());
        let moved = nu.apply_linear(&gd).unwrap().growth_function(r).unwrap();
        let direct: f64 = set
            .atoms()
            .iter()
            .filter(|a| {
                let (x, y) = (a.point[0], a.point[1]);
                let (u, v) = (g[(0, 0)] * x + g[(0, 1)] * y, g[(1, 0)] * x + g[(1, 1)] * y);
                u * u + v * v < r * r
            })
            .map(|a| a.weight)
            .sum();
        prop_assert!((moved - direct).abs() < 1e-9 * direct.max(1.0));
    }

    #[test]
    fn point_sets_reload_exactly(set in even_atoms(), radii in prop::collection::vec(0.1f64..90.0, 1..6)) {
        let back = parse_point_set(&point_set_to_string(&set)).unwrap();
        prop_assert_eq!(&back, &set);
        let (a, b) = (set.into_measure(), back.into_measure());
        for r in radii {
            prop_assert_eq!(a.growth_function(r).unwrap(), b.growth_function(r).unwrap());
        }
    }

    #[test]
    fn orbit_counts_ignore_the_choice_of_basis(g in unimodular(), gamma in sl2z(), r in 1.0f64..150.0) {
        for spec in [OrbitSpec::FullLattice, OrbitSpec::Primitive] {
            let a = count(spec, &g, r).unwrap();
            let b = count(spec, &(g * gamma), r).unwrap();
            // Rebasing changes rounding, so allow a point sitting on the circle.
            prop_assert!(a.abs_diff(b) <= 8, "{spec}: {a} vs {b}");
        }
    }

    #[test]
    fn eisenstein_sums_are_modular(
        x in -2.0f64..2.0, y in 0.3f64..3.0, s_re in 1.3f64..4.0, s_im in -3.0f64..3.0,
    ) {
        let z = UpperHalfPoint::new(x, y).unwrap();
        let s = Complex64::new(s_re, s_im);
        let base = eisenstein_primitive_sum(&z, s, 40.0, None).unwrap();
        // Both moves permute the terms of the truncated sum.
        for w in [z.translated(1.0), z.inverted()] {
            let other = eisenstein_primitive_sum(&w, s, 40.0, None).unwrap();
            prop_assert!(other.terms.abs_diff(base.terms) <= 8);
            let scale = base.partial.norm();
            prop_assert!((other.partial - base.partial).norm() <= 1e-6 * scale);
        }
    }
}
