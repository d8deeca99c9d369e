//! Compactly supported test functions with closed-form Lebesgue integrals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::spherical::{ball_volume, sphere_area};

/// A test function `ψ` on `R^N`.
///
/// Textual form: `zero`, `ball:<r>`, `box:<a>`, `hat:<r>`, `gauss:<σ>:<r>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestFunction {
    /// `ψ = 0`.
    Zero,
    /// Indicator of the open ball `B(0, r)`.
    Ball { radius: f64 },
    /// Indicator of the open cube `(-a, a)^N`.
    Box { half_width: f64 },
    /// Radial hat `max(0, 1 - |x|/r)`.
    Hat { radius: f64 },
    /// Gaussian `exp(-|x|²/(2σ²))` truncated to `|x| < r`.
    Gaussian { sigma: f64, radius: f64 },
}

impl TestFunction {
    pub fn ball(radius: f64) -> Result<Self> {
        positive("ball radius", radius)?;
        Ok(TestFunction::Ball { radius })
    }

    pub fn hat(radius: f64) -> Result<Self> {
        positive("hat radius", radius)?;
        Ok(TestFunction::Hat { radius })
    }

    pub fn cube(half_width: f64) -> Result<Self> {
        positive("box half-width", half_width)?;
        Ok(TestFunction::Box { half_width })
    }

    pub fn gaussian(sigma: f64, radius: f64) -> Result<Self> {
        positive("gaussian sigma", sigma)?;
        positive("gaussian radius", radius)?;
        Ok(TestFunction::Gaussian { sigma, radius })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            TestFunction::Zero => 0.0,
            TestFunction::Ball { radius } => indicator(norm2 < radius * radius),
            TestFunction::Box { half_width } => indicator(x.iter().all(|v| v.abs() < half_width)),
            TestFunction::Hat { radius } => (1.0 - norm2.sqrt() / radius).max(0.0),
            TestFunction::Gaussian { sigma, radius } => {
                if norm2 < radius * radius {
                    (-norm2 / (2.0 * sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius of a ball containing the support (zero for `ψ = 0`).
    pub fn support_radius(&self, dim: usize) -> f64 {
        match *self {
            TestFunction::Zero => 0.0,
            TestFunction::Ball { radius } | TestFunction::Hat { radius } => radius,
            TestFunction::Box { half_width } => half_width * (dim as f64).sqrt(),
            TestFunction::Gaussian { radius, .. } => radius,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, TestFunction::Box { .. })
    }

    /// `∫ψ dm` over `R^N`.
    pub fn lebesgue_integral(&self, dim: usize) -> Result<f64> {
        if dim == 0 {
            return Err(Error::domain("dimension must be positive"));
        }
        let n = dim as f64;
        Ok(match *self {
            TestFunction::Zero => 0.0,
            TestFunction::Ball { radius } => ball_volume(dim)? * radius.powf(n),
            TestFunction::Box { half_width } => (2.0 * half_width).powf(n),
            TestFunction::Hat { radius } => sphere_area(dim)? * radius.powf(n) / (n * (n + 1.0)),
            TestFunction::Gaussian { sigma, radius } => {
                let full = (2.0 * std::f64::consts::PI * sigma * sigma).powf(n / 2.0);
                full * gamma_lr(n / 2.0, radius * radius / (2.0 * sigma * sigma))
            }
        })
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn positive(what: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be positive, got {x}")))
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::domain(format!("test function `{s}` is missing a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::domain(format!("bad number in test function `{s}`: {e}")))
        };
        let arity = |k: usize| -> Result<()> {
            if parts.len() == k + 1 {
                Ok(())
            } else {
                Err(Error::domain(format!("test function `{s}` takes {k} parameter(s)")))
            }
        };
        match parts[0] {
            "zero" => {
                arity(0)?;
                Ok(TestFunction::Zero)
            }
            "ball" => {
                arity(1)?;
                TestFunction::ball(num(1)?)
            }
            "box" => {
                arity(1)?;
                TestFunction::cube(num(1)?)
            }
            "hat" => {
                arity(1)?;
                TestFunction::hat(num(1)?)
            }
            "gauss" => {
                arity(2)?;
                TestFunction::gaussian(num(1)?, num(2)?)
            }
            other => Err(Error::domain(format!("unknown test function `{other}`"))),
        }
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Zero => write!(f, "zero"),
            TestFunction::Ball { radius } => write!(f, "ball:{radius}"),
            TestFunction::Box { half_width } => write!(f, "box:{half_width}"),
            TestFunction::Hat { radius } => write!(f, "hat:{radius}"),
            TestFunction::Gaussian { sigma, radius } => write!(f, "gauss:{sigma}:{radius}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_adaptive, AdaptiveOptions, RulePair};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Planar radial integral `2π ∫ ψ(r) r dr` by quadrature.
    fn radial_quadrature(psi: &TestFunction) -> f64 {
        let r = psi.support_radius(2);
        let opts = AdaptiveOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_panels: 500,
        };
        2.0 * PI
            * integrate_adaptive(
                |t| Ok(psi.eval(&[t, 0.0]) * t),
                0.0,
                r * (1.0 - 1e-15),
                &RulePair::default(),
                &opts,
            )
            .unwrap()
            .value
    }

    #[test]
    fn closed_forms_match_quadrature_in_the_plane() {
        for psi in [
            TestFunction::ball(1.3).unwrap(),
            TestFunction::hat(1.0).unwrap(),
            TestFunction::gaussian(0.4, 1.1).unwrap(),
        ] {
            assert_relative_eq!(
                psi.lebesgue_integral(2).unwrap(),
                radial_quadrature(&psi),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn hat_of_unit_support_integrates_to_pi_over_three() {
        let hat = TestFunction::hat(1.0).unwrap();
        assert_relative_eq!(hat.lebesgue_integral(2).unwrap(), PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn higher_dimensional_closed_forms() {
        assert_relative_eq!(
            TestFunction::ball(2.0).unwrap().lebesgue_integral(3).unwrap(),
            4.0 / 3.0 * PI * 8.0,
            epsilon = 1e-12
        );
        assert_eq!(TestFunction::cube(0.5).unwrap().lebesgue_integral(4).unwrap(), 1.0);
        // Untruncated Gaussian in R³ is (2πσ²)^{3/2}.
        let g = TestFunction::gaussian(0.5, 50.0).unwrap();
        assert_relative_eq!(
            g.lebesgue_integral(3).unwrap(),
            (2.0 * PI * 0.25f64).powf(1.5),
            max_relative = 1e-12
        );
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["zero", "ball:1", "box:0.5", "hat:2", "gauss:0.3:1.5"] {
            let psi: TestFunction = s.parse().unwrap();
            assert_eq!(psi.to_string(), s);
        }
        assert!("ball".parse::<TestFunction>().is_err());
        assert!("ball:-1".parse::<TestFunction>().is_err());
        assert!("disk:1".parse::<TestFunction>().is_err());
        assert!("gauss:1".parse::<TestFunction>().is_err());
    }

    #[test]
    fn zero_and_open_ball_conventions() {
        assert_eq!(TestFunction::Zero.eval(&[0.0, 0.0]), 0.0);
        let b = TestFunction::ball(1.0).unwrap();
        assert_eq!(b.eval(&[1.0, 0.0]), 0.0);
        assert_eq!(b.eval(&[0.6, 0.79]), 1.0);
    }
}
