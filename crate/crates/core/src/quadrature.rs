//! Gauss–Legendre rules and a globally adaptive integrator built on them.
//!
//! Every panel is integrated twice, with an `n`-point and a `2n`-point rule,
//! and the difference is taken as the panel error. Panels are bisected worst
//! first until the summed error meets the tolerance or the panel budget runs
//! out.
//!
//! Integrands with algebraic endpoint behaviour `(x - a)^{k/2}` are handled by
//! [`integrate_cosine_mapped`], which substitutes `x = m - h cos θ` so that the
//! mapped integrand is smooth in `θ`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi's initial guess for the i-th root.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x)?;
        }
        Ok(sum * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tolerances and panel budget for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

/// Value of an adaptive integral together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Pair of nested rules used by the adaptive integrator.
#[derive(Debug, Clone)]
pub struct RulePair {
    coarse: GaussLegendre,
    fine: GaussLegendre,
}

impl RulePair {
    pub fn new(n: usize) -> Self {
        Self {
            coarse: GaussLegendre::new(n),
            fine: GaussLegendre::new(2 * n),
        }
    }

    fn panel<F>(&self, f: &mut F, a: f64, b: f64) -> Result<Panel>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let coarse = self.coarse.integrate(&mut *f, a, b)?;
        let fine = self.fine.integrate(&mut *f, a, b)?;
        Ok(Panel {
            a,
            b,
            value: fine,
            error: (fine - coarse).abs(),
        })
    }
}

impl Default for RulePair {
    fn default() -> Self {
        Self::new(8)
    }
}

/// Globally adaptive integral of `f` over `[a, b]`.
pub fn integrate_adaptive<F>(
    mut f: F,
    a: f64,
    b: f64,
    rules: &RulePair,
    opts: &AdaptiveOptions,
) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let first = rules.panel(&mut f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Convergence {
                message: format!(
                    "adaptive quadrature on [{a}, {b}] exhausted {} panels",
                    opts.max_panels
                ),
                estimate: value,
                error,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numeric(format!(
                "panel [{}, {}] cannot be bisected further",
                worst.a, worst.b
            )));
        }
        let left = rules.panel(&mut f, worst.a, mid)?;
        let right = rules.panel(&mut f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum the panels so that the reported value carries no drift from the
    // incremental updates.
    let panels = heap.len();
    let mut all: Vec<Panel> = heap.into_vec();
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = all.iter().map(|p| p.value).sum();
    let error = all.iter().map(|p| p.error).sum();
    Ok(Integral {
        value,
        error,
        panels,
    })
}

/// Adaptive integral over `[a, b]` after the substitution `x = m - h cos θ`.
///
/// The Jacobian `h sin θ` vanishes to first order at both ends, which turns
/// square-root type endpoint behaviour of `f` into smooth behaviour in `θ`.
pub fn integrate_cosine_mapped<F>(
    mut f: F,
    a: f64,
    b: f64,
    rules: &RulePair,
    opts: &AdaptiveOptions,
) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    integrate_adaptive(
        |theta: f64| {
            let (s, c) = theta.sin_cos();
            Ok(f(m - h * c)? * h * s)
        },
        0.0,
        PI,
        rules,
        opts,
    )
}
