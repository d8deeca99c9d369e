//! Square-tiled surfaces.
//!
//! An origami on `n` unit squares is a pair of permutations: `h(i)` is the
//! square glued to the right of square `i`, `v(i)` the square glued on top.
//! Squares are numbered from 1 in text and from 0 internally.
//!
//! Cylinders in the horizontal direction come from the cycles of `h`. For a
//! primitive direction `(p, q)` the surface is first moved by some
//! `A ∈ SL(2, Z)` with `A(p, q) = (1, 0)`, written as a word in the
//! generators below, and the horizontal cylinders of `A·O` are read off.
//!
//! On the pair `(h, v)` the generators act by
//!
//! ```text
//! T = [[1, 1], [0, 1]]:   (h, v) -> (h, v h⁻¹)
//! L = [[1, 0], [1, 1]]:   (h, v) -> (h v⁻¹, v)
//! S = [[0, -1], [1, 0]]:  (h, v) -> (v⁻¹, h)
//! -I:                     (h, v) -> (h⁻¹, v⁻¹)
//! ```
//!
//! with `(σ τ)(i) = σ(τ(i))`. These are checked against [`transform_geometric`],
//! which relabels `A·O` by following straight segments across square edges.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{Error, Result};
use crate::measure::{Atom, FiniteAtoms, GrowthReport};

pub type Perm = Vec<usize>;

fn inverse(p: &[usize]) -> Perm {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// `a ∘ b`.
fn compose(a: &[usize], b: &[usize]) -> Perm {
    b.iter().map(|&j| a[j]).collect()
}

/// `p^k` for any integer `k`, by stepping along cycles.
fn power(p: &[usize], k: i64) -> Perm {
    let n = p.len();
    let mut out = vec![usize::MAX; n];
    for start in 0..n {
        if out[start] != usize::MAX {
            continue;
        }
        let mut cycle = vec![start];
        let mut j = p[start];
        while j != start {
            cycle.push(j);
            j = p[j];
        }
        let len = cycle.len() as i64;
        for (idx, &i) in cycle.iter().enumerate() {
            let target = (idx as i64 + k).rem_euclid(len) as usize;
            out[i] = cycle[target];
        }
    }
    out
}

fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut c = Vec::new();
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            c.push(j);
            j = p[j];
        }
        out.push(c);
    }
    out
}

fn check_perm(p: &[usize], n: usize, name: &str) -> Result<()> {
    if p.len() != n {
        return Err(Error::domain(format!("{name} has {} entries, expected {n}", p.len())));
    }
    let mut seen = vec![false; n];
    for &j in p {
        if j >= n || seen[j] {
            return Err(Error::domain(format!("{name} is not a permutation of 1..{n}")));
        }
        seen[j] = true;
    }
    Ok(())
}

/// Generators of `SL(2, Z)` used to move directions around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    T,
    L,
    S,
    MinusI,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::T, Generator::L, Generator::S, Generator::MinusI];

    pub fn matrix(self) -> [[i64; 2]; 2] {
        match self {
            Generator::T => [[1, 1], [0, 1]],
            Generator::L => [[1, 0], [1, 1]],
            Generator::S => [[0, -1], [1, 0]],
            Generator::MinusI => [[-1, 0], [0, -1]],
        }
    }
}

/// A connected square-tiled surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origami {
    h: Perm,
    v: Perm,
    /// Scale lengths by `1/√n` so that the surface has area 1.
    pub normalize_area: bool,
}

impl Origami {
    /// From 0-based permutations; checks bijectivity and connectedness.
    pub fn new(h: Perm, v: Perm) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::domain("an origami needs at least one square"));
        }
        check_perm(&h, n, "h")?;
        check_perm(&v, n, "v")?;
        let o = Self {
            h,
            v,
            normalize_area: true,
        };
        if !o.is_connected() {
            return Err(Error::domain("the squares do not form a connected surface"));
        }
        Ok(o)
    }

    /// From 1-based one-line notation.
    pub fn from_one_based(h: &[usize], v: &[usize]) -> Result<Self> {
        let shift = |p: &[usize]| -> Result<Perm> {
            p.iter()
                .map(|&x| x.checked_sub(1).ok_or_else(|| Error::domain("squares are numbered from 1")))
                .collect()
        };
        Self::new(shift(h)?, shift(v)?)
    }

    pub fn torus() -> Self {
        Self::new(vec![0], vec![0]).expect("one square is an origami")
    }

    /// The L-shaped surface `h = (1 2)`, `v = (2 3)` on three squares.
    pub fn staircase() -> Self {
        Self::new(vec![1, 0, 2], vec![0, 2, 1]).expect("staircase is an origami")
    }

    pub fn with_normalization(mut self, normalize_area: bool) -> Self {
        self.normalize_area = normalize_area;
        self
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[usize] {
        &self.h
    }

    pub fn v(&self) -> &[usize] {
        &self.v
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let (hi, vi) = (inverse(&self.h), inverse(&self.v));
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in [self.h[i], self.v[i], hi[i], vi[i]] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    /// Length scale applied to holonomies.
    pub fn scale(&self) -> f64 {
        if self.normalize_area {
            1.0 / (self.n() as f64).sqrt()
        } else {
            1.0
        }
    }

    fn with_perms(&self, h: Perm, v: Perm) -> Self {
        Self {
            h,
            v,
            normalize_area: self.normalize_area,
        }
    }

    /// `G^k · O` for the shears; `k` may be negative.
    fn shear_power(&self, g: Generator, k: i64) -> Self {
        match g {
            Generator::T => self.with_perms(self.h.clone(), compose(&self.v, &power(&self.h, -k))),
            Generator::L => self.with_perms(compose(&self.h, &power(&self.v, -k)), self.v.clone()),
            _ => {
                let mut o = self.clone();
                for _ in 0..k.rem_euclid(4) {
                    o = o.act(g);
                }
                o
            }
        }
    }

    /// `G · O`.
    pub fn act(&self, g: Generator) -> Self {
        match g {
            Generator::T => self.shear_power(g, 1),
            Generator::L => self.shear_power(g, 1),
            Generator::S => self.with_perms(inverse(&self.v), self.h.clone()),
            Generator::MinusI => self.with_perms(inverse(&self.h), inverse(&self.v)),
        }
    }

    /// Horizontal cylinders as `(circumference, height)` in square units,
    /// with their squares.
    fn horizontal_units(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let rows = cycles(&self.h);
        let mut row_of = vec![0; self.n()];
        for (r, c) in rows.iter().enumerate() {
            for &i in c {
                row_of[i] = r;
            }
        }
        // The seam above a row is free of cone points when v commutes with h
        // along it; then v carries the row onto the next row of the cylinder.
        let next: Vec<Option<usize>> = rows
            .iter()
            .map(|c| {
                c.iter()
                    .all(|&i| self.v[self.h[i]] == self.h[self.v[i]])
                    .then(|| row_of[self.v[c[0]]])
            })
            .collect();
        let mut has_prev = vec![false; rows.len()];
        for n in next.iter().flatten() {
            has_prev[*n] = true;
        }
        let mut used = vec![false; rows.len()];
        let mut out = Vec::new();
        let mut chain = |start: usize, used: &mut Vec<bool>| {
            let mut squares = Vec::new();
            let mut height = 0;
            let mut r = start;
            loop {
                used[r] = true;
                squares.extend_from_slice(&rows[r]);
                height += 1;
                match next[r] {
                    Some(nr) if !used[nr] => r = nr,
                    _ => break,
                }
            }
            out.push((rows[start].len(), height, squares));
        };
        for r in 0..rows.len() {
            if !has_prev[r] && !used[r] {
                chain(r, &mut used);
            }
        }
        // Rows left over lie on closed chains: the surface is an unbranched
        // torus cover and the chain is one cylinder.
        for r in 0..rows.len() {
            if !used[r] {
                chain(r, &mut used);
            }
        }
        out
    }

    /// Cylinders in direction `(1, 0)`.
    pub fn horizontal_cylinders(&self) -> Result<Vec<Cylinder>> {
        self.cylinders_from_units((1, 0), &self.horizontal_units())
    }

    fn cylinders_from_units(
        &self,
        direction: (i64, i64),
        units: &[(usize, usize, Vec<usize>)],
    ) -> Result<Vec<Cylinder>> {
        let n = self.n();
        let mut cover = vec![0u32; n];
        for (_, _, squares) in units {
            for &i in squares {
                cover[i] += 1;
            }
        }
        if cover.iter().any(|&c| c != 1) {
            return Err(Error::Numeric(format!(
                "cylinders in direction {direction:?} do not partition the squares"
            )));
        }
        let scale = self.scale();
        let len = ((direction.0 * direction.0 + direction.1 * direction.1) as f64).sqrt();
        let cyl: Vec<Cylinder> = units
            .iter()
            .map(|&(c, ht, _)| {
                let hu = (c as i64 * direction.0, c as i64 * direction.1);
                Cylinder {
                    direction,
                    circumference_units: c,
                    height_units: ht,
                    circumference: c as f64 * len * scale,
                    height: ht as f64 / len * scale,
                    area_fraction: (c * ht) as f64 / n as f64,
                    holonomy_units: hu,
                    holonomy: [hu.0 as f64 * scale, hu.1 as f64 * scale],
                }
            })
            .collect();
        let total: usize = cyl.iter().map(|c| c.circumference_units * c.height_units).sum();
        if total != n {
            return Err(Error::Numeric(format!(
                "cylinder areas in direction {direction:?} sum to {total}/{n}"
            )));
        }
        Ok(cyl)
    }

    /// Cylinders in direction `(0, 1)` read directly from the cycles of `v`,
    /// with the roles of `h` and `v` exchanged. Independent of the generator
    /// action.
    pub fn vertical_cylinders(&self) -> Result<Vec<Cylinder>> {
        let swapped = Self {
            h: self.v.clone(),
            v: self.h.clone(),
            normalize_area: self.normalize_area,
        };
        self.cylinders_from_units((0, 1), &swapped.horizontal_units())
    }

    /// `A·O` for `A` with `A(p, q) = (1, 0)`, built from generator powers.
    pub fn straighten(&self, p: i64, q: i64) -> Result<Self> {
        if gcd(p, q) != 1 {
            return Err(Error::domain(format!("direction ({p}, {q}) is not primitive")));
        }
        let (mut a, mut b) = (p, q);
        let mut o = self.clone();
        while a != 0 && b != 0 {
            if a.abs() >= b.abs() {
                // T^k (a, b) = (a + k b, b)
                let k = -(a / b);
                o = o.shear_power(Generator::T, k);
                a += k * b;
            } else {
                // L^k (a, b) = (a, b + k a)
                let k = -(b / a);
                o = o.shear_power(Generator::L, k);
                b += k * a;
            }
        }
        if a == 0 {
            // S (0, b) = (-b, 0)
            o = o.act(Generator::S);
            a = -b;
        }
        if a == -1 {
            o = o.act(Generator::MinusI);
        }
        Ok(o)
    }

    /// Maximal cylinders in the primitive direction `(p, q)`.
    pub fn direction_cylinders(&self, p: i64, q: i64) -> Result<Vec<Cylinder>> {
        let straight = self.straighten(p, q)?;
        self.cylinders_from_units((p, q), &straight.horizontal_units())
    }

    /// Same cylinders from the geometric relabeling of `A·O`.
    pub fn direction_cylinders_geometric(&self, p: i64, q: i64) -> Result<Vec<Cylinder>> {
        let a = straightening_matrix(p, q)?;
        let moved = transform_geometric(self, a)?;
        self.cylinders_from_units((p, q), &moved.horizontal_units())
    }

    /// Whether the two origamis differ only by renumbering the squares.
    pub fn is_isomorphic(&self, other: &Origami) -> bool {
        let n = self.n();
        if n != other.n() {
            return false;
        }
        let (hi, vi) = (inverse(&self.h), inverse(&self.v));
        let (ohi, ovi) = (inverse(&other.h), inverse(&other.v));
        'candidates: for target in 0..n {
            let mut map = vec![usize::MAX; n];
            map[0] = target;
            let mut queue = VecDeque::from([0]);
            while let Some(i) = queue.pop_front() {
                let j = map[i];
                let moves = [
                    (self.h[i], other.h[j]),
                    (self.v[i], other.v[j]),
                    (hi[i], ohi[j]),
                    (vi[i], ovi[j]),
                ];
                for (a, b) in moves {
                    if map[a] == usize::MAX {
                        map[a] = b;
                        queue.push_back(a);
                    } else if map[a] != b {
                        continue 'candidates;
                    }
                }
            }
            return true;
        }
        false
    }

    /// Text form: `n`, then `h` and `v` in 1-based cycle notation.
    pub fn to_text(&self) -> String {
        format!("n {}\nh {}\nv {}\n", self.n(), cycle_notation(&self.h), cycle_notation(&self.v))
    }
}

fn cycle_notation(p: &[usize]) -> String {
    let parts: Vec<String> = cycles(p)
        .into_iter()
        .filter(|c| c.len() > 1)
        .map(|c| {
            let items: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            format!("({})", items.join(" "))
        })
        .collect();
    if parts.is_empty() {
        "()".into()
    } else {
        parts.concat()
    }
}

impl fmt::Display for Origami {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h={} v={}", cycle_notation(&self.h), cycle_notation(&self.v))
    }
}

fn parse_perm(text: &str, n: usize, name: &str) -> Result<Perm> {
    let text = text.trim();
    if text.contains('(') {
        let mut p: Perm = (0..n).collect();
        let mut seen = vec![false; n];
        for group in text.split(')') {
            let group = group.trim();
            if group.is_empty() {
                continue;
            }
            let body = group
                .strip_prefix('(')
                .ok_or_else(|| Error::parse(format!("{name}: malformed cycle `{group}`")))?;
            let items = parse_numbers(body, n, name)?;
            for &i in &items {
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::parse(format!("{name}: square {} repeated", i + 1)));
                }
            }
            for (k, &i) in items.iter().enumerate() {
                p[i] = items[(k + 1) % items.len()];
            }
        }
        Ok(p)
    } else {
        let p = parse_numbers(text, n, name)?;
        if p.len() != n {
            return Err(Error::parse(format!("{name}: expected {n} entries, got {}", p.len())));
        }
        Ok(p)
    }
}

fn parse_numbers(text: &str, n: usize, name: &str) -> Result<Vec<usize>> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let k: usize = t
                .parse()
                .map_err(|_| Error::parse(format!("{name}: `{t}` is not a square number")))?;
            if k == 0 || k > n {
                return Err(Error::parse(format!("{name}: square {k} outside 1..{n}")));
            }
            Ok(k - 1)
        })
        .collect()
}

impl FromStr for Origami {
    type Err = Error;

    /// Lines `n <count>`, `h <perm>`, `v <perm>` in any order; a key may be
    /// followed by `:` or `=`. Permutations are in cycle notation such as
    /// `(1 2)(3 4)` or in one-line notation such as `2 1 3`. `#` starts a
    /// comment.
    fn from_str(s: &str) -> Result<Self> {
        let (mut n, mut h, mut v) = (None, None, None);
        for raw in s.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_at(line.find(|c: char| !c.is_alphanumeric()).unwrap_or(line.len()));
            let rest = rest.trim_start().trim_start_matches([':', '=']).trim();
            match key {
                "n" => {
                    n = Some(rest.parse::<usize>().map_err(|_| Error::parse(format!("bad square count `{rest}`")))?)
                }
                "h" => h = Some(rest.to_string()),
                "v" => v = Some(rest.to_string()),
                other => return Err(Error::parse(format!("unknown origami field `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::parse("origami text is missing `n`"))?;
        let h = parse_perm(&h.ok_or_else(|| Error::parse("origami text is missing `h`"))?, n, "h")?;
        let v = parse_perm(&v.ok_or_else(|| Error::parse("origami text is missing `v`"))?, n, "v")?;
        Origami::new(h, v)
    }
}

/// A maximal cylinder of parallel closed geodesics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub direction: (i64, i64),
    pub circumference_units: usize,
    pub height_units: usize,
    pub circumference: f64,
    pub height: f64,
    pub area_fraction: f64,
    /// `circumference_units · (p, q)`.
    pub holonomy_units: (i64, i64),
    pub holonomy: [f64; 2],
}

/// Some `A ∈ SL(2, Z)` with `A(p, q) = (1, 0)`.
pub fn straightening_matrix(p: i64, q: i64) -> Result<[[i64; 2]; 2]> {
    if gcd(p, q) != 1 {
        return Err(Error::domain(format!("direction ({p}, {q}) is not primitive")));
    }
    // Extended Euclid for a p + b q = 1.
    let (mut r0, mut r1) = (p, q);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let k = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    let (a, b) = if r0 == 1 { (s0, t0) } else { (-s0, -t0) };
    Ok([[a, b], [-q, p]])
}

/// Fixed generic point inside a square, away from all rational lines of
/// small height.
const GENERIC: (f64, f64) = (0.5 + 0.017 * std::f64::consts::SQRT_2, 0.5 - 0.023 * 1.732_050_807_568_877_2);

/// `A·O` by geometry: new square `j` carries the label of the square of `O`
/// that contains `A⁻¹Q` for the generic point `Q` of `j`, and neighbours are
/// found by following `A⁻¹e₁`, `A⁻¹e₂` across the edges of `O`.
pub fn transform_geometric(o: &Origami, a: [[i64; 2]; 2]) -> Result<Origami> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det != 1 {
        return Err(Error::domain("transformation must lie in SL(2, Z)"));
    }
    let inv = [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]];
    let (qx, qy) = GENERIC;
    let px = inv[0][0] as f64 * qx + inv[0][1] as f64 * qy;
    let py = inv[1][0] as f64 * qx + inv[1][1] as f64 * qy;
    let start = (px.rem_euclid(1.0), py.rem_euclid(1.0));
    let (hi, vi) = (inverse(&o.h), inverse(&o.v));
    let trace = |i: usize, dx: i64, dy: i64| -> usize {
        // (parameter, move) for every edge crossing of the segment.
        let mut events: Vec<(f64, u8)> = Vec::new();
        let (x0, y0) = start;
        for m in 0..dx.unsigned_abs() {
            let m = m as f64;
            if dx > 0 {
                events.push(((m + 1.0 - x0) / dx as f64, 0));
            } else {
                events.push(((x0 + m) / (-dx) as f64, 1));
            }
        }
        for m in 0..dy.unsigned_abs() {
            let m = m as f64;
            if dy > 0 {
                events.push(((m + 1.0 - y0) / dy as f64, 2));
            } else {
                events.push(((y0 + m) / (-dy) as f64, 3));
            }
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut sq = i;
        for (_, mv) in events {
            sq = match mv {
                0 => o.h[sq],
                1 => hi[sq],
                2 => o.v[sq],
                _ => vi[sq],
            };
        }
        sq
    };
    let n = o.n();
    let h: Perm = (0..n).map(|i| trace(i, inv[0][0], inv[1][0])).collect();
    let v: Perm = (0..n).map(|i| trace(i, inv[0][1], inv[1][1])).collect();
    Ok(o.with_perms(h, v))
}

/// Primitive directions `(p, q)` up to sign with `|(p, q)| < bound`.
fn half_plane_directions(bound: f64) -> Vec<(i64, i64)> {
    let k = bound.ceil() as i64;
    let mut out = Vec::new();
    for q in 0..=k {
        for p in -k..=k {
            if (q == 0 && p != 1) || gcd(p, q) != 1 {
                continue;
            }
            if ((p * p + q * q) as f64) < bound * bound {
                out.push((p, q));
            }
        }
    }
    out
}

/// `±` holonomies of every cylinder of norm `< r`, with area fractions.
fn spectrum_entries(o: &Origami, r: f64) -> Result<Vec<([f64; 2], f64)>> {
    // Circumferences are at least one square, so |hol| ≥ |(p, q)|·scale.
    let directions = half_plane_directions(r / o.scale());
    let per_direction = directions
        .par_iter()
        .map(|&(p, q)| o.direction_cylinders(p, q))
        .collect::<Result<Vec<_>>>()?;
    let r2 = r * r;
    let mut out = Vec::new();
    for cyl in per_direction.into_iter().flatten() {
        let [x, y] = cyl.holonomy;
        if x * x + y * y < r2 {
            out.push(([x, y], cyl.area_fraction));
            out.push(([-x + 0.0, -y + 0.0], cyl.area_fraction));
        }
    }
    Ok(out)
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::domain(format!("area threshold s must lie in [0, 1), got {s}")));
    }
    Ok(())
}

/// `Π(O, s) ∩ B(0, R)`: `±` holonomies of cylinders with area fraction `> s`.
pub fn holonomy_spectrum(o: &Origami, s: f64, r: f64) -> Result<FiniteAtoms> {
    check_s(s)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("radius must be positive, got {r}")));
    }
    let atoms = spectrum_entries(o, r)?
        .into_iter()
        .filter(|(_, area)| *area > s)
        .map(|(x, _)| Atom::new(x.to_vec(), 1.0))
        .collect();
    FiniteAtoms::new(2, atoms, true, format!("origami:{o}:s={s}"))
}

/// `N(O, s, R)/R²` along `r_grid` for one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumGrowth {
    pub s: f64,
    pub report: GrowthReport,
    /// `fitted / π`, the constant `c` in `N ~ c π R²`.
    pub constant: f64,
    /// `max N/(R² + 1)` over the grid.
    pub quadratic_bound: f64,
}

/// Growth of the filtered spectra for each `s`, plus the distinct area
/// fractions seen up to the largest radius.
pub fn growth_constants(o: &Origami, s_grid: &[f64], r_grid: &[f64]) -> Result<(Vec<SpectrumGrowth>, Vec<f64>)> {
    if s_grid.is_empty() || r_grid.is_empty() {
        return Err(Error::precondition("growth constants need nonempty s and R grids"));
    }
    for &s in s_grid {
        check_s(s)?;
    }
    if r_grid.iter().any(|r| !(*r > 0.0)) || r_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("R grid must be positive and strictly increasing"));
    }
    let entries = spectrum_entries(o, r_grid[r_grid.len() - 1])?;
    let mut areas: Vec<f64> = entries.iter().map(|e| e.1).collect();
    areas.sort_by(f64::total_cmp);
    areas.dedup();
    let out = s_grid
        .iter()
        .map(|&s| {
            let samples: Vec<(f64, f64)> = r_grid
                .iter()
                .map(|&r| {
                    let c = entries
                        .iter()
                        .filter(|(x, a)| *a > s && x[0] * x[0] + x[1] * x[1] < r * r)
                        .count() as f64;
                    (r, c)
                })
                .collect();
            let quadratic_bound = samples.iter().map(|(r, c)| c / (r * r + 1.0)).fold(0.0, f64::max);
            let report = GrowthReport::from_samples(samples.iter().map(|(r, c)| (*r, c / (r * r))).collect())?;
            Ok(SpectrumGrowth {
                s,
                constant: report.fitted_constant / std::f64::consts::PI,
                report,
                quadratic_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((out, areas))
}
