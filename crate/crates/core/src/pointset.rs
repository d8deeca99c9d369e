//! Text interchange format for finite point sets.
//!
//! ```text
//! # siegel point set v1
//! dimension 2
//! even true
//! generator orbit:primitive
//! records 4
//! 1 0 1
//! -1 0 1
//! 0 1 1
//! 0 -1 1
//! ```
//!
//! Each record is `x_1 … x_N weight`, sorted by norm. Numbers are written in
//! shortest round-trip form, so reading a file back gives bit-identical atoms.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::measure::{Atom, AtomSource, FiniteAtoms};

pub const MAGIC: &str = "# siegel point set v1";

pub fn write_point_set(set: &FiniteAtoms, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "dimension {}", set.dimension())?;
    writeln!(out, "even {}", set.is_even())?;
    writeln!(out, "generator {}", set.generator_id())?;
    writeln!(out, "records {}", set.len())?;
    let mut line = String::new();
    for a in set.atoms() {
        line.clear();
        for x in &a.point {
            line.push_str(&format!("{:?} ", x + 0.0));
        }
        line.push_str(&format!("{:?}", a.weight));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn point_set_to_string(set: &FiniteAtoms) -> String {
    let mut buf = Vec::new();
    write_point_set(set, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("point sets are ASCII")
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::parse(format!("point set ends before `{key}`")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::parse(format!("expected `{key} …`, found `{line}`")))
}

pub fn read_point_set(input: &mut dyn BufRead) -> Result<FiniteAtoms> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::parse(format!("cannot read point set: {e}")))?;
    parse_point_set(&text)
}

pub fn parse_point_set(text: &str) -> Result<FiniteAtoms> {
    let mut lines = text.lines();
    if lines.next().map(str::trim_end) != Some(MAGIC) {
        return Err(Error::parse("missing point set header line"));
    }
    let dim: usize = header(lines.next(), "dimension")?
        .parse()
        .map_err(|_| Error::parse("bad dimension"))?;
    let even: bool = header(lines.next(), "even")?
        .parse()
        .map_err(|_| Error::parse("even must be true or false"))?;
    let id = header(lines.next(), "generator")?.to_string();
    let records: usize = header(lines.next(), "records")?
        .parse()
        .map_err(|_| Error::parse("bad record count"))?;
    let mut atoms = Vec::with_capacity(records);
    for (k, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let nums = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| Error::parse(format!("record {}: not a number list", k + 1)))?;
        if nums.len() != dim + 1 {
            return Err(Error::parse(format!(
                "record {}: expected {} fields, got {}",
                k + 1,
                dim + 1,
                nums.len()
            )));
        }
        let weight = nums[dim];
        atoms.push(Atom::new(nums[..dim].to_vec(), weight));
    }
    if atoms.len() != records {
        return Err(Error::parse(format!(
            "header announces {records} records, found {}",
            atoms.len()
        )));
    }
    FiniteAtoms::new(dim, atoms, even, id)
}
