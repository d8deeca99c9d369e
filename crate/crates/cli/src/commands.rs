use std::fs;
use std::io;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};
use siegel_core::eisenstein::{
    eisenstein_primitive_sum, residue_probe, stieltjes_representation_check, UpperHalfPoint, RESIDUE_RADIUS,
};
use siegel_core::identity::error_decay_fit;
use siegel_core::lattices::{growth_l1_convergence, sample_lattice, siegel_samples, verify_siegel};
use siegel_core::measure::GrowthReport;
use siegel_core::orbits::{check_unimodular, count, enumerate_orbit, CountQuery, Mat2, OrbitMeasure};
use siegel_core::origami::{growth_constants, holonomy_spectrum, Origami};
use siegel_core::pointset::write_point_set;
use siegel_core::sampling::block_rng;
use siegel_core::spherical::{f2, f_n, f_n_oracle, gradient_identity_residual, DiagonalScaling, QuadratureConfig};
use siegel_core::Error;

use crate::args::*;
use crate::output::{Artifact, Table};
use crate::Failure;

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

fn matrix(entries: &[f64]) -> Result<Mat2, Failure> {
    match entries {
        [a, b, c, d] => Ok(Mat2::new(*a, *b, *c, *d)),
        _ => Err(Failure::Usage(format!("--g needs 4 entries a,b,c,d, got {}", entries.len()))),
    }
}

fn write_atoms(set: &siegel_core::measure::FiniteAtoms, path: &std::path::Path) -> Result<(), Failure> {
    let mut f = io::BufWriter::new(fs::File::create(path)?);
    write_point_set(set, &mut f)?;
    Ok(())
}

/// Runs one subcommand. `config` is the hashed configuration; commands that
/// read input files add the content they read.
pub fn run(cmd: &Command, global: &Global, config: &mut Value) -> Result<Artifact, Failure> {
    match cmd {
        Command::Spherical(a) => spherical(a, global.seed),
        Command::Identity(a) => identity(a),
        Command::Count(a) => count_cmd(a),
        Command::SiegelMc(a) => siegel_mc(a, global),
        Command::Eisenstein(a) => eisenstein(a),
        Command::Origami(a) => origami(a, config),
        Command::Equidist(a) => equidist(a, global.seed),
    }
}

fn spherical(a: &SphericalArgs, seed: u64) -> Result<Artifact, Failure> {
    let lambda = DiagonalScaling::new(a.lambda.clone())?;
    let cfg = QuadratureConfig::new(a.panels, a.tol, a.tol)?;
    let f = f_n(&lambda, &cfg)?;
    let closed = if lambda.dim() == 2 { Some(f2(&lambda)?) } else { None };
    let oracle = a.oracle_samples.map(|n| f_n_oracle(&lambda, n, seed)).transpose()?;
    let residual = a
        .gradient_c
        .map(|c| gradient_identity_residual(&lambda, c, &cfg))
        .transpose()?;
    let mut table = Table::new(&["N", "F", "oracle_mean", "oracle_std_error", "gradient_residual"]);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    table.push([
        lambda.dim().to_string(),
        f.to_string(),
        opt(oracle.map(|o| o.0)),
        opt(oracle.map(|o| o.1)),
        opt(residual),
    ]);
    Ok(Artifact {
        result: json!({
            "N": lambda.dim(),
            "lambda": lambda.entries(),
            "F": f,
            "closed_form": closed,
            "oracle": oracle.map(|(m, se)| json!({"mean": m, "std_error": se})),
            "gradient_residual": residual,
        }),
        table,
        plot: None,
    })
}

fn identity(a: &IdentityArgs) -> Result<Artifact, Failure> {
    let g = matrix(&a.g)?;
    let nu = OrbitMeasure::measure(a.orbit, g)?;
    let fit = error_decay_fit(&nu, &a.t_grid, &QuadratureConfig::default())?;
    let mut table = Table::new(&["t", "ratio", "lhs", "rhs", "abs_error"]);
    for r in &fit.rows {
        table.push([r.t, r.ratio, r.lhs, r.rhs, r.abs_error]);
    }
    Ok(Artifact {
        result: to_json(&fit),
        table,
        plot: None,
    })
}

fn count_cmd(a: &CountArgs) -> Result<Artifact, Failure> {
    let g = matrix(&a.g)?;
    check_unimodular(&g)?;
    if !(a.r > 0.0 && a.r.is_finite()) {
        return Err(Error::Domain(format!("radius must be positive, got {}", a.r)).into());
    }
    let k = a.points as f64;
    let radii: Vec<f64> = (1..=a.points).map(|i| a.r * i as f64 / k).collect();
    let counts = radii
        .iter()
        .map(|&r| count(a.orbit, &g, r))
        .collect::<siegel_core::Result<Vec<u64>>>()?;
    let report = GrowthReport::from_samples(
        radii
            .iter()
            .zip(&counts)
            .map(|(r, c)| (*r, *c as f64 / (r * r)))
            .collect(),
    )?;
    let mut table = Table::new(&["R", "count", "ratio"]);
    for ((r, c), (_, ratio)) in radii.iter().zip(&counts).zip(&report.samples) {
        table.push([r.to_string(), c.to_string(), ratio.to_string()]);
    }
    if let Some(path) = &a.atoms_out {
        write_atoms(&enumerate_orbit(a.orbit, &CountQuery::new(g, a.r)?)?, path)?;
    }
    Ok(Artifact {
        result: json!({
            "orbit": a.orbit.to_string(),
            "reference_limit": a.orbit.reference_limit(),
            "counts": counts,
            "report": report,
        }),
        table,
        plot: None,
    })
}

fn siegel_mc(a: &SiegelArgs, global: &Global) -> Result<Artifact, Failure> {
    let n = a.samples as usize;
    let est = verify_siegel(&a.psi, a.primitive, n, global.seed)?;
    let mut table = Table::new(&["mean", "std_error", "n_samples", "target", "z_score"]);
    table.push([
        est.mean.to_string(),
        est.std_error.to_string(),
        est.n_samples.to_string(),
        est.target.to_string(),
        est.z_score().to_string(),
    ]);
    let l1 = a
        .l1_grid
        .as_ref()
        .map(|grid| growth_l1_convergence(grid, n, global.seed))
        .transpose()?;
    // Per-sample transforms are only computed when a plot file is wanted.
    let plot = if global.plot_data.is_some() {
        let mut t = Table::new(&["sample", "transform"]);
        for (i, v) in siegel_samples(&a.psi, a.primitive, n, global.seed)?.iter().enumerate() {
            t.push([i.to_string(), v.to_string()]);
        }
        Some(t)
    } else {
        None
    };
    Ok(Artifact {
        result: json!({
            "estimate": est,
            "z_score": est.z_score(),
            "l1_deviation": l1.map(|rows| rows.iter().map(|(r, d)| json!({"R": r, "deviation": d})).collect::<Vec<_>>()),
        }),
        table,
        plot,
    })
}

fn eisenstein(a: &EisensteinArgs) -> Result<Artifact, Failure> {
    let z = match a.z[..] {
        [x, y] => UpperHalfPoint::new(x, y)?,
        _ => return Err(Failure::Usage("--z needs two entries x,y".into())),
    };
    let s = match a.s[..] {
        [re] => Complex64::new(re, 0.0),
        [re, im] => Complex64::new(re, im),
        _ => return Err(Failure::Usage("--s needs one or two entries".into())),
    };
    match a.mode {
        EisensteinMode::Value => {
            let radius = a.radius.unwrap_or(200.0);
            let mut table = Table::new(&["re_s", "im_s", "radius", "terms", "re_value", "im_value", "tail_bound"]);
            match eisenstein_primitive_sum(&z, s, radius, a.tolerance) {
                Ok(sum) => {
                    table.push([
                        s.re.to_string(),
                        s.im.to_string(),
                        radius.to_string(),
                        sum.terms.to_string(),
                        sum.partial.re.to_string(),
                        sum.partial.im.to_string(),
                        sum.tail_bound.to_string(),
                    ]);
                    Ok(Artifact {
                        result: to_json(&sum),
                        table,
                        plot: None,
                    })
                }
                Err(e @ Error::Convergence { .. }) => {
                    let Error::Convergence { estimate, error, .. } = &e else { unreachable!() };
                    table.push([
                        s.re.to_string(),
                        s.im.to_string(),
                        radius.to_string(),
                        String::new(),
                        estimate.to_string(),
                        String::new(),
                        error.to_string(),
                    ]);
                    let artifact = Artifact {
                        result: json!({
                            "converged": false,
                            "message": e.to_string(),
                            "partial": {"estimate": estimate, "tail_bound": error},
                        }),
                        table,
                        plot: None,
                    };
                    Err(Failure::Partial(Box::new(artifact), e))
                }
                Err(e) => Err(e.into()),
            }
        }
        EisensteinMode::Residue => {
            let probe = residue_probe(&z, a.sigma, &a.eps, a.radius.unwrap_or(RESIDUE_RADIUS))?;
            let mut table = Table::new(&["epsilon", "s", "value", "lower", "upper", "rigorous_upper"]);
            for r in &probe.rows {
                table.push([r.epsilon, r.s, r.value, r.lower, r.upper, r.rigorous_upper]);
            }
            Ok(Artifact {
                result: json!({
                    "probe": probe,
                    "relative_error": probe.relative_error(),
                }),
                table,
                plot: None,
            })
        }
        EisensteinMode::Stieltjes => {
            if s.im != 0.0 {
                return Err(Failure::Usage("the Stieltjes check takes a real s".into()));
            }
            let check = stieltjes_representation_check(&z, s.re, a.radius.unwrap_or(200.0))?;
            let mut table = Table::new(&["s", "r_max", "lhs_lower", "lhs_upper", "rhs_lower", "rhs_upper", "gap"]);
            table.push([
                check.s,
                check.r_max,
                check.lhs.0,
                check.lhs.1,
                check.rhs.0,
                check.rhs.1,
                check.gap,
            ]);
            Ok(Artifact {
                result: json!({"check": check, "brackets_overlap": check.brackets_overlap()}),
                table,
                plot: None,
            })
        }
    }
}

fn origami(a: &OrigamiArgs, config: &mut Value) -> Result<Artifact, Failure> {
    let o = match (&a.file, a.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)?;
            let o: Origami = text.parse()?;
            config["origami_text"] = Value::String(o.to_text());
            o
        }
        (None, Some(Preset::Torus)) => Origami::torus(),
        (None, Some(Preset::Staircase)) => Origami::staircase(),
        (None, None) => return Err(Failure::Usage("give --file or --preset".into())),
    };
    let o = o.with_normalization(!a.unnormalized);
    match a.mode {
        OrigamiMode::Cylinders => {
            let [p, q] = a.direction[..] else {
                return Err(Failure::Usage("--direction needs two entries p,q".into()));
            };
            let cyl = o.direction_cylinders(p, q)?;
            let mut table = Table::new(&["p", "q", "circumference", "height", "area_fraction"]);
            for c in &cyl {
                table.push([
                    p.to_string(),
                    q.to_string(),
                    c.circumference.to_string(),
                    c.height.to_string(),
                    c.area_fraction.to_string(),
                ]);
            }
            Ok(Artifact {
                result: json!({"origami": o.to_string(), "cylinders": cyl}),
                table,
                plot: None,
            })
        }
        OrigamiMode::Spectrum => {
            let set = holonomy_spectrum(&o, a.s, a.r)?;
            let mut table = Table::new(&["x", "y", "weight"]);
            for atom in set.atoms() {
                table.push([atom.point[0], atom.point[1], atom.weight]);
            }
            if let Some(path) = &a.atoms_out {
                write_atoms(&set, path)?;
            }
            Ok(Artifact {
                result: json!({"origami": o.to_string(), "s": a.s, "R": a.r, "count": set.len()}),
                table,
                plot: None,
            })
        }
        OrigamiMode::Growth => {
            let (rows, areas) = growth_constants(&o, &a.s_grid, &a.r_grid)?;
            let mut table = Table::new(&["s", "fitted_ratio", "constant", "quadratic_bound"]);
            for r in &rows {
                table.push([r.s, r.report.fitted_constant, r.constant, r.quadratic_bound]);
            }
            Ok(Artifact {
                result: json!({"origami": o.to_string(), "area_fractions": areas, "growth": rows}),
                table,
                plot: None,
            })
        }
    }
}

fn equidist(a: &EquidistArgs, seed: u64) -> Result<Artifact, Failure> {
    let nu = OrbitMeasure::measure(a.orbit, Mat2::identity())?;
    let c = a.orbit.reference_limit() / std::f64::consts::PI;
    let mut rng = block_rng(seed, 0);
    let probes: Vec<(DMatrix<f64>, f64)> = (0..a.probes)
        .map(|_| {
            let b = sample_lattice(&mut rng).basis;
            let t = rng.random_range(0.5..2.0);
            (DMatrix::from_column_slice(2, 2, b.as_slice()), t)
        })
        .collect();
    let reports = nu.weyl_criterion(&a.r_grid, &probes, c)?;
    let mut table = Table::new(&["probe", "t", "target", "final_value", "relative_error"]);
    for (i, r) in reports.iter().enumerate() {
        table.push([
            i.to_string(),
            r.t.to_string(),
            r.target.to_string(),
            r.report.last_value().to_string(),
            r.final_relative_error().to_string(),
        ]);
    }
    let target = nu.test_function_target(&a.psi, c)?;
    let mut plot = Table::new(&["R", "test_function_sum", "target"]);
    let mut sums = Vec::new();
    for &r in &a.r_grid {
        let v = nu.test_function_sum(&a.psi, r)?;
        plot.push([r, v, target]);
        sums.push(json!({"R": r, "value": v}));
    }
    Ok(Artifact {
        result: json!({
            "density": c,
            "probes": reports,
            "test_function": {"psi": a.psi.to_string(), "target": target, "sums": sums},
        }),
        table,
        plot: Some(plot),
    })
}
