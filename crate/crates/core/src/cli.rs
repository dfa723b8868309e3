//! Command-line front end. Exit codes: 0 success, 1 a checked bound was
//! violated, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::calculus::{
    boundary_reproduces_loop, bump_field, cone_extension, degeneracy_field, distance_field, inner_disc_constant,
    loop_integral, md_field, seminorm_check, stokes_check, MdConfig, ScalarField,
};
use crate::error::{Error, Result};
use crate::gallery::{euclidean_lens_diameter, generate, lens_blowup_curve, GeneratorSpec};
use crate::hyperbolicity::{certify_tree, four_point_delta, space_thinness, GeodesicMode};
use crate::io::{map_file, read_field, read_loop, read_map, read_space, write_matrix_csv};
use crate::lens::{
    diamond_scan, hyp_distortion_witness, lens_bound_search, lens_diameter_check, rescale_sweep, RadiusGrid,
    ScanConfig,
};
use crate::pointset::PointSet;
use crate::report::{cell, error_object, to_json, ErrorReport, RunReport, Table, SCHEMA, VERSION};
use crate::space::{geodesicity_defect, FiniteMetricSpace, DEFAULT_TAU_BALL, DEFAULT_TOL_METRIC};

#[derive(Parser, Debug)]
#[command(name = "metric-lens", version, about = "Tree, hyperbolicity and ball-intersection diagnostics for finite metric spaces")]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Add wall_time_ms to the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Triangle-inequality tolerance used when reading matrices.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL_METRIC)]
    tol_metric: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Output {
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit flat CSV plot data instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ScanArgs {
    /// `auto` (every realized distance) or a comma-separated radius list.
    #[arg(long, default_value = "auto")]
    radii: String,
    /// `all`, or the number of ball pairs to sample when there are more.
    #[arg(long, default_value = "all")]
    pairs: String,
    /// Only scan pairs with max(r, s) < d(x, y) (the default).
    #[arg(long, overrides_with = "no_restrict_far")]
    #[serde(skip)]
    restrict_far: bool,
    /// Scan every pair of balls with nonempty intersection.
    #[arg(long)]
    #[serde(skip)]
    no_restrict_far: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Build the constructive witness for every scanned pair.
    #[arg(long)]
    witnesses: bool,
}

impl ScanArgs {
    fn config(&self) -> Result<ScanConfig> {
        let radii = if self.radii == "auto" { RadiusGrid::Auto } else { RadiusGrid::List(parse_list(&self.radii, "radii")?) };
        if let RadiusGrid::List(l) = &radii {
            if l.is_empty() || l.iter().any(|r| !(*r >= 0.0)) {
                return Err(Error::InvalidInput("radii must be non-negative".into()));
            }
        }
        let pair_budget = match self.pairs.as_str() {
            "all" => None,
            n => match n.parse::<usize>() {
                Ok(b) if b >= 1 => Some(b),
                _ => return Err(Error::InvalidInput(format!("--pairs must be `all` or a positive count, got {n:?}"))),
            },
        };
        Ok(ScanConfig { radii, pair_budget, restrict_far: !self.no_restrict_far, seed: self.seed, witnesses: self.witnesses })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a distance matrix or graph and summarize it.
    Validate {
        space: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Thin-triangle and four-point hyperbolicity constants.
    Hyperbolicity {
        space: PathBuf,
        /// thin, 4pt or both.
        #[arg(long, default_value = "both")]
        mode: String,
        /// Triangles / quadruples to examine; the scan is exact when this covers all of them.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// canonical or exhaustive:CAP.
        #[arg(long, default_value = "canonical")]
        geodesics: String,
        #[command(flatten)]
        output: Output,
    },
    /// Exact four-point tree certification. Exits 1 when the space is not a tree.
    TreeCheck {
        space: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Inner/outer ball distortion over ball pairs.
    LensScan {
        space: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        output: Output,
    },
    /// The constructive inner/outer witness for one ball pair.
    Witness {
        space: PathBuf,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        output: Output,
    },
    /// diam A <= 4λh for one (x, y, t, h), or a search over all pairs when any of them is omitted.
    LensBound {
        space: PathBuf,
        #[arg(long)]
        x: Option<usize>,
        #[arg(long)]
        y: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// t values for the search.
        #[arg(long, default_value = "0.25,0.5,0.75")]
        t_list: String,
        /// h values for the search.
        #[arg(long, default_value = "0,0.5,1,2")]
        h_list: String,
        #[command(flatten)]
        output: Output,
    },
    /// Trapezoid line integral of f dπ around a loop.
    LoopIntegral {
        space: PathBuf,
        #[arg(long = "loop")]
        loop_file: PathBuf,
        /// Field file, or distance:I, bump:I[+J…]:EPS, const:C.
        #[arg(long)]
        f: String,
        #[arg(long)]
        pi: String,
        #[command(flatten)]
        output: Output,
    },
    /// Radial geodesic extension of a loop to the disc, checked against (8λ+12)·Lip.
    Cone {
        space: PathBuf,
        #[arg(long = "loop")]
        loop_file: PathBuf,
        #[arg(long)]
        base: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Also write the extension as a map file.
        #[arg(long)]
        map_out: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Metric-derivative field of a map with seminorm and degeneracy diagnostics.
    MdField {
        #[arg(long)]
        map: PathBuf,
        /// Target space, overriding the map's space_ref.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        dirs: usize,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        /// Probe distances in lattice steps, coarsest first.
        #[arg(long, default_value = "4,2")]
        ladder: String,
        #[command(flatten)]
        output: Output,
    },
    /// Boundary line integral against the summed cell Jacobians.
    Stokes {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        f: String,
        #[arg(long)]
        pi: String,
        #[command(flatten)]
        output: Output,
    },
    /// Euclidean lens diameters and the blow-up ratio diam/h.
    LensDemo {
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        h_list: String,
        #[arg(long, default_value_t = crate::gallery::DEFAULT_LENS_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Distortion scans of (X, d/σ) over ascending scales.
    Rescale {
        space: PathBuf,
        #[arg(long)]
        scales: String,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Build a space from a generator spec and write it as CSV or JSON.
    Generate {
        /// Inline JSON or a path to a JSON file.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Hyperbolicity { .. } => "hyperbolicity",
            Command::TreeCheck { .. } => "tree-check",
            Command::LensScan { .. } => "lens-scan",
            Command::Witness { .. } => "witness",
            Command::LensBound { .. } => "lens-bound",
            Command::LoopIntegral { .. } => "loop-integral",
            Command::Cone { .. } => "cone",
            Command::MdField { .. } => "md-field",
            Command::Stokes { .. } => "stokes",
            Command::LensDemo { .. } => "lens-demo",
            Command::Rescale { .. } => "rescale",
            Command::Generate { .. } => "generate",
        }
    }

    fn output(&self) -> Output {
        match self {
            Command::Validate { output, .. }
            | Command::Hyperbolicity { output, .. }
            | Command::TreeCheck { output, .. }
            | Command::LensScan { output, .. }
            | Command::Witness { output, .. }
            | Command::LensBound { output, .. }
            | Command::LoopIntegral { output, .. }
            | Command::Cone { output, .. }
            | Command::MdField { output, .. }
            | Command::Stokes { output, .. }
            | Command::LensDemo { output, .. }
            | Command::Rescale { output, .. } => output.clone(),
            Command::Generate { .. } => Output { out: None, csv: false },
        }
    }
}

struct Outcome {
    config: Value,
    allowances: Value,
    pass: bool,
    results: Value,
    table: Option<Table>,
}

fn parse_list(s: &str, name: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad {name} entry {v:?}: {e}"))))
        .collect()
}

fn space_allowances(space: &FiniteMetricSpace) -> Value {
    json!({ "quantum": space.quantum(), "tol_metric": space.tol_metric(), "tau_ball": DEFAULT_TAU_BALL })
}

/// A field argument: a JSON file, or `distance:I`, `bump:I[+J…]:EPS`, `const:C`.
fn field_arg(spec: &str, space: &FiniteMetricSpace) -> Result<ScalarField> {
    let bad = || Error::InvalidInput(format!("bad field spec {spec:?}"));
    if let Some(rest) = spec.strip_prefix("distance:") {
        return distance_field(space, rest.parse().map_err(|_| bad())?);
    }
    if let Some(rest) = spec.strip_prefix("const:") {
        return Ok(ScalarField::constant(space, rest.parse().map_err(|_| bad())?));
    }
    if let Some(rest) = spec.strip_prefix("bump:") {
        let (set, eps) = rest.split_once(':').ok_or_else(bad)?;
        let idx = set.split('+').map(|i| i.parse::<usize>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        for &i in &idx {
            space.check_index(i)?;
        }
        return bump_field(space, &PointSet::from_indices(space.len(), idx), eps.parse().map_err(|_| bad())?);
    }
    read_field(Path::new(spec), space)
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn execute(cmd: &Command, tol: f64) -> Result<Outcome> {
    match cmd {
        Command::Validate { space, .. } => {
            let s = read_space(space, tol)?;
            let results = json!({
                "valid": true,
                "n": s.len(),
                "diameter": s.diameter(),
                "geodesicity_defect": geodesicity_defect(&s),
            });
            Ok(Outcome {
                config: json!({ "space": space }),
                allowances: space_allowances(&s),
                pass: true,
                table: Some(Table::scalars(&results)),
                results,
            })
        }
        Command::Hyperbolicity { space, mode, budget, seed, geodesics, .. } => {
            let s = read_space(space, tol)?;
            let gmode: GeodesicMode = geodesics.parse()?;
            let (thin, four) = match mode.as_str() {
                "thin" => (true, false),
                "4pt" => (false, true),
                "both" => (true, true),
                m => return Err(Error::InvalidInput(format!("--mode must be thin, 4pt or both, got {m:?}"))),
            };
            let mut table = Table::new(&["mode", "delta", "exact"]);
            let mut results = serde_json::Map::new();
            if thin {
                let r = space_thinness(&s, *budget, *seed, gmode)?;
                table.push(vec!["thin".into(), cell(r.delta), r.exact.to_string()]);
                results.insert("thin".into(), to_value(&r)?);
            }
            if four {
                let r = four_point_delta(&s, *budget, *seed);
                table.push(vec!["4pt".into(), cell(r.delta), r.exact.to_string()]);
                results.insert("four_point".into(), to_value(&r)?);
            }
            Ok(Outcome {
                config: json!({ "space": space, "mode": mode, "budget": budget, "seed": seed, "geodesics": gmode.to_string() }),
                allowances: space_allowances(&s),
                pass: true,
                results: Value::Object(results),
                table: Some(table),
            })
        }
        Command::TreeCheck { space, tol: t, .. } => {
            let s = read_space(space, tol)?;
            let cert = certify_tree(&s, *t);
            let results = to_value(&cert)?;
            Ok(Outcome {
                config: json!({ "space": space, "tol": t }),
                allowances: space_allowances(&s),
                pass: cert.is_tree,
                table: Some(Table::scalars(&results)),
                results,
            })
        }
        Command::LensScan { space, scan, .. } => {
            let s = read_space(space, tol)?;
            let cfg = scan.config()?;
            let profile = diamond_scan(&s, &cfg);
            let mut table = Table::new(&["nu", "big_r", "count"]);
            for b in &profile.histogram {
                table.push(vec![cell(b.nu), cell(b.big_r), b.count.to_string()]);
            }
            Ok(Outcome {
                config: json!({ "space": space, "scan": cfg }),
                allowances: space_allowances(&s),
                pass: true,
                results: to_value(&profile)?,
                table: Some(table),
            })
        }
        Command::Witness { space, x, y, r, s: rs, .. } => {
            let sp = read_space(space, tol)?;
            let w = hyp_distortion_witness(&sp, *x, *r, *y, *rs)?;
            let results = to_value(&w)?;
            Ok(Outcome {
                config: json!({ "space": space, "x": x, "y": y, "r": r, "s": rs }),
                allowances: space_allowances(&sp),
                pass: true,
                table: Some(Table::scalars(&results)),
                results,
            })
        }
        Command::LensBound { space, x, y, t, h, lambda, t_list, h_list, .. } => {
            let s = read_space(space, tol)?;
            match (x, y, t, h) {
                (Some(x), Some(y), Some(t), Some(h)) => {
                    let c = lens_diameter_check(&s, *x, *y, *t, *h, *lambda)?;
                    let results = to_value(&c)?;
                    Ok(Outcome {
                        config: json!({ "space": space, "x": x, "y": y, "t": t, "h": h, "lambda": lambda }),
                        allowances: space_allowances(&s),
                        pass: c.pass,
                        table: Some(Table::scalars(&results)),
                        results,
                    })
                }
                _ => {
                    let ts = parse_list(t_list, "t")?;
                    let hs = parse_list(h_list, "h")?;
                    let r = lens_bound_search(&s, &ts, &hs, *lambda);
                    let mut table = Table::new(&["x", "y", "t", "h", "diam", "bound", "pass"]);
                    if let Some(w) = &r.worst {
                        table.push(vec![
                            w.x.to_string(),
                            w.y.to_string(),
                            cell(w.t),
                            cell(w.h),
                            cell(w.diam),
                            cell(w.bound),
                            w.pass.to_string(),
                        ]);
                    }
                    Ok(Outcome {
                        config: json!({ "space": space, "lambda": lambda, "t_list": ts, "h_list": hs }),
                        allowances: space_allowances(&s),
                        pass: r.failures == 0,
                        results: to_value(&r)?,
                        table: Some(table),
                    })
                }
            }
        }
        Command::LoopIntegral { space, loop_file, f, pi, .. } => {
            let s = read_space(space, tol)?;
            let (lp, _) = read_loop(loop_file)?;
            let (fv, pv) = (field_arg(f, &s)?, field_arg(pi, &s)?);
            let r = loop_integral(&s, &lp, &fv, &pv)?;
            let mut table = Table::new(&["segment", "value"]);
            for (i, v) in r.segments.iter().enumerate() {
                table.push(vec![i.to_string(), cell(*v)]);
            }
            Ok(Outcome {
                config: json!({ "space": space, "loop": loop_file, "f": f, "pi": pi }),
                allowances: space_allowances(&s),
                pass: true,
                results: to_value(&r)?,
                table: Some(table),
            })
        }
        Command::Cone { space, loop_file, base, grid, lambda, map_out, .. } => {
            let s = read_space(space, tol)?;
            let (lp, _) = read_loop(loop_file)?;
            let map = cone_extension(&s, &lp, *base, *grid)?;
            let lip_loop = lp.lip(&s);
            let bound = (8.0 * lambda + 12.0) * lip_loop + 2.0 * map.grid.spacing;
            let boundary_ok = boundary_reproduces_loop(&map, &lp)?;
            let inner_ok = inner_disc_constant(&map, *base);
            if let Some(path) = map_out {
                let space_ref = fs::canonicalize(space)?.to_string_lossy().into_owned();
                fs::write(path, to_json(&map_file(&map, Some(space_ref)))?)?;
            }
            let results = json!({
                "grid_n": grid,
                "spacing": map.grid.spacing,
                "lip_loop": lip_loop,
                "lip_est": map.lip_est,
                "bound": bound,
                "boundary_reproduces_loop": boundary_ok,
                "inner_disc_constant": inner_ok,
            });
            Ok(Outcome {
                config: json!({ "space": space, "loop": loop_file, "base": base, "grid": grid, "lambda": lambda }),
                allowances: space_allowances(&s),
                pass: map.lip_est <= bound && boundary_ok && inner_ok,
                table: Some(Table::scalars(&results)),
                results,
            })
        }
        Command::MdField { map, space, dirs, tau, ladder, .. } => {
            let (s, m) = read_map(map, space.as_deref(), tol)?;
            let ladder_steps = ladder
                .split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|e| Error::InvalidInput(format!("bad ladder entry {v:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let cfg = MdConfig { directions: *dirs, ladder: ladder_steps };
            let field = md_field(&s, &m, &cfg)?;
            let semi = seminorm_check(&field);
            let deg = degeneracy_field(&field, *tau)?;
            let degenerate: std::collections::HashSet<usize> = deg.mask.iter().copied().collect();
            let mut table = Table::new(&["node", "x", "y", "min", "max", "converged", "degenerate"]);
            for n in &field.nodes {
                let p = m.grid.position(n.node);
                table.push(vec![
                    n.node.to_string(),
                    cell(p[0]),
                    cell(p[1]),
                    cell(n.min),
                    cell(n.max),
                    n.converged.to_string(),
                    degenerate.contains(&n.node).to_string(),
                ]);
            }
            let results = json!({
                "nodes": field.nodes.len(),
                "converged": field.converged_count(),
                "spacing": field.spacing,
                "lip_est": field.lip_est,
                "tolerance": field.tolerance,
                "seminorm": {
                    "converged_nodes": semi.converged_nodes,
                    "within_tolerance": semi.within_tolerance,
                    "fraction_within": semi.fraction_within,
                    "max": semi.max,
                },
                "degeneracy": {
                    "tau": deg.tau,
                    "converged_nodes": deg.converged_nodes,
                    "degenerate_nodes": deg.degenerate_nodes,
                    "fraction_degenerate": deg.fraction_degenerate,
                },
            });
            Ok(Outcome {
                config: json!({ "map": map, "space": space, "dirs": dirs, "tau": tau, "ladder": cfg.ladder }),
                allowances: space_allowances(&s),
                pass: true,
                results,
                table: Some(table),
            })
        }
        Command::Stokes { map, space, f, pi, .. } => {
            let (s, m) = read_map(map, space.as_deref(), tol)?;
            let (fv, pv) = (field_arg(f, &s)?, field_arg(pi, &s)?);
            let r = stokes_check(&s, &m, &fv, &pv)?;
            let results = to_value(&r)?;
            Ok(Outcome {
                config: json!({ "map": map, "space": space, "f": f, "pi": pi }),
                allowances: space_allowances(&s),
                pass: true,
                table: Some(Table::scalars(&results)),
                results,
            })
        }
        Command::LensDemo { r1, h_list, samples, seed, .. } => {
            let hs = parse_list(h_list, "h")?;
            let curve = lens_blowup_curve(*r1, &hs)?;
            let sampled = hs
                .iter()
                .map(|&h| euclidean_lens_diameter(*r1, h, *samples, *seed))
                .collect::<Result<Vec<_>>>()?;
            let mut table = Table::new(&["h", "diam", "ratio", "sampled"]);
            for (c, s) in curve.iter().zip(&sampled) {
                table.push(vec![cell(c.h), cell(c.diam), cell(c.ratio), cell(s.sampled)]);
            }
            Ok(Outcome {
                config: json!({ "r1": r1, "h_list": hs, "samples": samples, "seed": seed }),
                allowances: json!({}),
                pass: true,
                results: json!({ "curve": curve, "sampled": sampled }),
                table: Some(table),
            })
        }
        Command::Rescale { space, scales, scan, .. } => {
            let s = read_space(space, tol)?;
            let sigmas = parse_list(scales, "scales")?;
            if sigmas.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidInput("scales must be positive".into()));
            }
            let cfg = scan.config()?;
            let profiles = rescale_sweep(&s, &sigmas, &cfg)?;
            let mut table = Table::new(&["sigma", "sup_gap_add", "sup_lambda_mult", "pairs_scanned"]);
            for p in &profiles {
                table.push(vec![cell(p.scale), cell(p.sup_gap_add), cell(p.sup_lambda_mult), p.pairs_scanned.to_string()]);
            }
            Ok(Outcome {
                config: json!({ "space": space, "scales": sigmas, "scan": cfg }),
                allowances: space_allowances(&s),
                pass: true,
                results: to_value(&profiles)?,
                table: Some(table),
            })
        }
        Command::Generate { spec, out } => {
            let text = if spec.trim_start().starts_with('{') { spec.clone() } else { fs::read_to_string(spec)? };
            let gspec: GeneratorSpec = serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            let s = generate(&gspec)?;
            if out.extension().and_then(|e| e.to_str()) == Some("csv") {
                let mut buf = Vec::new();
                write_matrix_csv(&s, &mut buf)?;
                fs::write(out, buf)?;
            } else {
                fs::write(out, to_json(&json!({ "matrix": s.to_rows(), "labels": s.labels() }))?)?;
            }
            let results = json!({ "n": s.len(), "diameter": s.diameter(), "written": out });
            Ok(Outcome {
                config: json!({ "spec": gspec, "out": out }),
                allowances: space_allowances(&s),
                pass: true,
                table: Some(Table::scalars(&results)),
                results,
            })
        }
    }
}

fn emit(output: &Output, body: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, body)?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = write!(stderr, "{e}");
            let report = ErrorReport {
                schema: SCHEMA,
                version: VERSION,
                command: String::new(),
                error: json!({ "kind": "Usage", "message": e.kind().to_string() }),
            };
            let _ = stdout.write_all(to_json(&report).unwrap_or_default().as_bytes());
            return 2;
        }
    };
    let name = cli.command.name();
    let output = cli.command.output();
    let started = Instant::now();
    let outcome = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(pool) => pool.install(|| execute(&cli.command, cli.tol_metric)),
        Err(e) => Err(Error::InvalidInput(format!("cannot build thread pool: {e}"))),
    };
    let rendered = outcome.and_then(|o| {
        let body = if output.csv {
            let mut buf = Vec::new();
            o.table.unwrap_or_else(|| Table::scalars(&o.results)).write(&mut buf)?;
            buf
        } else {
            let mut config = o.config;
            if let Value::Object(m) = &mut config {
                m.insert("tol_metric".into(), json!(cli.tol_metric));
            }
            let report = RunReport {
                schema: SCHEMA,
                version: VERSION,
                command: name.to_string(),
                config,
                allowances: o.allowances,
                pass: o.pass,
                results: o.results,
                wall_time_ms: cli.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
            };
            to_json(&report)?.into_bytes()
        };
        Ok((o.pass, body))
    });
    match rendered.and_then(|(pass, body)| emit(&output, &body, stdout).map(|_| pass)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            let report = ErrorReport { schema: SCHEMA, version: VERSION, command: name.to_string(), error: error_object(&e) };
            let _ = stdout.write_all(to_json(&report).unwrap_or_default().as_bytes());
            2
        }
    }
}
