//! `minsurf` command-line front end.
//!
//! Every run prints a JSON [`RunReport`] on stdout (and to `--json` when
//! given). Exit status: 0 when all checks pass (or the surfaces are
//! congruent), 1 when a check fails (or they are not), 2 on errors.

mod spec;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use minsurf::canonical::{canonical_nu, transform_to_canonical, InitialBranch, WDomain};
use minsurf::congruence::{
    decide_congruence, rotation_axis_angle, third_axis_angle, CongruenceOptions, CongruenceReport, Hint,
};
use minsurf::export::{to_csv, to_obj};
use minsurf::families::{check_system, check_system_exact};
use minsurf::surfgeom::{check_isothermal, check_minimal, fundamental_forms_with, ganchev_pde_residual, DiffMode, GeomOptions, Grid};
use minsurf::weierstrass::{chart_assoc, extract_pair, ExtractOptions, WeierstrassPair};
use minsurf::C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use spec::{Surface, SurfaceSpec};

#[derive(Parser, Debug)]
#[command(name = "minsurf", version, about = "Minimal surfaces: checks, canonical parameters, congruence, export")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Grid resolution `NxM` (or `N`).
    #[arg(long, global = true, value_name = "NxM")]
    grid: Option<String>,
    /// Parameter range `lo,hi` or `u0,u1,v0,v1`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    range: Option<String>,
    /// Override a tolerance, e.g. `--tol minimal=1e-6` (repeatable).
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    tol: Vec<String>,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// JSON config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Minimality, isothermality and (for degree-6 charts) the coefficient system.
    Check { spec: String },
    /// Decide whether two surfaces coincide up to a rigid motion.
    Congruent {
        a: String,
        b: String,
        /// Compare up to homothety.
        #[arg(long)]
        homothety: bool,
        /// Expected correspondence `z_B -> z_A`, e.g. `i*z`.
        #[arg(long)]
        hint: Option<String>,
    },
    /// Canonical principal parameters and the PDE check on `ν`.
    Canonical {
        spec: String,
        /// Anchor in the isothermal parameter.
        #[arg(long, default_value = "1")]
        z0: String,
        /// Canonical parameter assigned to the anchor.
        #[arg(long, default_value = "0")]
        w0: String,
        /// Radius of the disk domain around `w0`.
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
        /// Spacing of the `ν` grid.
        #[arg(long, default_value_t = 1e-2)]
        h: f64,
        #[arg(long, value_enum)]
        branch: Option<BranchArg>,
        /// CSV of the canonical `ν` grid.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an OBJ mesh or a CSV curvature grid.
    Export {
        spec: String,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the extension of `--out`.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Associated surface at angle `t`, with its metric compared to `t = 0`.
    Assoc {
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// OBJ mesh of the associated surface.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum BranchArg {
    Principal,
    Alternate,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Obj,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Tolerances {
    minimal: f64,
    isothermal: f64,
    system: f64,
    curvature: f64,
    cloud: f64,
    jet: f64,
    pde: f64,
    metric: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { minimal: 1e-8, isothermal: 1e-8, system: 1e-12, curvature: 1e-6, cloud: 1e-6, jet: 1e-7, pde: 1e-5, metric: 1e-8 }
    }
}

impl Tolerances {
    fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "minimal" => &mut self.minimal,
            "isothermal" => &mut self.isothermal,
            "system" => &mut self.system,
            "curvature" => &mut self.curvature,
            "cloud" => &mut self.cloud,
            "jet" => &mut self.jet,
            "pde" => &mut self.pde,
            "metric" => &mut self.metric,
            _ => bail!("unknown tolerance `{key}`"),
        };
        if !(value > 0.0 && value.is_finite()) {
            bail!("tolerance {key} must be positive");
        }
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    grid: Option<String>,
    range: Option<String>,
    tolerances: Tolerances,
    branch: Option<BranchArg>,
}

/// Settings after merging the config file and flags.
struct Settings {
    grid: Grid,
    tol: Tolerances,
    branch: Option<BranchArg>,
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X']).unwrap_or((s, s));
    let (n, m): (usize, usize) = (a.trim().parse().context("grid")?, b.trim().parse().context("grid")?);
    if n < 3 || m < 3 {
        bail!("grid resolution must be at least 3");
    }
    Ok((n, m))
}

fn parse_range(s: &str) -> Result<[f64; 4]> {
    let xs = s.split(',').map(|t| t.trim().parse::<f64>().context("range")).collect::<Result<Vec<_>>>()?;
    let r = match xs[..] {
        [lo, hi] => [lo, hi, lo, hi],
        [u0, u1, v0, v1] => [u0, u1, v0, v1],
        _ => bail!("range is `lo,hi` or `u0,u1,v0,v1`"),
    };
    if r.iter().any(|x| !x.is_finite()) || r[0] >= r[1] || r[2] >= r[3] {
        bail!("range must be finite and increasing");
    }
    Ok(r)
}

fn parse_complex(s: &str) -> Result<C64> {
    let e = minsurf::analytic::parse(s).map_err(|e| anyhow!("{e}"))?;
    e.eval(C64::new(0.0, 0.0)).map(|j| j.value).map_err(|e| anyhow!("{e}"))
}

fn settings(cli: &Cli) -> Result<Settings> {
    let cfg: Config = match &cli.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => Config::default(),
    };
    let (n, m) = parse_grid(cli.grid.as_deref().or(cfg.grid.as_deref()).unwrap_or("21x21"))?;
    let r = parse_range(cli.range.as_deref().or(cfg.range.as_deref()).unwrap_or("-1,1"))?;
    let mut tol = cfg.tolerances;
    for kv in &cli.tol {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--tol expects key=value"))?;
        tol.set(k.trim(), v.trim().parse().with_context(|| format!("tolerance {k}"))?)?;
    }
    let branch = match &cli.cmd {
        Cmd::Canonical { branch: Some(b), .. } => Some(*b),
        _ => cfg.branch,
    };
    Ok(Settings { grid: Grid::new((r[0], r[1]), (r[2], r[3]), n, m), tol, branch })
}

#[derive(Debug, Serialize)]
struct CheckEntry {
    name: String,
    value: f64,
    tolerance: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

/// Machine-readable outcome of one command; the key set is the same for
/// every command.
#[derive(Debug, Serialize)]
struct RunReport {
    command: String,
    inputs: Value,
    checks: Vec<CheckEntry>,
    decision: Value,
    outputs: Vec<String>,
    wall_time_s: f64,
    passed: bool,
    error: Option<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            inputs: Value::Null,
            checks: vec![],
            decision: Value::Null,
            outputs: vec![],
            wall_time_s: 0.0,
            passed: true,
            error: None,
        }
    }

    fn check(&mut self, name: &str, value: f64, tolerance: f64, passed: bool, detail: Option<String>) {
        self.passed &= passed;
        self.checks.push(CheckEntry { name: name.into(), value, tolerance, passed, detail });
    }
}

fn surface(text: &str) -> Result<(SurfaceSpec, Surface)> {
    let spec = SurfaceSpec::parse(text).with_context(|| format!("surface spec `{text}`"))?;
    let s = spec.resolve().with_context(|| format!("surface spec `{text}`"))?;
    Ok((spec, s))
}

fn grid_json(g: &Grid) -> Value {
    json!({ "u": [g.u0, g.u1], "v": [g.v0, g.v1], "nu": g.nu, "nv": g.nv })
}

fn weierstrass_of(s: &Surface) -> Result<WeierstrassPair> {
    match s {
        Surface::Pair(p) => Ok(p.clone()),
        other => {
            // the chart may be singular at the origin; try a few seeds
            let chart = other.chart();
            let mut last = None;
            for seed in [(0.0, 0.0), (0.5, 0.3), (-0.4, 0.6), (1.0, 1.0)] {
                match extract_pair(chart.as_ref(), seed, &ExtractOptions::default()) {
                    Ok(x) => return Ok(x.pair),
                    Err(e) => last = Some(e),
                }
            }
            Err(anyhow!("cannot extract a Weierstrass pair: {}", last.expect("seeds tried")))
        }
    }
}

fn write_output(report: &mut RunReport, path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    report.outputs.push(path.display().to_string());
    Ok(())
}

fn cmd_check(r: &mut RunReport, st: &Settings, text: &str) -> Result<()> {
    let (spec, s) = surface(text)?;
    r.inputs = json!({ "surface": spec, "grid": grid_json(&st.grid) });
    let opts = GeomOptions { minimal_tol: st.tol.minimal, isothermal_tol: st.tol.isothermal, ..Default::default() };
    let chart = s.chart();
    let m = check_minimal(chart.as_ref(), st.grid, &opts).map_err(|e| anyhow!("{e}"))?;
    r.check(
        "minimal",
        m.ratio,
        st.tol.minimal,
        m.passed,
        Some(format!("max|H| {:.3e}, max curvature {:.3e}, degenerate nodes {}", m.max_abs_h, m.max_curvature, m.degenerate_nodes)),
    );
    let iso = check_isothermal(chart.as_ref(), st.grid, &opts).map_err(|e| anyhow!("{e}"))?;
    r.check(
        "isothermal",
        iso.max_e_minus_g.max(iso.max_f),
        st.tol.isothermal,
        iso.passed,
        Some(format!("max|E-G|/(E+G) {:.3e}, max|F|/(E+G) {:.3e}", iso.max_e_minus_g, iso.max_f)),
    );
    if let Some(f) = s.family() {
        let sys = check_system(&f.coeffs).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        r.check("system", sys, st.tol.system, sys <= st.tol.system, None);
        let nonzero = check_system_exact(&f.exact).iter().filter(|x| !x.is_zero()).count();
        r.check("system_exact", nonzero as f64, 0.0, nonzero == 0, Some("equations with nonzero exact residual".into()));
    }
    Ok(())
}

fn cmd_congruent(r: &mut RunReport, st: &Settings, a: &str, b: &str, homothety: bool, hint: Option<&str>) -> Result<()> {
    let (spec_a, sa) = surface(a)?;
    let (spec_b, sb) = surface(b)?;
    r.inputs = json!({ "a": spec_a, "b": spec_b, "homothety": homothety, "hint": hint });
    let hint = match hint {
        Some(h) => {
            let e = minsurf::analytic::parse(h).map_err(|e| anyhow!("hint: {e}"))?;
            Some(Hint(Arc::new(move |z: C64| e.eval(z).map(|j| j.value).unwrap_or(C64::new(f64::NAN, f64::NAN)))))
        }
        None => None,
    };
    let opts = CongruenceOptions {
        curvature_tol: st.tol.curvature,
        cloud_tol: st.tol.cloud,
        jet_tol: st.tol.jet,
        hint,
        up_to_homothety: homothety,
        ..Default::default()
    };
    let rep: CongruenceReport = decide_congruence(&sa.input(), &sb.input(), &opts);
    let rel = if rep.cloud_diameter > 0.0 { rep.cloud_rms / rep.cloud_diameter } else { f64::INFINITY };
    r.check("curvature_residual", rep.curvature_residual, st.tol.curvature, rep.curvature_residual <= st.tol.curvature, None);
    r.check("cloud_rms_relative", rel, st.tol.cloud, rel <= st.tol.cloud, None);
    let rot = rep.rotation_matrix();
    let (axis, angle) = rotation_axis_angle(&rot);
    r.decision = json!({
        "congruent": rep.congruent,
        "rotation_axis": [axis.x, axis.y, axis.z],
        "rotation_angle": angle,
        "third_axis_angle": third_axis_angle(&rot, 1e-6),
        "report": rep,
    });
    r.passed &= rep.congruent;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_canonical(
    r: &mut RunReport,
    st: &Settings,
    text: &str,
    z0: &str,
    w0: &str,
    radius: f64,
    h: f64,
    out: Option<&Path>,
) -> Result<()> {
    let (spec, s) = surface(text)?;
    let (z0, w0) = (parse_complex(z0)?, parse_complex(w0)?);
    let n = st.grid.nu;
    r.inputs = json!({ "surface": spec, "z0": [z0.re, z0.im], "w0": [w0.re, w0.im], "radius": radius, "h": h, "n": n, "branch": st.branch });
    if !(radius > 0.0) || !(h > 0.0) {
        bail!("radius and h must be positive");
    }
    if h * (n - 1) as f64 / 2.0 >= radius {
        bail!("the ν grid (half-width {}) does not fit in the disk of radius {radius}", h * (n - 1) as f64 / 2.0);
    }
    let pair = weierstrass_of(&s)?;
    let branch = match st.branch {
        Some(BranchArg::Alternate) => InitialBranch::Alternate,
        _ => InitialBranch::Principal,
    };
    let cf = transform_to_canonical(&pair, WDomain::Disk { center: w0, radius }, w0, z0, branch).map_err(|e| anyhow!("{e}"))?;
    let field = canonical_nu(&cf, w0, h, n).map_err(|e| anyhow!("{e}"))?;
    let res = ganchev_pde_residual(&field.grid).map_err(|e| anyhow!("{e}"))?;
    r.check("pde_residual", res, st.tol.pde, res <= st.tol.pde, Some(format!("max|Δ ln ν + 2ν| on {n}x{n}, spacing {h}")));
    let p = cf.at(w0).map_err(|e| anyhow!("{e}"))?;
    r.decision = json!({
        "pair": { "f": pair.f.to_string(), "g": pair.g.to_string() },
        "initial_slope": [cf.initial_slope.re, cf.initial_slope.im],
        "gtilde_w0": [p.g.re, p.g.im],
        "nu_w0": p.nu,
        "nu_max": field.grid.max(),
        "zero_nodes": field.zero_nodes,
    });
    if let Some(path) = out {
        let mut csv = String::from("w_re,w_im,nu\n");
        let half = (n as f64 - 1.0) / 2.0;
        for j in 0..n {
            for i in 0..n {
                let (u, v) = (w0.re + (i as f64 - half) * h, w0.im + (j as f64 - half) * h);
                csv.push_str(&format!("{u:.12e},{v:.12e},{:.12e}\n", field.grid.at(i, j)));
            }
        }
        write_output(r, path, &csv)?;
    }
    Ok(())
}

fn cmd_export(r: &mut RunReport, st: &Settings, text: &str, out: &Path, format: Option<Format>) -> Result<()> {
    let (spec, s) = surface(text)?;
    let format = match format {
        Some(f) => f,
        None => match out.extension().and_then(|e| e.to_str()) {
            Some("obj") => Format::Obj,
            Some("csv") => Format::Csv,
            _ => bail!("cannot infer the format from {}; pass --format", out.display()),
        },
    };
    r.inputs = json!({ "surface": spec, "grid": grid_json(&st.grid), "format": format!("{format:?}").to_lowercase() });
    let chart = s.chart();
    let text = match format {
        Format::Obj => to_obj(chart.as_ref(), &st.grid).map_err(|e| anyhow!("{e}"))?,
        Format::Csv => to_csv(chart.as_ref(), &st.grid, &GeomOptions::default()).map_err(|e| anyhow!("{e}"))?,
    };
    write_output(r, out, &text)
}

fn cmd_assoc(r: &mut RunReport, st: &Settings, text: &str, t: &str, out: Option<&Path>) -> Result<()> {
    let (spec, s) = surface(text)?;
    let t = parse_complex(t)?;
    if t.im != 0.0 {
        bail!("t must be real");
    }
    let t = t.re;
    r.inputs = json!({ "surface": spec, "t": t, "grid": grid_json(&st.grid) });
    let pair = weierstrass_of(&s)?;
    let base = s.chart();
    let assoc = chart_assoc(&pair, t);
    let mut worst: f64 = 0.0;
    let mut degenerate = 0;
    let hstep = st.grid.default_step();
    for (u, v) in st.grid.nodes() {
        let f0 = fundamental_forms_with(base.as_ref(), u, v, hstep, DiffMode::Auto);
        let ft = fundamental_forms_with(&assoc, u, v, hstep, DiffMode::Auto);
        match (f0, ft) {
            (Ok(f0), Ok(ft)) => {
                let scale = f0.e + f0.g;
                worst = worst.max((ft.e - f0.e).abs().max((ft.f - f0.f).abs()).max((ft.g - f0.g).abs()) / scale);
            }
            _ => degenerate += 1,
        }
    }
    if degenerate == st.grid.nodes().len() {
        bail!("every grid node is degenerate");
    }
    r.check(
        "metric_deviation",
        worst,
        st.tol.metric,
        worst <= st.tol.metric,
        Some(format!("max |I_t - I_0| / (E+G) over the grid, {degenerate} degenerate nodes skipped")),
    );
    r.decision = json!({ "pair": { "f": pair.associated(t).f.to_string(), "g": pair.g.to_string() } });
    if let Some(path) = out {
        let obj = to_obj(&assoc, &st.grid).map_err(|e| anyhow!("{e}"))?;
        write_output(r, path, &obj)?;
    }
    Ok(())
}

fn run(cli: &Cli, r: &mut RunReport) -> Result<()> {
    let st = settings(cli)?;
    match &cli.cmd {
        Cmd::Check { spec } => cmd_check(r, &st, spec),
        Cmd::Congruent { a, b, homothety, hint } => cmd_congruent(r, &st, a, b, *homothety, hint.as_deref()),
        Cmd::Canonical { spec, z0, w0, radius, h, out, .. } => cmd_canonical(r, &st, spec, z0, w0, *radius, *h, out.as_deref()),
        Cmd::Export { spec, out, format } => cmd_export(r, &st, spec, out, *format),
        Cmd::Assoc { spec, t, out } => cmd_assoc(r, &st, spec, t, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match &cli.cmd {
        Cmd::Check { .. } => "check",
        Cmd::Congruent { .. } => "congruent",
        Cmd::Canonical { .. } => "canonical",
        Cmd::Export { .. } => "export",
        Cmd::Assoc { .. } => "assoc",
    };
    let t0 = Instant::now();
    let mut report = RunReport::new(name);
    let outcome = run(&cli, &mut report);
    if let Err(e) = &outcome {
        report.passed = false;
        report.error = Some(format!("{e:#}"));
        eprintln!("error: {e:#}");
    }
    report.wall_time_s = t0.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{text}");
    if let Some(path) = &cli.json {
        if let Err(e) = fs::write(path, &text) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    match (outcome.is_ok(), report.passed) {
        (false, _) => ExitCode::from(2),
        (true, true) => ExitCode::SUCCESS,
        (true, false) => ExitCode::from(1),
    }
}
