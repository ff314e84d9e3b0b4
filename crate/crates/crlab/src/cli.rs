//! Batch driver behind the `crlab` binary.

use crate::assembly::{assemble_div_coupling, assemble_pressure_mass, scalar_stiffness, write_matrix};
use crate::error::{Error, Result};
use crate::femspace::{build_dofmap, Space};
use crate::infsup::{min_norm_right_inverse, StokesSystem};
use crate::mesh::generators::from_spec;
use crate::mesh::io::read_mesh;
use crate::mesh::topology::{analyze, classify_critical, extension_sequence, DEFAULT_ETA};
use crate::mesh::Triangulation;
use crate::rightinverse::{acute_extension_step, pi_cr, CrSpace, RightInverseReport};
use crate::verify::run_verify;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "crlab", version, about = "Crouzeix-Raviart Stokes experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical-point classification, fans and extension depth as JSON.
    AnalyzeMesh(MeshArgs),
    /// Inf-sup constants over a range of degrees.
    InfsupSweep(SweepArgs),
    /// Runs the identity and invariant checks.
    Verify(VerifyArgs),
    /// Applies the constructive right inverse to a random pressure.
    RightInverse(RightInverseArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct MeshSource {
    /// Mesh file with `v x y` and `t i j k` lines.
    #[arg(long, conflicts_with = "gen")]
    pub mesh: Vec<PathBuf>,
    /// Generator spec, e.g. `crisscross:2`.
    #[arg(long)]
    pub gen: Vec<String>,
    /// Reorient clockwise triangles instead of rejecting them.
    #[arg(long)]
    pub fix_orientation: bool,
}

impl MeshSource {
    /// Named meshes in command-line order.
    pub fn load(&self) -> Result<Vec<(String, Triangulation)>> {
        let mut out = Vec::new();
        for p in &self.mesh {
            out.push((p.display().to_string(), read_mesh(p, self.fix_orientation)?));
        }
        for g in &self.gen {
            out.push((g.clone(), from_spec(g)?));
        }
        if out.is_empty() {
            return Err(Error::InvalidInput("one of --mesh or --gen is required".into()));
        }
        Ok(out)
    }

    fn single(&self) -> Result<(String, Triangulation)> {
        let mut v = self.load()?;
        if v.len() != 1 {
            return Err(Error::InvalidInput("exactly one mesh is expected".into()));
        }
        Ok(v.remove(0))
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub source: MeshSource,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: MeshSource,
    #[arg(long, default_value_t = 1)]
    pub kmin: usize,
    #[arg(long, default_value_t = 8)]
    pub kmax: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Writes the stiffness, coupling and pressure mass matrices per mesh
    /// and degree into this directory.
    #[arg(long)]
    pub dump_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 30)]
    pub kmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RightInverseArgs {
    #[command(flatten)]
    pub source: MeshSource,
    #[arg(long, short)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also solve the minimum-norm problem for comparison.
    #[arg(long)]
    pub compare: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
}

pub fn cmd_analyze_mesh(a: &MeshArgs) -> Result<String> {
    let (_, m) = a.source.single()?;
    json(&analyze(&m, a.eta)?)
}

/// One row of the inf-sup sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mesh: String,
    pub k: usize,
    pub dim_v: Option<usize>,
    pub dim_p: Option<usize>,
    pub c: Option<f64>,
    /// `c sqrt(log(k + 1))`
    pub scaled: Option<f64>,
    pub residual: Option<f64>,
    pub seconds: Option<f64>,
    /// `c log(k + 1)^((1 + L) / 2)` with `L` the extension depth.
    pub scaled_l: Option<f64>,
    pub status: String,
}

/// `c` on the last mesh divided by `c` on the first, per degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRatio {
    pub k: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub ratios: Vec<SweepRatio>,
}

fn dump(dir: &Path, name: &str, m: &Triangulation, k: usize) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let vel = build_dofmap(m, k, Space::CrouzeixRaviart, true)?;
    let pres = build_dofmap(m, k, Space::Pressure, false)?;
    let stem: String = name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    let files = [
        ("stiffness", scalar_stiffness(m, &vel.scalar_map())),
        ("coupling", assemble_div_coupling(m, &vel, &pres)?.matrix),
        ("pressure_mass", assemble_pressure_mass(m, &pres).matrix),
    ];
    for (what, a) in files {
        let p = dir.join(format!("{stem}_k{k}_{what}.txt"));
        std::fs::write(&p, write_matrix(&a)).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

pub fn infsup_sweep(a: &SweepArgs) -> Result<SweepReport> {
    if a.kmin < 1 || a.kmax < a.kmin {
        return Err(Error::InvalidInput(format!("bad degree range {}..{}", a.kmin, a.kmax)));
    }
    let meshes = a.source.load()?;
    let mut rows = Vec::new();
    for (name, m) in &meshes {
        let depth = extension_sequence(m).ok().map(|s| s.steps());
        for k in a.kmin..=a.kmax {
            if let Some(dir) = &a.dump_dir {
                dump(dir, name, m, k)?;
            }
            let row = match StokesSystem::new(m, k).and_then(|s| s.infsup()) {
                Ok(r) => SweepRow {
                    mesh: name.clone(),
                    k,
                    dim_v: Some(r.dim_v),
                    dim_p: Some(r.dim_p),
                    c: Some(r.c),
                    scaled: Some(r.scaled),
                    residual: Some(r.residual),
                    seconds: Some(r.seconds),
                    scaled_l: depth.map(|l| r.scaled_with((1.0 + l as f64) / 2.0)),
                    status: format!("{:?}", r.status),
                },
                Err(e @ (Error::EmptyVelocitySpace | Error::EmptyPressureSpace)) => SweepRow {
                    mesh: name.clone(),
                    k,
                    dim_v: None,
                    dim_p: None,
                    c: None,
                    scaled: None,
                    residual: None,
                    seconds: None,
                    scaled_l: None,
                    status: match e {
                        Error::EmptyVelocitySpace => "EmptyVelocitySpace".into(),
                        _ => "EmptyPressureSpace".into(),
                    },
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    let mut ratios = Vec::new();
    if meshes.len() >= 2 {
        let (first, last) = (&meshes[0].0, &meshes[meshes.len() - 1].0);
        for k in a.kmin..=a.kmax {
            let c = |name: &str| rows.iter().find(|r| r.mesh == name && r.k == k).and_then(|r| r.c);
            if let (Some(c0), Some(c1)) = (c(first), c(last)) {
                ratios.push(SweepRatio { k, ratio: c1 / c0 });
            }
        }
    }
    Ok(SweepReport { rows, ratios })
}

pub const CSV_HEADER: &str = "mesh,k,dim_v,dim_p,c,scaled,residual,seconds,scaled_l,status";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv(r: &SweepReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for row in &r.rows {
        let fields = [
            row.mesh.clone(),
            row.k.to_string(),
            opt(row.dim_v),
            opt(row.dim_p),
            opt(row.c),
            opt(row.scaled),
            opt(row.residual),
            opt(row.seconds),
            opt(row.scaled_l),
            row.status.clone(),
        ];
        s.push_str(&fields.join(","));
        s.push('\n');
    }
    s
}

pub fn cmd_infsup_sweep(a: &SweepArgs) -> Result<String> {
    let r = infsup_sweep(a)?;
    match a.format {
        Format::Csv => {
            for x in &r.ratios {
                eprintln!("ratio k={} {}", x.k, x.ratio);
            }
            Ok(sweep_csv(&r))
        }
        Format::Json => json(&r),
    }
}

/// Random mean-zero pressure for `space`.
pub fn random_pressure(space: &CrSpace, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..space.dim_p()).map(|_| rng.random_range(-1.0..1.0)).collect();
    space.remove_mean(&mut q);
    q
}

pub fn cmd_right_inverse(a: &RightInverseArgs) -> Result<String> {
    let (name, m) = a.source.single()?;
    let space = CrSpace::new(&m, a.k)?;
    let q = random_pressure(&space, a.seed);
    let c = classify_critical(&m, a.eta)?;
    if !c.classes().acute.is_empty() && a.k % 2 == 1 {
        // acute corners: report the last extension step instead
        let seq = extension_sequence(&m)?;
        if seq.steps() == 0 {
            return Err(Error::PreconditionViolated("acute critical points inside the first extension level".into()));
        }
        let st = acute_extension_step(&space, &seq.levels[seq.steps() - 1], &q)?;
        return json(&serde_json::json!({ "mesh": name, "k": a.k, "eta": a.eta, "extension": st }));
    }
    let p = pi_cr(&space, &q, a.eta)?;
    let ratio = if a.compare { Some(min_norm_right_inverse(&m, a.k, &q)?.1) } else { None };
    json(&RightInverseReport::new(&name, &p, ratio))
}

/// Returns the report text and whether every check passed.
pub fn cmd_verify(a: &VerifyArgs) -> Result<(String, bool)> {
    let r = run_verify(a.kmax, a.seed);
    let text = match a.format {
        Format::Json => json(&r)?,
        Format::Csv => {
            let mut s = String::from("name,passed,max_error,tolerance,seconds\n");
            for c in &r.checks {
                s.push_str(&format!("{},{},{},{},{}\n", c.name, c.passed, c.max_error, c.tolerance, c.seconds));
            }
            s
        }
    };
    Ok((text, r.passed))
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::AnalyzeMesh(a) => emit(&a.out, &cmd_analyze_mesh(a)?).map(|_| 0),
        Command::InfsupSweep(a) => emit(&a.out, &cmd_infsup_sweep(a)?).map(|_| 0),
        Command::RightInverse(a) => emit(&a.out, &cmd_right_inverse(a)?).map(|_| 0),
        Command::Verify(a) => {
            let (text, ok) = cmd_verify(a)?;
            emit(&a.out, &text)?;
            Ok(if ok { 0 } else { 2 })
        }
    }
}

/// Parses `args` (including the program name) and runs the command;
/// returns the process exit code.
pub fn run_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_with(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let a = SweepArgs {
            source: MeshSource { mesh: vec![], gen: vec!["crisscross:1".into()], fix_orientation: false },
            kmin: 1,
            kmax: 2,
            out: None,
            format: Format::Csv,
            dump_dir: None,
        };
        let csv = sweep_csv(&infsup_sweep(&a).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("crisscross:1,1,"));
    }

    #[test]
    fn single_triangle_marker() {
        let a = SweepArgs {
            source: MeshSource { mesh: vec![], gen: vec!["single".into()], fix_orientation: false },
            kmin: 1,
            kmax: 1,
            out: None,
            format: Format::Csv,
            dump_dir: None,
        };
        let r = infsup_sweep(&a).unwrap();
        assert_eq!(r.rows[0].status, "EmptyVelocitySpace");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_with(["crlab", "analyze-mesh"]), 1);
        assert_eq!(run_with(["crlab", "analyze-mesh", "--gen", "nosuch"]), 1);
        assert_eq!(run_with(["crlab", "bogus"]), 1);
        assert_eq!(run_with(["crlab", "analyze-mesh", "--gen", "crisscross:1", "--eta", "0.9"]), 1);
    }
}
