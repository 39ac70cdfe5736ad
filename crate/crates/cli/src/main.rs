use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use conelab_core::asymptotics::{domain_membership, enumerate_asymptotics, Realization, Term};
use conelab_core::config::{Resolved, RunConfig, TermBlock};
use conelab_core::heat::{solve_heat, NoForcing};
use conelab_core::io::{self, Manifest};
use conelab_core::mellin::{mellin_norm, RadialField};
use conelab_core::powers::{
    find_shift, mode_operator_matrix, power_domain_probe, r_bound_estimate, sector_samples, sectorial_probe,
    term_profile,
};
use conelab_core::symbols::{ellipticity_warnings, pole_set, pole_set_power};
use conelab_core::tip::{decomposition_track, tail_terms};
use conelab_core::verify::{CriterionRegistry, Tolerances};
use conelab_core::Error;

/// Environment variable overriding the configured output directory.
const OUT_ENV: &str = "CONELAB_OUT";

#[derive(Parser)]
#[command(name = "conelab", version, about = "Singular expansions and heat flow on model cones")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON); the circle preset is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Conormal-symbol poles inside the weight strip, as CSV.
    Poles {
        #[command(flatten)]
        common: Common,
        /// Poles of the k-th power instead.
        #[arg(long)]
        power: Option<usize>,
    },
    /// Asymptotics basis and realization membership table, as JSON.
    Asymptotics {
        #[command(flatten)]
        common: Common,
    },
    /// Mellin-Sobolev norm of a field.
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        field: PathBuf,
    },
    /// Evolve the heat equation from a field; writes snapshots and a manifest.
    SolveHeat {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        u0: PathBuf,
    },
    /// Fit the tip expansion to every snapshot of a trajectory.
    FitTip {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        traj: PathBuf,
        /// Basis JSON as written by `asymptotics`.
        #[arg(long)]
        basis: Option<PathBuf>,
    },
    /// Power-domain refinement probe of a single term.
    Powers {
        #[command(flatten)]
        common: Common,
    },
    /// Resolvent bound along the sector rays, with shift search.
    SectorialProbe {
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Verify {
        #[command(flatten)]
        common: Common,
        /// `all`, a suite name or a comma-separated list of criterion ids.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

enum Failure {
    Config(String),
    Numerical(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Job {
    name: &'static str,
    cfg: RunConfig,
    out_dir: PathBuf,
    started: Instant,
    args: Vec<String>,
}

impl Job {
    fn new(name: &'static str, common: &Common) -> Result<Self, Failure> {
        let cfg = match &common.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::preset(),
        };
        let out_dir = std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        Ok(Job {
            name,
            cfg,
            out_dir,
            started: Instant::now(),
            args: std::env::args().collect(),
        })
    }

    /// `--out` when given, otherwise `default` inside the output directory.
    fn target(&self, common: &Common, default: &str) -> PathBuf {
        common.out.clone().unwrap_or_else(|| self.out_dir.join(default))
    }

    fn manifest(&self) -> Manifest {
        let mut m = Manifest::new(self.name, self.args.clone(), self.cfg.to_json(), self.cfg.seed);
        m.wall_time_s = self.started.elapsed().as_secs_f64();
        m
    }

    /// Write a file and a manifest next to it.
    fn emit(&self, path: &Path, text: &str, mut manifest: Manifest) -> Outcome {
        let dir = parent_dir(path);
        io::create_dir(&dir)?;
        io::write_text(path, text)?;
        manifest.files = vec![file_name(path)];
        manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        manifest.write(&dir)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned())
}

fn json_text(v: &Value) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn poles(common: &Common, power: Option<usize>) -> Outcome {
    let job = Job::new("poles", common)?;
    let r = job.cfg.resolve()?;
    let ps = match power {
        None | Some(1) => pole_set(&r.spec, job.cfg.gamma, None)?,
        Some(k) => pole_set_power(&r.spec, job.cfg.gamma, k, None)?,
    };
    for w in ellipticity_warnings(&r.spec) {
        eprintln!("warning: {w}");
    }
    let mut buf = Vec::new();
    io::write_poles(&mut buf, &ps)?;
    let text = String::from_utf8_lossy(&buf).into_owned();
    print!("{text}");
    job.emit(&job.target(common, "poles.csv"), &text, job.manifest())
}

fn asymptotics(common: &Common) -> Outcome {
    let job = Job::new("asymptotics", common)?;
    let r = job.cfg.resolve()?;
    let k = job.cfg.asymptotics.power;
    let ps = pole_set_power(&r.spec, job.cfg.gamma, k, None)?;
    let basis = enumerate_asymptotics(&ps);
    let realizations = job
        .cfg
        .asymptotics
        .realizations
        .iter()
        .map(|s| s.parse::<Realization>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Vec::new();
    for b in &basis.terms {
        for &real in &realizations {
            let m = match b.exact_term() {
                Some(t) => domain_membership(&t, real, job.cfg.gamma, &r.spec)?,
                None => domain_membership(&b.float_term(), real, job.cfg.gamma, &r.spec)?,
            };
            table.push(json!({
                "mode": b.mode, "rho": b.rho, "m": b.m,
                "realization": real.to_string(),
                "verdict": m.verdict, "explanation": m.explanation,
            }));
        }
    }
    let report = json!({
        "basis": io::basis_to_json(&basis),
        "membership": table,
        "warnings": ellipticity_warnings(&r.spec),
        "convention_pending": ps.convention_pending,
    });
    job.emit(&job.target(common, "asymptotics.json"), &json_text(&report)?, job.manifest())
}

fn read_field(r: &Resolved, path: &Path) -> Result<RadialField, Failure> {
    Ok(io::read_field(path, r.n(), r.cross_section.volume(), &r.modes)?)
}

fn norm(common: &Common, field: &Path) -> Outcome {
    let job = Job::new("norm", common)?;
    let r = job.cfg.resolve()?;
    let mut u = read_field(&r, field)?;
    let nb = &job.cfg.norm;
    u.cutoff = nb.cutoff;
    let value = mellin_norm(&u, nb.s, job.cfg.gamma, nb.p)?;
    println!("{}", io::fmt17(value));
    let report = json!({
        "norm": value, "s": nb.s, "p": nb.p, "gamma": job.cfg.gamma,
        "cutoff": nb.cutoff, "field": field.display().to_string(),
        "grid": u.grid,
    });
    job.emit(&job.target(common, "norm.json"), &json_text(&report)?, job.manifest())
}

fn solve(common: &Common, u0: &Path) -> Outcome {
    let job = Job::new("solve-heat", common)?;
    let r = job.cfg.resolve()?;
    let u = read_field(&r, u0)?;
    let hc = job.cfg.heat_config(u.grid);
    let traj = solve_heat(&u, &NoForcing, &hc)?;
    let dir = job.target(common, "traj");
    let files = io::write_trajectory(&dir, &traj)?;
    let mut m = job.manifest();
    m.files = files;
    m.times = Some(traj.times.clone());
    m.scheme = Some(json!({
        "method": "theta-scheme in log-radial coordinates",
        "theta": hc.theta, "dt": hc.dt, "rannacher_steps": hc.rannacher_steps,
        "grid": hc.grid, "outer_bc": hc.outer_bc, "u0": u0.display().to_string(),
    }));
    m.write(&dir)?;
    eprintln!("wrote {} snapshots to {}", traj.times.len(), dir.display());
    Ok(())
}

fn fit_tip(common: &Common, traj_dir: &Path, basis_path: Option<&Path>) -> Outcome {
    let manifest = Manifest::read(traj_dir)?;
    let mut job = Job::new("fit-tip", common)?;
    if common.config.is_none() {
        job.cfg = serde_json::from_value(manifest.config.clone())
            .map_err(|e| Failure::Config(format!("{}: manifest config: {e}", traj_dir.display())))?;
    }
    let r = job.cfg.resolve()?;
    let traj = io::read_trajectory(traj_dir, &manifest, r.n(), r.cross_section.volume(), &r.modes)?;
    let basis = match basis_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            let v: Value = serde_json::from_str(&text)?;
            io::basis_from_json(v.get("basis").unwrap_or(&v))?
        }
        None => enumerate_asymptotics(&pole_set_power(&r.spec, job.cfg.gamma, job.cfg.fit.basis_power, None)?),
    };
    let mut opts = job.cfg.fit.options();
    opts.tail = tail_terms(&r.spec, &basis, job.cfg.fit.tail_levels)?;
    let track = decomposition_track(&traj, &basis, &opts, job.cfg.fit.forcing_scale)?;
    for w in &track.warnings {
        eprintln!("warning: {w}");
    }
    let mut buf = Vec::new();
    io::write_fits(&mut buf, &track.fits)?;
    job.emit(
        &job.target(common, "fits.csv"),
        &String::from_utf8_lossy(&buf),
        job.manifest(),
    )
}

fn powers(common: &Common) -> Outcome {
    let job = Job::new("powers", common)?;
    let r = job.cfg.resolve()?;
    let pb = &job.cfg.powers;
    let tb = pb.term.clone().unwrap_or(TermBlock {
        rho: Complex64::new(0.0, 0.0),
        m: 0,
        mode: pb.mode.clone(),
    });
    let mode = r.mode(&tb.mode)?;
    let term = Term {
        rho: tb.rho,
        m: tb.m,
        group: mode.group,
        mode: tb.mode.clone(),
        c: Complex64::new(1.0, 0.0),
    };
    let profile = term_profile(&term, job.cfg.norm.cutoff);
    let report = power_domain_probe(&profile, &tb.mode, r.n(), mode.eigenvalue, job.cfg.gamma, &r.grid, &pb.probe)?;
    let symbolic = domain_membership(&term, Realization::Dd, job.cfg.gamma, &r.spec)?;
    println!("verdict: {:?}", report.verdict);
    let out = json!({"term": tb, "probe": report, "config": pb.probe, "symbolic_dd": symbolic});
    job.emit(&job.target(common, "powers.json"), &json_text(&out)?, job.manifest())
}

fn sectorial(common: &Common) -> Outcome {
    let job = Job::new("sectorial-probe", common)?;
    let r = job.cfg.resolve()?;
    let pb = &job.cfg.powers;
    let mode = r.mode(&pb.mode)?;
    let samples = sector_samples(pb.theta, pb.samples, pb.r_min, pb.r_max);
    let build = |c: f64| mode_operator_matrix(&pb.mode, r.n(), mode.eigenvalue, job.cfg.gamma, &r.grid, pb.outer_bc, c);
    let (shift, attempts, report) = match pb.shift {
        Some(c) => (c, Vec::new(), sectorial_probe(&build(c), pb.theta, &samples)?),
        None => {
            let s = find_shift(build, pb.theta, &samples, &pb.ladder)?;
            (s.shift, s.attempts, s.report)
        }
    };
    let rbound = if pb.r_terms > 0 {
        Some(r_bound_estimate(&build(shift), pb.theta, pb.r_terms, pb.r_trials.max(1), job.cfg.seed)?)
    } else {
        None
    };
    println!("shift {shift}: K = {}", io::fmt17(report.k));
    let out = json!({
        "mode": pb.mode, "gamma": job.cfg.gamma, "shift": shift,
        "ladder": pb.ladder, "attempts": attempts, "report": report, "r_bound": rbound,
    });
    job.emit(&job.target(common, "sectorial.json"), &json_text(&out)?, job.manifest())
}

fn verify(common: &Common, suite: &str) -> Outcome {
    let job = Job::new("verify", common)?;
    let registry = CriterionRegistry::default();
    let selected = registry.select(suite)?;
    let tol = Tolerances::new(job.cfg.verify.tolerances.clone());
    let mut reports = Vec::new();
    for c in selected {
        let rep = CriterionRegistry::run(c, &tol);
        println!("{}", rep.line());
        reports.push(rep);
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    let out = json!({"suite": suite, "criteria": reports});
    job.emit(&job.target(common, "verify.json"), &json_text(&out)?, job.manifest())?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("failed criteria: {failed:?}")))
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads {n}: {e}")))?;
    }
    match &cli.command {
        Command::Poles { common, power } => poles(common, *power),
        Command::Asymptotics { common } => asymptotics(common),
        Command::Norm { common, field } => norm(common, field),
        Command::SolveHeat { common, u0 } => solve(common, u0),
        Command::FitTip { common, traj, basis } => fit_tip(common, traj, basis.as_deref()),
        Command::Powers { common } => powers(common),
        Command::SectorialProbe { common } => sectorial(common),
        Command::Verify { common, suite } => verify(common, suite),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
