use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use monoflow::facets::facet_trajectory;
use monoflow::io::report::{compare_table, facet_table};
use monoflow::io::schema::{parse_scenario, preset_names, preset_text};
use monoflow::io::{compare, report, RunArchive};
use monoflow::oracles::{
    fine_grid_reference, heat_fourier, one_sided_stationary, tv_vee_facet, OracleSolution,
};
use monoflow::solver::{epsilon_convergence_report, run_regularized};
use monoflow::verify::{verify_series, Suite, Verdict, VerifyTolerances};
use monoflow::{run, BoundaryEvaluator, Method, Scenario};

#[derive(Parser)]
#[command(name = "monoflow", version, about = "Diffusion with piecewise-linear maximal monotone flux laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or bundled preset and write a run archive.
    Run(RunArgs),
    /// Check a run archive against the a-priori properties.
    Verify(VerifyArgs),
    /// Difference norms between two runs, or a run and an oracle. Each side is
    /// a run archive, a scenario file or a preset.
    Compare(CompareArgs),
    /// Regularized runs over a list of epsilons with the fitted order.
    SweepEpsilon(SweepArgs),
    /// Facet trajectory of a run archive as CSV.
    Facets(FacetsArgs),
    /// Evaluate a reference solution.
    Oracle(OracleArgs),
    /// List the bundled presets, or print one.
    Presets { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Prox,
    Regularized,
}

#[derive(Args)]
struct ScenarioOverrides {
    /// Keep every k-th step.
    #[arg(long)]
    snapshots: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Comma-separated epsilon schedule.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    #[arg(long)]
    tol_prox: Option<f64>,
    #[arg(long)]
    tol_flux: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_substeps: Option<usize>,
}

impl ScenarioOverrides {
    fn apply(&self, s: &mut Scenario) {
        if let Some(k) = self.snapshots {
            s.snapshot_every = k;
        }
        if let Some(m) = self.method {
            s.method = match m {
                MethodArg::Prox => Method::Prox,
                MethodArg::Regularized => Method::Regularized,
            };
        }
        if let Some(e) = &self.epsilons {
            s.epsilon_schedule = e.clone();
        }
        let t = &mut s.tolerances;
        t.tol_prox = self.tol_prox.unwrap_or(t.tol_prox);
        t.tol_flux = self.tol_flux.unwrap_or(t.tol_flux);
        t.max_iters = self.max_iters.unwrap_or(t.max_iters);
        t.max_substeps = self.max_substeps.unwrap_or(t.max_substeps);
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML file or preset name.
    scenario: String,
    #[arg(long, default_value = "run")]
    out: PathBuf,
    #[command(flatten)]
    overrides: ScenarioOverrides,
}

#[derive(Args)]
struct VerifyTolArgs {
    #[arg(long)]
    tol_bv: Option<f64>,
    #[arg(long)]
    tol_contraction: Option<f64>,
    #[arg(long)]
    tol_convexity: Option<f64>,
    #[arg(long)]
    tol_energy: Option<f64>,
    #[arg(long = "tol-flux-bound")]
    tol_flux: Option<f64>,
    #[arg(long)]
    tol_growth: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    run: PathBuf,
    /// all, bv, contraction, convexity, energy, flux or growth.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Second archive for the contraction check.
    #[arg(long)]
    against: Option<PathBuf>,
    #[command(flatten)]
    tol: VerifyTolArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleName {
    HeatFourier,
    TvVee,
    OneSided,
    FineGrid,
}

#[derive(Args)]
struct OracleOptions {
    /// Fourier modes.
    #[arg(long, default_value_t = 200)]
    modes: usize,
    /// Kink location of the vee.
    #[arg(long, default_value_t = 0.5)]
    center: f64,
    /// Refinement factor of the fine-grid reference.
    #[arg(long, default_value_t = 4)]
    factor: usize,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: Option<PathBuf>,
    #[arg(long, value_enum)]
    oracle: Option<OracleName>,
    #[command(flatten)]
    oracle_opts: OracleOptions,
    /// Directory for plain columnar plot data.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Rows shown in the table.
    #[arg(long, default_value_t = 20)]
    rows: usize,
}

#[derive(Args)]
struct SweepArgs {
    scenario: String,
    #[command(flatten)]
    overrides: ScenarioOverrides,
    /// Write one archive per epsilon below this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FacetsArgs {
    run: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(value_enum)]
    name: OracleName,
    /// Scenario file or preset supplying data (not needed for tv-vee).
    #[arg(long)]
    scenario: Option<String>,
    /// `t` or `t,x`; without `x` the solution is sampled on `--n` nodes.
    #[arg(long, value_delimiter = ',', num_args = 1..=2, required = true)]
    at: Vec<f64>,
    #[arg(long, default_value_t = 101)]
    n: usize,
    #[command(flatten)]
    opts: OracleOptions,
}

fn load_scenario(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    let text = if path.exists() {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    } else if let Some(t) = preset_text(spec) {
        t.to_string()
    } else {
        bail!(
            "{spec} is neither a file nor a preset (presets: {})",
            preset_names().join(", ")
        );
    };
    let mut s = parse_scenario(&text).with_context(|| format!("parsing {spec}"))?;
    if s.name == "unnamed" {
        s.name = path.file_stem().map_or(spec.into(), |n| n.to_string_lossy().into());
    }
    Ok(s)
}

fn read_archive(dir: &Path) -> Result<RunArchive> {
    RunArchive::read(dir).with_context(|| format!("reading run archive {}", dir.display()))
}

// A run archive directory, or a scenario file or preset that is run on the spot.
fn load_run(spec: &Path) -> Result<(Scenario, monoflow::TimeSeries)> {
    if spec.join("scenario.toml").is_file() {
        let ar = read_archive(spec)?;
        return Ok((ar.scenario, ar.series));
    }
    let s = load_scenario(&spec.to_string_lossy())?;
    let series = run(&s)?.series;
    Ok((s, series))
}

fn constant(b: &BoundaryEvaluator, side: &str) -> Result<f64> {
    match b {
        BoundaryEvaluator::Constant(v) => Ok(*v),
        BoundaryEvaluator::Table(_) => bail!("the heat oracle needs a constant {side} boundary value"),
    }
}

fn build_oracle(name: OracleName, s: Option<&Scenario>, o: &OracleOptions) -> Result<OracleSolution> {
    let need = || s.context("this oracle needs a scenario");
    Ok(match name {
        OracleName::TvVee => tv_vee_facet(o.center)?,
        OracleName::HeatFourier => {
            let s = need()?;
            heat_fourier(&s.initial, constant(&s.left, "left")?, constant(&s.right, "right")?, o.modes)?
        }
        OracleName::OneSided => one_sided_stationary(&need()?.initial)?,
        OracleName::FineGrid => fine_grid_reference(need()?, o.factor)?,
    })
}

fn cmd_run(a: RunArgs) -> Result<ExitCode> {
    let mut s = load_scenario(&a.scenario)?;
    a.overrides.apply(&mut s);
    let start = Instant::now();
    let out = run(&s)?;
    let wall = start.elapsed().as_secs_f64();
    let archive = RunArchive::new(s, out, wall);
    archive.write(&a.out)?;
    let last = archive.series.last();
    println!(
        "{}: {} snapshots to t = {} in {:.3} s -> {}",
        archive.scenario.name,
        archive.series.len(),
        last.t,
        wall,
        a.out.display()
    );
    println!(
        "final: energy {:.6e}  bv {:.6e}  max|omega| {:.6e}",
        last.diagnostics.energy, last.diagnostics.bv, last.diagnostics.max_abs_flux
    );
    if let Some(c) = &archive.convergence {
        for (e, d) in &c.entries {
            println!("epsilon {e:<10} L2 to finest {d:.6e}");
        }
        if let Some(p) = c.fitted_order() {
            println!("fitted order {p:.3}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: VerifyArgs) -> Result<ExitCode> {
    let suite = Suite::parse(&a.suite).with_context(|| format!("unknown suite {}", a.suite))?;
    let ar = read_archive(&a.run)?;
    let other = a.against.as_deref().map(read_archive).transpose()?;
    let mut tol = VerifyTolerances::for_method(ar.series.method);
    tol.bv = a.tol.tol_bv.unwrap_or(tol.bv);
    tol.contraction = a.tol.tol_contraction.unwrap_or(tol.contraction);
    tol.convexity = a.tol.tol_convexity.unwrap_or(tol.convexity);
    tol.energy = a.tol.tol_energy.unwrap_or(tol.energy);
    tol.flux = a.tol.tol_flux.unwrap_or(tol.flux);
    tol.growth = a.tol.tol_growth.unwrap_or(tol.growth);
    let reports = verify_series(
        &ar.series,
        &ar.scenario,
        other.as_ref().map(|o| &o.series),
        suite,
        &tol,
    )?;
    println!("archive {} (scenario {})", a.run.display(), &ar.fingerprint[..12]);
    print!("{}", monoflow::io::report::invariant_table(&reports));
    let failed = reports.iter().any(|r| r.verdict == Verdict::Fail);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn cmd_compare(a: CompareArgs) -> Result<ExitCode> {
    let (sa, series) = load_run(&a.a)?;
    let r = match (&a.b, a.oracle) {
        (Some(b), None) => {
            let (_, other) = load_run(b)?;
            print!("{}", compare_table(&compare(&series, &other)?));
            return Ok(ExitCode::SUCCESS);
        }
        (None, Some(name)) => {
            let o = build_oracle(name, Some(&sa), &a.oracle_opts)?;
            report(&series, &sa.graph, Some(&o), Vec::new())?
        }
        (None, None) => report(&series, &sa.graph, None, Vec::new())?,
        (Some(_), Some(_)) => bail!("give either a second run or --oracle, not both"),
    };
    print!("{}", r.to_text(a.rows));
    if let Some(dir) = &a.plot_dir {
        r.write_plot_data(dir)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode> {
    let mut s = load_scenario(&a.scenario)?;
    a.overrides.apply(&mut s);
    s.method = Method::Regularized;
    s.validate()?;
    let mut all = Vec::new();
    for &eps in &s.epsilon_schedule {
        let start = Instant::now();
        let series = run_regularized(&s, eps)?;
        let wall = start.elapsed().as_secs_f64();
        println!("epsilon {eps:<10} {:.3} s", wall);
        if let Some(dir) = &a.out {
            let mut one = s.clone();
            one.epsilon_schedule = vec![eps];
            let out = monoflow::RunOutput { series: series.clone(), convergence: None };
            RunArchive::new(one, out, wall).write(&dir.join(format!("eps_{eps}")))?;
        }
        all.push(series);
    }
    let rep = epsilon_convergence_report(&all)?;
    println!("{:>12} {:>14}", "epsilon", "L2_to_finest");
    for (e, d) in &rep.entries {
        println!("{e:>12} {d:>14.6e}");
    }
    match rep.fitted_order() {
        Some(p) => println!("fitted order {p:.3}"),
        None => println!("fitted order undefined"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_facets(a: FacetsArgs) -> Result<ExitCode> {
    let ar = read_archive(&a.run)?;
    let rows = facet_trajectory(&ar.series, &ar.scenario.graph, None)?;
    let text = facet_table(&rows, ',');
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(a: OracleArgs) -> Result<ExitCode> {
    let s = a.scenario.as_deref().map(load_scenario).transpose()?;
    let o = build_oracle(a.name, s.as_ref(), &a.opts)?;
    let t = a.at[0];
    if !o.is_valid_at(t) {
        bail!("{} oracle is valid only up to t = {}", o.provenance().as_str(), o.valid_until());
    }
    if let Some(&x) = a.at.get(1) {
        println!("{}", o.eval(x, t));
    } else {
        let u = o.sample(a.n, t)?;
        println!("x,u");
        let h = 1.0 / (a.n - 1) as f64;
        for (i, v) in u.values().iter().enumerate() {
            println!("{},{}", i as f64 * h, v);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_presets(name: Option<String>) -> Result<ExitCode> {
    match name {
        Some(n) => print!("{}", preset_text(&n).with_context(|| format!("no preset {n}"))?),
        None => {
            for n in preset_names() {
                println!("{n}");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => cmd_compare(a),
        Command::SweepEpsilon(a) => cmd_sweep(a),
        Command::Facets(a) => cmd_facets(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Presets { name } => cmd_presets(name),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
