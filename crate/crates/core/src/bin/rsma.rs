use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rsma::analytic::{asymptotic_report, closed_form_report, throughput, Method, Target};
use rsma::montecarlo::{
    default_grid, estimate_outage_with, validate_against_closed_form, McOptions, Scheme, StageCoupling,
    DEFAULT_SEED, DEFAULT_SWEEP_SAMPLES, DEFAULT_VALIDATION_SAMPLES,
};
use rsma::sweep::{
    axis_range, emit, load_config, load_spec, run_sweep, series_path, write_csv, write_json, Axis,
    OutputFormat, SweepResult, SweepSpec,
};
use rsma::{OperatingPoint, SystemConfig};

/// Outage and throughput analysis of two-user uplink RSMA.
#[derive(Parser)]
#[command(name = "rsma", version)]
struct Cli {
    /// More log output (-v, -vv).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; missing keys take the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Monte Carlo samples per point.
    #[arg(long)]
    samples: Option<u64>,
    /// Channel draws per SIC stage: independent or shared.
    #[arg(long, default_value = "independent")]
    coupling: StageCoupling,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn base(&self) -> Result<SystemConfig> {
        Ok(match &self.config {
            Some(p) => load_config(p)?,
            None => SystemConfig::default(),
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one operating point with every method.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Skip the simulation.
        #[arg(long)]
        no_mc: bool,
    },
    /// Sweep one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Built-in sweep: fig1 … fig5.
        #[arg(long, conflicts_with_all = ["spec", "axis"])]
        preset: Option<String>,
        /// TOML sweep description.
        #[arg(long, conflicts_with = "axis")]
        spec: Option<PathBuf>,
        #[arg(long, requires_all = ["from", "to", "step"])]
        axis: Option<Axis>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Comma-separated subset of closed_form, asymptotic, monte_carlo.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        /// Comma-separated subset of RSMA, NOMA.
        #[arg(long, value_delimiter = ',')]
        schemes: Option<Vec<Scheme>>,
        /// Output file; stdout when absent. Multi-series presets write
        /// `<stem>.<label>.<ext>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// csv or json; defaults to the --out extension, else csv.
        #[arg(long)]
        format: Option<OutputFormat>,
    },
    /// Compare closed forms with simulation over the 60-point grid.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Write the full table as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 1 unless ≥95% of rows have |z| ≤ 3 and all have |z| ≤ 4.
        #[arg(long)]
        strict: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    let threads = match &cmd {
        Cmd::Analyze { common, .. } | Cmd::Sweep { common, .. } | Cmd::Validate { common, .. } => common.threads,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().context("thread pool")?;
    }
    match cmd {
        Cmd::Analyze { common, no_mc } => analyze(&common, no_mc),
        Cmd::Sweep { common, preset, spec, axis, from, to, step, methods, schemes, out, format } => {
            let base = common.base()?;
            let samples = common.samples.unwrap_or(DEFAULT_SWEEP_SAMPLES);
            let mut series: Vec<(String, SweepSpec)> = if let Some(name) = preset {
                let p = rsma::sweep::preset(&name, &base, common.seed, samples)?;
                p.series.into_iter().map(|s| (s.label, s.spec)).collect()
            } else if let Some(path) = spec {
                let mut s = load_spec(&path, &base)?;
                if common.samples.is_some() {
                    s.mc_samples = samples;
                }
                s.mc_seed = common.seed;
                vec![(String::new(), s)]
            } else if let Some(axis) = axis {
                let values = axis_range(from.unwrap(), to.unwrap(), step.unwrap())?
                    .into_iter()
                    .map(|x| axis.scalar(x))
                    .collect::<Result<_, _>>()?;
                let s = SweepSpec { mc_seed: common.seed, mc_samples: samples, ..SweepSpec::new(axis, values, base) };
                vec![(String::new(), s)]
            } else {
                bail!("give one of --preset, --spec or --axis/--from/--to/--step");
            };
            for (_, s) in &mut series {
                if let Some(m) = &methods {
                    s.methods = m.clone();
                }
                if let Some(sc) = &schemes {
                    s.schemes = sc.clone();
                }
                s.coupling = common.coupling;
            }
            sweep(series, out.as_deref(), format)
        }
        Cmd::Validate { common, out, strict } => validate(&common, out.as_deref(), strict),
    }
}

fn sweep(series: Vec<(String, SweepSpec)>, out: Option<&Path>, format: Option<OutputFormat>) -> Result<ExitCode> {
    let format = format.or_else(|| out.and_then(OutputFormat::from_path)).unwrap_or(OutputFormat::Csv);
    let multi = series.len() > 1;
    for (label, spec) in &series {
        let result = run_sweep(spec).with_context(|| format!("sweep {label}"))?;
        let n_infeasible = result.rows.iter().filter(|r| r.infeasible).count();
        if n_infeasible > 0 {
            log::info!("{label}: {n_infeasible} rows at infeasible operating points");
        }
        match out {
            Some(path) => {
                let path = if multi { series_path(path, label) } else { path.to_path_buf() };
                emit(&result, format, &path)?;
                eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
            }
            None => print_result(&result, format, multi.then_some(label.as_str()))?,
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn print_result(result: &SweepResult, format: OutputFormat, label: Option<&str>) -> Result<()> {
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    if let Some(label) = label {
        writeln!(w, "# {label}")?;
    }
    match format {
        OutputFormat::Csv => write_csv(result, &mut w)?,
        OutputFormat::Json => {
            write_json(result, &mut w)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

fn analyze(common: &Common, no_mc: bool) -> Result<ExitCode> {
    let cfg = common.base()?;
    let point = OperatingPoint::new(cfg)?;
    let cf = closed_form_report(&point);
    let asym = asymptotic_report(&point);
    let opts = McOptions::new(common.seed, common.samples.unwrap_or(DEFAULT_SWEEP_SAMPLES)).with_coupling(common.coupling);
    let (mc, noma) = if no_mc {
        (None, None)
    } else {
        (Some(estimate_outage_with(&cfg, Scheme::Rsma, &opts)?), Some(estimate_outage_with(&cfg, Scheme::Noma, &opts)?))
    };

    println!(
        "P1 = {:.2} dBm, P2 = {:.2} dBm, delta = {}, xi = ({}, {}), R = ({}, {}), phi = {}",
        cfg.user1.power_dbm(),
        cfg.user2.power_dbm(),
        cfg.env.csir_quality,
        cfg.sic_residual_1,
        cfg.sic_residual_2,
        cfg.rate_1,
        cfg.rate_2,
        cfg.rate_split
    );
    println!("thresholds: th1 = {:.6}, th21 = {:.6}, th22 = {:.6}", point.th.th_1, point.th.th_21, point.th.th_22);
    if cf.infeasible() {
        println!("note: the power split cannot support a stream rate; affected outages are 1");
    }
    println!();
    println!("{:<10} {:>14} {:>14} {:>24} {:>14}", "outage", "closed_form", "asymptotic", "monte_carlo (RSMA)", "NOMA (mc)");
    for t in Target::ALL {
        let mc_s = mc
            .as_ref()
            .and_then(|r| r.estimate(t))
            .map(|e| format!("{:.6e} ± {:.1e}", e.p_hat, e.std_err))
            .unwrap_or_else(|| "-".into());
        let noma_s = noma
            .as_ref()
            .and_then(|r| r.estimate(t).filter(|_| matches!(t, Target::User1 | Target::User2)))
            .map(|e| format!("{:.6e}", e.p_hat))
            .unwrap_or_else(|| "-".into());
        println!("{:<10} {:>14.6e} {:>14.6e} {:>24} {:>14}", t.as_str(), cf.get(t), asym.get(t), mc_s, noma_s);
    }
    let tp = throughput(&cfg, &cf);
    let tpa = throughput(&cfg, &asym);
    println!();
    println!("{:<10} {:>14} {:>14} {:>24} {:>14}", "throughput", "closed_form", "asymptotic", "monte_carlo (RSMA)", "NOMA (mc)");
    for (t, a, b) in [(Target::User1, tp.user1, tpa.user1), (Target::User2, tp.user2, tpa.user2)] {
        let pick = |r: &Option<rsma::montecarlo::McRun>| {
            r.as_ref().map(|r| if t == Target::User1 { r.throughput1 } else { r.throughput2 })
        };
        let mc_s = pick(&mc).map(|e| format!("{:.6} ± {:.1e}", e.value, e.std_err)).unwrap_or_else(|| "-".into());
        let noma_s = pick(&noma).map(|e| format!("{:.6}", e.value)).unwrap_or_else(|| "-".into());
        println!("{:<10} {:>14.6} {:>14.6} {:>24} {:>14}", t.as_str(), a, b, mc_s, noma_s);
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(common: &Common, out: Option<&Path>, strict: bool) -> Result<ExitCode> {
    let base = common.base()?;
    let opts = McOptions::new(common.seed, common.samples.unwrap_or(DEFAULT_VALIDATION_SAMPLES))
        .with_coupling(common.coupling);
    let table = validate_against_closed_form(&base, &default_grid(), &opts)?;
    println!(
        "{:<40} {:<9} {:>13} {:>13} {:>9} {:>7} {}",
        "point", "target", "closed_form", "monte_carlo", "std_err", "z", "result"
    );
    for r in &table.rows {
        println!(
            "{:<40} {:<9} {:>13.6e} {:>13.6e} {:>9.2e} {:>7.2} {}{}",
            r.point.label(),
            r.target.as_str(),
            r.closed_form,
            r.monte_carlo,
            r.std_err,
            r.z,
            if r.pass { "pass" } else { "FAIL" },
            if r.infeasible { " (infeasible)" } else { "" }
        );
    }
    let f3 = table.fraction_within(3.0);
    let f4 = table.fraction_within(4.0);
    println!(
        "\n{}/{} rows pass; |z|<=3: {:.1}%, |z|<=4: {:.1}% (n = {}, seed = {}, coupling = {:?})",
        table.pass_count(),
        table.rows.len(),
        100.0 * f3,
        100.0 * f4,
        table.n_samples,
        table.seed,
        table.coupling
    );
    if let Some(path) = out {
        let file = std::fs::File::create(path).with_context(|| path.display().to_string())?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &table)
            .with_context(|| path.display().to_string())?;
    }
    if strict && !(f3 >= 0.95 && f4 >= 1.0) {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
