use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ltesched::analytics::{bets_closed_form, format_sig, opportunistic_gain, write_ecdf_csv};
use ltesched::channel::{db_to_linear, mean_cell_sinr, PowerDelayProfile};
use ltesched::ftgs::{self, FtgsParameters, SolverOptions};
use ltesched::sim::{
    self, load_scenarios, sinr_span_scenario, Scenario, SimReport, SpanTarget, UeProfile,
};
use ltesched::{Error, SchedulerConfig, SchedulerKind, SnrGap};

const OUT_DIR_ENV: &str = "LTESCHED_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "ltesched",
    version,
    about = "LTE downlink MAC scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the FTGS weights, access probabilities and conditional rates.
    SolveFtgs {
        /// Comma-separated average SINRs in dB, or a file with one per line.
        #[arg(long, value_name = "LIST|FILE")]
        sinrs_db: String,
        #[arg(long, default_value_t = 5e-5)]
        ber: f64,
        /// Bandwidth in Hz. α/W and R̄/W do not depend on it.
        #[arg(long, default_value_t = 4.8e6)]
        bandwidth: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (channel, scheduler) combination of a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out_dir: PathBuf,
        /// Also write the per-RBG allocation log of every run.
        #[arg(long)]
        log_allocations: bool,
    },
    /// Opportunistic gain of FTGS over BETS across SINR spans or UE counts.
    Sweep {
        #[arg(long, value_enum)]
        vary: Vary,
        /// Comma-separated values of the varied quantity.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Scenario supplying channel, duration, seed and scheduler mode.
        #[arg(long)]
        scenario_base: PathBuf,
        /// UE counts when varying mu_db (one CSV each).
        #[arg(long, value_delimiter = ',', default_value = "10")]
        n_ues: Vec<usize>,
        /// Mean cell SINR when varying n_ues.
        #[arg(long, default_value_t = 23.0)]
        mu_db: f64,
        #[arg(long, default_value_t = 25.0)]
        gamma_max_db: f64,
        #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Print the rms delay spread and tap table of a power delay profile.
    ChannelInfo {
        /// Built-in name (pedestrian, vehicular, urban) or a file path.
        #[arg(long)]
        pdp: String,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Vary {
    #[value(name = "mu_db")]
    MuDb,
    #[value(name = "n_ues")]
    NUes,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => Failure::Io(io.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SolveFtgs {
            sinrs_db,
            ber,
            bandwidth,
            tol,
            out,
        } => solve_ftgs(&sinrs_db, ber, bandwidth, tol, out.as_deref()),
        Command::Run {
            scenario,
            out_dir,
            log_allocations,
        } => run(&scenario, &out_dir, log_allocations),
        Command::Sweep {
            vary,
            values,
            scenario_base,
            n_ues,
            mu_db,
            gamma_max_db,
            out_dir,
        } => sweep(
            vary,
            &values,
            &scenario_base,
            &n_ues,
            mu_db,
            gamma_max_db,
            &out_dir,
        ),
        Command::ChannelInfo { pdp } => channel_info(&pdp),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn parse_sinr_list(arg: &str) -> Result<Vec<f64>, Failure> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        fs::read_to_string(path)?
    } else {
        arg.to_string()
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Failure::Config(format!("--sinrs-db: cannot parse {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(Failure::Config("--sinrs-db: no values".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Failure::Config(format!("--sinrs-db: non-finite value {v}")));
    }
    Ok(values)
}

fn write_ftgs_csv<W: Write>(mut w: W, sinrs_db: &[f64], params: &FtgsParameters) -> io::Result<()> {
    writeln!(w, "i,gamma_db,alpha,p,rbar_over_w")?;
    let alpha = params.alpha_per_hz();
    let rbar = params.rbar_per_hz();
    for (i, db) in sinrs_db.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            i + 1,
            format_sig(*db, 6),
            format_sig(alpha[i], 6),
            format_sig(params.p[i], 6),
            format_sig(rbar[i], 6)
        )?;
    }
    Ok(())
}

fn solve_ftgs(
    sinrs: &str,
    ber: f64,
    bandwidth: f64,
    tol: f64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let sinrs_db = parse_sinr_list(sinrs)?;
    let gap = SnrGap::from_ber(ber)?;
    let gamma_bars: Vec<f64> = sinrs_db.iter().map(|&d| db_to_linear(d)).collect();
    let opts = SolverOptions {
        tol,
        ..SolverOptions::default()
    };
    let params = match ftgs::solve_with(&gamma_bars, &gap, bandwidth, &opts) {
        Err(Error::SolverDivergence {
            iterations,
            max_residual,
            residuals,
        }) => {
            let list: Vec<String> = residuals.iter().map(|r| format_sig(*r, 6)).collect();
            return Err(Failure::Numerical(format!(
                "solver stopped after {iterations} iterations, max residual {}; residuals [{}]",
                format_sig(max_residual, 6),
                list.join(", ")
            )));
        }
        other => other?,
    };
    match out {
        Some(path) => write_ftgs_csv(fs::File::create(path)?, &sinrs_db, &params)?,
        None => write_ftgs_csv(io::stdout().lock(), &sinrs_db, &params)?,
    }
    let eta = params.guaranteed_efficiency();
    eprintln!(
        "sum p = {}, p*rbar/W = {} (residual {}, {} iterations)",
        format_sig(params.p.iter().sum(), 6),
        format_sig(eta[0], 6),
        format_sig(params.residual, 3),
        params.iterations
    );
    Ok(())
}

fn file_name(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn run(path: &Path, out_dir: &Path, log_allocations: bool) -> Result<(), Failure> {
    let mut scenarios = load_scenarios(path)?;
    for s in &mut scenarios {
        s.log_allocations |= log_allocations;
    }
    fs::create_dir_all(out_dir)?;
    let reports = sim::run_all(&scenarios)?;
    let name = file_name(&scenarios[0].name);
    let mut summary = fs::File::create(out_dir.join(format!("{name}-summary.csv")))?;
    writeln!(
        summary,
        "label,scheduler,mode,cell_throughput_bps,cell_efficiency,jain,worst_ue,worst_p_delta_1,worst_max_delta_ms"
    )?;
    println!(
        "{:<36} {:>14} {:>10} {:>8} {:>10}",
        "run", "cell [Mbit/s]", "eta", "jain", "P[d=1]"
    );
    for r in &reports {
        write_report(r, out_dir)?;
        let worst = &r.ues[r.worst_ue];
        let (p1, max_ms) = worst
            .delta
            .as_ref()
            .map(|d| (d.p_delta_1, d.max_ms))
            .unwrap_or((f64::NAN, f64::NAN));
        writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{}",
            r.label,
            r.scenario.scheduler.kind,
            r.scenario.scheduler.mode,
            format_sig(r.throughput.cell, 6),
            format_sig(r.cell_efficiency, 6),
            format_sig(r.throughput.jain, 6),
            r.worst_ue + 1,
            format_sig(p1, 6),
            format_sig(max_ms, 6)
        )?;
        println!(
            "{:<36} {:>14} {:>10} {:>8} {:>10}",
            r.label,
            format_sig(r.throughput.cell / 1e6, 6),
            format_sig(r.cell_efficiency, 6),
            format_sig(r.throughput.jain, 4),
            format_sig(p1, 4)
        );
    }
    eprintln!("wrote {} run(s) to {}", reports.len(), out_dir.display());
    Ok(())
}

fn write_report(r: &SimReport, out_dir: &Path) -> Result<(), Failure> {
    let base = file_name(&r.label);
    fs::write(out_dir.join(format!("{base}.json")), r.to_json())?;
    for (i, ue) in r.ues.iter().enumerate() {
        if let Some(d) = &ue.delta {
            let f = fs::File::create(out_dir.join(format!("{base}-ue{}-ecdf.csv", i + 1)))?;
            write_ecdf_csv(io::BufWriter::new(f), &d.conditional_ecdf())?;
        }
    }
    if let Some(log) = &r.allocation_log {
        let f = fs::File::create(out_dir.join(format!("{base}-allocations.csv")))?;
        log.write_csv(io::BufWriter::new(f))?;
    }
    Ok(())
}

struct SweepPoint {
    x: f64,
    n_ues: usize,
    mu_db: f64,
    eta_ftgs: f64,
    eta_bets: f64,
    phi: f64,
    eta_bets_closed: f64,
    phi_closed: f64,
}

fn sweep_point(
    base: &Scenario,
    x: f64,
    n: usize,
    mu_db: f64,
    gamma_max_db: f64,
) -> Result<SweepPoint, Failure> {
    let sinrs = sinr_span_scenario(gamma_max_db, SpanTarget::MeanCellDb(mu_db), n)?;
    let mut eta = [0.0; 2];
    for (slot, kind) in [SchedulerKind::Ftgs, SchedulerKind::Bets]
        .into_iter()
        .enumerate()
    {
        let mut s = base.clone();
        s.ues = sinrs
            .iter()
            .map(|&d| UeProfile { avg_sinr_db: d })
            .collect();
        s.scheduler = SchedulerConfig {
            kind,
            ftgs_alphas: None,
            ..base.scheduler.clone()
        };
        s.log_allocations = false;
        eta[slot] = sim::run(&s)?.cell_efficiency;
    }
    let gammas: Vec<f64> = sinrs.iter().map(|&d| db_to_linear(d)).collect();
    let closed = bets_closed_form(
        &gammas,
        &SnrGap::from_ber(base.target_ber)?,
        base.scheduled_bandwidth(),
    )?;
    Ok(SweepPoint {
        x,
        n_ues: n,
        mu_db: mean_cell_sinr(&sinrs)?,
        eta_ftgs: eta[0],
        eta_bets: eta[1],
        phi: opportunistic_gain(eta[0], eta[1])?,
        eta_bets_closed: closed.efficiency,
        phi_closed: opportunistic_gain(eta[0], closed.efficiency)?,
    })
}

fn sweep(
    vary: Vary,
    values: &[f64],
    base_path: &Path,
    n_ues: &[usize],
    mu_db: f64,
    gamma_max_db: f64,
    out_dir: &Path,
) -> Result<(), Failure> {
    let base = load_scenarios(base_path)?
        .into_iter()
        .next()
        .expect("a scenario file yields at least one run");
    let groups: Vec<(String, Vec<(f64, usize, f64)>)> = match vary {
        Vary::MuDb => n_ues
            .iter()
            .map(|&n| {
                (
                    format!("sweep-mu_db-n{n}.csv"),
                    values.iter().map(|&mu| (mu, n, mu)).collect(),
                )
            })
            .collect(),
        Vary::NUes => {
            let points = values
                .iter()
                .map(|&v| {
                    if v >= 2.0 && v.fract() == 0.0 {
                        Ok((v, v as usize, mu_db))
                    } else {
                        Err(Failure::Config(format!(
                            "--values: {v} is not a UE count >= 2"
                        )))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            vec![(
                format!("sweep-n_ues-mu{}.csv", format_sig(mu_db, 6)),
                points,
            )]
        }
    };
    fs::create_dir_all(out_dir)?;
    for (name, points) in groups {
        let results: Vec<SweepPoint> = points
            .par_iter()
            .map(|&(x, n, mu)| sweep_point(&base, x, n, mu, gamma_max_db))
            .collect::<Result<_, _>>()?;
        let path = out_dir.join(&name);
        let mut f = io::BufWriter::new(fs::File::create(&path)?);
        writeln!(
            f,
            "x,n_ues,mu_db,eta_ftgs,eta_bets,phi,eta_bets_closed,phi_closed"
        )?;
        for p in &results {
            writeln!(
                f,
                "{},{},{},{},{},{},{},{}",
                format_sig(p.x, 6),
                p.n_ues,
                format_sig(p.mu_db, 6),
                format_sig(p.eta_ftgs, 6),
                format_sig(p.eta_bets, 6),
                format_sig(p.phi, 6),
                format_sig(p.eta_bets_closed, 6),
                format_sig(p.phi_closed, 6)
            )?;
            println!(
                "N={:<3} mu={:>8} dB  eta_ftgs={:>8}  eta_bets={:>8}  phi={:>8}  phi_closed={:>8}",
                p.n_ues,
                format_sig(p.mu_db, 4),
                format_sig(p.eta_ftgs, 4),
                format_sig(p.eta_bets, 4),
                format_sig(p.phi, 4),
                format_sig(p.phi_closed, 4)
            );
        }
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn channel_info(arg: &str) -> Result<(), Failure> {
    let pdp = match PowerDelayProfile::builtin(arg) {
        Some(p) => p,
        None => {
            let path = Path::new(arg);
            if !path.is_file() {
                return Err(Failure::Config(format!(
                    "--pdp: {arg:?} is neither a built-in profile nor a file"
                )));
            }
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| arg.to_string());
            PowerDelayProfile::parse(name, &fs::read_to_string(path)?)?
        }
    };
    println!("profile: {}", pdp.name());
    println!(
        "tau_rms_ns: {}",
        format_sig(pdp.rms_delay_spread() * 1e9, 6)
    );
    print!("{pdp}");
    Ok(())
}
