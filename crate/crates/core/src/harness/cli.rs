use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use super::bench::run_bench;
use super::config::{PolicyKind, RunConfig};
use super::sim::{run_simulation, run_verify_moments, write_csv, RunOutput};
use crate::alloc::PropxState;
use crate::baselines::{
    lb_horizon, run_lb_game, Benade2, BenadeParams, DeficitGreedy, ItemPolicy, PotentialPolicy,
    RoundRobin, UtilGreedy,
};
use crate::error::{Error, Result};
use crate::exact::{
    exp_policy, next_frontier, next_frontier_unpruned, parse_rational, ExpPolicy, Frontier,
    FrontierChain, SurplusState, DEFAULT_FRONTIER_CAP, DEFAULT_K_MAX,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "perpfair",
    version,
    about = "Perpetual online fairness experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a JSON-configured simulation and write its CSV trace.
    Simulate {
        config: PathBuf,
        /// Overrides the config's output path; stdout if neither is set.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a simulation and check the moment witness of every round.
    VerifyMoments { config: PathBuf },
    /// Play the adaptive lower-bound adversary against a policy.
    Lowerbound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        policy: String,
        /// Defaults to the proven horizon 4900 n c^2.
        #[arg(long)]
        max_rounds: Option<usize>,
    },
    /// Exact rational solver for the unit-scale game.
    Exact {
        #[command(subcommand)]
        cmd: ExactCommand,
    },
    /// Per-round timing of the potential rule across agent counts.
    Bench {
        #[arg(long, default_value_t = 2000)]
        rounds: usize,
    },
}

#[derive(Debug, Subcommand)]
enum ExactCommand {
    /// Rounds until a forced violation from a shifted-surplus state.
    Aux {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1")]
        c: String,
        /// Comma-separated surplus coordinates; defaults to `nc` each.
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: u32,
    },
    /// Points of `D^k` as CSV.
    Frontier {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        unpruned: bool,
    },
    /// Recipient chosen by the exact policy (0-based).
    Exp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long)]
        state: Option<String>,
        #[arg(long)]
        item: String,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: u32,
    },
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(cli.cmd, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Simulate { config, output } => {
            let cfg = RunConfig::load(&config)?;
            let run = run_simulation(&cfg)?;
            match output.or(cfg.output.clone()) {
                Some(path) => {
                    let mut f = BufWriter::new(
                        File::create(&path)
                            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
                    );
                    write_csv(&run.records, &mut f)?;
                    f.flush().map_err(io)?;
                    summarize(&run, out)?;
                }
                None => {
                    write_csv(&run.records, out)?;
                    summarize(&run, err)?;
                }
            }
            Ok(verdict(&run))
        }
        Command::VerifyMoments { config } => {
            let cfg = RunConfig::load(&config)?;
            let run = run_verify_moments(&cfg)?;
            summarize(&run, out)?;
            Ok(verdict(&run))
        }
        Command::Lowerbound {
            n,
            c,
            policy,
            max_rounds,
        } => lowerbound(n, c, &policy, max_rounds, out),
        Command::Exact { cmd } => exact(cmd, out),
        Command::Bench { rounds } => {
            for r in run_bench(rounds.max(1))? {
                let times: Vec<String> = r
                    .seconds_per_round
                    .iter()
                    .map(|s| format!("{s:.3e}"))
                    .collect();
                writeln!(
                    out,
                    "{} sizes={:?} sec_per_round=[{}] slope={:.3} expected=[{}, {}] {}",
                    r.name,
                    r.sizes,
                    times.join(", "),
                    r.slope,
                    r.range.0,
                    r.range.1,
                    if r.in_range() { "ok" } else { "outside" }
                )
                .map_err(io)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn verdict(run: &RunOutput) -> i32 {
    if run.checks.passed() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}

fn summarize(run: &RunOutput, w: &mut dyn Write) -> Result<()> {
    let c = &run.checks;
    writeln!(
        w,
        "rounds={} bound_violations={} growth_violations={} gmd_violations={} witness_rounds={} witness_failures={} worst_witness_violation={:e}",
        c.rounds,
        c.bound_violations,
        c.growth_violations,
        c.gmd_violations,
        c.witness_rounds,
        c.witness_failures,
        c.worst_witness_violation
    )
    .map_err(io)?;
    if let Some(m) = c.max_windowed_deficit {
        writeln!(w, "max_windowed_deficit={m:e}").map_err(io)?;
    }
    if let Some(f) = &c.first_failure {
        writeln!(w, "first_failure: {f}").map_err(io)?;
    }
    Ok(())
}

/// Builds one of the built-in item policies for the lower-bound game.
pub fn lb_policy(name: &str, n: usize, c: f64) -> Result<Box<dyn ItemPolicy>> {
    Ok(match PolicyKind::parse(name)? {
        PolicyKind::Potential => Box::new(PotentialPolicy::new(PropxState::new(n)?)),
        PolicyKind::RoundRobin => Box::new(RoundRobin),
        PolicyKind::UtilGreedy => Box::new(UtilGreedy),
        PolicyKind::DeficitGreedy => Box::new(DeficitGreedy),
        PolicyKind::Benade2 => Box::new(Benade2(BenadeParams::new(lb_horizon(n, c))?)),
        PolicyKind::ExpExact => Box::new(ExpPolicy::new(n, c, DEFAULT_K_MAX)?),
    })
}

fn lowerbound(
    n: usize,
    c: f64,
    policy: &str,
    max_rounds: Option<usize>,
    out: &mut dyn Write,
) -> Result<i32> {
    if n < 2 {
        return Err(Error::ConfigInvalid("n must be at least 2".into()));
    }
    if !(c >= 1.0) {
        return Err(Error::ConfigInvalid(format!(
            "c must be at least 1, got {c}"
        )));
    }
    let horizon = lb_horizon(n, c);
    let mut pol = lb_policy(policy, n, c)?;
    let rounds = max_rounds.unwrap_or(horizon as usize);
    let o = run_lb_game(pol.as_mut(), n, c, rounds)?;
    let within = o.violation_round.is_some_and(|r| r as u64 <= horizon);
    match o.violation_round {
        Some(r) => writeln!(out, "violation_round={r}"),
        None => writeln!(
            out,
            "violation_round=none rounds_played={}",
            o.rounds_played
        ),
    }
    .map_err(io)?;
    writeln!(
        out,
        "horizon={horizon} monitors={} transfer={}",
        if o.monitors.all_hold() {
            "ok"
        } else {
            "violated"
        },
        if o.transfer_holds() { "ok" } else { "violated" }
    )
    .map_err(io)?;
    Ok(if within && o.monitors.all_hold() && o.transfer_holds() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    })
}

fn surplus(n: usize, c: &str, state: Option<&str>) -> Result<SurplusState> {
    let s = match state {
        Some(s) => {
            let parts: Vec<&str> = s.split(',').collect();
            SurplusState::parse(&parts)?
        }
        None => SurplusState::initial(n, &parse_rational(c)?),
    };
    if s.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.n(),
        });
    }
    Ok(s)
}

fn exact(cmd: ExactCommand, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        ExactCommand::Aux { n, c, state, k_max } => {
            check_n(n)?;
            let x = surplus(n, &c, state.as_deref())?;
            match FrontierChain::new(n).aux(&x, k_max) {
                Ok(k) => writeln!(out, "{k}").map_err(io)?,
                Err(Error::KMaxExceeded(k)) => writeln!(out, ">{k}").map_err(io)?,
                Err(e) => return Err(e),
            }
        }
        ExactCommand::Frontier { n, k, unpruned } => {
            check_n(n)?;
            let mut d = Frontier::initial(n);
            for _ in 0..k {
                d = if unpruned {
                    next_frontier_unpruned(&d, DEFAULT_FRONTIER_CAP)?
                } else {
                    next_frontier(&d, DEFAULT_FRONTIER_CAP)?
                };
            }
            let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            writeln!(out, "{}", header.join(",")).map_err(io)?;
            for p in d.points() {
                let row: Vec<String> = p.coords().iter().map(ToString::to_string).collect();
                writeln!(out, "{}", row.join(",")).map_err(io)?;
            }
        }
        ExactCommand::Exp {
            n,
            c,
            state,
            item,
            k_max,
        } => {
            check_n(n)?;
            let x = surplus(n, &c, state.as_deref())?;
            let v = item
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            writeln!(out, "{}", exp_policy(&x, &v, n, k_max)?).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::ConfigInvalid("n must be at least 2".into()));
    }
    Ok(())
}
