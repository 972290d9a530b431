use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spir_core::audit::{MonteCarlo, DEFAULT_CEILING};
use spir_core::harness::{
    cmd_audit, cmd_encode, cmd_rates, cmd_reconstruct, cmd_run, exit_code, from_canonical_str, rates_csv, rates_table,
    to_canonical_string, AuditSelection, RateGrid, RunConfig, ShareBundle, EXIT_AUDIT, EXIT_OK,
};
use spir_core::protocol::RandomnessMode;
use spir_core::{Error, Result};

/// Symmetric private retrieval over MDS-coded storage.
#[derive(Parser)]
#[command(name = "spir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Retrieve one file through the simulated network.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively check privacy and correctness on a small instance.
    Audit {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated subset of correctness, user, database.
        #[arg(long, default_value = "correctness,user,database")]
        checks: String,
        /// Sample this many points instead of enumerating.
        #[arg(long, value_name = "SAMPLES")]
        monte_carlo: Option<u64>,
        #[arg(long, default_value_t = 0)]
        mc_seed: u64,
        /// Largest universe to enumerate.
        #[arg(long, default_value_t = DEFAULT_CEILING)]
        ceiling: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate exact capacities.
    Rates {
        /// Range of N, as `A..B` (inclusive) or a single value.
        #[arg(long, value_parser = parse_range)]
        n: (u32, u32),
        #[arg(long, value_parser = parse_range)]
        m: (u32, u32),
        #[arg(long, value_parser = parse_range)]
        k: (u32, u32),
        #[arg(long)]
        csv: bool,
        /// Add a |PIR - SPIR| column.
        #[arg(long)]
        convergence: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a database into node shares.
    Encode {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a database from M node shares.
    Reconstruct {
        /// Output of `encode`, or any file with `params` and `nodes`.
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated 1-based node indices to use.
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    stripes: Option<usize>,
    #[arg(long)]
    theta: Option<usize>,
    #[arg(long)]
    seed_user: Option<u64>,
    #[arg(long)]
    seed_node: Option<u64>,
    #[arg(long)]
    seed_db: Option<u64>,
    /// full, zeroed or partial=J.
    #[arg(long)]
    randomness: Option<String>,
    /// Parity rows of the generator, e.g. `1,0;1,1`.
    #[arg(long)]
    parity: Option<String>,
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (s, s),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| format!("bad range '{s}'"))?;
    let hi: u32 = hi.trim().parse().map_err(|_| format!("bad range '{s}'"))?;
    if lo > hi {
        return Err(format!("empty range '{s}'"));
    }
    Ok((lo, hi))
}

fn parse_parity(s: &str) -> Result<Vec<Vec<u32>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse().map_err(|_| Error::InvalidParams(format!("bad parity symbol '{v}'"))))
                .collect()
        })
        .collect()
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => from_canonical_str(&read(path)?)?,
            None => {
                let missing = |name: &str| Error::InvalidParams(format!("--{name} is required without --config"));
                RunConfig::new(
                    self.q.ok_or_else(|| missing("q"))?,
                    self.n.ok_or_else(|| missing("n"))?,
                    self.m.ok_or_else(|| missing("m"))?,
                    self.k.ok_or_else(|| missing("k"))?,
                )
            }
        };
        c.q = self.q.unwrap_or(c.q);
        c.n = self.n.unwrap_or(c.n);
        c.m = self.m.unwrap_or(c.m);
        c.k = self.k.unwrap_or(c.k);
        c.stripes = self.stripes.unwrap_or(c.stripes);
        c.theta = self.theta.unwrap_or(c.theta);
        c.user_seed = self.seed_user.unwrap_or(c.user_seed);
        c.node_seed = self.seed_node.unwrap_or(c.node_seed);
        c.db_seed = self.seed_db.unwrap_or(c.db_seed);
        if let Some(mode) = &self.randomness {
            c.randomness = mode.parse::<RandomnessMode>()?;
        }
        if let Some(parity) = &self.parity {
            c.parity = Some(parse_parity(parity)?);
        }
        Ok(c)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_checks(s: &str) -> Result<AuditSelection> {
    let mut sel = AuditSelection { correctness: false, user_privacy: false, database_privacy: false };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "correctness" => sel.correctness = true,
            "user" => sel.user_privacy = true,
            "database" | "db" => sel.database_privacy = true,
            "all" => sel = AuditSelection::all(),
            other => return Err(Error::InvalidParams(format!("unknown check '{other}'"))),
        }
    }
    Ok(sel)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, out } => {
            let output = cmd_run(&config.resolve()?)?;
            emit(out.as_deref(), &to_canonical_string(&output)?)?;
            let r = &output.rate_report;
            eprintln!(
                "decoded file {}: rate {} (capacity {}), secrecy {} (floor {})",
                output.transcript.theta, r.achieved_rate, r.capacity, r.achieved_secrecy, r.secrecy_floor
            );
            Ok(EXIT_OK)
        }
        Command::Audit { config, checks, monte_carlo, mc_seed, ceiling, out } => {
            let config = config.resolve()?;
            let mc = monte_carlo.map(|samples| MonteCarlo { samples, seed: mc_seed });
            let output = cmd_audit(&config, parse_checks(&checks)?, mc, ceiling)?;
            emit(out.as_deref(), &to_canonical_string(&output)?)?;
            if let Some(c) = &output.correctness {
                eprintln!("correctness: {} ({} points, {})", verdict(c.passed), c.universe_size, label(c.exact));
            }
            for c in &output.report.checks {
                let node = c.node.map(|n| format!(" node {n}")).unwrap_or_default();
                eprintln!("{:?}{node}: {} ({})", c.check, verdict(c.independent), label(c.is_exact()));
                if let Some(w) = &c.witness {
                    eprintln!("  witness: {w:?}");
                }
            }
            Ok(if output.passed { EXIT_OK } else { EXIT_AUDIT })
        }
        Command::Rates { n, m, k, csv, convergence, out } => {
            let rows = cmd_rates(&RateGrid { n, m, k })?;
            let text = if csv { rates_csv(&rows, convergence) } else { rates_table(&rows, convergence) };
            emit(out.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Encode { config, out } => {
            let output = cmd_encode(&config.resolve()?)?;
            emit(out.as_deref(), &to_canonical_string(&output)?)?;
            Ok(EXIT_OK)
        }
        Command::Reconstruct { input, nodes, out } => {
            let bundle: ShareBundle = from_canonical_str(&read(&input)?)?;
            let output = cmd_reconstruct(&bundle, nodes.as_deref())?;
            emit(out.as_deref(), &to_canonical_string(&output)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn label(exact: bool) -> &'static str {
    if exact {
        "exact"
    } else {
        "statistical"
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
