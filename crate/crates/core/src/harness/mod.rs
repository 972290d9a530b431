//! Configuration, file formats and the commands behind the `spir` binary.
//!
//! Every command returns a serializable value; writing it out is left to the
//! caller. See [`json`] for the on-disk format.

pub mod json;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

pub use json::{from_canonical_str, rational_json, to_canonical_string, SCHEMA_VERSION};

use crate::audit::{self, AuditOptions, AuditReport, CorrectnessResult, MonteCarlo};
use crate::error::{Error, Result};
use crate::protocol::{run_round_on, RandomnessMode, Transcript};
use crate::rates::{measure, pir_capacity_mds, secrecy_floor, RateReport};
use crate::rng::{seeded, SeedDomain};
use crate::storage::{
    build_generator, encode, generator_from_parity, reconstruct, Database, GeneratorMatrix, NodeData, StorageParams,
};
use crate::{FpMatrix, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PROTOCOL: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SingularSystem | Error::ProtocolFailure(_) => EXIT_PROTOCOL,
        _ => EXIT_CONFIG,
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub q: u32,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    #[serde(default = "one")]
    pub stripes: usize,
    /// Requested file, 1-based.
    #[serde(default = "one")]
    pub theta: usize,
    #[serde(default)]
    pub user_seed: u64,
    #[serde(default)]
    pub node_seed: u64,
    #[serde(default)]
    pub db_seed: u64,
    /// Explicit database; `db_seed` is ignored when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub database: Option<Database>,
    #[serde(default)]
    pub randomness: RandomnessMode,
    /// Explicit parity rows `P` of the generator `[I | P]`, for fields too
    /// small for the built-in construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<Vec<Vec<u32>>>,
}

impl RunConfig {
    pub fn new(q: u32, n: usize, m: usize, k: usize) -> Self {
        RunConfig {
            q,
            n,
            m,
            k,
            stripes: 1,
            theta: 1,
            user_seed: 0,
            node_seed: 0,
            db_seed: 0,
            database: None,
            randomness: RandomnessMode::Full,
            parity: None,
        }
    }

    /// Storage parameters; fails on anything a retrieval cannot run with.
    pub fn params(&self) -> Result<StorageParams> {
        let p = StorageParams::new(self.q, self.n, self.m, self.k, self.stripes)?;
        if p.k < 2 {
            return Err(Error::TooFewFiles(p.k));
        }
        if self.theta == 0 || self.theta > p.k {
            return Err(Error::InvalidParams(format!("theta must be in 1..={}, got {}", p.k, self.theta)));
        }
        self.randomness.check(p.m)?;
        if let Some(db) = &self.database {
            db.check(&p)?;
        }
        Ok(p)
    }

    pub fn generator(&self, params: &StorageParams) -> Result<GeneratorMatrix> {
        match &self.parity {
            Some(parity) => generator_from_parity(params, parity),
            None => build_generator(params),
        }
    }

    pub fn database(&self, params: &StorageParams) -> Database {
        match &self.database {
            Some(db) => db.clone(),
            None => Database::random(params, &mut seeded(SeedDomain::Database, self.db_seed)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOutput {
    pub config: RunConfig,
    pub rate_report: RateReport,
    pub transcript: Transcript,
}

/// One retrieval through the simulated network.
pub fn cmd_run(config: &RunConfig) -> Result<RunOutput> {
    let params = config.params()?;
    let g = config.generator(&params)?;
    let db = config.database(&params);
    let transcript = run_round_on(&params, &g, &db, config.theta, config.user_seed, config.node_seed, config.randomness)?;
    if transcript.decoded_file != db.file(config.theta) {
        return Err(Error::ProtocolFailure(format!("decoded file {} does not match the stored file", config.theta)));
    }
    let rate_report = measure(&transcript)?;
    Ok(RunOutput { config: config.clone(), rate_report, transcript })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSelection {
    pub correctness: bool,
    pub user_privacy: bool,
    pub database_privacy: bool,
}

impl AuditSelection {
    pub fn all() -> Self {
        AuditSelection { correctness: true, user_privacy: true, database_privacy: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOutput {
    pub params: StorageParams,
    pub randomness: RandomnessMode,
    pub selection: AuditSelection,
    pub correctness: Option<CorrectnessResult>,
    pub report: AuditReport,
    /// Every exact verdict held. Statistical verdicts are reported only.
    pub passed: bool,
}

/// Run the selected audits. Without `monte_carlo` the universe must fit
/// under `ceiling`.
pub fn cmd_audit(
    config: &RunConfig,
    selection: AuditSelection,
    monte_carlo: Option<MonteCarlo>,
    ceiling: u128,
) -> Result<AuditOutput> {
    let params = config.params()?;
    let g = config.generator(&params)?;
    let opts = AuditOptions { randomness: config.randomness, masked_queries: true, ceiling, monte_carlo };

    let correctness =
        if selection.correctness { Some(audit::check_correctness(&params, &g, &opts)?) } else { None };
    let mut report = AuditReport::default();
    if selection.user_privacy {
        report.checks.extend(audit::audit_user_privacy(&params, &g, &opts)?.checks);
    }
    if selection.database_privacy {
        report.checks.extend(audit::leak_experiment(&params, &g, config.randomness, &opts)?.checks);
    }
    let passed = report.checks.iter().all(|c| c.independent || !c.is_exact())
        && correctness.as_ref().is_none_or(|c| c.passed || !c.exact);
    Ok(AuditOutput { params, randomness: config.randomness, selection, correctness, report, passed })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    #[serde(with = "rational_json")]
    pub spir_capacity: Rational,
    #[serde(with = "rational_json")]
    pub secrecy_floor: Rational,
    #[serde(with = "rational_json")]
    pub pir_capacity: Rational,
}

impl RateRow {
    /// `|PIR - SPIR|`.
    pub fn gap(&self) -> Rational {
        (&self.pir_capacity - &self.spir_capacity).abs()
    }
}

/// Inclusive ranges of N, M and K for a rate table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RateGrid {
    pub n: (u32, u32),
    pub m: (u32, u32),
    pub k: (u32, u32),
}

/// Exact rates for every `(N, M, K)` in the grid with `1 <= M < N`, `K >= 1`.
/// The SPIR column assumes enough common randomness.
pub fn cmd_rates(grid: &RateGrid) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    for n in grid.n.0..=grid.n.1 {
        for m in grid.m.0.max(1)..=grid.m.1.min(n.saturating_sub(1)) {
            let floor: Rational = secrecy_floor(n, m)?;
            let spir = crate::rates::spir_capacity(n, m, &floor)?;
            for k in grid.k.0.max(1)..=grid.k.1 {
                rows.push(RateRow {
                    n,
                    m,
                    k,
                    spir_capacity: spir.clone(),
                    secrecy_floor: floor.clone(),
                    pir_capacity: pir_capacity_mds(n, m, k)?,
                });
            }
        }
    }
    Ok(rows)
}

pub fn rates_csv(rows: &[RateRow], convergence: bool) -> String {
    let mut out = String::from("N,M,K,spir_capacity,secrecy_floor,pir_capacity");
    if convergence {
        out.push_str(",gap");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}", r.n, r.m, r.k, r.spir_capacity, r.secrecy_floor, r.pir_capacity));
        if convergence {
            out.push_str(&format!(",{}", r.gap()));
        }
        out.push('\n');
    }
    out
}

pub fn rates_table(rows: &[RateRow], convergence: bool) -> String {
    let mut header = vec!["N", "M", "K", "SPIR", "floor", "PIR"];
    if convergence {
        header.push("|PIR-SPIR|");
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut cells = vec![
                r.n.to_string(),
                r.m.to_string(),
                r.k.to_string(),
                r.spir_capacity.to_string(),
                r.secrecy_floor.to_string(),
                r.pir_capacity.to_string(),
            ];
            if convergence {
                cells.push(r.gap().to_string());
            }
            cells
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| body.iter().map(|row| row[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    for row in &body {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

/// A database together with its coded shares.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeOutput {
    pub params: StorageParams,
    /// Rows of the `M x N` generator.
    pub generator: Vec<Vec<u32>>,
    pub database: Database,
    pub nodes: Vec<NodeData>,
}

pub fn cmd_encode(config: &RunConfig) -> Result<EncodeOutput> {
    let params = StorageParams::new(config.q, config.n, config.m, config.k, config.stripes)?;
    if let Some(db) = &config.database {
        db.check(&params)?;
    }
    let g = config.generator(&params)?;
    let database = config.database(&params);
    let nodes = encode(&params, &database, &g)?;
    Ok(EncodeOutput { params, generator: g.to_rows(), database, nodes })
}

/// Shares to rebuild from. Extra fields in the input are ignored, so an
/// [`EncodeOutput`] file is accepted as is.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareBundle {
    pub params: StorageParams,
    /// Rows of the generator; the built-in construction when absent.
    #[serde(default)]
    pub generator: Option<Vec<Vec<u32>>>,
    pub nodes: Vec<NodeData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconstructOutput {
    pub params: StorageParams,
    pub nodes_used: Vec<usize>,
    pub database: Database,
}

/// Rebuild the database from the shares of `use_nodes` (1-based), or from
/// all shares in the bundle when `None`. Every supplied share, used or not,
/// must agree with the re-encoded result.
pub fn cmd_reconstruct(bundle: &ShareBundle, use_nodes: Option<&[usize]>) -> Result<ReconstructOutput> {
    let params = bundle.params;
    params.validate()?;
    let g = match &bundle.generator {
        Some(rows) => GeneratorMatrix::new(FpMatrix::from_rows(params.field(), rows.clone())?)?,
        None => build_generator(&params)?,
    };
    let chosen: Vec<NodeData> = match use_nodes {
        None => bundle.nodes.clone(),
        Some(idx) => idx
            .iter()
            .map(|&i| {
                bundle
                    .nodes
                    .iter()
                    .find(|d| d.node_index == i)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParams(format!("no share for node {i}")))
            })
            .collect::<Result<_>>()?,
    };
    let database = reconstruct(&params, &chosen, &g)?;
    let reencoded = encode(&params, &database, &g)?;
    for share in &bundle.nodes {
        if reencoded.get(share.node_index.wrapping_sub(1)) != Some(share) {
            return Err(Error::ProtocolFailure(format!("share of node {} is inconsistent with the others", share.node_index)));
        }
    }
    Ok(ReconstructOutput { params, nodes_used: chosen.iter().map(|d| d.node_index).collect(), database })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn run_round_trips_seeded_database() {
        let mut c = RunConfig::new(5, 4, 2, 3);
        c.theta = 2;
        c.db_seed = 9;
        let out = cmd_run(&c).unwrap();
        assert_eq!(out.transcript.download_count, 8);
        let p = c.params().unwrap();
        assert_eq!(out.transcript.decoded_file, c.database(&p).files[1]);
        assert!(out.rate_report.at_capacity);
    }

    #[test]
    fn config_errors_map_to_exit_2() {
        let e = cmd_run(&RunConfig::new(5, 4, 2, 1)).unwrap_err();
        assert_eq!(e, Error::TooFewFiles(1));
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        let e = cmd_run(&RunConfig::new(2, 3, 2, 2)).unwrap_err();
        assert!(matches!(e, Error::FieldTooSmall { .. }));
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        let mut c = RunConfig::new(5, 4, 2, 2);
        c.theta = 3;
        assert_eq!(exit_code(&cmd_run(&c).unwrap_err()), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::ProtocolFailure("x".into())), EXIT_PROTOCOL);
    }

    #[test]
    fn audit_outcomes() {
        let c = RunConfig::new(2, 2, 1, 2);
        let out = cmd_audit(&c, AuditSelection::all(), None, audit::DEFAULT_CEILING).unwrap();
        assert!(out.passed);
        assert_eq!(out.report.checks.len(), 5);

        let mut zeroed = c.clone();
        zeroed.randomness = RandomnessMode::Zeroed;
        let out = cmd_audit(&zeroed, AuditSelection::all(), None, audit::DEFAULT_CEILING).unwrap();
        assert!(!out.passed);
        assert!(out.correctness.unwrap().passed);
        assert!(out.report.first_failure().unwrap().witness.is_some());

        let mut binary = RunConfig::new(2, 3, 2, 2);
        assert!(matches!(cmd_audit(&binary, AuditSelection::all(), None, audit::DEFAULT_CEILING), Err(Error::FieldTooSmall { .. })));
        binary.parity = Some(vec![vec![1], vec![1]]);
        let out = cmd_audit(&binary, AuditSelection::all(), None, audit::DEFAULT_CEILING).unwrap();
        assert!(out.passed);
        assert_eq!(cmd_run(&binary).unwrap().transcript.download_count, 6);

        let big = RunConfig::new(5, 4, 2, 2);
        let e = cmd_audit(&big, AuditSelection::all(), None, audit::DEFAULT_CEILING).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CONFIG);
    }

    #[test]
    fn rate_rows() {
        let grid = RateGrid { n: (2, 4), m: (1, 3), k: (2, 10) };
        let rows = cmd_rates(&grid).unwrap();
        let find = |n, m, k| rows.iter().find(|r| (r.n, r.m, r.k) == (n, m, k)).unwrap();
        let row = find(4, 2, 2);
        assert_eq!((row.spir_capacity.clone(), row.secrecy_floor.clone(), row.pir_capacity.clone()), (r(1, 2), r(1, 1), r(2, 3)));
        assert_eq!(find(2, 1, 2).pir_capacity, r(2, 3));
        assert!(find(4, 2, 10).gap() < r(1, 1 << 9));
        assert!(rows.iter().all(|r| r.m < r.n));
        let csv = rates_csv(&rows, true);
        assert!(csv.starts_with("N,M,K,spir_capacity,secrecy_floor,pir_capacity,gap\n"));
        assert!(csv.contains("\n4,2,2,1/2,1,2/3,1/6\n"));
        assert_eq!(rates_table(&rows, false).lines().count(), rows.len() + 1);
    }

    #[test]
    fn encode_then_reconstruct() {
        let mut c = RunConfig::new(7, 5, 3, 2);
        c.stripes = 2;
        c.db_seed = 4;
        let enc = cmd_encode(&c).unwrap();
        let bundle = ShareBundle { params: enc.params, generator: Some(enc.generator.clone()), nodes: enc.nodes.clone() };
        let out = cmd_reconstruct(&bundle, Some(&[2, 4, 5])).unwrap();
        assert_eq!(out.database, enc.database);
        assert_eq!(out.nodes_used, vec![2, 4, 5]);
        assert!(matches!(cmd_reconstruct(&bundle, None), Err(Error::BadShareCount { .. })));

        let mut tampered = bundle.clone();
        tampered.nodes[0].d[0] = (tampered.nodes[0].d[0] + 1) % 7;
        assert_eq!(exit_code(&cmd_reconstruct(&tampered, Some(&[2, 4, 5])).unwrap_err()), EXIT_PROTOCOL);
    }

    #[test]
    fn run_output_is_canonical_and_stable() {
        let c = RunConfig::new(3, 3, 2, 2);
        let a = to_canonical_string(&cmd_run(&c).unwrap()).unwrap();
        let b = to_canonical_string(&cmd_run(&c).unwrap()).unwrap();
        assert_eq!(a, b);
        let back: RunOutput = from_canonical_str(&a).unwrap();
        assert_eq!(back.config, c);
    }
}
