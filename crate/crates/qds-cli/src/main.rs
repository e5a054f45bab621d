//! `qds`: simulate the signature protocols, launch attacks, evaluate the
//! closed-form security bounds, and run the parameter optimizer.
//!
//! Exit codes: 0 success (simulations: all receivers accepted), 2 invalid
//! configuration, 3 run aborted by failed authentication, 4 a receiver
//! rejected the signature, 5 infeasible optimization.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use qds_core::adversary::{
    attack_dispute_p3, attack_lemma3, attack_transferability_p3, mc_forgery_p1, mc_forgery_p3,
    mc_repudiation_p2, AttackOutcome,
};
use qds_core::bits::BitString;
use qds_core::channels::TamperPlan;
use qds_core::optimizer::{
    default_grid, optimize, optimize_p2_frontier, sweep, sweep_csv, OptimizeError, ProtocolId,
};
use qds_core::protocols::p1;
use qds_core::protocols::p2::{self, P2Adversary};
use qds_core::protocols::p3;
use qds_core::protocols::{doc_from_seed, DocSigPair};
use qds_core::rng::RandomSource;
use qds_core::secbounds::{cost_p1, cost_p2, cost_p3_n2, eps_p1, eps_p2, eps_p3};
use qds_core::transcript::Transcript;

const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_REJECT: u8 = 4;
const EXIT_INFEASIBLE: u8 = 5;

#[derive(Parser)]
#[command(name = "qds", version, about = "Preshared-key digital signature workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol over simulated channels and write the transcript
    Simulate(SimulateArgs),
    /// Run a constructive attack or Monte-Carlo attack-rate estimator
    Attack(AttackArgs),
    /// Print the closed-form security budget and cost for parameters
    Bounds(BoundsArgs),
    /// Search for cost-minimal parameters under an epsilon target
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON run configuration (mirrors the individual flags)
    #[arg(long, conflicts_with = "protocol")]
    config: Option<PathBuf>,
    /// p1 | p2 | p3
    #[arg(long)]
    protocol: Option<String>,
    /// synthesize a pseudo-random document of this many bits
    #[arg(long)]
    bm: Option<u64>,
    /// hash a file's raw bits as the document instead
    #[arg(long)]
    doc_file: Option<PathBuf>,
    /// signature hash length b_H
    #[arg(long)]
    bh: Option<u64>,
    /// authentication tag length b'_H
    #[arg(long)]
    bhp: Option<u64>,
    /// p2: number of key blocks per receiver (even)
    #[arg(long)]
    n: Option<u64>,
    /// p2: Charlie's mismatch tolerance
    #[arg(long)]
    e_max: Option<u64>,
    /// p3: number of receivers N
    #[arg(long, alias = "big-n")]
    receivers: Option<u64>,
    /// p3: functions per block
    #[arg(long)]
    k: Option<u64>,
    /// p3: tolerated dishonest participants
    #[arg(long)]
    omega: Option<u64>,
    /// p3: highest verification level
    #[arg(long)]
    l_max: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// adversary JSON (inline or @file): tamper rules, p2 corruption
    #[arg(long)]
    adversary: Option<String>,
    /// write transcript events (JSON lines) here
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    protocol: String,
    #[serde(rename = "b_M")]
    b_m: Option<u64>,
    doc_file: Option<PathBuf>,
    #[serde(rename = "b_H")]
    b_h: Option<u64>,
    #[serde(rename = "b_Hp")]
    b_hp: Option<u64>,
    n: Option<u64>,
    e_max: Option<u64>,
    #[serde(rename = "N")]
    receivers: Option<u64>,
    k: Option<u64>,
    omega: Option<u64>,
    l_max: Option<u64>,
    seed: Option<u64>,
    adversary: Option<serde_json::Value>,
}

#[derive(Args)]
struct AttackArgs {
    /// lemma3 | forge-p1 | repudiate-p2 | forge-p3 | dispute-p3 | transfer-p3
    #[arg(long)]
    name: String,
    #[arg(long)]
    bm: Option<u64>,
    #[arg(long)]
    bh: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    e_max: Option<u64>,
    #[arg(long, alias = "big-n")]
    receivers: Option<u64>,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    omega: Option<u64>,
    /// transfer-p3: per-function corruption probability
    #[arg(long)]
    p_e: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BoundsArgs {
    /// p1 | p2 | p3
    #[arg(long)]
    protocol: String,
    /// document length in bits (scientific notation accepted)
    #[arg(long)]
    bm: String,
    #[arg(long)]
    bh: u64,
    #[arg(long)]
    bhp: u64,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    e_max: Option<u64>,
    #[arg(long, alias = "big-n", default_value_t = 2)]
    receivers: u64,
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = 1)]
    omega: u64,
    #[arg(long, default_value_t = 1)]
    l_max: u64,
}

#[derive(Args)]
struct OptimizeArgs {
    /// p1 | p2 | p3 (ignored with --sweep unless --protocols is given)
    #[arg(long)]
    protocol: Option<String>,
    /// document length in bits (scientific notation accepted)
    #[arg(long)]
    bm: Option<String>,
    /// security target on eps_rep + eps_for
    #[arg(long, default_value = "1e-10")]
    eps: String,
    /// sweep the document-size grid and emit CSV
    #[arg(long)]
    sweep: bool,
    /// comma-separated protocols for --sweep
    #[arg(long, default_value = "p1,p2,p3")]
    protocols: String,
    /// comma-separated b_M grid for --sweep (default 1e2..1e10 decades)
    #[arg(long)]
    grid: Option<String>,
    /// for p2: also emit the feasible (l_P, l_S) frontier
    #[arg(long)]
    verbose: bool,
    /// write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Simulate(args) => run_simulate(args),
        Command::Attack(args) => run_attack(args),
        Command::Bounds(args) => run_bounds(args),
        Command::Optimize(args) => run_optimize(args),
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn env_seed(cli_seed: u64) -> u64 {
    match std::env::var("QDS_SEED") {
        Ok(v) => v.parse().unwrap_or(cli_seed),
        Err(_) => cli_seed,
    }
}

fn parse_magnitude(s: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().with_context(|| format!("cannot parse {s:?} as a number"))?;
    if !(f.is_finite() && f >= 1.0 && f <= 1.8e19) {
        bail!("{s:?} is out of range");
    }
    Ok(f.round() as u64)
}

fn bits_from_bytes(bytes: &[u8]) -> BitString {
    let mut out = BitString::zeros(bytes.len() * 8);
    for (k, &byte) in bytes.iter().enumerate() {
        for j in 0..8 {
            if (byte >> (7 - j)) & 1 == 1 {
                out.set(8 * k + j, true);
            }
        }
    }
    out
}

fn load_adversary_value(spec: &str) -> Result<serde_json::Value> {
    let text = match spec.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => spec.to_string(),
    };
    serde_json::from_str(&text).context("adversary must be valid JSON")
}

fn tamper_from_value(v: Option<&serde_json::Value>) -> Result<TamperPlan> {
    match v {
        None => Ok(TamperPlan::none()),
        Some(v) => serde_json::from_value(v.clone()).context("invalid tamper rules"),
    }
}

fn run_simulate(args: SimulateArgs) -> Result<u8> {
    let cfg: RunConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
            serde_json::from_str(&text).context("invalid run configuration")?
        }
        None => RunConfig {
            protocol: args
                .protocol
                .clone()
                .ok_or_else(|| anyhow!("--protocol (or --config) is required"))?,
            b_m: args.bm,
            doc_file: args.doc_file.clone(),
            b_h: args.bh,
            b_hp: args.bhp,
            n: args.n,
            e_max: args.e_max,
            receivers: args.receivers,
            k: args.k,
            omega: args.omega,
            l_max: args.l_max,
            seed: Some(args.seed),
            adversary: match &args.adversary {
                Some(s) => Some(load_adversary_value(s)?),
                None => None,
            },
        },
    };
    let seed = env_seed(cfg.seed.unwrap_or(0));
    let b_h = cfg.b_h.ok_or_else(|| anyhow!("b_H is required"))? as usize;
    let b_hp = cfg.b_hp.ok_or_else(|| anyhow!("b_Hp is required"))? as usize;
    let doc = match (&cfg.doc_file, cfg.b_m) {
        (Some(path), _) => {
            let bytes = fs::read(path).with_context(|| format!("reading {path:?}"))?;
            if bytes.is_empty() {
                bail!("document file is empty");
            }
            bits_from_bytes(&bytes)
        }
        (None, Some(b_m)) => doc_from_seed(b_m, seed),
        (None, None) => bail!("either b_M or doc_file is required"),
    };

    let transcript: Transcript = match cfg.protocol.as_str() {
        "p1" => {
            let tamper = tamper_from_value(cfg.adversary.as_ref())?;
            p1::run(&doc, b_h, b_hp, seed, &tamper).map_err(|e| anyhow!("{e}"))?
        }
        "p2" => {
            let n = cfg.n.ok_or_else(|| anyhow!("p2 requires n"))? as usize;
            let e_max = cfg.e_max.unwrap_or(0);
            let adversary: P2Adversary = match cfg.adversary.as_ref() {
                None => P2Adversary::default(),
                Some(v) => serde_json::from_value(v.clone()).context("invalid p2 adversary")?,
            };
            p2::run(&doc, n, b_h, b_hp, e_max, seed, &adversary).map_err(|e| anyhow!("{e}"))?
        }
        "p3" => {
            let receivers = cfg.receivers.unwrap_or(2) as usize;
            let k = cfg.k.ok_or_else(|| anyhow!("p3 requires k"))? as usize;
            let omega = cfg.omega.unwrap_or(1);
            let l_max = cfg.l_max.unwrap_or(1);
            let tamper = tamper_from_value(cfg.adversary.as_ref())?;
            let (t, _, _) = p3::run(&doc, receivers, k, b_h, b_hp, omega, l_max, seed, &tamper)
                .map_err(|e| anyhow!("{e}"))?;
            t
        }
        other => bail!("unknown protocol {other:?} (expected p1|p2|p3)"),
    };

    if let Some(path) = &args.out {
        fs::write(path, transcript.events_jsonl()).with_context(|| format!("writing {path:?}"))?;
    } else {
        print!("{}", transcript.events_jsonl());
    }

    println!(
        "run {}: document {} bits, signature {} bits",
        transcript.run_id, transcript.doc_len, transcript.sig_len
    );
    for report in &transcript.verdicts {
        println!(
            "  {}: {} (preshared {} bits)",
            report.party,
            match &report.verdict.outcome {
                qds_core::transcript::VerdictOutcome::Accept { level } =>
                    format!("accept at level {level}"),
                qds_core::transcript::VerdictOutcome::Reject => "reject".to_string(),
            },
            report.preshared_bits
        );
    }
    println!(
        "  preshared total (all pairs): {} bits",
        transcript.ledger.grand_total()
    );
    if transcript.aborted() {
        println!("  outcome: ABORT (authentication failure)");
        return Ok(EXIT_ABORT);
    }
    println!("  outcome: completed");
    if transcript.any_reject() {
        return Ok(EXIT_REJECT);
    }
    Ok(0)
}

fn attack_report(name: &str, params: serde_json::Value, out: &AttackOutcome) -> String {
    serde_json::to_string_pretty(&json!({
        "attack": name,
        "params": params,
        "trials": out.trials,
        "successes": out.successes,
        "rate": out.rate,
        "cp99_low": out.cp99_low,
        "cp99_high": out.cp99_high,
        "bound": out.bound,
    }))
    .expect("report serializes")
}

/// Full-pipeline Lemma 3 forgeries: sign, forge with the known polynomial,
/// verify through the honest Protocol 1 verifier.
fn lemma3_trials(b_h: usize, b_m: u64, trials: u64, seed: u64) -> Result<AttackOutcome> {
    let root = RandomSource::from_seed(seed);
    let mut successes = 0u64;
    for trial in 0..trials {
        let mut rng = root.derive(trial);
        let doc = rng.bits(b_m as usize);
        let keys = p1::P1Keys::distribute(b_h, &mut rng);
        let (sig, p_a) = p1::sign(&doc, &keys.x_a, &mut rng).map_err(|e| anyhow!("{e}"))?;
        let pair = DocSigPair { doc, sig };
        let forged = attack_lemma3(&pair, &p_a, b_m).map_err(|e| anyhow!("{e}"))?;
        if forged.doc != pair.doc && p1::verify(&forged.doc, &forged.sig, &keys.x_a) {
            successes += 1;
        }
    }
    let (cp99_low, cp99_high) = qds_core::adversary::clopper_pearson_99(successes, trials);
    Ok(AttackOutcome {
        trials,
        successes,
        rate: successes as f64 / trials as f64,
        cp99_low,
        cp99_high,
        bound: 1.0,
    })
}

fn run_attack(args: AttackArgs) -> Result<u8> {
    let seed = env_seed(args.seed);
    let trials = args.trials;
    let (name, params, outcome) = match args.name.as_str() {
        "lemma3" => {
            let b_h = args.bh.unwrap_or(16) as usize;
            let b_m = args.bm.unwrap_or(256);
            let out = lemma3_trials(b_h, b_m, trials, seed)?;
            ("lemma3", json!({"b_H": b_h, "b_M": b_m, "seed": seed}), out)
        }
        "forge-p1" => {
            let b_h = args.bh.ok_or_else(|| anyhow!("forge-p1 requires --bh"))? as usize;
            let b_m = args.bm.ok_or_else(|| anyhow!("forge-p1 requires --bm"))?;
            let out = mc_forgery_p1(b_h, b_m, trials, seed).map_err(|e| anyhow!("{e}"))?;
            ("forge-p1", json!({"b_H": b_h, "b_M": b_m, "seed": seed}), out)
        }
        "repudiate-p2" => {
            let n = args.n.ok_or_else(|| anyhow!("repudiate-p2 requires --n"))?;
            let e_max = args.e_max.unwrap_or(0);
            let out = mc_repudiation_p2(n, e_max, trials, seed).map_err(|e| anyhow!("{e}"))?;
            ("repudiate-p2", json!({"n": n, "e_max": e_max, "seed": seed}), out)
        }
        "forge-p3" => {
            let (n, k, b_h, omega) = p3_attack_params(&args)?;
            let out = mc_forgery_p3(n, k, b_h, omega, trials, seed).map_err(|e| anyhow!("{e}"))?;
            ("forge-p3", json!({"N": n, "k": k, "b_H": b_h, "omega": omega, "seed": seed}), out)
        }
        "dispute-p3" => {
            let (n, k, b_h, omega) = p3_attack_params(&args)?;
            let out = attack_dispute_p3(n, k, b_h, omega, trials, seed).map_err(|e| anyhow!("{e}"))?;
            ("dispute-p3", json!({"N": n, "k": k, "b_H": b_h, "omega": omega, "seed": seed}), out)
        }
        "transfer-p3" => {
            let n = args.receivers.unwrap_or(2);
            let k = args.k.ok_or_else(|| anyhow!("transfer-p3 requires --k"))?;
            let omega = args.omega.unwrap_or(1);
            let p_e = args.p_e.ok_or_else(|| anyhow!("transfer-p3 requires --p-e"))?;
            let out = attack_transferability_p3(n, k, omega, p_e, trials, seed)
                .map_err(|e| anyhow!("{e}"))?;
            ("transfer-p3", json!({"N": n, "k": k, "omega": omega, "p_e": p_e, "seed": seed}), out)
        }
        other => bail!("unknown attack {other:?}"),
    };
    println!("{}", attack_report(name, params, &outcome));
    Ok(0)
}

fn p3_attack_params(args: &AttackArgs) -> Result<(u64, u64, u64, u64)> {
    Ok((
        args.receivers.unwrap_or(2),
        args.k.ok_or_else(|| anyhow!("p3 attacks require --k"))?,
        args.bh.ok_or_else(|| anyhow!("p3 attacks require --bh"))?,
        args.omega.unwrap_or(1),
    ))
}

fn run_bounds(args: BoundsArgs) -> Result<u8> {
    let b_m = parse_magnitude(&args.bm)?;
    let report = match args.protocol.as_str() {
        "p1" => {
            let budget = eps_p1(b_m, args.bh, args.bhp).map_err(|e| anyhow!("{e}"))?;
            json!({
                "protocol": "p1",
                "params": {"b_M": b_m, "b_H": args.bh, "b_Hp": args.bhp},
                "budget": budget,
                "total": budget.total(),
                "cost": cost_p1(args.bh, args.bhp),
            })
        }
        "p2" => {
            let n = args.n.ok_or_else(|| anyhow!("p2 requires --n"))?;
            let e_max = args.e_max.unwrap_or(0);
            let budget = eps_p2(b_m, n, args.bh, args.bhp, e_max).map_err(|e| anyhow!("{e}"))?;
            json!({
                "protocol": "p2",
                "params": {"b_M": b_m, "n": n, "b_H": args.bh, "b_Hp": args.bhp, "e_max": e_max},
                "budget": budget,
                "total": budget.total(),
                "cost": cost_p2(n, args.bh, args.bhp),
            })
        }
        "p3" => {
            let k = args.k.ok_or_else(|| anyhow!("p3 requires --k"))?;
            let bounds = eps_p3(b_m, args.receivers, k, args.bh, args.bhp, args.omega, args.l_max)
                .map_err(|e| anyhow!("{e}"))?;
            let cost = (args.receivers == 2).then(|| cost_p3_n2(k, args.bh, args.bhp, b_m));
            json!({
                "protocol": "p3",
                "params": {
                    "b_M": b_m, "N": args.receivers, "k": k, "b_H": args.bh,
                    "b_Hp": args.bhp, "omega": args.omega, "l_max": args.l_max,
                },
                "budget": bounds.budget(),
                "total": bounds.budget().total(),
                "detail": bounds,
                "cost": cost,
            })
        }
        other => bail!("unknown protocol {other:?}"),
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn run_optimize(args: OptimizeArgs) -> Result<u8> {
    let eps: f64 = args.eps.parse().context("cannot parse --eps")?;
    if args.sweep {
        let protocols: Vec<ProtocolId> = args
            .protocols
            .split(',')
            .map(|s| s.trim().parse().map_err(|e: String| anyhow!(e)))
            .collect::<Result<_>>()?;
        let grid: Vec<u64> = match &args.grid {
            None => default_grid(),
            Some(g) => g
                .split(',')
                .map(|s| parse_magnitude(s.trim()))
                .collect::<Result<_>>()?,
        };
        let rows = sweep(&protocols, &grid, eps);
        for row in &rows {
            if let Err(e) = &row.outcome {
                eprintln!("warning: {} at b_M = {}: {e}", row.protocol, row.b_m);
            }
        }
        let csv = sweep_csv(&rows);
        match &args.out {
            Some(path) => fs::write(path, csv).with_context(|| format!("writing {path:?}"))?,
            None => print!("{csv}"),
        }
        return Ok(0);
    }
    let protocol: ProtocolId = args
        .protocol
        .as_deref()
        .ok_or_else(|| anyhow!("--protocol or --sweep is required"))?
        .parse()
        .map_err(|e: String| anyhow!(e))?;
    let b_m = parse_magnitude(args.bm.as_deref().ok_or_else(|| anyhow!("--bm is required"))?)?;
    match optimize(protocol, b_m, eps) {
        Ok(result) => {
            println!("{}", serde_json::to_string_pretty(&result)?);
            if args.verbose && protocol == ProtocolId::P2 {
                println!("# feasible (ell_P, ell_S) frontier");
                println!("ell_P,ell_S,n,e_max,b_H,b_Hp");
                for c in optimize_p2_frontier(b_m, eps).map_err(|e| anyhow!("{e}"))? {
                    println!(
                        "{},{},{},{},{},{}",
                        c.ell_p,
                        c.ell_s,
                        c.n.unwrap_or(0),
                        c.e_max.unwrap_or(0),
                        c.b_h,
                        c.b_hp
                    );
                }
            }
            Ok(0)
        }
        Err(e @ OptimizeError::Infeasible { .. }) => {
            eprintln!("error: {e}");
            Ok(EXIT_INFEASIBLE)
        }
        Err(e) => Err(anyhow!("{e}")),
    }
}
