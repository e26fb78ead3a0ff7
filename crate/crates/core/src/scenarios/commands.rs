use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::rngs::ChaCha20Rng;
use rand::{Rng, RngExt, SeedableRng};
use serde::Serialize;
use serde_json::json;

use crate::acl::{self, AccessRequest, Operation};
use crate::formation::{simulate, total_time, FormationError, ScenarioParams, Strategy, FORMATION_CSV_HEADER};
use crate::ledger::{
    run_bench_with, BenchConfig, EndorsementPolicy, Ledger, LedgerConfig, LedgerError, PlatoonRecord, PolicySpec,
    RecordQuery, BENCH_CSV_HEADER, BENCH_ENDORSER_LATENCY, VERIFIER,
};
use crate::zkp::{
    count_pairings, derive_digest, proof_aggregate, proof_gen, verifier_key_aggregate, verify, verify_sequential,
    DigestChain, TruckIdentity,
};

use super::cli::{
    AuthenticateArgs, BenchLedgerArgs, BenchVerifyArgs, KeygenArgs, RegisterArgs, RetrieveArgs, RulesCheckArgs,
    SimulateFormationArgs,
};
use super::wallet::{company_name, Wallet};
use super::CliError;

pub const VERIFY_CSV_HEADER: &str = "n,agg_ms,seq_ms,agg_pairings,seq_pairings";

/// Relative closed-form vs integrator disagreement that gets reported.
pub const DISAGREEMENT_TOLERANCE: f64 = 0.01;

fn ledger_error(e: LedgerError) -> CliError {
    match e {
        LedgerError::Denied { .. } => CliError::Failure(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

fn write_output(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    writeln!(out, "{}", serde_json::to_string_pretty(value).expect("json")).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_ledger(path: &Path) -> Result<Ledger, CliError> {
    Ledger::load(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn save_ledger(ledger: &Ledger, path: &Path) -> Result<(), CliError> {
    ledger
        .save(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn cmd_keygen(args: &KeygenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut rng: Box<dyn rand::Rng> = match args.seed {
        Some(seed) => Box::new(ChaCha20Rng::seed_from_u64(seed ^ 0x005E_ED1D)),
        None => Box::new(rand::rng()),
    };
    let m = match &args.mac {
        Some(mac) => mac.as_bytes().to_vec(),
        None => {
            let mut bytes = [0u8; 6];
            rng.fill_bytes(&mut bytes);
            bytes.to_vec()
        }
    };
    let identity = TruckIdentity::register(m, &mut rng);
    let wallet = Wallet::issue(&args.truck, args.n, derive_digest(&identity), args.seed);
    wallet.save(&args.out)?;
    print_json(
        out,
        &json!({
            "truck_id": wallet.truck_id,
            "owner": wallet.owner,
            "companies": wallet.keys.iter().map(|k| k.company_id.clone()).collect::<Vec<_>>(),
            "round": wallet.chain.round(),
            "wallet": args.out.display().to_string(),
        }),
    )
}

pub fn cmd_register(args: &RegisterArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let wallet = Wallet::load(&args.wallet)?;
    let mut ledger = if args.ledger.exists() {
        load_ledger(&args.ledger)?
    } else {
        let rules = match &args.rules {
            Some(p) => fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
            None => acl::DEFAULT_POLICY.to_owned(),
        };
        let defaults = LedgerConfig::default();
        let policy = EndorsementPolicy::any(args.policy.k, args.policy.total, defaults.policy.latency())
            .map_err(ledger_error)?;
        Ledger::new(LedgerConfig {
            policy,
            rules,
            seed: args.seed,
            ..defaults
        })
        .map_err(ledger_error)?
    };
    for key in &wallet.keys {
        if !ledger.companies().any(|c| c == key.company_id) {
            ledger.register_company(&key.company_id).map_err(ledger_error)?;
        }
    }
    let keys = wallet.verifier_keys()?;
    let receipt = ledger
        .register_truck(&wallet.owner, &wallet.truck_id, wallet.chain, &keys)
        .map_err(ledger_error)?;
    save_ledger(&ledger, &args.ledger)?;
    print_json(
        out,
        &json!({
            "truck_id": wallet.truck_id,
            "height": receipt.height,
            "tx_ids": receipt.tx_ids.iter().map(|d| d.to_hex()).collect::<Vec<_>>(),
            "trucks": ledger.truck_count(),
        }),
    )
}

pub fn cmd_authenticate(args: &AuthenticateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut wallet = Wallet::load(&args.wallet)?;
    let mut ledger = load_ledger(&args.ledger)?;
    if ledger.truck(&wallet.truck_id).is_none() {
        return Err(CliError::Usage(format!("truck {} is not registered", wallet.truck_id)));
    }
    let n = wallet.keys.len();
    let started = Instant::now();
    let (agg, proof_ms, agg_ms) = if args.replay_last_proof {
        let agg = wallet
            .last_proof()?
            .ok_or_else(|| CliError::Usage("wallet holds no previous proof".into()))?;
        (agg, 0.0, 0.0)
    } else {
        let sks = wallet.prover_keys()?;
        let proofs: Vec<_> = sks.iter().map(|sk| proof_gen(&wallet.chain, sk)).collect();
        let proof_ms = started.elapsed().as_secs_f64() * 1e3;
        let t = Instant::now();
        let agg = proof_aggregate(&proofs).map_err(|e| CliError::Usage(e.to_string()))?;
        (agg, proof_ms, t.elapsed().as_secs_f64() * 1e3)
    };
    let t = Instant::now();
    let outcome = ledger.submit_auth(&agg, &wallet.truck_id).map_err(ledger_error)?;
    let submit_ms = t.elapsed().as_secs_f64() * 1e3;

    if outcome.verified {
        let owner = ledger
            .truck(&wallet.truck_id)
            .map(|e| e.company_id.clone())
            .unwrap_or_else(|| wallet.owner.clone());
        let mut record = PlatoonRecord::new(&wallet.truck_id, owner, &args.platoon);
        record.joined_at = Some(ledger.now());
        ledger.store_platoon_record(record, VERIFIER).map_err(ledger_error)?;
        wallet.chain = wallet.chain.advance();
    }
    if !args.replay_last_proof {
        wallet.last_proof = Some(hex::encode(agg.to_bytes()));
    }
    save_ledger(&ledger, &args.ledger)?;
    wallet.save(&args.wallet)?;

    let model = crate::formation::LatencyModel::REFERENCE;
    let proof_model = n as f64 * model.t_proof_ms;
    let gamma = proof_model + model.t_agg_ms + model.t_keyagg_ms + outcome.endorsement_ms + outcome.verify_ms;
    print_json(
        out,
        &json!({
            "verified": outcome.verified,
            "reason": outcome.reason,
            "round": outcome.round,
            "truck_id": wallet.truck_id,
            "n": n,
            "tx_id": outcome.tx_id.to_hex(),
            "gamma_breakdown_ms": {
                "proof": proof_model,
                "aggregate": model.t_agg_ms,
                "key_aggregate": model.t_keyagg_ms,
                "network": outcome.endorsement_ms,
                "verify": outcome.verify_ms,
                "total": gamma,
            },
            "wallclock_ms": {
                "proof_gen": proof_ms,
                "aggregate": agg_ms,
                "submit": submit_ms,
            },
        }),
    )?;
    if outcome.verified {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "authentication rejected: {}",
            outcome.reason.unwrap_or_default()
        )))
    }
}

pub fn cmd_retrieve(args: &RetrieveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut ledger = load_ledger(&args.ledger)?;
    let query = match (&args.truck, &args.owner, &args.platoon) {
        (Some(t), None, None) => RecordQuery::Truck(t.clone()),
        (None, Some(o), None) => RecordQuery::Owner(o.clone()),
        (None, None, Some(p)) => RecordQuery::Platoon(p.clone()),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --truck, --owner, --platoon".into(),
            ))
        }
    };
    let records = ledger.retrieve_records(&query, &args.requester);
    let entry = ledger.access_log().last().cloned().expect("retrieval logs an entry");
    save_ledger(&ledger, &args.ledger)?;
    print_json(
        out,
        &json!({
            "requester": args.requester,
            "query": query,
            "decision": entry.decision,
            "records": records,
        }),
    )?;
    if entry.decision == acl::Action::Allow {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{} may not read {}",
            args.requester, entry.resource_id
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyBenchRow {
    pub n: usize,
    /// Mean wall-clock of one aggregated verify.
    pub agg_ms: f64,
    /// Mean wall-clock of one sequential verify.
    pub seq_ms: f64,
    pub agg_pairings: u64,
    pub seq_pairings: u64,
    /// Mean wall-clock of proof aggregation.
    pub proof_agg_ms: f64,
    /// Mean wall-clock of verifier-key aggregation.
    pub key_agg_ms: f64,
}

impl VerifyBenchRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.4},{:.4},{},{}",
            self.n, self.agg_ms, self.seq_ms, self.agg_pairings, self.seq_pairings
        )
    }
}

fn mean_ms(trials: usize, mut f: impl FnMut()) -> f64 {
    let t = Instant::now();
    for _ in 0..trials {
        f();
    }
    t.elapsed().as_secs_f64() * 1e3 / trials as f64
}

/// Aggregated vs sequential verification for every `n` in `1..=n_max`.
pub fn bench_verify_rows(n_max: usize, trials: usize, seed: u64) -> Vec<VerifyBenchRow> {
    let trials = trials.max(1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (1..=n_max)
        .map(|n| {
            let truck = format!("bench-{n}");
            let identity = TruckIdentity::register(rng.random::<[u8; 8]>().to_vec(), &mut rng);
            let chain: DigestChain = derive_digest(&identity);
            let pairs: Vec<_> = (0..n)
                .map(|i| crate::zkp::key_gen_with_rng(&mut rng, &company_name(i), &truck))
                .collect();
            let vks: Vec<_> = pairs.iter().map(|(_, vk)| vk.clone()).collect();
            let proofs: Vec<_> = pairs.iter().map(|(sk, _)| proof_gen(&chain, sk)).collect();
            let agg = proof_aggregate(&proofs).expect("non-empty");
            let apk = verifier_key_aggregate(&vks).expect("non-empty");

            let (ok, agg_pairings) = count_pairings(|| verify(&agg, chain.current(), &apk).unwrap());
            let (seq_ok, seq_pairings) = count_pairings(|| verify_sequential(&proofs, chain.current(), &vks).unwrap());
            assert!(ok && seq_ok, "honest proofs verify");

            let agg_ms = mean_ms(trials, || {
                std::hint::black_box(verify(&agg, chain.current(), &apk).unwrap());
            });
            let seq_ms = mean_ms(trials, || {
                std::hint::black_box(verify_sequential(&proofs, chain.current(), &vks).unwrap());
            });
            let proof_agg_ms = mean_ms(trials, || {
                std::hint::black_box(proof_aggregate(&proofs).unwrap());
            });
            let key_agg_ms = mean_ms(trials, || {
                std::hint::black_box(verifier_key_aggregate(&vks).unwrap());
            });
            VerifyBenchRow {
                n,
                agg_ms,
                seq_ms,
                agg_pairings,
                seq_pairings,
                proof_agg_ms,
                key_agg_ms,
            }
        })
        .collect()
}

pub fn cmd_bench_verify(args: &BenchVerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.n < 1 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let mut csv = format!("{VERIFY_CSV_HEADER}\n");
    for row in bench_verify_rows(args.n, args.trials, args.seed) {
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    write_output(out, args.out.as_deref(), &csv)
}

pub fn cmd_bench_ledger(args: &BenchLedgerArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let specs = if args.policy.is_empty() {
        (1..=3).map(|k| PolicySpec { k, total: 3 }).collect()
    } else {
        args.policy.clone()
    };
    if !(args.duration > 0.0) || args.send_rate.iter().any(|r| !(*r > 0.0)) {
        return Err(CliError::Usage("duration and send rates must be positive".into()));
    }
    let config = BenchConfig {
        seed: args.seed,
        ..BenchConfig::default()
    };
    let mut csv = format!("{BENCH_CSV_HEADER}\n");
    for spec in specs {
        let policy = EndorsementPolicy::any(spec.k, spec.total, BENCH_ENDORSER_LATENCY).map_err(ledger_error)?;
        for &rate in &args.send_rate {
            csv.push_str(&run_bench_with(&policy, rate, args.duration, &config).csv_row());
            csv.push('\n');
        }
    }
    write_output(out, args.out.as_deref(), &csv)
}

fn parse_n_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--n expects A..B or a single integer, got `{s}`"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim_start_matches('=').trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormationRow {
    pub n: usize,
    pub strategy: Strategy,
    pub gamma_s: f64,
    pub theta_s: f64,
    pub total_s: f64,
    /// `Θ` measured by the integrator.
    pub theta_sim_s: f64,
}

impl FormationRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.4},{:.4},{:.4}",
            self.n, self.strategy, self.gamma_s, self.theta_s, self.total_s
        )
    }

    pub fn disagreement(&self) -> f64 {
        let scale = self.theta_s.abs().max(self.theta_sim_s.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.theta_s - self.theta_sim_s).abs() / scale
        }
    }
}

pub fn formation_rows(
    params: &ScenarioParams,
    strategies: &[Strategy],
    (lo, hi): (usize, usize),
    dt: f64,
) -> Result<Vec<FormationRow>, FormationError> {
    let mut rows = Vec::new();
    for n in lo..=hi {
        let scenario = ScenarioParams { n, ..params.clone() }.build()?;
        for &strategy in strategies {
            let closed = total_time(&scenario, strategy)?;
            let sim = simulate(&scenario, strategy, dt)?;
            rows.push(FormationRow {
                n,
                strategy,
                gamma_s: closed.gamma,
                theta_s: closed.theta,
                total_s: closed.total,
                theta_sim_s: sim.timeline.theta,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_simulate_formation(
    args: &SimulateFormationArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let params = match &args.scenario {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            ScenarioParams::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => ScenarioParams::default(),
    };
    let strategies: Vec<Strategy> = if !args.strategies.is_empty() {
        args.strategies
            .iter()
            .map(|s| s.parse().map_err(|e: FormationError| CliError::Usage(e.to_string())))
            .collect::<Result<_, _>>()?
    } else if let Some(s) = params.strategy {
        vec![s]
    } else {
        Strategy::ALL.to_vec()
    };
    let range = parse_n_range(&args.n)?;
    let rows = formation_rows(&params, &strategies, range, args.dt).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut csv = format!("{FORMATION_CSV_HEADER}\n");
    for row in &rows {
        if row.disagreement() > DISAGREEMENT_TOLERANCE {
            let _ = writeln!(
                err,
                "warning: n={} {}: closed-form theta {:.4} s vs integrator {:.4} s",
                row.n, row.strategy, row.theta_s, row.theta_sim_s
            );
        }
        csv.push_str(&row.csv_row());
        csv.push('\n');
    }
    write_output(out, args.out.as_deref(), &csv)
}

pub fn cmd_rules_check(args: &RulesCheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text =
        fs::read_to_string(&args.rules).map_err(|e| CliError::Usage(format!("{}: {e}", args.rules.display())))?;
    let rules = acl::parse_rules(&text).map_err(|e| CliError::Usage(format!("{}:{e}", args.rules.display())))?;
    let Some(participant) = &args.participant else {
        for rule in &rules {
            writeln!(out, "{rule}\n").map_err(|e| CliError::Usage(e.to_string()))?;
        }
        return Ok(());
    };
    let op = args.operation.as_deref().unwrap_or_default();
    let operation = Operation::from_keyword(&op.to_ascii_uppercase())
        .ok_or_else(|| CliError::Usage(format!("unknown operation `{op}`")))?;
    let mut request = AccessRequest::new(
        participant.clone(),
        operation,
        args.resource.clone().unwrap_or_default(),
    );
    for attr in &args.attrs {
        let (k, v) = attr
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--attr expects key=value, got `{attr}`")))?;
        request = request.with_resource_attr(k, v);
    }
    let decision = acl::evaluate(&rules, &request);
    print_json(
        out,
        &json!({
            "decision": decision.action,
            "rule": decision.rule_name(),
            "skipped": decision.skipped.iter().map(|s| json!({"rule": s.rule, "error": s.error.to_string()})).collect::<Vec<_>>(),
        }),
    )?;
    if decision.is_allowed() {
        Ok(())
    } else {
        Err(CliError::Failure("request denied".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_ranges() {
        assert_eq!(parse_n_range("2..10").unwrap(), (2, 10));
        assert_eq!(parse_n_range("2..=10").unwrap(), (2, 10));
        assert_eq!(parse_n_range("4").unwrap(), (4, 4));
        assert!(parse_n_range("5..2").is_err());
        assert!(parse_n_range("0").is_err());
    }
}
