#![allow(dead_code)]

use platoon_auth::ledger::{Ledger, LedgerConfig, PlatoonRecord, RecordQuery, VERIFIER};
use platoon_auth::zkp::{
    derive_digest, key_gen_with_rng, proof_aggregate, proof_gen, AggregatedProof, DigestChain, ProverKey,
    TruckIdentity, VerifierKey,
};
use rand::rngs::ChaCha20Rng;
use rand::seq::IndexedRandom;
use rand::{Rng, RngExt, SeedableRng};

pub fn company(i: usize) -> String {
    format!("Company_{}", (b'A' + i as u8) as char)
}

/// A truck's off-ledger view: its prover keys and the chain head it holds.
#[derive(Clone, Debug)]
pub struct Truck {
    pub id: String,
    pub owner: String,
    pub sks: Vec<ProverKey>,
    pub vks: Vec<VerifierKey>,
    pub chain: DigestChain,
    pub last: Option<AggregatedProof>,
}

impl Truck {
    pub fn issue(rng: &mut ChaCha20Rng, id: &str, owner: &str, companies: &[String]) -> Truck {
        let mut mac = vec![0u8; 6];
        rng.fill_bytes(&mut mac);
        let chain = derive_digest(&TruckIdentity::register(mac, rng));
        let (sks, vks) = companies.iter().map(|c| key_gen_with_rng(rng, c, id)).unzip();
        Truck {
            id: id.to_owned(),
            owner: owner.to_owned(),
            sks,
            vks,
            chain,
            last: None,
        }
    }

    pub fn prove(&self) -> AggregatedProof {
        let proofs: Vec<_> = self.sks.iter().map(|sk| proof_gen(&self.chain, sk)).collect();
        proof_aggregate(&proofs).expect("at least one company")
    }

    /// Proves the current round and remembers the transcript.
    pub fn prove_and_keep(&mut self) -> AggregatedProof {
        let agg = self.prove();
        self.last = Some(agg);
        agg
    }

    pub fn accepted(&mut self) {
        self.chain = self.chain.advance();
    }
}

/// A ledger with `n` registered companies.
pub fn ledger_with(n: usize, config: LedgerConfig) -> (Ledger, Vec<String>) {
    let mut ledger = Ledger::new(config).expect("valid config");
    let companies: Vec<String> = (0..n).map(company).collect();
    for c in &companies {
        ledger.register_company(c).expect("fresh company");
    }
    (ledger, companies)
}

pub fn enroll(ledger: &mut Ledger, rng: &mut ChaCha20Rng, id: &str, owner: &str, companies: &[String]) -> Truck {
    let truck = Truck::issue(rng, id, owner, companies);
    ledger
        .register_truck(owner, id, truck.chain, &truck.vks)
        .expect("registration succeeds");
    truck
}

/// Random reachable scenario: the standalone truck can outrun the platoon,
/// the platoon's speed floor stays below the truck's speed, and a gap of at
/// least one meter beyond the headway remains after authentication.
pub fn random_params(rng: &mut ChaCha20Rng) -> platoon_auth::formation::ScenarioParams {
    use platoon_auth::formation::{auth_time, LatencyModel, ScenarioParams};
    use rand::RngExt;
    loop {
        let v_chi = rng.random_range(5.0..25.0);
        let v_chi_max = rng.random_range(v_chi + 1.0..36.0);
        let v_platoon = rng.random_range(0.3 * v_chi_max..v_chi_max - 0.5);
        let p = ScenarioParams {
            r: rng.random_range(80.0..600.0),
            v_chi,
            a_chi: rng.random_range(0.3..2.5),
            v_chi_min: 0.0,
            v_chi_max,
            v_platoon,
            a_platoon: -rng.random_range(0.3..2.5),
            v_platoon_min: rng.random_range(0.0..0.9 * v_platoon.min(v_chi)),
            v_platoon_max: v_platoon,
            members: rng.random_range(1..=5),
            spacing: rng.random_range(5.0..20.0),
            headway: rng.random_range(5.0..20.0),
            n: rng.random_range(1..=10),
            strategy: None,
            latency: LatencyModel {
                t_proof_ms: rng.random_range(50.0..400.0),
                t_agg_ms: rng.random_range(0.0..5.0),
                t_keyagg_ms: rng.random_range(0.0..1.0),
                t_net_ms: rng.random_range(200.0..2000.0),
                t_verify_ms: rng.random_range(100.0..800.0),
            },
        };
        let gamma = auth_time(p.n, &p.latency);
        let d_chi = {
            let ramp = ((p.v_chi_max - p.v_chi) / p.a_chi).min(gamma);
            p.v_chi * ramp + 0.5 * p.a_chi * ramp * ramp + p.v_chi_max * (gamma - ramp)
        };
        if p.r + p.v_platoon * gamma - d_chi > p.headway + 1.0 {
            return p;
        }
    }
}

/// Brute-force formation oracle written from the motion rules alone: each
/// truck accelerates toward its speed bound and holds it once reached.
/// Returns `(gap after authentication, Θ)` or `None` past `horizon_s`.
pub fn oracle_formation(
    p: &platoon_auth::formation::ScenarioParams,
    strategy: platoon_auth::formation::Strategy,
    dt: f64,
    horizon_s: f64,
) -> Option<(f64, f64)> {
    use platoon_auth::formation::Strategy;
    let step = |x: &mut f64, v: &mut f64, a: f64, bound: f64, h: f64| {
        let mut next = *v + a * h;
        if (a > 0.0 && next > bound) || (a < 0.0 && next < bound) {
            next = bound;
        }
        *x += 0.5 * (*v + next) * h;
        *v = next;
    };
    let gamma = (p.n as f64 * p.latency.t_proof_ms
        + p.latency.t_agg_ms
        + p.latency.t_keyagg_ms
        + p.latency.t_net_ms
        + p.latency.t_verify_ms)
        / 1000.0;
    let (mut xc, mut vc) = (0.0, p.v_chi);
    let (mut xp, mut vp) = (p.r, p.v_platoon);
    let mut t = 0.0;
    while t < gamma {
        let h = dt.min(gamma - t);
        step(&mut xc, &mut vc, p.a_chi, p.v_chi_max, h);
        let hold = vp;
        step(&mut xp, &mut vp, 0.0, hold, h);
        t += h;
    }
    let gap_after = xp - xc;
    let chi_moves = matches!(strategy, Strategy::SecondCatchup | Strategy::Hybrid);
    let platoon_moves = matches!(strategy, Strategy::SlowDown | Strategy::Hybrid);
    let (ac, bc) = if chi_moves {
        (p.a_chi.abs(), p.v_chi_max)
    } else {
        (0.0, vc)
    };
    let target = (vp - (p.v_chi_max - vc)).max(p.v_platoon_min);
    let (ap, bp) = if platoon_moves && target < vp {
        (-p.a_platoon.abs(), target)
    } else {
        (0.0, vp)
    };
    let mut gap = gap_after;
    let mut theta = 0.0;
    while gap > p.headway {
        if theta > horizon_s {
            return None;
        }
        step(&mut xc, &mut vc, ac, bc, dt);
        step(&mut xp, &mut vp, ap, bp, dt);
        let next = xp - xc;
        if next <= p.headway {
            theta += dt * (gap - p.headway) / (gap - next);
            return Some((gap_after, theta));
        }
        theta += dt;
        gap = next;
    }
    Some((gap_after, theta))
}

pub fn record(truck: &Truck, platoon: &str) -> PlatoonRecord {
    let mut r = PlatoonRecord::new(truck.id.clone(), truck.owner.clone(), platoon);
    r.joined_at = Some(10);
    r.left_at = Some(20);
    r.route_segment = "A9:km12-km40".into();
    r
}

/// Drives a ledger through `ops` random operations, checking each outcome
/// against an off-ledger model. Returns the ledger and the retrieval and
/// denied-write counts.
pub fn fuzz(seed: u64, ops: usize) -> (Ledger, usize, usize) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (mut ledger, mut companies) = ledger_with(
        2,
        LedgerConfig {
            seed,
            ..LedgerConfig::default()
        },
    );
    let mut trucks: Vec<Truck> = Vec::new();
    let (mut retrievals, mut denied_writes) = (0, 0);
    for step in 0..ops {
        let height = ledger.height();
        match rng.random_range(0..10u32) {
            0 if companies.len() < 6 => {
                let c = company(companies.len());
                ledger.register_company(&c).unwrap();
                companies.push(c);
                assert_eq!(ledger.height(), height + 1);
            }
            0 | 1 => {
                let id = format!("T{step}");
                let owner = companies.choose(&mut rng).unwrap().clone();
                trucks.push(enroll(&mut ledger, &mut rng, &id, &owner, &companies));
                assert_eq!(ledger.height(), height + 1);
            }
            2 if !trucks.is_empty() => {
                let i = rng.random_range(0..trucks.len());
                let agg = trucks[i].prove_and_keep();
                let id = trucks[i].id.clone();
                assert!(ledger.submit_auth(&agg, &id).unwrap().verified);
                trucks[i].accepted();
            }
            3 if !trucks.is_empty() => {
                let t = trucks.choose(&mut rng).unwrap();
                if let Some(last) = t.last {
                    assert!(!ledger.submit_auth(&last, &t.id).unwrap().verified);
                }
            }
            4 if !trucks.is_empty() => {
                let t = trucks.choose(&mut rng).unwrap().clone();
                let platoon = format!("P{}", rng.random_range(0..4u32));
                if rng.random_bool(0.8) {
                    ledger.store_platoon_record(record(&t, &platoon), VERIFIER).unwrap();
                } else {
                    assert!(ledger.store_platoon_record(record(&t, &platoon), &t.owner).is_err());
                    denied_writes += 1;
                }
            }
            5 => {
                let c = companies[0].clone();
                assert!(ledger.register_company(&c).is_err());
                assert_eq!(ledger.height(), height);
            }
            _ => {
                let requester = companies.choose(&mut rng).unwrap().clone();
                let query = match (rng.random_range(0..3u32), trucks.choose(&mut rng)) {
                    (0, Some(t)) => RecordQuery::Truck(t.id.clone()),
                    (1, _) => RecordQuery::Owner(companies.choose(&mut rng).unwrap().clone()),
                    _ => RecordQuery::Platoon(format!("P{}", rng.random_range(0..4u32))),
                };
                let got = ledger.retrieve_records(&query, &requester);
                assert!(got.iter().all(|r| r.owner == requester && query.matches(r)));
                retrievals += 1;
            }
        }
    }
    (ledger, retrievals, denied_writes)
}
