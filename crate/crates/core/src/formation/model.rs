use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::kinematics::{travel, PlatoonState, TruckState};
use super::FormationError;

/// Per-stage authentication latencies, in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatencyModel {
    pub t_proof_ms: f64,
    pub t_agg_ms: f64,
    pub t_keyagg_ms: f64,
    pub t_net_ms: f64,
    pub t_verify_ms: f64,
}

impl LatencyModel {
    pub const ZERO: LatencyModel = LatencyModel {
        t_proof_ms: 0.0,
        t_agg_ms: 0.0,
        t_keyagg_ms: 0.0,
        t_net_ms: 0.0,
        t_verify_ms: 0.0,
    };

    /// The measured component costs of the reference deployment.
    pub const REFERENCE: LatencyModel = LatencyModel {
        t_proof_ms: 255.0,
        t_agg_ms: 2.0,
        t_keyagg_ms: 0.4,
        t_net_ms: 1100.0,
        t_verify_ms: 512.0,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// The standalone truck speeds up to its maximum; the platoon holds speed.
    SecondCatchup,
    /// The standalone truck holds speed; the platoon slows down.
    SlowDown,
    /// Both at once.
    Hybrid,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::SecondCatchup, Strategy::SlowDown, Strategy::Hybrid];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SecondCatchup => "second_catchup",
            Strategy::SlowDown => "slow_down",
            Strategy::Hybrid => "hybrid",
        }
    }

    fn chi_moves(self) -> bool {
        matches!(self, Strategy::SecondCatchup | Strategy::Hybrid)
    }

    fn platoon_moves(self) -> bool {
        matches!(self, Strategy::SlowDown | Strategy::Hybrid)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = FormationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "second_catchup" | "2nd_catchup" | "2nd_catch_up" | "second_catch_up" | "catchup" => {
                Ok(Strategy::SecondCatchup)
            }
            "slow_down" | "slowdown" => Ok(Strategy::SlowDown),
            "hybrid" => Ok(Strategy::Hybrid),
            _ => Err(FormationError::InvalidScenario(format!("unknown strategy `{s}`"))),
        }
    }
}

/// A standalone truck `chi` approaching a platoon from behind.
#[derive(Clone, Debug, PartialEq)]
pub struct FormationScenario {
    pub platoon: PlatoonState,
    pub chi: TruckState,
    /// Communication radius: the initial gap from `chi` up to the platoon's tail.
    pub r: f64,
    /// Number of companies, one proof each.
    pub n: usize,
    pub latency: LatencyModel,
    /// Joining is complete once `chi` is this close behind the tail.
    pub headway: f64,
}

impl FormationScenario {
    pub fn validate(&self) -> Result<(), FormationError> {
        self.chi.validate()?;
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(FormationError::InvalidScenario("R must be positive".into()));
        }
        if self.n == 0 {
            return Err(FormationError::InvalidScenario("n must be at least 1".into()));
        }
        if !(self.headway >= 0.0) || self.headway >= self.r {
            return Err(FormationError::InvalidScenario("headway must be in [0, R)".into()));
        }
        let gap = self.platoon.tail().position - self.chi.position;
        if (gap - self.r).abs() > 1e-9 * self.r.max(1.0) {
            return Err(FormationError::InvalidScenario(format!(
                "initial gap {gap} differs from R = {}",
                self.r
            )));
        }
        let lat = self.latency;
        let parts = [
            lat.t_proof_ms,
            lat.t_agg_ms,
            lat.t_keyagg_ms,
            lat.t_net_ms,
            lat.t_verify_ms,
        ];
        if parts.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(FormationError::InvalidScenario("latencies must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_n(&self, n: usize) -> Self {
        FormationScenario { n, ..self.clone() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FormationTimeline {
    pub gamma: f64,
    pub theta: f64,
    pub total: f64,
    pub strategy: Strategy,
    pub gap_after_catchup: f64,
}

impl FormationTimeline {
    pub(crate) fn new(gamma: f64, theta: f64, strategy: Strategy, gap_after_catchup: f64) -> Self {
        FormationTimeline {
            gamma,
            theta,
            total: gamma + theta,
            strategy,
            gap_after_catchup,
        }
    }
}

/// `Γ = n·t_proof + t_agg + t_keyagg + t_net + t_verify`, in seconds.
pub fn auth_time(n: usize, latency: &LatencyModel) -> f64 {
    (n as f64 * latency.t_proof_ms + latency.t_agg_ms + latency.t_keyagg_ms + latency.t_net_ms + latency.t_verify_ms)
        / 1000.0
}

/// Gap from `chi` up to the platoon's tail after both move for `gamma`
/// seconds under their current accelerations.
pub fn catchup_gap(scenario: &FormationScenario, gamma: f64) -> f64 {
    let tail = scenario.platoon.tail();
    let chi = &scenario.chi;
    let d_tail = travel(tail.v, tail.a, tail.speed_bound(), gamma).0;
    let d_chi = travel(chi.v, chi.a, chi.speed_bound(), gamma).0;
    scenario.r + d_tail - d_chi
}

/// Speed, commanded acceleration and target speed of one party during
/// cooperative driving.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Command {
    pub v0: f64,
    pub a: f64,
    pub target: f64,
}

impl Command {
    fn ramp(&self) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            ((self.target - self.v0) / self.a).max(0.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Manoeuvre {
    pub gap0: f64,
    pub chi: Command,
    pub platoon: Command,
}

/// States at the end of authentication and what each party does next.
///
/// `Δv_χ^max = v_χ^max − v_χ(Γ)` is the speed margin of the standalone truck;
/// a slowing platoon gives up that same margin, floored at its `v_min`.
pub(crate) fn manoeuvre(scenario: &FormationScenario, gamma: f64, strategy: Strategy) -> Manoeuvre {
    let chi = &scenario.chi;
    let tail = scenario.platoon.tail();
    let v_chi = travel(chi.v, chi.a, chi.speed_bound(), gamma).1;
    let v_platoon = travel(tail.v, tail.a, tail.speed_bound(), gamma).1;
    let margin = (chi.v_max - v_chi).max(0.0);
    let chi_cmd = if strategy.chi_moves() && chi.a_max > 0.0 {
        Command {
            v0: v_chi,
            a: chi.a_max,
            target: chi.v_max,
        }
    } else {
        Command {
            v0: v_chi,
            a: 0.0,
            target: v_chi,
        }
    };
    let slowed = (v_platoon - margin).max(tail.v_min);
    let platoon_cmd = if strategy.platoon_moves() && tail.a_min < 0.0 && slowed < v_platoon {
        Command {
            v0: v_platoon,
            a: tail.a_min,
            target: slowed,
        }
    } else {
        Command {
            v0: v_platoon,
            a: 0.0,
            target: v_platoon,
        }
    };
    Manoeuvre {
        gap0: catchup_gap(scenario, gamma),
        chi: chi_cmd,
        platoon: platoon_cmd,
    }
}

/// Smallest `τ ≥ 0` with `c·τ + ½·α·τ² = d` for `d > 0`, if any.
fn first_crossing(c: f64, alpha: f64, d: f64) -> Option<f64> {
    if alpha == 0.0 {
        return (c > 0.0).then(|| d / c);
    }
    let disc = c * c + 2.0 * alpha * d;
    if disc < 0.0 {
        return None;
    }
    let denom = c + disc.sqrt();
    (denom > 0.0).then(|| 2.0 * d / denom)
}

/// Time after `gamma` until `chi` closes to the joining headway, solved
/// exactly over the piecewise-constant relative acceleration.
pub fn theta(scenario: &FormationScenario, gamma: f64, strategy: Strategy) -> Result<f64, FormationError> {
    let m = manoeuvre(scenario, gamma, strategy);
    let mut excess = m.gap0 - scenario.headway;
    if excess <= 0.0 {
        return Ok(0.0);
    }
    let (tc, tp) = (m.chi.ramp(), m.platoon.ramp());
    let mut breaks = [tc, tp];
    breaks.sort_by(f64::total_cmp);
    let mut t = 0.0;
    let mut closing = m.chi.v0 - m.platoon.v0;
    for end in breaks.into_iter().chain([f64::INFINITY]) {
        let len = end - t;
        if len <= 0.0 {
            continue;
        }
        let alpha = if t < tc { m.chi.a } else { 0.0 } - if t < tp { m.platoon.a } else { 0.0 };
        if let Some(tau) = first_crossing(closing, alpha, excess) {
            if tau <= len {
                return Ok(t + tau);
            }
        }
        if end.is_infinite() {
            break;
        }
        excess -= closing * len + 0.5 * alpha * len * len;
        closing += alpha * len;
        t = end;
    }
    Err(FormationError::UnreachablePlatoon {
        strategy,
        closing_speed: closing,
    })
}

/// `Γ` from the latency model, `Θ` from [`theta`], and `T = Γ + Θ`.
pub fn total_time(scenario: &FormationScenario, strategy: Strategy) -> Result<FormationTimeline, FormationError> {
    scenario.validate()?;
    let gamma = auth_time(scenario.n, &scenario.latency);
    let theta = theta(scenario, gamma, strategy)?;
    Ok(FormationTimeline::new(
        gamma,
        theta,
        strategy,
        catchup_gap(scenario, gamma),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auth_time_reference_endpoints() {
        let l = LatencyModel::REFERENCE;
        assert!((auth_time(2, &l) - 2.1244).abs() < 1e-12);
        assert!((auth_time(10, &l) - 4.1644).abs() < 1e-12);
        assert_eq!(auth_time(7, &LatencyModel::ZERO), 0.0);
    }

    #[test]
    fn first_crossing_cases() {
        assert_eq!(first_crossing(2.0, 0.0, 10.0), Some(5.0));
        assert_eq!(first_crossing(-1.0, 0.0, 10.0), None);
        // ½·2·τ² = 9 → τ = 3.
        assert!((first_crossing(0.0, 2.0, 9.0).unwrap() - 3.0).abs() < 1e-12);
        // Decelerating closure that stops short.
        assert_eq!(first_crossing(1.0, -1.0, 1.0), None);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!("2nd-catchup".parse::<Strategy>().unwrap(), Strategy::SecondCatchup);
        assert!("reverse".parse::<Strategy>().is_err());
    }
}
