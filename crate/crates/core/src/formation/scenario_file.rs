use super::kinematics::{PlatoonState, TruckState};
use super::model::{FormationScenario, LatencyModel, Strategy};
use super::FormationError;

/// Flat parameter set behind a scenario file. Defaults are the reference
/// parameters: R = 300 m, χ at 17 m/s accelerating at 1 m/s² up to 28 m/s,
/// a three-truck platoon cruising at 22 m/s that can brake at 1 m/s².
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    pub r: f64,
    pub v_chi: f64,
    pub a_chi: f64,
    pub v_chi_min: f64,
    pub v_chi_max: f64,
    pub v_platoon: f64,
    pub a_platoon: f64,
    pub v_platoon_min: f64,
    pub v_platoon_max: f64,
    pub members: usize,
    pub spacing: f64,
    pub headway: f64,
    pub n: usize,
    pub strategy: Option<Strategy>,
    pub latency: LatencyModel,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            r: 300.0,
            v_chi: 17.0,
            a_chi: 1.0,
            v_chi_min: 0.0,
            v_chi_max: 28.0,
            v_platoon: 22.0,
            a_platoon: -1.0,
            v_platoon_min: 0.0,
            v_platoon_max: 22.0,
            members: 3,
            spacing: 15.0,
            headway: 15.0,
            n: 2,
            strategy: None,
            latency: LatencyModel::REFERENCE,
        }
    }
}

impl ScenarioParams {
    /// `chi` starts at 0 with the platoon's tail `R` ahead.
    pub fn build(&self) -> Result<FormationScenario, FormationError> {
        let chi = TruckState::new(
            0.0,
            self.v_chi,
            self.a_chi,
            (self.v_chi_min, self.v_chi_max),
            (-self.a_chi.abs(), self.a_chi.abs()),
        )?;
        let member = TruckState::new(
            0.0,
            self.v_platoon,
            0.0,
            (self.v_platoon_min, self.v_platoon_max),
            (-self.a_platoon.abs(), self.a_platoon.abs()),
        )?;
        let scenario = FormationScenario {
            platoon: PlatoonState::uniform(member, self.members, self.spacing, self.r)?,
            chi,
            r: self.r,
            n: self.n,
            latency: self.latency,
            headway: self.headway,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Parses `key=value` lines; `#` starts a comment. Unset keys keep their
    /// defaults, and `v_platoon_max` follows `v_platoon` unless given.
    pub fn parse(text: &str) -> Result<Self, FormationError> {
        let mut p = ScenarioParams::default();
        let mut platoon_max = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| FormationError::Parse { line: line_no, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let num = || -> Result<f64, FormationError> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("`{key}` needs a number, got `{value}`")))
            };
            let count = || -> Result<usize, FormationError> {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("`{key}` needs a non-negative integer, got `{value}`")))
            };
            match key {
                "R" | "r" => p.r = num()?,
                "v_chi" => p.v_chi = num()?,
                "a_chi" => p.a_chi = num()?,
                "v_chi_min" => p.v_chi_min = num()?,
                "v_chi_max" => p.v_chi_max = num()?,
                "v_platoon" => p.v_platoon = num()?,
                "a_platoon" => p.a_platoon = num()?,
                "v_platoon_min" => p.v_platoon_min = num()?,
                "v_platoon_max" => platoon_max = Some(num()?),
                "members" | "Q" => p.members = count()?,
                "spacing" => p.spacing = num()?,
                "headway" => p.headway = num()?,
                "n" => p.n = count()?,
                "strategy" => p.strategy = Some(value.parse().map_err(|_| err(format!("unknown strategy `{value}`")))?),
                "t_proof_ms" => p.latency.t_proof_ms = num()?,
                "t_agg_ms" => p.latency.t_agg_ms = num()?,
                "t_keyagg_ms" => p.latency.t_keyagg_ms = num()?,
                "t_net_ms" => p.latency.t_net_ms = num()?,
                "t_verify_ms" => p.latency.t_verify_ms = num()?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        p.v_platoon_max = platoon_max.unwrap_or(p.v_platoon);
        Ok(p)
    }
}
