use super::FormationError;

/// One truck's longitudinal state and its speed/acceleration envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruckState {
    /// Meters along the route.
    pub position: f64,
    /// m/s.
    pub v: f64,
    /// m/s², applied until a speed bound is reached.
    pub a: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
}

impl TruckState {
    pub fn new(
        position: f64,
        v: f64,
        a: f64,
        (v_min, v_max): (f64, f64),
        (a_min, a_max): (f64, f64),
    ) -> Result<Self, FormationError> {
        let s = TruckState {
            position,
            v,
            a,
            v_min,
            v_max,
            a_min,
            a_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), FormationError> {
        let all = [
            self.position,
            self.v,
            self.a,
            self.v_min,
            self.v_max,
            self.a_min,
            self.a_max,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(FormationError::InvalidScenario("non-finite truck state".into()));
        }
        if !(0.0 <= self.v_min && self.v_min <= self.v && self.v <= self.v_max) {
            return Err(FormationError::InvalidScenario(format!(
                "speed {} outside [{}, {}]",
                self.v, self.v_min, self.v_max
            )));
        }
        if !(self.a_min <= self.a && self.a <= self.a_max) {
            return Err(FormationError::InvalidScenario(format!(
                "acceleration {} outside [{}, {}]",
                self.a, self.a_min, self.a_max
            )));
        }
        Ok(())
    }

    /// The speed this truck's current acceleration drives it towards.
    pub fn speed_bound(&self) -> f64 {
        if self.a > 0.0 {
            self.v_max
        } else if self.a < 0.0 {
            self.v_min
        } else {
            self.v
        }
    }

    pub fn with_accel(mut self, a: f64) -> Self {
        self.a = a;
        self
    }
}

/// Distance and final speed after `dt` seconds starting at `v0` and
/// accelerating at `a` until `v_bound` is reached, then holding it.
pub fn travel(v0: f64, a: f64, v_bound: f64, dt: f64) -> (f64, f64) {
    if a == 0.0 || dt <= 0.0 {
        return (v0 * dt.max(0.0), v0);
    }
    let ramp = ((v_bound - v0) / a).max(0.0);
    if dt <= ramp {
        (v0 * dt + 0.5 * a * dt * dt, v0 + a * dt)
    } else {
        (v0 * ramp + 0.5 * a * ramp * ramp + v_bound * (dt - ramp), v_bound)
    }
}

/// `v·Δt + ½·a·Δt²`, piecewise once the speed reaches `v_min` or `v_max`.
pub fn displacement(s: &TruckState, dt: f64) -> f64 {
    travel(s.v, s.a, s.speed_bound(), dt).0
}

/// `P_ij + (d_i − d_j)`: the gap from truck `j` up to truck `i` after both
/// move by their displacements.
pub fn relative_position(p_ij: f64, d_i: f64, d_j: f64) -> f64 {
    p_ij + (d_i - d_j)
}

/// An ordered platoon, leader first.
#[derive(Clone, Debug, PartialEq)]
pub struct PlatoonState {
    members: Vec<TruckState>,
}

impl PlatoonState {
    pub fn new(members: Vec<TruckState>) -> Result<Self, FormationError> {
        if members.is_empty() {
            return Err(FormationError::InvalidScenario("platoon has no members".into()));
        }
        for m in &members {
            m.validate()?;
        }
        if members.windows(2).any(|w| w[0].position <= w[1].position) {
            return Err(FormationError::InvalidScenario(
                "platoon positions must strictly decrease from leader to tail".into(),
            ));
        }
        Ok(PlatoonState { members })
    }

    /// `q` identical members spaced `spacing` meters apart, tail at `tail_position`.
    pub fn uniform(template: TruckState, q: usize, spacing: f64, tail_position: f64) -> Result<Self, FormationError> {
        if !(spacing > 0.0) {
            return Err(FormationError::InvalidScenario(
                "member spacing must be positive".into(),
            ));
        }
        let members = (0..q)
            .map(|i| TruckState {
                position: tail_position + spacing * (q - 1 - i) as f64,
                ..template
            })
            .collect();
        PlatoonState::new(members)
    }

    pub fn members(&self) -> &[TruckState] {
        &self.members
    }

    pub fn q(&self) -> usize {
        self.members.len()
    }

    pub fn leader(&self) -> &TruckState {
        &self.members[0]
    }

    pub fn tail(&self) -> &TruckState {
        self.members.last().expect("non-empty")
    }

    pub fn length(&self) -> f64 {
        self.leader().position - self.tail().position
    }
}
