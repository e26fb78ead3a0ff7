use serde::Serialize;

use super::kinematics::TruckState;
use super::model::{auth_time, manoeuvre, total_time, FormationScenario, FormationTimeline, Strategy};
use super::FormationError;

/// Horizon used when the closed form has no answer to scale from.
pub const FALLBACK_HORIZON_S: f64 = 3600.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub chi_position: f64,
    pub chi_speed: f64,
    pub tail_position: f64,
    pub platoon_speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub timeline: FormationTimeline,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Copy, Debug)]
struct Body {
    position: f64,
    v: f64,
    a: f64,
    target: f64,
}

impl Body {
    fn from_state(s: &TruckState) -> Self {
        Body {
            position: s.position,
            v: s.v,
            a: s.a,
            target: s.speed_bound(),
        }
    }

    fn step(&mut self, dt: f64) {
        let mut v = self.v + self.a * dt;
        if (self.a > 0.0 && v > self.target) || (self.a < 0.0 && v < self.target) {
            v = self.target;
        }
        self.position += 0.5 * (self.v + v) * dt;
        self.v = v;
    }
}

struct World {
    chi: Body,
    platoon: Vec<Body>,
}

impl World {
    fn gap(&self) -> f64 {
        self.platoon.last().expect("non-empty").position - self.chi.position
    }

    fn step(&mut self, dt: f64) {
        self.chi.step(dt);
        for m in &mut self.platoon {
            m.step(dt);
        }
    }

    fn point(&self, t: f64) -> TracePoint {
        let tail = self.platoon.last().expect("non-empty");
        TracePoint {
            t,
            chi_position: self.chi.position,
            chi_speed: self.chi.v,
            tail_position: tail.position,
            platoon_speed: tail.v,
        }
    }
}

/// Steps the scenario forward with fixed `dt` through authentication and the
/// strategy's cooperative driving until `chi` reaches the joining headway.
pub fn simulate(scenario: &FormationScenario, strategy: Strategy, dt: f64) -> Result<Simulation, FormationError> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(FormationError::InvalidScenario(format!("dt = {dt} outside (0, 0.1]")));
    }
    scenario.validate()?;
    let horizon = match total_time(scenario, strategy) {
        Ok(t) => (10.0 * t.total).max(1.0),
        Err(_) => FALLBACK_HORIZON_S,
    };
    let gamma = auth_time(scenario.n, &scenario.latency);
    let mut world = World {
        chi: Body::from_state(&scenario.chi),
        platoon: scenario.platoon.members().iter().map(Body::from_state).collect(),
    };
    let sample_every = ((0.1 / dt).round() as usize).max(1);
    let mut trace = vec![world.point(0.0)];

    let mut t = 0.0;
    let mut steps = 0usize;
    while t < gamma {
        let h = dt.min(gamma - t);
        world.step(h);
        t = if h < dt { gamma } else { t + h };
        steps += 1;
        if steps.is_multiple_of(sample_every) {
            trace.push(world.point(t));
        }
    }
    let gap_after = world.gap();

    let m = manoeuvre(scenario, gamma, strategy);
    world.chi.a = m.chi.a;
    world.chi.target = m.chi.target;
    for b in &mut world.platoon {
        b.a = m.platoon.a;
        b.target = m.platoon.target;
    }

    let mut theta = 0.0;
    let mut gap = gap_after;
    if gap > scenario.headway {
        loop {
            if theta > horizon {
                return Err(FormationError::DidNotConverge { horizon_s: horizon });
            }
            world.step(dt);
            let next = world.gap();
            steps += 1;
            if next <= scenario.headway {
                theta += dt * (gap - scenario.headway) / (gap - next);
                trace.push(world.point(gamma + theta));
                break;
            }
            theta += dt;
            gap = next;
            if steps.is_multiple_of(sample_every) {
                trace.push(world.point(gamma + theta));
            }
        }
    }
    Ok(Simulation {
        timeline: FormationTimeline::new(gamma, theta, strategy, gap_after),
        trace,
    })
}
