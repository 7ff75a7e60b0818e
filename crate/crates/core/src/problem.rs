use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::final_size::final_size;
use crate::integrate::{self, IntegratorConfig, Passage, Trajectory};
use crate::model::{EpidemicState, ModelParams, Schedule};

/// Model constants, initial state and integrator settings, validated together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub params: ModelParams,
    pub initial: EpidemicState,
    pub integrator: IntegratorConfig,
}

impl Problem {
    pub fn new(params: ModelParams, initial: EpidemicState) -> Result<Self> {
        Self::with_integrator(params, initial, IntegratorConfig::default())
    }

    pub fn with_integrator(
        params: ModelParams,
        initial: EpidemicState,
        integrator: IntegratorConfig,
    ) -> Result<Self> {
        params.validate()?;
        initial.validate()?;
        integrator.validate()?;
        Ok(Problem {
            params,
            initial,
            integrator,
        })
    }

    pub fn trajectory(&self, schedule: &Schedule) -> Result<Trajectory> {
        integrate::integrate(
            &self.params,
            &self.initial,
            schedule,
            self.params.horizon,
            &self.integrator,
        )
    }

    pub fn passage(&self, schedule: &Schedule) -> Result<Passage> {
        integrate::propagate(&self.params, &self.initial, schedule, &self.integrator)
    }

    /// `x∞` at the state reached at `T` under `schedule`.
    ///
    /// Without hard quarantine the control is `σ2` throughout, whatever `t1`;
    /// such schedules share one step layout so the result is exactly equal.
    pub fn final_size(&self, schedule: &Schedule) -> Result<f64> {
        schedule.validate(&self.params)?;
        let schedule = if schedule.eta == 0.0 {
            Schedule { t1: 0.0, eta: 0.0 }
        } else {
            *schedule
        };
        let end = integrate::state_at_horizon(&self.params, &self.initial, &schedule, &self.integrator)?;
        final_size(self.params.sigma0, end.x, end.y)
    }
}

/// `J = x∞(x(T), y(T)) + κ(σ1·η + σ2·(T − η))`.
pub fn objective(problem: &Problem, schedule: &Schedule) -> Result<f64> {
    Ok(problem.final_size(schedule)? + problem.params.running_cost(schedule.eta))
}
