//! Brute-force maximization of `J` over the admissible region `R`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Schedule;
use crate::problem::{objective, Problem};

pub const DEFAULT_N_T1: usize = 400;
pub const DEFAULT_N_ETA: usize = 100;
pub const REFINE_MIN_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub t1: f64,
    pub eta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub n_t1: usize,
    pub n_eta: usize,
    pub best: Schedule,
    pub best_value: f64,
    /// Row-major by `η`: `cells[j * n_t1 + i]`.
    pub cells: Vec<GridCell>,
}

impl GridSearch {
    /// Largest spacing between neighbouring grid points.
    pub fn cell_size(&self, problem: &Problem) -> f64 {
        let p = &problem.params;
        let dt = p.horizon / (self.n_t1 - 1) as f64;
        let de = p.tau / (self.n_eta - 1) as f64;
        dt.max(de)
    }
}

/// `η_j = τ·j/(n_eta − 1)`, `t1_i = (T − η_j)·i/(n_t1 − 1)`.
pub fn grid_points(problem: &Problem, n_t1: usize, n_eta: usize) -> Vec<Schedule> {
    let p = &problem.params;
    (0..n_eta)
        .flat_map(|j| {
            let eta = p.tau * j as f64 / (n_eta - 1) as f64;
            (0..n_t1).map(move |i| Schedule {
                t1: (p.horizon - eta) * i as f64 / (n_t1 - 1) as f64,
                eta,
            })
        })
        .collect()
}

fn better(a: &GridCell, b: &GridCell) -> bool {
    a.value > b.value || (a.value == b.value && (a.t1, a.eta) < (b.t1, b.eta))
}

pub fn grid_search(problem: &Problem, n_t1: usize, n_eta: usize) -> Result<GridSearch> {
    if n_t1 < 2 {
        return Err(Error::domain("oracle.n_t1", format!("must be >= 2, got {n_t1}")));
    }
    if n_eta < 2 {
        return Err(Error::domain("oracle.n_eta", format!("must be >= 2, got {n_eta}")));
    }
    let cells: Vec<GridCell> = grid_points(problem, n_t1, n_eta)
        .into_par_iter()
        .map(|s| {
            Ok(GridCell {
                t1: s.t1,
                eta: s.eta,
                value: objective(problem, &s)?,
            })
        })
        .collect::<Result<_>>()?;
    let best = cells
        .iter()
        .fold(cells[0], |acc, c| if better(c, &acc) { *c } else { acc });
    Ok(GridSearch {
        n_t1,
        n_eta,
        best: Schedule {
            t1: best.t1,
            eta: best.eta,
        },
        best_value: best.value,
        cells,
    })
}

/// Pattern search from `seed` with initial step `radius`, projected onto `R`.
///
/// Moves along `t1`, `η` and the anti-diagonal (which follows the border
/// `t1 + η = T`); only strict improvements are taken and the step halves
/// until it drops below `1e-4`.
pub fn refine(problem: &Problem, seed: Schedule, radius: f64) -> Result<Schedule> {
    Ok(refine_with_value(problem, seed, radius)?.0)
}

pub fn refine_with_value(problem: &Problem, seed: Schedule, radius: f64) -> Result<(Schedule, f64)> {
    let p = &problem.params;
    seed.validate(p)?;
    let mut current = seed;
    let mut value = objective(problem, &current)?;
    let mut step = radius.max(REFINE_MIN_STEP);
    while step >= REFINE_MIN_STEP {
        let moves = [
            (step, 0.0),
            (-step, 0.0),
            (0.0, step),
            (0.0, -step),
            (step, -step),
            (-step, step),
        ];
        let mut improved = false;
        for (dt, de) in moves {
            let trial = Schedule::project(p, current.t1 + dt, current.eta + de);
            if trial == current {
                continue;
            }
            let v = objective(problem, &trial)?;
            if v > value {
                current = trial;
                value = v;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((current, value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub grid: GridSearch,
    pub refined: Schedule,
    pub refined_value: f64,
}

/// Grid search followed by refinement from the grid argmax.
pub fn maximize(problem: &Problem, n_t1: usize, n_eta: usize) -> Result<OracleResult> {
    let grid = grid_search(problem, n_t1, n_eta)?;
    let radius = grid.cell_size(problem);
    let (refined, refined_value) = refine_with_value(problem, grid.best, radius)?;
    Ok(OracleResult {
        grid,
        refined,
        refined_value,
    })
}
