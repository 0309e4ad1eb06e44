use serde_json::{json, Value};

use super::Method;
use crate::rational::{format_exact, to_f64, Rational};

/// Outcome of one outer iteration.
#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Incumbent objective after this iteration (best so far for SA).
    pub objective: Rational,
    /// `None` when the annealer output decoded to an infeasible solution.
    pub candidate_objective: Option<Rational>,
    pub qubo_vars: usize,
    pub annealer_steps: u64,
    pub accepted: bool,
    pub feasible: bool,
    /// Sub-QUBO energy of the annealer's answer.
    pub candidate_energy: Option<Rational>,
    /// Sub-QUBO energy of the incumbent's encoding.
    pub incumbent_energy: Option<Rational>,
    pub wall_ms: f64,
}

/// Equality ignores wall time.
impl PartialEq for IterationRecord {
    fn eq(&self, o: &Self) -> bool {
        self.iteration == o.iteration
            && self.objective == o.objective
            && self.candidate_objective == o.candidate_objective
            && self.qubo_vars == o.qubo_vars
            && self.annealer_steps == o.annealer_steps
            && self.accepted == o.accepted
            && self.feasible == o.feasible
            && self.candidate_energy == o.candidate_energy
            && self.incumbent_energy == o.incumbent_energy
    }
}

fn exact(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, |v| Value::String(format_exact(v)))
}

fn approx(r: &Option<Rational>) -> Value {
    r.as_ref().map_or(Value::Null, |v| json!(to_f64(v)))
}

impl IterationRecord {
    pub fn to_json(&self) -> Value {
        json!({
            "iteration": self.iteration,
            "objective": to_f64(&self.objective),
            "objective_exact": format_exact(&self.objective),
            "candidate_objective": approx(&self.candidate_objective),
            "candidate_objective_exact": exact(&self.candidate_objective),
            "qubo_vars": self.qubo_vars,
            "annealer_steps": self.annealer_steps,
            "accepted": self.accepted,
            "feasible": self.feasible,
            "candidate_energy": exact(&self.candidate_energy),
            "incumbent_energy": exact(&self.incumbent_energy),
            "wall_ms": self.wall_ms,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace<S> {
    pub method: Method,
    pub initial_objective: Rational,
    /// Records for iterations `1..`.
    pub records: Vec<IterationRecord>,
    pub final_solution: S,
    pub final_objective: Rational,
}

impl<S> RunTrace<S> {
    pub fn new(
        method: Method,
        initial_objective: Rational,
        records: Vec<IterationRecord>,
        final_solution: S,
        final_objective: Rational,
    ) -> Self {
        Self {
            method,
            initial_objective,
            records,
            final_solution,
            final_objective,
        }
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Incumbent objective series, starting with the initial objective.
    pub fn objective_series(&self) -> Vec<Rational> {
        std::iter::once(self.initial_objective)
            .chain(self.records.iter().map(|r| r.objective))
            .collect()
    }

    pub fn accepted_count(&self) -> usize {
        self.records.iter().filter(|r| r.accepted).count()
    }

    /// Fraction of iterations whose annealer output was infeasible.
    pub fn infeasible_rate(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        self.records.iter().filter(|r| !r.feasible).count() as f64 / self.records.len() as f64
    }

    pub fn total_annealer_steps(&self) -> u64 {
        self.records.iter().map(|r| r.annealer_steps).sum()
    }

    /// One JSON object per line: an iteration-0 line for the initial solution,
    /// then one per record.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let head = json!({
            "iteration": 0,
            "method": self.method.as_str(),
            "objective": to_f64(&self.initial_objective),
            "objective_exact": format_exact(&self.initial_objective),
        });
        out.push_str(&head.to_string());
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.to_json().to_string());
            out.push('\n');
        }
        out
    }
}
