//! Query accounting.
//!
//! The ledger counts two things: hypothetical quantum queries charged by the
//! cost model, and classical samples actually drawn by the simulation. Both
//! counters only grow. Every charge is also attributed to the phase that is
//! active when it happens.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Concrete cost model for the mean-estimation contract:
/// `ceil(c_qme * L * sqrt(d) / sigma_hat * max(log_floor, ln(1/delta)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub c_qme: f64,
    pub log_floor: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            c_qme: 1.0,
            log_floor: 1.0,
        }
    }
}

impl CostModel {
    pub fn with_constant(c_qme: f64) -> Self {
        Self {
            c_qme,
            ..Self::default()
        }
    }

    pub fn cost(&self, l_eff: f64, sigma_hat: f64, delta: f64, dim: usize) -> Result<u64> {
        self.cost_real(l_eff, sigma_hat, delta, dim).map(|q| q as u64)
    }

    /// [`CostModel::cost`] as a float, without saturating at `u64::MAX`.
    pub fn cost_real(&self, l_eff: f64, sigma_hat: f64, delta: f64, dim: usize) -> Result<f64> {
        if !(sigma_hat > 0.0) || !sigma_hat.is_finite() {
            return Err(invalid(format!("sigma_hat must be positive, got {sigma_hat}")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1], got {delta}")));
        }
        if !(l_eff >= 0.0) || !l_eff.is_finite() {
            return Err(invalid(format!("L_eff must be finite and >= 0, got {l_eff}")));
        }
        let log_term = (1.0 / delta).ln().max(self.log_floor);
        let raw = self.c_qme * l_eff * (dim as f64).sqrt() / sigma_hat * log_term;
        // absorb last-ulp noise so that exact integers do not round up
        Ok((raw * (1.0 - 1e-12)).ceil().max(0.0))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTally {
    pub charged: u64,
    pub drawn: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryLedger {
    quantum_queries_charged: u64,
    /// Compensated charge: the realized charge with every randomized level
    /// cost replaced by its conditional expectation given the call's inputs.
    quantum_queries_expected: f64,
    classical_samples_drawn: u64,
    per_phase: BTreeMap<String, PhaseTally>,
    #[serde(skip)]
    phase: String,
}

impl Default for QueryLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        Self {
            quantum_queries_charged: 0,
            quantum_queries_expected: 0.0,
            classical_samples_drawn: 0,
            per_phase: BTreeMap::new(),
            phase: "main".to_string(),
        }
    }

    pub fn quantum_queries(&self) -> u64 {
        self.quantum_queries_charged
    }

    /// Unbiased, low-variance estimate of the expected charge of the run.
    pub fn expected_queries(&self) -> f64 {
        self.quantum_queries_expected
    }

    /// Shift the compensated charge only; used to swap a realized random
    /// cost for its expectation.
    pub fn compensate(&mut self, delta: f64) {
        self.quantum_queries_expected += delta;
    }

    pub fn classical_samples(&self) -> u64 {
        self.classical_samples_drawn
    }

    pub fn phases(&self) -> &BTreeMap<String, PhaseTally> {
        &self.per_phase
    }

    pub fn phase(&self) -> &str {
        &self.phase
    }

    /// Switch the active phase, returning the previous label.
    pub fn set_phase(&mut self, label: &str) -> String {
        std::mem::replace(&mut self.phase, label.to_string())
    }

    pub fn charge(&mut self, queries: u64) {
        self.quantum_queries_charged += queries;
        self.quantum_queries_expected += queries as f64;
        self.per_phase.entry(self.phase.clone()).or_default().charged += queries;
    }

    pub fn record_samples(&mut self, n: u64) {
        self.classical_samples_drawn += n;
        self.per_phase.entry(self.phase.clone()).or_default().drawn += n;
    }

    /// Component-wise sum; the active phase of `self` is kept.
    pub fn merge(&mut self, other: &QueryLedger) {
        self.quantum_queries_charged += other.quantum_queries_charged;
        self.quantum_queries_expected += other.quantum_queries_expected;
        self.classical_samples_drawn += other.classical_samples_drawn;
        for (k, t) in &other.per_phase {
            let e = self.per_phase.entry(k.clone()).or_default();
            e.charged += t.charged;
            e.drawn += t.drawn;
        }
    }
}

/// Charge one invocation of the mean-estimation contract and return its cost.
pub fn charge_cost(
    ledger: &mut QueryLedger,
    model: &CostModel,
    l_eff: f64,
    sigma_hat: f64,
    delta: f64,
    dim: usize,
) -> Result<u64> {
    let q = model.cost(l_eff, sigma_hat, delta, dim)?;
    ledger.charge(q);
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_examples() {
        let m = CostModel::default();
        let mut l = QueryLedger::new();
        assert_eq!(charge_cost(&mut l, &m, 1.0, 1.0, (-1.0f64).exp(), 1).unwrap(), 1);
        assert_eq!(charge_cost(&mut l, &m, 2.0, 0.1, 0.5, 4).unwrap(), 40);
        assert_eq!(charge_cost(&mut l, &m, 1.0, 0.01, 1e-6, 9).unwrap(), 4145);
        assert_eq!(l.quantum_queries(), 1 + 40 + 4145);
    }

    #[test]
    fn cost_rejects_bad_arguments() {
        let m = CostModel::default();
        assert!(m.cost(1.0, 0.0, 0.5, 1).is_err());
        assert!(m.cost(1.0, -1.0, 0.5, 1).is_err());
        assert!(m.cost(1.0, 0.1, 0.0, 1).is_err());
        assert!(m.cost(1.0, 0.1, 1.5, 1).is_err());
    }

    #[test]
    fn constant_scales_linearly() {
        let a = CostModel::with_constant(1.0).cost(1.0, 0.01, 0.01, 4).unwrap();
        let b = CostModel::with_constant(3.0).cost(1.0, 0.01, 0.01, 4).unwrap();
        // each count is a ceiling, so they differ from exact scaling by < 3
        assert!((b as i64 - 3 * a as i64).abs() < 3);
    }

    #[test]
    fn phases_partition_totals() {
        let mut l = QueryLedger::new();
        l.charge(5);
        l.set_phase("b");
        l.charge(7);
        l.record_samples(3);
        let sum: u64 = l.phases().values().map(|t| t.charged).sum();
        assert_eq!(sum, l.quantum_queries());
        assert_eq!(l.phases()["b"], PhaseTally { charged: 7, drawn: 3 });

        let mut m = QueryLedger::new();
        m.merge(&l);
        m.merge(&l);
        assert_eq!(m.quantum_queries(), 24);
        assert_eq!(m.phases()["main"].charged, 10);
    }
}
