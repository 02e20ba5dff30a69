// SPDX-License-Identifier: Apache-2.0

//! Consecutive-label heuristic: repair after `k` identical fault labels in a row.

use crate::error::{Error, Result};
use crate::model::{ModelBundle, HEALTHY};
use crate::sim::{Controller, DecisionContext};

use super::mcda::{Dwell, DEFAULT_DWELL};

#[derive(Debug, Clone)]
pub struct KStepController {
    k: usize,
    no_action: usize,
    repairs: Vec<Option<usize>>,
    streak_label: Option<usize>,
    counter: usize,
    dwell_gap: f64,
    dwell: Dwell,
}

impl KStepController {
    pub fn new(model: &ModelBundle, k: usize) -> Result<Self> {
        Self::with_dwell(model, k, DEFAULT_DWELL)
    }

    pub fn with_dwell(model: &ModelBundle, k: usize, dwell: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let no_action = model.actions().no_action();
        Ok(Self {
            k,
            no_action,
            repairs: model.actions().canonical_repairs().to_vec(),
            streak_label: None,
            counter: 0,
            dwell_gap: dwell,
            dwell: Dwell::new(dwell, no_action),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counter(&self) -> usize {
        self.counter
    }

    fn propose(&self) -> usize {
        match self.streak_label {
            Some(z) if self.counter >= self.k => self.repairs[z].unwrap_or(self.no_action),
            _ => self.no_action,
        }
    }
}

impl Controller for KStepController {
    fn reset(&mut self) {
        self.streak_label = None;
        self.counter = 0;
        self.dwell = Dwell::new(self.dwell_gap, self.no_action);
    }

    fn observe(&mut self, z: usize, _sojourn: f64) {
        if z == HEALTHY {
            self.streak_label = None;
            self.counter = 0;
        } else if self.streak_label == Some(z) {
            self.counter += 1;
        } else {
            self.streak_label = Some(z);
            self.counter = 1;
        }
    }

    fn decide(&mut self, ctx: &DecisionContext) -> usize {
        let proposed = self.propose();
        self.dwell.filter(proposed, ctx.t)
    }

    fn clone_box(&self) -> Box<dyn Controller> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::case_study;

    fn feed(c: &mut KStepController, zs: &[usize], gap: f64) -> Vec<usize> {
        c.reset();
        zs.iter()
            .enumerate()
            .map(|(i, &z)| {
                c.observe(z, gap);
                c.decide(&DecisionContext {
                    t: gap * i as f64,
                    true_state: 0,
                    observation: z,
                })
            })
            .collect()
    }

    #[test]
    fn two_in_a_row_repairs() {
        let m = case_study();
        let mut c = KStepController::new(&m, 2).unwrap();
        let acts = feed(&mut c, &[1, 1], 1.0);
        assert_eq!(acts, vec![0, m.actions().index_of("DwSensorA").unwrap()]);
    }

    #[test]
    fn healthy_label_resets() {
        let m = case_study();
        let mut c = KStepController::new(&m, 2).unwrap();
        assert_eq!(feed(&mut c, &[1, 0, 1], 1.0), vec![0, 0, 0]);
        // A different fault label restarts the streak at one.
        assert_eq!(feed(&mut c, &[2, 3, 3], 1.0)[..2], [0, 0]);
        assert_eq!(c.counter(), 2);
    }

    #[test]
    fn dwell_holds_repair() {
        let m = case_study();
        let mut c = KStepController::new(&m, 1).unwrap();
        let acts = feed(&mut c, &[3, 0, 0], 0.2);
        let bc = m.actions().index_of("BiasCorrect").unwrap();
        assert_eq!(acts, vec![bc, bc, bc]);
        let acts = feed(&mut c, &[3, 0, 0, 0], 0.3);
        assert_eq!(acts, vec![bc, bc, 0, 0]);
    }

    #[test]
    fn zero_k_rejected() {
        assert!(KStepController::new(&case_study(), 0).is_err());
    }
}
