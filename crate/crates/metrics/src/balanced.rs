use std::collections::BTreeSet;

use scenemine_core::{Error, Result, ScenarioSet, Timestamp};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Log,
    Timestamp,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (false, true) => self.fn_ += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fn_ += other.fn_;
        self.fp += other.fp;
        self.tn += other.tn;
    }

    /// `(TPR + TNR) / 2` as a percentage; needs at least one positive and one negative.
    pub fn balanced_accuracy(&self) -> Result<f64> {
        let (pos, neg) = (self.tp + self.fn_, self.tn + self.fp);
        if pos == 0 || neg == 0 {
            return Err(Error::InvalidArgument(format!(
                "balanced accuracy needs positives and negatives (got {pos} positive, {neg} negative)"
            )));
        }
        let tpr = self.tp as f64 / pos as f64;
        let tnr = self.tn as f64 / neg as f64;
        Ok((tpr + tnr) / 2.0 * 100.0)
    }
}

fn referred_times(s: &ScenarioSet) -> BTreeSet<Timestamp> {
    s.pairs().map(|(_, t)| t).collect()
}

/// One (prompt, log) pair: positive iff any referred object exists.
pub fn log_outcome(pred: &ScenarioSet, gt: &ScenarioSet) -> Confusion {
    let mut c = Confusion::default();
    c.record(pred.pair_count() > 0, gt.pair_count() > 0);
    c
}

/// Every timestamp of the log (plus any stamp either side mentions) classified
/// by whether a referred object exists there.
pub fn timestamp_outcomes(pred: &ScenarioSet, gt: &ScenarioSet, log_times: &[Timestamp]) -> Confusion {
    let (p, g) = (referred_times(pred), referred_times(gt));
    let domain: BTreeSet<Timestamp> = log_times.iter().chain(&p).chain(&g).copied().collect();
    let mut c = Confusion::default();
    for t in domain {
        c.record(p.contains(&t), g.contains(&t));
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_formula() {
        // TPR 0.8, TNR 0.6.
        let c = Confusion { tp: 8, fn_: 2, tn: 6, fp: 4 };
        assert!((c.balanced_accuracy().unwrap() - 70.0).abs() < 1e-12);
        assert_eq!(Confusion { tp: 3, fn_: 0, tn: 5, fp: 0 }.balanced_accuracy().unwrap(), 100.0);
        assert!(Confusion { tp: 3, ..Confusion::default() }.balanced_accuracy().is_err());
        assert!(Confusion::default().balanced_accuracy().is_err());
    }

    #[test]
    fn all_positive_predictor_is_fifty() {
        let mut everything = ScenarioSet::new();
        everything.insert_all("a", (1..=4).map(Timestamp));
        let mut gt = ScenarioSet::new();
        gt.insert("a", Timestamp(2));
        let times: Vec<Timestamp> = (1..=4).map(Timestamp).collect();
        let mut logs = log_outcome(&everything, &gt);
        logs.merge(&log_outcome(&everything, &ScenarioSet::new()));
        assert_eq!(logs.balanced_accuracy().unwrap(), 50.0);
        let stamps = timestamp_outcomes(&everything, &gt, &times);
        assert_eq!(stamps.balanced_accuracy().unwrap(), 50.0);
    }
}
