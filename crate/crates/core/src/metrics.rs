//! Aggregate measures over evaluation records: compliance and accuracy per
//! complexity bucket, judge F1, Pearson correlation, predictive power and
//! the false-positive bound.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::generator::{bucket_key, bucket_value, BucketMetric};
use crate::llm::JudgeAnswer;
use crate::pipeline::{JudgeRecord, SequenceRecord, SequenceStatus};

/// Floating scalar the statistics are computed in.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {}
impl<T: Float + FromPrimitive + Debug + Send + Sync + 'static> Scalar for T {}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("no records")]
    Empty,
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("a series is constant; correlation is undefined")]
    ConstantSeries,
    #[error("no pair satisfies the conditioning order")]
    NoQualifyingPairs,
    #[error("invalid probability model: {0}")]
    InvalidModel(String),
}

fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("scalar from f64")
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        cast::<T>(num as f64) / cast::<T>(den as f64)
    }
}

/// Population mean and standard deviation.
pub fn mean_std<T: Scalar>(xs: &[T]) -> (T, T) {
    if xs.is_empty() {
        return (T::zero(), T::zero());
    }
    let n = cast::<T>(xs.len() as f64);
    let mean = xs.iter().fold(T::zero(), |a, &x| a + x) / n;
    let var = xs.iter().fold(T::zero(), |a, &x| a + (x - mean) * (x - mean)) / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport<T = f64> {
    pub value: f64,
    pub count: usize,
    pub compliant: usize,
    pub accurate: usize,
    pub unknown: usize,
    pub leaks: usize,
    /// Sequences that kept equivalence through every round.
    pub maintained: usize,
    pub compliance: T,
    pub accuracy: T,
    pub accuracy_over_compliant: T,
    pub batches: usize,
    /// Across batches, population convention.
    pub accuracy_mean: T,
    pub accuracy_std: T,
    pub compliance_mean: T,
    pub compliance_std: T,
}

#[derive(Default)]
struct Tally {
    count: usize,
    compliant: usize,
    accurate: usize,
    unknown: usize,
    leaks: usize,
    maintained: usize,
}

impl Tally {
    fn add(&mut self, r: &SequenceRecord) {
        self.count += 1;
        self.compliant += r.compliant() as usize;
        self.accurate += r.accurate() as usize;
        self.unknown += r.unknown() as usize;
        self.leaks += r
            .steps
            .first()
            .is_some_and(|s| matches!(s.noncompliance, Some(crate::pipeline::NonCompliance::Leak { .. }))) as usize;
        self.maintained += matches!(r.status, SequenceStatus::Maintained { .. }) as usize;
    }
}

/// Groups records by the bucket of `metric` and reports first-round
/// compliance and accuracy. Records without a metric value are skipped.
pub fn aggregate<T: Scalar>(records: &[SequenceRecord], metric: &BucketMetric) -> Result<Vec<BucketReport<T>>, MetricError> {
    if records.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut buckets: BTreeMap<i64, (Tally, BTreeMap<usize, Tally>)> = BTreeMap::new();
    for r in records {
        let Some(v) = metric.value_of(&r.profile, r.dfa.as_ref()) else { continue };
        let (all, per_batch) = buckets.entry(bucket_key(v)).or_default();
        all.add(r);
        per_batch.entry(r.batch).or_default().add(r);
    }
    Ok(buckets
        .into_iter()
        .map(|(key, (t, per_batch))| {
            let accs: Vec<T> = per_batch.values().map(|b| ratio(b.accurate, b.count)).collect();
            let comps: Vec<T> = per_batch.values().map(|b| ratio(b.compliant, b.count)).collect();
            let (accuracy_mean, accuracy_std) = mean_std(&accs);
            let (compliance_mean, compliance_std) = mean_std(&comps);
            BucketReport {
                value: bucket_value(key),
                count: t.count,
                compliant: t.compliant,
                accurate: t.accurate,
                unknown: t.unknown,
                leaks: t.leaks,
                maintained: t.maintained,
                compliance: ratio(t.compliant, t.count),
                accuracy: ratio(t.accurate, t.count),
                accuracy_over_compliant: ratio(t.accurate, t.compliant),
                batches: per_batch.len(),
                accuracy_mean,
                accuracy_std,
                compliance_mean,
                compliance_std,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary<T = f64> {
    pub count: usize,
    pub compliant: usize,
    pub accurate: usize,
    pub unknown: usize,
    pub leaks: usize,
    pub transport_failures: usize,
    pub compliance: T,
    pub accuracy: T,
    pub accuracy_over_compliant: T,
}

pub fn summarize<T: Scalar>(records: &[SequenceRecord]) -> Summary<T> {
    let mut t = Tally::default();
    records.iter().for_each(|r| t.add(r));
    Summary {
        count: t.count,
        compliant: t.compliant,
        accurate: t.accurate,
        unknown: t.unknown,
        leaks: t.leaks,
        transport_failures: records.iter().filter(|r| r.transport_failed()).count(),
        compliance: ratio(t.compliant, t.count),
        accuracy: ratio(t.accurate, t.count),
        accuracy_over_compliant: ratio(t.accurate, t.compliant),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Report<T = f64> {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub unparseable: usize,
    pub precision: T,
    pub recall: T,
    pub f1: T,
    /// Set when some denominator was zero and the value was reported as 0.
    pub degenerate: bool,
}

impl<T> F1Report<T> {
    pub fn f1_exact(&self) -> Ratio<i64> {
        let den = (2 * self.tp + self.fp + self.fn_) as i64;
        if den == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(2 * self.tp as i64, den)
        }
    }
}

/// Binary F1 with "yes" as the positive prediction and equivalent pairs as
/// positives. Unparseable answers never count as a positive prediction.
pub fn judge_f1<T: Scalar>(answers: &[JudgeAnswer], truth: &[bool]) -> Result<F1Report<T>, MetricError> {
    if answers.len() != truth.len() {
        return Err(MetricError::LengthMismatch(answers.len(), truth.len()));
    }
    let (mut tp, mut fp, mut fn_, mut tn, mut unparseable) = (0, 0, 0, 0, 0);
    for (a, &t) in answers.iter().zip(truth) {
        unparseable += (*a == JudgeAnswer::Unparseable) as usize;
        match (*a == JudgeAnswer::Yes, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let degenerate = tp + fp == 0 || tp + fn_ == 0 || 2 * tp + fp + fn_ == 0;
    Ok(F1Report {
        tp,
        fp,
        fn_,
        tn,
        unparseable,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        f1: ratio(2 * tp, 2 * tp + fp + fn_),
        degenerate,
    })
}

pub fn judge_f1_records<T: Scalar>(records: &[JudgeRecord]) -> Result<F1Report<T>, MetricError> {
    let answers: Vec<JudgeAnswer> = records.iter().map(|r| r.answer).collect();
    let truth: Vec<bool> = records.iter().map(|r| r.truth_equivalent).collect();
    judge_f1(&answers, &truth)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation<T = f64> {
    pub rho: T,
    /// Two-sided, from the t-distribution with n-2 degrees of freedom.
    pub p_value: f64,
    /// Exact two-sided permutation p-value, computed for n ≤ 8.
    pub p_permutation: Option<f64>,
    pub n: usize,
}

fn pearson_rho<T: Scalar>(xs: &[T], ys: &[T]) -> Option<T> {
    let (mx, _) = mean_std(xs);
    let (my, _) = mean_std(ys);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
        syy = syy + (y - my) * (y - my);
    }
    if sxx == T::zero() || syy == T::zero() {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

pub const PERMUTATION_MAX_N: usize = 8;

pub fn pearson<T: Scalar>(xs: &[T], ys: &[T]) -> Result<Correlation<T>, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 3 {
        return Err(MetricError::TooFewPoints { need: 3, got: n });
    }
    let rho = pearson_rho(xs, ys).ok_or(MetricError::ConstantSeries)?;
    let r = rho.to_f64().unwrap_or(0.0);
    let df = (n - 2) as f64;
    let p_value = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    let p_permutation = (n <= PERMUTATION_MAX_N).then(|| permutation_p(xs, ys, r));
    Ok(Correlation { rho, p_value, p_permutation, n })
}

/// Fraction of the n! pairings whose |ρ| reaches the observed |ρ|.
fn permutation_p<T: Scalar>(xs: &[T], ys: &[T], observed: f64) -> f64 {
    let mut perm: Vec<T> = ys.to_vec();
    let n = perm.len();
    let (mut hits, mut total) = (0u64, 0u64);
    let mut c = vec![0usize; n];
    let mut visit = |p: &[T]| {
        total += 1;
        let r = pearson_rho(xs, p).and_then(|r| r.to_f64()).unwrap_or(0.0);
        if r.abs() >= observed.abs() - 1e-12 {
            hits += 1;
        }
    };
    // Heap's algorithm.
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub qualifying: usize,
    pub agreeing: usize,
}

impl PowerEstimate {
    pub fn exact(&self) -> Ratio<i64> {
        Ratio::new(self.agreeing as i64, self.qualifying as i64)
    }

    pub fn value<T: Scalar>(&self) -> T {
        ratio(self.agreeing, self.qualifying)
    }
}

/// Maximum-likelihood estimate of P(x_i ≥ x_j | y_i ≥ y_j) over ordered
/// pairs i ≠ j. With `strict`, only pairs with y_i > y_j qualify; otherwise
/// ties in y count in both orders.
pub fn predictive_power<T: PartialOrd>(xs: &[T], ys: &[T], strict: bool) -> Result<PowerEstimate, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricError::TooFewPoints { need: 2, got: xs.len() });
    }
    let mut est = PowerEstimate { qualifying: 0, agreeing: 0 };
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if i == j {
                continue;
            }
            let q = if strict { ys[i] > ys[j] } else { ys[i] >= ys[j] };
            if q {
                est.qualifying += 1;
                est.agreeing += (xs[i] >= xs[j]) as usize;
            }
        }
    }
    if est.qualifying == 0 {
        return Err(MetricError::NoQualifyingPairs);
    }
    Ok(est)
}

/// Per-stage success probabilities of the chance model for false
/// positives: informalization accuracy p_I, autoformalization accuracy
/// p_A, and the probability p_H of recovering an equivalent expression
/// from an inaccurate description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FalsePositiveModel<T> {
    pub p_i: T,
    pub p_a: T,
    pub p_h: T,
    pub n: u32,
}

impl<T: Num + Copy + PartialOrd> FalsePositiveModel<T> {
    pub fn new(p_i: T, p_a: T, p_h: T, n: u32) -> Result<Self, MetricError> {
        for (name, p) in [("p_I", p_i), ("p_A", p_a), ("p_H", p_h)] {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(MetricError::InvalidModel(format!("{name} outside [0, 1]")));
            }
        }
        if n == 0 {
            return Err(MetricError::InvalidModel("n must be at least 1".into()));
        }
        Ok(Self { p_i, p_a, p_h, n })
    }
}

/// (1 − p_I)ⁿ (1 − p_A)ⁿ p_Hⁿ.
pub fn false_positive_bound<T: Num + Copy>(m: &FalsePositiveModel<T>) -> T {
    let one = T::one();
    let n = m.n as usize;
    num_traits::pow(one - m.p_i, n) * num_traits::pow(one - m.p_a, n) * num_traits::pow(m.p_h, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0f64, 0.5]);
        assert_eq!(m, 0.75);
        assert_eq!(s, 0.25);
    }

    #[test]
    fn pearson_fixtures() {
        assert_eq!(pearson(&[1.0f64, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap().rho, 1.0);
        assert_eq!(pearson(&[1.0f64, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap().rho, -1.0);
        let c = pearson(&[1.0f64, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((c.rho - 0.8).abs() < 1e-12);
        // t = 0.8·√(2/0.36) = 1.8856, two-sided p with 2 df is 0.2.
        assert!((c.p_value - 0.2).abs() < 1e-9, "{}", c.p_value);
        // |ρ| ≥ 0.8 for 8 of the 24 orderings of ys: the identity and its
        // reverse (±1) and the three adjacent swaps of each (±0.8).
        assert_eq!(c.p_permutation, Some(8.0 / 24.0));
        assert_eq!(pearson(&[1.0f64, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(MetricError::ConstantSeries));
        assert!(matches!(pearson(&[1.0f64, 2.0], &[1.0, 2.0]), Err(MetricError::TooFewPoints { .. })));
    }

    #[test]
    fn pearson_in_f32() {
        let c = pearson(&[1.0f32, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((c.rho - 0.8).abs() < 1e-6);
    }

    #[test]
    fn power_fixtures() {
        assert_eq!(predictive_power(&[0.9, 0.5, 0.1], &[0.8, 0.6, 0.2], false).unwrap().exact(), Ratio::from_integer(1));
        assert_eq!(predictive_power(&[3, 2, 1], &[3, 1, 2], false).unwrap().exact(), Ratio::new(2, 3));
        assert_eq!(predictive_power(&[1, 2], &[2, 1], false).unwrap().exact(), Ratio::from_integer(0));
        assert_eq!(predictive_power(&[1, 2], &[1, 1], true), Err(MetricError::NoQualifyingPairs));
        // Ties in y count in both orders: both directions qualify, one agrees.
        assert_eq!(predictive_power(&[1, 2], &[1, 1], false).unwrap(), PowerEstimate { qualifying: 2, agreeing: 1 });
    }

    #[test]
    fn false_positive_fixtures() {
        let m = FalsePositiveModel::new(0.5, 0.5, 0.1, 1).unwrap();
        assert!((false_positive_bound(&m) - 0.025).abs() < 1e-15);
        let r = |n, d| Ratio::<i64>::new(n, d);
        let m = FalsePositiveModel::new(r(1, 2), r(1, 2), r(1, 10), 1).unwrap();
        assert_eq!(false_positive_bound(&m), r(1, 40));
        let m = FalsePositiveModel { n: 2, ..m };
        assert_eq!(false_positive_bound(&m), r(1, 1600));
        let m = FalsePositiveModel::new(1.0, 0.3, 0.9, 5).unwrap();
        assert_eq!(false_positive_bound(&m), 0.0);
        assert!(FalsePositiveModel::new(1.5, 0.3, 0.9, 5).is_err());
        assert!(FalsePositiveModel::new(0.5, 0.3, 0.9, 0).is_err());
    }

    #[test]
    fn f1_fixtures() {
        let yes = vec![JudgeAnswer::Yes; 4];
        let truth = [true, true, false, false];
        let r = judge_f1::<f64>(&yes, &truth).unwrap();
        assert_eq!((r.precision, r.recall), (0.5, 1.0));
        assert_eq!(r.f1, 2.0 / 3.0);
        assert_eq!(r.f1_exact(), Ratio::new(2, 3));
        let r = judge_f1::<f64>(&[JudgeAnswer::Unparseable; 4], &truth).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert!(r.degenerate);
        let r = judge_f1::<f64>(&[JudgeAnswer::Yes, JudgeAnswer::Yes, JudgeAnswer::No, JudgeAnswer::No], &truth).unwrap();
        assert_eq!(r.f1, 1.0);
    }
}
