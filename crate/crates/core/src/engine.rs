//! Probabilities computed by checking data.
//!
//! Every quantity here is a single pass over the `K` stored sequences. No
//! model space is ever enumerated: a valuation nobody observed has zero
//! probability under every datum and drops out of every sum.
//!
//! Two semantics are offered through [`Mu`]:
//!
//! * `Mu::Finite(μ)`: each timed formula is read as a Bernoulli variable that
//!   is true with probability `μ` in a model satisfying it and `1 - μ`
//!   otherwise. A datum `d` then supports a condition `X` with weight
//!   `μ^{|X|_d} (1-μ)^{|X| - |X|_d}`, where `|X|_d` counts the items of `X`
//!   (with multiplicity) that `d` satisfies.
//! * `Mu::Limit`: the same quantities as `μ → 1`, in closed form and exact.
//!   Only the data satisfying the largest number of condition items survive
//!   the limit; they form the prime evidence. If nothing satisfies a single
//!   item, every datum ties at zero and the condition is uninformative.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::dataset::{Dataset, Valuation};
use crate::error::{Error, Result};
use crate::formula::{BoundFormula, TimedFormula};

/// Exact probability.
pub type Rational = Ratio<u64>;

/// A multiset of timed formulas. Order is kept for display, repetition counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Condition {
    items: Vec<TimedFormula>,
}

impl Condition {
    pub fn new(items: Vec<TimedFormula>) -> Self {
        Condition { items }
    }

    pub fn empty() -> Self {
        Condition::default()
    }

    pub fn items(&self) -> &[TimedFormula] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, item: TimedFormula) {
        self.items.push(item);
    }

    /// Multiset union.
    pub fn union(&self, other: &Condition) -> Condition {
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        Condition { items }
    }

    /// The sub-multiset at the given item positions.
    pub fn select(&self, positions: &[usize]) -> Condition {
        Condition {
            items: positions.iter().map(|&i| self.items[i].clone()).collect(),
        }
    }

    /// Replace every item that is a conjunction of literals by its literals,
    /// each at the item's time. Other items are left alone.
    pub fn split_literals(&self) -> Condition {
        let mut items = Vec::with_capacity(self.items.len());
        for item in &self.items {
            match item.formula.conjunct_literals() {
                Some(lits) => {
                    items.extend(lits.into_iter().map(|f| TimedFormula::new(f, item.time)))
                }
                None => items.push(item.clone()),
            }
        }
        Condition { items }
    }
}

impl FromIterator<TimedFormula> for Condition {
    fn from_iter<I: IntoIterator<Item = TimedFormula>>(iter: I) -> Self {
        Condition::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mu {
    /// μ → 1, evaluated exactly.
    Limit,
    Finite(f64),
}

impl Mu {
    pub fn finite(value: f64) -> Result<Mu> {
        if (0.0..=1.0).contains(&value) {
            Ok(Mu::Finite(value))
        } else {
            Err(Error::InvalidMu(value))
        }
    }
}

impl fmt::Display for Mu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mu::Limit => f.write_str("limit"),
            Mu::Finite(m) => write!(f, "{m}"),
        }
    }
}

/// A probability: exact in limit mode, floating point in finite mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prob {
    Exact(Rational),
    Approx(f64),
}

impl Prob {
    pub fn to_f64(self) -> f64 {
        match self {
            Prob::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Prob::Approx(x) => x,
        }
    }

    pub fn exact(self) -> Option<Rational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Approx(_) => None,
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Prob::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Cardinality-maximal founded subsets of a condition and their evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MfsResult {
    /// Largest number of condition items any single datum satisfies.
    pub max_count: usize,
    /// Data attaining `max_count`; empty when `max_count == 0`.
    pub prime_evidence: Vec<usize>,
    /// Distinct satisfied sub-multisets of the prime evidence, as sorted item
    /// positions into the condition, in order of first occurrence.
    pub subsets: Vec<Vec<usize>>,
}

impl MfsResult {
    pub fn is_founded(&self) -> bool {
        self.max_count > 0
    }
}

/// A condition with times checked and atoms resolved against one dataset.
pub(crate) struct Compiled {
    items: Vec<(BoundFormula, usize)>,
}

impl Compiled {
    pub(crate) fn new(ds: &Dataset, cond: &Condition) -> Result<Self> {
        let vocab = ds.vocabulary();
        let resolve = |name: &str| vocab.index_of(name);
        let items = cond
            .items
            .iter()
            .map(|it| {
                ds.check_time(it.time)?;
                Ok((it.formula.bind(&resolve)?, it.time))
            })
            .collect::<Result<_>>()?;
        Ok(Compiled { items })
    }

    pub(crate) fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub(crate) fn count(&self, ds: &Dataset, k: usize) -> usize {
        self.items
            .iter()
            .filter(|(f, t)| f.eval_bits(ds.step_bits(k, *t)))
            .count()
    }

    #[inline]
    pub(crate) fn holds(&self, ds: &Dataset, k: usize) -> bool {
        self.items
            .iter()
            .all(|(f, t)| f.eval_bits(ds.step_bits(k, *t)))
    }

    fn satisfied_positions(&self, ds: &Dataset, k: usize) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, (f, t))| f.eval_bits(ds.step_bits(k, *t)))
            .map(|(i, _)| i)
            .collect()
    }

    /// `ln( μ^{s} (1-μ)^{n-s} )` for datum `k`, with `0 · ln 0 = 0`.
    pub(crate) fn log_weight(&self, ds: &Dataset, k: usize, mu: f64) -> f64 {
        let s = self.count(ds, k);
        bernoulli_log_weight(s, self.len() - s, mu)
    }
}

pub(crate) fn bernoulli_log_weight(hits: usize, misses: usize, mu: f64) -> f64 {
    let term = |n: usize, p: f64| if n == 0 { 0.0 } else { n as f64 * p.ln() };
    term(hits, mu) + term(misses, 1.0 - mu)
}

/// Number of items of `cond` (with multiplicity) that sequence `k` satisfies
/// at their times.
pub fn satisfied_count(ds: &Dataset, k: usize, cond: &Condition) -> Result<usize> {
    let c = Compiled::new(ds, cond)?;
    ds.model_of(k, 1)?;
    Ok(c.count(ds, k))
}

/// Sequences satisfying every item of `cond`.
pub fn evidence(ds: &Dataset, cond: &Condition) -> Result<Vec<usize>> {
    let c = Compiled::new(ds, cond)?;
    Ok((0..ds.len()).filter(|&k| c.holds(ds, k)).collect())
}

/// Maximal founded subsets via the arg-max of satisfied counts.
///
/// Every datum that is evidence of some cardinality-maximal founded subset
/// satisfies exactly `max_count` items, and every datum satisfying
/// `max_count` items is evidence of the subset it satisfies, so one pass over
/// the data finds them all.
pub fn mfs(ds: &Dataset, cond: &Condition) -> Result<MfsResult> {
    let c = Compiled::new(ds, cond)?;
    let mut best = 0;
    let mut prime = Vec::new();
    for k in 0..ds.len() {
        let s = c.count(ds, k);
        if s > best {
            best = s;
            prime.clear();
        }
        if s == best && s > 0 {
            prime.push(k);
        }
    }
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    let mut seen = HashSet::new();
    for &k in &prime {
        let s = c.satisfied_positions(ds, k);
        if seen.insert(s.clone()) {
            subsets.push(s);
        }
    }
    Ok(MfsResult {
        max_count: best,
        prime_evidence: prime,
        subsets,
    })
}

/// `p(Ω | Δ)`.
pub fn conditional(ds: &Dataset, target: &Condition, cond: &Condition, mu: Mu) -> Result<Prob> {
    let omega = Compiled::new(ds, target)?;
    let delta = Compiled::new(ds, cond)?;
    match mu {
        Mu::Limit => {
            // Running arg-max. At max count 0 every datum ties, which gives
            // the unconditioned marginal.
            let (mut best, mut support, mut hits) = (0usize, 0u64, 0u64);
            for k in 0..ds.len() {
                let s = delta.count(ds, k);
                if s > best {
                    best = s;
                    support = 0;
                    hits = 0;
                }
                if s == best {
                    support += 1;
                    hits += u64::from(omega.holds(ds, k));
                }
            }
            Ok(Prob::Exact(Ratio::new(hits, support)))
        }
        Mu::Finite(m) => {
            Mu::finite(m)?;
            let weights: Vec<f64> = (0..ds.len()).map(|k| delta.log_weight(ds, k, m)).collect();
            let top = max_finite(&weights).ok_or_else(|| zero_condition(m))?;
            let (mut num, mut den) = (0.0, 0.0);
            for (k, w) in weights.iter().enumerate() {
                let base = (w - top).exp();
                den += base;
                num += base * omega.log_weight(ds, k, m).exp();
            }
            Ok(Prob::Approx(num / den))
        }
    }
}

/// `p(Ω)`.
pub fn marginal(ds: &Dataset, target: &Condition, mu: Mu) -> Result<Prob> {
    let omega = Compiled::new(ds, target)?;
    match mu {
        Mu::Limit => {
            let hits = (0..ds.len()).filter(|&k| omega.holds(ds, k)).count() as u64;
            Ok(Prob::Exact(Ratio::new(hits, ds.len() as u64)))
        }
        Mu::Finite(m) => {
            Mu::finite(m)?;
            let total: f64 = (0..ds.len())
                .map(|k| omega.log_weight(ds, k, m).exp())
                .sum();
            Ok(Prob::Approx(total / ds.len() as f64))
        }
    }
}

/// `p(α^t = value)` read straight off the Bernoulli interpretation: a model
/// contributes `μ` when `α` has truth value `value` in it and `1 - μ`
/// otherwise. In limit mode this is the share of data where `α` has that value.
pub fn truth_value_probability(
    ds: &Dataset,
    item: &TimedFormula,
    value: bool,
    mu: Mu,
) -> Result<Prob> {
    let single = Condition::new(vec![item.clone()]);
    let c = Compiled::new(ds, &single)?;
    let agree = (0..ds.len()).filter(|&k| c.holds(ds, k) == value).count();
    let k = ds.len();
    match mu {
        Mu::Limit => Ok(Prob::Exact(Ratio::new(agree as u64, k as u64))),
        Mu::Finite(m) => {
            Mu::finite(m)?;
            Ok(Prob::Approx(
                (agree as f64 * m + (k - agree) as f64 * (1.0 - m)) / k as f64,
            ))
        }
    }
}

/// `p(D | Δ)`, one entry per stored sequence in file order.
pub fn posterior_data(ds: &Dataset, cond: &Condition, mu: Mu) -> Result<Vec<Prob>> {
    match mu {
        Mu::Limit => {
            let r = mfs(ds, cond)?;
            let mut out = vec![Prob::Exact(Rational::zero()); ds.len()];
            if r.is_founded() {
                let share = Ratio::new(1, r.prime_evidence.len() as u64);
                for &k in &r.prime_evidence {
                    out[k] = Prob::Exact(share);
                }
            } else {
                out.fill(Prob::Exact(Ratio::new(1, ds.len() as u64)));
            }
            Ok(out)
        }
        Mu::Finite(m) => {
            Mu::finite(m)?;
            let delta = Compiled::new(ds, cond)?;
            let weights: Vec<f64> = (0..ds.len()).map(|k| delta.log_weight(ds, k, m)).collect();
            let top = max_finite(&weights).ok_or_else(|| zero_condition(m))?;
            let scaled: Vec<f64> = weights.iter().map(|w| (w - top).exp()).collect();
            let total: f64 = scaled.iter().sum();
            Ok(scaled
                .into_iter()
                .map(|w| Prob::Approx(w / total))
                .collect())
        }
    }
}

/// `p(m_n^t, m_o^u, ...)`: the observed joint frequency of the listed models.
pub fn model_joint(ds: &Dataset, pairs: &[(Valuation, usize)]) -> Result<Rational> {
    Ok(Ratio::new(ds.joint_model_count(pairs)?, ds.len() as u64))
}

/// Joint probability of the items in limit mode, summed over the joint model
/// count table: every cell whose models satisfy the items at their times adds
/// `K_{n,o,...} / K`.
pub fn formula_joint(ds: &Dataset, items: &Condition) -> Result<Rational> {
    let compiled = Compiled::new(ds, items)?;
    let mut times: Vec<usize> = compiled.items.iter().map(|(_, t)| *t).collect();
    times.sort_unstable();
    times.dedup();
    let table = ds.joint_counts(&times)?;
    let models = ds.models();
    let mut satisfies: HashMap<(usize, u32), bool> = HashMap::new();
    let mut total = 0u64;
    for (cell, count) in &table {
        let ok = times.iter().zip(cell).all(|(&t, &id)| {
            *satisfies.entry((t, id)).or_insert_with(|| {
                compiled
                    .items
                    .iter()
                    .filter(|(_, it)| *it == t)
                    .all(|(f, _)| f.eval_bits(models.bits(id)))
            })
        });
        if ok {
            total += count;
        }
    }
    Ok(Ratio::new(total, ds.len() as u64))
}

/// Whether `Ω` follows empirically from every maximal founded subset of `Δ`,
/// i.e. the evidence of each subset is contained in the evidence of `Ω`.
pub fn empirical_consequence(ds: &Dataset, cond: &Condition, target: &Condition) -> Result<bool> {
    let r = mfs(ds, cond)?;
    if !r.is_founded() {
        return Err(Error::UnfoundedCondition);
    }
    let omega: HashSet<usize> = evidence(ds, target)?.into_iter().collect();
    for s in &r.subsets {
        let sub = cond.select(s);
        if !evidence(ds, &sub)?.iter().all(|k| omega.contains(k)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The same relation read off the limit-mode conditional: `p(Ω | Δ) = 1`.
pub fn consequence_by_probability(
    ds: &Dataset,
    cond: &Condition,
    target: &Condition,
) -> Result<bool> {
    if !mfs(ds, cond)?.is_founded() {
        return Err(Error::UnfoundedCondition);
    }
    let p = conditional(ds, target, cond, Mu::Limit)?;
    Ok(p.exact().is_some_and(|r| r.is_one()))
}

fn max_finite(weights: &[f64]) -> Option<f64> {
    weights
        .iter()
        .copied()
        .filter(|w| w.is_finite())
        .fold(None, |acc, w| Some(acc.map_or(w, |a: f64| a.max(w))))
}

fn zero_condition(mu: f64) -> Error {
    if mu == 1.0 {
        Error::UnfoundedConditionAtMuOne
    } else {
        Error::ZeroProbabilityCondition(mu)
    }
}
