//! Brute-force reference computations used to check the engine.
//!
//! Everything here follows the generative model literally: a uniform prior
//! over stored sequences, an indicator `p(M^t = m | d)`, and an independent
//! Bernoulli(μ) reading of every timed formula given a model. Sums run over
//! data *and* models; nothing from the engine is reused except formula
//! evaluation. It is slow on purpose.

use std::collections::HashSet;

use crate::dataset::{Dataset, Valuation};
use crate::engine::Condition;
use crate::error::{Error, Result};
use crate::formula::{Atom, Formula, TimedFormula};

/// Largest vocabulary for which all `2^n` valuations may be enumerated.
pub const MAX_ENUMERATED_ATOMS: usize = 12;
/// Largest candidate space the exhaustive explanation search will scan.
pub const MAX_CANDIDATES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// `μ = 1 - ε` sweep, strictly descending in `(0, 1)`.
    pub epsilon_ladder: Vec<f64>,
    /// Sum over every valuation of the vocabulary instead of the observed ones.
    pub enumerate_all_valuations: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            epsilon_ladder: vec![1e-2, 1e-4, 1e-6, 1e-8],
            enumerate_all_valuations: false,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let ladder = &self.epsilon_ladder;
        if ladder.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(Error::InvalidConfig(
                "epsilon values must lie in (0, 1)".into(),
            ));
        }
        if ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig(
                "epsilon ladder must be strictly descending".into(),
            ));
        }
        if self.enumerate_all_valuations && ds.vocabulary().len() > MAX_ENUMERATED_ATOMS {
            return Err(cap_exceeded(ds.vocabulary().len()));
        }
        Ok(())
    }
}

fn cap_exceeded(atoms: usize) -> Error {
    Error::CapExceeded(format!(
        "cannot enumerate valuations of {atoms} atoms (cap {MAX_ENUMERATED_ATOMS})"
    ))
}

/// The model set summed over: observed valuations, or all of them.
fn model_space(ds: &Dataset, enumerate_all: bool) -> Result<Vec<Valuation>> {
    let n = ds.vocabulary().len();
    if enumerate_all {
        if n > MAX_ENUMERATED_ATOMS {
            return Err(cap_exceeded(n));
        }
        return Ok((0u64..1 << n)
            .map(|bits| {
                Valuation::from_bools(&(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
            })
            .collect());
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for k in 0..ds.len() {
        for t in 1..=ds.horizon() {
            let v = ds.model_of(k, t)?;
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    Ok(out)
}

/// `p(α^t = 1 | M^t = m)` under Bernoulli(μ).
fn interpret(ds: &Dataset, item: &TimedFormula, m: &Valuation, mu: f64) -> Result<f64> {
    let truth = item.formula.eval(&m.named(ds.vocabulary()))?;
    let x = i32::from(truth);
    Ok(mu.powi(x) * (1.0 - mu).powi(1 - x))
}

/// `p(items) = Σ_k p(d_k) Π_t Σ_n p(m_n | d_k) Π_{α@t} p(α^t | m_n)`.
fn joint(ds: &Dataset, items: &[TimedFormula], models: &[Valuation], mu: f64) -> Result<f64> {
    for it in items {
        ds.check_time(it.time)?;
    }
    let prior = 1.0 / ds.len() as f64;
    let mut total = 0.0;
    for k in 0..ds.len() {
        let mut per_datum = 1.0;
        for t in 1..=ds.horizon() {
            let at_t: Vec<&TimedFormula> = items.iter().filter(|it| it.time == t).collect();
            if at_t.is_empty() {
                // Σ_n p(m_n | d_k) = 1
                continue;
            }
            let actual = ds.model_of(k, t)?;
            let mut sum_models = 0.0;
            for m in models {
                let p_m_given_d = if *m == actual { 1.0 } else { 0.0 };
                let mut p_items = 1.0;
                for it in &at_t {
                    p_items *= interpret(ds, it, m, mu)?;
                }
                sum_models += p_items * p_m_given_d;
            }
            per_datum *= sum_models;
        }
        total += prior * per_datum;
    }
    Ok(total)
}

fn zero_denominator(mu: f64) -> Error {
    if mu == 1.0 {
        Error::UnfoundedConditionAtMuOne
    } else {
        Error::ZeroProbabilityCondition(mu)
    }
}

/// `p(Ω | Δ) = p(Ω, Δ) / p(Δ)` by full summation.
pub fn oracle_conditional(
    ds: &Dataset,
    target: &Condition,
    cond: &Condition,
    mu: f64,
    enumerate_all: bool,
) -> Result<f64> {
    let models = model_space(ds, enumerate_all)?;
    let both: Vec<TimedFormula> = target.items().iter().chain(cond.items()).cloned().collect();
    let den = joint(ds, cond.items(), &models, mu)?;
    if den == 0.0 {
        return Err(zero_denominator(mu));
    }
    Ok(joint(ds, &both, &models, mu)? / den)
}

pub fn oracle_marginal(
    ds: &Dataset,
    target: &Condition,
    mu: f64,
    enumerate_all: bool,
) -> Result<f64> {
    let models = model_space(ds, enumerate_all)?;
    joint(ds, target.items(), &models, mu)
}

/// `p(D = d_k | Δ)` for every `k` by Bayes' rule over the full model sum.
pub fn oracle_posterior_data(
    ds: &Dataset,
    cond: &Condition,
    mu: f64,
    enumerate_all: bool,
) -> Result<Vec<f64>> {
    let models = model_space(ds, enumerate_all)?;
    let mut likelihood = Vec::with_capacity(ds.len());
    for k in 0..ds.len() {
        let mut p = 1.0;
        for t in 1..=ds.horizon() {
            let at_t: Vec<&TimedFormula> = cond.items().iter().filter(|it| it.time == t).collect();
            if at_t.is_empty() {
                continue;
            }
            let actual = ds.model_of(k, t)?;
            let mut s = 0.0;
            for m in &models {
                if *m != actual {
                    continue;
                }
                let mut p_items = 1.0;
                for it in &at_t {
                    p_items *= interpret(ds, it, m, mu)?;
                }
                s += p_items;
            }
            p *= s;
        }
        likelihood.push(p / ds.len() as f64);
    }
    for it in cond.items() {
        ds.check_time(it.time)?;
    }
    let total: f64 = likelihood.iter().sum();
    if total == 0.0 {
        return Err(zero_denominator(mu));
    }
    Ok(likelihood.into_iter().map(|p| p / total).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleExplanation {
    /// `path[i][j]`: value of the `j`-th query atom (vocabulary order) at `times[i]`.
    pub path: Vec<Vec<bool>>,
    /// `p(path | Δ)`.
    pub probability: f64,
    /// Every path scoring within the tie tolerance of the best.
    pub ties: Vec<Vec<Vec<bool>>>,
}

/// Exhaustive arg-max of `p(ω | Δ)` over the product of per-time candidate
/// realizations: restrictions observed at that time, or with `enumerate_all`
/// every assignment of the query atoms.
pub fn oracle_explain(
    ds: &Dataset,
    atoms: &[Atom],
    times: &[usize],
    cond: &Condition,
    mu: f64,
    enumerate_all: bool,
    tie_tolerance: f64,
) -> Result<OracleExplanation> {
    let vocab = ds.vocabulary();
    let mut idx = atoms
        .iter()
        .map(|a| {
            vocab
                .index_of(a.name())
                .ok_or_else(|| Error::UnboundAtom(a.name().into()))
        })
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    let names: Vec<&str> = idx.iter().map(|&i| vocab.atoms()[i].name()).collect();

    let mut per_time: Vec<Vec<Vec<bool>>> = Vec::new();
    for &t in times {
        ds.check_time(t)?;
        let options: Vec<Vec<bool>> = if enumerate_all {
            if idx.len() > MAX_ENUMERATED_ATOMS {
                return Err(cap_exceeded(idx.len()));
            }
            (0u64..1 << idx.len())
                .map(|b| (0..idx.len()).map(|j| b >> j & 1 == 1).collect())
                .collect()
        } else {
            let mut seen = Vec::new();
            for k in 0..ds.len() {
                let v = ds.model_of(k, t)?;
                let r: Vec<bool> = idx.iter().map(|&i| v.get(i)).collect();
                if !seen.contains(&r) {
                    seen.push(r);
                }
            }
            seen
        };
        per_time.push(options);
    }
    let space: usize = per_time.iter().map(Vec::len).product();
    if space > MAX_CANDIDATES {
        return Err(Error::CapExceeded(format!(
            "{space} candidate paths exceed the cap of {MAX_CANDIDATES}"
        )));
    }

    let models = model_space(ds, false)?;
    let den = joint(ds, cond.items(), &models, mu)?;
    if den == 0.0 {
        return Err(zero_denominator(mu));
    }
    let mut scored: Vec<(Vec<Vec<bool>>, f64)> = Vec::with_capacity(space);
    for n in 0..space {
        let mut rest = n;
        let mut path = Vec::with_capacity(times.len());
        for options in &per_time {
            path.push(options[rest % options.len()].clone());
            rest /= options.len();
        }
        let mut items: Vec<TimedFormula> = cond.items().to_vec();
        for (&t, step) in times.iter().zip(&path) {
            for (name, &v) in names.iter().zip(step) {
                items.push(TimedFormula::new(Formula::literal(name, v), t));
            }
        }
        let p = joint(ds, &items, &models, mu)? / den;
        scored.push((path, p));
    }
    let best = scored
        .iter()
        .map(|(_, p)| *p)
        .fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<Vec<Vec<bool>>> = scored
        .iter()
        .filter(|(_, p)| *p >= best - tie_tolerance * best.abs())
        .map(|(path, _)| path.clone())
        .collect();
    Ok(OracleExplanation {
        path: ties[0].clone(),
        probability: best,
        ties,
    })
}
