//! Synthetic data and timing helpers for the scaling benchmark.
//!
//! Data checking costs one pass over the sequences, so limit-mode query time
//! per sequence should stay flat as `K` grows. Model checking sums over every
//! valuation of the vocabulary instead and grows with `2^atoms`.

use std::collections::HashMap;
use std::hint::black_box;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dataset::{DataSequence, Dataset, Valuation, Vocabulary};
use crate::engine::{self, Condition, Mu, Rational};
use crate::error::{Error, Result};
use crate::formula::{Formula, TimedFormula};
use crate::oracle::MAX_ENUMERATED_ATOMS;

/// Uniformly random closed-world data over atoms `a0, a1, ...`.
pub fn synthetic_dataset(
    sequences: usize,
    atoms: usize,
    horizon: usize,
    seed: u64,
) -> Result<Dataset> {
    if sequences == 0 || atoms == 0 || horizon == 0 {
        return Err(Error::InvalidConfig(
            "sequences, atoms and horizon must all be positive".into(),
        ));
    }
    let names: Vec<String> = (0..atoms).map(|i| format!("a{i}")).collect();
    let vocab = Vocabulary::new(&names, true)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let seqs = (0..sequences)
        .map(|k| DataSequence {
            id: format!("s{k}"),
            steps: (0..horizon)
                .map(|_| {
                    let bits: Vec<bool> = (0..atoms).map(|_| rng.gen_bool(0.5)).collect();
                    Valuation::from_bools(&bits)
                })
                .collect(),
        })
        .collect();
    Dataset::from_sequences(vocab, seqs)
}

/// A fixed probe query: a few literals per time as evidence and a disjunction
/// at the last step as target.
pub fn probe_query(atoms: usize, horizon: usize) -> (Condition, Condition) {
    let name = |i: usize| format!("a{}", i % atoms);
    let mut cond = Condition::empty();
    for t in 1..=horizon {
        for j in 0..2 {
            let i = 2 * t + j;
            cond.push(TimedFormula::new(Formula::literal(&name(i), i % 3 != 0), t));
        }
    }
    let target = Condition::new(vec![TimedFormula::new(
        Formula::or(
            Formula::atom(&name(1)),
            Formula::not(Formula::atom(&name(3))),
        ),
        horizon,
    )]);
    (target, cond)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub sequences: usize,
    /// Fastest observed time of one limit-mode conditional query.
    pub query_time: Duration,
    pub nanos_per_sequence: f64,
}

/// Time the probe query at each `K`. Sizes are measured round-robin and the
/// minimum per size is kept, so background noise hits all sizes alike.
pub fn measure_scaling(
    sizes: &[usize],
    atoms: usize,
    horizon: usize,
    repetitions: usize,
) -> Result<Vec<ScalingRow>> {
    let (target, cond) = probe_query(atoms, horizon);
    let data = sizes
        .iter()
        .map(|&k| synthetic_dataset(k, atoms, horizon, 0x5eed ^ k as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut best = vec![Duration::MAX; sizes.len()];
    for _ in 0..repetitions.max(1) {
        for (slot, ds) in best.iter_mut().zip(&data) {
            let start = Instant::now();
            black_box(engine::conditional(ds, &target, &cond, Mu::Limit)?);
            *slot = (*slot).min(start.elapsed());
        }
    }
    Ok(sizes
        .iter()
        .zip(best)
        .map(|(&k, d)| ScalingRow {
            sequences: k,
            query_time: d,
            nanos_per_sequence: d.as_nanos() as f64 / k as f64,
        })
        .collect())
}

/// Largest relative deviation of time-per-sequence from the first row.
pub fn max_relative_drift(rows: &[ScalingRow]) -> f64 {
    let Some(first) = rows.first() else {
        return 0.0;
    };
    rows.iter()
        .map(|r| (r.nanos_per_sequence / first.nanos_per_sequence - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Counts of every observed model at one time, keyed by its bits: the
/// distribution a model checker would be handed.
#[derive(Debug, Clone)]
pub struct ModelTable {
    atoms: usize,
    time: usize,
    sequences: u64,
    counts: HashMap<u64, u64>,
}

impl ModelTable {
    pub fn new(ds: &Dataset, time: usize) -> Result<ModelTable> {
        let atoms = ds.vocabulary().len();
        if atoms > MAX_ENUMERATED_ATOMS {
            return Err(Error::CapExceeded(format!(
                "model checking over {atoms} atoms exceeds the cap of {MAX_ENUMERATED_ATOMS}"
            )));
        }
        let per_model = ds.time_counts(time)?;
        let counts = (0..ds.models().len() as u32)
            .filter(|&id| per_model[id as usize] > 0)
            .map(|id| (ds.models().bits(id)[0], per_model[id as usize]))
            .collect();
        Ok(ModelTable {
            atoms,
            time,
            sequences: ds.len() as u64,
            counts,
        })
    }

    /// `p(α^t)`: sum `K_n / K` over every valuation of the vocabulary that
    /// satisfies `α`, observed or not.
    pub fn marginal(&self, ds: &Dataset, item: &TimedFormula) -> Result<Rational> {
        if item.time != self.time {
            return Err(Error::InvalidConfig(format!(
                "table is for time {}, item is at time {}",
                self.time, item.time
            )));
        }
        let vocab = ds.vocabulary();
        let bound = item.formula.bind(&|name| vocab.index_of(name))?;
        let mut total = 0;
        for bits in 0u64..1 << self.atoms {
            if bound.eval_bits(&[bits]) {
                total += self.counts.get(&bits).copied().unwrap_or(0);
            }
        }
        Ok(Ratio::new(total, self.sequences))
    }
}

/// `p(α^t)` by model checking, table construction included.
pub fn model_check_marginal(ds: &Dataset, item: &TimedFormula) -> Result<Rational> {
    ModelTable::new(ds, item.time)?.marginal(ds, item)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckingRow {
    pub atoms: usize,
    /// One marginal by a pass over the data.
    pub data_checking: Duration,
    /// The same marginal by enumerating all valuations against a prebuilt
    /// model table.
    pub model_checking: Duration,
}

/// Mean time of `f` over enough calls to fill about a millisecond.
fn time_per_call(mut f: impl FnMut() -> Result<()>) -> Result<Duration> {
    let mut calls = 1u32;
    loop {
        let start = Instant::now();
        for _ in 0..calls {
            f()?;
        }
        let elapsed = start.elapsed();
        if elapsed >= Duration::from_millis(1) || calls >= 1 << 20 {
            return Ok(elapsed / calls);
        }
        calls *= 2;
    }
}

/// Compare data checking with model checking for one marginal at a fixed `K`.
pub fn compare_checking(
    sequences: usize,
    atom_counts: &[usize],
    horizon: usize,
    repetitions: usize,
) -> Result<Vec<CheckingRow>> {
    let mut rows = Vec::new();
    for &atoms in atom_counts {
        if atoms == 0 {
            return Err(Error::InvalidConfig("atom counts must be positive".into()));
        }
        let ds = synthetic_dataset(sequences, atoms, horizon, 0xc0ffee ^ atoms as u64)?;
        let item = TimedFormula::new(
            Formula::and(
                Formula::atom("a0"),
                Formula::not(Formula::atom(&format!("a{}", atoms - 1))),
            ),
            1,
        );
        let table = ModelTable::new(&ds, 1)?;
        let target = Condition::new(vec![item.clone()]);
        let (mut data, mut model) = (Duration::MAX, Duration::MAX);
        for _ in 0..repetitions.max(1) {
            data = data.min(time_per_call(|| {
                black_box(engine::marginal(&ds, &target, Mu::Limit)?);
                Ok(())
            })?);
            model = model.min(time_per_call(|| {
                black_box(table.marginal(&ds, &item)?);
                Ok(())
            })?);
        }
        rows.push(CheckingRow {
            atoms,
            data_checking: data,
            model_checking: model,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_data_is_deterministic() {
        let a = synthetic_dataset(50, 5, 3, 7).unwrap();
        let b = synthetic_dataset(50, 5, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.len(), a.horizon(), a.vocabulary().len()), (50, 3, 5));
    }

    #[test]
    fn model_checking_agrees_with_data_checking() {
        let ds = synthetic_dataset(200, 6, 2, 3).unwrap();
        for text in ["a0 & !a5", "a1 | a2 -> a3", "a4 <-> a0"] {
            for t in 1..=2 {
                let item = TimedFormula::new(crate::parser::parse(text).unwrap(), t);
                let via_models = model_check_marginal(&ds, &item).unwrap();
                let via_data = engine::marginal(&ds, &Condition::new(vec![item]), Mu::Limit)
                    .unwrap()
                    .exact()
                    .unwrap();
                assert_eq!(via_models, via_data, "{text}@{t}");
            }
        }
    }

    #[test]
    fn single_sequence_report() {
        let rows = measure_scaling(&[1], 4, 2, 2).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(max_relative_drift(&rows), 0.0);
    }

    #[test]
    fn model_checking_cap() {
        let ds = synthetic_dataset(3, 13, 1, 1).unwrap();
        let item = TimedFormula::new(Formula::atom("a0"), 1);
        assert!(matches!(
            model_check_marginal(&ds, &item),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(synthetic_dataset(0, 3, 3, 0).is_err());
    }
}
