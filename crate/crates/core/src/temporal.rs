//! Prediction, smoothing, most likely explanation and reference.
//!
//! Prediction and smoothing differ only in whether the target time lies after
//! or before the evidence, so both go through [`query`].

use std::collections::HashMap;

use num_rational::Ratio;

use crate::dataset::Dataset;
use crate::engine::{self, Condition, Mu, Prob};
use crate::error::{Error, Result};
use crate::formula::{Atom, Formula, TimedFormula};

/// Relative tolerance for treating two finite-mode scores as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// `p(Ω^u | Δ)`, whatever the position of `u` relative to the evidence times.
pub fn query(ds: &Dataset, target: &Condition, cond: &Condition, mu: Mu) -> Result<Prob> {
    engine::conditional(ds, target, cond, mu)
}

/// Probability of each atom of `family` at time `u`, in vocabulary order.
pub fn distribution(
    ds: &Dataset,
    family: &[Atom],
    u: usize,
    cond: &Condition,
    mu: Mu,
) -> Result<Vec<(Atom, Prob)>> {
    if family.is_empty() {
        return Err(Error::InvalidConfig("atom family must not be empty".into()));
    }
    let ordered = vocabulary_order(ds, family)?;
    ordered
        .into_iter()
        .map(|atom| {
            let target = Condition::new(vec![TimedFormula::new(Formula::Atom(atom.clone()), u)]);
            Ok((atom, engine::conditional(ds, &target, cond, mu)?))
        })
        .collect()
}

/// `p(D | Δ)` over the stored sequences.
pub fn reference(ds: &Dataset, cond: &Condition, mu: Mu) -> Result<Vec<Prob>> {
    engine::posterior_data(ds, cond, mu)
}

/// The most likely joint truth values of a set of atoms over a set of times.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    /// Query atoms, in vocabulary order.
    pub atoms: Vec<Atom>,
    pub times: Vec<usize>,
    /// `path[i][j]` is the value of `atoms[j]` at `times[i]`.
    pub path: Vec<Vec<bool>>,
    /// `p(path | Δ)`.
    pub probability: Prob,
    /// Every co-optimal path, the chosen one first, in dataset order.
    pub ties: Vec<Vec<Vec<bool>>>,
}

impl Explanation {
    /// The path as a condition of timed literals.
    pub fn as_condition(&self) -> Condition {
        path_condition(&self.atoms, &self.times, &self.path)
    }

    /// Atoms true at each time of `path`.
    pub fn true_atoms<'a>(&'a self, path: &'a [Vec<bool>]) -> Vec<Vec<&'a Atom>> {
        path.iter()
            .map(|step| {
                self.atoms
                    .iter()
                    .zip(step)
                    .filter(|(_, v)| **v)
                    .map(|(a, _)| a)
                    .collect()
            })
            .collect()
    }
}

pub(crate) fn path_condition(atoms: &[Atom], times: &[usize], path: &[Vec<bool>]) -> Condition {
    times
        .iter()
        .zip(path)
        .flat_map(|(&t, step)| {
            atoms
                .iter()
                .zip(step)
                .map(move |(a, &v)| TimedFormula::new(Formula::literal(a.name(), v), t))
        })
        .collect()
}

fn vocabulary_order(ds: &Dataset, atoms: &[Atom]) -> Result<Vec<Atom>> {
    let vocab = ds.vocabulary();
    let mut idx = atoms
        .iter()
        .map(|a| {
            vocab
                .index_of(a.name())
                .ok_or_else(|| Error::UnboundAtom(a.name().to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    idx.sort_unstable();
    idx.dedup();
    Ok(idx.into_iter().map(|i| vocab.atoms()[i].clone()).collect())
}

/// Restriction of every stored sequence to the query atoms at the query times.
pub(crate) fn realizations(ds: &Dataset, atoms: &[Atom], times: &[usize]) -> Vec<Vec<Vec<bool>>> {
    let idx: Vec<usize> = atoms
        .iter()
        .map(|a| ds.vocabulary().index_of(a.name()).expect("checked"))
        .collect();
    (0..ds.len())
        .map(|k| {
            times
                .iter()
                .map(|&t| {
                    let bits = ds.step_bits(k, t);
                    idx.iter()
                        .map(|&i| bits[i / 64] >> (i % 64) & 1 == 1)
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Most likely explanation of `atoms` over `times` given `Δ`.
///
/// Candidates are the paths some stored sequence actually took; in limit mode
/// and at `μ = 1` any other path has probability zero. Ties are broken by the
/// first sequence taking the path, and all co-optimal paths are listed.
pub fn explain(
    ds: &Dataset,
    atoms: &[Atom],
    times: &[usize],
    cond: &Condition,
    mu: Mu,
) -> Result<Explanation> {
    let atoms = vocabulary_order(ds, atoms)?;
    for &t in times {
        ds.check_time(t)?;
    }
    let paths = realizations(ds, &atoms, times);

    // candidate paths in order of first occurrence
    let mut order: Vec<usize> = Vec::new();
    let mut slot: HashMap<&Vec<Vec<bool>>, usize> = HashMap::new();
    let mut candidate_of = Vec::with_capacity(ds.len());
    for p in &paths {
        let next = order.len();
        let c = *slot.entry(p).or_insert(next);
        if c == next {
            order.push(candidate_of.len());
        }
        candidate_of.push(c);
    }

    let (best, probability, ties) = match mu {
        Mu::Limit => {
            let r = engine::mfs(ds, cond)?;
            let support: Vec<usize> = if r.is_founded() {
                r.prime_evidence
            } else {
                (0..ds.len()).collect()
            };
            let mut score = vec![0u64; order.len()];
            for &k in &support {
                score[candidate_of[k]] += 1;
            }
            let top = *score.iter().max().expect("nonempty dataset");
            let ties: Vec<usize> = (0..order.len()).filter(|&c| score[c] == top).collect();
            let p = Prob::Exact(Ratio::new(top, support.len() as u64));
            (ties[0], p, ties)
        }
        Mu::Finite(m) => {
            Mu::finite(m)?;
            let delta = engine::Compiled::new(ds, cond)?;
            let logw: Vec<f64> = (0..ds.len()).map(|k| delta.log_weight(ds, k, m)).collect();
            let top = logw
                .iter()
                .copied()
                .filter(|w| w.is_finite())
                .fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                return Err(if m == 1.0 {
                    Error::UnfoundedConditionAtMuOne
                } else {
                    Error::ZeroProbabilityCondition(m)
                });
            }
            let w: Vec<f64> = logw.iter().map(|x| (x - top).exp()).collect();
            let total: f64 = w.iter().sum();
            let width = atoms.len() * times.len();
            let score: Vec<f64> = order
                .iter()
                .map(|&first| {
                    let cand = &paths[first];
                    (0..ds.len())
                        .filter(|&k| w[k] > 0.0)
                        .map(|k| {
                            let miss = hamming(cand, &paths[k]);
                            w[k] * engine::bernoulli_log_weight(width - miss, miss, m).exp()
                        })
                        .sum()
                })
                .collect();
            let top = score.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<usize> = (0..order.len())
                .filter(|&c| score[c] >= top - TIE_TOLERANCE * top.abs())
                .collect();
            (ties[0], Prob::Approx(score[ties[0]] / total), ties)
        }
    };

    Ok(Explanation {
        path: paths[order[best]].clone(),
        ties: ties.iter().map(|&c| paths[order[c]].clone()).collect(),
        atoms,
        times: times.to_vec(),
        probability,
    })
}

fn hamming(a: &[Vec<bool>], b: &[Vec<bool>]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).filter(|(p, q)| p != q).count())
        .sum()
}
