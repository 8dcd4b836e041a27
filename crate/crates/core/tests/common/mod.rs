#![allow(dead_code)]

use genlogic::{Condition, DataSequence, Dataset, Formula, TimedFormula, Valuation, Vocabulary};
use proptest::prelude::*;

#[derive(Debug, Clone)]
pub struct Instance {
    pub ds: Dataset,
    pub target: Condition,
    pub cond: Condition,
}

pub fn atom_name(i: usize) -> String {
    format!("a{i}")
}

/// Formulas of depth at most 3 over atoms `a0..a{n-1}`.
pub fn formula(n: usize) -> impl Strategy<Value = Formula> {
    let leaf = (0..n).prop_map(|i| Formula::atom(&atom_name(i)));
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::implies(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Formula::iff(l, r)),
        ]
    })
}

/// Literals mixed with compound formulas, so conditions are often partly
/// satisfiable.
pub fn item(n: usize, horizon: usize) -> impl Strategy<Value = TimedFormula> {
    let literal = (0..n, any::<bool>()).prop_map(|(i, v)| Formula::literal(&atom_name(i), v));
    (prop_oneof![3 => literal, 1 => formula(n)], 1..=horizon)
        .prop_map(|(f, t)| TimedFormula::new(f, t))
}

fn build(n: usize, palette: &[Vec<bool>], picks: &[Vec<usize>]) -> Dataset {
    let names: Vec<String> = (0..n).map(atom_name).collect();
    let vocab = Vocabulary::new(&names, true).unwrap();
    let seqs = picks
        .iter()
        .enumerate()
        .map(|(k, row)| DataSequence {
            id: format!("d{}", k + 1),
            steps: row
                .iter()
                .map(|&p| Valuation::from_bools(&palette[p % palette.len()]))
                .collect(),
        })
        .collect();
    Dataset::from_sequences(vocab, seqs).unwrap()
}

/// Random data drawn from a small palette of valuations, so models repeat.
pub fn dataset(max_atoms: usize, max_k: usize, max_t: usize) -> impl Strategy<Value = Dataset> {
    (1..=max_atoms, 1..=max_k, 1..=max_t).prop_flat_map(|(n, k, t)| {
        let palette = prop::collection::vec(prop::collection::vec(any::<bool>(), n), 1..=6);
        let picks = prop::collection::vec(prop::collection::vec(0usize..6, t), k);
        (Just(n), palette, picks).prop_map(|(n, palette, picks)| build(n, &palette, &picks))
    })
}

pub fn instance(
    max_atoms: usize,
    max_k: usize,
    max_t: usize,
    max_items: usize,
) -> impl Strategy<Value = Instance> {
    dataset(max_atoms, max_k, max_t).prop_flat_map(move |ds| {
        let n = ds.vocabulary().len();
        let t = ds.horizon();
        let target = prop::collection::vec(item(n, t), 1..=2).prop_map(Condition::new);
        let cond = prop::collection::vec(item(n, t), 0..=max_items).prop_map(Condition::new);
        (Just(ds), target, cond).prop_map(|(ds, target, cond)| Instance { ds, target, cond })
    })
}

/// Conditions over the maze fixture built from observation literals.
pub fn maze_condition() -> impl Strategy<Value = Condition> {
    let sensor = prop::sample::select(vec!["N", "E", "S", "W"]);
    prop::collection::vec((sensor, any::<bool>(), 1usize..=3), 0..=8).prop_map(|lits| {
        lits.into_iter()
            .map(|(a, v, t)| TimedFormula::new(Formula::literal(a, v), t))
            .collect()
    })
}
