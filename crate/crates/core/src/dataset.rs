//! Time-indexed data sequences and the index of the models they instantiate.
//!
//! A dataset is a multiset of `K` sequences, each `T` steps long. Every step is
//! a complete valuation of the vocabulary. Sequences are addressed by their
//! 0-based position in the file; time steps are 1-based.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::formula::{is_identifier, Assignment, Atom};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    atoms: Vec<Atom>,
    index: HashMap<String, usize>,
    closed_world: bool,
}

impl Vocabulary {
    pub fn new<S: AsRef<str>>(names: &[S], closed_world: bool) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Schema(
                "vocabulary must declare at least one atom".into(),
            ));
        }
        let mut atoms = Vec::with_capacity(names.len());
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let name = name.as_ref();
            if !is_identifier(name) {
                return Err(Error::Schema(format!("`{name}` is not a valid atom name")));
            }
            if index.insert(name.to_string(), i).is_some() {
                return Err(Error::Schema(format!("atom `{name}` declared twice")));
            }
            atoms.push(Atom::new(name)?);
        }
        Ok(Vocabulary {
            atoms,
            index,
            closed_world,
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn closed_world(&self) -> bool {
        self.closed_world
    }

    /// Number of 64-bit words in a packed valuation.
    pub fn words(&self) -> usize {
        self.atoms.len().div_ceil(64)
    }
}

/// A total truth assignment, packed one bit per vocabulary atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    bits: Vec<u64>,
}

impl Valuation {
    pub fn all_false(vocab: &Vocabulary) -> Self {
        Valuation {
            bits: vec![0; vocab.words()],
        }
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut bits = vec![0u64; values.len().div_ceil(64).max(1)];
        for (i, &v) in values.iter().enumerate() {
            if v {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        Valuation { bits }
    }

    pub fn from_true_atoms<S: AsRef<str>>(vocab: &Vocabulary, names: &[S]) -> Result<Self> {
        let mut v = Valuation::all_false(vocab);
        for name in names {
            let name = name.as_ref();
            let i = vocab
                .index_of(name)
                .ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
            v.set(i, true);
        }
        Ok(v)
    }

    pub(crate) fn from_words(bits: &[u64]) -> Self {
        Valuation {
            bits: bits.to_vec(),
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        if value {
            self.bits[i / 64] |= 1 << (i % 64);
        } else {
            self.bits[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    /// Names of the true atoms, in vocabulary order.
    pub fn true_atoms<'v>(&self, vocab: &'v Vocabulary) -> Vec<&'v str> {
        vocab
            .atoms()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.get(*i))
            .map(|(_, a)| a.name())
            .collect()
    }

    /// View this valuation through a vocabulary so formulas can be evaluated by name.
    pub fn named<'a>(&'a self, vocab: &'a Vocabulary) -> NamedValuation<'a> {
        NamedValuation { vocab, val: self }
    }
}

pub struct NamedValuation<'a> {
    vocab: &'a Vocabulary,
    val: &'a Valuation,
}

impl Assignment for NamedValuation<'_> {
    fn value_of(&self, atom: &str) -> Option<bool> {
        self.vocab.index_of(atom).map(|i| self.val.get(i))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSequence {
    pub id: String,
    pub steps: Vec<Valuation>,
}

/// Distinct valuations observed anywhere in a dataset, stored packed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelIndex {
    words: usize,
    bits: Vec<u64>,
    lookup: HashMap<Vec<u64>, u32>,
}

impl ModelIndex {
    fn new(words: usize) -> Self {
        ModelIndex {
            words,
            bits: Vec::new(),
            lookup: HashMap::new(),
        }
    }

    fn intern(&mut self, v: &Valuation) -> u32 {
        if let Some(&id) = self.lookup.get(&v.bits) {
            return id;
        }
        let id = self.len() as u32;
        self.bits.extend_from_slice(&v.bits);
        self.lookup.insert(v.bits.clone(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.bits.len() / self.words
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn id_of(&self, v: &Valuation) -> Option<u32> {
        self.lookup.get(&v.bits).copied()
    }

    #[inline]
    pub fn bits(&self, id: u32) -> &[u64] {
        let start = id as usize * self.words;
        &self.bits[start..start + self.words]
    }

    pub fn valuation(&self, id: u32) -> Valuation {
        Valuation::from_words(self.bits(id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    vocab: Vocabulary,
    ids: Vec<String>,
    horizon: usize,
    models: ModelIndex,
    /// Model id of sequence `k` at time `t` lives at `k * horizon + (t - 1)`.
    steps: Vec<u32>,
    /// The same steps' bits inline, so a pass over the data reads memory in
    /// order however many distinct models there are.
    step_words: Vec<u64>,
}

impl Dataset {
    pub fn from_sequences(vocab: Vocabulary, sequences: Vec<DataSequence>) -> Result<Self> {
        let first = sequences
            .first()
            .ok_or_else(|| Error::Schema("dataset must contain at least one sequence".into()))?;
        let horizon = first.steps.len();
        if horizon == 0 {
            return Err(Error::Schema(format!(
                "sequence `{}` has no steps",
                first.id
            )));
        }
        let mut seen_ids = HashSet::new();
        let mut models = ModelIndex::new(vocab.words());
        let mut steps = Vec::with_capacity(sequences.len() * horizon);
        let mut step_words = Vec::with_capacity(sequences.len() * horizon * vocab.words());
        let mut ids = Vec::with_capacity(sequences.len());
        for seq in sequences {
            if !seen_ids.insert(seq.id.clone()) {
                return Err(Error::Schema(format!(
                    "sequence id `{}` is repeated",
                    seq.id
                )));
            }
            if seq.steps.len() != horizon {
                return Err(Error::RaggedHorizon {
                    id: seq.id,
                    expected: horizon,
                    found: seq.steps.len(),
                });
            }
            for v in &seq.steps {
                if v.bits.len() != vocab.words() || has_stray_bits(&v.bits, vocab.len()) {
                    return Err(Error::Schema(format!(
                        "sequence `{}` holds a valuation of the wrong width",
                        seq.id
                    )));
                }
                steps.push(models.intern(v));
                step_words.extend_from_slice(&v.bits);
            }
            ids.push(seq.id);
        }
        Ok(Dataset {
            vocab,
            ids,
            horizon,
            models,
            steps,
            step_words,
        })
    }

    /// Parse and validate a dataset document.
    pub fn load(source: &str) -> Result<Self> {
        let doc: Document =
            serde_json::from_str(source).map_err(|e| Error::Schema(e.to_string()))?;
        let vocab = Vocabulary::new(&doc.atoms, doc.closed_world)?;
        let mut sequences = Vec::with_capacity(doc.sequences.len());
        for seq in doc.sequences {
            let mut steps = Vec::with_capacity(seq.steps.len());
            for (i, step) in seq.steps.into_iter().enumerate() {
                steps.push(step.into_valuation(&vocab, &seq.id, i + 1)?);
            }
            sequences.push(DataSequence { id: seq.id, steps });
        }
        Dataset::from_sequences(vocab, sequences)
    }

    pub fn load_reader(mut reader: impl std::io::Read) -> Result<Self> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| Error::Schema(e.to_string()))?;
        Dataset::load(&text)
    }

    /// Canonical document text. Loading it back yields an equal dataset and
    /// re-rendering yields identical bytes.
    pub fn to_canonical_string(&self) -> String {
        let q = |s: &str| serde_json::to_string(s).expect("string serialization");
        let mut out = String::from("{\n");
        let atoms: Vec<String> = self.vocab.atoms().iter().map(|a| q(a.name())).collect();
        let _ = writeln!(out, "  \"atoms\": [{}],", atoms.join(", "));
        let _ = writeln!(out, "  \"closed_world\": {},", self.vocab.closed_world());
        out.push_str("  \"sequences\": [\n");
        for k in 0..self.len() {
            let steps: Vec<String> = (1..=self.horizon)
                .map(|t| {
                    let v = self.models.valuation(self.model_id(k, t));
                    if self.vocab.closed_world() {
                        let names: Vec<String> =
                            v.true_atoms(&self.vocab).into_iter().map(q).collect();
                        format!("[{}]", names.join(", "))
                    } else {
                        let pairs: Vec<String> = self
                            .vocab
                            .atoms()
                            .iter()
                            .enumerate()
                            .map(|(i, a)| format!("{}: {}", q(a.name()), u8::from(v.get(i))))
                            .collect();
                        format!("{{{}}}", pairs.join(", "))
                    }
                })
                .collect();
            let sep = if k + 1 < self.len() { "," } else { "" };
            let _ = writeln!(
                out,
                "    {{\"id\": {}, \"steps\": [{}]}}{sep}",
                q(&self.ids[k]),
                steps.join(", ")
            );
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of sequence occurrences, `K`.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Shared horizon, `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn models(&self) -> &ModelIndex {
        &self.models
    }

    pub fn check_time(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.horizon {
            Err(Error::IndexOutOfRange {
                what: "time",
                index: t,
                max: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    fn check_sequence(&self, k: usize) -> Result<()> {
        if k >= self.len() {
            Err(Error::IndexOutOfRange {
                what: "sequence",
                index: k,
                max: self.len().saturating_sub(1),
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn model_id(&self, k: usize, t: usize) -> u32 {
        self.steps[k * self.horizon + t - 1]
    }

    #[inline]
    pub fn step_bits(&self, k: usize, t: usize) -> &[u64] {
        let w = self.vocab.words();
        let start = (k * self.horizon + t - 1) * w;
        &self.step_words[start..start + w]
    }

    /// The valuation instantiated by sequence `k` (0-based) at time `t` (1-based).
    pub fn model_of(&self, k: usize, t: usize) -> Result<Valuation> {
        self.check_sequence(k)?;
        self.check_time(t)?;
        Ok(self.models.valuation(self.model_id(k, t)))
    }

    pub fn sequence(&self, k: usize) -> Result<DataSequence> {
        self.check_sequence(k)?;
        Ok(DataSequence {
            id: self.ids[k].clone(),
            steps: (1..=self.horizon)
                .map(|t| self.models.valuation(self.model_id(k, t)))
                .collect(),
        })
    }

    /// Number of sequences whose valuation at each listed time equals the listed one.
    pub fn joint_model_count(&self, pairs: &[(Valuation, usize)]) -> Result<u64> {
        let mut wanted = Vec::with_capacity(pairs.len());
        for (v, t) in pairs {
            self.check_time(*t)?;
            match self.models.id_of(v) {
                Some(id) => wanted.push((id, *t)),
                // never observed, so no sequence can match
                None => return Ok(0),
            }
        }
        Ok((0..self.len())
            .filter(|&k| wanted.iter().all(|&(id, t)| self.model_id(k, t) == id))
            .count() as u64)
    }

    /// Occurrence count of every distinct model at time `t`, indexed by model id.
    pub fn time_counts(&self, t: usize) -> Result<Vec<u64>> {
        self.check_time(t)?;
        let mut counts = vec![0u64; self.models.len()];
        for k in 0..self.len() {
            counts[self.model_id(k, t) as usize] += 1;
        }
        Ok(counts)
    }

    /// Joint occurrence counts of model tuples at the given times. Only tuples
    /// that occur are present; the counts sum to `K`.
    pub fn joint_counts(&self, times: &[usize]) -> Result<HashMap<Vec<u32>, u64>> {
        for &t in times {
            self.check_time(t)?;
        }
        let mut table: HashMap<Vec<u32>, u64> = HashMap::new();
        for k in 0..self.len() {
            let key: Vec<u32> = times.iter().map(|&t| self.model_id(k, t)).collect();
            *table.entry(key).or_default() += 1;
        }
        Ok(table)
    }
}

fn has_stray_bits(bits: &[u64], len: usize) -> bool {
    let rem = len % 64;
    rem != 0 && bits.last().is_some_and(|w| w >> rem != 0)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    atoms: Vec<String>,
    closed_world: bool,
    sequences: Vec<SequenceDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SequenceDoc {
    id: String,
    steps: Vec<StepDoc>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StepDoc {
    TrueAtoms(Vec<String>),
    Explicit(BTreeMap<String, Bit>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Bit {
    Bool(bool),
    Int(u8),
}

impl StepDoc {
    fn into_valuation(self, vocab: &Vocabulary, id: &str, step: usize) -> Result<Valuation> {
        let mut v = Valuation::all_false(vocab);
        let mut assigned = vec![false; vocab.len()];
        let mut assign = |name: &str, value: bool| -> Result<()> {
            let i = vocab
                .index_of(name)
                .ok_or_else(|| Error::UnknownAtom(name.to_string()))?;
            v.set(i, value);
            assigned[i] = true;
            Ok(())
        };
        match self {
            StepDoc::TrueAtoms(names) => {
                for n in &names {
                    assign(n, true)?;
                }
            }
            StepDoc::Explicit(map) => {
                for (n, bit) in &map {
                    let value = match bit {
                        Bit::Bool(b) => *b,
                        Bit::Int(0) => false,
                        Bit::Int(1) => true,
                        Bit::Int(x) => {
                            return Err(Error::Schema(format!(
                                "sequence `{id}` step {step}: `{n}` has value {x}, expected 0 or 1"
                            )))
                        }
                    };
                    assign(n, value)?;
                }
            }
        }
        if !vocab.closed_world() {
            if let Some(i) = assigned.iter().position(|a| !a) {
                return Err(Error::IncompleteValuation {
                    id: id.to_string(),
                    step,
                    atom: vocab.atoms()[i].name().to_string(),
                });
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::Formula;

    fn weather() -> Dataset {
        Dataset::load(fixtures::WEATHER).unwrap()
    }

    fn maze() -> Dataset {
        Dataset::load(fixtures::MAZE).unwrap()
    }

    fn rw(vocab: &Vocabulary, r: bool, w: bool) -> Valuation {
        let mut v = Valuation::all_false(vocab);
        v.set(vocab.index_of("r").unwrap(), r);
        v.set(vocab.index_of("w").unwrap(), w);
        v
    }

    #[test]
    fn fixtures_have_expected_shape() {
        let m = maze();
        assert_eq!((m.len(), m.horizon(), m.vocabulary().len()), (5, 3, 21));
        let w = weather();
        assert_eq!((w.len(), w.horizon(), w.models().len()), (5, 3, 4));
    }

    #[test]
    fn single_step_dataset() {
        let ds = Dataset::load(
            r#"{"atoms": ["a"], "closed_world": true, "sequences": [{"id": "s", "steps": [["a"]]}]}"#,
        )
        .unwrap();
        assert_eq!((ds.len(), ds.horizon()), (1, 1));
        assert!(ds.model_of(0, 1).unwrap().get(0));
    }

    #[test]
    fn maze_model_of_room_b() {
        let ds = maze();
        let v = ds.model_of(0, 2).unwrap();
        assert_eq!(v.true_atoms(ds.vocabulary()), ["N", "E", "L_b"]);
        let named = v.named(ds.vocabulary());
        assert!(!Formula::atom("L_a").eval(&named).unwrap());
        assert!(Formula::atom("L_b").eval(&named).unwrap());
    }

    #[test]
    fn weather_model_of_d3() {
        let ds = weather();
        // m(d3) = (m1, m4, m4); m4 satisfies r and w
        assert_eq!(ds.model_of(2, 2).unwrap(), rw(ds.vocabulary(), true, true));
    }

    #[test]
    fn out_of_range() {
        let ds = weather();
        assert!(matches!(
            ds.model_of(5, 1),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            ds.model_of(0, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            ds.model_of(0, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn weather_joint_counts() {
        let ds = weather();
        let voc = ds.vocabulary();
        let m1 = rw(voc, false, false);
        let m2 = rw(voc, false, true);
        assert_eq!(ds.joint_model_count(&[(m2, 3)]).unwrap(), 2);
        assert_eq!(
            ds.joint_model_count(&[(m1.clone(), 1), (m1, 2)]).unwrap(),
            1
        );
        assert_eq!(ds.joint_model_count(&[]).unwrap(), 5);
    }

    #[test]
    fn time_counts_sum_to_k() {
        for ds in [weather(), maze()] {
            for t in 1..=ds.horizon() {
                assert_eq!(
                    ds.time_counts(t).unwrap().iter().sum::<u64>(),
                    ds.len() as u64
                );
            }
            let joint = ds.joint_counts(&[1, 2, 3]).unwrap();
            assert_eq!(joint.values().sum::<u64>(), ds.len() as u64);
        }
    }

    #[test]
    fn ragged_horizon_rejected() {
        let doc = r#"{"atoms": ["a"], "closed_world": true, "sequences": [
            {"id": "s1", "steps": [["a"], []]},
            {"id": "s2", "steps": [["a"]]}]}"#;
        assert_eq!(
            Dataset::load(doc).unwrap_err(),
            Error::RaggedHorizon {
                id: "s2".into(),
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn unknown_atom_rejected() {
        let doc = r#"{"atoms": ["a"], "closed_world": true, "sequences": [{"id": "s", "steps": [["b"]]}]}"#;
        assert_eq!(
            Dataset::load(doc).unwrap_err(),
            Error::UnknownAtom("b".into())
        );
    }

    #[test]
    fn open_world_requires_every_atom() {
        let doc = r#"{"atoms": ["a", "b"], "closed_world": false, "sequences": [
            {"id": "s", "steps": [{"a": 1}]}]}"#;
        assert_eq!(
            Dataset::load(doc).unwrap_err(),
            Error::IncompleteValuation {
                id: "s".into(),
                step: 1,
                atom: "b".into()
            }
        );
        let ok = r#"{"atoms": ["a", "b"], "closed_world": false, "sequences": [
            {"id": "s", "steps": [{"a": 1, "b": false}]}]}"#;
        let ds = Dataset::load(ok).unwrap();
        assert!(ds.model_of(0, 1).unwrap().get(0));
        assert!(!ds.model_of(0, 1).unwrap().get(1));
    }

    #[test]
    fn schema_errors() {
        for doc in [
            "not json",
            r#"{"atoms": [], "closed_world": true, "sequences": [{"id": "s", "steps": [[]]}]}"#,
            r#"{"atoms": ["a", "a"], "closed_world": true, "sequences": [{"id": "s", "steps": [[]]}]}"#,
            r#"{"atoms": ["a"], "closed_world": true, "sequences": []}"#,
            r#"{"atoms": ["a"], "closed_world": true, "sequences": [{"id": "s", "steps": []}]}"#,
            r#"{"atoms": ["1a"], "closed_world": true, "sequences": [{"id": "s", "steps": [[]]}]}"#,
            r#"{"atoms": ["a"], "closed_world": false, "sequences": [{"id": "s", "steps": [{"a": 2}]}]}"#,
            r#"{"atoms": ["a"], "sequences": [{"id": "s", "steps": [[]]}]}"#,
        ] {
            assert!(
                matches!(Dataset::load(doc), Err(Error::Schema(_))),
                "accepted: {doc}"
            );
        }
    }

    #[test]
    fn duplicate_contents_are_kept() {
        let doc = r#"{"atoms": ["a"], "closed_world": true, "sequences": [
            {"id": "s1", "steps": [["a"]]}, {"id": "s2", "steps": [["a"]]}]}"#;
        let ds = Dataset::load(doc).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.models().len(), 1);
        assert_eq!(ds.time_counts(1).unwrap(), [2]);
    }

    #[test]
    fn fixtures_are_canonical() {
        assert_eq!(maze().to_canonical_string(), fixtures::MAZE);
        assert_eq!(weather().to_canonical_string(), fixtures::WEATHER);
    }

    #[test]
    fn open_world_round_trip() {
        let doc = r#"{"atoms": ["a", "b"], "closed_world": false, "sequences": [
            {"id": "s", "steps": [{"a": 1, "b": 0}, {"b": true, "a": false}]}]}"#;
        let ds = Dataset::load(doc).unwrap();
        let text = ds.to_canonical_string();
        let again = Dataset::load(&text).unwrap();
        assert_eq!(again, ds);
        assert_eq!(again.to_canonical_string(), text);
    }
}
