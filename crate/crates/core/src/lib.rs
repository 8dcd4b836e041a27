//! Exact probabilistic reasoning over propositional formulas, learned purely
//! from time-indexed data.
//!
//! A [`Dataset`] is a multiset of equal-length sequences of complete
//! valuations. Each sequence is equally likely; each step instantiates one
//! model; each formula is read through a Bernoulli(μ) interpretation of that
//! model. Queries are answered by checking the data directly, in time linear
//! in the number of sequences, and stay meaningful when the evidence is
//! contradictory or was never observed: the limit `μ → 1` falls back to the
//! data satisfying as much of the evidence as anything does.
//!
//! ```
//! use genlogic::{engine, fixtures, parser, Dataset, Mu};
//!
//! let ds = Dataset::load(fixtures::WEATHER).unwrap();
//! let q = parser::parse_query("P(w@3 | r@3)").unwrap();
//! let p = engine::conditional(&ds, &q.target, &q.condition, Mu::Limit).unwrap();
//! assert_eq!(p.to_string(), "2/3");
//! ```

pub mod bench;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod formula;
pub mod oracle;
pub mod parser;
pub mod temporal;

pub use dataset::{DataSequence, Dataset, Valuation, Vocabulary};
pub use engine::{Condition, MfsResult, Mu, Prob, Rational};
pub use error::{Error, Result};
pub use formula::{Atom, Formula, TimedFormula};
