//! Command implementations behind the `genlogic` binary.

pub mod record;

use std::fmt::Write as _;
use std::fs;

use clap::{Parser, Subcommand, ValueEnum};
use genlogic::engine::{self, MfsResult};
use genlogic::oracle::{self, OracleExplanation};
use genlogic::temporal::{self, Explanation};
use genlogic::{bench, fixtures, parser, Atom, Condition, Dataset, Mu};
use serde::Serialize;

use record::{Diagnostics, Entry, Number, Outcome, Record, SelfCheck};

/// Oracle μ standing in for the limit when self-checking.
const ORACLE_LIMIT_MU: f64 = 1.0 - 1e-8;
const LIMIT_TOLERANCE: f64 = 1e-5;
const FINITE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "genlogic",
    version,
    about = "Exact inference over temporal data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Finite μ in [0, 1]; omit for the μ → 1 limit.
    #[arg(long, global = true, value_name = "FLOAT")]
    pub mu: Option<f64>,

    /// Split each conjunction of literals in the condition into separate items.
    #[arg(long, global = true)]
    pub split_literals: bool,

    /// Print the maximal founded subsets of the condition and their evidence.
    #[arg(long, global = true)]
    pub explain_mfs: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Recompute the answer with the brute-force oracle and compare.
    #[arg(long, global = true, hide = true)]
    pub self_check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a dataset file and summarize it.
    Validate {
        /// Dataset file, or `@name` for a bundled fixture.
        data: String,
    },
    /// Evaluate `P(targets | condition)`.
    Query { data: String, query: String },
    /// Probability of each atom of a family at one time.
    Dist {
        data: String,
        /// Comma-separated atom names; `L_*` matches every atom starting with `L_`.
        #[arg(long)]
        atoms: String,
        #[arg(long)]
        time: usize,
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Most likely joint values of a family of atoms over a range of times.
    Mle {
        data: String,
        #[arg(long)]
        atoms: String,
        /// `1-3` or `1,2,3`.
        #[arg(long)]
        times: String,
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Posterior over the stored sequences.
    Reference {
        data: String,
        #[arg(long, default_value = "")]
        given: String,
    },
    /// Whether the target follows empirically from the condition.
    Entails {
        data: String,
        #[arg(long)]
        given: String,
        #[arg(long)]
        target: String,
    },
    /// Print a bundled fixture.
    Fixture { name: String },
    /// Time limit-mode queries on synthetic data of growing size.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 20_000, 40_000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        atoms: usize,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        #[arg(long, default_value_t = 30)]
        repetitions: usize,
        /// Allowed drift of time per sequence relative to the smallest size.
        #[arg(long, default_value_t = 0.25)]
        tolerance: f64,
        /// Atom counts (at most 12) for the model-checking comparison.
        #[arg(long, value_delimiter = ',')]
        model_check: Vec<usize>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Engine(genlogic::Error),
    Io(String),
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Engine(e) if e.is_data_error() => 2,
            CliError::Io(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Engine(e) => write!(f, "{e}"),
            CliError::Io(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<genlogic::Error> for CliError {
    fn from(e: genlogic::Error) -> Self {
        CliError::Engine(e)
    }
}

/// Run one command. On success returns the text to print; a failing bench or
/// self-check returns its report inside `CliError::Failed`.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let mu = match cli.mu {
        None => Mu::Limit,
        Some(m) => Mu::finite(m)?,
    };
    let ctx = Ctx { cli, mu };
    match &cli.command {
        Command::Validate { data } => validate(cli, data),
        Command::Query { data, query } => ctx.query(&load(data)?, query),
        Command::Dist {
            data,
            atoms,
            time,
            given,
        } => ctx.dist(&load(data)?, atoms, *time, given),
        Command::Mle {
            data,
            atoms,
            times,
            given,
        } => ctx.mle(&load(data)?, atoms, times, given),
        Command::Reference { data, given } => ctx.reference(&load(data)?, given),
        Command::Entails {
            data,
            given,
            target,
        } => ctx.entails(&load(data)?, given, target),
        Command::Fixture { name } => fixtures::by_name(name).map(str::to_owned).ok_or_else(|| {
            CliError::Failed(format!(
                "unknown fixture `{name}`; available: {}",
                fixtures::NAMES.join(", ")
            ))
        }),
        Command::Bench {
            sizes,
            atoms,
            horizon,
            repetitions,
            tolerance,
            model_check,
        } => run_bench(
            cli.format,
            sizes,
            *atoms,
            *horizon,
            *repetitions,
            *tolerance,
            model_check,
        ),
    }
}

/// Read a dataset from a path, or a bundled fixture written `@name`.
pub fn load(data: &str) -> Result<Dataset, CliError> {
    let text = match data.strip_prefix('@') {
        Some(name) => fixtures::by_name(name)
            .ok_or_else(|| CliError::Io(format!("unknown fixture `{name}`")))?
            .to_owned(),
        None => fs::read_to_string(data).map_err(|e| CliError::Io(format!("{data}: {e}")))?,
    };
    Ok(Dataset::load(&text)?)
}

#[derive(Serialize)]
struct ValidateReport {
    sequences: usize,
    horizon: usize,
    atoms: usize,
    models: usize,
    ok: bool,
}

fn validate(cli: &Cli, data: &str) -> Result<String, CliError> {
    let ds = load(data)?;
    let r = ValidateReport {
        sequences: ds.len(),
        horizon: ds.horizon(),
        atoms: ds.vocabulary().len(),
        models: ds.models().len(),
        ok: true,
    };
    Ok(match cli.format {
        Format::Text => format!(
            "K={} T={} atoms={} models={} OK\n",
            r.sequences, r.horizon, r.atoms, r.models
        ),
        Format::Json => json_line(&r),
    })
}

struct Ctx<'a> {
    cli: &'a Cli,
    mu: Mu,
}

impl Ctx<'_> {
    fn condition(&self, text: &str) -> Result<Condition, CliError> {
        let c = parser::parse_condition(text)?;
        Ok(if self.cli.split_literals {
            c.split_literals()
        } else {
            c
        })
    }

    fn mode(&self) -> String {
        match self.mu {
            Mu::Limit => "limit".into(),
            Mu::Finite(m) => format!("mu={m}"),
        }
    }

    fn oracle_mu(&self) -> (f64, f64) {
        match self.mu {
            Mu::Limit => (ORACLE_LIMIT_MU, LIMIT_TOLERANCE),
            Mu::Finite(m) => (m, FINITE_TOLERANCE),
        }
    }

    fn diagnostics(&self, ds: &Dataset, cond: &Condition) -> Result<Option<Diagnostics>, CliError> {
        if !self.cli.explain_mfs {
            return Ok(None);
        }
        let MfsResult {
            max_count,
            prime_evidence,
            subsets,
        } = engine::mfs(ds, cond)?;
        Ok(Some(Diagnostics {
            max_count,
            prime_evidence: prime_evidence
                .iter()
                .map(|&k| ds.ids()[k].clone())
                .collect(),
            subsets: subsets
                .iter()
                .map(|s| format!("{{{}}}", cond.select(s)))
                .collect(),
        }))
    }

    fn self_check(
        &self,
        diffs: impl FnOnce(f64) -> Result<f64, CliError>,
    ) -> Result<Option<SelfCheck>, CliError> {
        if !self.cli.self_check {
            return Ok(None);
        }
        let (mu, tol) = self.oracle_mu();
        let d = diffs(mu)?;
        Ok(Some(SelfCheck {
            oracle_mu: format!("{mu}"),
            max_difference: format!("{d:.3e}"),
            agrees: d <= tol,
        }))
    }

    fn finish(&self, record: Record) -> Result<String, CliError> {
        let out = match self.cli.format {
            Format::Text => record.to_text(),
            Format::Json => record.to_json() + "\n",
        };
        match &record.self_check {
            Some(c) if !c.agrees => Err(CliError::Failed(out)),
            _ => Ok(out),
        }
    }

    fn query(&self, ds: &Dataset, text: &str) -> Result<String, CliError> {
        let q = parser::parse_query(text)?;
        let cond = if self.cli.split_literals {
            q.condition.split_literals()
        } else {
            q.condition
        };
        let p = temporal::query(ds, &q.target, &cond, self.mu)?;
        let self_check = self.self_check(|mu| {
            let o = oracle::oracle_conditional(ds, &q.target, &cond, mu, false)?;
            Ok((o - p.to_f64()).abs())
        })?;
        self.finish(Record {
            command: "query".into(),
            query: text.trim().into(),
            mode: self.mode(),
            result: Outcome::Probability {
                value: Number::new(p),
            },
            diagnostics: self.diagnostics(ds, &cond)?,
            self_check,
        })
    }

    fn dist(
        &self,
        ds: &Dataset,
        atoms: &str,
        time: usize,
        given: &str,
    ) -> Result<String, CliError> {
        let (family, _) = resolve_atoms(ds, atoms)?;
        let cond = self.condition(given)?;
        let dist = temporal::distribution(ds, &family, time, &cond, self.mu)?;
        let self_check = self.self_check(|mu| {
            let mut worst: f64 = 0.0;
            for (a, p) in &dist {
                let target = parser::parse_condition(&format!("{a}@{time}"))?;
                let o = oracle::oracle_conditional(ds, &target, &cond, mu, false)?;
                worst = worst.max((o - p.to_f64()).abs());
            }
            Ok(worst)
        })?;
        self.finish(Record {
            command: "dist".into(),
            query: format!("P({atoms}@{time} | {})", given.trim()),
            mode: self.mode(),
            result: Outcome::Distribution {
                entries: dist
                    .iter()
                    .map(|(a, p)| Entry {
                        label: a.to_string(),
                        value: Number::new(*p),
                    })
                    .collect(),
            },
            diagnostics: self.diagnostics(ds, &cond)?,
            self_check,
        })
    }

    fn mle(&self, ds: &Dataset, atoms: &str, times: &str, given: &str) -> Result<String, CliError> {
        let (family, prefix) = resolve_atoms(ds, atoms)?;
        let times = parse_times(times)?;
        let cond = self.condition(given)?;
        let e = temporal::explain(ds, &family, &times, &cond, self.mu)?;
        let self_check = self.self_check(|mu| {
            let tol = match self.mu {
                Mu::Limit => 1e-6,
                Mu::Finite(_) => 1e-12,
            };
            let o: OracleExplanation =
                oracle::oracle_explain(ds, &e.atoms, &times, &cond, mu, false, tol)?;
            if !o.ties.contains(&e.path) {
                return Ok(f64::INFINITY);
            }
            Ok((o.probability - e.probability.to_f64()).abs())
        })?;
        self.finish(Record {
            command: "mle".into(),
            query: format!(
                "argmax {atoms}@{} | {}",
                times
                    .iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                given.trim()
            ),
            mode: self.mode(),
            result: Outcome::Explanation {
                path: render_path(&e, &e.path, prefix),
                probability: Number::new(e.probability),
                ties: e.ties.iter().map(|p| render_path(&e, p, prefix)).collect(),
            },
            diagnostics: self.diagnostics(ds, &cond)?,
            self_check,
        })
    }

    fn reference(&self, ds: &Dataset, given: &str) -> Result<String, CliError> {
        let cond = self.condition(given)?;
        let post = temporal::reference(ds, &cond, self.mu)?;
        let self_check = self.self_check(|mu| {
            let o = oracle::oracle_posterior_data(ds, &cond, mu, false)?;
            Ok(o.iter()
                .zip(&post)
                .map(|(a, b)| (a - b.to_f64()).abs())
                .fold(0.0, f64::max))
        })?;
        self.finish(Record {
            command: "reference".into(),
            query: format!("P(D | {})", given.trim()),
            mode: self.mode(),
            result: Outcome::Reference {
                entries: ds
                    .ids()
                    .iter()
                    .zip(&post)
                    .map(|(id, p)| Entry {
                        label: id.clone(),
                        value: Number::new(*p),
                    })
                    .collect(),
            },
            diagnostics: self.diagnostics(ds, &cond)?,
            self_check,
        })
    }

    fn entails(&self, ds: &Dataset, given: &str, target: &str) -> Result<String, CliError> {
        if self.mu != Mu::Limit {
            return Err(genlogic::Error::InvalidConfig(
                "empirical consequence is defined in limit mode only".into(),
            )
            .into());
        }
        let cond = self.condition(given)?;
        let target_cond = parser::parse_condition(target)?;
        let holds = engine::empirical_consequence(ds, &cond, &target_cond)?;
        let self_check = self.self_check(|_| {
            let other = engine::consequence_by_probability(ds, &cond, &target_cond)?;
            Ok(if other == holds { 0.0 } else { 1.0 })
        })?;
        self.finish(Record {
            command: "entails".into(),
            query: format!("{} |= {}", given.trim(), target.trim()),
            mode: self.mode(),
            result: Outcome::Consequence { holds },
            diagnostics: self.diagnostics(ds, &cond)?,
            self_check,
        })
    }
}

/// Resolve a comma-separated atom list. A trailing `*` matches by prefix; a
/// single prefix pattern is also returned so paths can be printed without it.
pub fn resolve_atoms<'p>(
    ds: &Dataset,
    pattern: &'p str,
) -> Result<(Vec<Atom>, Option<&'p str>), CliError> {
    let vocab = ds.vocabulary();
    let mut out: Vec<Atom> = Vec::new();
    let parts: Vec<&str> = pattern
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    for part in &parts {
        match part.strip_suffix('*') {
            Some(prefix) => {
                let matched: Vec<&Atom> = vocab
                    .atoms()
                    .iter()
                    .filter(|a| a.name().starts_with(prefix))
                    .collect();
                if matched.is_empty() {
                    return Err(genlogic::Error::UnboundAtom(part.to_string()).into());
                }
                out.extend(matched.into_iter().cloned());
            }
            None => {
                if vocab.index_of(part).is_none() {
                    return Err(genlogic::Error::UnboundAtom(part.to_string()).into());
                }
                out.push(Atom::new(*part)?);
            }
        }
    }
    if out.is_empty() {
        return Err(genlogic::Error::InvalidConfig("no atoms given".into()).into());
    }
    let prefix = match parts.as_slice() {
        [single] => single.strip_suffix('*'),
        _ => None,
    };
    Ok((out, prefix))
}

/// `1-3`, `1..3` or `1,2,3`.
pub fn parse_times(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Engine(genlogic::Error::InvalidConfig(format!(
            "bad time list `{text}`"
        )))
    };
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let range = text.split_once("..").or_else(|| text.split_once('-'));
    let times = match range {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(bad());
            }
            (a..=b).collect()
        }
        None => text.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
    };
    if times.is_empty() {
        return Err(bad());
    }
    Ok(times)
}

/// `(a,b,e)`: at each time the true atoms of the family, without the pattern
/// prefix. `-` marks a time with no true atom, `+` joins several.
pub fn render_path(e: &Explanation, path: &[Vec<bool>], prefix: Option<&str>) -> String {
    let steps: Vec<String> = e
        .true_atoms(path)
        .iter()
        .map(|step| {
            if step.is_empty() {
                return "-".to_string();
            }
            step.iter()
                .map(|a| {
                    let n = a.name();
                    prefix.and_then(|p| n.strip_prefix(p)).unwrap_or(n)
                })
                .collect::<Vec<_>>()
                .join("+")
        })
        .collect();
    format!("({})", steps.join(","))
}

#[derive(Serialize)]
struct BenchRow {
    sequences: usize,
    nanos_per_query: u128,
    nanos_per_sequence: f64,
}

#[derive(Serialize)]
struct CheckRow {
    atoms: usize,
    data_checking_nanos: u128,
    model_checking_nanos: u128,
}

#[derive(Serialize)]
struct BenchReport {
    rows: Vec<BenchRow>,
    max_drift: f64,
    tolerance: f64,
    scaling_ok: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checking: Vec<CheckRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    checking_ok: Option<bool>,
}

fn run_bench(
    format: Format,
    sizes: &[usize],
    atoms: usize,
    horizon: usize,
    repetitions: usize,
    tolerance: f64,
    model_check: &[usize],
) -> Result<String, CliError> {
    let rows = bench::measure_scaling(sizes, atoms, horizon, repetitions)?;
    let drift = bench::max_relative_drift(&rows);
    let checking = if model_check.is_empty() {
        Vec::new()
    } else {
        let k = sizes.first().copied().unwrap_or(1);
        bench::compare_checking(k, model_check, horizon, repetitions)?
    };
    let checking_ok = (checking.len() >= 2).then(|| checking_grows(&checking));
    let report = BenchReport {
        rows: rows
            .iter()
            .map(|r| BenchRow {
                sequences: r.sequences,
                nanos_per_query: r.query_time.as_nanos(),
                nanos_per_sequence: r.nanos_per_sequence,
            })
            .collect(),
        max_drift: drift,
        tolerance,
        scaling_ok: drift <= tolerance,
        checking: checking
            .iter()
            .map(|c| CheckRow {
                atoms: c.atoms,
                data_checking_nanos: c.data_checking.as_nanos(),
                model_checking_nanos: c.model_checking.as_nanos(),
            })
            .collect(),
        checking_ok,
    };
    let out = match format {
        Format::Json => json_line(&report),
        Format::Text => {
            let mut s = String::from("       K    query (us)   ns/datum\n");
            for r in &report.rows {
                let _ = writeln!(
                    s,
                    "{:>8}  {:>12.1}  {:>9.2}",
                    r.sequences,
                    r.nanos_per_query as f64 / 1e3,
                    r.nanos_per_sequence
                );
            }
            let _ = writeln!(
                s,
                "drift {:.1}% (limit {:.0}%): {}",
                100.0 * drift,
                100.0 * tolerance,
                pass_fail(report.scaling_ok)
            );
            if !report.checking.is_empty() {
                s.push_str(" atoms  data (us)  model (us)\n");
                for c in &report.checking {
                    let _ = writeln!(
                        s,
                        "{:>6}  {:>9.1}  {:>10.1}",
                        c.atoms,
                        c.data_checking_nanos as f64 / 1e3,
                        c.model_checking_nanos as f64 / 1e3
                    );
                }
                if let Some(ok) = checking_ok {
                    let _ = writeln!(
                        s,
                        "model checking grows with 2^atoms, data checking does not: {}",
                        pass_fail(ok)
                    );
                }
            }
            s
        }
    };
    if report.scaling_ok && checking_ok.unwrap_or(true) {
        Ok(out)
    } else {
        Err(CliError::Failed(out))
    }
}

/// Model-checking time must grow by at least an eighth of the `2^Δatoms`
/// factor between the smallest and largest vocabulary while data-checking time
/// stays within a factor of two.
pub fn checking_grows(rows: &[bench::CheckingRow]) -> bool {
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return true;
    };
    let secs = |d: std::time::Duration| d.as_secs_f64().max(1e-9);
    let expected = 2f64.powi(last.atoms as i32 - first.atoms as i32);
    let model = secs(last.model_checking) / secs(first.model_checking);
    let data = secs(last.data_checking) / secs(first.data_checking);
    model >= expected / 8.0 && data < 2.0
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn json_line(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("reports always serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_lists() {
        assert_eq!(parse_times("1-3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_times("1..2").unwrap(), vec![1, 2]);
        assert_eq!(parse_times("3,1").unwrap(), vec![3, 1]);
        assert!(parse_times("3-1").is_err());
        assert!(parse_times("x").is_err());
    }

    #[test]
    fn atom_patterns() {
        let ds = load("@maze").unwrap();
        let (atoms, prefix) = resolve_atoms(&ds, "L_*").unwrap();
        assert_eq!(atoms.len(), 17);
        assert_eq!(prefix, Some("L_"));
        let (atoms, prefix) = resolve_atoms(&ds, "N, E").unwrap();
        assert_eq!(atoms.len(), 2);
        assert_eq!(prefix, None);
        assert!(resolve_atoms(&ds, "Z*").is_err());
        assert!(resolve_atoms(&ds, "Q").is_err());
    }
}
