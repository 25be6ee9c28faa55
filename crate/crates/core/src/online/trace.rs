use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::payoff::{DefenderStrategy, MixedStrategy};

pub const TRACE_FORMAT: &str = "sensorsched-trace v1";

const COLUMNS: [&str; 13] =
    ["t", "i", "j", "hits", "draws", "p_hat", "payoff", "regret", "cumulative", "inner_gap", "bonus", "counts", "min_bonus"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Homogeneous,
    Heterogeneous,
}

impl LearnerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Homogeneous => "homogeneous",
            LearnerKind::Heterogeneous => "heterogeneous",
        }
    }
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homogeneous" => Ok(LearnerKind::Homogeneous),
            "heterogeneous" => Ok(LearnerKind::Heterogeneous),
            _ => Err(Error::Serde(format!("unknown learner kind {s:?}"))),
        }
    }
}

/// One round of repeated play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round number
    pub t: u64,
    /// flat index of the sampled joint orientation
    pub i: usize,
    pub j: usize,
    pub hits: Vec<u64>,
    pub draws: Vec<u64>,
    /// estimates the defender used in this round
    pub p_hat: Vec<f64>,
    /// x_t^T A y_t on the true (raw) payoffs
    pub payoff: f64,
    pub regret: f64,
    pub cumulative: f64,
    /// exploitability of the defender's inner solve
    pub inner_gap: f64,
    /// per-sensor bonus terms at the visited pair, before the update
    pub bonus: Vec<f64>,
    /// n_{ij,l} at the visited pair, before the update
    pub counts: Vec<u64>,
    /// smallest entry of Ã - Ā this round
    pub min_bonus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineTrace {
    pub kind: LearnerKind,
    pub instance: String,
    pub seed: u64,
    pub policy: String,
    /// V*_A of the true game
    pub value: f64,
    pub p_true: Vec<f64>,
    /// theoretical regret bound at the final round
    pub bound: f64,
    pub rounds: Vec<RoundRecord>,
    pub warnings: Vec<String>,
    /// (x_t, y_t) per round, when requested
    #[serde(skip)]
    pub strategies: Option<Vec<(DefenderStrategy, MixedStrategy)>>,
}

impl OnlineTrace {
    pub fn final_regret(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cumulative)
    }

    pub fn cumulative(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.cumulative).collect()
    }

    /// Writes the trace as CSV preceded by `#` metadata lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Serde(e.to_string());
        writeln!(out, "# {TRACE_FORMAT}").map_err(io)?;
        writeln!(out, "# kind: {}", self.kind.as_str()).map_err(io)?;
        writeln!(out, "# instance: {}", self.instance).map_err(io)?;
        writeln!(out, "# seed: {}", self.seed).map_err(io)?;
        writeln!(out, "# policy: {}", self.policy).map_err(io)?;
        writeln!(out, "# value: {}", self.value).map_err(io)?;
        writeln!(out, "# p_true: {}", join(&self.p_true)).map_err(io)?;
        writeln!(out, "# bound: {}", self.bound).map_err(io)?;
        for w in &self.warnings {
            writeln!(out, "# warning: {w}").map_err(io)?;
        }
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(COLUMNS)?;
        for r in &self.rounds {
            csv.write_record([
                r.t.to_string(),
                r.i.to_string(),
                r.j.to_string(),
                join(&r.hits),
                join(&r.draws),
                join(&r.p_hat),
                r.payoff.to_string(),
                r.regret.to_string(),
                r.cumulative.to_string(),
                r.inner_gap.to_string(),
                join(&r.bonus),
                join(&r.counts),
                r.min_bonus.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        csv.flush().map_err(io)?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut trace = OnlineTrace {
            kind: LearnerKind::Homogeneous,
            instance: String::new(),
            seed: 0,
            policy: String::new(),
            value: f64::NAN,
            p_true: Vec::new(),
            bound: f64::NAN,
            rounds: Vec::new(),
            warnings: Vec::new(),
            strategies: None,
        };
        let mut body = String::new();
        let mut line = String::new();
        let mut saw_format = false;
        loop {
            line.clear();
            if reader.read_line(&mut line).map_err(|e| Error::Serde(e.to_string()))? == 0 {
                break;
            }
            let Some(meta) = line.strip_prefix('#') else {
                body.push_str(&line);
                reader.read_to_string(&mut body).map_err(|e| Error::Serde(e.to_string()))?;
                break;
            };
            let meta = meta.trim();
            if meta == TRACE_FORMAT {
                saw_format = true;
                continue;
            }
            let Some((key, value)) = meta.split_once(": ") else {
                continue;
            };
            match key {
                "kind" => trace.kind = value.parse()?,
                "instance" => trace.instance = value.to_string(),
                "seed" => trace.seed = parse(value)?,
                "policy" => trace.policy = value.to_string(),
                "value" => trace.value = parse(value)?,
                "p_true" => trace.p_true = split(value)?,
                "bound" => trace.bound = parse(value)?,
                "warning" => trace.warnings.push(value.to_string()),
                _ => {}
            }
        }
        if !saw_format {
            return Err(Error::Serde(format!("missing `# {TRACE_FORMAT}` header")));
        }
        let mut csv = csv::Reader::from_reader(body.as_bytes());
        let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        if header != COLUMNS {
            return Err(Error::Serde(format!("unexpected trace columns {header:?}")));
        }
        for rec in csv.records() {
            let rec = rec?;
            trace.rounds.push(RoundRecord {
                t: parse(&rec[0])?,
                i: parse(&rec[1])?,
                j: parse(&rec[2])?,
                hits: split(&rec[3])?,
                draws: split(&rec[4])?,
                p_hat: split(&rec[5])?,
                payoff: parse(&rec[6])?,
                regret: parse(&rec[7])?,
                cumulative: parse(&rec[8])?,
                inner_gap: parse(&rec[9])?,
                bonus: split(&rec[10])?,
                counts: split(&rec[11])?,
                min_bonus: if rec[12].is_empty() { None } else { Some(parse(&rec[12])?) },
            });
        }
        Ok(trace)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Serde(format!("cannot parse {s:?}")))
}

fn split<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse).collect()
}

/// Cumulative regret and its comparison with the theoretical bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub rounds: u64,
    pub final_regret: f64,
    pub mean_regret: f64,
    pub cumulative: Vec<f64>,
    pub bound: f64,
    pub within_bound: bool,
    /// stored running sums agree with a fresh summation within 1e-9
    pub consistent: bool,
}

pub fn regret_summary(trace: &OnlineTrace) -> RegretSummary {
    let mut running = 0.0;
    let mut consistent = true;
    for r in &trace.rounds {
        running += r.regret;
        consistent &= (running - r.cumulative).abs() <= 1e-9 * running.abs().max(1.0);
    }
    let rounds = trace.rounds.len() as u64;
    let final_regret = trace.final_regret();
    RegretSummary {
        rounds,
        final_regret,
        mean_regret: if rounds == 0 { 0.0 } else { final_regret / rounds as f64 },
        cumulative: trace.cumulative(),
        bound: trace.bound,
        within_bound: final_regret <= trace.bound,
        consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_with(regrets: &[f64]) -> OnlineTrace {
        let mut cumulative = 0.0;
        let rounds = regrets
            .iter()
            .enumerate()
            .map(|(t, &r)| {
                cumulative += r;
                RoundRecord {
                    t: t as u64 + 1,
                    i: t % 3,
                    j: 1,
                    hits: vec![1, 0],
                    draws: vec![2, 0],
                    p_hat: vec![0.5, 1.0 / 3.0],
                    payoff: r - 0.1,
                    regret: r,
                    cumulative,
                    inner_gap: 1e-17,
                    bonus: vec![],
                    counts: vec![],
                    min_bonus: if t == 0 { None } else { Some(0.25) },
                }
            })
            .collect();
        OnlineTrace {
            kind: LearnerKind::Heterogeneous,
            instance: "unit".into(),
            seed: 4,
            policy: "fixed:1".into(),
            value: -0.1,
            p_true: vec![0.8, 0.7],
            bound: 100.0,
            rounds,
            warnings: vec!["short horizon".into()],
            strategies: None,
        }
    }

    #[test]
    fn summary_of_zero_and_constant_regret() {
        assert_eq!(regret_summary(&trace_with(&[0.0; 10])).final_regret, 0.0);
        let s = regret_summary(&trace_with(&[0.5; 8]));
        assert!((s.final_regret - 4.0).abs() < 1e-12);
        assert!(s.consistent && s.within_bound);
    }

    #[test]
    fn csv_round_trip() {
        let trace = trace_with(&[0.1, -0.2, 1.0 / 3.0]);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let back = OnlineTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn empty_trace_is_header_only() {
        let trace = trace_with(&[]);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1);
        assert_eq!(regret_summary(&trace).final_regret, 0.0);
    }
}
