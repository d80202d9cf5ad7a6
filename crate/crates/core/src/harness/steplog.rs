use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::env::{Env, EnvConfig, Event, StepResult};
use crate::error::{Error, Result};
use crate::sim::{Action, Pose};
use crate::stages::StageSpec;

pub const STEP_LOG_FORMAT: &str = "arena2d-steplog";
pub const STEP_LOG_VERSION: u32 = 1;

/// First line of a step log; enough to rebuild the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepLogHeader {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub stage: StageSpec,
    pub env: EnvConfig,
}

impl StepLogHeader {
    pub fn new(seed: u64, stage: &StageSpec, env: &EnvConfig) -> Self {
        StepLogHeader {
            format: STEP_LOG_FORMAT.to_string(),
            version: STEP_LOG_VERSION,
            seed,
            stage: stage.clone(),
            env: env.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    /// Global zero-based step index.
    pub t: u64,
    /// One-based episode number.
    pub episode: u64,
    /// Pose after the step.
    pub pose: Pose,
    pub action: usize,
    pub reward: f64,
    pub event: Event,
    pub scan_digest: String,
}

impl StepRecord {
    pub fn new(t: u64, episode: u64, action: usize, result: &StepResult) -> Self {
        StepRecord {
            t,
            episode,
            pose: result.pose,
            action,
            reward: result.reward,
            event: result.event,
            scan_digest: result.observation.digest(),
        }
    }
}

enum Sink {
    Plain(BufWriter<File>),
    Gzip(GzEncoder<BufWriter<File>>),
}

/// JSON Lines writer; gzip-compressed when the path ends in `.gz`.
pub struct StepLogWriter {
    path: PathBuf,
    sink: Sink,
}

impl StepLogWriter {
    pub fn create(path: &Path, header: &StepLogHeader) -> Result<Self> {
        let file = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
        let sink = if is_gzip(path) {
            Sink::Gzip(GzEncoder::new(file, Compression::default()))
        } else {
            Sink::Plain(file)
        };
        let mut w = StepLogWriter {
            path: path.to_path_buf(),
            sink,
        };
        w.write_line(&serde_json::to_string(header)?)?;
        Ok(w)
    }

    pub fn write(&mut self, record: &StepRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        self.write_line(&line)
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        let out: &mut dyn Write = match &mut self.sink {
            Sink::Plain(w) => w,
            Sink::Gzip(w) => w,
        };
        writeln!(out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(self) -> Result<()> {
        let path = self.path;
        match self.sink {
            Sink::Plain(mut w) => w.flush(),
            Sink::Gzip(w) => w.finish().and_then(|mut f| f.flush()),
        }
        .map_err(|e| Error::io(&path, e))
    }
}

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

pub fn read_step_log(path: &Path) -> Result<(StepLogHeader, Vec<StepRecord>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader: Box<dyn Read> = if is_gzip(path) {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    let mut lines = BufReader::new(reader).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::StepLog(format!("{} is empty", path.display())))?
        .map_err(|e| Error::io(path, e))?;
    let header: StepLogHeader =
        serde_json::from_str(&first).map_err(|e| Error::StepLog(format!("bad header in {}: {e}", path.display())))?;
    if header.format != STEP_LOG_FORMAT {
        return Err(Error::StepLog(format!("unknown log format {:?}", header.format)));
    }
    if header.version != STEP_LOG_VERSION {
        return Err(Error::StepLog(format!(
            "log version {} is not supported (expected {STEP_LOG_VERSION})",
            header.version
        )));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: StepRecord = serde_json::from_str(&line)
            .map_err(|e| Error::StepLog(format!("line {} of {}: {e}", i + 2, path.display())))?;
        records.push(r);
    }
    Ok((header, records))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayReport {
    Exact { steps: u64 },
    Diverged { step: u64, field: &'static str },
}

impl fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayReport::Exact { .. } => f.write_str("exact"),
            ReplayReport::Diverged { step, field } => write!(f, "diverged at step {step} ({field})"),
        }
    }
}

/// Re-simulates the recorded actions and compares every step with the log.
pub fn replay(header: &StepLogHeader, records: &[StepRecord]) -> Result<ReplayReport> {
    let mut env = Env::new(&header.stage, header.env.clone())?;
    env.restart()?;
    for r in records {
        let diverged = |field| Ok(ReplayReport::Diverged { step: r.t, field });
        let Ok(action) = Action::from_index(r.action) else {
            return diverged("action");
        };
        if env.is_done() {
            return diverged("event");
        }
        let got = env.step(action)?;
        if got.pose != r.pose {
            return diverged("pose");
        }
        if got.observation.digest() != r.scan_digest {
            return diverged("scan_digest");
        }
        if got.reward != r.reward {
            return diverged("reward");
        }
        if got.event != r.event {
            return diverged("event");
        }
        if got.done {
            env.reset()?;
        }
    }
    Ok(ReplayReport::Exact {
        steps: records.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stages::StageKind;

    fn scripted_log(seed: u64, n: u64) -> (StepLogHeader, Vec<StepRecord>) {
        let spec = StageSpec::preset(StageKind::Dynamic, seed);
        let cfg = EnvConfig {
            n_beams: 16,
            ..EnvConfig::default()
        };
        let header = StepLogHeader::new(seed, &spec, &cfg);
        let mut env = Env::new(&spec, cfg).unwrap();
        env.restart().unwrap();
        let mut episode = 1;
        let mut records = Vec::new();
        for t in 0..n {
            let a = (t * 5 % 7) as usize;
            let res = env.step(Action::from_index(a).unwrap()).unwrap();
            records.push(StepRecord::new(t, episode, a, &res));
            if res.done {
                episode += 1;
                env.reset().unwrap();
            }
        }
        (header, records)
    }

    #[test]
    fn unmodified_log_is_exact() {
        let (h, r) = scripted_log(3, 500);
        assert_eq!(replay(&h, &r).unwrap(), ReplayReport::Exact { steps: 500 });
        assert_eq!(replay(&h, &r).unwrap().to_string(), "exact");
    }

    #[test]
    fn perturbed_action_diverges_there() {
        let (h, mut r) = scripted_log(3, 300);
        r[123].action = (r[123].action + 1) % 7;
        match replay(&h, &r).unwrap() {
            ReplayReport::Diverged { step, .. } => assert_eq!(step, 123),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn other_seed_diverges_immediately() {
        let (h, _) = scripted_log(3, 10);
        let (_, r) = scripted_log(4, 10);
        match replay(&h, &r).unwrap() {
            ReplayReport::Diverged { step, .. } => assert!(step <= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plain_and_gzip_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let (h, r) = scripted_log(5, 50);
        for name in ["s.jsonl", "s.jsonl.gz"] {
            let p = dir.path().join(name);
            let mut w = StepLogWriter::create(&p, &h).unwrap();
            for rec in &r {
                w.write(rec).unwrap();
            }
            w.finish().unwrap();
            let (h2, r2) = read_step_log(&p).unwrap();
            assert_eq!(h2, h);
            assert_eq!(r2, r);
        }
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let (mut h, _) = scripted_log(5, 1);
        h.version = 99;
        let p = dir.path().join("v.jsonl");
        StepLogWriter::create(&p, &h).unwrap().finish().unwrap();
        assert!(matches!(read_step_log(&p), Err(Error::StepLog(_))));
    }
}
