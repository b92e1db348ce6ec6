use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ingest::WindowSpec;
use crate::propagation::{RankConfig, RestartMode, Scenario, DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub window_months: u32,
    pub tail_months: u32,
    /// Damping factor.
    pub r: f64,
    pub stickiness: f64,
    pub scenarios: Vec<Scenario>,
    pub restart_mode: RestartMode,
    /// Also score the flattened network (the `Aggregate` column).
    pub flat_baseline: bool,
    pub tolerance: f64,
    pub max_iter: usize,
    pub output: Option<PathBuf>,
    /// Used by the generator only.
    pub seed: u64,
    /// Worker threads for windows; `None` lets the pool decide.
    pub threads: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window_months: WindowSpec::DEFAULT_LENGTH,
            tail_months: WindowSpec::DEFAULT_TAIL,
            r: DEFAULT_DAMPING,
            stickiness: 1.0,
            scenarios: Scenario::ALL.to_vec(),
            restart_mode: RestartMode::FaithfulMatrix,
            flat_baseline: true,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            output: None,
            seed: 0,
            threads: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

impl PipelineConfig {
    pub const KEYS: [&'static str; 12] = [
        "window_months",
        "tail_months",
        "r",
        "stickiness",
        "scenarios",
        "restart_mode",
        "flat_baseline",
        "tolerance",
        "max_iter",
        "output",
        "seed",
        "threads",
    ];

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "window_months" => self.window_months = parse(key, value)?,
            "tail_months" => self.tail_months = parse(key, value)?,
            "r" => self.r = parse(key, value)?,
            "stickiness" => self.stickiness = parse(key, value)?,
            "scenarios" => {
                self.scenarios = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?;
                self.scenarios.sort();
                self.scenarios.dedup();
            }
            "restart_mode" => self.restart_mode = value.parse()?,
            "flat_baseline" => self.flat_baseline = parse_bool(key, value)?,
            "tolerance" => self.tolerance = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            _ => return Err(Error::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| Error::InvalidConfig(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        WindowSpec {
            start: crate::ingest::Month::new(2000, 1).expect("valid month"),
            length_months: self.window_months,
            scoring_tail_months: self.tail_months,
        }
        .validate()?;
        if !(0.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidConfig(format!("r must lie in [0, 1], got {}", self.r)));
        }
        if self.stickiness < 0.0 || !self.stickiness.is_finite() {
            return Err(Error::NegativeStickiness(self.stickiness));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn rank_config(&self) -> RankConfig {
        RankConfig {
            damping: self.r,
            tolerance: self.tolerance,
            max_iter: self.max_iter,
            restart_mode: self.restart_mode,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = PipelineConfig::from_text("# nothing\n\n").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.r, 0.85);
        assert_eq!(cfg.stickiness, 1.0);
        assert_eq!(cfg.window_months, 60);
        assert_eq!(cfg.tail_months, 1);
    }

    #[test]
    fn reads_every_key() {
        let text = "window_months = 24\ntail_months=2\nr = 0.5\nstickiness = 4\nscenarios = combined, intra\n\
                    restart_mode = collapsed\nflat_baseline = off\ntolerance = 1e-8\nmax_iter = 50\n\
                    output = out.csv\nseed = 9\nthreads = 3\n";
        let cfg = PipelineConfig::from_text(text).unwrap();
        assert_eq!(cfg.window_months, 24);
        assert_eq!(cfg.tail_months, 2);
        assert_eq!(cfg.r, 0.5);
        assert_eq!(cfg.stickiness, 4.0);
        assert_eq!(cfg.scenarios, [Scenario::Intra, Scenario::Combined]);
        assert_eq!(cfg.restart_mode, RestartMode::CollapsedVector);
        assert!(!cfg.flat_baseline);
        assert_eq!(cfg.tolerance, 1e-8);
        assert_eq!(cfg.max_iter, 50);
        assert_eq!(cfg.output, Some(PathBuf::from("out.csv")));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.threads, Some(3));
        assert_eq!(text.lines().count(), PipelineConfig::KEYS.len());
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["r = 1.5", "colour = red", "r 0.5", "stickiness = -1", "tail_months = 60", "threads = 0"] {
            assert!(PipelineConfig::from_text(text).is_err(), "{text}");
        }
        let err = PipelineConfig::from_text("r = 0.5\nbogus = 1").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
