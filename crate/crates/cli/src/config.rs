//! Optional `key = value` configuration file. Flags override it.

use std::path::{Path, PathBuf};

use dlin::{Error, Result};

pub const CACHE_ENV: &str = "DLIN_CACHE_DIR";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub cache_dir: Option<PathBuf>,
    pub max_pivots: Option<u64>,
    pub max_time_secs: Option<f64>,
    pub jobs: Option<usize>,
    pub verify_max_n: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("config line {line}: bad value {value:?} for {key}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
                "max_pivots" => cfg.max_pivots = Some(parse_value(key, value, line)?),
                "max_time_secs" => cfg.max_time_secs = Some(parse_value(key, value, line)?),
                "jobs" => cfg.jobs = Some(parse_value(key, value, line)?),
                "verify_max_n" => cfg.verify_max_n = Some(parse_value(key, value, line)?),
                "seed" => cfg.seed = Some(parse_value(key, value, line)?),
                _ => return Err(Error::InvalidArgument(format!("config line {line}: unknown key {key:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Flag, then environment, then file.
    pub fn cache_dir(&self, flag: Option<&Path>) -> Option<PathBuf> {
        flag.map(Path::to_path_buf)
            .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
            .or_else(|| self.cache_dir.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let cfg = Config::parse("# limits\nmax_pivots = 100\n\njobs=3 # inline\ncache_dir = /tmp/k\nmax_time_secs = 2.5\n").unwrap();
        assert_eq!(cfg.max_pivots, Some(100));
        assert_eq!(cfg.jobs, Some(3));
        assert_eq!(cfg.cache_dir, Some(PathBuf::from("/tmp/k")));
        assert_eq!(cfg.max_time_secs, Some(2.5));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(Config::parse("colour = red").is_err());
        assert!(Config::parse("jobs = many").is_err());
        assert!(Config::parse("jobs").is_err());
    }

    #[test]
    fn flag_wins_over_file() {
        let cfg = Config { cache_dir: Some("/from/file".into()), ..Config::default() };
        assert_eq!(cfg.cache_dir(Some(Path::new("/flag"))), Some(PathBuf::from("/flag")));
    }
}
