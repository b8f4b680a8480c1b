//! Run configuration: a flat `key=value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use neurochaos::chaos::DEFAULT_MAX_ITERS;
use neurochaos::{GlsParams, GridAxis, LoadingStrategy, ParamGrid, SearchPlan, StagedSearch};

/// Bad flags, config keys or values. Reported before any computation.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Flags shared by every subcommand. Any flag may also be set in the
/// `--config` file under the same name (`max-iters` or `max_iters`).
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// key=value file supplying defaults for the flags below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// original | aggregated | dual
    #[arg(long)]
    pub strategy: Option<String>,
    /// initial neural activity
    #[arg(long)]
    pub q: Option<f64>,
    /// discrimination threshold
    #[arg(long)]
    pub b: Option<f64>,
    /// recognition radius
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// cross-validation folds
    #[arg(long)]
    pub k: Option<usize>,
    /// train fraction of the stratified split
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// sweep mode: staged | grid
    #[arg(long)]
    pub mode: Option<String>,
    /// lo:hi:step
    #[arg(long)]
    pub q_range: Option<String>,
    /// lo:hi:step
    #[arg(long)]
    pub b_range: Option<String>,
    /// lo:hi:step
    #[arg(long)]
    pub eps_range: Option<String>,
    /// persisted model file
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// add a runtime comment line to the eval report
    #[arg(long)]
    pub timing: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "nodes",
    "edges",
    "strategy",
    "q",
    "b",
    "eps",
    "max_iters",
    "k",
    "ratio",
    "seed",
    "out",
    "mode",
    "q_range",
    "b_range",
    "eps_range",
    "model",
    "timing",
];

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text =
        fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return config_err(format!(
                "{}: line {}: expected key=value",
                path.display(),
                n + 1
            ));
        };
        let key = key.trim().replace('-', "_");
        let key = if key == "epsilon" {
            "eps".to_string()
        } else {
            key
        };
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return config_err(format!(
                "{}: line {}: unknown key {key:?}",
                path.display(),
                n + 1
            ));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, ConfigError> {
    match file.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| ConfigError(format!("config key {key}: cannot parse {raw:?}"))),
    }
}

fn parse_range(key: &str, raw: &str) -> Result<GridAxis, ConfigError> {
    let parts: Vec<&str> = raw.split(':').collect();
    let nums: Option<Vec<f64>> = parts.iter().map(|p| p.trim().parse().ok()).collect();
    match nums.as_deref() {
        Some(&[lo, hi, step]) => GridAxis::new(lo, hi, step)
            .map_err(|e| ConfigError(format!("--{}: {e}", key.replace('_', "-")))),
        _ => config_err(format!(
            "--{} expects lo:hi:step, got {raw:?}",
            key.replace('_', "-")
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Staged,
    Grid,
}

/// Flags and config file merged, typed and validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub nodes: Option<PathBuf>,
    pub edges: Option<PathBuf>,
    pub strategy: LoadingStrategy,
    pub q: Option<f64>,
    pub b: Option<f64>,
    pub eps: Option<f64>,
    pub max_iters: usize,
    pub k: usize,
    pub ratio: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub mode: SweepMode,
    pub q_range: Option<GridAxis>,
    pub b_range: Option<GridAxis>,
    pub eps_range: Option<GridAxis>,
    pub model: Option<PathBuf>,
    pub timing: bool,
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, ConfigError> {
        let file = match &flags.config {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };

        macro_rules! pick {
            ($field:ident) => {
                match flags.$field.clone() {
                    Some(v) => Some(v),
                    None => from_file(&file, stringify!($field))?,
                }
            };
        }

        let strategy: Option<String> = pick!(strategy);
        let strategy = match strategy {
            Some(s) => s
                .parse::<LoadingStrategy>()
                .map_err(|e| ConfigError(e.to_string()))?,
            None => LoadingStrategy::DualLoading,
        };
        let mode: Option<String> = pick!(mode);
        let mode = match mode.as_deref() {
            None | Some("staged") => SweepMode::Staged,
            Some("grid") => SweepMode::Grid,
            Some(other) => {
                return config_err(format!("unknown sweep mode {other:?} (staged or grid)"))
            }
        };
        let range = |key: &str, flag: &Option<String>| -> Result<Option<GridAxis>, ConfigError> {
            match flag.clone().or_else(|| file.get(key).cloned()) {
                Some(raw) => parse_range(key, &raw).map(Some),
                None => Ok(None),
            }
        };
        let timing = flags.timing || from_file::<bool>(&file, "timing")?.unwrap_or(false);

        let cfg = RunConfig {
            nodes: pick!(nodes),
            edges: pick!(edges),
            strategy,
            q: pick!(q),
            b: pick!(b),
            eps: pick!(eps),
            max_iters: pick!(max_iters).unwrap_or(DEFAULT_MAX_ITERS),
            k: pick!(k).unwrap_or(5),
            ratio: pick!(ratio).unwrap_or(0.8),
            seed: pick!(seed).unwrap_or(0),
            out: pick!(out),
            mode,
            q_range: range("q_range", &flags.q_range)?,
            b_range: range("b_range", &flags.b_range)?,
            eps_range: range("eps_range", &flags.eps_range)?,
            model: pick!(model),
            timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return config_err(format!("--ratio must lie in (0, 1), got {}", self.ratio));
        }
        if self.k < 2 {
            return config_err(format!("--k must be at least 2, got {}", self.k));
        }
        if self.max_iters == 0 {
            return config_err("--max-iters must be at least 1");
        }
        Ok(())
    }

    pub fn nodes(&self) -> Result<&Path, ConfigError> {
        self.nodes
            .as_deref()
            .ok_or_else(|| ConfigError("--nodes is required".into()))
    }

    /// Edges are needed only when the strategy aggregates neighbours.
    pub fn edges_for(&self, strategy: LoadingStrategy) -> Result<Option<&Path>, ConfigError> {
        match (&self.edges, strategy.uses_edges()) {
            (Some(p), _) => Ok(Some(p.as_path())),
            (None, false) => Ok(None),
            (None, true) => config_err(format!("--edges is required for strategy {strategy}")),
        }
    }

    pub fn edges(&self) -> Result<&Path, ConfigError> {
        self.edges
            .as_deref()
            .ok_or_else(|| ConfigError("--edges is required".into()))
    }

    pub fn out(&self) -> Result<&Path, ConfigError> {
        self.out
            .as_deref()
            .ok_or_else(|| ConfigError("--out is required".into()))
    }

    pub fn params(&self) -> Result<GlsParams, ConfigError> {
        let (Some(q), Some(b), Some(eps)) = (self.q, self.b, self.eps) else {
            let missing: Vec<&str> = [("--q", self.q), ("--b", self.b), ("--eps", self.eps)]
                .iter()
                .filter(|(_, v)| v.is_none())
                .map(|(n, _)| *n)
                .collect();
            return config_err(format!("missing parameter(s): {}", missing.join(", ")));
        };
        GlsParams::with_max_iters(q, b, eps, self.max_iters)
            .map_err(|e| ConfigError(format!("parameter out of range: {e}")))
    }

    pub fn search_plan(&self) -> Result<SearchPlan, ConfigError> {
        match self.mode {
            SweepMode::Grid => {
                let (Some(q), Some(b), Some(e)) = (self.q_range, self.b_range, self.eps_range)
                else {
                    return config_err("grid mode needs --q-range, --b-range and --eps-range");
                };
                let grid = ParamGrid {
                    q,
                    b,
                    epsilon: e,
                    max_iters: self.max_iters,
                };
                grid.points()
                    .map_err(|e| ConfigError(format!("grid point out of range: {e}")))?;
                Ok(SearchPlan::Grid(grid))
            }
            SweepMode::Staged => {
                let mut staged = StagedSearch::default();
                let coarse = &mut staged.coarse;
                coarse.max_iters = self.max_iters;
                if let Some(a) = self.q_range {
                    coarse.q = a;
                }
                if let Some(a) = self.b_range {
                    coarse.b = a;
                }
                if let Some(a) = self.eps_range {
                    coarse.epsilon = a;
                }
                coarse
                    .points()
                    .map_err(|e| ConfigError(format!("grid point out of range: {e}")))?;
                Ok(SearchPlan::Staged(staged))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_config(body: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        fs::write(&p, body).unwrap();
        (dir, p)
    }

    #[test]
    fn flags_override_config() {
        let (_dir, path) =
            write_config("# run\nq = 0.3\nb=0.6\nepsilon=0.05\nseed=9\nmax-iters=100\n");
        let flags = Flags {
            config: Some(path),
            q: Some(0.52),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&flags).unwrap();
        let p = cfg.params().unwrap();
        assert_eq!((p.q, p.b, p.epsilon, p.max_iters), (0.52, 0.6, 0.05, 100));
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn unknown_key_rejected() {
        let (_dir, path) = write_config("learning_rate=0.1\n");
        let flags = Flags {
            config: Some(path),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&flags)
            .unwrap_err()
            .0
            .contains("learning_rate"));
    }

    #[test]
    fn epsilon_range_checked() {
        let flags = Flags {
            q: Some(0.5),
            b: Some(0.5),
            eps: Some(1.5),
            ..Default::default()
        };
        let err = RunConfig::resolve(&flags).unwrap().params().unwrap_err();
        assert!(err.0.contains("epsilon") && err.0.contains("1.5"), "{err}");
    }

    #[test]
    fn ranges() {
        let flags = Flags {
            mode: Some("grid".into()),
            q_range: Some("0.1:0.2:0.1".into()),
            b_range: Some("0.5:0.6:0.1".into()),
            eps_range: Some("0.05:0.1:0.05".into()),
            ..Default::default()
        };
        match RunConfig::resolve(&flags).unwrap().search_plan().unwrap() {
            SearchPlan::Grid(g) => assert_eq!(g.len(), 8),
            other => panic!("{other:?}"),
        }

        let empty = Flags {
            q_range: Some("0.4:0.2:0.1".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&empty).unwrap_err().0.contains("empty"));
        let bad = Flags {
            q_range: Some("0.4:0.2".into()),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&bad).is_err());
    }
}
