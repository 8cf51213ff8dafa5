//! Flag parsing, the optional TOML config file, and the resolved settings
//! every command runs from. Flags win over the file, the file over defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::Args;
use rotorgw::{OffspringDistribution, RotorMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Truncation policy: a fixed depth or the doubling schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Depth {
    Fixed(u32),
    Adaptive,
}

impl FromStr for Depth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "adaptive" {
            return Ok(Depth::Adaptive);
        }
        let h = s.strip_prefix("fixed:").ok_or_else(|| format!("expected `fixed:<H>` or `adaptive`, got `{s}`"))?;
        match h.parse::<u32>() {
            Ok(0) => Err("the truncation depth must be at least 1".into()),
            Ok(h) => Ok(Depth::Fixed(h)),
            Err(_) => Err(format!("`{h}` is not a non-negative depth")),
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Fixed(h) => write!(f, "fixed:{h}"),
            Depth::Adaptive => f.write_str("adaptive"),
        }
    }
}

/// `N` (seeds `0..N`), `N@B` (seeds `B..B+N`) or a comma list `a,b,c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seeds(pub Vec<u64>);

impl FromStr for Seeds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = |_| format!("bad seed spec `{s}`; use N, N@BASE or a,b,c");
        let seeds: Vec<u64> = if s.contains(',') {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(bad))
                .collect::<Result<_, _>>()?
        } else if let Some((count, base)) = s.split_once('@') {
            let (count, base): (u64, u64) = (count.parse().map_err(bad)?, base.parse().map_err(bad)?);
            let end = base.checked_add(count).ok_or_else(|| format!("seed range `{s}` overflows"))?;
            (base..end).collect()
        } else {
            (0..s.parse::<u64>().map_err(bad)?).collect()
        };
        if seeds.is_empty() {
            return Err("no seeds selected".into());
        }
        Ok(Seeds(seeds))
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// Offspring law, e.g. `p1=1/2,p3=1/2`.
    #[arg(long)]
    pub xi: Option<String>,
    /// Rotor matrix: `uniform` or `rows:q10,q11;q20,q21,q22;...`.
    #[arg(long)]
    pub q: Option<String>,
    /// Seeds: `N`, `N@BASE` or `a,b,c`.
    #[arg(long)]
    pub seeds: Option<Seeds>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the JSON summary (stderr when absent).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// TOML file supplying any of the flags; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Q as written in a config file: a keyword/`rows:` string or a list of rows.
#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum QSpec {
    Text(String),
    Rows(Vec<Vec<String>>),
}

impl QSpec {
    fn into_text(self) -> String {
        match self {
            QSpec::Text(t) => t,
            QSpec::Rows(rows) => format!("rows:{}", rows.iter().map(|r| r.join(",")).collect::<Vec<_>>().join(";")),
        }
    }
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    Text(String),
    List(Vec<u64>),
}

/// Every key the config file may set.
#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub xi: Option<String>,
    pub q: Option<QSpec>,
    pub seeds: Option<SeedSpec>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub n: Option<u64>,
    pub depth: Option<String>,
    pub gamma_depth: Option<u32>,
    pub rle: Option<PathBuf>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub trials: Option<u64>,
    pub max_nodes: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }

    pub fn seeds(&self) -> Result<Option<Seeds>, CliError> {
        match &self.seeds {
            None => Ok(None),
            Some(SeedSpec::Count(n)) => n.to_string().parse().map(Some).map_err(CliError::Validation),
            Some(SeedSpec::Text(t)) => t.parse().map(Some).map_err(CliError::Validation),
            Some(SeedSpec::List(l)) if l.is_empty() => Err(CliError::Validation("no seeds selected".into())),
            Some(SeedSpec::List(l)) => Ok(Some(Seeds(l.clone()))),
        }
    }

    pub fn depth(&self) -> Result<Option<Depth>, CliError> {
        self.depth.as_deref().map(|d| d.parse().map_err(CliError::Validation)).transpose()
    }
}

/// Settings shared by all commands after merging flags, file and defaults.
#[derive(Clone, Debug)]
pub struct Common {
    pub xi: OffspringDistribution,
    pub q: Arc<RotorMatrix>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn load_file(args: &CommonArgs) -> Result<FileConfig, CliError> {
    args.config.as_deref().map(FileConfig::load).transpose().map(Option::unwrap_or_default)
}

pub fn resolve_common(args: &CommonArgs, file: &FileConfig, xi_required: bool) -> Result<Common, CliError> {
    let xi_text = match args.xi.clone().or_else(|| file.xi.clone()) {
        Some(x) => x,
        None if xi_required => return Err(CliError::Validation("--xi is required".into())),
        None => "p2=1".into(),
    };
    let xi = OffspringDistribution::parse(&xi_text)?;
    let q_text = args.q.clone().or_else(|| file.q.clone().map(QSpec::into_text)).unwrap_or_else(|| "uniform".into());
    let q = RotorMatrix::parse(&q_text, xi.k_max())?;
    if q.k_max() < xi.k_max() {
        return Err(CliError::Validation(format!(
            "rotor matrix has rows up to {} but the offspring law reaches {}",
            q.k_max(),
            xi.k_max()
        )));
    }
    let mut seeds = match &args.seeds {
        Some(s) => s.0.clone(),
        None => file.seeds()?.map_or(vec![0], |s| s.0),
    };
    // rows come out in seed order whatever order they were listed in
    seeds.sort_unstable();
    seeds.dedup();
    let jobs = args.jobs.or(file.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Validation("--jobs must be at least 1".into()));
    }
    Ok(Common {
        xi,
        q: Arc::new(q),
        seeds,
        jobs,
        out: args.out.clone().or_else(|| file.out.clone()),
        summary: args.summary.clone().or_else(|| file.summary.clone()),
    })
}

/// The part of the configuration that determines results, echoed into
/// every output file. Thread count and output paths are left out so that
/// files from different runs of the same experiment compare equal.
#[derive(Serialize, Debug, Clone)]
pub struct Echo {
    pub xi: String,
    pub q: String,
    pub seeds: Vec<u64>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Echo {
    pub fn new(common: &Common) -> Self {
        Self {
            xi: common.xi.describe(),
            q: common.q.describe(),
            seeds: common.seeds.clone(),
            extra: Default::default(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra.insert(key.into(), serde_json::to_value(value).expect("plain values serialize"));
        self
    }
}
