//! Run configuration: a TOML file of key/value settings plus command-line
//! overrides (flags win). Unknown keys are rejected so stale configs fail
//! loudly. The resolved configuration is hashed and embedded in every
//! output file together with the root seed.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// One random-graph request: size, edge probability, generator seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RandomGraphSpec {
    pub m: usize,
    pub p: f64,
    pub seed: u64,
}

impl std::str::FromStr for RandomGraphSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("expected M,p,seed, got {s:?}"));
        }
        Ok(Self {
            m: parts[0]
                .trim()
                .parse()
                .map_err(|e| format!("bad node count: {e}"))?,
            p: parts[1]
                .trim()
                .parse()
                .map_err(|e| format!("bad edge probability: {e}"))?,
            seed: parts[2]
                .trim()
                .parse()
                .map_err(|e| format!("bad seed: {e}"))?,
        })
    }
}

/// On-disk configuration schema. Every field is optional; defaults apply
/// after flag overrides.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub graph: Option<PathBuf>,
    pub random: Option<RandomGraphSpec>,
    pub safety_factor: Option<f64>,
    pub layers: Option<usize>,
    pub n_max: Option<usize>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
    pub out: Option<PathBuf>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub graphs_per_size: Option<usize>,
    pub work_budget: Option<u128>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub random: Option<RandomGraphSpec>,
    pub safety_factor: f64,
    pub layers: usize,
    pub n_max: usize,
    pub shots: u64,
    pub seed: u64,
    pub cutoff: usize,
    pub out: PathBuf,
    pub restarts: usize,
    pub max_iters: usize,
    pub graphs_per_size: usize,
    pub work_budget: u128,
}

/// Flag-level overrides collected by clap.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub graph: Option<PathBuf>,
    pub random: Option<RandomGraphSpec>,
    pub safety_factor: Option<f64>,
    pub layers: Option<usize>,
    pub n_max: Option<usize>,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub cutoff: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(file: ConfigFile, flags: &Overrides) -> Result<Self, String> {
        let config = Self {
            graph: flags.graph.clone().or(file.graph),
            random: flags.random.or(file.random),
            safety_factor: flags.safety_factor.or(file.safety_factor).unwrap_or(0.5),
            layers: flags.layers.or(file.layers).unwrap_or(1),
            n_max: flags.n_max.or(file.n_max).unwrap_or(8),
            shots: flags.shots.or(file.shots).unwrap_or(100_000),
            seed: flags.seed.or(file.seed).unwrap_or(42),
            cutoff: flags.cutoff.or(file.cutoff).unwrap_or(8),
            out: flags
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
            restarts: file.restarts.unwrap_or(8),
            max_iters: file.max_iters.unwrap_or(2000),
            graphs_per_size: file.graphs_per_size.unwrap_or(5),
            work_budget: file
                .work_budget
                .unwrap_or(gbs_core::sampler::DEFAULT_WORK_BUDGET),
        };
        if !(config.safety_factor > 0.0 && config.safety_factor < 1.0) {
            return Err(format!(
                "safety_factor must lie in (0,1), got {}",
                config.safety_factor
            ));
        }
        if !(1..=2).contains(&config.layers) {
            return Err(format!("layers must be 1 or 2, got {}", config.layers));
        }
        if config.cutoff < 2 {
            return Err(format!("cutoff must be at least 2, got {}", config.cutoff));
        }
        Ok(config)
    }

    pub fn load_file(path: Option<&Path>) -> Result<ConfigFile, String> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", p.display()))
            }
        }
    }

    /// Hash of the resolved configuration, embedded in every output.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Per-subsystem seed derived from the root seed (splitmix64 step).
    pub fn subsystem_seed(&self, domain: &str) -> u64 {
        let tag: u64 = domain
            .bytes()
            .fold(0xcbf2_9ce4_8422_2325u64, |acc, b| {
                (acc ^ b as u64).wrapping_mul(0x1000_0000_01b3)
            });
        splitmix64(self.seed ^ tag)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
