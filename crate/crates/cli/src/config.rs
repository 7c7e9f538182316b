//! Run configuration: JSON file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use nodal_lab::minimize::SolveConfig;
use nodal_lab::{DomainSpec, Resolution};
use serde::{Deserialize, Serialize};

/// Acceptance thresholds for `verify` and the diagnostics of `solve`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub interior_residual: f64,
    /// Measure of nodes outside the `q = 1` bracket.
    pub bracket_violation: f64,
    pub flux: f64,
    pub monotonicity: f64,
    pub polarization: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            interior_residual: 1e-2,
            bracket_violation: 1e-2,
            flux: 5e-2,
            monotonicity: 5e-3,
            polarization: 5e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub resolution: Resolution,
    pub q: f64,
    /// Continuation list for `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_list: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn for_domain(domain: DomainSpec) -> Self {
        RunConfig {
            domain,
            resolution: default_resolution(&domain),
            q: 1.0,
            q_list: None,
            solver: SolveConfig::default(),
            thresholds: Thresholds::default(),
            out: default_out(),
        }
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("config key `{path}`: {}", e.into_inner())
        })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }
}

pub fn default_resolution(domain: &DomainSpec) -> Resolution {
    match domain {
        DomainSpec::Interval { .. } => Resolution::interval(2048),
        DomainSpec::Rectangle { .. } => Resolution::cartesian(64, 32),
        DomainSpec::Disc { .. } => Resolution::polar(64, 128),
        DomainSpec::Annulus { .. } => Resolution::polar(32, 128),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainKind {
    Interval,
    Rectangle,
    Disc,
    Annulus,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProblemArgs {
    /// JSON run configuration; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub domain: Option<DomainKind>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Cells on the interval, or along x on the rectangle.
    #[arg(long)]
    pub n: Option<usize>,
    /// Cells along y on the rectangle.
    #[arg(long)]
    pub ny: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long)]
    pub ntheta: Option<usize>,
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub inner: Option<f64>,
    #[arg(long)]
    pub outer: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ProblemArgs {
    /// Config file (or disc defaults) with the flags applied on top.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::for_domain(DomainSpec::unit_disc()),
        };
        if let Some(kind) = self.domain {
            if kind != kind_of(&cfg.domain) {
                let domain = match kind {
                    DomainKind::Interval => DomainSpec::unit_interval(),
                    DomainKind::Rectangle => DomainSpec::Rectangle { width: 2.0, height: 1.0 },
                    DomainKind::Disc => DomainSpec::unit_disc(),
                    DomainKind::Annulus => DomainSpec::Annulus { inner: 0.5, outer: 1.0 },
                };
                cfg.domain = domain;
                cfg.resolution = default_resolution(&domain);
            }
        }
        self.apply_sizes(&mut cfg.domain)?;
        self.apply_resolution(&mut cfg)?;
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(seed) = self.seed {
            cfg.solver.seed = seed;
        }
        if let Some(starts) = self.starts {
            cfg.solver.starts = starts;
        }
        if let Some(m) = self.max_iterations {
            cfg.solver.max_iterations = m;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        cfg.domain.validate()?;
        cfg.solver.validate()?;
        if !(1.0..2.0).contains(&cfg.q) {
            bail!("q = {} is outside [1, 2)", cfg.q);
        }
        Ok(cfg)
    }

    fn apply_sizes(&self, domain: &mut DomainSpec) -> anyhow::Result<()> {
        let name = domain.name();
        match domain {
            DomainSpec::Interval { half_length } => {
                if let Some(v) = self.half_length {
                    *half_length = v;
                }
            }
            DomainSpec::Rectangle { width, height } => {
                if let Some(v) = self.width {
                    *width = v;
                }
                if let Some(v) = self.height {
                    *height = v;
                }
            }
            DomainSpec::Disc { radius } => {
                if let Some(v) = self.radius {
                    *radius = v;
                }
            }
            DomainSpec::Annulus { inner, outer } => {
                if let Some(v) = self.inner {
                    *inner = v;
                }
                if let Some(v) = self.outer {
                    *outer = v;
                }
            }
        }
        let kind = kind_of(domain);
        let flags = [
            ("half-length", self.half_length.is_some(), kind == DomainKind::Interval),
            ("width", self.width.is_some(), kind == DomainKind::Rectangle),
            ("height", self.height.is_some(), kind == DomainKind::Rectangle),
            ("radius", self.radius.is_some(), kind == DomainKind::Disc),
            ("inner", self.inner.is_some(), kind == DomainKind::Annulus),
            ("outer", self.outer.is_some(), kind == DomainKind::Annulus),
        ];
        for (flag, given, fits) in flags {
            if given && !fits {
                bail!("--{flag} does not apply to domain {name}");
            }
        }
        Ok(())
    }

    fn apply_resolution(&self, cfg: &mut RunConfig) -> anyhow::Result<()> {
        let r = &mut cfg.resolution;
        match kind_of(&cfg.domain) {
            DomainKind::Interval | DomainKind::Rectangle => {
                if self.nr.is_some() || self.ntheta.is_some() {
                    bail!("--nr/--ntheta apply to disc and annulus only");
                }
                if let Some(n) = self.n {
                    r.first = n;
                }
                if let Some(ny) = self.ny {
                    if kind_of(&cfg.domain) == DomainKind::Interval {
                        bail!("--ny applies to the rectangle only");
                    }
                    r.second = ny;
                }
            }
            DomainKind::Disc | DomainKind::Annulus => {
                if self.n.is_some() || self.ny.is_some() {
                    bail!("--n/--ny apply to interval and rectangle only; use --nr/--ntheta");
                }
                if let Some(nr) = self.nr {
                    r.first = nr;
                }
                if let Some(nt) = self.ntheta {
                    r.second = nt;
                }
            }
        }
        Ok(())
    }
}

pub fn kind_of(domain: &DomainSpec) -> DomainKind {
    match domain {
        DomainSpec::Interval { .. } => DomainKind::Interval,
        DomainSpec::Rectangle { .. } => DomainKind::Rectangle,
        DomainSpec::Disc { .. } => DomainKind::Disc,
        DomainSpec::Annulus { .. } => DomainKind::Annulus,
    }
}
