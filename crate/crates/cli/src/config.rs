//! Run configuration: a TOML file with optional command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use mcgl::potential::{PotentialSpec, DEFAULT_DOMAIN_FLOOR, DEFAULT_WINDOW_END};
use mcgl::stationary::SolveOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    #[default]
    SymmetricQuartic,
    TiltedQuartic {
        tilt: f64,
    },
    /// Ascending coefficients of `F`.
    Polynomial {
        coeffs: Vec<f64>,
        #[serde(default = "default_floor")]
        floor: f64,
        #[serde(default = "default_window_end")]
        window_end: f64,
    },
}

fn default_floor() -> f64 {
    DEFAULT_DOMAIN_FLOOR
}

fn default_window_end() -> f64 {
    DEFAULT_WINDOW_END
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec, mcgl::potential::PotentialError> {
        match self {
            PotentialConfig::SymmetricQuartic => Ok(PotentialSpec::symmetric_quartic()),
            PotentialConfig::TiltedQuartic { tilt } => Ok(PotentialSpec::tilted_quartic(*tilt)),
            PotentialConfig::Polynomial { coeffs, floor, window_end } => {
                PotentialSpec::polynomial(coeffs.clone(), *floor, *window_end)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub eps: Vec<f64>,
    pub r: Vec<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { eps: vec![0.2, 0.15, 0.1, 0.08], r: vec![1.5, 2.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub quad_tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub r_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolveOptions::default();
        Self { tol: d.tol, quad_tol: d.quad_tol, max_iter: d.max_iter, fd_step: d.fd_step, r_margin: d.r_margin }
    }
}

impl SolverConfig {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            quad_tol: self.quad_tol,
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            r_margin: self.r_margin,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Maxwell,
    Step,
    Spinodal,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub n_cells: usize,
    pub t_end: f64,
    pub safety: f64,
    pub sample_interval: f64,
    /// Constant mobility.
    pub mobility: f64,
    pub init: InitKind,
    /// Initial data for `init = "file"`: a CSV whose last column is `u`.
    pub file: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            n_cells: 200,
            t_end: 1.0,
            safety: 0.9,
            sample_interval: 0.01,
            mobility: 1.0,
            init: InitKind::Step,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    /// Largest number of transitions in energy rankings.
    pub n_max: usize,
    /// Transitions for `second-variation`.
    pub n: usize,
    /// Points of reconstructed profiles.
    pub grid_size: usize,
    /// Exclusion half-width around the interface in `limit-check`.
    pub halfwidth: f64,
    pub simulate: SimulateConfig,
    /// Not part of the hash, so the same run gives identical files in any
    /// directory.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            potential: PotentialConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            n_max: 3,
            n: 2,
            grid_size: 2001,
            halfwidth: 0.1,
            simulate: SimulateConfig::default(),
            output_dir: PathBuf::from("."),
            seed: 0,
        }
    }
}

/// Values given on the command line, applied over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub eps: Option<f64>,
    pub r: Option<f64>,
    pub n: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> anyhow::Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(e) = overrides.eps {
            cfg.grid.eps = vec![e];
        }
        if let Some(r) = overrides.r {
            cfg.grid.r = vec![r];
        }
        if let Some(n) = overrides.n {
            cfg.n = n;
        }
        if let Some(d) = &overrides.output_dir {
            cfg.output_dir = d.clone();
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> anyhow::Result<()> {
        if self.grid.eps.is_empty() || self.grid.r.is_empty() {
            bail!("grid.eps and grid.r must be non-empty");
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.quad_tol > 0.0 && s.fd_step > 0.0) {
            bail!("solver tolerances must be positive");
        }
        if self.grid_size < 2 {
            bail!("grid_size must be at least 2");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn eps(&self) -> f64 {
        self.grid.eps[0]
    }

    pub fn r(&self) -> f64 {
        self.grid.r[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_output_dir() {
        let a = RunConfig::default();
        let b = RunConfig { output_dir: PathBuf::from("/elsewhere"), ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn polynomial_section_parses() {
        let cfg: RunConfig = toml::from_str("[potential]\nkind = \"polynomial\"\ncoeffs = [2.25, -6.0, 5.5, -2.0, 0.25]\n").unwrap();
        let p = cfg.potential.build().unwrap();
        assert_eq!(p, mcgl::potential::PotentialSpec::symmetric_quartic());
    }

    #[test]
    fn flags_replace_grid_lists() {
        let o = Overrides { eps: Some(0.05), r: Some(1.5), n: Some(3), output_dir: None };
        let cfg = RunConfig::load(None, &o).unwrap();
        assert_eq!((cfg.grid.eps.clone(), cfg.grid.r.clone(), cfg.n), (vec![0.05], vec![1.5], 3));
    }
}
