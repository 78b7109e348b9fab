//! Run configuration in TOML. Unknown keys are rejected.
//!
//! ```toml
//! [lattice]
//! n = 2              # sites per axis (required when the section is present)
//! h = 1.0            # spacing, default 1.0
//!
//! [bundle]
//! flux = [0, 0, 0, 0, 0, 0]   # even integers, planes 01 02 03 12 13 23
//! kg = -1.0                   # constant, or { file = "kg.bin" } (N⁴ LE f64)
//!
//! [run]
//! seed = 42
//! snapshot = "snap/"          # optional input configuration
//! output_dir = "swmorse-out"
//! tau = 1e-8                  # optional zero threshold override
//! eigen_count = 10
//! operator = "spinor"         # spectrum target: "spinor" (L_A) or "gauge" (d*d)
//! fd_step = 1e-5
//! samples = 20                # random configurations / pairs in checks
//! amp_a = 0.5                 # amplitudes of random configurations
//! amp_phi = 0.5
//!
//! [flow]
//! step = 0.01
//! max_iters = 20000
//! grad_tol = 1e-9
//! regauge_every = 100
//!
//! [identity]
//! sizes = [4, 8, 16]
//! length = 8.0
//! min_ratio = 1.5
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fields::BundleData;
use crate::flow::FlowParams;
use crate::io::snapshot::load_kg_payload;
use crate::lattice::{Cochain, Lattice};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub lattice: LatticeSection,
    #[serde(default)]
    pub bundle: BundleSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub identity: IdentitySection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub n: usize,
    #[serde(default = "one")]
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum KgSpec {
    Constant(f64),
    File(KgFile),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KgFile {
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSection {
    #[serde(default)]
    pub flux: [i64; 6],
    #[serde(default = "zero_kg")]
    pub kg: KgSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorChoice {
    Spinor,
    Gauge,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub snapshot: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub tau: Option<f64>,
    #[serde(default = "default_eigen_count")]
    pub eigen_count: usize,
    #[serde(default = "default_operator")]
    pub operator: OperatorChoice,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "half")]
    pub amp_a: f64,
    #[serde(default = "half")]
    pub amp_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default = "default_regauge")]
    pub regauge_every: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySection {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_min_ratio")]
    pub min_ratio: f64,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn zero_kg() -> KgSpec {
    KgSpec::Constant(0.0)
}
fn default_seed() -> u64 {
    42
}
fn default_eigen_count() -> usize {
    10
}
fn default_operator() -> OperatorChoice {
    OperatorChoice::Spinor
}
fn default_fd_step() -> f64 {
    1e-5
}
fn default_samples() -> usize {
    20
}
fn default_step() -> f64 {
    FlowParams::default().step
}
fn default_max_iters() -> usize {
    FlowParams::default().max_iters
}
fn default_grad_tol() -> f64 {
    FlowParams::default().grad_tol
}
fn default_regauge() -> usize {
    FlowParams::default().regauge_every
}
fn default_sizes() -> Vec<usize> {
    vec![4, 8, 16]
}
fn default_length() -> f64 {
    8.0
}
fn default_min_ratio() -> f64 {
    1.5
}

impl Default for LatticeSection {
    fn default() -> Self {
        LatticeSection { n: 2, h: 1.0 }
    }
}

impl Default for BundleSection {
    fn default() -> Self {
        BundleSection {
            flux: [0; 6],
            kg: zero_kg(),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: default_seed(),
            snapshot: None,
            output_dir: None,
            tau: None,
            eigen_count: default_eigen_count(),
            operator: default_operator(),
            fd_step: default_fd_step(),
            samples: default_samples(),
            amp_a: half(),
            amp_phi: half(),
        }
    }
}

impl Default for FlowSection {
    fn default() -> Self {
        let p = FlowParams::default();
        FlowSection {
            step: p.step,
            max_iters: p.max_iters,
            grad_tol: p.grad_tol,
            regauge_every: p.regauge_every,
        }
    }
}

impl Default for IdentitySection {
    fn default() -> Self {
        IdentitySection {
            sizes: default_sizes(),
            length: default_length(),
            min_ratio: default_min_ratio(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Parse a config file and resolve its relative paths.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let KgSpec::File(f) = &mut cfg.bundle.kg {
            resolve(&mut f.file);
        }
        if let Some(p) = cfg.run.snapshot.as_mut() {
            resolve(p);
        }
        if let Some(p) = cfg.run.output_dir.as_mut() {
            resolve(p);
        }
        Ok(cfg)
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.n, self.lattice.h)
    }

    pub fn bundle(&self) -> Result<BundleData> {
        let lat = self.lattice()?;
        let kg = match &self.bundle.kg {
            KgSpec::Constant(v) => Cochain::constant(lat, 0, *v)?,
            KgSpec::File(f) => load_kg_payload(&f.file, lat)?,
        };
        BundleData::new(self.bundle.flux, kg)
    }

    pub fn flow_params(&self) -> FlowParams {
        FlowParams {
            step: self.flow.step,
            max_iters: self.flow.max_iters,
            grad_tol: self.flow.grad_tol,
            regauge_every: self.flow.regauge_every,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn full_config_parses() {
        let cfg = RunConfig::parse(
            r#"
            [lattice]
            n = 3
            h = 0.5
            [bundle]
            flux = [2, 0, 0, 0, 0, 2]
            kg = -1.0
            [run]
            seed = 7
            operator = "gauge"
            [flow]
            max_iters = 10
            [identity]
            sizes = [4, 8]
            "#,
        )
        .unwrap();
        assert_eq!((cfg.lattice.n, cfg.lattice.h), (3, 0.5));
        assert_eq!(cfg.bundle.kg, KgSpec::Constant(-1.0));
        assert_eq!(cfg.run.operator, OperatorChoice::Gauge);
        assert_eq!(cfg.flow.max_iters, 10);
        assert_eq!(cfg.flow.step, FlowParams::default().step);
        assert_eq!(cfg.bundle().unwrap().alpha_squared(), 8);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::parse("[lattice]\nn = 2\nspacing = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("spacing"), "{err}");
        let err = RunConfig::parse("[run]\nsede = 1\n").unwrap_err();
        assert!(err.to_string().contains("sede"), "{err}");
        assert!(RunConfig::parse("[extra]\n")
            .unwrap_err()
            .to_string()
            .contains("extra"));
    }

    #[test]
    fn kg_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let values: Vec<u8> = (0..16)
            .flat_map(|i| (i as f64 * 0.25 - 1.0).to_le_bytes())
            .collect();
        fs::write(dir.path().join("kg.bin"), values).unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "[lattice]\nn = 2\n[bundle]\nkg = { file = \"kg.bin\" }\n",
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let b = cfg.bundle().unwrap();
        assert_eq!(b.kg().values()[0], -1.0);
        assert_eq!(b.kg().values()[15], 2.75);
    }

    #[test]
    fn odd_flux_is_rejected_at_bundle_construction() {
        let cfg = RunConfig::parse("[bundle]\nflux = [1, 0, 0, 0, 0, 0]\n").unwrap();
        assert!(matches!(cfg.bundle(), Err(Error::Bundle(_))));
    }
}
