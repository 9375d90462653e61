//! Experiment configuration, read from TOML.
//!
//! ```toml
//! [experiment]
//! dataset = "AIDS"
//! data_root = "data"
//! method = "muse"          # muse | v1..v4 | noaug | nocos | gae2 | featae2
//! trials = 5
//!
//! [encoder]
//! hidden_dim = 32
//! layers = 3
//!
//! [muse]
//! omega_exponent = 1.0
//!
//! [train]
//! epochs = 100
//! lr = 0.001
//!
//! [occ]
//! hidden = 32
//! lr = 0.001
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MuseError, Result};
use crate::errorrep::{Aggregator, RepresentationSpec};
use crate::models::{FeatLoss, GinEncoderConfig, MuseConfig, TrainConfig};
use crate::occ::OccConfig;

/// Name of the built-in synthetic GLAD dataset.
pub const SYN_COM: &str = "syn-com";

pub const GRID_LR: [f64; 2] = [1e-3, 1e-4];
pub const GRID_HIDDEN: [usize; 5] = [16, 32, 64, 128, 256];
pub const GRID_LAYERS: [usize; 3] = [3, 4, 5];
pub const GRID_EPOCHS: [usize; 10] = [20, 40, 60, 80, 100, 120, 140, 160, 180, 200];
pub const GRID_OMEGA: [f64; 3] = [0.0, 1.0, 2.0];
pub const GRID_OCC_HIDDEN: [usize; 3] = [32, 64, 128];
pub const GRID_OCC_LR: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const OCC_EPOCHS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Without `L_X`.
    V1,
    /// Without `L_A`.
    V2,
    /// Without the mean aggregation.
    V3,
    /// Without the standard-deviation aggregation.
    V4,
    NoAug,
    NoCos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Muse,
    MuseVariant(Variant),
    /// Two-stage GAE: pooled encoder embeddings into the one-class model.
    Gae2,
    FeatAe2,
}

impl Method {
    pub const ABLATIONS: [Variant; 4] = [Variant::V1, Variant::V2, Variant::V3, Variant::V4];

    pub fn is_muse(self) -> bool {
        matches!(self, Method::Muse | Method::MuseVariant(_))
    }

    pub fn muse_config(self, base: &MuseConfig) -> MuseConfig {
        let mut cfg = base.clone();
        match self {
            Method::MuseVariant(Variant::V1) => cfg.use_lx = false,
            Method::MuseVariant(Variant::V2) => cfg.use_la = false,
            Method::MuseVariant(Variant::NoAug) => cfg.aug_edge_drop_rate = 0.0,
            Method::MuseVariant(Variant::NoCos) => cfg.feature_loss = FeatLoss::Frobenius,
            _ => {}
        }
        cfg
    }

    pub fn representation(self, muse: &MuseConfig) -> RepresentationSpec {
        let mut spec = RepresentationSpec {
            use_x: muse.use_lx,
            use_a: muse.use_la,
            ..RepresentationSpec::default()
        };
        match self {
            Method::MuseVariant(Variant::V3) => spec.aggregators = vec![Aggregator::Std],
            Method::MuseVariant(Variant::V4) => spec.aggregators = vec![Aggregator::Mean],
            _ => {}
        }
        spec
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Muse => "muse",
            Method::MuseVariant(Variant::V1) => "v1",
            Method::MuseVariant(Variant::V2) => "v2",
            Method::MuseVariant(Variant::V3) => "v3",
            Method::MuseVariant(Variant::V4) => "v4",
            Method::MuseVariant(Variant::NoAug) => "noaug",
            Method::MuseVariant(Variant::NoCos) => "nocos",
            Method::Gae2 => "gae2",
            Method::FeatAe2 => "featae2",
        };
        f.write_str(s)
    }
}

impl FromStr for Method {
    type Err = MuseError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Ok(match key.as_str() {
            "muse" => Method::Muse,
            "v1" | "musev1" => Method::MuseVariant(Variant::V1),
            "v2" | "musev2" => Method::MuseVariant(Variant::V2),
            "v3" | "musev3" => Method::MuseVariant(Variant::V3),
            "v4" | "musev4" => Method::MuseVariant(Variant::V4),
            "noaug" | "musenoaug" => Method::MuseVariant(Variant::NoAug),
            "nocos" | "musenocos" => Method::MuseVariant(Variant::NoCos),
            "gae" | "gae2" => Method::Gae2,
            "featae" | "featae2" => Method::FeatAe2,
            _ => return Err(MuseError::Config(format!("unknown method {s:?}"))),
        })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub dataset: String,
    pub data_root: PathBuf,
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    pub contamination: f64,
    /// Classes used as the normal class in turn; all classes when absent.
    pub normal_classes: Option<Vec<usize>>,
    pub tune: bool,
    /// Reject hyperparameters outside the tuning grids.
    pub strict_grid: bool,
    pub precision_k: usize,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            dataset: SYN_COM.into(),
            data_root: PathBuf::from("data"),
            method: Method::Muse,
            trials: 5,
            seed: 0,
            contamination: 0.0,
            normal_classes: None,
            tune: false,
            strict_grid: true,
            precision_k: crate::harness::metrics::DEFAULT_K,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderSection {
    pub hidden_dim: usize,
    pub layers: usize,
    pub dropout: f64,
}

impl Default for EncoderSection {
    fn default() -> Self {
        EncoderSection {
            hidden_dim: 32,
            layers: 3,
            dropout: 0.3,
        }
    }
}

impl EncoderSection {
    pub fn encoder(&self, input_dim: usize) -> GinEncoderConfig {
        GinEncoderConfig {
            dropout: self.dropout,
            ..GinEncoderConfig::new(input_dim, self.hidden_dim, self.layers)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuseSection {
    pub aug_edge_drop_rate: f64,
    pub omega_exponent: f64,
    pub use_lx: bool,
    pub use_la: bool,
    pub feature_loss: String,
    pub sample_k: Option<usize>,
}

impl Default for MuseSection {
    fn default() -> Self {
        let d = MuseConfig::default();
        MuseSection {
            aug_edge_drop_rate: d.aug_edge_drop_rate,
            omega_exponent: d.omega_exponent,
            use_lx: d.use_lx,
            use_la: d.use_la,
            feature_loss: "cosine".into(),
            sample_k: d.sample_k,
        }
    }
}

impl MuseSection {
    pub fn config(&self) -> Result<MuseConfig> {
        Ok(MuseConfig {
            aug_edge_drop_rate: self.aug_edge_drop_rate,
            omega_exponent: self.omega_exponent,
            use_lx: self.use_lx,
            use_la: self.use_la,
            feature_loss: self.feature_loss.parse()?,
            sample_k: self.sample_k,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: Option<usize>,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::new(100, 1e-3, 0);
        TrainSection {
            epochs: d.epochs,
            lr: d.lr,
            weight_decay: d.weight_decay,
            batch_size: d.batch_size,
        }
    }
}

impl TrainSection {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            weight_decay: self.weight_decay,
            seed,
            batch_size: self.batch_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccSection {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
}

impl Default for OccSection {
    fn default() -> Self {
        OccSection {
            hidden: 32,
            lr: 1e-3,
            epochs: OCC_EPOCHS,
        }
    }
}

impl OccSection {
    pub fn config(&self, seed: u64) -> OccConfig {
        OccConfig {
            epochs: self.epochs,
            ..OccConfig::new(self.hidden, self.lr, seed)
        }
    }
}

/// Candidate values searched when tuning; defaults are the full grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneGrid {
    pub lr: Vec<f64>,
    pub hidden_dim: Vec<usize>,
    pub layers: Vec<usize>,
    pub epochs: Vec<usize>,
    pub omega_exponent: Vec<f64>,
    pub occ_hidden: Vec<usize>,
    pub occ_lr: Vec<f64>,
}

impl Default for TuneGrid {
    fn default() -> Self {
        TuneGrid {
            lr: GRID_LR.to_vec(),
            hidden_dim: GRID_HIDDEN.to_vec(),
            layers: GRID_LAYERS.to_vec(),
            epochs: GRID_EPOCHS.to_vec(),
            omega_exponent: GRID_OMEGA.to_vec(),
            occ_hidden: GRID_OCC_HIDDEN.to_vec(),
            occ_lr: GRID_OCC_LR.to_vec(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub encoder: EncoderSection,
    pub muse: MuseSection,
    pub train: TrainSection,
    pub occ: OccSection,
    pub tune: TuneGrid,
}

fn on_grid<T: PartialEq + fmt::Debug>(name: &str, v: &T, grid: &[T], out: &mut Vec<String>) {
    if !grid.contains(v) {
        out.push(format!("{name} = {v:?} not in {grid:?}"));
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| MuseError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| MuseError::Config(e.to_string()))
    }

    /// Parameters (including tuning candidates) outside the search grids.
    pub fn grid_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        on_grid("train.lr", &self.train.lr, &GRID_LR, &mut out);
        on_grid("encoder.hidden_dim", &self.encoder.hidden_dim, &GRID_HIDDEN, &mut out);
        on_grid("encoder.layers", &self.encoder.layers, &GRID_LAYERS, &mut out);
        on_grid("train.epochs", &self.train.epochs, &GRID_EPOCHS, &mut out);
        on_grid("muse.omega_exponent", &self.muse.omega_exponent, &GRID_OMEGA, &mut out);
        on_grid("occ.hidden", &self.occ.hidden, &GRID_OCC_HIDDEN, &mut out);
        on_grid("occ.lr", &self.occ.lr, &GRID_OCC_LR, &mut out);
        on_grid("occ.epochs", &self.occ.epochs, &[OCC_EPOCHS], &mut out);
        if self.experiment.tune {
            let t = &self.tune;
            t.lr.iter().for_each(|v| on_grid("tune.lr", v, &GRID_LR, &mut out));
            t.hidden_dim.iter().for_each(|v| on_grid("tune.hidden_dim", v, &GRID_HIDDEN, &mut out));
            t.layers.iter().for_each(|v| on_grid("tune.layers", v, &GRID_LAYERS, &mut out));
            t.epochs.iter().for_each(|v| on_grid("tune.epochs", v, &GRID_EPOCHS, &mut out));
            t.omega_exponent.iter().for_each(|v| on_grid("tune.omega_exponent", v, &GRID_OMEGA, &mut out));
            t.occ_hidden.iter().for_each(|v| on_grid("tune.occ_hidden", v, &GRID_OCC_HIDDEN, &mut out));
            t.occ_lr.iter().for_each(|v| on_grid("tune.occ_lr", v, &GRID_OCC_LR, &mut out));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.trials == 0 {
            return Err(MuseError::Config("trials must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&e.contamination) {
            return Err(MuseError::Config(format!("contamination {} outside [0,1)", e.contamination)));
        }
        if e.precision_k == 0 {
            return Err(MuseError::Config("precision_k must be at least 1".into()));
        }
        if self.train.epochs == 0 || self.occ.epochs == 0 {
            return Err(MuseError::Config("epochs must be at least 1".into()));
        }
        self.muse.config()?;
        if e.tune {
            let t = &self.tune;
            if t.lr.is_empty()
                || t.hidden_dim.is_empty()
                || t.layers.is_empty()
                || t.epochs.is_empty()
                || t.omega_exponent.is_empty()
                || t.occ_hidden.is_empty()
                || t.occ_lr.is_empty()
            {
                return Err(MuseError::Config("every tuning list needs at least one value".into()));
            }
            if t.epochs.contains(&0) {
                return Err(MuseError::Config("tuning epochs must be positive".into()));
            }
        }
        if e.strict_grid {
            let v = self.grid_violations();
            if !v.is_empty() {
                return Err(MuseError::Config(format!("off-grid hyperparameters: {}", v.join("; "))));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_on_grid() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.grid_violations().is_empty());
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_and_errors() {
        let cfg = ExperimentConfig::from_toml_str(
            "[experiment]\ndataset = \"AIDS\"\nmethod = \"v3\"\n[encoder]\nhidden_dim = 64\n[train]\nepochs = 40\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment.method, Method::MuseVariant(Variant::V3));
        assert_eq!(cfg.encoder.hidden_dim, 64);
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap(), cfg);

        assert!(ExperimentConfig::from_toml_str("[train]\nepochs = 30\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[experiment]\nstrict_grid = false\n[train]\nepochs = 30\n").is_ok());
        assert!(ExperimentConfig::from_toml_str("[experiment]\nmethod = \"foo\"\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[encoder]\nwidth = 3\n").is_err());
        assert!(ExperimentConfig::from_toml_str("[experiment]\ncontamination = 1.0\n").is_err());
    }

    #[test]
    fn method_names() {
        for m in ["muse", "v1", "v2", "v3", "v4", "noaug", "nocos", "gae2", "featae2"] {
            assert_eq!(m.parse::<Method>().unwrap().to_string(), m);
        }
        let base = MuseConfig::default();
        assert!(!Method::MuseVariant(Variant::V1).muse_config(&base).use_lx);
        assert_eq!(Method::MuseVariant(Variant::V2).representation(&Method::MuseVariant(Variant::V2).muse_config(&base)).dim(), 2);
        assert_eq!(Method::MuseVariant(Variant::V4).representation(&base).aggregators, vec![Aggregator::Mean]);
    }
}
