//! Experiment configuration.
//!
//! JSON object; every field is optional and falls back to the defaults below.
//! Unknown fields are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use amplab_core::{Boundary, Dynamics, Measure};
use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MAX_LATTICE_SIZE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySpec {
    #[default]
    Periodic,
    Open,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    #[default]
    Zero,
    /// `V_x = strength * (x - center)^2`; center defaults to `L / 2`.
    Harmonic { strength: f64, center: Option<f64> },
    /// Independent uniform draws in `[-amplitude, amplitude]`; needs a seed.
    Random { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AbsorberSpec {
    Uniform {
        value: f64,
    },
    /// `V_x = x / (L - 1)`, rising to 1 at the last site.
    #[default]
    Ramp,
    Explicit {
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    #[default]
    Flat,
    Weights {
        values: Vec<f64>,
    },
    /// `w_x = dx * (1 + bump * sin^2(pi x / L))`.
    Curved {
        dx: f64,
        bump: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgebraParams {
    pub trials: usize,
    pub max_filters: usize,
    pub max_holes: usize,
    pub max_gap: i64,
}

impl Default for AlgebraParams {
    fn default() -> Self {
        AlgebraParams {
            trials: 200,
            max_filters: 3,
            max_holes: 6,
            max_gap: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BornParams {
    /// Single-copy probabilities, as decimal or `a/b` strings.
    pub p: Vec<String>,
    /// Window half-width.
    pub epsilon: String,
    pub replicas: Vec<u64>,
    /// Window centers; empty means each `p` itself.
    pub centers: Vec<String>,
}

impl Default for BornParams {
    fn default() -> Self {
        BornParams {
            p: vec!["3/10".into()],
            epsilon: "1/50".into(),
            replicas: vec![100, 1000, 10000],
            centers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyParams {
    /// Sample states on the curve.
    pub samples: usize,
    pub steps: u64,
    /// The two sites spanned by the great-circle curve; defaults to `0` and `L / 2`.
    pub sites: Option<[usize; 2]>,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            samples: 1000,
            steps: 1000,
            sites: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorBasis {
    #[default]
    Fourier,
    Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueSpec {
    /// `f_n = exp(2 pi i n / L)`.
    #[default]
    Phases,
    /// `f_n = n`.
    Real,
    /// Independent standard complex normals; needs a seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservableParams {
    pub basis: DetectorBasis,
    pub values: ValueSpec,
    /// Shuffle detector targets with the seed instead of the identity map.
    pub shuffle_targets: bool,
}

impl Default for ObservableParams {
    fn default() -> Self {
        ObservableParams {
            basis: DetectorBasis::Fourier,
            values: ValueSpec::Phases,
            shuffle_targets: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice_size: usize,
    pub hopping: f64,
    pub potential: PotentialSpec,
    pub dt: f64,
    pub boundary: BoundarySpec,
    pub gamma: f64,
    pub absorber: AbsorberSpec,
    pub measure: MeasureSpec,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub algebra: AlgebraParams,
    pub born: BornParams,
    pub entropy: EntropyParams,
    pub observable: ObservableParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lattice_size: amplab_core::lattice::DEFAULT_LATTICE_SIZE,
            hopping: 1.0,
            potential: PotentialSpec::Zero,
            dt: 0.05,
            boundary: BoundarySpec::Periodic,
            gamma: 0.0,
            absorber: AbsorberSpec::Ramp,
            measure: MeasureSpec::Flat,
            seed: None,
            output: None,
            format: Format::Csv,
            algebra: AlgebraParams::default(),
            born: BornParams::default(),
            entropy: EntropyParams::default(),
            observable: ObservableParams::default(),
        }
    }
}

fn finite(name: &str, x: f64) -> Result<()> {
    ensure!(x.is_finite(), "{name} must be finite, got {x}");
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks on every numeric field.
    pub fn validate(&self) -> Result<()> {
        let l = self.lattice_size;
        ensure!(
            (1..=MAX_LATTICE_SIZE).contains(&l),
            "lattice_size must be in 1..={MAX_LATTICE_SIZE}, got {l}"
        );
        finite("hopping", self.hopping)?;
        finite("dt", self.dt)?;
        ensure!(
            self.dt > 0.0 && self.dt <= 10.0,
            "dt must be in (0, 10], got {}",
            self.dt
        );
        finite("gamma", self.gamma)?;
        ensure!(self.gamma >= 0.0, "gamma must be non-negative, got {}", self.gamma);
        match &self.potential {
            PotentialSpec::Zero => {}
            PotentialSpec::Harmonic { strength, center } => {
                finite("potential.strength", *strength)?;
                if let Some(c) = center {
                    finite("potential.center", *c)?;
                }
            }
            PotentialSpec::Random { amplitude } => {
                finite("potential.amplitude", *amplitude)?;
                ensure!(*amplitude >= 0.0, "potential.amplitude must be non-negative");
            }
        }
        match &self.absorber {
            AbsorberSpec::Uniform { value } => {
                finite("absorber.value", *value)?;
                ensure!(*value >= 0.0, "absorber.value must be non-negative");
            }
            AbsorberSpec::Ramp => {}
            AbsorberSpec::Explicit { values } => {
                ensure!(
                    values.len() == l,
                    "absorber.values has {} entries, lattice_size is {l}",
                    values.len()
                );
                ensure!(
                    values.iter().all(|v| v.is_finite() && *v >= 0.0),
                    "absorber.values must be finite and non-negative"
                );
            }
        }
        match &self.measure {
            MeasureSpec::Flat => {}
            MeasureSpec::Weights { values } => {
                ensure!(
                    values.len() == l,
                    "measure.values has {} entries, lattice_size is {l}",
                    values.len()
                );
            }
            MeasureSpec::Curved { dx, bump } => {
                finite("measure.dx", *dx)?;
                finite("measure.bump", *bump)?;
                ensure!(*dx > 0.0 && *bump > -1.0, "measure.curved needs dx > 0 and bump > -1");
            }
        }
        let a = &self.algebra;
        ensure!(a.trials >= 1, "algebra.trials must be positive");
        ensure!(a.max_holes >= 3, "algebra.max_holes must be at least 3");
        ensure!((1..=8).contains(&a.max_filters), "algebra.max_filters must be in 1..=8");
        ensure!((1..=16).contains(&a.max_gap), "algebra.max_gap must be in 1..=16");
        let b = &self.born;
        ensure!(
            !b.p.is_empty() && !b.replicas.is_empty(),
            "born.p and born.replicas must be non-empty"
        );
        ensure!(
            b.replicas.iter().all(|&n| (1..=10_000_000).contains(&n)),
            "born.replicas must be in 1..=10^7"
        );
        let e = &self.entropy;
        ensure!(e.samples >= 2, "entropy.samples must be at least 2");
        ensure!(e.steps <= 1_000_000, "entropy.steps must be at most 10^6");
        if let Some([x, y]) = e.sites {
            ensure!(
                x < l && y < l && x != y,
                "entropy.sites must be two distinct sites below lattice_size"
            );
        }
        Ok(())
    }

    pub fn uses_randomness(&self) -> bool {
        matches!(self.potential, PotentialSpec::Random { .. })
    }

    /// The seed, or an error naming what needed it.
    pub fn require_seed(&self, what: &str) -> Result<u64> {
        match self.seed {
            Some(s) => Ok(s),
            None => bail!("{what} uses randomized inputs; set \"seed\" in the config or pass --seed"),
        }
    }

    /// Independent random stream `stream` derived from the seed.
    pub fn rng(&self, what: &str, stream: u64) -> Result<ChaCha8Rng> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.require_seed(what)?);
        rng.set_stream(stream);
        Ok(rng)
    }

    pub fn potential_values(&self) -> Result<Vec<f64>> {
        let l = self.lattice_size;
        Ok(match &self.potential {
            PotentialSpec::Zero => vec![0.0; l],
            PotentialSpec::Harmonic { strength, center } => {
                let c = center.unwrap_or(l as f64 / 2.0);
                (0..l).map(|x| strength * (x as f64 - c).powi(2)).collect()
            }
            PotentialSpec::Random { amplitude } => {
                let mut rng = self.rng("random potential", 0)?;
                (0..l).map(|_| rng.random_range(-1.0..=1.0) * amplitude).collect()
            }
        })
    }

    pub fn absorber_values(&self) -> Vec<f64> {
        let l = self.lattice_size;
        match &self.absorber {
            AbsorberSpec::Uniform { value } => vec![*value; l],
            AbsorberSpec::Ramp if l == 1 => vec![1.0],
            AbsorberSpec::Ramp => (0..l).map(|x| x as f64 / (l - 1) as f64).collect(),
            AbsorberSpec::Explicit { values } => values.clone(),
        }
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        let boundary = match self.boundary {
            BoundarySpec::Periodic => Boundary::Periodic,
            BoundarySpec::Open => Boundary::Open,
        };
        let d = Dynamics::free(self.lattice_size, self.hopping, self.dt)
            .with_potential(self.potential_values()?)
            .with_absorber(self.gamma, self.absorber_values())
            .with_boundary(boundary);
        d.validate()?;
        Ok(d)
    }

    pub fn measure(&self) -> Result<Measure> {
        let l = self.lattice_size;
        Ok(match &self.measure {
            MeasureSpec::Flat => Measure::flat(l),
            MeasureSpec::Weights { values } => Measure::new(values.clone())?,
            MeasureSpec::Curved { dx, bump } => {
                let sqrt_g: Vec<f64> = (0..l)
                    .map(|x| 1.0 + bump * (PI * x as f64 / l as f64).sin().powi(2))
                    .collect();
                Measure::from_volume(&sqrt_g, *dx)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn tagged_specs_parse() {
        let cfg = ExperimentConfig::from_json(
            r#"{"lattice_size": 4, "potential": {"kind": "harmonic", "strength": 0.5},
                "absorber": {"kind": "uniform", "value": 1.0},
                "measure": {"kind": "weights", "values": [1, 2, 1, 2]}, "format": "json"}"#,
        )
        .unwrap();
        assert_eq!(cfg.potential_values().unwrap(), vec![2.0, 0.5, 0.0, 0.5]);
        assert_eq!(cfg.measure().unwrap().weights(), &[1.0, 2.0, 1.0, 2.0]);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn rejects_unknown_and_out_of_range() {
        assert!(ExperimentConfig::from_json(r#"{"lattice": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"dt": -1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"gamma": -0.1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"lattice_size": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"measure": {"kind": "weights", "values": [1]}}"#).is_err());
    }

    #[test]
    fn random_potential_needs_seed() {
        let mut cfg = ExperimentConfig::from_json(r#"{"potential": {"kind": "random", "amplitude": 0.5}}"#).unwrap();
        assert!(cfg.potential_values().is_err());
        cfg.seed = Some(7);
        let v = cfg.potential_values().unwrap();
        assert_eq!(v, cfg.potential_values().unwrap());
        assert!(v.iter().all(|x| x.abs() <= 0.5));
    }

    #[test]
    fn ramp_absorber() {
        let cfg = ExperimentConfig {
            lattice_size: 5,
            ..Default::default()
        };
        assert_eq!(cfg.absorber_values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
