//! JSON model descriptions.
//!
//! A file holds one object with a single key, `discrete`, `block_iid` or
//! `gaussian`, whose value describes the model. Enumerated fields use the
//! same externally tagged form, e.g. `"channel": {"bsc": {"crossover": 0.25}}`.
//! Pmfs are written as rows indexed by `x`, columns by `y`.
//! Structural errors report the JSON path and line; semantic errors (a pmf
//! that does not sum to one, marginals that differ across hypotheses) report
//! the offending field.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source_models::{
    validate_marginals, BlockIidSource, CovGenerator, DiscreteJointSource, GaussianJointSource, JointPmf, TestChannel,
};

type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Discrete(DiscreteSpec),
    BlockIid(BlockSpec),
    Gaussian(GaussianSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpec {
    #[serde(default)]
    pub memory: MemorySpec,
    /// Joint law per hypothesis; the initial law for Markov memory. Unused for mixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf_h0: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf_h1: Option<Rows>,
    pub channel: ChannelSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MemorySpec {
    #[default]
    Iid,
    /// Kernels on the pair state `x * |Y| + y`.
    Markov { transition_h0: Rows, transition_h1: Rows },
    Mixture {
        weights: Vec<f64>,
        components_h0: Vec<Rows>,
        components_h1: Vec<Rows>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    /// Row `x` is the law of `U` given `X = x`.
    Discrete { matrix: Rows },
    Bsc { crossover: f64 },
    Gaussian { kappa: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub x_alphabet: usize,
    pub y_alphabet: usize,
    pub m: usize,
    pub n: usize,
    pub pmf_h0: Rows,
    pub pmf_h1: Rows,
    /// Acts on super-symbols of `X^m`.
    pub channel: ChannelSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub acf_x: CovGenerator,
    pub acf_y: CovGenerator,
    pub ccf_h0: CovGenerator,
    pub ccf_h1: CovGenerator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccf_negative: Option<[CovGenerator; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub means: Option<[(f64, f64); 2]>,
    /// Default test-channel noise variance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum LoadedModel {
    Discrete {
        model: DiscreteJointSource,
        channel: TestChannel,
    },
    Gaussian {
        source: GaussianJointSource,
        kappa: Option<f64>,
    },
}

fn at<T>(field: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::ModelFile(format!("{field}: {e}")))
}

fn required<'a>(field: &str, v: &'a Option<Rows>) -> Result<&'a Rows> {
    v.as_ref()
        .ok_or_else(|| Error::ModelFile(format!("{field}: required for this memory type")))
}

fn pmf(field: &str, rows: &Rows) -> Result<JointPmf> {
    at(field, JointPmf::from_rows(rows))
}

fn channel(spec: &ChannelSpec) -> Result<TestChannel> {
    at(
        "channel",
        match spec {
            ChannelSpec::Discrete { matrix } => TestChannel::discrete(matrix),
            ChannelSpec::Bsc { crossover } => TestChannel::bsc(*crossover),
            ChannelSpec::Gaussian { kappa } => TestChannel::gaussian(*kappa),
        },
    )
}

fn checked_discrete(model: DiscreteJointSource, channel: TestChannel) -> Result<LoadedModel> {
    at("marginals", validate_marginals(&model))?;
    let rows = at("channel", channel.as_discrete().map(|m| m.nx()))?;
    if rows != model.nx() {
        return Err(Error::ModelFile(format!(
            "channel: has {rows} input rows, source alphabet has {}",
            model.nx()
        )));
    }
    Ok(LoadedModel::Discrete { model, channel })
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::ModelFile(format!("{path}: {}", e.into_inner()))
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        ModelSpec::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self) -> Result<LoadedModel> {
        match self {
            ModelSpec::Discrete(d) => {
                let ch = channel(&d.channel)?;
                let model = match &d.memory {
                    MemorySpec::Iid => at(
                        "pmf_h1",
                        DiscreteJointSource::iid(
                            pmf("pmf_h0", required("pmf_h0", &d.pmf_h0)?)?,
                            pmf("pmf_h1", required("pmf_h1", &d.pmf_h1)?)?,
                        ),
                    )?,
                    MemorySpec::Markov {
                        transition_h0,
                        transition_h1,
                    } => at(
                        "memory",
                        DiscreteJointSource::markov(
                            pmf("pmf_h0", required("pmf_h0", &d.pmf_h0)?)?,
                            pmf("pmf_h1", required("pmf_h1", &d.pmf_h1)?)?,
                            transition_h0.clone(),
                            transition_h1.clone(),
                        ),
                    )?,
                    MemorySpec::Mixture {
                        weights,
                        components_h0,
                        components_h1,
                    } => {
                        let comps = |name: &str, cs: &[Rows]| -> Result<Vec<JointPmf>> {
                            cs.iter()
                                .enumerate()
                                .map(|(i, c)| pmf(&format!("memory.{name}[{i}]"), c))
                                .collect()
                        };
                        at(
                            "memory",
                            DiscreteJointSource::mixture(
                                weights.clone(),
                                comps("components_h0", components_h0)?,
                                comps("components_h1", components_h1)?,
                            ),
                        )?
                    }
                };
                checked_discrete(model, ch)
            }
            ModelSpec::BlockIid(b) => {
                let src = at(
                    "pmf_h0",
                    BlockIidSource::new(
                        b.x_alphabet,
                        b.y_alphabet,
                        b.m,
                        b.n,
                        pmf("pmf_h0", &b.pmf_h0)?,
                        pmf("pmf_h1", &b.pmf_h1)?,
                    ),
                )?;
                checked_discrete(src.to_discrete()?, channel(&b.channel)?)
            }
            ModelSpec::Gaussian(g) => {
                let mut source = GaussianJointSource::new(
                    g.acf_x.clone(),
                    g.acf_y.clone(),
                    g.ccf_h0.clone(),
                    g.ccf_h1.clone(),
                );
                source.ccf_negative = g.ccf_negative.clone();
                if let Some(means) = g.means {
                    source.means = means;
                }
                if let Some(k) = g.kappa {
                    at("kappa", TestChannel::gaussian(k))?;
                }
                at("acf_x", source.validate(8))?;
                Ok(LoadedModel::Gaussian { source, kappa: g.kappa })
            }
        }
    }
}

/// Reads, parses and builds a model file.
pub fn load_model(path: &Path) -> Result<(ModelSpec, LoadedModel)> {
    let spec = ModelSpec::from_path(path)?;
    let model = spec.build()?;
    Ok((spec, model))
}
