//! JSON file formats for models, option sets, reference functions and
//! step-size schedules.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use arl_core::model::DEFAULT_HOLDING_FLOOR;
use arl_core::options::OptionSet;
use arl_core::{FFunction, Model, ModelBuilder, StationaryPolicy, StepSchedule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub s: String,
    pub a: String,
    pub next: String,
    pub r: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub l: f64,
    pub p: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holding_floor: Option<f64>,
    pub transitions: Vec<TransitionSpec>,
}

impl ModelFile {
    pub fn from_model(m: &Model) -> Self {
        let mut transitions = Vec::new();
        for pair in 0..m.n_pairs() {
            let s = &m.state_names()[m.pair_state(pair)];
            let a = &m.action_names()[m.pair_action(pair)];
            for o in m.outcomes(pair) {
                transitions.push(TransitionSpec {
                    s: s.clone(),
                    a: a.clone(),
                    next: m.state_names()[o.next].clone(),
                    r: o.reward,
                    l: o.holding,
                    p: o.prob,
                });
            }
        }
        let floor = m.holding_floor();
        ModelFile {
            name: m.name().to_string(),
            states: m.state_names().to_vec(),
            actions: m.action_names().to_vec(),
            holding_floor: (floor != DEFAULT_HOLDING_FLOOR).then_some(floor),
            transitions,
        }
    }

    pub fn to_model(&self) -> Result<Model> {
        let lookup = |names: &[String], x: &str, what: &str, i: usize| {
            names.iter().position(|n| n == x).ok_or_else(|| anyhow!("transition {i}: unknown {what} {x:?}"))
        };
        let mut b = ModelBuilder::new(&self.name, &self.states, &self.actions);
        if let Some(f) = self.holding_floor {
            b = b.holding_floor(f);
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let s = lookup(&self.states, &t.s, "state", i)?;
            let a = lookup(&self.actions, &t.a, "action", i)?;
            let n = lookup(&self.states, &t.next, "state", i)?;
            b.add_smdp(s, a, n, t.r, t.l, t.p);
        }
        b.build().map_err(|e| anyhow!("model {:?}: {e}", self.name))
    }
}

/// Per-state table; the key `"*"` applies to every state not listed.
pub type PerState<T> = BTreeMap<String, T>;

fn per_state<'a, T>(table: &'a PerState<T>, state: &str) -> Option<&'a T> {
    table.get(state).or_else(|| table.get("*"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSpec {
    pub name: String,
    /// Action weights per state, renormalised over available actions.
    pub pi: PerState<BTreeMap<String, f64>>,
    pub beta: PerState<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsFile {
    pub options: Vec<OptionSpec>,
}

impl OptionsFile {
    pub fn to_options(&self, model: &Model) -> Result<OptionSet> {
        let layout = model.layout();
        let mut names = Vec::new();
        let mut pis = Vec::new();
        let mut betas = Vec::new();
        for o in &self.options {
            for key in o.pi.keys().chain(o.beta.keys()) {
                if key != "*" && model.state_index(key).is_none() {
                    bail!("option {:?}: unknown state {key:?}", o.name);
                }
            }
            let mut probs = vec![0.0; model.n_pairs()];
            let mut beta = Vec::with_capacity(model.n_states());
            for (s, sname) in model.state_names().iter().enumerate() {
                let w = per_state(&o.pi, sname).ok_or_else(|| anyhow!("option {:?}: no policy at state {sname:?}", o.name))?;
                let mut total = 0.0;
                for (aname, &p) in w {
                    let a = model.action_index(aname).ok_or_else(|| anyhow!("option {:?}: unknown action {aname:?}", o.name))?;
                    if let Some(pair) = model.pair(s, a) {
                        probs[pair] = p;
                        total += p;
                    }
                }
                if !(total > 0.0) {
                    bail!("option {:?}: no weight on available actions at state {sname:?}", o.name);
                }
                for pair in layout.pairs(s) {
                    probs[pair] /= total;
                }
                beta.push(*per_state(&o.beta, sname).ok_or_else(|| anyhow!("option {:?}: no termination at {sname:?}", o.name))?);
            }
            names.push(o.name.clone());
            pis.push(StationaryPolicy::new(layout, probs).map_err(|e| anyhow!("option {:?}: {e}", o.name))?);
            betas.push(beta);
        }
        OptionSet::new(model, names, pis, betas).map_err(|e| anyhow!("{e}"))
    }

    pub fn from_options(model: &Model, opts: &OptionSet) -> Self {
        let options = (0..opts.len())
            .map(|o| {
                let mut pi = BTreeMap::new();
                let mut beta = BTreeMap::new();
                for (s, sname) in model.state_names().iter().enumerate() {
                    let w = model
                        .layout()
                        .pairs(s)
                        .map(|p| (model.action_names()[model.pair_action(p)].clone(), opts.policy(o).prob(p)))
                        .collect();
                    pi.insert(sname.clone(), w);
                    beta.insert(sname.clone(), opts.beta(o, s));
                }
                OptionSpec { name: opts.names()[o].clone(), pi, beta }
            })
            .collect();
        OptionsFile { options }
    }
}

/// Reference function `f`. Component references name a state and an action
/// (or an option, for option learners).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FSpec {
    /// Mean of all components plus `bias`.
    Mean {
        #[serde(default)]
        bias: f64,
    },
    /// Sum of all components plus `bias`.
    Sum {
        #[serde(default)]
        bias: f64,
    },
    Linear { weights: Vec<f64>, #[serde(default)] bias: f64 },
    Max {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        bias: f64,
    },
    Component { state: String, action: String },
}

impl FSpec {
    /// `pair` maps `(state, action-or-option)` names to a component index.
    pub fn build(&self, dim: usize, pair: impl Fn(&str, &str) -> Option<usize>) -> Result<FFunction> {
        let f = match self {
            FSpec::Mean { bias } => FFunction::Linear { weights: vec![1.0 / dim as f64; dim], bias: *bias },
            FSpec::Sum { bias } => FFunction::sum(dim, *bias),
            FSpec::Linear { weights, bias } => FFunction::Linear { weights: weights.clone(), bias: *bias },
            FSpec::Max { scale, bias } => FFunction::MaxBased { scale: *scale, bias: *bias },
            FSpec::Component { state, action } => FFunction::component(
                pair(state, action).ok_or_else(|| anyhow!("reference pair ({state}, {action}) does not exist"))?,
            ),
        };
        f.validate(dim).map_err(|e| anyhow!("reference function: {e}"))?;
        Ok(f)
    }

    /// Parses the command-line shorthand `mean`, `sum`, `max`,
    /// `component:<state>:<action>`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        Ok(match parts.as_slice() {
            ["mean"] => FSpec::Mean { bias: 0.0 },
            ["sum"] => FSpec::Sum { bias: 0.0 },
            ["max"] => FSpec::Max { scale: 1.0, bias: 0.0 },
            ["component", st, a] => FSpec::Component { state: st.to_string(), action: a.to_string() },
            _ => bail!("unknown reference function {s:?} (expected mean, sum, max or component:<state>:<action>)"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Harmonic { c: f64, d: f64 },
    LogHarmonic { c: f64 },
    Power { c: f64, p: f64, d: f64 },
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::Harmonic { c: 1.0, d: 0.0 }
    }
}

impl ScheduleSpec {
    pub fn build(&self) -> StepSchedule {
        match *self {
            ScheduleSpec::Harmonic { c, d } => StepSchedule::Harmonic { c, d },
            ScheduleSpec::LogHarmonic { c } => StepSchedule::LogHarmonic { c },
            ScheduleSpec::Power { c, p, d } => StepSchedule::Power { c, p, d },
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_model(path: &Path) -> Result<Model> {
    read_json::<ModelFile>(path)?.to_model().with_context(|| format!("loading {}", path.display()))
}

pub fn load_options(path: &Path, model: &Model) -> Result<OptionSet> {
    read_json::<OptionsFile>(path)?.to_options(model).with_context(|| format!("loading {}", path.display()))
}
