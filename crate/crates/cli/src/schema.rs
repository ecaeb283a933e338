//! The versioned JSON instance format and its conversion to library objects.

use cics_core::variants::{AdditiveBox, PboiBox, PbpiBox, WsAlternative};
use cics_core::{Chain, Dist, Instance, Matroid, Mdp, Mode, Tree};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Schema version written by this build and the only one it reads.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub mode: ModeName,
    pub matroid: MatroidSpec,
    pub alternatives: Vec<AltSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Min,
    Max,
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Mode {
        match m {
            ModeName::Min => Mode::Min,
            ModeName::Max => Mode::Max,
        }
    }
}

/// Matroid over the alternatives; the ground set size is the number of alternatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatroidSpec {
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<usize>>, caps: Vec<usize> },
}

/// Atoms as `[value, probability]` pairs.
pub type DistSpec = Vec<(f64, f64)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum AltSpec {
    Mdp {
        tree: NodeSpec,
    },
    Pb {
        dist: DistSpec,
        cost: f64,
    },
    Pbpi {
        dist: DistSpec,
        open_cost: f64,
        peek_cost: f64,
    },
    Additive {
        components: Vec<ComponentSpec>,
    },
    Ws {
        dist: DistSpec,
        cost: f64,
    },
    Pboi {
        dist: DistSpec,
        cost: f64,
    },
}

impl AltSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AltSpec::Mdp { .. } => "mdp",
            AltSpec::Pb { .. } => "pb",
            AltSpec::Pbpi { .. } => "pbpi",
            AltSpec::Additive { .. } => "additive",
            AltSpec::Ws { .. } => "ws",
            AltSpec::Pboi { .. } => "pboi",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub dist: DistSpec,
    pub cost: f64,
}

/// A terminal `{"value": v}` or a decision node `{"actions": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSpec {
    Terminal { value: f64 },
    Decision { actions: Vec<ActionSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub label: String,
    pub cost: f64,
    /// `[probability, node]` pairs.
    pub outcomes: Vec<(f64, NodeSpec)>,
}

impl NodeSpec {
    fn to_tree(&self) -> Tree {
        match self {
            NodeSpec::Terminal { value } => Tree::leaf(*value),
            NodeSpec::Decision { actions } => Tree::node(
                actions
                    .iter()
                    .map(|a| {
                        Tree::act(
                            &a.label,
                            a.cost,
                            a.outcomes.iter().map(|(p, n)| (*p, n.to_tree())).collect(),
                        )
                    })
                    .collect(),
            ),
        }
    }

    pub fn from_tree(t: &Tree) -> NodeSpec {
        match t {
            Tree::Leaf(v) => NodeSpec::Terminal { value: *v },
            Tree::Node(actions) => NodeSpec::Decision {
                actions: actions
                    .iter()
                    .map(|(label, cost, kids)| ActionSpec {
                        label: label.clone(),
                        cost: *cost,
                        outcomes: kids.iter().map(|(p, k)| (*p, NodeSpec::from_tree(k))).collect(),
                    })
                    .collect(),
            },
        }
    }
}

/// A parsed alternative with its variant object and tree MDP.
#[derive(Clone, Debug)]
pub enum Variant {
    Mdp,
    Pb { dist: Dist, cost: f64 },
    Pbpi(PbpiBox),
    Additive(AdditiveBox),
    Ws(WsAlternative),
    Pboi(PboiBox),
}

/// A parsed alternative. The full weighing-scale MDP can be very large, so it is built
/// only when a command needs it; every other tree is built while loading.
#[derive(Clone, Debug)]
pub struct Alternative {
    pub variant: Variant,
    built: Option<Mdp>,
}

impl Alternative {
    /// The tree MDP of the alternative.
    ///
    /// # Errors
    ///
    /// The weighing-scale node cap.
    pub fn mdp(&self) -> Result<Mdp, CliError> {
        match (&self.built, &self.variant) {
            (Some(m), _) => Ok(m.clone()),
            (None, Variant::Ws(w)) => Ok(w.build(None)?),
            (None, _) => unreachable!("only weighing-scale trees are built lazily"),
        }
    }

    /// The MDP as a chain when every decision node has a single action.
    pub fn as_chain(&self) -> Option<Chain> {
        self.built.clone().and_then(|m| Chain::new(m).ok())
    }
}

/// A validated instance file.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub file: InstanceFile,
    pub alternatives: Vec<Alternative>,
    pub matroid: Matroid,
    pub mode: Mode,
}

impl Loaded {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The selection instance over every alternative's full MDP.
    ///
    /// # Errors
    ///
    /// Build caps of lazily built alternatives.
    pub fn instance(&self) -> Result<Instance, CliError> {
        let mdps = self
            .alternatives
            .iter()
            .map(Alternative::mdp)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance::new(mdps, self.matroid.clone(), self.mode)?)
    }

    pub fn alternative(&self, i: usize) -> Result<&Alternative, CliError> {
        self.alternatives.get(i).ok_or_else(|| {
            CliError::domain(format!(
                "alternative {i} out of range ({} alternatives)",
                self.alternatives.len()
            ))
        })
    }
}

fn dist(spec: &DistSpec, what: &str) -> Result<Dist, CliError> {
    Dist::new(spec).map_err(|e| CliError::parse(format!("{what}: {e}")))
}

fn build(spec: &AltSpec, i: usize) -> Result<Alternative, CliError> {
    let at = |e: cics_core::Error| CliError::from(e).context(&format!("alternative {i}"));
    let (variant, built) = match spec {
        AltSpec::Mdp { tree } => (Variant::Mdp, Mdp::from_tree(&tree.to_tree()).map_err(at)?),
        AltSpec::Pb { dist: d, cost } => {
            let d = dist(d, &format!("alternative {i}"))?;
            let mdp = Mdp::from_tree(&Tree::pb(&d, *cost)).map_err(at)?;
            (Variant::Pb { dist: d, cost: *cost }, mdp)
        }
        AltSpec::Pbpi {
            dist: d,
            open_cost,
            peek_cost,
        } => {
            let b = PbpiBox::new(dist(d, &format!("alternative {i}"))?, *open_cost, *peek_cost).map_err(at)?;
            let mdp = b.build();
            (Variant::Pbpi(b), mdp)
        }
        AltSpec::Additive { components } => {
            let comps = components
                .iter()
                .map(|c| Ok((dist(&c.dist, &format!("alternative {i}"))?, c.cost)))
                .collect::<Result<Vec<_>, CliError>>()?;
            let b = AdditiveBox::new(comps).map_err(at)?;
            let mdp = b.build().map_err(at)?;
            (Variant::Additive(b), mdp)
        }
        AltSpec::Ws { dist: d, cost } => {
            let w = WsAlternative::new(dist(d, &format!("alternative {i}"))?, *cost).map_err(at)?;
            return Ok(Alternative {
                variant: Variant::Ws(w),
                built: None,
            });
        }
        AltSpec::Pboi { dist: d, cost } => {
            let b = PboiBox::new(dist(d, &format!("alternative {i}"))?, *cost).map_err(at)?;
            let mdp = b.build();
            (Variant::Pboi(b), mdp)
        }
    };
    Ok(Alternative {
        variant,
        built: Some(built),
    })
}

impl InstanceFile {
    /// Parses JSON text.
    ///
    /// # Errors
    ///
    /// Malformed JSON, unknown fields or an unsupported version.
    pub fn parse(text: &str) -> Result<InstanceFile, CliError> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
        if file.version != SCHEMA_VERSION {
            return Err(CliError::parse(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                file.version
            )));
        }
        Ok(file)
    }

    /// Canonical text: sorted keys, numbers at 12 significant digits.
    pub fn to_canonical(&self) -> String {
        crate::canon::to_string(&serde_json::to_value(self).expect("plain data serializes"))
    }

    /// Builds every alternative and the selection instance.
    ///
    /// # Errors
    ///
    /// Invalid distributions, trees, costs or matroid parameters; caps on variant builders.
    pub fn load(self) -> Result<Loaded, CliError> {
        let alternatives = self
            .alternatives
            .iter()
            .enumerate()
            .map(|(i, a)| build(a, i))
            .collect::<Result<Vec<_>, _>>()?;
        let n = alternatives.len();
        let matroid = match &self.matroid {
            MatroidSpec::Uniform { k } => Matroid::uniform(n, *k),
            MatroidSpec::Partition { blocks, caps } => Matroid::partition(blocks.clone(), caps.clone()),
        }
        .map_err(|e| CliError::from(e).context("matroid"))?;
        if matroid.n() != n {
            return Err(CliError::domain(format!(
                "{n} alternatives but the matroid has {} elements",
                matroid.n()
            )));
        }
        Ok(Loaded {
            mode: self.mode.into(),
            file: self,
            alternatives,
            matroid,
        })
    }
}
