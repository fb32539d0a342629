//! Input schemas and their resolution into library objects.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use oplimit::indlimit::{InductiveSequence, LimitElement};
use oplimit::linalg::{ComplexMatrix, Tolerance};
use oplimit::opsys::ConcreteOperatorSystem;
use oplimit::tensor::MaxCertificate;
use oplimit::ucp::{LinearMap, SampleBudget};
use oplimit::uhf::{uhf_sequence, GammaRule};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::Failure;

pub type System = Arc<ConcreteOperatorSystem>;

/// Default number of stages built when a sequence leaves its depth open.
pub const DEFAULT_DEPTH: usize = 8;

/// Parses JSON text, naming the offending field path on failure.
pub fn parse<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Input(format!("{source}: at `{path}`: {}", e.inner()))
    })
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

/// Unvalidated system record; validation is a verdict, not a parse error.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub ambient_dim: usize,
    pub name: String,
    pub basis: Vec<ComplexMatrix>,
}

/// A system given inline or by name.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SystemRef {
    Name(String),
    Inline(ConcreteOperatorSystem),
}

/// Named systems from `--systems` plus the built-ins `M<d>`, `C`, `D2` and
/// `Pauli2`.
#[derive(Debug, Default)]
pub struct Registry {
    named: BTreeMap<String, System>,
}

impl Registry {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let mut named = BTreeMap::new();
        if let Some(path) = path {
            let systems: Vec<ConcreteOperatorSystem> = read(path)?;
            for s in systems {
                named.insert(s.name().to_string(), Arc::new(s));
            }
        }
        Ok(Self { named })
    }

    pub fn resolve(&self, r: &SystemRef) -> Result<System, Failure> {
        let name = match r {
            SystemRef::Inline(s) => return Ok(Arc::new(s.clone())),
            SystemRef::Name(n) => n.as_str(),
        };
        if let Some(s) = self.named.get(name) {
            return Ok(s.clone());
        }
        let builtin = match name {
            "C" => Some(ConcreteOperatorSystem::scalars().with_name("C")),
            "D2" => Some(ConcreteOperatorSystem::diagonal2()),
            "Pauli2" => Some(ConcreteOperatorSystem::pauli2()),
            _ => name
                .strip_prefix('M')
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&d| d > 0)
                .map(ConcreteOperatorSystem::full),
        };
        builtin
            .map(Arc::new)
            .ok_or_else(|| Failure::Input(format!("unknown system `{name}`")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub domain: SystemRef,
    pub codomain: SystemRef,
    pub images: Vec<ComplexMatrix>,
}

impl MapSpec {
    pub fn build(&self, reg: &Registry, tol: Tolerance) -> Result<LinearMap, Failure> {
        let domain = reg.resolve(&self.domain)?;
        let codomain = reg.resolve(&self.codomain)?;
        Ok(LinearMap::from_images(domain, codomain, self.images.clone(), tol)?)
    }
}

/// Images of the basis of a stage; domain and codomain come from context.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Images {
    pub images: Vec<ComplexMatrix>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SequenceSpec {
    Explicit {
        depth: Option<usize>,
        systems: Vec<SystemRef>,
        connect: Vec<Images>,
    },
    Uhf {
        depth: Option<usize>,
        gamma: Vec<usize>,
    },
}

impl SequenceSpec {
    /// Builds the sequence; `depth` from the command line wins over the file.
    pub fn build(
        &self,
        reg: &Registry,
        depth: Option<usize>,
        budget: SampleBudget,
        tol: Tolerance,
    ) -> Result<InductiveSequence, Failure> {
        match self {
            SequenceSpec::Explicit {
                depth: file_depth,
                systems,
                connect,
            } => {
                let depth = depth.or(*file_depth).unwrap_or(systems.len());
                if depth == 0 || depth > systems.len() || connect.len() + 1 < depth {
                    return Err(Failure::Input(format!(
                        "depth {depth} needs {depth} systems and {} connecting maps, found {} and {}",
                        depth.saturating_sub(1),
                        systems.len(),
                        connect.len()
                    )));
                }
                let systems = systems[..depth]
                    .iter()
                    .map(|s| reg.resolve(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let maps = connect[..depth - 1]
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        LinearMap::from_images(systems[k].clone(), systems[k + 1].clone(), c.images.clone(), tol)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(InductiveSequence::explicit(systems, maps, budget, tol)?)
            }
            SequenceSpec::Uhf {
                depth: file_depth,
                gamma,
            } => {
                let rule = GammaRule::new(gamma.clone())?;
                let depth = depth
                    .or(*file_depth)
                    .unwrap_or(rule.len().min(DEFAULT_DEPTH));
                Ok(uhf_sequence(&rule, depth, tol)?)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    pub left: SystemRef,
    pub right: SystemRef,
    pub level: usize,
    pub matrix: ComplexMatrix,
    #[serde(default)]
    pub hint: Option<MaxCertificate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitEqSpec {
    pub sequence: SequenceSpec,
    pub e1: LimitElement,
    pub e2: LimitElement,
    #[serde(default)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitPosSpec {
    pub sequence: SequenceSpec,
    pub element: LimitElement,
    #[serde(default)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalSpec {
    pub sequence: SequenceSpec,
    pub target: SystemRef,
    pub family: Vec<Images>,
    #[serde(default)]
    pub elements: Vec<LimitElement>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InducedSpec {
    pub source: SequenceSpec,
    pub target: SequenceSpec,
    pub family: Vec<Images>,
    #[serde(default)]
    pub elements: Vec<LimitElement>,
}

/// Either a pair of systems, or an inclusion sequence and a right factor.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum NuclearitySpec {
    Pair { left: SystemRef, right: SystemRef },
    Sequence { sequence: SequenceSpec, right: SystemRef },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UhfSpec {
    pub gamma: Vec<usize>,
    pub depth: usize,
}
