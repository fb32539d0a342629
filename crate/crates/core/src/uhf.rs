//! UHF sequences `M_{γ!(1)} → M_{γ!(2)} → …` with the canonical block
//! diagonal embeddings, and a stage-by-stage check that the canonical
//! injections into the limit are complete order embeddings.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indlimit::{
    canonical_injection, limit_positive, Decision, InductiveSequence, StageGenerator,
};
use crate::linalg::{min_eigenvalue, Tolerance};
use crate::opsys::{ConcreteOperatorSystem, Ladder};
use crate::sampling::{derived_rng, random_hermitian, random_positive_element};
use crate::ucp::{CheckMethod, LinearMap, SampleBudget};

/// Default cap on `γ!(depth)`.
pub const SIZE_CAP: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GammaRule {
    gamma: Vec<usize>,
}

impl GammaRule {
    pub fn new(gamma: Vec<usize>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidGamma("empty gamma list".into()));
        }
        if let Some(pos) = gamma.iter().position(|&g| g == 0) {
            return Err(Error::InvalidGamma(format!("gamma({}) is 0", pos + 1)));
        }
        Ok(Self { gamma })
    }

    /// `γ ≡ g` for `len` stages.
    pub fn constant(g: usize, len: usize) -> Result<Self> {
        Self::new(vec![g; len])
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    pub fn values(&self) -> &[usize] {
        &self.gamma
    }

    /// `γ(n)`, numbered from 1.
    pub fn gamma(&self, n: usize) -> usize {
        self.gamma[n - 1]
    }

    /// `γ!(n) = γ(1)···γ(n)`, or `None` on overflow.
    pub fn gamma_factorial(&self, n: usize) -> Option<usize> {
        self.gamma[..n]
            .iter()
            .try_fold(1usize, |acc, &g| acc.checked_mul(g))
    }
}

impl TryFrom<Vec<usize>> for GammaRule {
    type Error = Error;

    fn try_from(gamma: Vec<usize>) -> Result<Self> {
        Self::new(gamma)
    }
}

impl From<GammaRule> for Vec<usize> {
    fn from(r: GammaRule) -> Vec<usize> {
        r.gamma
    }
}

struct UhfGenerator {
    rule: GammaRule,
}

impl StageGenerator for UhfGenerator {
    fn system(&self, k: usize) -> Result<ConcreteOperatorSystem> {
        let d = self
            .rule
            .gamma_factorial(k)
            .ok_or_else(|| Error::InvalidGamma("stage size overflows".into()))?;
        Ok(ConcreteOperatorSystem::full(d))
    }

    fn connect(
        &self,
        k: usize,
        domain: Arc<ConcreteOperatorSystem>,
        codomain: Arc<ConcreteOperatorSystem>,
        tol: Tolerance,
    ) -> Result<LinearMap> {
        LinearMap::ampliation(domain, codomain, self.rule.gamma(k + 1), tol)
    }

    fn inclusion(&self) -> bool {
        true
    }

    fn kind(&self) -> &'static str {
        "uhf"
    }
}

/// The UHF sequence with the default size cap.
pub fn uhf_sequence(rule: &GammaRule, depth: usize, tol: Tolerance) -> Result<InductiveSequence> {
    uhf_sequence_with_cap(rule, depth, SIZE_CAP, tol)
}

pub fn uhf_sequence_with_cap(
    rule: &GammaRule,
    depth: usize,
    cap: usize,
    tol: Tolerance,
) -> Result<InductiveSequence> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if rule.len() < depth {
        return Err(Error::InvalidGamma(format!(
            "{} gamma values for depth {depth}",
            rule.len()
        )));
    }
    let size = rule.gamma_factorial(depth).unwrap_or(usize::MAX);
    if size > cap {
        return Err(Error::SizeCapExceeded { size, cap });
    }
    InductiveSequence::generated(
        Box::new(UhfGenerator { rule: rule.clone() }),
        depth,
        SampleBudget::default(),
        tol,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiCheck {
    pub stage: usize,
    pub method: CheckMethod,
    pub min_eigenvalue: Option<f64>,
    pub psd: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub stage: usize,
    pub level: usize,
    pub sample: usize,
    pub stage_positive: bool,
    pub limit: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderMonoReport {
    pub gamma: Vec<usize>,
    pub depth: usize,
    pub max_level: usize,
    pub samples: usize,
    pub seed: u64,
    pub checked: usize,
    pub positive_inputs: usize,
    pub discrepancies: Vec<Discrepancy>,
    pub choi: Vec<ChoiCheck>,
}

impl OrderMonoReport {
    pub fn passed(&self) -> bool {
        self.discrepancies.is_empty() && self.choi.iter().all(|c| c.psd)
    }
}

/// For each stage `k` and level `n ≤ max_level`, draws `samples` Hermitian
/// elements (alternately indefinite and positive) and compares positivity at
/// stage `k` with the limit verdict of their canonical injection.
pub fn verify_order_mono_injection(
    rule: &GammaRule,
    depth: usize,
    max_level: usize,
    samples: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<OrderMonoReport> {
    let seq = uhf_sequence(rule, depth, tol)?;
    let ladder = Ladder::default();
    let mut choi = Vec::new();
    for k in 1..depth {
        let conn = seq.connection(k)?;
        choi.push(ChoiCheck {
            stage: k,
            method: conn.verdict.method,
            min_eigenvalue: conn.verdict.choi_min_eigenvalue,
            psd: conn
                .verdict
                .choi_min_eigenvalue
                .map_or(conn.verdict.method == CheckMethod::Structural, |m| {
                    m >= -tol.eps()
                }),
        });
    }
    let mut checked = 0;
    let mut positive_inputs = 0;
    let mut discrepancies = Vec::new();
    let mut stream = 0u64;
    for k in 1..=depth {
        let system = seq.system(k)?;
        for n in 1..=max_level {
            for s in 0..samples {
                let mut rng = derived_rng(seed, stream);
                stream += 1;
                let x = if s % 2 == 0 {
                    random_hermitian(n * system.ambient_dim(), &mut rng)
                } else {
                    random_positive_element(&system, n, &mut rng, tol)?
                };
                let stage_positive = min_eigenvalue(&x, tol)? >= -tol.eps();
                let e = canonical_injection(&seq, k, &x)?;
                let limit = limit_positive(&seq, &e, None, &ladder)?.status;
                checked += 1;
                positive_inputs += usize::from(stage_positive);
                if stage_positive != (limit == Decision::Yes) {
                    discrepancies.push(Discrepancy {
                        stage: k,
                        level: n,
                        sample: s,
                        stage_positive,
                        limit,
                    });
                }
            }
        }
    }
    Ok(OrderMonoReport {
        gamma: rule.values()[..depth].to_vec(),
        depth,
        max_level,
        samples,
        seed,
        checked,
        positive_inputs,
        discrepancies,
        choi,
    })
}
