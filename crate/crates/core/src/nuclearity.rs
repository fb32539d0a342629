//! Finite-stage evidence for the equality of the min and max tensor cones.
//!
//! The forward direction (max generators are min-positive) is a theorem and
//! every failure is a bug. The backward direction is a certificate rate: the
//! fraction of sampled min-positive elements for which the searcher found a
//! max certificate. A low rate is reported, never read as a disproof.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indlimit::InductiveSequence;
use crate::linalg::{min_eigenvalue, ComplexMatrix, Tolerance, ONE};
use crate::opsys::{ConcreteOperatorSystem, Ladder};
use crate::sampling::{derived_rng, gaussian_matrix, random_positive_element, random_psd};
use crate::tensor::{
    max_certificate_search, max_generate, min_positive, project_joint, swap_factors,
    MaxCertificate, SearchBudget, TensorElement,
};
use crate::ucp::LinearMap;

type System = Arc<ConcreteOperatorSystem>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    /// Base seed; sample `i` draws from stream `i` of it.
    pub base: u64,
    pub streams: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuclearityReport {
    pub pair: (String, String),
    pub systems: (String, String),
    pub level: usize,
    pub samples: usize,
    pub forward_pass: usize,
    pub backward_found: usize,
    pub unknowns: usize,
    pub certificate_rate: f64,
    pub strategies: BTreeMap<String, usize>,
    pub seeds: SeedRecord,
}

fn pair() -> (String, String) {
    ("min".to_string(), "max".to_string())
}

fn rate(found: usize, samples: usize) -> f64 {
    if samples == 0 {
        0.0
    } else {
        found as f64 / samples as f64
    }
}

/// Random min-positive element of `M_n(S ⊗ T)`: `G G*` projected onto the
/// joint span and shifted onto the boundary of the PSD cone when the
/// projection left it.
pub fn random_min_positive<R: rand::Rng + ?Sized>(
    left: &System,
    right: &System,
    n: usize,
    rng: &mut R,
    tol: Tolerance,
) -> Result<TensorElement> {
    let size = n * left.ambient_dim() * right.ambient_dim();
    let x = random_psd(size, rng);
    let mut p = project_joint(left, right, n, &x).hermitian_part();
    let lam = min_eigenvalue(&p, tol)?;
    if lam < 0.0 {
        p.add_scaled(ONE * -lam, &ComplexMatrix::identity(size));
    }
    TensorElement::new(left.clone(), right.clone(), n, p, tol)
}

/// `(φ ⊗ id_T)_n(u)`: regroups `u` as a level-`n·d_T` element of `S`, applies
/// `φ` there and regroups back.
pub fn push_left_factor(map: &LinearMap, u: &TensorElement, tol: Tolerance) -> Result<TensorElement> {
    let (ds, dt) = (u.left().ambient_dim(), u.right().ambient_dim());
    let n = u.level();
    let as_left = swap_factors(u.matrix(), n, ds, dt);
    let image = map.apply_unchecked(n * dt, &as_left);
    let ds2 = map.codomain().ambient_dim();
    let back = swap_factors(&image, n, dt, ds2);
    TensorElement::new(map.codomain().clone(), u.right().clone(), n, back, tol.scaled(100.0))
}

/// Max generators of `M_n(S_k ⊗ T)` pushed along `φ_k ⊗ id_T`.
///
/// `forward_pass` counts samples that are min-positive before and after the
/// push; `backward_found` counts samples whose pushed certificate
/// `(α, φ_k(P), Q)` still verifies at stage `k + 1`.
pub fn tensor_limit_consistency(
    seq: &InductiveSequence,
    right: System,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<NuclearityReport> {
    if !seq.is_inclusion() {
        return Err(Error::NotInclusionSequence);
    }
    if seq.depth() < 2 {
        return Err(Error::InvalidInput("consistency needs at least two stages".into()));
    }
    let tol = seq.tolerance();
    let mut forward_pass = 0;
    let mut backward_found = 0;
    for s in 0..samples {
        let mut rng = derived_rng(seed, s as u64);
        let k = 1 + s % (seq.depth() - 1);
        let left = seq.system(k)?;
        let phi = seq.connect(k)?;
        let l = 1 + s % 2;
        let m = 1 + (s / 2) % 2;
        let p = random_positive_element(&left, l, &mut rng, tol)?;
        let q = random_positive_element(&right, m, &mut rng, tol)?;
        let alpha = gaussian_matrix(n, l * m, &mut rng);
        let (u, cert) = max_generate(left, right.clone(), &alpha, &p, &q, tol)?;
        let pushed = push_left_factor(phi, &u, tol)?;
        if min_positive(&u, tol)?.is_positive() && min_positive(&pushed, tol)?.is_positive() {
            forward_pass += 1;
        }
        let moved = MaxCertificate {
            p: phi.apply_unchecked(l, &cert.p),
            ..cert
        };
        if moved.verify(&pushed, tol)?.ok {
            backward_found += 1;
        }
    }
    Ok(NuclearityReport {
        pair: pair(),
        systems: (format!("{}-sequence", seq.kind()), right.name().to_string()),
        level: n,
        samples,
        forward_pass,
        backward_found,
        unknowns: samples - backward_found,
        certificate_rate: rate(backward_found, samples),
        strategies: BTreeMap::new(),
        seeds: SeedRecord {
            base: seed,
            streams: samples,
        },
    })
}

/// Sampling and search settings for [`minmax_nuclearity_evidence`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceConfig {
    pub level: usize,
    pub samples: usize,
    pub budget: SearchBudget,
    pub ladder: Ladder,
    pub seed: u64,
}

impl EvidenceConfig {
    /// Default search budget and ladder for level `n`.
    pub fn new(level: usize, samples: usize, seed: u64) -> Self {
        Self {
            level,
            samples,
            budget: SearchBudget::for_level(level),
            ladder: Ladder::default(),
            seed,
        }
    }
}

/// A sampled min-positive element and the certificate found for it.
pub type CertifiedSample = (TensorElement, MaxCertificate);

/// Forward check on `samples` random max generators, then a certificate
/// search on `samples` random min-positive elements.
pub fn minmax_nuclearity_evidence(
    left: System,
    right: System,
    config: &EvidenceConfig,
    tol: Tolerance,
) -> Result<NuclearityReport> {
    Ok(minmax_nuclearity_run(left, right, config, tol)?.0)
}

/// [`minmax_nuclearity_evidence`] together with every certificate found.
pub fn minmax_nuclearity_run(
    left: System,
    right: System,
    config: &EvidenceConfig,
    tol: Tolerance,
) -> Result<(NuclearityReport, Vec<CertifiedSample>)> {
    let (n, samples, seed) = (config.level, config.samples, config.seed);
    let forward = crate::tensor::min_leq_max_check(left.clone(), right.clone(), n, samples, seed, tol)?;
    let mut certified = Vec::new();
    let mut strategies = BTreeMap::new();
    for s in 0..samples {
        // streams after the forward samples keep the two phases independent
        let mut rng = derived_rng(seed, (samples + s) as u64);
        let u = random_min_positive(&left, &right, n, &mut rng, tol)?;
        let budget = SearchBudget {
            seed: config.budget.seed.wrapping_add(s as u64),
            ..config.budget
        };
        let out = max_certificate_search(&u, &config.ladder, budget, None, tol)?;
        if let (Some(cert), Some(strategy)) = (out.certificate, out.strategy) {
            *strategies.entry(format!("{strategy:?}")).or_insert(0) += 1;
            certified.push((u, cert));
        }
    }
    let found = certified.len();
    let report = NuclearityReport {
        pair: pair(),
        systems: (left.name().to_string(), right.name().to_string()),
        level: n,
        samples,
        forward_pass: forward.passed,
        backward_found: found,
        unknowns: samples - found,
        certificate_rate: rate(found, samples),
        strategies,
        seeds: SeedRecord {
            base: seed,
            streams: 2 * samples,
        },
    };
    Ok((report, certified))
}
