//! Inductive sequences of operator systems and their limits.
//!
//! A limit element is a pair `(stage, representative)`; the quotient by
//! eventually-vanishing sequences is never built. Two elements are equal in
//! the limit when their push-forwards agree at some common stage, and an
//! element is positive when some push-forward passes the ladder test.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, ComplexMatrix, Tolerance, C64};
use crate::opsys::{ConcreteOperatorSystem, Ladder};
use crate::ucp::{is_complete_order_mono, is_ucp, CpStatus, CpVerdict, LinearMap, SampleBudget};

type System = Arc<ConcreteOperatorSystem>;

/// Default number of stages scanned past an element's own stage.
pub const DEFAULT_HORIZON: usize = 8;

/// Produces the stages and connecting maps of a sequence on demand.
pub trait StageGenerator: Send + Sync {
    /// `S_k`, numbered from 1.
    fn system(&self, k: usize) -> Result<ConcreteOperatorSystem>;

    /// `φ_k : S_k → S_{k+1}`.
    fn connect(&self, k: usize, domain: System, codomain: System, tol: Tolerance)
        -> Result<LinearMap>;

    /// True when every connecting map is a complete order embedding by
    /// construction.
    fn inclusion(&self) -> bool;

    fn kind(&self) -> &'static str;
}

#[derive(Debug, Clone)]
pub struct Connection {
    pub map: LinearMap,
    pub verdict: CpVerdict,
}

enum Source {
    Explicit,
    Generated(Box<dyn StageGenerator>),
}

pub struct InductiveSequence {
    depth: usize,
    tol: Tolerance,
    budget: SampleBudget,
    inclusion: bool,
    source: Source,
    systems: Vec<OnceLock<Result<System>>>,
    connect: Vec<OnceLock<Result<Connection>>>,
}

impl fmt::Debug for InductiveSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InductiveSequence")
            .field("kind", &self.kind())
            .field("depth", &self.depth)
            .field("inclusion", &self.inclusion)
            .finish()
    }
}

fn certify(map: LinearMap, stage: usize, budget: SampleBudget, tol: Tolerance) -> Result<Connection> {
    if !map.is_unital(tol) {
        return Err(Error::NonUnitalConnection { stage });
    }
    let verdict = is_ucp(&map, budget, tol)?;
    if matches!(verdict.status, CpStatus::NotCp) {
        return Err(Error::NonCpConnection { stage });
    }
    Ok(Connection { map, verdict })
}

impl InductiveSequence {
    /// A finite sequence given in full. Every map is checked to be unital and
    /// (up to the budget level) completely positive; the inclusion flag is set
    /// when every map also passes the complete order embedding check.
    pub fn explicit(
        systems: Vec<System>,
        maps: Vec<LinearMap>,
        budget: SampleBudget,
        tol: Tolerance,
    ) -> Result<Self> {
        if systems.is_empty() {
            return Err(Error::InvalidInput("sequence needs at least one stage".into()));
        }
        if maps.len() + 1 != systems.len() {
            return Err(Error::DimensionMismatch {
                context: "number of connecting maps",
                expected: systems.len() - 1,
                found: maps.len(),
            });
        }
        let mut inclusion = true;
        let connect = once_cells(maps.len());
        for (i, map) in maps.into_iter().enumerate() {
            let stage = i + 1;
            if !map.domain().same_as(&systems[i], tol)
                || !map.codomain().same_as(&systems[i + 1], tol)
            {
                return Err(Error::InvalidInput(format!(
                    "connecting map {stage} does not chain stage {stage} to stage {}",
                    stage + 1
                )));
            }
            let conn = certify(map, stage, budget, tol)?;
            inclusion &= match is_complete_order_mono(&conn.map, budget, tol) {
                Ok(v) => v.status != crate::ucp::OrderStatus::NotEmbedding,
                Err(Error::NotInjective) => false,
                Err(e) => return Err(e),
            };
            let _ = connect[i].set(Ok(conn));
        }
        let cells = once_cells(systems.len());
        for (cell, s) in cells.iter().zip(systems) {
            let _ = cell.set(Ok(s));
        }
        Ok(Self {
            depth: cells.len(),
            tol,
            budget,
            inclusion,
            source: Source::Explicit,
            systems: cells,
            connect,
        })
    }

    /// A sequence materialized lazily from `generator` up to `depth`.
    pub fn generated(
        generator: Box<dyn StageGenerator>,
        depth: usize,
        budget: SampleBudget,
        tol: Tolerance,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidInput("depth must be at least 1".into()));
        }
        Ok(Self {
            depth,
            tol,
            budget,
            inclusion: generator.inclusion(),
            source: Source::Generated(generator),
            systems: once_cells(depth),
            connect: once_cells(depth - 1),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn is_inclusion(&self) -> bool {
        self.inclusion
    }

    pub fn kind(&self) -> &'static str {
        match &self.source {
            Source::Explicit => "explicit",
            Source::Generated(g) => g.kind(),
        }
    }

    fn check_stage(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.depth {
            return Err(Error::DepthExceeded {
                requested: k,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// `S_k`.
    pub fn system(&self, k: usize) -> Result<System> {
        self.check_stage(k)?;
        self.systems[k - 1]
            .get_or_init(|| match &self.source {
                Source::Generated(g) => g.system(k).map(Arc::new),
                Source::Explicit => unreachable!("explicit stages are prefilled"),
            })
            .clone()
    }

    /// `φ_k : S_k → S_{k+1}` with its UCP verdict.
    pub fn connection(&self, k: usize) -> Result<&Connection> {
        self.check_stage(k + 1)?;
        self.check_stage(k)?;
        let cell = self.connect[k - 1].get_or_init(|| match &self.source {
            Source::Generated(g) => {
                let map = g.connect(k, self.system(k)?, self.system(k + 1)?, self.tol)?;
                certify(map, k, self.budget, self.tol)
            }
            Source::Explicit => unreachable!("explicit maps are prefilled"),
        });
        cell.as_ref().map_err(Clone::clone)
    }

    pub fn connect(&self, k: usize) -> Result<&LinearMap> {
        Ok(&self.connection(k)?.map)
    }

    /// Materializes every stage and map.
    pub fn materialize(&self) -> Result<()> {
        for k in 1..=self.depth {
            self.system(k)?;
            if k < self.depth {
                self.connection(k)?;
            }
        }
        Ok(())
    }

    /// `φ_{p,q}`; the identity when `p = q`.
    pub fn path(&self, p: usize, q: usize) -> Result<LinearMap> {
        if q < p {
            return Err(Error::StageOrder {
                requested: q,
                stage: p,
            });
        }
        self.check_stage(q)?;
        self.check_stage(p)?;
        let mut acc = LinearMap::identity(self.system(p)?);
        for k in p..q {
            acc = crate::ucp::compose(&acc, self.connect(k)?, self.tol)?;
        }
        Ok(acc)
    }
}

fn once_cells<T>(len: usize) -> Vec<OnceLock<T>> {
    (0..len).map(|_| OnceLock::new()).collect()
}

/// `φ^(stage)(rep)` at matrix level `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitElement {
    pub stage: usize,
    pub level: usize,
    pub rep: ComplexMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitVerdict {
    pub status: Decision,
    pub stage_used: Option<usize>,
    pub epsilon_used: Option<f64>,
}

impl LimitVerdict {
    pub fn is_yes(&self) -> bool {
        self.status == Decision::Yes
    }
}

/// The element `(k, x)` of the limit; `x` must lie in `M_n(S_k)`.
pub fn canonical_injection(seq: &InductiveSequence, k: usize, x: &ComplexMatrix) -> Result<LimitElement> {
    let system = seq.system(k)?;
    let level = system.level_of(x)?;
    let membership = system.contains(level, x, seq.tol)?;
    if !membership.inside {
        return Err(Error::NotInSystem {
            residual: membership.residual,
        });
    }
    Ok(LimitElement {
        stage: k,
        level,
        rep: x.clone(),
    })
}

/// The limit unit at level `n`, represented at stage `k`.
pub fn limit_unit(seq: &InductiveSequence, k: usize, n: usize) -> Result<LimitElement> {
    Ok(LimitElement {
        stage: k,
        level: n,
        rep: seq.system(k)?.unit(n),
    })
}

pub fn limit_zero(seq: &InductiveSequence, k: usize, n: usize) -> Result<LimitElement> {
    let d = seq.system(k)?.ambient_dim();
    Ok(LimitElement {
        stage: k,
        level: n,
        rep: ComplexMatrix::zeros(n * d, n * d),
    })
}

/// Representative of `e` at stage `p ≥ e.stage`.
pub fn push_forward(seq: &InductiveSequence, e: &LimitElement, p: usize) -> Result<LimitElement> {
    if p < e.stage {
        return Err(Error::StageOrder {
            requested: p,
            stage: e.stage,
        });
    }
    seq.check_stage(p)?;
    let mut rep = e.rep.clone();
    for k in e.stage..p {
        rep = seq.connect(k)?.apply_unchecked(e.level, &rep);
    }
    Ok(LimitElement {
        stage: p,
        level: e.level,
        rep,
    })
}

fn default_horizon(seq: &InductiveSequence, stage: usize, horizon: Option<usize>) -> usize {
    horizon
        .unwrap_or(stage + DEFAULT_HORIZON)
        .min(seq.depth)
}

/// Equality in the limit.
///
/// For inclusion sequences the push-forwards are compared once at the larger
/// stage, which decides the question. Otherwise stages up to the horizon are
/// scanned; agreement gives `Yes` and exhaustion gives `Unknown`.
pub fn limit_eq(
    seq: &InductiveSequence,
    e1: &LimitElement,
    e2: &LimitElement,
    horizon: Option<usize>,
) -> Result<LimitVerdict> {
    if e1.level != e2.level {
        return Err(Error::LevelMismatch {
            left: e1.level,
            right: e2.level,
        });
    }
    let start = e1.stage.max(e2.stage);
    seq.check_stage(start)?;
    let end = default_horizon(seq, start, horizon).max(start);
    let mut a = push_forward(seq, e1, start)?;
    let mut b = push_forward(seq, e2, start)?;
    let eps = seq.tol.eps();
    for p in start..=end {
        if p > start {
            a = push_forward(seq, &a, p)?;
            b = push_forward(seq, &b, p)?;
        }
        if a.rep.max_abs_diff(&b.rep) <= eps {
            return Ok(LimitVerdict {
                status: Decision::Yes,
                stage_used: Some(p),
                epsilon_used: None,
            });
        }
        if seq.inclusion {
            return Ok(LimitVerdict {
                status: Decision::No,
                stage_used: Some(p),
                epsilon_used: None,
            });
        }
    }
    Ok(LimitVerdict {
        status: Decision::Unknown,
        stage_used: Some(end),
        epsilon_used: None,
    })
}

/// Positivity in the Archimedeanized limit cone.
///
/// `Yes` when `ε·1 + e` is positive at some stage up to the horizon for the
/// smallest ladder shift. For inclusion sequences, a smallest eigenvalue
/// below `-(largest shift)` at the horizon gives `No`. Anything else is
/// `Unknown`, with the smallest passing shift if one passed.
pub fn limit_positive(
    seq: &InductiveSequence,
    e: &LimitElement,
    horizon: Option<usize>,
    ladder: &Ladder,
) -> Result<LimitVerdict> {
    let tol = seq.tol;
    let deviation = e.rep.hermitian_deviation();
    if deviation > tol.eps() {
        return Err(Error::NotHermitian { deviation });
    }
    seq.check_stage(e.stage)?;
    let end = default_horizon(seq, e.stage, horizon).max(e.stage);
    let smallest = ladder.smallest();
    let mut best_larger: Option<f64> = None;
    let mut current = e.clone();
    let mut last_min = f64::NAN;
    for l in e.stage..=end {
        if l > e.stage {
            current = push_forward(seq, &current, l)?;
        }
        let lam = min_eigenvalue(&current.rep.hermitian_part(), tol)?;
        last_min = lam;
        if lam + smallest >= -tol.eps() {
            return Ok(LimitVerdict {
                status: Decision::Yes,
                stage_used: Some(l),
                epsilon_used: Some(smallest),
            });
        }
        for &eps in ladder.values() {
            if lam + eps >= -tol.eps() {
                best_larger = Some(best_larger.map_or(eps, |b: f64| b.min(eps)));
            }
        }
    }
    let status = if seq.inclusion && last_min < -ladder.largest() {
        Decision::No
    } else {
        Decision::Unknown
    };
    Ok(LimitVerdict {
        status,
        stage_used: Some(end),
        epsilon_used: if status == Decision::No { None } else { best_larger },
    })
}

/// `e1 + e2` at the larger stage.
pub fn limit_add(seq: &InductiveSequence, e1: &LimitElement, e2: &LimitElement) -> Result<LimitElement> {
    if e1.level != e2.level {
        return Err(Error::LevelMismatch {
            left: e1.level,
            right: e2.level,
        });
    }
    let p = e1.stage.max(e2.stage);
    let a = push_forward(seq, e1, p)?;
    let b = push_forward(seq, e2, p)?;
    Ok(LimitElement {
        stage: p,
        level: e1.level,
        rep: &a.rep + &b.rep,
    })
}

pub fn limit_scale(e: &LimitElement, c: C64) -> LimitElement {
    LimitElement {
        rep: e.rep.scale(c),
        ..e.clone()
    }
}

pub fn limit_adjoint(e: &LimitElement) -> LimitElement {
    LimitElement {
        rep: e.rep.adjoint(),
        ..e.clone()
    }
}

fn triangle_residual(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> f64 {
    lhs.max_abs_diff(rhs)
}

/// `Ψ` induced by a compatible family `ψ^(k) : S_k → target`.
#[derive(Debug, Clone)]
pub struct UniversalMap {
    target: System,
    family: Vec<LinearMap>,
}

/// Checks `ψ^(k+1) ∘ φ_k = ψ^(k)` on every basis element of every `S_k`
/// covered by the family, and returns the induced map on the limit.
pub fn universal_map(
    seq: &InductiveSequence,
    target: System,
    family: Vec<LinearMap>,
) -> Result<UniversalMap> {
    let tol = seq.tol;
    if family.is_empty() || family.len() > seq.depth {
        return Err(Error::DimensionMismatch {
            context: "family length",
            expected: seq.depth,
            found: family.len(),
        });
    }
    for (i, psi) in family.iter().enumerate() {
        let k = i + 1;
        if !psi.domain().same_as(&*seq.system(k)?, tol) || !psi.codomain().same_as(&target, tol) {
            return Err(Error::InvalidInput(format!(
                "family map {k} is not a map from stage {k} into the target"
            )));
        }
    }
    for k in 1..family.len() {
        let phi = seq.connect(k)?;
        let domain = seq.system(k)?;
        for b in 0..domain.dim() {
            let x = domain.basis_element(b);
            let via = family[k].apply_unchecked(1, &phi.apply_unchecked(1, &x));
            let direct = family[k - 1].apply_unchecked(1, &x);
            if triangle_residual(&via, &direct) > tol.eps() {
                return Err(Error::IncompatibleFamily {
                    stage: k,
                    basis_index: b,
                });
            }
        }
    }
    Ok(UniversalMap { target, family })
}

impl UniversalMap {
    pub fn target(&self) -> &System {
        &self.target
    }

    /// Stages covered by the family.
    pub fn depth(&self) -> usize {
        self.family.len()
    }

    /// `Ψ(e) = ψ^(e.stage)(rep)`.
    pub fn apply(&self, e: &LimitElement) -> Result<ComplexMatrix> {
        let psi = self.family.get(e.stage.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: e.stage,
            depth: self.family.len(),
        })?;
        Ok(psi.apply_unchecked(e.level, &e.rep))
    }
}

/// `π` between two limits induced by `π_k : S_k → T_k`.
#[derive(Debug, Clone)]
pub struct InducedMap {
    family: Vec<LinearMap>,
}

/// Checks `ψ_k ∘ π_k = π_{k+1} ∘ φ_k` on every basis element of every `S_k`
/// covered by the family, where `φ` and `ψ` connect the source and target.
pub fn induced_map(
    source: &InductiveSequence,
    target: &InductiveSequence,
    family: Vec<LinearMap>,
) -> Result<InducedMap> {
    let tol = source.tol;
    let depth = source.depth.min(target.depth);
    if family.is_empty() || family.len() > depth {
        return Err(Error::DimensionMismatch {
            context: "family length",
            expected: depth,
            found: family.len(),
        });
    }
    for (i, pi) in family.iter().enumerate() {
        let k = i + 1;
        if !pi.domain().same_as(&*source.system(k)?, tol)
            || !pi.codomain().same_as(&*target.system(k)?, tol)
        {
            return Err(Error::InvalidInput(format!(
                "family map {k} does not map source stage {k} into target stage {k}"
            )));
        }
    }
    for k in 1..family.len() {
        let phi = source.connect(k)?;
        let psi = target.connect(k)?;
        let domain = source.system(k)?;
        for b in 0..domain.dim() {
            let x = domain.basis_element(b);
            let lhs = psi.apply_unchecked(1, &family[k - 1].apply_unchecked(1, &x));
            let rhs = family[k].apply_unchecked(1, &phi.apply_unchecked(1, &x));
            if triangle_residual(&lhs, &rhs) > tol.eps() {
                return Err(Error::IncompatibleSquare {
                    stage: k,
                    basis_index: b,
                });
            }
        }
    }
    Ok(InducedMap { family })
}

impl InducedMap {
    pub fn depth(&self) -> usize {
        self.family.len()
    }

    /// `π(e) = (e.stage, π_{e.stage}(rep))`.
    pub fn apply(&self, e: &LimitElement) -> Result<LimitElement> {
        let pi = self.family.get(e.stage.wrapping_sub(1)).ok_or(Error::DepthExceeded {
            requested: e.stage,
            depth: self.family.len(),
        })?;
        Ok(LimitElement {
            stage: e.stage,
            level: e.level,
            rep: pi.apply_unchecked(e.level, &e.rep),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uhf::{uhf_sequence, GammaRule};

    fn seq(gamma: &[usize], depth: usize) -> InductiveSequence {
        uhf_sequence(&GammaRule::new(gamma.to_vec()).unwrap(), depth, Tolerance::default()).unwrap()
    }

    fn el(stage: usize, diag: &[f64]) -> LimitElement {
        LimitElement {
            stage,
            level: 1,
            rep: ComplexMatrix::diag_real(diag),
        }
    }

    #[test]
    fn push_forward_examples() {
        let s = seq(&[1, 2, 2], 3);
        let e = push_forward(&s, &el(1, &[5.0]), 2).unwrap();
        assert_eq!(e.rep, ComplexMatrix::diag_real(&[5.0, 5.0]));

        let s = seq(&[2, 2, 2], 3);
        let e = el(1, &[1.0, 2.0]);
        assert_eq!(push_forward(&s, &e, 1).unwrap(), e);
        assert_eq!(
            push_forward(&s, &e, 3).unwrap().rep,
            ComplexMatrix::diag_real(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0])
        );
        assert!(matches!(
            push_forward(&s, &e, 4),
            Err(Error::DepthExceeded { requested: 4, depth: 3 })
        ));
        let late = el(2, &[1.0, 2.0, 1.0, 2.0]);
        assert!(matches!(
            push_forward(&s, &late, 1),
            Err(Error::StageOrder { .. })
        ));
    }

    #[test]
    fn equality_examples() {
        let s = seq(&[2, 2, 2], 3);
        let v = limit_eq(&s, &el(1, &[1.0, 2.0]), &el(2, &[1.0, 2.0, 1.0, 2.0]), None).unwrap();
        assert_eq!((v.status, v.stage_used), (Decision::Yes, Some(2)));
        let e = el(2, &[3.0, 1.0, 3.0, 1.0]);
        let v = limit_eq(&s, &e, &e, None).unwrap();
        assert_eq!((v.status, v.stage_used), (Decision::Yes, Some(2)));

        let s = seq(&[1, 2, 2], 3);
        let v = limit_eq(&s, &el(1, &[0.0]), &el(1, &[1.0]), None).unwrap();
        assert_eq!(v.status, Decision::No);

        let two = LimitElement {
            stage: 1,
            level: 2,
            rep: ComplexMatrix::identity(2),
        };
        assert!(matches!(
            limit_eq(&s, &el(1, &[1.0]), &two, None),
            Err(Error::LevelMismatch { .. })
        ));
    }

    #[test]
    fn positivity_examples() {
        let s = seq(&[2, 2, 2], 3);
        let ladder = Ladder::default();
        let unit = limit_unit(&s, 1, 1).unwrap();
        let v = limit_positive(&s, &unit, None, &ladder).unwrap();
        assert_eq!((v.status, v.stage_used), (Decision::Yes, Some(1)));

        let p = LimitElement {
            stage: 1,
            level: 1,
            rep: ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]),
        };
        assert!(limit_positive(&s, &p, None, &ladder).unwrap().is_yes());

        let v = limit_positive(&s, &el(1, &[1.0, -1.0]), None, &ladder).unwrap();
        assert_eq!((v.status, v.stage_used), (Decision::No, Some(3)));

        // between the ladder rungs nothing is certified
        let v = limit_positive(&s, &el(1, &[1.0, -1e-6]), None, &ladder).unwrap();
        assert_eq!(v.status, Decision::Unknown);
        assert_eq!(v.epsilon_used, Some(1e-6));
    }

    #[test]
    fn arithmetic_examples() {
        let s = seq(&[1, 2, 2], 3);
        let sum = limit_add(&s, &el(1, &[2.0]), &el(2, &[3.0, 3.0])).unwrap();
        assert_eq!(sum.stage, 2);
        assert_eq!(sum.rep, ComplexMatrix::diag_real(&[5.0, 5.0]));

        let e = el(2, &[1.0, 4.0]);
        let zero = limit_add(&s, &e, &limit_scale(&e, C64::new(-1.0, 0.0))).unwrap();
        assert!(limit_eq(&s, &zero, &limit_zero(&s, 1, 1).unwrap(), None).unwrap().is_yes());
        let twice = limit_adjoint(&limit_adjoint(&e));
        assert!(limit_eq(&s, &twice, &e, None).unwrap().is_yes());
    }

    #[test]
    fn injection_respects_units_and_involution() {
        let s = seq(&[2, 2, 2], 3);
        let units: Vec<LimitElement> = (1..=3)
            .map(|k| canonical_injection(&s, k, &s.system(k).unwrap().unit(1)).unwrap())
            .collect();
        for a in &units {
            for b in &units {
                assert!(limit_eq(&s, a, b, None).unwrap().is_yes());
            }
        }
        let x = ComplexMatrix::from_rows(&[
            &[C64::new(1.0, 0.0), C64::new(2.0, 1.0)],
            &[C64::new(0.0, -3.0), C64::new(4.0, 0.0)],
        ]);
        let e = canonical_injection(&s, 1, &x).unwrap();
        let star = canonical_injection(&s, 1, &x.adjoint()).unwrap();
        assert!(limit_eq(&s, &star, &limit_adjoint(&e), None).unwrap().is_yes());
    }

    #[test]
    fn non_inclusion_gives_unknown() {
        let tol = Tolerance::default();
        let m2 = Arc::new(ConcreteOperatorSystem::full(2));
        let scalars = Arc::new(ConcreteOperatorSystem::scalars());
        // normalized trace M_2 → C, then C → C
        let trace = LinearMap::from_fn(
            m2.clone(),
            scalars.clone(),
            |x| ComplexMatrix::from_rows(&[&[x.trace() * 0.5]]),
            tol,
        )
        .unwrap();
        let s = InductiveSequence::explicit(
            vec![m2, scalars.clone(), scalars.clone()],
            vec![trace, LinearMap::identity(scalars)],
            SampleBudget::default(),
            tol,
        )
        .unwrap();
        assert!(!s.is_inclusion());
        let v = limit_eq(&s, &el(1, &[1.0, 0.0]), &el(1, &[0.0, 1.0]), None).unwrap();
        assert_eq!((v.status, v.stage_used), (Decision::Yes, Some(2)));
        let v = limit_eq(&s, &el(1, &[1.0, 0.0]), &el(1, &[0.0, 0.0]), None).unwrap();
        assert_eq!(v.status, Decision::Unknown);
    }

    #[test]
    fn explicit_sequence_rejects_bad_maps() {
        let tol = Tolerance::default();
        let m2 = Arc::new(ConcreteOperatorSystem::full(2));
        let half = LinearMap::from_fn(m2.clone(), m2.clone(), |x| x.scale_real(0.5), tol).unwrap();
        let err = InductiveSequence::explicit(
            vec![m2.clone(), m2.clone()],
            vec![half],
            SampleBudget::default(),
            tol,
        )
        .unwrap_err();
        assert_eq!(err, Error::NonUnitalConnection { stage: 1 });
        let t = LinearMap::transpose(m2.clone(), tol).unwrap();
        let err = InductiveSequence::explicit(
            vec![m2.clone(), m2],
            vec![t],
            SampleBudget::default(),
            tol,
        )
        .unwrap_err();
        assert_eq!(err, Error::NonCpConnection { stage: 1 });
    }
}
