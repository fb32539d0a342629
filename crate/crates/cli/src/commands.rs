//! One runner per subcommand. Each reads its input, delegates to a single
//! library operation and maps the verdict onto an exit code.

use oplimit::indlimit::{
    induced_map, limit_eq, limit_positive, universal_map, Decision, InductiveSequence,
};
use oplimit::linalg::Tolerance;
use oplimit::nuclearity::{minmax_nuclearity_evidence, tensor_limit_consistency, EvidenceConfig};
use oplimit::opsys::{ConcreteOperatorSystem, ConeStatus};
use oplimit::tensor::{max_certificate_search, min_positive, SearchBudget, TensorElement};
use oplimit::ucp::{
    is_complete_order_mono, is_ucp, CpStatus, LinearMap, OrderStatus, SampleBudget,
};
use oplimit::uhf::{uhf_sequence, verify_order_mono_injection, GammaRule};
use oplimit::Error;
use serde_json::{json, Value};

use crate::input::{
    read, Images, InducedSpec, LimitEqSpec, LimitPosSpec, MapSpec, NuclearitySpec, RawSystem,
    Registry, SequenceSpec, System, TensorSpec, UhfSpec, UniversalSpec,
};
use crate::{Command, Failure, Outcome, RunConfig, Verdict};

pub fn run(command: Command, config: &RunConfig) -> Result<Outcome, Failure> {
    let tol = config.tolerance()?;
    match command {
        Command::ValidateSystem => validate_system(config, tol),
        Command::CheckUcp => check_ucp(config, tol),
        Command::CheckOrderMono => check_order_mono(config, tol),
        Command::TensorMin => tensor_min(config, tol),
        Command::TensorMaxCert => tensor_max_cert(config, tol),
        Command::LimitBuild => limit_build(config, tol),
        Command::LimitEq => limit_eq_cmd(config, tol),
        Command::LimitPos => limit_pos(config, tol),
        Command::UniversalMap => universal(config, tol),
        Command::InducedMap => induced(config, tol),
        Command::NuclearityReport => nuclearity(config, tol),
        Command::UhfDemo => uhf_demo(config, tol),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn sample_budget(config: &RunConfig) -> SampleBudget {
    let d = SampleBudget::default();
    SampleBudget {
        max_level: config.level.unwrap_or(d.max_level),
        samples: config.samples.unwrap_or(d.samples),
        seed: config.seed,
    }
}

fn registry(config: &RunConfig) -> Result<Registry, Failure> {
    Registry::load(config.systems.as_deref())
}

fn decision(d: Decision) -> Verdict {
    match d {
        Decision::Yes => Verdict::Pass,
        Decision::No => Verdict::Fail,
        Decision::Unknown => Verdict::Unknown,
    }
}

fn validate_system(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let raw: RawSystem = read(config.input_path()?)?;
    Ok(
        match ConcreteOperatorSystem::new(raw.name.clone(), raw.ambient_dim, raw.basis, tol) {
            Ok(s) => Outcome {
                verdict: Verdict::Pass,
                report: json!({
                    "valid": true,
                    "name": s.name(),
                    "ambient_dim": s.ambient_dim(),
                    "dim": s.dim(),
                    "full": s.is_full(),
                }),
                summary: format!("{}: valid operator system of dimension {} in M{}", s.name(), s.dim(), s.ambient_dim()),
            },
            Err(e) => Outcome {
                verdict: Verdict::Fail,
                report: json!({"valid": false, "name": raw.name, "error": e.to_string()}),
                summary: format!("{}: invalid: {e}", raw.name),
            },
        },
    )
}

fn check_ucp(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: MapSpec = read(config.input_path()?)?;
    let f = spec.build(&registry(config)?, tol)?;
    let v = is_ucp(&f, sample_budget(config), tol)?;
    let verdict = match v.status {
        CpStatus::Ucp => Verdict::Pass,
        CpStatus::CpNotUnital | CpStatus::NotCp => Verdict::Fail,
        CpStatus::UnknownUpToLevel => Verdict::Unknown,
    };
    Ok(Outcome {
        verdict,
        summary: format!("check-ucp: {}", v.report_label()),
        report: to_value(&v),
    })
}

fn check_order_mono(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: MapSpec = read(config.input_path()?)?;
    let f = spec.build(&registry(config)?, tol)?;
    match is_complete_order_mono(&f, sample_budget(config), tol) {
        Ok(v) => Ok(Outcome {
            verdict: match v.status {
                OrderStatus::Embedding => Verdict::Pass,
                OrderStatus::NotEmbedding => Verdict::Fail,
                OrderStatus::UnknownUpToLevel => Verdict::Unknown,
            },
            summary: format!("check-order-mono: {:?} ({:?})", v.status, v.method),
            report: to_value(&v),
        }),
        Err(Error::NotInjective) => Ok(Outcome {
            verdict: Verdict::Fail,
            report: json!({"status": "NotInjective"}),
            summary: "check-order-mono: map is not injective".into(),
        }),
        Err(e) => Err(e.into()),
    }
}

fn tensor_element(spec: &TensorSpec, reg: &Registry, tol: Tolerance) -> Result<TensorElement, Failure> {
    let left = reg.resolve(&spec.left)?;
    let right = reg.resolve(&spec.right)?;
    Ok(TensorElement::new(left, right, spec.level, spec.matrix.clone(), tol)?)
}

fn tensor_min(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: TensorSpec = read(config.input_path()?)?;
    let u = tensor_element(&spec, &registry(config)?, tol)?;
    let v = min_positive(&u, tol)?;
    Ok(Outcome {
        verdict: match v.status {
            ConeStatus::Positive => Verdict::Pass,
            ConeStatus::NotPositive => Verdict::Fail,
            ConeStatus::Unknown => Verdict::Unknown,
        },
        summary: format!("tensor-min: {:?} (min eigenvalue {:?})", v.status, v.witness),
        report: to_value(&v),
    })
}

fn tensor_max_cert(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: TensorSpec = read(config.input_path()?)?;
    let u = tensor_element(&spec, &registry(config)?, tol)?;
    let budget = SearchBudget {
        seed: config.seed,
        ..SearchBudget::for_level(u.level())
    };
    let out = max_certificate_search(&u, &config.ladder()?, budget, spec.hint.as_ref(), tol)?;
    let check = match &out.certificate {
        Some(c) => Some(c.verify(&u, tol)?),
        None => None,
    };
    let summary = match (&out.certificate, out.strategy) {
        (Some(c), Some(s)) => format!("tensor-max-cert: certificate found by {s:?} at epsilon {}", c.epsilon),
        _ => format!("tensor-max-cert: no certificate after {} attempts (unknown)", out.attempts),
    };
    Ok(Outcome {
        // absence of a certificate is not a proof of non-membership
        verdict: if out.certificate.is_some() { Verdict::Pass } else { Verdict::Unknown },
        report: json!({"search": to_value(&out), "check": to_value(&check)}),
        summary,
    })
}

fn sequence(spec: &SequenceSpec, config: &RunConfig, reg: &Registry, tol: Tolerance) -> Result<InductiveSequence, Failure> {
    spec.build(reg, config.depth, sample_budget(config), tol)
}

fn sequence_report(seq: &InductiveSequence) -> Result<Value, Failure> {
    let mut stages = Vec::new();
    for k in 1..=seq.depth() {
        let s = seq.system(k)?;
        stages.push(json!({"stage": k, "name": s.name(), "ambient_dim": s.ambient_dim(), "dim": s.dim()}));
    }
    let mut connections = Vec::new();
    for k in 1..seq.depth() {
        connections.push(json!({"stage": k, "verdict": to_value(&seq.connection(k)?.verdict)}));
    }
    Ok(json!({
        "kind": seq.kind(),
        "depth": seq.depth(),
        "inclusion": seq.is_inclusion(),
        "stages": stages,
        "connections": connections,
    }))
}

fn limit_build(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: SequenceSpec = read(config.input_path()?)?;
    let built = sequence(&spec, config, &registry(config)?, tol).and_then(|seq| {
        seq.materialize()?;
        Ok(seq)
    });
    match built {
        Ok(seq) => Ok(Outcome {
            verdict: Verdict::Pass,
            summary: format!(
                "limit-build: {} sequence of depth {} (inclusion: {})",
                seq.kind(),
                seq.depth(),
                seq.is_inclusion()
            ),
            report: sequence_report(&seq)?,
        }),
        Err(Failure::Library(
            e @ (Error::NonUnitalConnection { .. } | Error::NonCpConnection { .. }),
        )) => Ok(Outcome {
            verdict: Verdict::Fail,
            report: json!({"built": false, "error": e.to_string()}),
            summary: format!("limit-build: rejected: {e}"),
        }),
        Err(e) => Err(e),
    }
}

fn limit_eq_cmd(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: LimitEqSpec = read(config.input_path()?)?;
    let seq = sequence(&spec.sequence, config, &registry(config)?, tol)?;
    let v = limit_eq(&seq, &spec.e1, &spec.e2, spec.horizon)?;
    Ok(Outcome {
        verdict: decision(v.status),
        summary: format!("limit-eq: {:?} (stage {:?})", v.status, v.stage_used),
        report: to_value(&v),
    })
}

fn limit_pos(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: LimitPosSpec = read(config.input_path()?)?;
    let seq = sequence(&spec.sequence, config, &registry(config)?, tol)?;
    let v = limit_positive(&seq, &spec.element, spec.horizon, &config.ladder()?)?;
    Ok(Outcome {
        verdict: decision(v.status),
        summary: format!(
            "limit-pos: {:?} (stage {:?}, epsilon {:?})",
            v.status, v.stage_used, v.epsilon_used
        ),
        report: to_value(&v),
    })
}

fn family(
    maps: &[Images],
    domain: impl Fn(usize) -> Result<System, Failure>,
    codomain: impl Fn(usize) -> Result<System, Failure>,
    tol: Tolerance,
) -> Result<Vec<LinearMap>, Failure> {
    maps.iter()
        .enumerate()
        .map(|(i, m)| Ok(LinearMap::from_images(domain(i + 1)?, codomain(i + 1)?, m.images.clone(), tol)?))
        .collect()
}

fn universal(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: UniversalSpec = read(config.input_path()?)?;
    let reg = registry(config)?;
    let seq = sequence(&spec.sequence, config, &reg, tol)?;
    let target = reg.resolve(&spec.target)?;
    let maps = family(&spec.family, |k| Ok(seq.system(k)?), |_| Ok(target.clone()), tol)?;
    match universal_map(&seq, target, maps) {
        Ok(psi) => {
            let images = spec
                .elements
                .iter()
                .map(|e| psi.apply(e))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome {
                verdict: Verdict::Pass,
                summary: format!("universal-map: compatible family over depth {}", psi.depth()),
                report: json!({"compatible": true, "depth": psi.depth(), "images": images}),
            })
        }
        Err(e @ Error::IncompatibleFamily { stage, basis_index }) => Ok(Outcome {
            verdict: Verdict::Fail,
            summary: format!("universal-map: {e}"),
            report: json!({"compatible": false, "stage": stage, "basis_index": basis_index, "error": e.to_string()}),
        }),
        Err(e) => Err(e.into()),
    }
}

fn induced(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: InducedSpec = read(config.input_path()?)?;
    let reg = registry(config)?;
    let source = sequence(&spec.source, config, &reg, tol)?;
    let target = sequence(&spec.target, config, &reg, tol)?;
    let maps = family(&spec.family, |k| Ok(source.system(k)?), |k| Ok(target.system(k)?), tol)?;
    match induced_map(&source, &target, maps) {
        Ok(pi) => {
            let images = spec
                .elements
                .iter()
                .map(|e| pi.apply(e))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Outcome {
                verdict: Verdict::Pass,
                summary: format!("induced-map: commuting family over depth {}", pi.depth()),
                report: json!({"compatible": true, "depth": pi.depth(), "images": images}),
            })
        }
        Err(e @ Error::IncompatibleSquare { stage, basis_index }) => Ok(Outcome {
            verdict: Verdict::Fail,
            summary: format!("induced-map: {e}"),
            report: json!({"compatible": false, "stage": stage, "basis_index": basis_index, "error": e.to_string()}),
        }),
        Err(e) => Err(e.into()),
    }
}

fn nuclearity(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let spec: NuclearitySpec = read(config.input_path()?)?;
    let reg = registry(config)?;
    let level = config.level.unwrap_or(1);
    let samples = config.samples.unwrap_or(50);
    let report = match spec {
        NuclearitySpec::Pair { left, right } => {
            let mut evidence = EvidenceConfig::new(level, samples, config.seed);
            evidence.ladder = config.ladder()?;
            minmax_nuclearity_evidence(reg.resolve(&left)?, reg.resolve(&right)?, &evidence, tol)?
        }
        NuclearitySpec::Sequence { sequence: s, right } => {
            let seq = sequence(&s, config, &reg, tol)?;
            tensor_limit_consistency(&seq, reg.resolve(&right)?, level, samples, config.seed)?
        }
    };
    // the forward direction is a theorem; the certificate rate is evidence
    let verdict = if report.forward_pass == report.samples { Verdict::Pass } else { Verdict::Fail };
    Ok(Outcome {
        verdict,
        summary: format!(
            "nuclearity-report: forward {}/{}, certificate rate {:.3}",
            report.forward_pass, report.samples, report.certificate_rate
        ),
        report: to_value(&report),
    })
}

fn uhf_demo(config: &RunConfig, tol: Tolerance) -> Result<Outcome, Failure> {
    let (gamma, depth) = match (&config.gamma, &config.input) {
        (Some(g), _) => {
            let depth = config.depth.unwrap_or(g.len());
            (g.clone(), depth)
        }
        (None, Some(path)) => {
            let spec: UhfSpec = read(path)?;
            (spec.gamma, config.depth.unwrap_or(spec.depth))
        }
        (None, None) => return Err(Failure::Input("uhf-demo needs --gamma or --in".into())),
    };
    let rule = GammaRule::new(gamma)?;
    let seq = uhf_sequence(&rule, depth, tol)?;
    let build = sequence_report(&seq)?;
    let level = config.level.unwrap_or(2);
    let samples = config.samples.unwrap_or(100);
    let report = verify_order_mono_injection(&rule, depth, level, samples, config.seed, tol)?;
    Ok(Outcome {
        verdict: if report.passed() { Verdict::Pass } else { Verdict::Fail },
        summary: format!(
            "uhf-demo: {} checks, {} discrepancies",
            report.checked,
            report.discrepancies.len()
        ),
        report: json!({"sequence": build, "order_mono": to_value(&report)}),
    })
}
