//! Scenario registry and JSON ingestion.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, CMatrix, Subalgebra};
use crate::catalog::{self, SubalgebraDoc};
use crate::error::{Error, Result};
use crate::expr::Scalar;
use crate::flows::{GluedConfig, Inertia};
use crate::independence::flag_witness;
use crate::integrals::{
    block_trace_family, build_family, eschenburg_family, gromoll_meyer_family, son_chain_family,
    sun_chain_family, Factor, FamilyDoc, IntegralFamily, IntegralSpec,
};
use crate::moment::{BiquotientAction, MomentPair};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_STEPS: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 100;

/// Checks in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Invariance,
    Involution,
    Independence,
    Conditions,
    Flow,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::Invariance,
        CheckKind::Involution,
        CheckKind::Independence,
        CheckKind::Conditions,
        CheckKind::Flow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Invariance => "invariance",
            CheckKind::Involution => "involution",
            CheckKind::Independence => "independence",
            CheckKind::Conditions => "conditions",
            CheckKind::Flow => "flow",
        }
    }
}

/// Symmetry the integrals have to descend through.
#[derive(Clone, Debug)]
pub enum ActionSpec {
    None,
    Biquotient(BiquotientAction),
    /// `G/K` with a witness `X ⊥ k` for the bracket condition.
    Homogeneous {
        subgroup: Subalgebra,
        witness: AlgebraElement,
    },
}

/// Point at which the rank certificate is taken, with its step-by-step replay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndependenceSpec {
    Eschenburg { m: i64 },
    GromollMeyer,
}

#[derive(Clone, Debug)]
pub enum FlowSpec {
    None,
    /// Horizontal bi-invariant geodesics of the scenario's biquotient.
    Biquotient,
    /// `SU(2) x S^2` modulo the circle.
    GroupTimesSphere,
    Berger {
        n: usize,
        t: f64,
    },
    LeftInvariant {
        inertia: Inertia,
    },
    Glued(GluedConfig),
}

/// One-parameter subgroup `s -> (exp(2 pi s a), exp(2 pi s b))` the family must be invariant under.
#[derive(Clone, Debug)]
pub struct Generator {
    pub name: String,
    pub pair: MomentPair,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub anchor: String,
    pub description: String,
    pub algebra: Subalgebra,
    pub action: ActionSpec,
    pub chain: Vec<Subalgebra>,
    pub family: IntegralFamily,
    pub generators: Vec<Generator>,
    /// Family that must be conjugation invariant, and a control family whose
    /// members must each fail that test.
    pub conjugation: Option<(IntegralFamily, IntegralFamily)>,
    pub independence: Option<IndependenceSpec>,
    pub flow: FlowSpec,
    pub checks: Vec<CheckKind>,
    pub seed: u64,
    pub samples: usize,
    pub dt: f64,
    pub steps: usize,
}

/// Parameters for built-ins given without call syntax.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinParams {
    pub m: Option<i64>,
    pub n: Option<usize>,
    pub t: Option<f64>,
}

/// `(name, signature, anchor, description)` of every built-in.
pub const BUILTINS: &[(&str, &str, &str, &str)] = &[
    (
        "su3_flag",
        "su3_flag",
        "Example 2.1",
        "flag manifold SU(3)/T^2 with a left-invariant metric",
    ),
    (
        "so_n1",
        "so_n1(n)",
        "Example 2.1",
        "SO(n+1)/SO(n-1) with a left-invariant metric",
    ),
    (
        "su2_times_N",
        "su2_times_N",
        "Example 4.3",
        "SU(2) x_{S^1} S^2, the nontrivial sphere bundle over S^2",
    ),
    (
        "berger_cp",
        "berger_cp(n,t)",
        "Example 4.4",
        "Berger sphere S^{2n+1} with fibre scale t",
    ),
    (
        "grassmann_bundle",
        "grassmann_bundle(n,t)",
        "Example 4.5",
        "SO(n+1)/SO(n-1) with the circle fibres scaled by t",
    ),
    (
        "eschenburg_bundle",
        "eschenburg_bundle(m)",
        "Example 4.6",
        "SU(3) with the U_{1,-1,2m,2m} action, total space of the sphere bundles",
    ),
    (
        "eschenburg",
        "eschenburg(m)",
        "Example 4.7",
        "Eschenburg space SU(3)/U_{1,-1,2m,2m}",
    ),
    (
        "gromoll_meyer",
        "gromoll_meyer",
        "Example 4.8",
        "Gromoll-Meyer exotic sphere Sp(2)/Sp(1)",
    ),
    (
        "connected_sum",
        "connected_sum(n,t)",
        "Section 5",
        "glued metric on CP^{n+1} # CP^{n+1}",
    ),
];

fn parse_args(name: &str) -> Result<(&str, Vec<&str>)> {
    match name.split_once('(') {
        None => Ok((name.trim(), Vec::new())),
        Some((head, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| Error::Unknown {
                kind: "scenario",
                name: name.to_string(),
            })?;
            let args = inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            Ok((head.trim(), args))
        }
    }
}

fn arg<T: std::str::FromStr>(
    name: &str,
    args: &[&str],
    k: usize,
    given: Option<T>,
    default: T,
) -> Result<T> {
    match args.get(k) {
        Some(s) => s
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad argument `{s}` in `{name}`"))),
        None => Ok(given.unwrap_or(default)),
    }
}

fn resolve_all(names: &[&str]) -> Vec<Subalgebra> {
    names
        .iter()
        .map(|n| catalog::resolve(n).expect("built-in chain names resolve"))
        .collect()
}

/// `u(j)` on the lower `j x j` block of `su(n)`, the trace balanced in the
/// first diagonal entry; `j = n` gives `su(n)`.
pub fn lower_unitary(n: usize, j: usize) -> Subalgebra {
    if j == n {
        return catalog::su(n);
    }
    let start = n - j;
    let unit = |i: usize, k: usize, z: Complex64| {
        let mut m = CMatrix::zeros(n, n);
        m[(i, k)] = z;
        m
    };
    let i1 = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut span = Vec::new();
    for a in start..n {
        for b in (a + 1)..n {
            span.push(AlgebraElement::from_matrix_unchecked(
                unit(a, b, one) - unit(b, a, one),
            ));
            span.push(AlgebraElement::from_matrix_unchecked(
                unit(a, b, i1) + unit(b, a, i1),
            ));
        }
        span.push(AlgebraElement::from_matrix_unchecked(
            unit(a, a, i1) - unit(0, 0, i1),
        ));
    }
    Subalgebra::from_spanning(
        format!("u{j}_lower_in_su{n}"),
        n,
        span,
        Some((start..n).collect()),
    )
    .expect("lower unitary block is a subalgebra")
}

fn lower_unitary_chain(n: usize) -> Vec<Subalgebra> {
    (1..=n).map(|j| lower_unitary(n, j)).collect()
}

fn so_chain(n: usize) -> Vec<Subalgebra> {
    (2..=n).map(|k| catalog::so_upper(n, k)).collect()
}

fn pair(left: AlgebraElement, right: AlgebraElement) -> MomentPair {
    MomentPair { left, right }
}

fn u_generators(act: &BiquotientAction) -> Vec<Generator> {
    act.u_basis
        .iter()
        .enumerate()
        .map(|(k, u)| Generator {
            name: format!("u{k}"),
            pair: u.clone(),
        })
        .collect()
}

fn eschenburg_generators(m: i64) -> Vec<Generator> {
    let mf = m as f64;
    vec![
        Generator {
            name: "right_diag(2m,2m,-4m)".into(),
            pair: pair(
                AlgebraElement::zeros(3),
                AlgebraElement::imaginary_diagonal(&[2.0 * mf, 2.0 * mf, -4.0 * mf]),
            ),
        },
        Generator {
            name: "left_diag(1,-1,0)".into(),
            pair: pair(
                AlgebraElement::imaginary_diagonal(&[1.0, -1.0, 0.0]),
                AlgebraElement::zeros(3),
            ),
        },
    ]
}

fn eschenburg_chain() -> Vec<Subalgebra> {
    resolve_all(&[
        "0|u1_su3",
        "u1_su3|u1_su3",
        "u1_su3|u2_upper_su3",
        "u2_upper_su3|u2_upper_su3",
        "u2_upper_su3|su3",
        "su3|su3",
    ])
}

/// Skew matrix coupling the two blocks of `so(n-1) + so(2)` in `so(n+1)`.
fn so_witness(n1: usize) -> AlgebraElement {
    let mut m = CMatrix::zeros(n1, n1);
    let one = Complex64::new(1.0, 0.0);
    for (i, j) in [(0, n1 - 2), (1, n1 - 1)] {
        m[(i, j)] = one;
        m[(j, i)] = -one;
    }
    AlgebraElement::from_matrix_unchecked(m)
}

fn graded_inertia(algebra: &Subalgebra) -> Inertia {
    let vals: Vec<f64> = (0..algebra.dim()).map(|k| 1.0 + 0.25 * k as f64).collect();
    Inertia::diagonal(algebra.clone(), &vals).expect("positive diagonal")
}

/// Bi-invariant metric with the direction of `fiber` scaled by `t^2`.
fn fibre_scaled_inertia(algebra: &Subalgebra, fiber: &AlgebraElement, t: f64) -> Result<Inertia> {
    let c = algebra.coords(&fiber.scale(1.0 / fiber.norm()));
    let d = algebra.dim();
    let m = nalgebra::DMatrix::<f64>::identity(d, d) + &c * c.transpose() * (t * t - 1.0);
    Inertia::new(algebra.clone(), m)
}

struct Base {
    name: String,
    anchor: &'static str,
    description: &'static str,
}

fn base(key: &str, name: String) -> Base {
    let row = BUILTINS
        .iter()
        .find(|b| b.0 == key)
        .expect("registered built-in");
    Base {
        name,
        anchor: row.2,
        description: row.3,
    }
}

fn scenario(
    b: Base,
    algebra: Subalgebra,
    family: IntegralFamily,
    checks: Vec<CheckKind>,
) -> Scenario {
    Scenario {
        name: b.name,
        anchor: b.anchor.to_string(),
        description: b.description.to_string(),
        algebra,
        action: ActionSpec::None,
        chain: Vec::new(),
        family,
        generators: Vec::new(),
        conjugation: None,
        independence: None,
        flow: FlowSpec::None,
        checks,
        seed: DEFAULT_SEED,
        samples: DEFAULT_SAMPLES,
        dt: DEFAULT_DT,
        steps: DEFAULT_STEPS,
    }
}

fn max_args(key: &str) -> usize {
    match BUILTINS.iter().find(|b| b.0 == key) {
        Some((_, sig, _, _)) if sig.contains('(') => sig.matches(',').count() + 1,
        _ => 0,
    }
}

/// Built-in scenario by name, with call syntax (`eschenburg(2)`) or bare
/// names completed from `params` and defaults.
pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Scenario> {
    use CheckKind::*;
    let (head, args) = parse_args(name)?;
    let unknown = || Error::Unknown {
        kind: "scenario",
        name: name.to_string(),
    };
    let s = match head {
        "su3_flag" => {
            let g = catalog::su(3);
            let mut s = scenario(
                base(head, head.into()),
                g.clone(),
                sun_chain_family(3),
                vec![Involution, Conditions, Flow],
            );
            s.action = ActionSpec::Homogeneous {
                subgroup: catalog::torus_su(3),
                witness: flag_witness(),
            };
            s.chain = resolve_all(&["t_su3", "u2_upper_su3", "su3"]);
            s.flow = FlowSpec::LeftInvariant {
                inertia: graded_inertia(&g),
            };
            s
        }
        "so_n1" => {
            let n: usize = arg(name, &args, 0, params.n, 3)?;
            if n < 3 {
                return Err(Error::InvalidInput(format!("so_n1 needs n >= 3, got {n}")));
            }
            let g = catalog::so(n + 1);
            let mut s = scenario(
                base(head, format!("so_n1({n})")),
                g.clone(),
                son_chain_family(n + 1),
                vec![Involution, Conditions, Flow],
            );
            s.action = ActionSpec::Homogeneous {
                subgroup: catalog::so_upper(n + 1, n - 1),
                witness: so_witness(n + 1),
            };
            s.chain = so_chain(n + 1);
            s.flow = FlowSpec::LeftInvariant {
                inertia: graded_inertia(&g),
            };
            s
        }
        "su2_times_N" => {
            let g = catalog::su(2);
            let circle = catalog::resolve("u1_lower_su2")?;
            let fam = IntegralFamily {
                name: "su2_times_N".into(),
                algebra: g.clone(),
                specs: vec![
                    IntegralSpec::new("left_circle", Factor::Left, Some(circle.clone()), 1, true)
                        .with_coeff(-0.5),
                    IntegralSpec::new("casimir", Factor::Left, None, 2, false).with_coeff(-0.5),
                    IntegralSpec::new("right_circle", Factor::Right, Some(circle), 1, true)
                        .with_coeff(-0.5),
                ],
                expected_independent: 3,
            };
            let mut s = scenario(
                base(head, head.into()),
                g,
                fam,
                vec![Invariance, Involution, Flow],
            );
            s.chain = resolve_all(&["0|u1_lower_su2", "0|su2", "su2|su2"]);
            s.generators = vec![Generator {
                name: "right_circle".into(),
                pair: pair(
                    AlgebraElement::zeros(2),
                    AlgebraElement::imaginary_diagonal(&[1.0, -1.0]),
                ),
            }];
            s.flow = FlowSpec::GroupTimesSphere;
            s
        }
        "berger_cp" => {
            let n: usize = arg(name, &args, 0, params.n, 2)?;
            let t: f64 = arg(name, &args, 1, params.t, 2.0)?;
            if n == 0 || t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "berger_cp needs n >= 1 and t > 0, got ({n}, {t})"
                )));
            }
            let fam = block_trace_family(&format!("berger_chain({n})"), n, false);
            let mut s = scenario(
                base(head, format!("berger_cp({n},{t})")),
                catalog::su(n + 1),
                fam,
                vec![Involution, Flow],
            );
            s.chain = lower_unitary_chain(n + 1);
            s.flow = FlowSpec::Berger { n, t };
            s
        }
        "grassmann_bundle" => {
            let n: usize = arg(name, &args, 0, params.n, 3)?;
            let t: f64 = arg(name, &args, 1, params.t, 2.0)?;
            if n < 3 || t.is_nan() || t <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "grassmann_bundle needs n >= 3 and t > 0, got ({n}, {t})"
                )));
            }
            let g = catalog::so(n + 1);
            let fiber = catalog::so2_lower(n + 1);
            let mut fam = son_chain_family(n + 1);
            fam.name = format!("grassmann_bundle({n})");
            fam.specs.push(IntegralSpec::new(
                "fiber_sq",
                Factor::Right,
                Some(fiber.clone()),
                2,
                false,
            ));
            fam.expected_independent += 1;
            let mut s = scenario(
                base(head, format!("grassmann_bundle({n},{t})")),
                g.clone(),
                fam,
                vec![Invariance, Involution, Conditions, Flow],
            );
            s.action = ActionSpec::Homogeneous {
                subgroup: catalog::so_upper(n + 1, n - 1),
                witness: so_witness(n + 1),
            };
            s.chain = so_chain(n + 1);
            let xi = fiber.basis()[0].clone();
            s.generators = vec![Generator {
                name: "right_fibre_circle".into(),
                pair: pair(AlgebraElement::zeros(n + 1), xi.clone()),
            }];
            s.flow = FlowSpec::LeftInvariant {
                inertia: fibre_scaled_inertia(&g, &xi, t)?,
            };
            s
        }
        "eschenburg" | "eschenburg_bundle" => {
            let m: i64 = arg(name, &args, 0, params.m, 1)?;
            if m < 0 {
                return Err(Error::InvalidInput(format!("{head} needs m >= 0, got {m}")));
            }
            let mut checks = vec![Invariance, Involution, Flow];
            if head == "eschenburg" {
                checks.insert(2, Independence);
            }
            let mut s = scenario(
                base(head, format!("{head}({m})")),
                catalog::su(3),
                eschenburg_family(),
                checks,
            );
            s.action = ActionSpec::Biquotient(BiquotientAction::eschenburg(m));
            s.chain = eschenburg_chain();
            s.generators = eschenburg_generators(m);
            if head == "eschenburg" {
                s.independence = Some(IndependenceSpec::Eschenburg { m });
            }
            s.flow = FlowSpec::Biquotient;
            s
        }
        "gromoll_meyer" => {
            let act = BiquotientAction::gromoll_meyer();
            let mut s = scenario(
                base(head, head.into()),
                catalog::sp(2),
                gromoll_meyer_family(),
                vec![Invariance, Involution, Independence, Flow],
            );
            s.generators = u_generators(&act);
            s.action = ActionSpec::Biquotient(act);
            s.chain = resolve_all(&[
                "l_sp2|0",
                "sp1xsp1_sp2|0",
                "sp2|0",
                "sp2|sp1xsp1_sp2",
                "sp2|sp2",
            ]);
            s.independence = Some(IndependenceSpec::GromollMeyer);
            s.flow = FlowSpec::Biquotient;
            s
        }
        "connected_sum" => {
            let n: usize = arg(name, &args, 0, params.n, 2)?;
            let t: f64 = arg(name, &args, 1, params.t, 2.0)?;
            let cfg = GluedConfig {
                n,
                t,
                ..GluedConfig::default()
            };
            let fam = build_family(&format!("connected_sum({n})"))?;
            let labels: Vec<String> = (1..=n).map(|j| format!("h{j}")).collect();
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let control =
                block_trace_family(&format!("berger_chain({n})"), n, false).select(&refs)?;
            let mut s = scenario(
                base(head, format!("connected_sum({n},{t})")),
                catalog::su(n + 1),
                fam.clone(),
                vec![Invariance, Involution, Flow],
            );
            s.chain = lower_unitary_chain(n + 1);
            s.conjugation = Some((fam, control));
            s.flow = FlowSpec::Glued(cfg);
            s
        }
        _ => return Err(unknown()),
    };
    if args.len() > max_args(head) {
        return Err(Error::InvalidInput(format!(
            "too many arguments in `{name}`"
        )));
    }
    validate(&s)?;
    Ok(s)
}

/// Chain is ascending, dimensions agree and every check has what it needs.
pub fn validate(s: &Scenario) -> Result<()> {
    let n = s.algebra.ambient_dim();
    if s.family.algebra.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: s.family.algebra.ambient_dim(),
        });
    }
    for h in &s.chain {
        if h.ambient_dim() != n && h.ambient_dim() != 2 * n {
            return Err(Error::InvalidInput(format!(
                "chain entry `{}` lives in dimension {}, expected {n} or {}",
                h.name(),
                h.ambient_dim(),
                2 * n
            )));
        }
    }
    for w in s.chain.windows(2) {
        if w[0].ambient_dim() != w[1].ambient_dim() || !w[0].is_contained_in(&w[1], 1e-10) {
            return Err(Error::InvalidInput(format!(
                "chain is not ascending: `{}` is not contained in `{}`",
                w[0].name(),
                w[1].name()
            )));
        }
    }
    if let ActionSpec::Biquotient(act) = &s.action {
        if act.algebra.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: act.algebra.ambient_dim(),
            });
        }
    }
    if let ActionSpec::Homogeneous { subgroup, .. } = &s.action {
        if !subgroup.is_contained_in(&s.algebra, 1e-10) {
            return Err(Error::InvalidSubalgebra {
                name: subgroup.name().to_string(),
                reason: format!("not contained in {}", s.algebra.name()),
            });
        }
    }
    for g in &s.generators {
        if g.pair.dim() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: g.pair.dim(),
            });
        }
    }
    let needs = |k: CheckKind, ok: bool, what: &str| -> Result<()> {
        if s.checks.contains(&k) && !ok {
            return Err(Error::InvalidInput(format!(
                "check `{}` needs {what}",
                k.name()
            )));
        }
        Ok(())
    };
    needs(
        CheckKind::Invariance,
        !s.generators.is_empty() || s.conjugation.is_some(),
        "generators or a conjugation family",
    )?;
    needs(
        CheckKind::Independence,
        s.independence.is_some(),
        "an independence point",
    )?;
    needs(
        CheckKind::Conditions,
        matches!(s.action, ActionSpec::Homogeneous { .. }),
        "a homogeneous action",
    )?;
    needs(CheckKind::Flow, !matches!(s.flow, FlowSpec::None), "a flow")?;
    needs(
        CheckKind::Flow,
        !matches!(s.flow, FlowSpec::Biquotient) || matches!(s.action, ActionSpec::Biquotient(_)),
        "a biquotient action",
    )?;
    let mut seen = std::collections::BTreeSet::new();
    if !s.checks.iter().all(|c| seen.insert(*c)) {
        return Err(Error::InvalidInput("a check is listed twice".into()));
    }
    if !(s.dt.is_finite() && s.dt > 0.0) || s.steps == 0 || s.samples == 0 {
        return Err(Error::InvalidInput(
            "dt, steps and samples must be positive".into(),
        ));
    }
    Ok(())
}

/// Family given by registry name or inline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyRef {
    Name(String),
    Inline(FamilyDoc),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActionDoc {
    None,
    Eschenburg {
        m: i64,
    },
    GromollMeyer,
    UKlpq {
        k: i64,
        l: i64,
        p: i64,
        q: i64,
    },
    Homogeneous {
        subgroup: String,
        /// Rows of `[re, im]` pairs.
        witness: Vec<Vec<[Scalar; 2]>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowDoc {
    None,
    Biquotient,
    GroupTimesSphere,
    Berger { n: usize, t: f64 },
    LeftInvariant { inertia: Vec<f64> },
    Glued { n: usize, t: f64, seam: Option<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorDoc {
    pub name: String,
    pub left: Vec<Vec<[Scalar; 2]>>,
    pub right: Vec<Vec<[Scalar; 2]>>,
}

/// Scenario file. Starting from `base` (a built-in) every field is an
/// override; without it `algebra`, `family` and `checks` are required.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub anchor: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub subalgebras: Vec<SubalgebraDoc>,
    #[serde(default)]
    pub algebra: Option<String>,
    #[serde(default)]
    pub chain: Option<Vec<String>>,
    #[serde(default)]
    pub family: Option<FamilyRef>,
    #[serde(default)]
    pub action: Option<ActionDoc>,
    #[serde(default)]
    pub generators: Option<Vec<GeneratorDoc>>,
    #[serde(default)]
    pub independence: Option<IndependenceSpec>,
    #[serde(default)]
    pub flow: Option<FlowDoc>,
    #[serde(default)]
    pub checks: Option<Vec<CheckKind>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

fn matrix_from_doc(rows: &[Vec<[Scalar; 2]>]) -> Result<AlgebraElement> {
    let n = rows.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: row.len(),
            });
        }
        for (j, [re, im]) in row.iter().enumerate() {
            m[(i, j)] = Complex64::new(re.value()?, im.value()?);
        }
    }
    AlgebraElement::new(m)
}

impl ScenarioDoc {
    pub fn build(&self) -> Result<Scenario> {
        let extra: Vec<Subalgebra> = self
            .subalgebras
            .iter()
            .map(SubalgebraDoc::build)
            .collect::<Result<_>>()?;
        let lookup = |name: &str| -> Result<Subalgebra> {
            match extra.iter().find(|h| h.name() == name) {
                Some(h) => Ok(h.clone()),
                None => catalog::resolve(name),
            }
        };
        let mut s = match &self.base {
            Some(b) => builtin(b, &BuiltinParams::default())?,
            None => {
                let algebra = lookup(self.algebra.as_deref().ok_or_else(|| missing("algebra"))?)?;
                let family = resolve_family(
                    self.family.as_ref().ok_or_else(|| missing("family"))?,
                    &extra,
                )?;
                let checks = self.checks.clone().ok_or_else(|| missing("checks"))?;
                Scenario {
                    name: String::new(),
                    anchor: String::new(),
                    description: String::new(),
                    algebra,
                    action: ActionSpec::None,
                    chain: Vec::new(),
                    family,
                    generators: Vec::new(),
                    conjugation: None,
                    independence: None,
                    flow: FlowSpec::None,
                    checks,
                    seed: DEFAULT_SEED,
                    samples: DEFAULT_SAMPLES,
                    dt: DEFAULT_DT,
                    steps: DEFAULT_STEPS,
                }
            }
        };
        s.name = self.name.clone();
        if let Some(a) = &self.anchor {
            s.anchor = a.clone();
        }
        if let Some(d) = &self.description {
            s.description = d.clone();
        }
        if self.base.is_some() {
            if let Some(a) = &self.algebra {
                s.algebra = lookup(a)?;
            }
            if let Some(f) = &self.family {
                s.family = resolve_family(f, &extra)?;
            }
            if let Some(c) = &self.checks {
                s.checks = c.clone();
            }
        }
        if let Some(chain) = &self.chain {
            s.chain = chain.iter().map(|n| lookup(n)).collect::<Result<_>>()?;
        }
        if let Some(a) = &self.action {
            s.action = match a {
                ActionDoc::None => ActionSpec::None,
                ActionDoc::Eschenburg { m } => {
                    ActionSpec::Biquotient(BiquotientAction::eschenburg(*m))
                }
                ActionDoc::GromollMeyer => {
                    ActionSpec::Biquotient(BiquotientAction::gromoll_meyer())
                }
                ActionDoc::UKlpq { k, l, p, q } => {
                    ActionSpec::Biquotient(BiquotientAction::u_klpq(*k, *l, *p, *q)?)
                }
                ActionDoc::Homogeneous { subgroup, witness } => ActionSpec::Homogeneous {
                    subgroup: lookup(subgroup)?,
                    witness: matrix_from_doc(witness)?,
                },
            };
        }
        if let Some(gens) = &self.generators {
            s.generators = gens
                .iter()
                .map(|g| {
                    Ok(Generator {
                        name: g.name.clone(),
                        pair: pair(matrix_from_doc(&g.left)?, matrix_from_doc(&g.right)?),
                    })
                })
                .collect::<Result<_>>()?;
        }
        if let Some(i) = self.independence {
            s.independence = Some(i);
        }
        if let Some(f) = &self.flow {
            s.flow = match f {
                FlowDoc::None => FlowSpec::None,
                FlowDoc::Biquotient => FlowSpec::Biquotient,
                FlowDoc::GroupTimesSphere => FlowSpec::GroupTimesSphere,
                FlowDoc::Berger { n, t } => FlowSpec::Berger { n: *n, t: *t },
                FlowDoc::LeftInvariant { inertia } => FlowSpec::LeftInvariant {
                    inertia: Inertia::diagonal(s.algebra.clone(), inertia)?,
                },
                FlowDoc::Glued { n, t, seam } => FlowSpec::Glued(GluedConfig {
                    n: *n,
                    t: *t,
                    seam: seam.unwrap_or(GluedConfig::default().seam),
                }),
            };
        }
        s.seed = self.seed.unwrap_or(s.seed);
        s.samples = self.samples.unwrap_or(s.samples);
        s.dt = self.dt.unwrap_or(s.dt);
        s.steps = self.steps.unwrap_or(s.steps);
        validate(&s)?;
        Ok(s)
    }
}

fn missing(field: &str) -> Error {
    Error::InvalidInput(format!("scenario without `base` needs `{field}`"))
}

fn resolve_family(f: &FamilyRef, extra: &[Subalgebra]) -> Result<IntegralFamily> {
    match f {
        FamilyRef::Name(n) => build_family(n),
        FamilyRef::Inline(doc) => doc.build(extra),
    }
}

pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    doc.build()
}

/// A JSON file if `source` names one, otherwise a built-in.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    load_scenario_with(source, &BuiltinParams::default())
}

pub fn load_scenario_with(source: &str, params: &BuiltinParams) -> Result<Scenario> {
    let path = Path::new(source);
    if source.ends_with(".json") || path.is_file() {
        return scenario_from_json(&std::fs::read_to_string(path)?);
    }
    builtin(source, params)
}
