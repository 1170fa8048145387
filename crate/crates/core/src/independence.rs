//! Functional independence of integral families on `R ∩ u⊥`: differential
//! matrices, SVD rank certificates, and step-by-step reproductions of the
//! elimination arguments for the Eschenburg and Gromoll-Meyer points.

use serde::{Deserialize, Serialize};

use crate::algebra::{c, exp, real_matrix, AlgebraElement, CMatrix, GroupElement, Subalgebra};
use crate::catalog;
use crate::error::{Error, Result};
use crate::expr::eval_expr;
use crate::integrals::{gradient, IntegralFamily};
use crate::linalg::{distance_to_span, numerical_rank, row_space, sorted_svd, RMatrix};
use crate::moment::{
    algebra_rank, image_residual, in_image, is_horizontal, tangent_space_r_cap_uperp, u_pairings,
    BiquotientAction, MomentPair, TangentSpace, IMAGE_TOL, SVD_TOL,
};
use crate::quaternion::{quaternion_embed, quaternion_embed_group, Quaternion, QuaternionMatrix};

/// Relative singular-value threshold for certified rank.
pub const RANK_TOL: f64 = 1e-8;
/// Tangent-space membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// A differential counts as zero below `ZERO_TOL * scale`.
pub const ZERO_TOL: f64 = 1e-8;
/// A differential counts as nonzero above `NONZERO_TOL * scale`.
pub const NONZERO_TOL: f64 = 1e-6;
/// Step of the central differences.
pub const FD_STEP: f64 = 1e-5;

/// Matrix with entry `(i, j) = d f_i (basis_j)` at `p`.
pub fn differential_matrix(
    fam: &IntegralFamily,
    p: &MomentPair,
    basis: &[MomentPair],
) -> Result<RMatrix> {
    for v in basis {
        if v.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                left: p.dim(),
                right: v.dim(),
            });
        }
    }
    let grads = fam
        .specs
        .iter()
        .map(|s| gradient(s, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(RMatrix::from_fn(grads.len(), basis.len(), |i, j| {
        grads[i].inner(&basis[j])
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub family: String,
    pub labels: Vec<String>,
    pub point: MomentPair,
    pub tangent_dim: usize,
    pub differential_matrix: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub threshold: f64,
    /// `sigma_rank / sigma_1`, or 0 for rank 0.
    pub smallest_ratio: f64,
}

impl RankCertificate {
    pub fn from_matrix(fam: &IntegralFamily, p: &MomentPair, m: &RMatrix) -> Self {
        let sv = sorted_svd(m).singular_values;
        let rank = numerical_rank(&sv, RANK_TOL);
        let smallest_ratio = if rank == 0 { 0.0 } else { sv[rank - 1] / sv[0] };
        Self {
            family: fam.name.clone(),
            labels: fam.labels().iter().map(|s| s.to_string()).collect(),
            point: p.clone(),
            tangent_dim: m.ncols(),
            differential_matrix: (0..m.nrows())
                .map(|i| m.row(i).iter().cloned().collect())
                .collect(),
            singular_values: sv,
            rank,
            threshold: RANK_TOL,
            smallest_ratio,
        }
    }

    pub fn is_full(&self) -> bool {
        self.rank == self.labels.len()
    }
}

/// Rank of the family's differentials restricted to `T_p(R ∩ u⊥)`.
pub fn rank_certificate(
    fam: &IntegralFamily,
    p: &MomentPair,
    act: &BiquotientAction,
) -> Result<RankCertificate> {
    let ts = tangent_space_r_cap_uperp(p, act)?;
    let m = differential_matrix(fam, p, &ts.basis)?;
    Ok(RankCertificate::from_matrix(fam, p, &m))
}

/// Derivative at 0 of a curve by central differences with one Richardson step.
pub fn curve_derivative(curve: impl Fn(f64) -> MomentPair, h: f64) -> MomentPair {
    let central = |h: f64| curve(h).sub(&curve(-h)).scale(0.5 / h);
    let d1 = central(h);
    let d2 = central(h / 2.0);
    d2.scale(4.0 / 3.0).sub(&d1.scale(1.0 / 3.0))
}

/// One named sub-check with its measured value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    pub value: f64,
    pub passed: bool,
}

impl NamedCheck {
    fn new(name: impl Into<String>, value: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub title: String,
    /// `(label, df(v))` for the tangent vector of this step.
    pub differentials: Vec<(String, f64)>,
    pub checks: Vec<NamedCheck>,
    pub passed: bool,
}

impl StepReport {
    fn new(
        step: usize,
        title: &str,
        differentials: Vec<(String, f64)>,
        checks: Vec<NamedCheck>,
    ) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            step,
            title: title.to_string(),
            differentials,
            checks,
            passed,
        }
    }

    pub fn failures(&self) -> Vec<&NamedCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub name: String,
    pub steps: Vec<StepReport>,
    pub certificate: Option<RankCertificate>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ReplayReport {
    fn new(
        name: String,
        steps: Vec<StepReport>,
        certificate: Option<RankCertificate>,
        notes: Vec<String>,
    ) -> Self {
        let passed =
            steps.iter().all(|s| s.passed) && certificate.as_ref().is_none_or(|c| c.is_full());
        Self {
            name,
            steps,
            certificate,
            notes,
            passed,
        }
    }

    /// First failing step, if any.
    pub fn first_failure(&self) -> Option<&StepReport> {
        self.steps.iter().find(|s| !s.passed)
    }
}

fn differentials(
    fam: &IntegralFamily,
    p: &MomentPair,
    v: &MomentPair,
) -> Result<Vec<(String, f64)>> {
    fam.specs
        .iter()
        .map(|s| Ok((s.label.clone(), gradient(s, p)?.inner(v))))
        .collect()
}

fn lookup(ds: &[(String, f64)], label: &str) -> f64 {
    ds.iter()
        .find(|(l, _)| l == label)
        .map(|d| d.1)
        .unwrap_or(f64::NAN)
}

/// Zero / nonzero expectations against the largest differential magnitude.
fn pattern_checks(ds: &[(String, f64)], zero: &[&str], nonzero: &[&str]) -> Vec<NamedCheck> {
    let scale = ds.iter().fold(1.0f64, |a, d| a.max(d.1.abs()));
    let mut out = Vec::new();
    for l in zero {
        let v = lookup(ds, l);
        out.push(NamedCheck::new(
            format!("d{l} = 0"),
            v,
            v.abs() <= ZERO_TOL * scale,
        ));
    }
    for l in nonzero {
        let v = lookup(ds, l);
        out.push(NamedCheck::new(
            format!("d{l} != 0"),
            v,
            v.abs() > NONZERO_TOL * scale,
        ));
    }
    out
}

fn curve_checks(
    curve: &dyn Fn(f64) -> MomentPair,
    analytic: &MomentPair,
    ts: &TangentSpace,
    act: &BiquotientAction,
) -> Vec<NamedCheck> {
    let numeric = curve_derivative(curve, FD_STEP);
    let err = numeric.sub(analytic).norm() / analytic.norm().max(1.0);
    let mut out = vec![
        NamedCheck::new("numeric derivative = analytic", err, err < 1e-6),
        NamedCheck::new(
            "tangent to R ∩ u⊥",
            ts.residual(analytic),
            ts.contains(analytic, MEMBERSHIP_TOL),
        ),
    ];
    let q = curve(0.3);
    let scale = q.norm().max(1.0);
    out.push(NamedCheck::new(
        "curve stays in R",
        image_residual(&q),
        in_image(&q),
    ));
    let worst = u_pairings(&q, act)
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    out.push(NamedCheck::new(
        "curve stays in u⊥",
        worst,
        worst < IMAGE_TOL * scale,
    ));
    out
}

fn exact_check(name: &str, got: &CMatrix, want: &CMatrix) -> NamedCheck {
    let diff = (got - want).norm();
    NamedCheck::new(name, diff, diff == 0.0)
}

/// The regular point `P` of the flag example.
pub fn eschenburg_point_matrix() -> AlgebraElement {
    AlgebraElement::new(real_matrix(3, &[0., 2., 1., -2., 0., 0., -1., 0., 0.])).expect("skew")
}

fn el(m: CMatrix) -> AlgebraElement {
    AlgebraElement::from_matrix_unchecked(m)
}

fn sym_pair(x: &AlgebraElement) -> MomentPair {
    MomentPair::from_velocity(x)
}

/// `P` with `(1,3)` entry `1 + t`.
pub fn eschenburg_p1(t: f64) -> AlgebraElement {
    el(real_matrix(
        3,
        &[0., 2., 1. + t, -2., 0., 0., -1. - t, 0., 0.],
    ))
}

/// `P` with `i t` in the `(2,3)` and `(3,2)` slots.
pub fn eschenburg_p2(t: f64) -> AlgebraElement {
    let z = c(0.0, t);
    let o = c(0.0, 0.0);
    let r = |x: f64| c(x, 0.0);
    el(CMatrix::from_row_slice(
        3,
        3,
        &[o, r(2.), r(1.), r(-2.), o, z, r(-1.), z, o],
    ))
}

/// `P` with `(1,2)` entry `2 + t`.
pub fn eschenburg_p3(t: f64) -> AlgebraElement {
    el(real_matrix(
        3,
        &[0., 2. + t, 1., -2. - t, 0., 0., -1., 0., 0.],
    ))
}

/// `s(t) = sqrt((t+2)^2 - 3)`, chosen so that the companion keeps the spectrum of `eschenburg_p3`.
pub fn eschenburg_s(t: f64) -> f64 {
    ((t + 2.0).powi(2) - 3.0).sqrt()
}

pub fn eschenburg_q3(t: f64) -> AlgebraElement {
    let s = eschenburg_s(t);
    el(real_matrix(3, &[0., 2., s, -2., 0., 0., -s, 0., 0.]))
}

/// Diagonal weights of the sixth curve, horizontal for the circle of weight `m`.
pub fn eschenburg_p6_weights(m: i64) -> [f64; 3] {
    let d = 6.0 * m as f64 + 1.0;
    [1.0, -(6.0 * m as f64 - 1.0) / d, -2.0 / d]
}

pub fn eschenburg_p6(m: i64, t: f64) -> AlgebraElement {
    let w = eschenburg_p6_weights(m);
    let diag = AlgebraElement::imaginary_diagonal(&[w[0] * t, w[1] * t, w[2] * t]);
    &eschenburg_point_matrix() + &diag
}

/// `i (E_ab + E_ba)`.
pub fn symmetric_imaginary(a: usize, b: usize) -> AlgebraElement {
    let mut m = CMatrix::zeros(3, 3);
    m[(a, b)] = c(0.0, 1.0);
    m[(b, a)] = c(0.0, 1.0);
    el(m)
}

pub fn printed_bracket_item5() -> CMatrix {
    let z = |re: f64, im: f64| c(re, im);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            z(0., -4.),
            z(0., 0.),
            z(0., 0.),
            z(0., 0.),
            z(0., 4.),
            z(0., 1.),
            z(0., 0.),
            z(0., 1.),
            z(0., 0.),
        ],
    )
}

pub fn printed_bracket_item7() -> CMatrix {
    let z = |re: f64, im: f64| c(re, im);
    CMatrix::from_row_slice(
        3,
        3,
        &[
            z(0., -2.),
            z(0., 0.),
            z(0., 0.),
            z(0., 0.),
            z(0., 0.),
            z(0., 2.),
            z(0., 0.),
            z(0., 2.),
            z(0., 2.),
        ],
    )
}

/// Replays the seven-step elimination for `f2..f8` at `(P, -P)` on `E_m`.
pub fn replay_eschenburg_steps(m: i64) -> Result<ReplayReport> {
    if m < 0 {
        return Err(Error::InvalidInput(format!(
            "weight m must be non-negative, got {m}"
        )));
    }
    let act = BiquotientAction::eschenburg(m);
    let full = crate::integrals::eschenburg_family();
    let fam = full.select(&["f2", "f3", "f4", "f5", "f6", "f7", "f8"])?;
    let p_mat = eschenburg_point_matrix();
    let p = sym_pair(&p_mat);
    let ts = tangent_space_r_cap_uperp(&p, &act)?;
    let zero3 = AlgebraElement::zeros(3);
    let mut steps = Vec::new();
    let mut notes = Vec::new();

    let mut step = |n: usize,
                    title: &str,
                    curve: &dyn Fn(f64) -> MomentPair,
                    analytic: MomentPair,
                    zero: &[&str],
                    nonzero: &[&str],
                    extra: Vec<NamedCheck>|
     -> Result<Vec<(String, f64)>> {
        let ds = differentials(&fam, &p, &analytic)?;
        let mut checks = curve_checks(curve, &analytic, &ts, &act);
        checks.extend(pattern_checks(&ds, zero, nonzero));
        checks.extend(extra);
        steps.push(StepReport::new(n, title, ds.clone(), checks));
        Ok(ds)
    };

    // 1: only the (1,3) entry moves; projections stay fixed
    let e13 = el(real_matrix(3, &[0., 0., 1., 0., 0., 0., -1., 0., 0.]));
    step(
        1,
        "vary the (1,3) entry: eliminates the quadratic Casimir",
        &|t| sym_pair(&eschenburg_p1(t)),
        sym_pair(&e13),
        &["f2", "f3", "f5", "f6", "f7", "f8"],
        &["f4"],
        vec![],
    )?;

    // 2: imaginary (2,3) entries
    let ds = step(
        2,
        "imaginary (2,3) entries: eliminates the cubic Casimir",
        &|t| sym_pair(&eschenburg_p2(t)),
        sym_pair(&symmetric_imaginary(1, 2)),
        &["f2", "f3", "f6", "f7", "f8"],
        &["f5"],
        vec![],
    )?;
    notes.push(format!(
        "cubic Casimir along the second curve has slope {:+.12} (i tr P^3 = +12 t)",
        lookup(&ds, "f5")
    ));

    // 3 and 4: spectrum-preserving pair with s'(0) = 2
    let e12 = el(real_matrix(3, &[0., 1., 0., -1., 0., 0., 0., 0., 0.]));
    let e13x2 = e13.scale(2.0);
    step(
        3,
        "(P3(t), -Q3(t)): eliminates the left u(2) quadratic",
        &|t| MomentPair {
            left: eschenburg_p3(t),
            right: eschenburg_q3(t).scale(-1.0),
        },
        MomentPair {
            left: e12.clone(),
            right: e13x2.scale(-1.0),
        },
        &["f2", "f6", "f7", "f8"],
        &["f3"],
        vec![],
    )?;
    step(
        4,
        "(Q3(t), -P3(t)): eliminates the right u(2) quadratic",
        &|t| MomentPair {
            left: eschenburg_q3(t),
            right: eschenburg_p3(t).scale(-1.0),
        },
        MomentPair {
            left: e13x2.clone(),
            right: e12.scale(-1.0),
        },
        &["f2", "f6", "f7"],
        &["f8"],
        vec![],
    )?;

    // 5: right factor conjugated by exp(tA), A commuting with u
    let a = symmetric_imaginary(0, 1);
    let ap = a.commutator(&p_mat);
    let bracket5 = exact_check(
        "[A,P] equals the printed matrix",
        ap.matrix(),
        &printed_bracket_item5(),
    );
    let a5 = a.clone();
    let pm5 = p_mat.clone();
    step(
        5,
        "(P, -Ad(exp tA) P): eliminates the right u(1) trace",
        &move |t| MomentPair {
            left: pm5.clone(),
            right: exp(&a5.scale(t)).conjugate_element(&pm5).scale(-1.0),
        },
        MomentPair {
            left: zero3.clone(),
            right: ap.scale(-1.0),
        },
        &["f2", "f7"],
        &["f6"],
        vec![bracket5],
    )?;

    // 6: diagonal deformation; relation c2 = c7
    let w = eschenburg_p6_weights(m);
    let dd = AlgebraElement::imaginary_diagonal(&w);
    let ds6 = differentials(&fam, &p, &sym_pair(&dd))?;
    let (d2, d7) = (lookup(&ds6, "f2"), lookup(&ds6, "f7"));
    let scale6 = d2.abs().max(d7.abs()).max(1.0);
    step(
        6,
        "diagonal deformation with weights (1, -(6m-1)/(6m+1), -2/(6m+1)): forces c2 = c7",
        &|t| sym_pair(&eschenburg_p6(m, t)),
        sym_pair(&dd),
        &[],
        &["f2", "f7"],
        vec![NamedCheck::new(
            "df2 + df7 = 0",
            d2 + d7,
            (d2 + d7).abs() <= ZERO_TOL * scale6,
        )],
    )?;

    // 7: contradiction through T_p R = T_p(R ∩ u⊥) + R v
    let v = MomentPair {
        left: a.commutator(&p_mat),
        right: zero3.clone(),
    };
    let a7 = symmetric_imaginary(0, 2);
    let w7 = MomentPair {
        left: a7.commutator(&p_mat),
        right: zero3.clone(),
    };
    let bracket7 = exact_check(
        "[A',P] equals the printed matrix",
        w7.left.matrix(),
        &printed_bracket_item7(),
    );
    let dv = differentials(&fam, &p, &v)?;
    let dw = differentials(&fam, &p, &w7)?;
    let v_pair = u_pairings(&v, &act)
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let g = act.algebra.clone();
    let mut rows: Vec<Vec<f64>> = ts.basis.iter().map(|b| b.coords(&g)).collect();
    rows.push(v.coords(&g));
    let span = RMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let ext = row_space(&span, SVD_TOL);
    let w_res = distance_to_span(&ext, &w7.coords(&g)) / w7.norm().max(1.0);
    let scale7 = dw
        .iter()
        .chain(dv.iter())
        .fold(1.0f64, |a, d| a.max(d.1.abs()));
    let (w2, w7v) = (lookup(&dw, "f2"), lookup(&dw, "f7"));
    let checks7 = vec![
        bracket7,
        NamedCheck::new("v is not perpendicular to u", v_pair, v_pair > NONZERO_TOL),
        NamedCheck::new(
            "df2(v) = 0",
            lookup(&dv, "f2"),
            lookup(&dv, "f2").abs() <= ZERO_TOL * scale7,
        ),
        NamedCheck::new(
            "df7(v) = 0",
            lookup(&dv, "f7"),
            lookup(&dv, "f7").abs() <= ZERO_TOL * scale7,
        ),
        NamedCheck::new(
            "T_p(R ∩ u⊥) + Rv has dimension dim T_p R",
            ext.nrows() as f64,
            ext.nrows() == ts.dim_r,
        ),
        NamedCheck::new("w lies in T_p R", w_res, w_res < MEMBERSHIP_TOL),
        NamedCheck::new(
            "df2(w) != df7(w)",
            w2 - w7v,
            (w2 - w7v).abs() > NONZERO_TOL * scale7,
        ),
        NamedCheck::new(
            "df2(w) != -df7(w)",
            w2 + w7v,
            (w2 + w7v).abs() > NONZERO_TOL * scale7,
        ),
    ];
    steps.push(StepReport::new(
        7,
        "v = ([A,P],0) and w = ([A',P],0): c2 = c7 = 0",
        dw,
        checks7,
    ));

    let cert = RankCertificate::from_matrix(&fam, &p, &differential_matrix(&fam, &p, &ts.basis)?);
    Ok(ReplayReport::new(
        format!("eschenburg(m={m})"),
        steps,
        Some(cert),
        notes,
    ))
}

/// Fixed data of the Gromoll-Meyer independence computation.
#[derive(Clone, Debug)]
pub struct GromollMeyerData {
    pub q: GroupElement,
    pub p_mat: AlgebraElement,
    pub r_mat: AlgebraElement,
    /// `D_1 .. D_7`.
    pub d: Vec<AlgebraElement>,
    /// The point `(R, -P)` of `R ∩ u⊥`.
    pub point: MomentPair,
    /// The pair `(R, P)` as literally written.
    pub literal_point: MomentPair,
    /// `v_1 .. v_7` at `point`.
    pub vectors: Vec<MomentPair>,
}

fn qm(rows: [[Quaternion; 2]; 2]) -> QuaternionMatrix {
    QuaternionMatrix::from_rows(&[&rows[0], &rows[1]])
}

fn qexpr(a: &str, b: &str, cc: &str, d: &str) -> Quaternion {
    let v = |s: &str| eval_expr(s).expect("constant expression");
    Quaternion::new(v(a), v(b), v(cc), v(d))
}

pub fn gromoll_meyer_data() -> GromollMeyerData {
    use std::f64::consts::PI;
    let z = Quaternion::ZERO;
    let r = Quaternion::real;
    let f = |t: f64| {
        let (s, cs) = (PI * t).sin_cos();
        quaternion_embed_group(&qm([[r(cs), r(s)], [r(-s), r(cs)]])).expect("orthogonal")
    };
    let g = |t: f64| {
        let (s, cs) = (PI * t).sin_cos();
        quaternion_embed_group(&qm([
            [Quaternion::ONE, z],
            [z, Quaternion::new(cs, 0.0, s, 0.0)],
        ]))
        .expect("unitary")
    };
    let q = f(1.0 / 3.0).compose(&g(0.25));
    let p_mat = quaternion_embed(&qm([
        [
            qexpr("0", "2", "-2", "-(149 + 18*sqrt(2)*sqrt(3))/9"),
            qexpr("1", "3", "2", "-3"),
        ],
        [
            qexpr("-1", "3", "2", "-3"),
            qexpr("0", "5", "6 + sqrt(2)*sqrt(3)", "26/3"),
        ],
    ]))
    .expect("P lies in sp(2)");
    let r_mat = q.conjugate_element(&p_mat);
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
    let one = Quaternion::ONE;
    let d: Vec<AlgebraElement> = [
        [[i, z], [z, z]],
        [[z, z], [z, i]],
        [[z, j], [j, z]],
        [[z, k], [k, z]],
        [[z, one], [-one, z]],
        [[k, z], [z, z]],
        [[z, z], [z, j]],
    ]
    .into_iter()
    .map(|m| quaternion_embed(&qm(m)).expect("skew"))
    .collect();
    let qs = q.inverse();
    let s6 = eval_expr("sqrt(2)*sqrt(3)").expect("constant");
    let lc = |cs: &[(f64, usize)]| {
        cs.iter().fold(AlgebraElement::zeros(4), |acc, &(w, n)| {
            &acc + &d[n - 1].scale(w)
        })
    };
    let zero = AlgebraElement::zeros(4);
    let pair = |l: AlgebraElement, r: AlgebraElement| MomentPair { left: l, right: r };
    let point = pair(r_mat.clone(), p_mat.scale(-1.0));
    let v4in = lc(&[(s6, 7), (1.0, 3)]);
    let vectors = vec![
        pair(d[4].clone(), qs.conjugate_element(&d[4]).scale(-1.0)),
        point.clone(),
        pair(zero.clone(), d[4].commutator(&p_mat)),
        pair(q.conjugate_element(&v4in).scale(-1.0), v4in.clone()),
        pair(
            q.conjugate_element(&d[0]).scale(-1.0),
            &d[0] + &lc(&[(3.0 / 80.0, 4), (-9.0 / 80.0, 6)]).commutator(&p_mat),
        ),
        pair(d[6].commutator(&r_mat), zero),
        pair(
            d[1].scale(-1.0),
            &qs.conjugate_element(&d[1])
                + &lc(&[(1.0 / 48.0, 3), (1.0 / 40.0, 4), (-3.0 / 40.0, 6)]).commutator(&p_mat),
        ),
    ];
    GromollMeyerData {
        literal_point: pair(r_mat.clone(), p_mat.clone()),
        q,
        p_mat,
        r_mat,
        d,
        point,
        vectors,
    }
}

/// Checks `v_1 .. v_7` against `T_p(R ∩ u⊥)` and the nonsingularity of
/// `df_i(v_j)`.
pub fn replay_gromoll_meyer() -> Result<ReplayReport> {
    let data = gromoll_meyer_data();
    let act = BiquotientAction::gromoll_meyer();
    let fam = crate::integrals::gromoll_meyer_family();
    let p = &data.point;
    let mut notes = Vec::new();
    let literal_pair = u_pairings(&data.literal_point, &act)
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    notes.push(format!(
        "(R, P) as written has largest u-pairing {literal_pair:.6e}; (R, -P) is used, which also makes the radial vector v2 equal p"
    ));
    let ts = tangent_space_r_cap_uperp(p, &act)?;
    let mut steps = Vec::new();
    let scale = p.norm().max(1.0);
    let worst = u_pairings(p, &act)
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    steps.push(StepReport::new(
        0,
        "p = (R, -P) lies in R ∩ u⊥",
        vec![],
        vec![
            NamedCheck::new("p in R", image_residual(p), in_image(p)),
            NamedCheck::new(
                "p horizontal",
                worst,
                is_horizontal(p, &act, IMAGE_TOL * scale),
            ),
            NamedCheck::new(
                "dim T_p(R ∩ u⊥)",
                ts.dim as f64,
                ts.dim == 2 * act.group_dim - act.rank - act.u_dim(),
            ),
        ],
    ));
    for (n, v) in data.vectors.iter().enumerate() {
        let ds = differentials(&fam, p, v)?;
        let res = ts.residual(v);
        steps.push(StepReport::new(
            n + 1,
            &format!("v{}", n + 1),
            ds,
            vec![NamedCheck::new(
                "tangent to R ∩ u⊥",
                res,
                res < MEMBERSHIP_TOL,
            )],
        ));
    }
    let m = differential_matrix(&fam, p, &data.vectors)?;
    let det = m.determinant();
    let row_norms: f64 = (0..m.nrows()).map(|i| m.row(i).norm()).product();
    let cert = RankCertificate::from_matrix(&fam, p, &m);
    steps.push(StepReport::new(
        8,
        "evaluation matrix df_i(v_j) is nonsingular",
        vec![],
        vec![
            NamedCheck::new(
                "|det| > 1e-8 * row-norm product",
                det,
                det.abs() > 1e-8 * row_norms,
            ),
            NamedCheck::new("rank 7", cert.rank as f64, cert.rank == 7),
        ],
    ));
    let full = rank_certificate(&fam, p, &act)?;
    Ok(ReplayReport::new(
        "gromoll_meyer".into(),
        steps,
        Some(full),
        notes,
    ))
}

/// Outcome of the homogeneous-space conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousReport {
    pub group: String,
    pub subgroup: String,
    pub dim_g: usize,
    pub dim_k: usize,
    pub index: usize,
    /// `dim G = 2 dim K + ind G + 2`.
    pub dimension_identity: bool,
    /// Rank of `Y -> [X, Y]` on `k`.
    pub bracket_rank: usize,
    /// `dim [X, k] = dim k`.
    pub generic_isotropy: bool,
    pub passed: bool,
}

/// Generic corank of the coadjoint action; equals the rank for compact algebras.
pub fn index(g: &Subalgebra) -> usize {
    algebra_rank(g)
}

pub fn check_homogeneous_conditions(
    g: &Subalgebra,
    k: &Subalgebra,
    x: &AlgebraElement,
) -> Result<HomogeneousReport> {
    if !k.is_contained_in(g, 1e-10) {
        return Err(Error::InvalidSubalgebra {
            name: k.name().to_string(),
            reason: format!("not contained in {}", g.name()),
        });
    }
    let along = k.project(x)?.norm();
    if along > 1e-10 * x.norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "X is not orthogonal to {} (component of norm {along:e})",
            k.name()
        )));
    }
    let ind = index(g);
    let dim_identity = g.dim() == 2 * k.dim() + ind + 2;
    let cols: Vec<Vec<f64>> = k
        .basis()
        .iter()
        .map(|b| g.coords(&x.commutator(b)).iter().cloned().collect())
        .collect();
    let m = RMatrix::from_fn(g.dim(), cols.len(), |i, j| cols[j][i]);
    let rank = if cols.is_empty() {
        0
    } else {
        numerical_rank(&sorted_svd(&m).singular_values, 1e-10)
    };
    let generic = rank == k.dim();
    Ok(HomogeneousReport {
        group: g.name().to_string(),
        subgroup: k.name().to_string(),
        dim_g: g.dim(),
        dim_k: k.dim(),
        index: ind,
        dimension_identity: dim_identity,
        bracket_rank: rank,
        generic_isotropy: generic,
        passed: dim_identity && generic,
    })
}

/// The off-diagonal element used for the flag manifold.
pub fn flag_witness() -> AlgebraElement {
    AlgebraElement::new(real_matrix(3, &[0., 1., 1., -1., 0., 0., -1., 0., 0.])).expect("skew")
}

/// `(su(3), torus, X)` for the flag manifold.
pub fn flag_conditions() -> Result<HomogeneousReport> {
    check_homogeneous_conditions(&catalog::su(3), &catalog::torus_su(3), &flag_witness())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{eschenburg_family, gromoll_meyer_family};

    #[test]
    fn eschenburg_rank_seven() {
        for m in 0..3 {
            let act = BiquotientAction::eschenburg(m);
            let fam = eschenburg_family()
                .select(&["f2", "f3", "f4", "f5", "f6", "f7", "f8"])
                .unwrap();
            let cert = rank_certificate(&fam, &sym_pair(&eschenburg_point_matrix()), &act).unwrap();
            assert_eq!(cert.rank, 7, "m = {m}");
            assert!(cert.smallest_ratio > 1e-6);
            assert_eq!(cert.tangent_dim, 13);
        }
    }

    #[test]
    fn duplicated_spec_has_rank_one() {
        let base = eschenburg_family();
        let f4 = base.spec("f4").unwrap().clone();
        let fam = IntegralFamily {
            name: "dup".into(),
            algebra: base.algebra.clone(),
            specs: vec![f4.clone(), f4.with_label("f4b")],
            expected_independent: 1,
        };
        let cert = rank_certificate(
            &fam,
            &sym_pair(&eschenburg_point_matrix()),
            &BiquotientAction::eschenburg(1),
        )
        .unwrap();
        assert_eq!(cert.rank, 1);
    }

    #[test]
    fn zero_vector_gives_zero_column() {
        let fam = eschenburg_family();
        let p = sym_pair(&eschenburg_point_matrix());
        let m = differential_matrix(&fam, &p, &[MomentPair::zeros(3)]).unwrap();
        assert!(m.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn wrong_sized_basis_is_rejected() {
        let fam = eschenburg_family();
        let p = sym_pair(&eschenburg_point_matrix());
        assert!(differential_matrix(&fam, &p, &[MomentPair::zeros(4)]).is_err());
    }

    #[test]
    fn replay_steps_pass() {
        for m in 0..3 {
            let r = replay_eschenburg_steps(m).unwrap();
            for s in &r.steps {
                assert!(s.passed, "m={m} step {}: {:?}", s.step, s.failures());
            }
            assert!(r.passed);
        }
        assert!(replay_eschenburg_steps(-1).is_err());
    }

    #[test]
    fn sixth_curve_differentials() {
        for m in 0..3 {
            let r = replay_eschenburg_steps(m).unwrap();
            let d = &r.steps[5].differentials;
            let d2 = lookup(d, "f2");
            assert!((d2 + 2.0 / (6.0 * m as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_casimir_slope_is_plus_twelve() {
        // Newton: p3 = e1^3 - 3 e1 e2 + 3 e3 with e1 = 0, e3 = det = -4 i t
        let f5 = eschenburg_family().spec("f5").unwrap().clone();
        for t in [-1.0, 0.5, 2.0] {
            let det = eschenburg_p2(t).matrix().determinant();
            assert!((det - c(0.0, -4.0 * t)).norm() < 1e-12);
            let v = crate::integrals::eval_integral(&f5, &sym_pair(&eschenburg_p2(t))).unwrap();
            assert!((v - 12.0 * t).abs() < 1e-10);
        }
    }

    #[test]
    fn gromoll_meyer_vectors_and_rank() {
        let r = replay_gromoll_meyer().unwrap();
        for s in &r.steps {
            assert!(s.passed, "step {}: {:?}", s.step, s.failures());
        }
        let cert = r.certificate.unwrap();
        assert_eq!(cert.rank, 7);
        assert!(cert.smallest_ratio > 1e-6);
    }

    #[test]
    fn literal_gromoll_meyer_point_is_not_horizontal() {
        let data = gromoll_meyer_data();
        let act = BiquotientAction::gromoll_meyer();
        assert!(in_image(&data.literal_point));
        assert!(!is_horizontal(&data.literal_point, &act, 1e-6));
        assert!(matches!(
            tangent_space_r_cap_uperp(&data.literal_point, &act),
            Err(Error::NotHorizontal { .. })
        ));
    }

    #[test]
    fn dropping_v3_loses_rank() {
        let data = gromoll_meyer_data();
        let fam = gromoll_meyer_family();
        let mut vs = data.vectors.clone();
        vs[2] = MomentPair::zeros(4);
        let m = differential_matrix(&fam, &data.point, &vs).unwrap();
        assert_eq!(RankCertificate::from_matrix(&fam, &data.point, &m).rank, 6);
    }

    #[test]
    fn rank_never_increases_when_a_vector_is_removed() {
        let data = gromoll_meyer_data();
        let fam = gromoll_meyer_family();
        let full = RankCertificate::from_matrix(
            &fam,
            &data.point,
            &differential_matrix(&fam, &data.point, &data.vectors).unwrap(),
        )
        .rank;
        for k in 0..7 {
            let mut vs = data.vectors.clone();
            vs.remove(k);
            let m = differential_matrix(&fam, &data.point, &vs).unwrap();
            assert!(RankCertificate::from_matrix(&fam, &data.point, &m).rank <= full);
        }
    }

    #[test]
    fn certificate_invariant_under_basis_rotation() {
        let act = BiquotientAction::eschenburg(1);
        let fam = eschenburg_family()
            .select(&["f2", "f3", "f4", "f5", "f6", "f7", "f8"])
            .unwrap();
        let p = sym_pair(&eschenburg_point_matrix());
        let ts = tangent_space_r_cap_uperp(&p, &act).unwrap();
        let base = RankCertificate::from_matrix(
            &fam,
            &p,
            &differential_matrix(&fam, &p, &ts.basis).unwrap(),
        );
        // Givens rotation mixing the first two basis vectors
        let (s, cs) = 0.7f64.sin_cos();
        let mut rotated = ts.basis.clone();
        rotated[0] = ts.basis[0].scale(cs).add(&ts.basis[1].scale(s));
        rotated[1] = ts.basis[0].scale(-s).add(&ts.basis[1].scale(cs));
        let rot = RankCertificate::from_matrix(
            &fam,
            &p,
            &differential_matrix(&fam, &p, &rotated).unwrap(),
        );
        assert_eq!(base.rank, rot.rank);
        for (a, b) in base.singular_values.iter().zip(&rot.singular_values) {
            assert!((a / base.singular_values[0] - b / rot.singular_values[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn flag_manifold_conditions() {
        let r = flag_conditions().unwrap();
        assert_eq!((r.dim_g, r.dim_k, r.index, r.bracket_rank), (8, 2, 2, 2));
        assert!(r.passed);
        let z = check_homogeneous_conditions(
            &catalog::su(3),
            &catalog::torus_su(3),
            &AlgebraElement::zeros(3),
        )
        .unwrap();
        assert_eq!(z.bracket_rank, 0);
        assert!(!z.generic_isotropy);
        let diag = AlgebraElement::imaginary_diagonal(&[1.0, -1.0, 0.0]);
        assert!(
            check_homogeneous_conditions(&catalog::su(3), &catalog::torus_su(3), &diag).is_err()
        );
    }

    #[test]
    fn so4_over_so2() {
        // so(2) on the upper block inside so(4); X couples the blocks
        let g = catalog::so(4);
        let k = catalog::so_upper(4, 2);
        let x = AlgebraElement::new(real_matrix(
            4,
            &[
                0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.,
            ],
        ))
        .unwrap();
        let r = check_homogeneous_conditions(&g, &k, &x).unwrap();
        assert_eq!((r.dim_g, r.dim_k, r.index), (6, 1, 2));
        assert!(r.dimension_identity);
        assert_eq!(r.bracket_rank, 1);
    }

    #[test]
    fn certificate_json_round_trip() {
        let act = BiquotientAction::eschenburg(0);
        let fam = eschenburg_family().select(&["f2", "f4"]).unwrap();
        let cert = rank_certificate(&fam, &sym_pair(&eschenburg_point_matrix()), &act).unwrap();
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains("singular_values"));
        let back: RankCertificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back.rank, cert.rank);
        assert_eq!(back.singular_values.len(), cert.singular_values.len());
    }
}
