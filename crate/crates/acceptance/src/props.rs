//! Randomized property suites over the algebra, projector, bracket and rank layers.

use std::time::{Duration, Instant};

use geolab::algebra::{ad_group, bracket, exp, inner, AlgebraElement, Subalgebra};
use geolab::catalog::resolve;
use geolab::independence::RANK_TOL;
use geolab::integrals::{build_family, eval_integral, lie_poisson_bracket, IntegralFamily};
use geolab::linalg::RMatrix;
use geolab::linalg::{numerical_rank, singular_values};
use geolab::moment::MomentPair;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;
/// Relative tolerance of the exact algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Relative tolerance when one side goes through central differences.
pub const FD_TOL: f64 = 1e-6;

const ALGEBRAS: &[&str] = &["su2", "su3", "su4", "so4", "so5", "sp2"];
const SUBALGEBRAS: &[(&str, &str)] = &[
    ("su3", "t_su3"),
    ("su3", "u1_su3"),
    ("su3", "u2_upper_su3"),
    ("su4", "u1_lower_su4"),
    ("so4", "so2_lower_so4"),
    ("so5", "so3_upper_so5"),
    ("sp2", "sp1xsp1_sp2"),
    ("sp2", "so2_sp2"),
    ("sp2", "l_sp2"),
];
const FAMILIES: &[&str] = &[
    "eschenburg",
    "gromoll_meyer",
    "connected_sum(2)",
    "son_chain(4)",
];
const MAX_DIM: usize = 15;

#[derive(Clone, Debug)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: u32,
    pub elapsed: Duration,
    pub failure: Option<String>,
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn algebra(name: &str) -> Subalgebra {
    resolve(name).expect("catalog names resolve")
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}

fn element(g: &Subalgebra, c: &[f64], slot: usize) -> AlgebraElement {
    g.from_coords(&c[slot * MAX_DIM..slot * MAX_DIM + g.dim()])
}

fn sum(xs: &[&AlgebraElement]) -> AlgebraElement {
    let ones = vec![1.0; xs.len()];
    let owned: Vec<AlgebraElement> = xs.iter().map(|x| (*x).clone()).collect();
    AlgebraElement::combination(&ones, &owned)
}

fn lift<T>(r: geolab::error::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(what()))
    }
}

fn jacobi(r: &mut TestRunner) -> Result<(), String> {
    let strat = (0..ALGEBRAS.len(), coeffs(3 * MAX_DIM));
    r.run(&strat, |(a, c)| {
        let g = algebra(ALGEBRAS[a]);
        let (x, y, z) = (element(&g, &c, 0), element(&g, &c, 1), element(&g, &c, 2));
        let t1 = lift(bracket(&x, &lift(bracket(&y, &z))?))?;
        let t2 = lift(bracket(&y, &lift(bracket(&z, &x))?))?;
        let t3 = lift(bracket(&z, &lift(bracket(&x, &y))?))?;
        let res = sum(&[&t1, &t2, &t3]).norm();
        let scale = 1.0 + x.norm() * y.norm() * z.norm();
        check(res <= IDENTITY_TOL * scale, || {
            format!("{}: Jacobi residual {res:e}", g.name())
        })
    })
    .map_err(|e| e.to_string())
}

fn ad_invariance(r: &mut TestRunner) -> Result<(), String> {
    let strat = (0..ALGEBRAS.len(), coeffs(3 * MAX_DIM));
    r.run(&strat, |(a, c)| {
        let g = algebra(ALGEBRAS[a]);
        let (x, y) = (element(&g, &c, 0), element(&g, &c, 1));
        let h = exp(&element(&g, &c, 2));
        let before = lift(inner(&x, &y))?;
        let after = lift(inner(&lift(ad_group(&h, &x))?, &lift(ad_group(&h, &y))?))?;
        let scale = 1.0 + x.norm() * y.norm();
        check((after - before).abs() <= IDENTITY_TOL * scale, || {
            format!("{}: inner changed from {before} to {after}", g.name())
        })
    })
    .map_err(|e| e.to_string())
}

fn projector(r: &mut TestRunner) -> Result<(), String> {
    let strat = (0..SUBALGEBRAS.len(), coeffs(2 * MAX_DIM));
    r.run(&strat, |(k, c)| {
        let (gname, hname) = SUBALGEBRAS[k];
        let (g, h) = (algebra(gname), algebra(hname));
        let (x, y) = (element(&g, &c, 0), element(&g, &c, 1));
        let px = lift(h.project(&x))?;
        let ppx = lift(h.project(&px))?;
        let idem = (&ppx - &px).norm();
        check(idem <= IDENTITY_TOL * (1.0 + x.norm()), || {
            format!("{hname}: |P(Px) - Px| = {idem:e}")
        })?;
        let lhs = lift(inner(&px, &y))?;
        let rhs = lift(inner(&x, &lift(h.project(&y))?))?;
        check(
            (lhs - rhs).abs() <= IDENTITY_TOL * (1.0 + x.norm() * y.norm()),
            || format!("{hname}: <Px, y> = {lhs}, <x, Py> = {rhs}"),
        )?;
        let residual = h.residual(&px);
        check(residual <= IDENTITY_TOL * (1.0 + x.norm()), || {
            format!("{hname}: Px leaves the subalgebra by {residual:e}")
        })
    })
    .map_err(|e| e.to_string())
}

fn pair(fam: &IntegralFamily, c: &[f64]) -> MomentPair {
    let d = fam.algebra.dim();
    MomentPair::from_coords(&fam.algebra, &c[..2 * d])
}

/// Gradient of `mp -> g(mp) h(mp)` by central differences in the pair coordinates.
fn product_gradient(
    fam: &IntegralFamily,
    gi: usize,
    hi: usize,
    mp: &MomentPair,
) -> geolab::error::Result<MomentPair> {
    let alg = &fam.algebra;
    let base = mp.coords(alg);
    let eps = 1e-5;
    let value = |v: &[f64]| -> geolab::error::Result<f64> {
        let p = MomentPair::from_coords(alg, v);
        Ok(eval_integral(&fam.specs[gi], &p)? * eval_integral(&fam.specs[hi], &p)?)
    };
    let mut grad = vec![0.0; base.len()];
    for (k, gk) in grad.iter_mut().enumerate() {
        let mut up = base.clone();
        let mut down = base.clone();
        up[k] += eps;
        down[k] -= eps;
        *gk = (value(&up)? - value(&down)?) / (2.0 * eps);
    }
    Ok(MomentPair::from_coords(alg, &grad))
}

fn poisson(r: &mut TestRunner) -> Result<(), String> {
    let fams: Vec<IntegralFamily> = FAMILIES
        .iter()
        .map(|f| build_family(f).expect("registered"))
        .collect();
    let strat = (
        0..fams.len(),
        any::<(u8, u8, u8)>(),
        prop::collection::vec(-1.0..1.0f64, 2 * MAX_DIM),
    );
    r.run(&strat, |(fi, (a, b, d), c)| {
        let fam = &fams[fi];
        let n = fam.specs.len();
        let (i, j, k) = (a as usize % n, b as usize % n, d as usize % n);
        let (f, g, h) = (&fam.specs[i], &fam.specs[j], &fam.specs[k]);
        let mp = pair(fam, &c);
        let fg = lift(lie_poisson_bracket(f, g, &mp))?;
        let gf = lift(lie_poisson_bracket(g, f, &mp))?;
        let scale = (1.0 + fg.abs() + gf.abs()) * (1.0 + mp.norm());
        check((fg + gf).abs() <= IDENTITY_TOL * scale, || {
            format!(
                "{}: {{{},{}}} = {fg}, {{{},{}}} = {gf}",
                fam.name, f.label, g.label, g.label, f.label
            )
        })?;
        // {f, gh} through a differenced gradient of the product
        let grad_f = lift(geolab::integrals::gradient(f, &mp))?;
        let grad_gh = lift(product_gradient(fam, j, k, &mp))?;
        let lhs = mp.left.pairing(&grad_f.left.commutator(&grad_gh.left))
            + mp.right.pairing(&grad_f.right.commutator(&grad_gh.right));
        let gv = lift(eval_integral(g, &mp))?;
        let hv = lift(eval_integral(h, &mp))?;
        let rhs = fg * hv + gv * lift(lie_poisson_bracket(f, h, &mp))?;
        let scale = 1.0 + grad_f.norm() * grad_gh.norm() * mp.norm();
        check((lhs - rhs).abs() <= FD_TOL * scale, || {
            format!(
                "{}: Leibniz for ({}, {}, {}): {lhs} vs {rhs}",
                fam.name, f.label, g.label, h.label
            )
        })
    })
    .map_err(|e| e.to_string())
}

#[derive(Clone, Debug)]
enum RowOp {
    Add { to: usize, from: usize, s: f64 },
    Swap(usize, usize),
    Scale(usize, f64),
}

fn row_op() -> impl Strategy<Value = RowOp> {
    prop_oneof![
        (0..8usize, 0..8usize, -2.0..2.0f64).prop_map(|(to, from, s)| RowOp::Add { to, from, s }),
        (0..8usize, 0..8usize).prop_map(|(a, b)| RowOp::Swap(a, b)),
        (0..8usize, 0.5..2.0f64).prop_map(|(a, s)| RowOp::Scale(a, s)),
    ]
}

fn apply(m: &mut RMatrix, op: &RowOp) {
    let rows = m.nrows();
    match *op {
        RowOp::Add { to, from, s } if to % rows != from % rows => {
            let src = m.row(from % rows).clone_owned();
            let mut dst = m.row_mut(to % rows);
            dst += src * s;
        }
        RowOp::Add { .. } => {}
        RowOp::Swap(a, b) => m.swap_rows(a % rows, b % rows),
        RowOp::Scale(a, s) => m.row_mut(a % rows).scale_mut(s),
    }
}

fn rank_rows(r: &mut TestRunner) -> Result<(), String> {
    let strat = (
        1..8usize,
        1..8usize,
        0..8usize,
        coeffs(128),
        prop::collection::vec(row_op(), 0..6),
    );
    r.run(&strat, |(rows, cols, rank, c, ops)| {
        let rank = rank.min(rows).min(cols);
        let a = RMatrix::from_fn(rows, rank.max(1), |i, j| c[i * 8 + j] * f64::from(u8::from(rank > 0)));
        let b = RMatrix::from_fn(rank.max(1), cols, |i, j| c[64 + i * 8 + j]);
        let mut m = &a * &b;
        let before = numerical_rank(&singular_values(&m), RANK_TOL);
        for op in &ops {
            apply(&mut m, op);
        }
        let after = numerical_rank(&singular_values(&m), RANK_TOL);
        check(before == after && before <= rank, || {
            format!("{rows}x{cols} product of rank <= {rank}: rank {before} before, {after} after {ops:?}")
        })
    })
    .map_err(|e| e.to_string())
}

type Suite = fn(&mut TestRunner) -> Result<(), String>;

pub const SUITES: &[(&str, Suite)] = &[
    ("jacobi", jacobi),
    ("ad_invariance", ad_invariance),
    ("projector", projector),
    ("bracket_antisymmetry_leibniz", poisson),
    ("rank_row_operations", rank_rows),
];

pub fn run_suite(name: &'static str, cases: u32) -> SuiteOutcome {
    let (_, suite) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .expect("known suite");
    let start = Instant::now();
    let failure = suite(&mut runner(cases)).err();
    SuiteOutcome {
        name,
        cases,
        elapsed: start.elapsed(),
        failure,
    }
}

pub fn run_all(cases: u32) -> Vec<SuiteOutcome> {
    SUITES.iter().map(|(n, _)| run_suite(n, cases)).collect()
}
