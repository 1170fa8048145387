//! Geodesics of bi-invariant and left-invariant metrics on matrix groups, in
//! the body frame.

use serde::{Deserialize, Serialize};

use crate::algebra::{exp, AlgebraElement, CMatrix, GroupElement, Subalgebra};
use crate::error::{Error, Result};
use crate::flows::{check_steps, record_stride, Trajectory};
use crate::linalg::RMatrix;
use crate::moment::MomentPair;

/// Foot point and body-frame velocity (`dg/dt = g X`).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupState {
    pub position: GroupElement,
    pub velocity: AlgebraElement,
    pub time: f64,
}

/// `g0 exp(t X)` with constant body velocity `X`.
pub fn geodesic_biinvariant(g0: &GroupElement, x: &AlgebraElement, t: f64) -> GroupState {
    GroupState {
        position: g0.compose(&exp(&x.scale(t))),
        velocity: x.clone(),
        time: t,
    }
}

/// Moment of the `G x G` action at the covector with body momentum `m`:
/// `(Ad_g m, -m)`.
pub fn lifted_moment(g: &GroupElement, m: &AlgebraElement) -> MomentPair {
    MomentPair {
        left: g.conjugate_element(m),
        right: m.scale(-1.0),
    }
}

/// Symmetric positive-definite inertia operator `X -> M` in the orthonormal
/// basis of an algebra.
#[derive(Clone, Debug)]
pub struct Inertia {
    algebra: Subalgebra,
    matrix: RMatrix,
    inverse: RMatrix,
}

impl Inertia {
    pub fn new(algebra: Subalgebra, matrix: RMatrix) -> Result<Self> {
        let d = algebra.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                left: d,
                right: matrix.nrows(),
            });
        }
        let asym = (&matrix - matrix.transpose()).norm();
        if asym > 1e-12 * matrix.norm().max(1.0) {
            return Err(Error::InvalidMetric(format!(
                "inertia is not symmetric (residual {asym:e})"
            )));
        }
        let chol = nalgebra::Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::InvalidMetric("inertia is not positive definite".into()))?;
        let inverse = chol.inverse();
        Ok(Self {
            algebra,
            matrix,
            inverse,
        })
    }

    pub fn identity(algebra: Subalgebra) -> Self {
        let d = algebra.dim();
        Self::new(algebra, RMatrix::identity(d, d)).expect("identity is SPD")
    }

    pub fn diagonal(algebra: Subalgebra, values: &[f64]) -> Result<Self> {
        if values.len() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                left: algebra.dim(),
                right: values.len(),
            });
        }
        let m = RMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
        Self::new(algebra, m)
    }

    pub fn algebra(&self) -> &Subalgebra {
        &self.algebra
    }

    fn map(&self, op: &RMatrix, x: &AlgebraElement) -> AlgebraElement {
        let c = self.algebra.coords(x);
        let y = op * c;
        self.algebra.from_coords(y.as_slice())
    }

    /// `M = I(X)`.
    pub fn apply(&self, x: &AlgebraElement) -> AlgebraElement {
        self.map(&self.matrix, x)
    }

    /// `X = I^{-1}(M)`.
    pub fn solve(&self, m: &AlgebraElement) -> AlgebraElement {
        self.map(&self.inverse, m)
    }

    /// `<I^{-1} M, M> / 2`.
    pub fn energy(&self, m: &AlgebraElement) -> f64 {
        0.5 * self.solve(m).pairing(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    ImplicitMidpoint,
    /// Triple-jump composition of three midpoint steps; fourth order, still
    /// symmetric and exact on quadratic invariants.
    MidpointFourth,
    Rk4,
}

const MIDPOINT_MAX_ITER: usize = 50;

fn midpoint_step(
    inertia: &Inertia,
    g: &GroupElement,
    m: &AlgebraElement,
    h: f64,
) -> Result<(GroupElement, AlgebraElement)> {
    let rhs = |m: &AlgebraElement| m.commutator(&inertia.solve(m));
    let tol = 1e-15 * (1.0 + m.norm());
    let mut m1 = m + &rhs(m).scale(h);
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid = (m + &m1).scale(0.5);
        let next = m + &rhs(&mid).scale(h);
        let delta = (&next - &m1).norm();
        m1 = next;
        if !m1
            .matrix()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            break;
        }
        if delta <= tol {
            let mid = (m + &m1).scale(0.5);
            let g1 = g.compose(&exp(&inertia.solve(&mid).scale(h)));
            return Ok((g1, m1));
        }
    }
    let mid = (m + &m1).scale(0.5);
    let residual = (&(m + &rhs(&mid).scale(h)) - &m1).norm();
    Err(Error::NoConvergence {
        iterations: MIDPOINT_MAX_ITER,
        residual,
    })
}

/// One step of the Euler-Arnold system `dM/dt = [M, X]`, `dg/dt = g X`,
/// `M = I(X)`, on `(g, M)`.
pub fn euler_arnold_step(
    inertia: &Inertia,
    g: &GroupElement,
    m: &AlgebraElement,
    h: f64,
    integrator: Integrator,
) -> Result<(GroupElement, AlgebraElement)> {
    let rhs = |m: &AlgebraElement| m.commutator(&inertia.solve(m));
    match integrator {
        Integrator::ImplicitMidpoint => midpoint_step(inertia, g, m, h),
        Integrator::MidpointFourth => {
            let cube = 2f64.cbrt();
            let outer = 1.0 / (2.0 - cube);
            let inner = -cube * outer;
            let (g1, m1) = midpoint_step(inertia, g, m, outer * h)?;
            let (g2, m2) = midpoint_step(inertia, &g1, &m1, inner * h)?;
            midpoint_step(inertia, &g2, &m2, outer * h)
        }
        Integrator::Rk4 => {
            let gdot = |g: &CMatrix, m: &AlgebraElement| g * inertia.solve(m).matrix();
            let g0 = g.matrix();
            let k1m = rhs(m);
            let k1g = gdot(g0, m);
            let m2 = m + &k1m.scale(h / 2.0);
            let g2 = g0 + &k1g * num_complex::Complex64::new(h / 2.0, 0.0);
            let k2m = rhs(&m2);
            let k2g = gdot(&g2, &m2);
            let m3 = m + &k2m.scale(h / 2.0);
            let g3 = g0 + &k2g * num_complex::Complex64::new(h / 2.0, 0.0);
            let k3m = rhs(&m3);
            let k3g = gdot(&g3, &m3);
            let m4 = m + &k3m.scale(h);
            let g4 = g0 + &k3g * num_complex::Complex64::new(h, 0.0);
            let k4m = rhs(&m4);
            let k4g = gdot(&g4, &m4);
            let sum_m = &(&k1m + &k2m.scale(2.0)) + &(&k3m.scale(2.0) + &k4m);
            let m1 = m + &sum_m.scale(h / 6.0);
            let sum_g = &k1g
                + &k2g * num_complex::Complex64::new(2.0, 0.0)
                + &k3g * num_complex::Complex64::new(2.0, 0.0)
                + &k4g;
            let g1 = g0 + sum_g * num_complex::Complex64::new(h / 6.0, 0.0);
            Ok((GroupElement::from_matrix_unchecked(g1), m1))
        }
    }
}

fn group_state_labels(n: usize, d: usize) -> Vec<String> {
    let mut labels = Vec::with_capacity(2 * n * n + d);
    for i in 0..n {
        for j in 0..n {
            labels.push(format!("g{i}{j}_re"));
            labels.push(format!("g{i}{j}_im"));
        }
    }
    labels.extend((0..d).map(|k| format!("m{k}")));
    labels
}

fn group_state_row(g: &GroupElement, m_coords: &[f64]) -> Vec<f64> {
    let n = g.dim();
    let mut row = Vec::with_capacity(2 * n * n + m_coords.len());
    for i in 0..n {
        for j in 0..n {
            let z = g.matrix()[(i, j)];
            row.push(z.re);
            row.push(z.im);
        }
    }
    row.extend_from_slice(m_coords);
    row
}

/// Integrates the Euler-Arnold flow from `s0`. Monitors `<M, M>` and the
/// coordinates of the spatial momentum `Ad_g M`.
pub fn integrate_euler_arnold(
    inertia: &Inertia,
    s0: &GroupState,
    dt: f64,
    steps: usize,
    integrator: Integrator,
) -> Result<Trajectory> {
    check_steps(dt, steps)?;
    let g_alg = inertia.algebra();
    if s0.position.dim() != g_alg.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: g_alg.ambient_dim(),
            right: s0.position.dim(),
        });
    }
    let d = g_alg.dim();
    let mut monitor_labels = vec!["casimir".to_string()];
    monitor_labels.extend((0..d).map(|k| format!("spatial{k}")));
    let mut traj = Trajectory::new(
        format!("euler_arnold({})", g_alg.name()),
        group_state_labels(g_alg.ambient_dim(), d),
        monitor_labels,
    );
    let stride = record_stride(steps, 20_000);
    let mut g = s0.position.clone();
    let mut m = inertia.apply(&s0.velocity);
    let record = |traj: &mut Trajectory, t: f64, g: &GroupElement, m: &AlgebraElement| {
        let mc: Vec<f64> = g_alg.coords(m).iter().cloned().collect();
        let spatial: Vec<f64> = g_alg
            .coords(&g.conjugate_element(m))
            .iter()
            .cloned()
            .collect();
        let mut mon = vec![m.pairing(m)];
        mon.extend(spatial);
        traj.push(t, group_state_row(g, &mc), inertia.energy(m), mon);
        traj.note_residual(g.unitarity_residual());
    };
    record(&mut traj, s0.time, &g, &m);
    for k in 1..=steps {
        let (g1, m1) = euler_arnold_step(inertia, &g, &m, dt, integrator)?;
        g = g1;
        m = m1;
        if k % stride == 0 || k == steps {
            record(&mut traj, s0.time + k as f64 * dt, &g, &m);
        }
    }
    Ok(traj)
}

/// Canonical bracket on `T*G = G x g` in the left trivialisation,
/// `{F, H} = <d_g F, dH/dM> - <d_g H, dF/dM> - <M, [dF/dM, dH/dM]>`, with all
/// derivatives by central differences of step `h`.
pub fn canonical_bracket(
    algebra: &Subalgebra,
    f: &dyn Fn(&GroupElement, &AlgebraElement) -> f64,
    h_fn: &dyn Fn(&GroupElement, &AlgebraElement) -> f64,
    g: &GroupElement,
    m: &AlgebraElement,
    h: f64,
) -> f64 {
    let grads = |func: &dyn Fn(&GroupElement, &AlgebraElement) -> f64| {
        let mut dg = Vec::with_capacity(algebra.dim());
        let mut dm = Vec::with_capacity(algebra.dim());
        for b in algebra.basis() {
            let plus = g.compose(&exp(&b.scale(h)));
            let minus = g.compose(&exp(&b.scale(-h)));
            dg.push((func(&plus, m) - func(&minus, m)) / (2.0 * h));
            dm.push((func(g, &(m + &b.scale(h))) - func(g, &(m - &b.scale(h)))) / (2.0 * h));
        }
        (dg, dm)
    };
    let (fg, fm) = grads(f);
    let (hg, hm) = grads(h_fn);
    let canonical: f64 = (0..algebra.dim())
        .map(|k| fg[k] * hm[k] - hg[k] * fm[k])
        .sum();
    let df = algebra.from_coords(&fm);
    let dh = algebra.from_coords(&hm);
    canonical - m.pairing(&df.commutator(&dh))
}
