//! Quotient geodesics realised upstairs as horizontal geodesics of the
//! total space, with the descended integrals monitored along the way.

use crate::algebra::{AlgebraElement, GroupElement, Subalgebra};
use crate::error::{Error, Result};
use crate::flows::group::{geodesic_biinvariant, lifted_moment, GroupState};
use crate::flows::revolution::{rk4_step, Profile, RevolutionState};
use crate::flows::sphere::{
    berger_step, random_sphere_state, round_step, unitary_moment, BergerState, SPHERE_TOL,
};
use crate::flows::{check_steps, record_stride, Trajectory};
use crate::integrals::IntegralFamily;
use crate::moment::{u_pairings, BiquotientAction, MomentPair};

/// Horizontality tolerance for initial data.
pub const HORIZONTAL_TOL: f64 = 1e-10;
/// Largest horizontality drift tolerated along a quotient flow.
pub const HORIZONTAL_DRIFT_TOL: f64 = 1e-6;

/// Total space and symmetry of a quotient flow.
#[derive(Clone, Debug)]
pub enum QuotientKind {
    /// `G` with its bi-invariant metric modulo `U ⊂ G x G`.
    Biquotient {
        action: BiquotientAction,
        family: IntegralFamily,
    },
    /// `G x S^2` (bi-invariant times round) modulo the circle
    /// `(g, q) -> (g exp(s xi), R_s q)`, `R_s` the rotation about the last axis.
    GroupTimesSphere {
        algebra: Subalgebra,
        xi: AlgebraElement,
    },
    /// Berger sphere `S^{2n+1}` times the surface `dr^2 + f(r)^2 dtheta^2`
    /// modulo the diagonal circle `(z, theta) -> (e^{is} z, theta + s)`.
    DiskBundle {
        n: usize,
        t: f64,
        profile: Profile,
        family: IntegralFamily,
    },
}

/// Initial data matching a [`QuotientKind`]. Sphere points and momenta are
/// real coordinate vectors.
#[derive(Clone, Debug)]
pub enum QuotientState {
    Group(GroupState),
    GroupSphere {
        group: GroupState,
        q: Vec<f64>,
        p: Vec<f64>,
    },
    DiskBundle {
        sphere: BergerState,
        surface: RevolutionState,
    },
}

/// Body velocities `X` with `(Ad_g X, -X) ⊥ u` are the complement of
/// `{Ad_g^{-1} a - b : (a, b) ∈ u}`; returns the projection of `x` onto it.
pub fn make_horizontal(
    act: &BiquotientAction,
    g0: &GroupElement,
    x: &AlgebraElement,
) -> AlgebraElement {
    let inv = g0.inverse();
    let mut ws: Vec<AlgebraElement> = Vec::new();
    for u in &act.u_basis {
        let mut w = &inv.conjugate_element(&u.left) - &u.right;
        for o in &ws {
            w = &w - &o.scale(w.pairing(o));
        }
        let n = w.norm();
        if n > 1e-12 {
            ws.push(w.scale(1.0 / n));
        }
    }
    let mut out = x.clone();
    for w in &ws {
        out = &out - &w.scale(out.pairing(w));
    }
    out
}

fn worst(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}

fn mismatch(kind: &str) -> Error {
    Error::InvalidInput(format!("initial state does not match a {kind} quotient"))
}

/// Samples the horizontal geodesic `g0 exp(tX)` at `k dt` and monitors every
/// spec of `fam` on its moment, plus the largest `u`-pairing.
pub fn horizontal_geodesic(
    act: &BiquotientAction,
    fam: &IntegralFamily,
    g0: &GroupElement,
    x: &AlgebraElement,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_steps(dt, steps)?;
    let phi0 = lifted_moment(g0, x);
    let h0 = worst(&u_pairings(&phi0, act));
    if h0 > HORIZONTAL_TOL * x.norm().max(1.0) {
        return Err(Error::NotHorizontal { residual: h0 });
    }
    let g_alg = &act.algebra;
    let mut monitor_labels: Vec<String> = fam.labels().iter().map(|s| s.to_string()).collect();
    monitor_labels.push("u_pairing".into());
    let mut traj = Trajectory::new(
        format!("horizontal_geodesic({})", act.name),
        (0..g_alg.dim()).map(|k| format!("x{k}")).collect(),
        monitor_labels,
    );
    let xc: Vec<f64> = g_alg.coords(x).iter().cloned().collect();
    let energy = 0.5 * x.pairing(x);
    let stride = record_stride(steps, 20_000);
    for k in 0..=steps {
        if k % stride != 0 && k != steps {
            continue;
        }
        let t = k as f64 * dt;
        let s = geodesic_biinvariant(g0, x, t);
        let phi = lifted_moment(&s.position, &s.velocity);
        let hz = worst(&u_pairings(&phi, act));
        if hz > HORIZONTAL_DRIFT_TOL {
            return Err(Error::NotHorizontal { residual: hz });
        }
        let mut mon = fam.values(&phi)?;
        mon.push(hz);
        traj.push(t, xc.clone(), energy, mon);
        traj.note_residual(s.position.unitarity_residual().max(hz));
    }
    Ok(traj)
}

fn axis_moment(q: &[f64], p: &[f64]) -> f64 {
    q[0] * p[1] - q[1] * p[0]
}

fn group_times_sphere(
    algebra: &Subalgebra,
    xi: &AlgebraElement,
    group: &GroupState,
    q0: &[f64],
    p0: &[f64],
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    if q0.len() != 3 || p0.len() != 3 {
        return Err(Error::DimensionMismatch {
            left: 3,
            right: q0.len().max(p0.len()),
        });
    }
    let x = &group.velocity;
    let pairing = |q: &[f64], p: &[f64]| x.pairing(xi) + axis_moment(q, p);
    let h0 = pairing(q0, p0).abs();
    if h0 > HORIZONTAL_TOL * x.norm().max(1.0) {
        return Err(Error::NotHorizontal { residual: h0 });
    }
    let d = algebra.dim();
    let mut monitor_labels: Vec<String> = (0..d).map(|k| format!("left{k}")).collect();
    monitor_labels.push("clairaut".into());
    monitor_labels.push("u_pairing".into());
    let mut state_labels: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
    state_labels.extend(
        ["q0", "q1", "q2", "p0", "p1", "p2"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut traj = Trajectory::new("group_times_sphere", state_labels, monitor_labels);
    let xc: Vec<f64> = algebra.coords(x).iter().cloned().collect();
    let (mut q, mut p) = (q0.to_vec(), p0.to_vec());
    let stride = record_stride(steps, 20_000);
    for k in 0..=steps {
        if k > 0 {
            round_step(&mut q, &mut p, dt);
        }
        if k % stride != 0 && k != steps {
            continue;
        }
        let t = k as f64 * dt;
        let s = geodesic_biinvariant(&group.position, x, t);
        let left = s.position.conjugate_element(x);
        let hz = pairing(&q, &p);
        if hz.abs() > HORIZONTAL_DRIFT_TOL {
            return Err(Error::NotHorizontal { residual: hz.abs() });
        }
        let mut mon: Vec<f64> = algebra.coords(&left).iter().cloned().collect();
        mon.push(axis_moment(&q, &p));
        mon.push(hz);
        let mut row = xc.clone();
        row.extend_from_slice(&q);
        row.extend_from_slice(&p);
        let energy = 0.5 * (x.pairing(x) + p.iter().map(|v| v * v).sum::<f64>());
        traj.push(t, row, energy, mon);
        let sphere_res = (q.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        traj.note_residual(s.position.unitarity_residual().max(sphere_res));
    }
    Ok(traj)
}

/// Disk-bundle chart shared by the plain quotient flow and the glued flow.
#[derive(Clone, Debug)]
pub(crate) struct DiskChart<'a> {
    pub n: usize,
    pub t: f64,
    pub profile: &'a Profile,
    pub family: &'a IntegralFamily,
    pub algebra: Subalgebra,
}

impl<'a> DiskChart<'a> {
    pub fn new(n: usize, t: f64, profile: &'a Profile, family: &'a IntegralFamily) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidMetric(format!(
                "fibre scale must be positive, got {t}"
            )));
        }
        if family.algebra.ambient_dim() != n + 1 {
            return Err(Error::DimensionMismatch {
                left: n + 1,
                right: family.algebra.ambient_dim(),
            });
        }
        Ok(Self {
            n,
            t,
            profile,
            family,
            algebra: crate::catalog::su(n + 1),
        })
    }

    pub fn state_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for prefix in ["z", "p"] {
            for k in 0..=self.n {
                out.push(format!("{prefix}{k}_re"));
                out.push(format!("{prefix}{k}_im"));
            }
        }
        out.extend(
            ["r", "theta", "rdot", "thetadot"]
                .iter()
                .map(|s| s.to_string()),
        );
        out
    }

    pub fn monitor_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.family.labels().iter().map(|s| s.to_string()).collect();
        out.extend(
            [
                "fiber",
                "fiber_sq",
                "clairaut",
                "revolution_energy",
                "u_pairing",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        out
    }

    /// `J + f^2 theta'`, the pairing with the diagonal circle.
    pub fn pairing(&self, sphere: &BergerState, surface: &RevolutionState) -> f64 {
        sphere.fiber_moment() + surface.clairaut(self.profile)
    }

    pub fn check_start(&self, sphere: &BergerState, surface: &RevolutionState) -> Result<()> {
        if sphere.q.len() != 2 * self.n + 2 || sphere.p.len() != sphere.q.len() {
            return Err(Error::DimensionMismatch {
                left: 2 * self.n + 2,
                right: sphere.q.len(),
            });
        }
        let r = sphere.residual();
        if r > SPHERE_TOL {
            return Err(Error::OffManifold { residual: r });
        }
        if !self.profile.contains(surface.r) {
            return Err(Error::InvalidInput(format!(
                "initial radius {} outside the domain of {}",
                surface.r, self.profile.name
            )));
        }
        let h = self.pairing(sphere, surface).abs();
        if h > HORIZONTAL_TOL * (1.0 + sphere.fiber_moment().abs()) {
            return Err(Error::NotHorizontal { residual: h });
        }
        Ok(())
    }

    /// The two factors do not interact upstairs, so each advances on its own.
    pub fn step(&self, sphere: &mut BergerState, surface: &mut RevolutionState, h: f64) {
        berger_step(sphere, self.t, h);
        *surface = rk4_step(self.profile, surface, h);
    }

    pub fn moment(&self, sphere: &BergerState) -> MomentPair {
        let mu = unitary_moment(&self.algebra, &sphere.q, &sphere.p);
        MomentPair {
            left: mu,
            right: AlgebraElement::zeros(self.n + 1),
        }
    }

    pub fn monitors(&self, sphere: &BergerState, surface: &RevolutionState) -> Result<Vec<f64>> {
        let mut out = self.family.values(&self.moment(sphere))?;
        let j = sphere.fiber_moment();
        out.push(j);
        out.push(j * j);
        out.push(surface.clairaut(self.profile));
        out.push(surface.energy(self.profile));
        out.push(self.pairing(sphere, surface));
        Ok(out)
    }

    pub fn energy(&self, sphere: &BergerState, surface: &RevolutionState) -> f64 {
        sphere.energy(self.t) + surface.energy(self.profile)
    }

    pub fn row(&self, sphere: &BergerState, surface: &RevolutionState) -> Vec<f64> {
        let mut row = sphere.q.clone();
        row.extend_from_slice(&sphere.p);
        row.extend([surface.r, surface.theta, surface.rdot, surface.thetadot]);
        row
    }

    pub fn record(
        &self,
        traj: &mut Trajectory,
        sphere: &BergerState,
        surface: &RevolutionState,
    ) -> Result<()> {
        let mon = self.monitors(sphere, surface)?;
        let hz = mon.last().copied().unwrap_or(0.0).abs();
        if hz > HORIZONTAL_DRIFT_TOL {
            return Err(Error::NotHorizontal { residual: hz });
        }
        traj.push(
            surface.time,
            self.row(sphere, surface),
            self.energy(sphere, surface),
            mon,
        );
        traj.note_residual(sphere.residual().max(hz));
        Ok(())
    }
}

fn disk_bundle(
    chart: &DiskChart<'_>,
    sphere: &BergerState,
    surface: &RevolutionState,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    chart.check_start(sphere, surface)?;
    let mut traj = Trajectory::new(
        format!(
            "disk_bundle(n={}, t={}, {})",
            chart.n, chart.t, chart.profile.name
        ),
        chart.state_labels(),
        chart.monitor_labels(),
    );
    let (mut s, mut r) = (sphere.clone(), *surface);
    s.time = r.time;
    chart.record(&mut traj, &s, &r)?;
    let stride = record_stride(steps, 20_000);
    for k in 1..=steps {
        let (prev_s, prev_r) = (s.clone(), r);
        chart.step(&mut s, &mut r, dt);
        if !chart.profile.contains(r.r) || !r.r.is_finite() {
            traj.truncated = Some(format!("left the chart at t = {:.6}", r.time));
            if traj.times.last().is_some_and(|&t| prev_r.time > t) {
                chart.record(&mut traj, &prev_s, &prev_r)?;
            }
            break;
        }
        if k % stride == 0 || k == steps {
            chart.record(&mut traj, &s, &r)?;
        }
    }
    Ok(traj)
}

/// Integrates a quotient flow upstairs from horizontal initial data.
pub fn integrate_quotient(
    kind: &QuotientKind,
    s0: &QuotientState,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_steps(dt, steps)?;
    match (kind, s0) {
        (QuotientKind::Biquotient { action, family }, QuotientState::Group(g)) => {
            horizontal_geodesic(action, family, &g.position, &g.velocity, dt, steps)
        }
        (QuotientKind::Biquotient { .. }, _) => Err(mismatch("biquotient")),
        (
            QuotientKind::GroupTimesSphere { algebra, xi },
            QuotientState::GroupSphere { group, q, p },
        ) => group_times_sphere(algebra, xi, group, q, p, dt, steps),
        (QuotientKind::GroupTimesSphere { .. }, _) => Err(mismatch("group times sphere")),
        (
            QuotientKind::DiskBundle {
                n,
                t,
                profile,
                family,
            },
            QuotientState::DiskBundle { sphere, surface },
        ) => disk_bundle(
            &DiskChart::new(*n, *t, profile, family)?,
            sphere,
            surface,
            dt,
            steps,
        ),
        (QuotientKind::DiskBundle { .. }, _) => Err(mismatch("disk bundle")),
    }
}

/// `SU(2) x S^2` modulo the circle generated by `diag(i, -i)`.
pub fn su2_times_sphere() -> QuotientKind {
    QuotientKind::GroupTimesSphere {
        algebra: crate::catalog::su(2),
        xi: AlgebraElement::imaginary_diagonal(&[1.0, -1.0]),
    }
}

/// Horizontal disk-bundle data from a sphere state and the surface's `(r, r')`.
pub fn horizontal_disk_state(
    profile: &Profile,
    sphere: BergerState,
    r: f64,
    rdot: f64,
) -> QuotientState {
    let fr = profile.value(r);
    let surface = RevolutionState {
        r,
        theta: 0.0,
        rdot,
        thetadot: -sphere.fiber_moment() / (fr * fr),
        time: 0.0,
    };
    QuotientState::DiskBundle { sphere, surface }
}

/// Random horizontal initial data for a [`QuotientKind`].
pub fn random_horizontal_state(kind: &QuotientKind, seed: u64, index: u64) -> QuotientState {
    use crate::sampling::{random_element, random_unitary, rng_for_sample};
    use rand::Rng;
    let mut rng = rng_for_sample(seed, index);
    match kind {
        QuotientKind::Biquotient { action, .. } => {
            let g0 = random_unitary(&action.algebra, &mut rng);
            let x = random_element(&action.algebra, &mut rng);
            let x = make_horizontal(action, &g0, &x);
            let n = x.norm().max(f64::MIN_POSITIVE);
            QuotientState::Group(GroupState {
                position: g0,
                velocity: x.scale(1.0 / n),
                time: 0.0,
            })
        }
        QuotientKind::GroupTimesSphere { algebra, xi } => {
            let g0 = random_unitary(algebra, &mut rng);
            let x = random_element(algebra, &mut rng);
            let (q, p) = random_sphere_state(3, &mut rng);
            // replace the xi component of x by the one cancelling the sphere's axial moment
            let xi_n = xi.norm();
            let unit = xi.scale(1.0 / xi_n);
            let x_perp = &x - &unit.scale(x.pairing(&unit));
            let x = &x_perp + &unit.scale(-axis_moment(&q, &p) / xi_n);
            QuotientState::GroupSphere {
                group: GroupState {
                    position: g0,
                    velocity: x,
                    time: 0.0,
                },
                q,
                p,
            }
        }
        QuotientKind::DiskBundle { n, profile, .. } => {
            let (q, p) = random_sphere_state(2 * n + 2, &mut rng);
            let r = rng.random_range(1.0..4.0);
            let rdot = rng.random_range(-1.0..1.0);
            horizontal_disk_state(profile, BergerState { q, p, time: 0.0 }, r, rdot)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::{block_trace_family, eschenburg_family, gromoll_meyer_family};

    fn group(s: &QuotientState) -> &GroupState {
        match s {
            QuotientState::Group(g) => g,
            _ => panic!("expected a group state"),
        }
    }

    #[test]
    fn eschenburg_integrals_constant_along_horizontal_geodesics() {
        let kind = QuotientKind::Biquotient {
            action: BiquotientAction::eschenburg(1),
            family: eschenburg_family(),
        };
        for k in 0..3 {
            let s0 = random_horizontal_state(&kind, 7, k);
            let traj = integrate_quotient(&kind, &s0, 1e-2, 1000).unwrap();
            for m in &traj.summary().monitors {
                assert!(m.max_rel < 1e-10, "{m:?}");
            }
        }
    }

    #[test]
    fn gromoll_meyer_integrals_constant() {
        let kind = QuotientKind::Biquotient {
            action: BiquotientAction::gromoll_meyer(),
            family: gromoll_meyer_family(),
        };
        let s0 = random_horizontal_state(&kind, 8, 0);
        let traj = integrate_quotient(&kind, &s0, 1e-2, 1000).unwrap();
        assert!(traj.summary().worst() < 1e-10);
    }

    #[test]
    fn non_horizontal_start_is_rejected() {
        let act = BiquotientAction::eschenburg(1);
        let kind = QuotientKind::Biquotient {
            action: act.clone(),
            family: eschenburg_family(),
        };
        // a left generator of u at the identity pairs nontrivially with u
        let s0 = QuotientState::Group(GroupState {
            position: GroupElement::identity(3),
            velocity: act.u_basis[0].left.clone(),
            time: 0.0,
        });
        assert!(matches!(
            integrate_quotient(&kind, &s0, 1e-2, 10),
            Err(Error::NotHorizontal { .. })
        ));
        let other = random_horizontal_state(&su2_times_sphere(), 1, 0);
        assert!(integrate_quotient(&kind, &other, 1e-2, 10).is_err());
    }

    #[test]
    fn group_times_sphere_monitors() {
        let kind = su2_times_sphere();
        for k in 0..3 {
            let s0 = random_horizontal_state(&kind, 9, k);
            let traj = integrate_quotient(&kind, &s0, 1e-3, 10_000).unwrap();
            let s = traj.summary();
            assert_eq!(s.monitors.len(), 5);
            for m in &s.monitors {
                assert!(m.max_abs < 1e-8, "{m:?}");
            }
        }
    }

    #[test]
    fn make_horizontal_is_a_projection() {
        let act = BiquotientAction::gromoll_meyer();
        let mut rng = crate::sampling::rng_from_seed(3);
        let g0 = crate::sampling::random_unitary(&act.algebra, &mut rng);
        let x = crate::sampling::random_element(&act.algebra, &mut rng);
        let h = make_horizontal(&act, &g0, &x);
        assert!(worst(&u_pairings(&lifted_moment(&g0, &h), &act)) < 1e-12);
        assert!((&make_horizontal(&act, &g0, &h) - &h).norm() < 1e-12);
    }

    #[test]
    fn descended_values_are_u_invariant() {
        // moving the foot point along the U orbit leaves every monitored value fixed
        let act = BiquotientAction::eschenburg(2);
        let fam = eschenburg_family();
        let kind = QuotientKind::Biquotient {
            action: act.clone(),
            family: fam.clone(),
        };
        let s0 = random_horizontal_state(&kind, 10, 0);
        let g0 = group(&s0);
        let (a, b) = act.u_exp(0, 0.37);
        let moved = a.compose(&g0.position).compose(&b.inverse());
        let x = b.conjugate_element(&g0.velocity);
        let v0 = fam
            .values(&lifted_moment(&g0.position, &g0.velocity))
            .unwrap();
        let v1 = fam.values(&lifted_moment(&moved, &x)).unwrap();
        for (p, q) in v0.iter().zip(&v1) {
            assert!((p - q).abs() < 1e-10 * p.abs().max(1.0));
        }
    }

    #[test]
    fn disk_bundle_conserves_everything() {
        let kind = QuotientKind::DiskBundle {
            n: 2,
            t: 2.0,
            profile: Profile::glued(2.0).unwrap(),
            family: block_trace_family("berger_chain(2)", 2, false),
        };
        for k in 0..3 {
            let s0 = random_horizontal_state(&kind, 11, k);
            let traj = integrate_quotient(&kind, &s0, 1e-3, 5000).unwrap();
            let s = traj.summary();
            assert!(traj.truncated.is_none());
            assert!(s.energy.max_rel < 1e-8, "{:?}", s.energy);
            for m in &s.monitors {
                assert!(m.max_rel < 1e-8, "{m:?}");
            }
            assert!(traj.constraint_residual < 1e-10);
        }
    }
}
