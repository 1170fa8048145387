//! Geodesics of round and Berger spheres as constrained Hamiltonian systems.
//!
//! Points and momenta live in `R^{2n+2}` with interleaved real and imaginary
//! parts. The Berger Hamiltonian `|p|^2 / 2 + kappa (p . iz)^2 / 2`,
//! `kappa = 1/t^2 - 1`, splits into the round-sphere flow and a rotation of
//! the Hopf fibres; the two commute, and each is advanced exactly.

use crate::algebra::{AlgebraElement, Subalgebra};
use crate::catalog;
use crate::error::{Error, Result};
use crate::flows::{check_steps, record_stride, Trajectory};
use crate::moment::times_i;

/// Residual tolerance for initial data.
pub const SPHERE_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Point `q` and momentum `p` (a covector, identified through the round metric).
#[derive(Clone, Debug, PartialEq)]
pub struct BergerState {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub time: f64,
}

impl BergerState {
    /// Momentum `g_t(v, .)` of a velocity `v`.
    pub fn from_velocity(t: f64, q: Vec<f64>, v: &[f64]) -> Self {
        let iz = times_i(&q);
        let c = (t * t - 1.0) * dot(v, &iz);
        let p = v.iter().zip(&iz).map(|(a, b)| a + c * b).collect();
        Self { q, p, time: 0.0 }
    }

    /// Velocity `p + kappa (p . iz) iz`.
    pub fn velocity(&self, t: f64) -> Vec<f64> {
        let iz = times_i(&self.q);
        let c = kappa(t) * dot(&self.p, &iz);
        self.p.iter().zip(&iz).map(|(a, b)| a + c * b).collect()
    }

    /// `p . iz`, the moment of the Hopf circle.
    pub fn fiber_moment(&self) -> f64 {
        dot(&self.p, &times_i(&self.q))
    }

    pub fn energy(&self, t: f64) -> f64 {
        let j = self.fiber_moment();
        0.5 * dot(&self.p, &self.p) + 0.5 * kappa(t) * j * j
    }

    /// `max(| |q|^2 - 1 |, |p . q|)`.
    pub fn residual(&self) -> f64 {
        (dot(&self.q, &self.q) - 1.0)
            .abs()
            .max(dot(&self.p, &self.q).abs())
    }

    fn check(&self) -> Result<()> {
        if self.q.len() != self.p.len() || !self.q.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                left: self.q.len(),
                right: self.p.len(),
            });
        }
        let r = self.residual();
        if r > SPHERE_TOL {
            return Err(Error::OffManifold { residual: r });
        }
        Ok(())
    }
}

pub fn kappa(t: f64) -> f64 {
    1.0 / (t * t) - 1.0
}

/// Round-sphere step: the RATTLE update with its step length matched to the
/// great-circle speed, followed by projection of position and momentum.
pub(crate) fn round_step(q: &mut [f64], p: &mut [f64], h: f64) {
    let speed = dot(p, p).sqrt();
    if speed == 0.0 {
        return;
    }
    let (s, c) = (h * speed).sin_cos();
    for k in 0..q.len() {
        let (qk, pk) = (q[k], p[k]);
        q[k] = c * qk + s * pk / speed;
        p[k] = -speed * s * qk + c * pk;
    }
    let nq = dot(q, q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);
    let along = dot(p, q);
    p.iter_mut()
        .zip(q.iter())
        .for_each(|(a, b)| *a -= along * b);
}

/// Exact flow of `kappa J^2 / 2`: both `q` and `p` turn by `exp(i kappa J s)`.
fn fiber_rotation(q: &mut [f64], p: &mut [f64], kappa: f64, s: f64) {
    let j = dot(p, &times_i(q));
    let (sn, cs) = (kappa * j * s).sin_cos();
    for v in [q, p] {
        for z in v.chunks_mut(2) {
            let (re, im) = (z[0], z[1]);
            z[0] = cs * re - sn * im;
            z[1] = sn * re + cs * im;
        }
    }
}

/// One Strang step of the Berger flow.
pub fn berger_step(state: &mut BergerState, t: f64, h: f64) {
    let k = kappa(t);
    fiber_rotation(&mut state.q, &mut state.p, k, h / 2.0);
    round_step(&mut state.q, &mut state.p, h);
    fiber_rotation(&mut state.q, &mut state.p, k, h / 2.0);
    state.time += h;
}

/// Moment of the linear `SU(n+1)` action: `sum_b <p, b z> b`.
pub fn unitary_moment(algebra: &Subalgebra, q: &[f64], p: &[f64]) -> AlgebraElement {
    let coeffs: Vec<f64> = algebra
        .basis()
        .iter()
        .map(|b| {
            let field = crate::moment::linear_field(b);
            dot(p, &field(q))
        })
        .collect();
    algebra.from_coords(&coeffs)
}

fn coord_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n / 2)
        .flat_map(|k| [format!("{prefix}{k}_re"), format!("{prefix}{k}_im")])
        .collect()
}

/// Geodesic of the Berger sphere `S^{2n+1}` with fibre scale `t`. Monitors
/// the Hopf moment and the coordinates of the `SU(n+1)` moment.
pub fn integrate_berger_sphere(
    n: usize,
    t: f64,
    s0: &BergerState,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_steps(dt, steps)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidMetric(format!(
            "Berger parameter must be positive, got {t}"
        )));
    }
    if s0.q.len() != 2 * n + 2 {
        return Err(Error::DimensionMismatch {
            left: 2 * n + 2,
            right: s0.q.len(),
        });
    }
    s0.check()?;
    let alg = catalog::su(n + 1);
    let mut labels = coord_labels("z", s0.q.len());
    labels.extend(coord_labels("p", s0.p.len()));
    let mut monitor_labels = vec!["noether".to_string()];
    monitor_labels.extend((0..alg.dim()).map(|k| format!("moment{k}")));
    let mut traj = Trajectory::new(format!("berger(n={n}, t={t})"), labels, monitor_labels);
    let record = |traj: &mut Trajectory, s: &BergerState| {
        let mut row = s.q.clone();
        row.extend_from_slice(&s.p);
        let mut mon = vec![s.fiber_moment()];
        mon.extend(alg.coords(&unitary_moment(&alg, &s.q, &s.p)).iter());
        traj.push(s.time, row, s.energy(t), mon);
        traj.note_residual(s.residual());
    };
    let stride = record_stride(steps, 20_000);
    let mut s = s0.clone();
    record(&mut traj, &s);
    for k in 1..=steps {
        berger_step(&mut s, t, dt);
        if k % stride == 0 || k == steps {
            record(&mut traj, &s);
        }
    }
    Ok(traj)
}

/// Geodesic of the round unit sphere in `R^m`, monitoring all angular
/// momenta `q_i p_j - q_j p_i`.
pub fn integrate_round_sphere(q0: &[f64], p0: &[f64], dt: f64, steps: usize) -> Result<Trajectory> {
    check_steps(dt, steps)?;
    let m = q0.len();
    if p0.len() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: p0.len(),
        });
    }
    let residual = (dot(q0, q0) - 1.0).abs().max(dot(q0, p0).abs());
    if residual > SPHERE_TOL {
        return Err(Error::OffManifold { residual });
    }
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let mut labels: Vec<String> = (0..m).map(|k| format!("q{k}")).collect();
    labels.extend((0..m).map(|k| format!("p{k}")));
    let mon_labels = pairs.iter().map(|(i, j)| format!("l{i}{j}")).collect();
    let mut traj = Trajectory::new(format!("round_sphere({})", m - 1), labels, mon_labels);
    let (mut q, mut p) = (q0.to_vec(), p0.to_vec());
    let record = |traj: &mut Trajectory, time: f64, q: &[f64], p: &[f64]| {
        let mut row = q.to_vec();
        row.extend_from_slice(p);
        let mon = pairs
            .iter()
            .map(|&(i, j)| q[i] * p[j] - q[j] * p[i])
            .collect();
        traj.push(time, row, 0.5 * dot(p, p), mon);
        traj.note_residual((dot(q, q) - 1.0).abs().max(dot(q, p).abs()));
    };
    let stride = record_stride(steps, 20_000);
    record(&mut traj, 0.0, &q, &p);
    for k in 1..=steps {
        round_step(&mut q, &mut p, dt);
        if k % stride == 0 || k == steps {
            record(&mut traj, k as f64 * dt, &q, &p);
        }
    }
    Ok(traj)
}

/// Random unit point and tangent momentum of unit round length.
pub fn random_sphere_state(dim: usize, rng: &mut crate::sampling::LabRng) -> (Vec<f64>, Vec<f64>) {
    let mut q = crate::sampling::gaussian_vec(rng, dim);
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);
    let mut p = crate::sampling::gaussian_vec(rng, dim);
    let along = dot(&p, &q);
    p.iter_mut().zip(&q).for_each(|(a, b)| *a -= along * b);
    let np = dot(&p, &p).sqrt();
    p.iter_mut().for_each(|x| *x /= np);
    (q, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::rng_from_seed;

    #[test]
    fn round_case_returns_after_full_period() {
        let mut rng = rng_from_seed(1);
        let (q, p) = random_sphere_state(6, &mut rng);
        let s0 = BergerState {
            q: q.clone(),
            p,
            time: 0.0,
        };
        let dt = 1e-3;
        let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
        let mut s = s0.clone();
        for _ in 0..steps {
            berger_step(&mut s, 1.0, dt);
        }
        // remaining fraction of the period
        let rest = 2.0 * std::f64::consts::PI - steps as f64 * dt;
        berger_step(&mut s, 1.0, rest);
        let err =
            s.q.iter()
                .zip(&q)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn hopf_fibre_is_a_geodesic() {
        let mut rng = rng_from_seed(2);
        let (q, _) = random_sphere_state(6, &mut rng);
        for t in [0.5, 1.0, 2.0] {
            let v = times_i(&q);
            let s0 = BergerState::from_velocity(t, q.clone(), &v);
            let traj = integrate_berger_sphere(2, t, &s0, 1e-3, 3000).unwrap();
            // the orbit stays in the complex line through q
            for row in traj.states.iter().step_by(100) {
                let z = &row[..6];
                let re = dot(z, &q);
                let im = dot(z, &times_i(&q));
                assert!((re * re + im * im - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn velocity_and_momentum_are_inverse() {
        let mut rng = rng_from_seed(3);
        let (q, v) = random_sphere_state(6, &mut rng);
        let s = BergerState::from_velocity(0.5, q, &v);
        let back = s.velocity(0.5);
        assert!(back.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn berger_conservation() {
        let mut rng = rng_from_seed(4);
        for t in [0.5, 1.0, 2.0] {
            let (q, p) = random_sphere_state(6, &mut rng);
            let s0 = BergerState { q, p, time: 0.0 };
            let traj = integrate_berger_sphere(2, t, &s0, 1e-3, 10_000).unwrap();
            let s = traj.summary();
            assert!(s.energy.max_rel < 1e-8);
            for m in &s.monitors {
                assert!(m.max_rel < 1e-8, "{m:?}");
            }
            assert!(s.constraint_residual < 1e-10);
        }
    }

    #[test]
    fn off_sphere_data_is_rejected() {
        let s0 = BergerState {
            q: vec![1.1, 0.0, 0.0, 0.0],
            p: vec![0.0, 1.0, 0.0, 0.0],
            time: 0.0,
        };
        assert!(matches!(
            integrate_berger_sphere(1, 1.0, &s0, 1e-3, 10),
            Err(Error::OffManifold { .. })
        ));
        let ok = BergerState {
            q: vec![1.0, 0.0, 0.0, 0.0],
            p: vec![0.0, 1.0, 0.0, 0.0],
            time: 0.0,
        };
        assert!(integrate_berger_sphere(1, 0.0, &ok, 1e-3, 10).is_err());
        assert!(integrate_berger_sphere(2, 1.0, &ok, 1e-3, 10).is_err());
    }

    #[test]
    fn round_two_sphere_momenta() {
        let mut rng = rng_from_seed(5);
        let (q, p) = random_sphere_state(3, &mut rng);
        let traj = integrate_round_sphere(&q, &p, 1e-3, 10_000).unwrap();
        for m in traj.summary().monitors {
            assert!(m.max_abs < 1e-12);
        }
    }
}
