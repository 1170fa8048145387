//! Geodesics of the metric obtained by gluing two disk bundles over `CP^n`
//! along their product necks. The second chart is reached through complex
//! conjugation of the neck sphere combined with a reflection of the radius.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::quotient::{horizontal_disk_state, DiskChart, QuotientState};
use crate::flows::revolution::{Profile, RevolutionState, PLATEAU_START};
use crate::flows::sphere::{random_sphere_state, BergerState};
use crate::flows::{check_steps, record_stride, Trajectory};
use crate::integrals::{block_trace_family, IntegralFamily};

/// Seam-continuity tolerance, relative to `max(1, |value|)`.
pub const SEAM_TOL: f64 = 1e-8;
/// Time resolution of seam detection.
pub const SEAM_TIME_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluedConfig {
    /// Complex dimension of the base `CP^n`; must be even.
    pub n: usize,
    /// Fibre scale of the Berger sphere and of the plateau, `t > 1`.
    pub t: f64,
    /// Radius of the gluing sphere; must lie inside the plateau.
    pub seam: f64,
}

impl Default for GluedConfig {
    fn default() -> Self {
        Self {
            n: 2,
            t: 2.0,
            seam: 6.5,
        }
    }
}

/// Monitor values just before and just after one chart change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeamEvent {
    pub time: f64,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub jumps: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluedTrajectory {
    pub trajectory: Trajectory,
    pub seams: Vec<SeamEvent>,
    /// Monitors expected to pass the seam unchanged.
    pub continuous: Vec<String>,
    /// Largest relative jump over `continuous` and all seams.
    pub max_continuous_jump: f64,
    pub seam_continuous: bool,
}

impl GluedTrajectory {
    /// Largest absolute jump of one monitor over all seams.
    pub fn max_jump(&self, label: &str) -> Option<f64> {
        let k = self
            .trajectory
            .monitor_labels
            .iter()
            .position(|l| l == label)?;
        Some(self.seams.iter().fold(0.0f64, |a, e| a.max(e.jumps[k])))
    }
}

/// `h_1 .. h_n` unsquared, their squares `h_j_sq`, and the quadratic block traces.
pub fn glued_family(n: usize) -> IntegralFamily {
    let mut fam = block_trace_family(&format!("connected_sum({n})"), n, false);
    let squares: Vec<_> = fam.specs[..n]
        .iter()
        .map(|s| s.clone().squared().with_label(format!("{}_sq", s.label)))
        .collect();
    fam.specs.extend(squares);
    fam
}

/// Labels of the monitors whose seam continuity is checked.
pub fn continuous_labels(n: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=n).map(|j| format!("h{j}_sq")).collect();
    out.extend((n + 1..=2 * n).map(|j| format!("h{j}")));
    out.extend(
        ["fiber_sq", "revolution_energy", "u_pairing"]
            .iter()
            .map(|s| s.to_string()),
    );
    out
}

fn validate(cfg: &GluedConfig) -> Result<Profile> {
    if cfg.n == 0 || !cfg.n.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "gluing needs an even base dimension, got n = {}",
            cfg.n
        )));
    }
    let profile = Profile::glued(cfg.t)?;
    if !(cfg.seam.is_finite() && cfg.seam > 0.0) {
        return Err(Error::InvalidInput(format!(
            "seam radius must be positive, got {}",
            cfg.seam
        )));
    }
    Ok(profile)
}

/// Rotates the state to `theta = 0`, conjugates the sphere part and reflects
/// the radius across the seam.
fn transition(sphere: &mut BergerState, surface: &mut RevolutionState, seam: f64) {
    let (sn, cs) = (-surface.theta).sin_cos();
    for v in [&mut sphere.q, &mut sphere.p] {
        for z in v.chunks_mut(2) {
            let (re, im) = (z[0], z[1]);
            z[0] = cs * re - sn * im;
            z[1] = -(sn * re + cs * im);
        }
    }
    surface.theta = 0.0;
    surface.thetadot = -surface.thetadot;
    surface.r = 2.0 * seam - surface.r;
    surface.rdot = -surface.rdot;
}

fn relative_jump(before: f64, after: f64) -> f64 {
    (after - before).abs() / before.abs().max(1.0)
}

/// Integrates in the first chart, switching charts whenever the radius
/// crosses the seam outward.
pub fn glued_flow(
    cfg: &GluedConfig,
    s0: &QuotientState,
    dt: f64,
    steps: usize,
) -> Result<GluedTrajectory> {
    check_steps(dt, steps)?;
    let profile = validate(cfg)?;
    let family = glued_family(cfg.n);
    let chart = DiskChart::new(cfg.n, cfg.t, &profile, &family)?;
    let (sphere, surface) = match s0 {
        QuotientState::DiskBundle { sphere, surface } => (sphere, surface),
        _ => {
            return Err(Error::InvalidInput(
                "glued flow needs a disk-bundle state".into(),
            ))
        }
    };
    chart.check_start(sphere, surface)?;
    if surface.r >= cfg.seam {
        return Err(Error::InvalidInput(format!(
            "initial radius {} is beyond the seam {}",
            surface.r, cfg.seam
        )));
    }
    let labels = chart.monitor_labels();
    let continuous = continuous_labels(cfg.n);
    let cont_idx: Vec<usize> = continuous
        .iter()
        .map(|c| {
            labels
                .iter()
                .position(|l| l == c)
                .expect("continuous label is monitored")
        })
        .collect();

    let mut traj = Trajectory::new(
        format!("glued(n={}, t={}, seam={})", cfg.n, cfg.t, cfg.seam),
        chart.state_labels(),
        labels,
    );
    let (mut s, mut r) = (sphere.clone(), *surface);
    chart.record(&mut traj, &s, &r)?;
    let mut seams = Vec::new();
    let mut max_jump = 0.0f64;
    let stride = record_stride(steps, 20_000);
    for k in 1..=steps {
        let (prev_s, prev_r) = (s.clone(), r);
        chart.step(&mut s, &mut r, dt);
        if r.r >= cfg.seam && prev_r.r < cfg.seam {
            // locate the crossing in time, then change charts there
            let (mut lo, mut hi) = (0.0, dt);
            let (mut cs, mut cr) = (s.clone(), r);
            while hi - lo > SEAM_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                let (mut ts, mut tr) = (prev_s.clone(), prev_r);
                chart.step(&mut ts, &mut tr, mid);
                if tr.r < cfg.seam {
                    lo = mid;
                } else {
                    hi = mid;
                    (cs, cr) = (ts, tr);
                }
            }
            for x in [prev_r.r, cr.r, 2.0 * cfg.seam - cr.r] {
                if x <= PLATEAU_START || profile.derivative(x) != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "seam crossing at radius {x} outside the plateau (r > {PLATEAU_START})"
                    )));
                }
            }
            let before = chart.monitors(&cs, &cr)?;
            transition(&mut cs, &mut cr, cfg.seam);
            let after = chart.monitors(&cs, &cr)?;
            let jumps: Vec<f64> = before
                .iter()
                .zip(&after)
                .map(|(a, b)| (b - a).abs())
                .collect();
            for &i in &cont_idx {
                max_jump = max_jump.max(relative_jump(before[i], after[i]));
            }
            seams.push(SeamEvent {
                time: cr.time,
                before,
                after,
                jumps,
            });
            let rest = dt - hi;
            if rest > 0.0 {
                chart.step(&mut cs, &mut cr, rest);
            }
            // land back on the time grid
            cr.time = prev_r.time + dt;
            cs.time = cr.time;
            (s, r) = (cs, cr);
        }
        if !profile.contains(r.r) || !r.r.is_finite() {
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
    Ok(GluedTrajectory {
        trajectory: traj,
        seams,
        continuous,
        max_continuous_jump: max_jump,
        seam_continuous: max_jump <= SEAM_TOL,
    })
}

/// Horizontal data starting inside the plateau and moving out towards the
/// seam, with fibre moment at least `0.2` so the inward leg stays away from
/// the centre of the disk.
pub fn random_seam_crossing_state(
    cfg: &GluedConfig,
    seed: u64,
    index: u64,
) -> Result<QuotientState> {
    use rand::Rng;
    let profile = validate(cfg)?;
    let mut rng = crate::sampling::rng_for_sample(seed, index);
    loop {
        let (q, p) = random_sphere_state(2 * cfg.n + 2, &mut rng);
        let sphere = BergerState { q, p, time: 0.0 };
        if sphere.fiber_moment().abs() < 0.2 {
            continue;
        }
        let r = rng.random_range(5.5..6.3);
        let rdot = rng.random_range(0.5..1.5);
        return Ok(horizontal_disk_state(&profile, sphere, r, rdot));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::quotient::{integrate_quotient, QuotientKind};

    #[test]
    fn family_layout() {
        let fam = glued_family(2);
        assert_eq!(fam.labels(), vec!["h1", "h2", "h3", "h4", "h1_sq", "h2_sq"]);
        assert_eq!(continuous_labels(2).len(), 7);
    }

    #[test]
    fn squares_and_quadratics_survive_the_seam() {
        let cfg = GluedConfig::default();
        let mut h1_jump = 0.0f64;
        for k in 0..5 {
            let s0 = random_seam_crossing_state(&cfg, 21, k).unwrap();
            let g = glued_flow(&cfg, &s0, 1e-3, 4000).unwrap();
            assert!(!g.seams.is_empty());
            assert!(g.seam_continuous, "jump {}", g.max_continuous_jump);
            assert!(g.max_jump("fiber").unwrap() > 0.39);
            h1_jump = h1_jump.max(g.max_jump("h1").unwrap());
            assert!(g.trajectory.summary().energy.max_rel < 1e-8);
        }
        assert!(h1_jump > 1e-3);
    }

    #[test]
    fn transition_flips_linear_values() {
        let cfg = GluedConfig::default();
        let s0 = random_seam_crossing_state(&cfg, 3, 0).unwrap();
        let g = glued_flow(&cfg, &s0, 1e-3, 3000).unwrap();
        let e = &g.seams[0];
        let labels = &g.trajectory.monitor_labels;
        for name in ["h1", "h2", "fiber", "clairaut"] {
            let i = labels.iter().position(|l| l == name).unwrap();
            assert!((e.before[i] + e.after[i]).abs() < 1e-10, "{name}");
        }
        assert!(e.time > 0.0 && e.time < 3.0);
    }

    #[test]
    fn no_crossing_matches_the_quotient_flow() {
        let cfg = GluedConfig::default();
        let profile = Profile::glued(cfg.t).unwrap();
        let mut rng = crate::sampling::rng_from_seed(5);
        let (q, p) = random_sphere_state(6, &mut rng);
        let s0 = horizontal_disk_state(&profile, BergerState { q, p, time: 0.0 }, 5.5, -0.5);
        let g = glued_flow(&cfg, &s0, 1e-3, 2000).unwrap();
        assert!(g.seams.is_empty());
        let kind = QuotientKind::DiskBundle {
            n: 2,
            t: cfg.t,
            profile,
            family: glued_family(2),
        };
        let plain = integrate_quotient(&kind, &s0, 1e-3, 2000).unwrap();
        assert_eq!(plain.states, g.trajectory.states);
        assert_eq!(plain.monitors, g.trajectory.monitors);
    }

    #[test]
    fn seam_outside_plateau_is_an_error() {
        let cfg = GluedConfig {
            seam: 4.0,
            ..GluedConfig::default()
        };
        let profile = Profile::glued(cfg.t).unwrap();
        let mut rng = crate::sampling::rng_from_seed(6);
        let (q, p) = random_sphere_state(6, &mut rng);
        let s0 = horizontal_disk_state(&profile, BergerState { q, p, time: 0.0 }, 3.5, 1.0);
        assert!(matches!(
            glued_flow(&cfg, &s0, 1e-3, 2000),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn odd_base_is_rejected() {
        let cfg = GluedConfig {
            n: 1,
            ..GluedConfig::default()
        };
        assert!(random_seam_crossing_state(&cfg, 0, 0).is_err());
    }
}
