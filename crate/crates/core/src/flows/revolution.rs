//! Geodesics of `dr^2 + f(r)^2 dtheta^2` by RK4.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flows::{check_steps, record_stride, Trajectory};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Warping function `f` with its derivative, on an open interval.
#[derive(Clone)]
pub struct Profile {
    pub name: String,
    f: RealFn,
    df: RealFn,
    pub domain: (f64, f64),
}

impl fmt::Debug for Profile {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "Profile({}, {:?})", self.name, self.domain)
    }
}

/// `6x^5 - 15x^4 + 10x^3` clamped to `[0, 1]`, with its derivative.
fn smoothstep(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0)
    } else {
        let x2 = x * x;
        (
            x2 * x * (10.0 - 15.0 * x + 6.0 * x2),
            30.0 * x2 * (1.0 - x) * (1.0 - x),
        )
    }
}

/// Neck radius where the glued profile becomes constant.
pub const PLATEAU_START: f64 = 5.0;

impl Profile {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: (f64, f64),
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            domain,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(
            format!("constant({c})"),
            move |_| c,
            |_| 0.0,
            (f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    /// `base + amp exp(-(r - center)^2)`.
    pub fn bump(base: f64, amp: f64, center: f64) -> Self {
        Self::new(
            format!("bump({base}, {amp}, {center})"),
            move |r| base + amp * (-(r - center).powi(2)).exp(),
            move |r| -2.0 * (r - center) * amp * (-(r - center).powi(2)).exp(),
            (f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    /// Plateau value `2 pi t^2 / sqrt(t^4 - 1)`.
    pub fn plateau_value(t: f64) -> Result<f64> {
        if t.is_nan() || t <= 1.0 {
            return Err(Error::InvalidMetric(format!(
                "plateau needs t > 1, got {t}"
            )));
        }
        Ok(2.0 * std::f64::consts::PI * t * t / (t.powi(4) - 1.0).sqrt())
    }

    /// Polar profile blending `r` near the origin into the plateau value on
    /// `[PLATEAU_START / 2, PLATEAU_START]`; `f(0) = 0`, `f'(0) = 1`.
    pub fn glued(t: f64) -> Result<Self> {
        let c = Self::plateau_value(t)?;
        let (a, b) = (PLATEAU_START / 2.0, PLATEAU_START);
        let f = move |r: f64| {
            let (s, _) = smoothstep((r - a) / (b - a));
            (1.0 - s) * r + s * c
        };
        let df = move |r: f64| {
            let (s, ds) = smoothstep((r - a) / (b - a));
            (1.0 - s) + ds / (b - a) * (c - r)
        };
        Ok(Self::new(
            format!("glued(t={t})"),
            f,
            df,
            (0.0, f64::INFINITY),
        ))
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.f)(r)
    }

    pub fn derivative(&self, r: f64) -> f64 {
        (self.df)(r)
    }

    pub fn contains(&self, r: f64) -> bool {
        r > self.domain.0 && r < self.domain.1 && self.value(r) > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RevolutionState {
    pub r: f64,
    pub theta: f64,
    pub rdot: f64,
    pub thetadot: f64,
    pub time: f64,
}

impl RevolutionState {
    pub fn clairaut(&self, f: &Profile) -> f64 {
        let fr = f.value(self.r);
        fr * fr * self.thetadot
    }

    pub fn energy(&self, f: &Profile) -> f64 {
        let fr = f.value(self.r);
        0.5 * (self.rdot * self.rdot + fr * fr * self.thetadot * self.thetadot)
    }
}

fn rhs(f: &Profile, y: [f64; 4]) -> [f64; 4] {
    let [r, _, rd, td] = y;
    let (fr, dfr) = (f.value(r), f.derivative(r));
    [rd, td, fr * dfr * td * td, -2.0 * dfr / fr * rd * td]
}

/// One classical RK4 step.
pub fn rk4_step(f: &Profile, s: &RevolutionState, h: f64) -> RevolutionState {
    let y = [s.r, s.theta, s.rdot, s.thetadot];
    let add = |a: [f64; 4], k: [f64; 4], c: f64| {
        [
            a[0] + c * k[0],
            a[1] + c * k[1],
            a[2] + c * k[2],
            a[3] + c * k[3],
        ]
    };
    let k1 = rhs(f, y);
    let k2 = rhs(f, add(y, k1, h / 2.0));
    let k3 = rhs(f, add(y, k2, h / 2.0));
    let k4 = rhs(f, add(y, k3, h));
    let mut out = y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    RevolutionState {
        r: out[0],
        theta: out[1],
        rdot: out[2],
        thetadot: out[3],
        time: s.time + h,
    }
}

/// Integrates from `s0`; stops with a flag if the path leaves the domain.
pub fn integrate_revolution(
    f: &Profile,
    s0: &RevolutionState,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    check_steps(dt, steps)?;
    if !f.contains(s0.r) {
        return Err(Error::InvalidInput(format!(
            "initial radius {} outside the domain of {}",
            s0.r, f.name
        )));
    }
    let mut traj = Trajectory::new(
        format!("revolution({})", f.name),
        vec!["r".into(), "theta".into(), "rdot".into(), "thetadot".into()],
        vec!["clairaut".into()],
    );
    let record = |traj: &mut Trajectory, s: &RevolutionState| {
        traj.push(
            s.time,
            vec![s.r, s.theta, s.rdot, s.thetadot],
            s.energy(f),
            vec![s.clairaut(f)],
        );
    };
    let stride = record_stride(steps, 20_000);
    let mut s = *s0;
    record(&mut traj, &s);
    for k in 1..=steps {
        let next = rk4_step(f, &s, dt);
        if !f.contains(next.r) || !next.r.is_finite() {
            traj.truncated = Some(format!("left the domain at t = {:.6}", next.time));
            if traj.times.last().is_some_and(|&t| s.time > t) {
                record(&mut traj, &s);
            }
            break;
        }
        s = next;
        if k % stride == 0 || k == steps {
            record(&mut traj, &s);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_value_at_two() {
        // 2 pi 4 / sqrt(15)
        let c = Profile::plateau_value(2.0).unwrap();
        assert!((c - 8.0 * std::f64::consts::PI / 15f64.sqrt()).abs() < 1e-14);
        assert!(Profile::plateau_value(1.0).is_err());
    }

    #[test]
    fn glued_profile_shape() {
        let f = Profile::glued(2.0).unwrap();
        assert_eq!(f.value(0.0), 0.0);
        assert_eq!(f.derivative(0.0), 1.0);
        let c = Profile::plateau_value(2.0).unwrap();
        for r in [5.0, 6.5, 8.0, 20.0] {
            assert_eq!(f.value(r), c);
            assert_eq!(f.derivative(r), 0.0);
        }
        // derivative matches central differences across the blend
        for r in [2.6, 3.0, 3.7, 4.5, 4.99] {
            let fd = (f.value(r + 1e-6) - f.value(r - 1e-6)) / 2e-6;
            assert!((fd - f.derivative(r)).abs() < 1e-6);
        }
        for k in 1..100 {
            assert!(f.value(0.1 * k as f64) > 0.0);
        }
    }

    #[test]
    fn constant_profile_gives_straight_lines() {
        let c = Profile::plateau_value(2.0).unwrap();
        let f = Profile::constant(c);
        let s0 = RevolutionState {
            r: 1.0,
            theta: 0.2,
            rdot: 0.3,
            thetadot: 0.05,
            time: 0.0,
        };
        let traj = integrate_revolution(&f, &s0, 1e-3, 5000).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - (1.0 + 0.3 * 5.0)).abs() < 1e-12);
        assert!((last[1] - (0.2 + 0.05 * 5.0)).abs() < 1e-12);
        assert!(traj.summary().monitors[0].max_abs < 1e-15);
    }

    #[test]
    fn meridian_keeps_theta() {
        let f = Profile::bump(1.0, 0.5, 0.0);
        let s0 = RevolutionState {
            r: -2.0,
            theta: 0.7,
            rdot: 1.0,
            thetadot: 0.0,
            time: 0.0,
        };
        let traj = integrate_revolution(&f, &s0, 1e-3, 4000).unwrap();
        assert!(traj.states.iter().all(|s| s[1] == 0.7));
    }

    #[test]
    fn leaving_the_domain_truncates() {
        let f = Profile::glued(2.0).unwrap();
        let s0 = RevolutionState {
            r: 0.5,
            theta: 0.0,
            rdot: -1.0,
            thetadot: 0.0,
            time: 0.0,
        };
        let traj = integrate_revolution(&f, &s0, 1e-3, 2000).unwrap();
        assert!(traj.truncated.is_some());
        assert!(traj.len() < 2001);
        let bad = RevolutionState { r: -1.0, ..s0 };
        assert!(integrate_revolution(&f, &bad, 1e-3, 10).is_err());
    }
}
