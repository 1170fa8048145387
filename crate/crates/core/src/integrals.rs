//! Thimm integral families: trace powers of projected moment values, their
//! Lie-Poisson brackets, and invariance checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{c, AlgebraElement, CMatrix, GroupElement, Subalgebra};
use crate::catalog;
use crate::error::{Error, Result};
use crate::expr::Scalar;
use crate::moment::MomentPair;
use crate::sampling::{random_element, rng_for_sample};

/// Involution tolerance, relative to [`bracket_scale`].
pub const INVOLUTION_TOL: f64 = 1e-8;
/// Invariance tolerance, relative to `max(1, |f|)`.
pub const INVARIANCE_TOL: f64 = 1e-10;
/// Largest imaginary residue tolerated in an integral value.
pub const REALNESS_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factor {
    Left,
    Right,
    /// Both factors at once, as the block-diagonal `2n x 2n` matrix.
    Both,
}

/// `coeff * (i?) * tr(M^k)`, optionally squared, where `M` is the readout
/// block of the projection of the selected factor.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralSpec {
    pub label: String,
    pub factor: Factor,
    pub proj: Option<Subalgebra>,
    pub power: u32,
    pub imag: bool,
    pub square: bool,
    pub coeff: f64,
}

impl IntegralSpec {
    pub fn new(
        label: impl Into<String>,
        factor: Factor,
        proj: Option<Subalgebra>,
        power: u32,
        imag: bool,
    ) -> Self {
        Self {
            label: label.into(),
            factor,
            proj,
            power,
            imag,
            square: false,
            coeff: 1.0,
        }
    }

    /// Shorthand resolving `proj` through the catalog.
    pub fn named(
        label: &str,
        factor: Factor,
        proj: Option<&str>,
        power: u32,
        imag: bool,
    ) -> Result<Self> {
        let proj = proj.map(catalog::resolve).transpose()?;
        Ok(Self::new(label, factor, proj, power, imag))
    }

    pub fn squared(mut self) -> Self {
        self.square = true;
        self
    }

    pub fn with_coeff(mut self, coeff: f64) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn select(&self, mp: &MomentPair) -> AlgebraElement {
        match self.factor {
            Factor::Left => mp.left.clone(),
            Factor::Right => mp.right.clone(),
            Factor::Both => mp.as_block(),
        }
    }

    fn reduced(&self, mp: &MomentPair) -> Result<CMatrix> {
        let xi = self.select(mp);
        match &self.proj {
            Some(h) => {
                let p = h.project(&xi)?;
                Ok(h.read_block(&p))
            }
            None => Ok(xi.into_matrix()),
        }
    }

    fn multiplier(&self) -> num_complex::Complex64 {
        if self.imag {
            c(0.0, self.coeff)
        } else {
            c(self.coeff, 0.0)
        }
    }

    /// Value before the optional squaring.
    pub fn eval_unsquared(&self, mp: &MomentPair) -> Result<f64> {
        let m = self.reduced(mp)?;
        let mut acc = CMatrix::identity(m.nrows(), m.ncols());
        for _ in 0..self.power {
            acc = &acc * &m;
        }
        let z = self.multiplier() * acc.trace();
        if z.im.abs() > REALNESS_TOL * z.re.abs().max(1.0) {
            return Err(Error::NonRealIntegral {
                label: self.label.clone(),
                imag: z.im,
            });
        }
        Ok(z.re)
    }

    fn gradient_unsquared(&self, mp: &MomentPair) -> Result<MomentPair> {
        let n = mp.dim();
        let m = self.reduced(mp)?;
        let mut pw = CMatrix::identity(m.nrows(), m.ncols());
        for _ in 1..self.power {
            pw = &pw * &m;
        }
        let scale = self.multiplier() * c(self.power as f64, 0.0);
        // d f[V] = Re tr(A V) for V in the projection target
        let a = match &self.proj {
            Some(h) => h.pad_block(&pw) * scale,
            None => pw * scale,
        };
        let g = match &self.proj {
            Some(h) => {
                let coeffs: Vec<f64> = h
                    .basis()
                    .iter()
                    .map(|b| (&a * b.matrix()).trace().re)
                    .collect();
                h.from_coords(&coeffs)
            }
            None => {
                // traceless skew-Hermitian representative; the factor algebras
                // (su, so, sp) contain the odd powers that arise here
                let mut gm = a.adjoint() - &a;
                let dim = gm.nrows();
                let tr = gm.trace() / c(dim as f64, 0.0);
                for k in 0..dim {
                    gm[(k, k)] -= tr;
                }
                AlgebraElement::from_matrix_unchecked(gm)
            }
        };
        Ok(match self.factor {
            Factor::Left => MomentPair {
                left: g,
                right: AlgebraElement::zeros(n),
            },
            Factor::Right => MomentPair {
                left: AlgebraElement::zeros(n),
                right: g,
            },
            Factor::Both => {
                let (l, r) = catalog::split_pair(&g);
                MomentPair { left: l, right: r }
            }
        })
    }
}

/// Value of `s` at `mp`.
pub fn eval_integral(s: &IntegralSpec, mp: &MomentPair) -> Result<f64> {
    let v = s.eval_unsquared(mp)?;
    Ok(if s.square { v * v } else { v })
}

/// The pair `(grad_L, grad_R)` representing `d s` at `mp` through the inner
/// product.
pub fn gradient(s: &IntegralSpec, mp: &MomentPair) -> Result<MomentPair> {
    let g = s.gradient_unsquared(mp)?;
    if s.square {
        let v = s.eval_unsquared(mp)?;
        Ok(g.scale(2.0 * v))
    } else {
        Ok(g)
    }
}

/// Directional derivative of `s` at `mp` along `v`.
pub fn differential(s: &IntegralSpec, mp: &MomentPair, v: &MomentPair) -> Result<f64> {
    Ok(gradient(s, mp)?.inner(v))
}

/// `<L, [grad1_L, grad2_L]> + <R, [grad1_R, grad2_R]>`.
pub fn lie_poisson_bracket(s1: &IntegralSpec, s2: &IntegralSpec, mp: &MomentPair) -> Result<f64> {
    let g1 = gradient(s1, mp)?;
    let g2 = gradient(s2, mp)?;
    Ok(mp.left.pairing(&g1.left.commutator(&g2.left))
        + mp.right.pairing(&g1.right.commutator(&g2.right)))
}

/// `(1 + |f|)(1 + |g|) |mp|`.
pub fn bracket_scale(s1: &IntegralSpec, s2: &IntegralSpec, mp: &MomentPair) -> Result<f64> {
    let f = eval_integral(s1, mp)?;
    let g = eval_integral(s2, mp)?;
    Ok((1.0 + f.abs()) * (1.0 + g.abs()) * mp.norm())
}

/// An ordered list of integral specs on `g + g`.
#[derive(Clone, Debug)]
pub struct IntegralFamily {
    pub name: String,
    /// The factor algebra `g`.
    pub algebra: Subalgebra,
    pub specs: Vec<IntegralSpec>,
    pub expected_independent: usize,
}

impl IntegralFamily {
    pub fn labels(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn spec(&self, label: &str) -> Option<&IntegralSpec> {
        self.specs.iter().find(|s| s.label == label)
    }

    /// Sub-family with the given labels, in the given order.
    pub fn select(&self, labels: &[&str]) -> Result<Self> {
        let specs = labels
            .iter()
            .map(|l| {
                self.spec(l).cloned().ok_or_else(|| Error::Unknown {
                    kind: "integral",
                    name: l.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: format!("{}[{}]", self.name, labels.join(",")),
            algebra: self.algebra.clone(),
            expected_independent: specs.len().min(self.expected_independent),
            specs,
        })
    }

    pub fn values(&self, mp: &MomentPair) -> Result<Vec<f64>> {
        self.specs.iter().map(|s| eval_integral(s, mp)).collect()
    }
}

/// Outcome of [`check_involution`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub family: String,
    pub samples: usize,
    pub seed: u64,
    pub max_abs: f64,
    pub max_relative: f64,
    pub argmax: Option<(String, String)>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Random point of `g + g` with independent Gaussian factors.
pub fn random_pair(g: &Subalgebra, seed: u64, index: u64) -> MomentPair {
    let mut rng = rng_for_sample(seed, index);
    let left = random_element(g, &mut rng);
    let right = random_element(g, &mut rng);
    MomentPair { left, right }
}

/// Relative bracket of every pair of specs at `mp`: `(i, j, |b|, |b| / scale)`.
pub fn pairwise_brackets(
    fam: &IntegralFamily,
    mp: &MomentPair,
) -> Result<Vec<(usize, usize, f64, f64)>> {
    let grads: Vec<MomentPair> = fam
        .specs
        .iter()
        .map(|s| gradient(s, mp))
        .collect::<Result<_>>()?;
    let vals: Vec<f64> = fam.values(mp)?;
    let norm = mp.norm();
    let mut out = Vec::new();
    for i in 0..grads.len() {
        for j in (i + 1)..grads.len() {
            let b = mp.left.pairing(&grads[i].left.commutator(&grads[j].left))
                + mp.right
                    .pairing(&grads[i].right.commutator(&grads[j].right));
            let scale = (1.0 + vals[i].abs()) * (1.0 + vals[j].abs()) * norm;
            out.push((i, j, b.abs(), b.abs() / scale.max(f64::MIN_POSITIVE)));
        }
    }
    Ok(out)
}

/// Max bracket over all pairs at `samples` seeded random points.
pub fn check_involution(
    fam: &IntegralFamily,
    samples: usize,
    seed: u64,
) -> Result<InvolutionReport> {
    let per_sample: Vec<Vec<(usize, usize, f64, f64)>> = (0..samples as u64)
        .into_par_iter()
        .map(|k| pairwise_brackets(fam, &random_pair(&fam.algebra, seed, k)))
        .collect::<Result<_>>()?;
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut argmax = None;
    for rows in &per_sample {
        for &(i, j, a, r) in rows {
            max_abs = max_abs.max(a);
            if r > max_rel {
                max_rel = r;
                argmax = Some((fam.specs[i].label.clone(), fam.specs[j].label.clone()));
            }
        }
    }
    Ok(InvolutionReport {
        family: fam.name.clone(),
        samples,
        seed,
        max_abs,
        max_relative: max_rel,
        argmax,
        tolerance: INVOLUTION_TOL,
        passed: max_rel < INVOLUTION_TOL,
    })
}

/// Outcome of an invariance check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub spec: String,
    pub samples: usize,
    pub max_abs: f64,
    pub max_relative: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn invariance_report(spec: &str, diffs: Vec<(f64, f64)>) -> InvarianceReport {
    let max_abs = diffs.iter().fold(0.0f64, |a, d| a.max(d.0));
    let max_rel = diffs.iter().fold(0.0f64, |a, d| a.max(d.1));
    InvarianceReport {
        spec: spec.to_string(),
        samples: diffs.len(),
        max_abs,
        max_relative: max_rel,
        tolerance: INVARIANCE_TOL,
        passed: max_rel < INVARIANCE_TOL,
    }
}

/// `max |s(Ad_tau mp) - s(mp)|` over random points of `g + g`.
pub fn check_invariance(
    s: &IntegralSpec,
    g: &Subalgebra,
    tau: &(GroupElement, GroupElement),
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let diffs = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mp = random_pair(g, seed, k);
            let before = eval_integral(s, &mp)?;
            let after = eval_integral(s, &mp.ad(&tau.0, &tau.1))?;
            let d = (after - before).abs();
            Ok((d, d / before.abs().max(1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(invariance_report(&s.label, diffs))
}

/// `max |h(B) - h(-B^T)|` for a single-factor spec.
pub fn check_conjugation_invariance(
    h: &IntegralSpec,
    g: &Subalgebra,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    if h.factor == Factor::Both {
        return Err(Error::InvalidInput(format!(
            "conjugation check of `{}` needs a single-factor spec",
            h.label
        )));
    }
    let diffs = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mp = random_pair(g, seed, k);
            let flipped = MomentPair {
                left: mp.left.conjugate(),
                right: mp.right.conjugate(),
            };
            let before = eval_integral(h, &mp)?;
            let after = eval_integral(h, &flipped)?;
            let d = (after - before).abs();
            Ok((d, d / before.abs().max(1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(invariance_report(&h.label, diffs))
}

fn spec(label: &str, factor: Factor, proj: Option<&str>, k: u32, imag: bool) -> IntegralSpec {
    IntegralSpec::named(label, factor, proj, k, imag).expect("registry names resolve")
}

/// Thimm family on `su(3) + su(3)` for the Eschenburg circle actions.
pub fn eschenburg_family() -> IntegralFamily {
    use Factor::{Left, Right};
    let u1 = Some("u1_su3");
    let u2 = Some("u2_upper_su3");
    IntegralFamily {
        name: "eschenburg".into(),
        algebra: catalog::su(3),
        specs: vec![
            spec("f1", Left, u1, 1, true),
            spec("f2", Left, u2, 1, true),
            spec("f3", Left, u2, 2, false),
            spec("f4", Left, None, 2, false),
            spec("f5", Left, None, 3, true),
            spec("f6", Right, u1, 1, true),
            spec("f7", Right, u2, 1, true),
            spec("f8", Right, u2, 2, false),
        ],
        expected_independent: 7,
    }
}

/// Family on `sp(2) + sp(2)` for the Gromoll-Meyer action.
pub fn gromoll_meyer_family() -> IntegralFamily {
    use Factor::{Left, Right};
    IntegralFamily {
        name: "gromoll_meyer".into(),
        algebra: catalog::sp(2),
        specs: vec![
            spec("f1", Left, Some("sp1x1_sp2"), 2, false),
            spec("f2", Right, Some("so2_sp2"), 2, false),
            spec("f3", Left, Some("sp1xsp1_sp2"), 4, false),
            spec("f4", Left, None, 2, false),
            spec("f5", Left, None, 4, false),
            spec("f6", Left, Some("l_sp2"), 2, false),
            spec("f7", Right, Some("sp1xsp1_sp2"), 2, false),
        ],
        expected_independent: 7,
    }
}

/// Linear and quadratic block-trace functions on `su(n+1)`:
/// `h_j = -1/2 i tr(pi_j B)` for `j = 1..n` and
/// `h_{n+j-1} = -1/4 tr((pi_j B)^2)` for `j = 2..n+1`, where `pi_j` reads the
/// lower-right `j x j` block. With `square_linear` the `h_j` are squared.
pub fn block_trace_family(name: &str, n: usize, square_linear: bool) -> IntegralFamily {
    let big = n + 1;
    let mut specs = Vec::with_capacity(2 * n);
    for j in 1..=n {
        let proj = catalog::block_su(big, j, false);
        let mut s =
            IntegralSpec::new(format!("h{j}"), Factor::Left, Some(proj), 1, true).with_coeff(-0.5);
        if square_linear {
            s = s.squared();
        }
        specs.push(s);
    }
    for j in 2..=big {
        let proj = catalog::block_su(big, j, false);
        specs.push(
            IntegralSpec::new(
                format!("h{}", n + j - 1),
                Factor::Left,
                Some(proj),
                2,
                false,
            )
            .with_coeff(-0.25),
        );
    }
    IntegralFamily {
        name: name.to_string(),
        algebra: catalog::su(big),
        specs,
        expected_independent: 2 * n,
    }
}

/// Block traces of all powers of the nested lower-right blocks of `su(n)`.
pub fn sun_chain_family(n: usize) -> IntegralFamily {
    let mut specs = Vec::new();
    for j in 1..=n {
        let proj = catalog::block_su(n, j, false);
        for k in 1..=j {
            if j == n && k == 1 {
                continue;
            }
            specs.push(IntegralSpec::new(
                format!("g{j}_{k}"),
                Factor::Left,
                Some(proj.clone()),
                k as u32,
                k % 2 == 1,
            ));
        }
    }
    IntegralFamily {
        name: format!("sun_chain({n})"),
        algebra: catalog::su(n),
        expected_independent: specs.len(),
        specs,
    }
}

/// Even trace powers along the chain `so(2) ⊂ so(3) ⊂ ... ⊂ so(n)` of upper blocks.
pub fn son_chain_family(n: usize) -> IntegralFamily {
    let mut specs = Vec::new();
    for k in 2..=n {
        let proj = catalog::so_upper(n, k);
        for p in 1..=(k / 2) {
            specs.push(IntegralSpec::new(
                format!("s{k}_{}", 2 * p),
                Factor::Left,
                Some(proj.clone()),
                2 * p as u32,
                false,
            ));
        }
    }
    IntegralFamily {
        name: format!("son_chain({n})"),
        algebra: catalog::so(n),
        expected_independent: specs.len(),
        specs,
    }
}

fn parse_call(name: &str) -> Option<(&str, usize)> {
    let (head, rest) = name.split_once('(')?;
    let arg = rest.strip_suffix(')')?.trim().parse().ok()?;
    Some((head.trim(), arg))
}

/// Registry: `eschenburg`, `gromoll_meyer`, `berger_chain(n)`,
/// `sun_chain(n)`, `son_chain(n)`, `connected_sum(n)`.
pub fn build_family(name: &str) -> Result<IntegralFamily> {
    let unknown = || Error::Unknown {
        kind: "family",
        name: name.to_string(),
    };
    match name {
        "eschenburg" => return Ok(eschenburg_family()),
        "gromoll_meyer" => return Ok(gromoll_meyer_family()),
        _ => {}
    }
    let (head, n) = parse_call(name).ok_or_else(unknown)?;
    match (head, n) {
        ("berger_chain", n) if n >= 1 => Ok(block_trace_family(name, n, false)),
        ("connected_sum", n) if n >= 1 => Ok(block_trace_family(name, n, true)),
        ("sun_chain", n) if n >= 2 => Ok(sun_chain_family(n)),
        ("son_chain", n) if n >= 2 => Ok(son_chain_family(n)),
        _ => Err(unknown()),
    }
}

/// JSON form of one spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub factor: Factor,
    #[serde(default)]
    pub proj: Option<String>,
    pub k: u32,
    #[serde(default)]
    pub imag: bool,
    #[serde(default)]
    pub square: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff: Option<Scalar>,
}

/// JSON form of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<String>,
    pub specs: Vec<SpecDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_independent: Option<usize>,
}

impl FamilyDoc {
    pub fn from_family(f: &IntegralFamily) -> Self {
        Self {
            name: f.name.clone(),
            algebra: Some(f.algebra.name().to_string()),
            specs: f
                .specs
                .iter()
                .map(|s| SpecDoc {
                    label: Some(s.label.clone()),
                    factor: s.factor,
                    proj: s.proj.as_ref().map(|h| h.name().to_string()),
                    k: s.power,
                    imag: s.imag,
                    square: s.square,
                    coeff: (s.coeff != 1.0).then_some(Scalar::Number(s.coeff)),
                })
                .collect(),
            expected_independent: Some(f.expected_independent),
        }
    }

    /// Resolves names through `extra` first, then the catalog.
    pub fn build(&self, extra: &[Subalgebra]) -> Result<IntegralFamily> {
        let lookup = |name: &str| -> Result<Subalgebra> {
            match extra.iter().find(|h| h.name() == name) {
                Some(h) => Ok(h.clone()),
                None => catalog::resolve(name),
            }
        };
        let mut specs = Vec::with_capacity(self.specs.len());
        for (k, d) in self.specs.iter().enumerate() {
            if d.k == 0 {
                return Err(Error::InvalidInput(format!(
                    "spec {k}: power must be at least 1"
                )));
            }
            let proj = d.proj.as_deref().map(lookup).transpose()?;
            let mut s = IntegralSpec::new(
                d.label.clone().unwrap_or_else(|| format!("f{}", k + 1)),
                d.factor,
                proj,
                d.k,
                d.imag,
            );
            s.square = d.square;
            if let Some(cf) = &d.coeff {
                s.coeff = cf.value()?;
            }
            specs.push(s);
        }
        let algebra = match &self.algebra {
            Some(a) => lookup(a)?,
            None => {
                let n = specs
                    .iter()
                    .filter_map(|s| s.proj.as_ref())
                    .map(|h| match specs[0].factor {
                        Factor::Both => h.ambient_dim() / 2,
                        _ => h.ambient_dim(),
                    })
                    .next()
                    .ok_or_else(|| {
                        Error::InvalidInput(
                            "family without projections must name its algebra".into(),
                        )
                    })?;
                catalog::su(n)
            }
        };
        for s in &specs {
            if let Some(h) = &s.proj {
                let want = if s.factor == Factor::Both {
                    2 * algebra.ambient_dim()
                } else {
                    algebra.ambient_dim()
                };
                if h.ambient_dim() != want {
                    return Err(Error::DimensionMismatch {
                        left: want,
                        right: h.ambient_dim(),
                    });
                }
            }
        }
        Ok(IntegralFamily {
            name: self.name.clone(),
            algebra,
            expected_independent: self.expected_independent.unwrap_or(specs.len()),
            specs,
        })
    }
}

pub fn family_from_json(text: &str, extra: &[Subalgebra]) -> Result<IntegralFamily> {
    let doc: FamilyDoc = serde_json::from_str(text)?;
    doc.build(extra)
}

pub fn family_to_json(f: &IntegralFamily) -> Result<String> {
    Ok(serde_json::to_string_pretty(&FamilyDoc::from_family(f))?)
}
