//! Moment maps of isometric actions, horizontality, and the tangent space of
//! the moment image `R = {(X, Y) : X conjugate to -Y}` cut by `u⊥`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    ad_group, multiset_distance, spectrum, AlgebraElement, CMatrix, GroupElement, Subalgebra,
};
use crate::catalog;
use crate::error::{Error, Result};
use crate::linalg::{
    distance_to_span, null_space, numerical_rank, row_space, singular_values, RMatrix,
};
use crate::quaternion::{quaternion_diag, Quaternion};
use crate::sampling::{random_element, rng_from_seed};

/// Relative tolerance of the spectral test for membership in `R`.
pub const IMAGE_TOL: f64 = 1e-8;
/// Singular values below this fraction of the largest are treated as zero.
pub const SVD_TOL: f64 = 1e-10;

/// A value of the moment map in `g* + g*`, identified with `g + g`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub left: AlgebraElement,
    pub right: AlgebraElement,
}

impl MomentPair {
    pub fn new(left: AlgebraElement, right: AlgebraElement) -> Result<Self> {
        if left.dim() != right.dim() {
            return Err(Error::DimensionMismatch {
                left: left.dim(),
                right: right.dim(),
            });
        }
        Ok(Self { left, right })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            left: AlgebraElement::zeros(dim),
            right: AlgebraElement::zeros(dim),
        }
    }

    /// `(X, -X)`: the image of a body velocity at the identity.
    pub fn from_velocity(x: &AlgebraElement) -> Self {
        Self {
            left: x.clone(),
            right: x.scale(-1.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    /// Sum of the factor inner products.
    pub fn inner(&self, other: &Self) -> f64 {
        self.left.pairing(&other.left) + self.right.pairing(&other.right)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            left: &self.left + &other.left,
            right: &self.right + &other.right,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            left: &self.left - &other.left,
            right: &self.right - &other.right,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            left: self.left.scale(s),
            right: self.right.scale(s),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.add(&other.scale(s))
    }

    /// Component-wise adjoint action of `(g1, g2)`.
    pub fn ad(&self, g1: &GroupElement, g2: &GroupElement) -> Self {
        Self {
            left: g1.conjugate_element(&self.left),
            right: g2.conjugate_element(&self.right),
        }
    }

    /// Real coordinates in the orthonormal basis of `g` on each factor.
    pub fn coords(&self, g: &Subalgebra) -> Vec<f64> {
        let mut v: Vec<f64> = g.coords(&self.left).iter().cloned().collect();
        v.extend(g.coords(&self.right).iter());
        v
    }

    pub fn from_coords(g: &Subalgebra, v: &[f64]) -> Self {
        let d = g.dim();
        Self {
            left: g.from_coords(&v[..d]),
            right: g.from_coords(&v[d..]),
        }
    }

    /// Block-diagonal `2n x 2n` form.
    pub fn as_block(&self) -> AlgebraElement {
        catalog::block_pair(&self.left, &self.right)
    }
}

/// `(Ad g1 X, -Ad g2 X)`: the moment value at the translate `(g1, g2)_*(X, -X)`.
pub fn moment_bi(g1: &GroupElement, g2: &GroupElement, x: &AlgebraElement) -> Result<MomentPair> {
    let left = ad_group(g1, x)?;
    let right = ad_group(g2, x)?.scale(-1.0);
    Ok(MomentPair { left, right })
}

/// `Ad_A(B)` for `B` in the complement `m` of the isotropy algebra.
pub fn moment_homogeneous(
    a: &GroupElement,
    b: &AlgebraElement,
    m: &Subalgebra,
) -> Result<AlgebraElement> {
    let residual = m.residual(b);
    if residual > 1e-10 * b.norm().max(1.0) {
        return Err(Error::NotInSubalgebra {
            name: m.name().to_string(),
            residual,
        });
    }
    ad_group(a, b)
}

/// A manifold embedded in a real coordinate space, with a metric.
pub trait EmbeddedManifold {
    fn ambient_dim(&self) -> usize;
    /// Size of the constraint violation at `p`.
    fn constraint_residual(&self, p: &[f64]) -> f64;
    /// Metric at `p` on ambient vectors.
    fn metric(&self, p: &[f64], v: &[f64], w: &[f64]) -> f64;
}

pub type KillingField = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Pairings `<v, xi_k(p)>` of a tangent vector with each Killing field.
pub fn moment_isometric(
    manifold: &dyn EmbeddedManifold,
    point: &[f64],
    velocity: &[f64],
    killing_fields: &[KillingField],
) -> Result<Vec<f64>> {
    let n = manifold.ambient_dim();
    if point.len() != n || velocity.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: point.len().max(velocity.len()),
        });
    }
    let residual = manifold.constraint_residual(point);
    if residual > 1e-10 {
        return Err(Error::OffManifold { residual });
    }
    Ok(killing_fields
        .iter()
        .map(|xi| manifold.metric(point, velocity, &xi(point)))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit sphere in `R^n` with the round metric.
#[derive(Clone, Copy, Debug)]
pub struct RoundSphere {
    pub ambient: usize,
}

impl EmbeddedManifold for RoundSphere {
    fn ambient_dim(&self) -> usize {
        self.ambient
    }
    fn constraint_residual(&self, p: &[f64]) -> f64 {
        (dot(p, p) - 1.0).abs()
    }
    fn metric(&self, _p: &[f64], v: &[f64], w: &[f64]) -> f64 {
        dot(v, w)
    }
}

/// Infinitesimal rotation in the `(i, j)` coordinate plane.
pub fn rotation_field(i: usize, j: usize) -> KillingField {
    Box::new(move |p: &[f64]| {
        let mut v = vec![0.0; p.len()];
        v[i] = -p[j];
        v[j] = p[i];
        v
    })
}

/// Unit sphere in `C^{n+1}` (real coordinates `(re z_0, im z_0, re z_1, ...)`)
/// with the Hopf fibre directions scaled by `t^2`.
#[derive(Clone, Copy, Debug)]
pub struct BergerSphere {
    pub n: usize,
    pub t: f64,
}

/// Multiplication by `i` in interleaved real coordinates.
pub fn times_i(p: &[f64]) -> Vec<f64> {
    p.chunks(2).flat_map(|z| [-z[1], z[0]]).collect()
}

impl EmbeddedManifold for BergerSphere {
    fn ambient_dim(&self) -> usize {
        2 * self.n + 2
    }
    fn constraint_residual(&self, p: &[f64]) -> f64 {
        (dot(p, p) - 1.0).abs()
    }
    fn metric(&self, p: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let iz = times_i(p);
        dot(v, w) + (self.t * self.t - 1.0) * dot(v, &iz) * dot(w, &iz)
    }
}

/// Killing field `z -> B z` of a skew-Hermitian `B` on `C^{n+1}`.
pub fn linear_field(b: &AlgebraElement) -> KillingField {
    let m = b.matrix().clone();
    Box::new(move |p: &[f64]| {
        let n = p.len() / 2;
        let z = DVector::from_iterator(
            n,
            p.chunks(2).map(|q| num_complex::Complex64::new(q[0], q[1])),
        );
        let bz = &m * z;
        bz.iter().flat_map(|w| [w.re, w.im]).collect()
    })
}

/// Generic rank of a compact algebra: the dimension of the centraliser of a
/// random element.
pub fn algebra_rank(g: &Subalgebra) -> usize {
    let x = random_element(g, &mut rng_from_seed(0x5eed));
    let d = g.dim();
    let mut ad = RMatrix::zeros(d, d);
    for (k, b) in g.basis().iter().enumerate() {
        let col = g.coords(&x.commutator(b));
        ad.set_column(k, &col);
    }
    d - numerical_rank(&singular_values(&ad), 1e-9)
}

/// The action of a subgroup `U ⊂ G x G` on `G` by `(g1, g2) x = g1 x g2^{-1}`.
#[derive(Clone, Debug)]
pub struct BiquotientAction {
    pub name: String,
    pub algebra: Subalgebra,
    pub group_dim: usize,
    pub rank: usize,
    pub u_basis: Vec<MomentPair>,
}

impl BiquotientAction {
    /// Orthonormalises `u_span` under the product inner product.
    pub fn new(
        name: impl Into<String>,
        algebra: Subalgebra,
        u_span: Vec<MomentPair>,
    ) -> Result<Self> {
        let mut u_basis: Vec<MomentPair> = Vec::new();
        for v in u_span {
            if v.dim() != algebra.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    left: algebra.ambient_dim(),
                    right: v.dim(),
                });
            }
            for part in [&v.left, &v.right] {
                let res = algebra.residual(part);
                if res > 1e-10 * part.norm().max(1.0) {
                    return Err(Error::NotInSubalgebra {
                        name: algebra.name().to_string(),
                        residual: res,
                    });
                }
            }
            let mut w = v.clone();
            for o in &u_basis {
                w = w.axpy(-w.inner(o), o);
            }
            let n = w.norm();
            if n > 1e-12 * v.norm().max(1.0) {
                u_basis.push(w.scale(1.0 / n));
            }
        }
        let rank = algebra_rank(&algebra);
        Ok(Self {
            name: name.into(),
            group_dim: algebra.dim(),
            algebra,
            rank,
            u_basis,
        })
    }

    /// `U_{klpq}` acting on `SU(3)`.
    pub fn u_klpq(k: i64, l: i64, p: i64, q: i64) -> Result<Self> {
        let (kf, lf, pf, qf) = (k as f64, l as f64, p as f64, q as f64);
        let two_pi = 2.0 * std::f64::consts::PI;
        let left = AlgebraElement::imaginary_diagonal(&[kf, lf, -kf - lf]).scale(two_pi);
        let right = AlgebraElement::imaginary_diagonal(&[pf, qf, -pf - qf]).scale(two_pi);
        Self::new(
            format!("u_{k}_{l}_{p}_{q}"),
            catalog::su(3),
            vec![MomentPair::new(left, right)?],
        )
    }

    /// The circle `U_{1,-1,2m,2m}` defining the Eschenburg space `E_m`.
    pub fn eschenburg(m: i64) -> Self {
        Self::u_klpq(1, -1, 2 * m, 2 * m).expect("valid weights")
    }

    /// `Sp(1)` acting on `Sp(2)` by `Q -> diag(q, 1) Q diag(conj q, conj q)`.
    pub fn gromoll_meyer() -> Self {
        let span = [Quaternion::I, Quaternion::J, Quaternion::K]
            .iter()
            .map(|&a| {
                let l = quaternion_diag(&[a, Quaternion::ZERO]).to_complex();
                let r = quaternion_diag(&[a, a]).to_complex();
                MomentPair {
                    left: AlgebraElement::from_matrix_unchecked(l),
                    right: AlgebraElement::from_matrix_unchecked(r),
                }
            })
            .collect();
        Self::new("gromoll_meyer", catalog::sp(2), span).expect("valid embedding")
    }

    pub fn u_dim(&self) -> usize {
        self.u_basis.len()
    }

    /// One-parameter subgroup generated by the `k`-th basis element of `u`.
    pub fn u_exp(&self, k: usize, t: f64) -> (GroupElement, GroupElement) {
        let b = &self.u_basis[k];
        (
            crate::algebra::exp(&b.left.scale(t)),
            crate::algebra::exp(&b.right.scale(t)),
        )
    }
}

/// Pairings of `mp` with the orthonormal basis of `u`.
pub fn u_pairings(mp: &MomentPair, act: &BiquotientAction) -> Vec<f64> {
    act.u_basis.iter().map(|b| mp.inner(b)).collect()
}

/// Whether every `u`-pairing is below `tol` in absolute value.
pub fn is_horizontal(mp: &MomentPair, act: &BiquotientAction, tol: f64) -> bool {
    mp.dim() == act.algebra.ambient_dim() && u_pairings(mp, act).iter().all(|p| p.abs() < tol)
}

/// Spectral distance between `left` and `-right`; zero exactly on `R`.
pub fn image_residual(mp: &MomentPair) -> f64 {
    multiset_distance(&spectrum(&mp.left), &spectrum(&mp.right.scale(-1.0)))
}

pub fn in_image(mp: &MomentPair) -> bool {
    image_residual(mp) <= IMAGE_TOL * mp.norm().max(1.0)
}

/// Orthonormal basis of `T_p(R ∩ u⊥)` together with diagnostics.
#[derive(Clone, Debug, Serialize)]
pub struct TangentSpace {
    pub point: MomentPair,
    pub dim_r: usize,
    pub dim: usize,
    pub basis: Vec<MomentPair>,
    #[serde(skip)]
    coords: RMatrix,
    #[serde(skip)]
    algebra: Subalgebra,
}

impl TangentSpace {
    /// Distance of `v` from the span, relative to `max(1, |v|)`.
    pub fn residual(&self, v: &MomentPair) -> f64 {
        distance_to_span(&self.coords, &v.coords(&self.algebra)) / v.norm().max(1.0)
    }

    pub fn contains(&self, v: &MomentPair, tol: f64) -> bool {
        self.residual(v) < tol
    }

    pub fn algebra(&self) -> &Subalgebra {
        &self.algebra
    }
}

fn matrix_power(m: &CMatrix, k: usize) -> CMatrix {
    let mut out = CMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Tangent space of `R ∩ u⊥` at `p = (X, Y)`.
///
/// `T_p R` is spanned by the orbit directions `([a, X], 0)`, `(0, [b, Y])`
/// and the spectral directions `(Ad_c V, -V)` with `X = Ad_c(-Y)`; for the
/// latter it suffices to take `V` among projected powers of `-Y`, which are
/// carried to the same powers of `X` by any conjugator. The intersection with
/// `u⊥` is the null space of the `u`-pairings restricted to that span.
pub fn tangent_space_r_cap_uperp(p: &MomentPair, act: &BiquotientAction) -> Result<TangentSpace> {
    let g = &act.algebra;
    if p.dim() != g.ambient_dim() {
        return Err(Error::DimensionMismatch {
            left: g.ambient_dim(),
            right: p.dim(),
        });
    }
    let scale = p.norm().max(1.0);
    let residual = image_residual(p);
    if residual > IMAGE_TOL * scale {
        return Err(Error::NotInImage { residual });
    }
    let worst = u_pairings(p, act)
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    if worst > IMAGE_TOL * scale {
        return Err(Error::NotHorizontal { residual: worst });
    }

    let d = g.dim();
    let zero = AlgebraElement::zeros(p.dim());
    let mut gens: Vec<Vec<f64>> = Vec::with_capacity(2 * d + p.dim());
    for a in g.basis() {
        gens.push(
            MomentPair {
                left: a.commutator(&p.left),
                right: zero.clone(),
            }
            .coords(g),
        );
    }
    for b in g.basis() {
        gens.push(
            MomentPair {
                left: zero.clone(),
                right: b.commutator(&p.right),
            }
            .coords(g),
        );
    }
    let minus_y = p.right.matrix() * num_complex::Complex64::new(-1.0, 0.0);
    let mut phase = num_complex::Complex64::new(1.0, 0.0);
    for j in 1..=p.dim() {
        // i^{j-1} Z^j is skew-Hermitian for skew-Hermitian Z
        let xj = AlgebraElement::skew_part(&(matrix_power(p.left.matrix(), j) * phase));
        let yj = AlgebraElement::skew_part(&(matrix_power(&minus_y, j) * phase));
        let mut v = g.coords(&xj).iter().cloned().collect::<Vec<f64>>();
        v.extend(g.coords(&yj.scale(-1.0)).iter());
        gens.push(v);
        phase *= num_complex::Complex64::new(0.0, 1.0);
    }
    let gen_mat = RMatrix::from_fn(gens.len(), 2 * d, |i, j| gens[i][j]);
    let t_r = row_space(&gen_mat, SVD_TOL);
    let dim_r = t_r.nrows();
    let expected_r = 2 * d - act.rank;
    if dim_r != expected_r {
        return Err(Error::Degenerate(format!(
            "dim T_p R = {dim_r}, expected 2 dim g - rank = {expected_r}; p is not a regular point"
        )));
    }
    let k = act.u_dim();
    let c = RMatrix::from_fn(k, 2 * d, |i, j| act.u_basis[i].coords(g)[j]);
    let restricted = &c * t_r.transpose();
    let kernel = null_space(&restricted, SVD_TOL);
    let coords = &kernel * &t_r;
    let dim = coords.nrows();
    if dim + k != dim_r {
        return Err(Error::Degenerate(format!(
            "dim T_p(R ∩ u⊥) = {dim}, expected {}; R and u⊥ are not transversal at p",
            dim_r - k
        )));
    }
    let basis = (0..dim)
        .map(|i| {
            let row: Vec<f64> = coords.row(i).iter().cloned().collect();
            MomentPair::from_coords(g, &row)
        })
        .collect();
    Ok(TangentSpace {
        point: p.clone(),
        dim_r,
        dim,
        basis,
        coords,
        algebra: g.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{exp, real_matrix};
    use crate::sampling::{random_unitary, rng_for_sample};

    fn p_flag() -> AlgebraElement {
        AlgebraElement::new(real_matrix(3, &[0., 2., 1., -2., 0., 0., -1., 0., 0.])).unwrap()
    }

    #[test]
    fn identity_translate() {
        let id = GroupElement::identity(3);
        let mp = moment_bi(&id, &id, &p_flag()).unwrap();
        assert_eq!(mp, MomentPair::from_velocity(&p_flag()));
        assert!(in_image(&mp));
    }

    #[test]
    fn equivariance_and_image() {
        let su3 = catalog::su(3);
        for i in 0..20 {
            let mut rng = rng_for_sample(9, i);
            let (g1, g2, h, k) = (
                random_unitary(&su3, &mut rng),
                random_unitary(&su3, &mut rng),
                random_unitary(&su3, &mut rng),
                random_unitary(&su3, &mut rng),
            );
            let x = random_element(&su3, &mut rng);
            let lhs = moment_bi(&h.compose(&g1), &k.compose(&g2), &x).unwrap();
            let rhs = moment_bi(&g1, &g2, &x).unwrap().ad(&h, &k);
            assert!(lhs.sub(&rhs).norm() < 1e-10);
            assert!(in_image(&lhs));
        }
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let bad = GroupElement::from_matrix_unchecked(
            CMatrix::identity(3, 3) * num_complex::Complex64::new(2.0, 0.0),
        );
        assert!(moment_bi(&bad, &GroupElement::identity(3), &p_flag()).is_err());
    }

    #[test]
    fn homogeneous_moment() {
        let su3 = catalog::su(3);
        let m = catalog::block_su(3, 2, true);
        let mut rng = rng_from_seed(1);
        let b = random_element(&m, &mut rng);
        assert_eq!(
            moment_homogeneous(&GroupElement::identity(3), &b, &m).unwrap(),
            b
        );
        let a = random_unitary(&su3, &mut rng);
        let out = moment_homogeneous(&a, &b, &m).unwrap();
        assert!((out.pairing(&out) - b.pairing(&b)).abs() < 1e-10);
        assert!(multiset_distance(&spectrum(&out), &spectrum(&b)) < 1e-10);
        let outside = random_element(&su3, &mut rng);
        assert!(matches!(
            moment_homogeneous(&a, &outside, &m),
            Err(Error::NotInSubalgebra { .. })
        ));
    }

    #[test]
    fn latitude_clairaut_pairing() {
        let sphere = RoundSphere { ambient: 3 };
        let (r, s) = (0.6f64, 1.7f64);
        let z = (1.0 - r * r).sqrt();
        let p = [r, 0.0, z];
        let v = [0.0, s, 0.0];
        let fields = vec![rotation_field(0, 1)];
        let m = moment_isometric(&sphere, &p, &v, &fields).unwrap();
        assert!((m[0] - r * s).abs() < 1e-15);
        let zero = moment_isometric(&sphere, &p, &[0.0; 3], &fields).unwrap();
        assert_eq!(zero[0], 0.0);
        let meridian = [-z, 0.0, r];
        assert!(moment_isometric(&sphere, &p, &meridian, &fields).unwrap()[0].abs() < 1e-15);
        assert!(matches!(
            moment_isometric(&sphere, &[1.0, 1.0, 0.0], &v, &fields),
            Err(Error::OffManifold { .. })
        ));
    }

    #[test]
    fn berger_hopf_pairing_is_scaled() {
        let t = 2.0;
        let m = BergerSphere { n: 1, t };
        let p = [1.0, 0.0, 0.0, 0.0];
        let v = times_i(&p);
        let hopf: KillingField = Box::new(|q: &[f64]| times_i(q));
        let val = moment_isometric(&m, &p, &v, &[hopf]).unwrap();
        assert!((val[0] - t * t).abs() < 1e-15);
        let b = AlgebraElement::imaginary_diagonal(&[1.0, -1.0]);
        let val = moment_isometric(&m, &p, &v, &[linear_field(&b)]).unwrap();
        assert!((val[0] - t * t).abs() < 1e-15);
    }

    #[test]
    fn ranks() {
        assert_eq!(algebra_rank(&catalog::su(3)), 2);
        assert_eq!(algebra_rank(&catalog::sp(2)), 2);
        assert_eq!(algebra_rank(&catalog::so(4)), 2);
        assert_eq!(algebra_rank(&catalog::so(5)), 2);
    }

    #[test]
    fn eschenburg_point_is_horizontal() {
        let act = BiquotientAction::eschenburg(1);
        let p = MomentPair::from_velocity(&p_flag());
        assert!(is_horizontal(&p, &act, 1e-12));
        let d = AlgebraElement::imaginary_diagonal(&[1.0, -1.0, 0.0]);
        assert!(!is_horizontal(&MomentPair::from_velocity(&d), &act, 1e-6));
    }

    #[test]
    fn horizontality_is_u_invariant() {
        let act = BiquotientAction::eschenburg(2);
        let su3 = catalog::su(3);
        let mut rng = rng_from_seed(3);
        for _ in 0..10 {
            let g0 = random_unitary(&su3, &mut rng);
            let x = random_element(&su3, &mut rng);
            let mp = moment_bi(&g0, &GroupElement::identity(3), &x).unwrap();
            let before = is_horizontal(&mp, &act, 1e-8);
            let (u1, u2) = act.u_exp(0, 0.37);
            assert_eq!(before, is_horizontal(&mp.ad(&u1, &u2), &act, 1e-8));
        }
    }

    #[test]
    fn eschenburg_tangent_dimensions() {
        for m in 0..3 {
            let act = BiquotientAction::eschenburg(m);
            let ts =
                tangent_space_r_cap_uperp(&MomentPair::from_velocity(&p_flag()), &act).unwrap();
            assert_eq!(ts.dim_r, 14);
            assert_eq!(ts.dim, 13);
            for (i, a) in ts.basis.iter().enumerate() {
                for b in &act.u_basis {
                    assert!(a.inner(b).abs() < 1e-10);
                }
                for (j, b) in ts.basis.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((a.inner(b) - target).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn tangent_space_preconditions() {
        let act = BiquotientAction::eschenburg(1);
        let x = p_flag();
        let off_image = MomentPair {
            left: x.clone(),
            right: x.scale(-2.0),
        };
        assert!(matches!(
            tangent_space_r_cap_uperp(&off_image, &act),
            Err(Error::NotInImage { .. })
        ));
        let d = AlgebraElement::imaginary_diagonal(&[1.0, -1.0, 0.0]);
        assert!(matches!(
            tangent_space_r_cap_uperp(&MomentPair::from_velocity(&d), &act),
            Err(Error::NotHorizontal { .. })
        ));
    }

    #[test]
    fn orbit_curve_derivative_lies_in_tangent_space() {
        let act = BiquotientAction::eschenburg(1);
        let p = MomentPair::from_velocity(&p_flag());
        let ts = tangent_space_r_cap_uperp(&p, &act).unwrap();
        // (id x A) commutes with u, so this curve stays in R ∩ u⊥
        let a = AlgebraElement::new(crate::algebra::complex_matrix(
            3,
            &[
                (0., 0.),
                (0., 1.),
                (0., 0.),
                (0., 1.),
                (0., 0.),
                (0., 0.),
                (0., 0.),
                (0., 0.),
                (0., 0.),
            ],
        ))
        .unwrap();
        let h = 1e-5;
        let at = |t: f64| MomentPair {
            left: p.left.clone(),
            right: exp(&a.scale(t)).conjugate_element(&p.right),
        };
        let v = at(h).sub(&at(-h)).scale(0.5 / h);
        assert!(ts.contains(&v, 1e-8));
    }
}
