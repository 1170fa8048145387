//! Matrix Lie-algebra kernel.
//!
//! Every compact algebra in the lab (`su(n)`, `so(n)`, `sp(n)` inside
//! `u(2n)`, and direct sums realised block-diagonally) is stored as a space of
//! skew-Hermitian complex matrices. The dual is identified with the algebra
//! through the inner product `<X, Y> = -1/2 Re tr(XY)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance used when validating user-supplied algebra elements.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Unitarity residual above which a group element is rejected.
pub const UNITARITY_TOL: f64 = 1e-8;

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Frobenius norm of `A + A^*`.
pub fn skew_residual(m: &CMatrix) -> f64 {
    (m + m.adjoint()).norm()
}

fn scale_of(m: &CMatrix) -> f64 {
    m.norm().max(1.0)
}

/// Real matrix (given row-major) lifted to a complex matrix.
pub fn real_matrix(n: usize, rows: &[f64]) -> CMatrix {
    assert_eq!(rows.len(), n * n, "expected {} entries", n * n);
    CMatrix::from_row_iterator(n, n, rows.iter().map(|&x| c(x, 0.0)))
}

/// Complex matrix from row-major `(re, im)` pairs.
pub fn complex_matrix(n: usize, rows: &[(f64, f64)]) -> CMatrix {
    assert_eq!(rows.len(), n * n, "expected {} entries", n * n);
    CMatrix::from_row_iterator(n, n, rows.iter().map(|&(a, b)| c(a, b)))
}

/// An element of a compact matrix Lie algebra: a skew-Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    entries: CMatrix,
}

impl AlgebraElement {
    /// Validates squareness and skew-Hermiticity (relative tolerance 1e-12).
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let residual = skew_residual(&entries);
        if residual > CONSTRUCTION_TOL * scale_of(&entries) {
            return Err(Error::NotSkewHermitian { residual });
        }
        Ok(Self { entries })
    }

    /// Wraps a matrix that is skew-Hermitian by construction.
    pub fn from_matrix_unchecked(entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), entries.ncols());
        Self { entries }
    }

    /// Skew-Hermitian part of an arbitrary square matrix.
    pub fn skew_part(m: &CMatrix) -> Self {
        Self {
            entries: (m - m.adjoint()) * c(0.5, 0.0),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: CMatrix::zeros(dim, dim),
        }
    }

    /// `i * diag(values)`.
    pub fn imaginary_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (k, v) in values.iter().enumerate() {
            m[(k, k)] = c(0.0, *v);
        }
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn skew_hermitian_residual(&self) -> f64 {
        skew_residual(&self.entries)
    }

    /// `XY - YX`. Panics on a dimension mismatch; see [`bracket`] for the
    /// checked version.
    pub fn commutator(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "commutator of mismatched dims");
        Self {
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
        }
    }

    /// `-1/2 Re tr(XY)` without the dimension check.
    pub fn pairing(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        // tr(XY) = sum_ij X_ij Y_ji
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.entries[(i, j)] * other.entries[(j, i)]).re;
            }
        }
        -0.5 * acc
    }

    pub fn norm(&self) -> f64 {
        self.pairing(self).max(0.0).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: &self.entries * c(s, 0.0),
        }
    }

    /// Entrywise complex conjugate; equals `-X^T` on skew-Hermitian input.
    pub fn conjugate(&self) -> Self {
        Self {
            entries: self.entries.map(|z| z.conj()),
        }
    }

    /// `sum_k coeffs[k] * elems[k]`.
    pub fn combination(coeffs: &[f64], elems: &[AlgebraElement]) -> Self {
        assert_eq!(coeffs.len(), elems.len());
        let n = elems.first().map(|e| e.dim()).unwrap_or(0);
        let mut m = CMatrix::zeros(n, n);
        for (a, e) in coeffs.iter().zip(elems) {
            if *a != 0.0 {
                m += &e.entries * c(*a, 0.0);
            }
        }
        Self { entries: m }
    }

    /// Principal submatrix on `indices`.
    pub fn principal_block(&self, indices: &[usize]) -> CMatrix {
        let k = indices.len();
        CMatrix::from_fn(k, k, |i, j| self.entries[(indices[i], indices[j])])
    }
}

/// Rows of `[re, im]` pairs.
pub fn matrix_to_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare {
            rows: n,
            cols: bad.len(),
        });
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_pairs(&self.entries).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = matrix_from_pairs(&rows).map_err(serde::de::Error::custom)?;
        AlgebraElement::new(m).map_err(serde::de::Error::custom)
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        AlgebraElement {
            entries: -&self.entries,
        }
    }
}

impl Mul<f64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: f64) -> AlgebraElement {
        self.scale(s)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_matrix(&self.entries, f)
    }
}

fn fmt_matrix(m: &CMatrix, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for i in 0..m.nrows() {
        write!(f, "[")?;
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        writeln!(f, "]")?;
    }
    Ok(())
}

/// An element of a compact matrix group: a unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    entries: CMatrix,
}

impl GroupElement {
    /// Validates unitarity to [`UNITARITY_TOL`].
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        let g = Self { entries };
        let residual = g.unitarity_residual();
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(g)
    }

    pub fn from_matrix_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// `|| g g^* - I ||_F`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim();
        (&self.entries * self.entries.adjoint() - CMatrix::identity(n, n)).norm()
    }

    pub fn determinant(&self) -> Complex64 {
        self.entries.determinant()
    }

    pub fn inverse(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            entries: &self.entries * &other.entries,
        }
    }

    /// `g X g^*` without validation.
    pub fn conjugate_element(&self, x: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::from_matrix_unchecked(&self.entries * x.matrix() * self.entries.adjoint())
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        Self {
            entries: self.entries.map(|z| z.conj()),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_matrix(&self.entries, f)
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Lie bracket `[X, Y] = XY - YX`.
pub fn bracket(x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
    check_dims(x.dim(), y.dim())?;
    Ok(x.commutator(y))
}

/// The inner product `-1/2 Re tr(XY)`.
pub fn inner(x: &AlgebraElement, y: &AlgebraElement) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    Ok(x.pairing(y))
}

/// Adjoint action `Ad_g(X) = g X g^{-1}`.
pub fn ad_group(g: &GroupElement, x: &AlgebraElement) -> Result<AlgebraElement> {
    check_dims(g.dim(), x.dim())?;
    let residual = g.unitarity_residual();
    if residual > UNITARITY_TOL {
        return Err(Error::NotUnitary { residual });
    }
    Ok(g.conjugate_element(x))
}

/// Unitary eigendecomposition of a skew-Hermitian matrix: `X = U diag(i w) U^*`.
fn skew_eigen(x: &CMatrix) -> (DVector<f64>, CMatrix) {
    // H = -iX is Hermitian and X = iH.
    let h = x * c(0.0, -1.0);
    let h = (&h + h.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    (eig.eigenvalues, eig.eigenvectors)
}

/// Matrix exponential of a skew-Hermitian matrix via its unitary
/// eigendecomposition.
pub fn exp(x: &AlgebraElement) -> GroupElement {
    let n = x.dim();
    if n == 0 {
        return GroupElement::identity(0);
    }
    let (w, u) = skew_eigen(x.matrix());
    let phases = DVector::from_iterator(n, w.iter().map(|&t| Complex64::from_polar(1.0, t)));
    let scaled = CMatrix::from_fn(n, n, |i, j| u[(i, j)] * phases[j]);
    GroupElement {
        entries: scaled * u.adjoint(),
    }
}

/// Canonical ordering: imaginary part descending, ties by real part descending.
pub fn canonical_order(a: &Complex64, b: &Complex64) -> Ordering {
    const TIE: f64 = 1e-12;
    if (a.im - b.im).abs() > TIE {
        b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
    } else {
        b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal)
    }
}

/// Eigenvalues with multiplicity in canonical order. Skew-Hermitian input
/// goes through the Hermitian solver and yields exactly imaginary values.
pub fn spectrum(x: &AlgebraElement) -> Vec<Complex64> {
    spectrum_of_matrix(x.matrix())
}

pub fn spectrum_of_matrix(m: &CMatrix) -> Vec<Complex64> {
    let mut values: Vec<Complex64> = if skew_residual(m) <= 1e-10 * scale_of(m) {
        let (w, _) = skew_eigen(m);
        w.iter().map(|&t| c(0.0, t)).collect()
    } else {
        let schur = Schur::new(m.clone());
        match schur.eigenvalues() {
            Some(v) => v.iter().cloned().collect(),
            None => {
                let (_, t) = schur.unpack();
                (0..t.nrows()).map(|k| t[(k, k)]).collect()
            }
        }
    };
    values.sort_by(canonical_order);
    values
}

/// Largest distance between two canonically ordered multisets of equal size.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut bs: Vec<Complex64> = b.to_vec();
    let mut worst: f64 = 0.0;
    // greedy nearest matching; adequate for the well-separated spectra we compare
    for z in a {
        let (idx, d) = bs
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
            .expect("non-empty");
        worst = worst.max(d);
        bs.swap_remove(idx);
    }
    worst
}

/// A named subalgebra given by an orthonormal basis in its ambient algebra.
///
/// `readout` optionally names the rows/columns of the block that carries the
/// abstract subalgebra (for example the upper-left `2x2` block of `u(2)`
/// sitting in `su(3)`); integrals take their traces on that block.
#[derive(Clone, Debug, PartialEq)]
pub struct Subalgebra {
    name: String,
    ambient_dim: usize,
    basis: Vec<AlgebraElement>,
    readout: Option<Vec<usize>>,
}

const ORTHONORMAL_TOL: f64 = 1e-10;
const CLOSURE_TOL: f64 = 1e-10;

impl Subalgebra {
    /// Builds a subalgebra from an orthonormal basis, checking orthonormality
    /// and closure under the bracket.
    pub fn new(
        name: impl Into<String>,
        ambient_dim: usize,
        basis: Vec<AlgebraElement>,
        readout: Option<Vec<usize>>,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidSubalgebra {
            name: name.clone(),
            reason,
        };
        for b in &basis {
            if b.dim() != ambient_dim {
                return Err(invalid(format!(
                    "basis element of dim {} in ambient dim {}",
                    b.dim(),
                    ambient_dim
                )));
            }
            let residual = b.skew_hermitian_residual();
            if residual > CONSTRUCTION_TOL * 10.0 {
                return Err(invalid(format!(
                    "basis element not skew-Hermitian ({residual:.2e})"
                )));
            }
        }
        if let Some(idx) = &readout {
            if idx.iter().any(|&k| k >= ambient_dim) {
                return Err(invalid("readout index out of range".into()));
            }
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                let got = a.pairing(b);
                if (got - target).abs() > ORTHONORMAL_TOL {
                    return Err(invalid(format!(
                        "basis not orthonormal: <b{i}, b{j}> = {got:.3e}"
                    )));
                }
            }
        }
        let sub = Self {
            name: name.clone(),
            ambient_dim,
            basis,
            readout,
        };
        for i in 0..sub.basis.len() {
            for j in (i + 1)..sub.basis.len() {
                let br = sub.basis[i].commutator(&sub.basis[j]);
                let residual = (&br - &sub.project_unchecked(&br)).norm();
                if residual > CLOSURE_TOL * br.norm().max(1.0) {
                    return Err(invalid(format!(
                        "not closed under bracket: [b{i}, b{j}] leaves span by {residual:.3e}"
                    )));
                }
            }
        }
        Ok(sub)
    }

    /// Orthonormalises a spanning list (Gram-Schmidt, dropping dependent
    /// vectors) and then validates as in [`Subalgebra::new`].
    pub fn from_spanning(
        name: impl Into<String>,
        ambient_dim: usize,
        spanning: Vec<AlgebraElement>,
        readout: Option<Vec<usize>>,
    ) -> Result<Self> {
        let basis = gram_schmidt(&spanning);
        Self::new(name, ambient_dim, basis, readout)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[AlgebraElement] {
        &self.basis
    }

    pub fn readout(&self) -> Option<&[usize]> {
        self.readout.as_deref()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub(crate) fn project_unchecked(&self, x: &AlgebraElement) -> AlgebraElement {
        let coeffs: Vec<f64> = self.basis.iter().map(|b| x.pairing(b)).collect();
        if self.basis.is_empty() {
            return AlgebraElement::zeros(self.ambient_dim);
        }
        AlgebraElement::combination(&coeffs, &self.basis)
    }

    /// Orthogonal projection onto the subalgebra.
    pub fn project(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        check_dims(self.ambient_dim, x.dim())?;
        Ok(self.project_unchecked(x))
    }

    /// Coordinates in the orthonormal basis.
    pub fn coords(&self, x: &AlgebraElement) -> DVector<f64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| x.pairing(b)))
    }

    pub fn from_coords(&self, coords: &[f64]) -> AlgebraElement {
        assert_eq!(coords.len(), self.basis.len());
        if self.basis.is_empty() {
            return AlgebraElement::zeros(self.ambient_dim);
        }
        AlgebraElement::combination(coords, &self.basis)
    }

    /// Norm of the component of `x` orthogonal to the subalgebra.
    pub fn residual(&self, x: &AlgebraElement) -> f64 {
        (x - &self.project_unchecked(x)).norm()
    }

    /// The block that carries the abstract subalgebra (the whole matrix when
    /// no readout is set).
    pub fn read_block(&self, x: &AlgebraElement) -> CMatrix {
        match &self.readout {
            Some(idx) => x.principal_block(idx),
            None => x.matrix().clone(),
        }
    }

    /// Pads a readout-block matrix back into the ambient dimension.
    pub fn pad_block(&self, block: &CMatrix) -> CMatrix {
        match &self.readout {
            Some(idx) => {
                let mut m = CMatrix::zeros(self.ambient_dim, self.ambient_dim);
                for (i, &a) in idx.iter().enumerate() {
                    for (j, &b) in idx.iter().enumerate() {
                        m[(a, b)] = block[(i, j)];
                    }
                }
                m
            }
            None => block.clone(),
        }
    }

    /// Whether every basis element of `self` lies in the span of `other`.
    pub fn is_contained_in(&self, other: &Subalgebra, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim && self.basis.iter().all(|b| other.residual(b) < tol)
    }
}

/// Orthogonal projection onto `h` (free-function form).
pub fn project(h: &Subalgebra, x: &AlgebraElement) -> Result<AlgebraElement> {
    h.project(x)
}

/// Gram-Schmidt under `inner`, dropping vectors with residual norm < 1e-12.
pub fn gram_schmidt(elems: &[AlgebraElement]) -> Vec<AlgebraElement> {
    let mut out: Vec<AlgebraElement> = Vec::new();
    for e in elems {
        let mut v = e.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for o in &out {
                let a = v.pairing(o);
                v = &v - &o.scale(a);
            }
        }
        let n = v.norm();
        if n > 1e-12 * e.norm().max(1.0) {
            out.push(v.scale(1.0 / n));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::sampling::{random_element, random_unitary, rng_from_seed};

    fn x_flag() -> AlgebraElement {
        AlgebraElement::new(real_matrix(3, &[0., 1., 1., -1., 0., 0., -1., 0., 0.])).unwrap()
    }

    #[test]
    fn flag_bracket_matches_closed_form() {
        let (al, be, ga) = (0.7, -1.9, 1.2);
        let y = AlgebraElement::imaginary_diagonal(&[al, be, ga]);
        let br = bracket(&x_flag(), &y).unwrap();
        let z = |v: f64| c(0.0, v);
        let expected = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0., 0.),
                z(be - al),
                z(ga - al),
                z(be - al),
                c(0., 0.),
                c(0., 0.),
                z(ga - al),
                c(0., 0.),
                c(0., 0.),
            ],
        );
        assert!((br.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn self_bracket_vanishes() {
        let x = x_flag();
        assert_eq!(bracket(&x, &x).unwrap().matrix().norm(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = AlgebraElement::zeros(2);
        let b = AlgebraElement::zeros(3);
        assert!(matches!(
            bracket(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn non_skew_input_rejected() {
        let m = real_matrix(2, &[1., 0., 0., 1.]);
        assert!(matches!(
            AlgebraElement::new(m),
            Err(Error::NotSkewHermitian { .. })
        ));
    }

    #[test]
    fn inner_of_diag() {
        let x = AlgebraElement::imaginary_diagonal(&[1., -1., 0.]);
        assert!((inner(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let off = x_flag();
        assert_eq!(inner(&x, &off).unwrap(), 0.0);
    }

    #[test]
    fn ad_identity_and_non_unitary() {
        let x = x_flag();
        let id = GroupElement::identity(3);
        assert_eq!(ad_group(&id, &x).unwrap(), x);
        let bad = GroupElement::from_matrix_unchecked(real_matrix(
            3,
            &[2., 0., 0., 0., 1., 0., 0., 0., 1.],
        ));
        assert!(matches!(ad_group(&bad, &x), Err(Error::NotUnitary { .. })));
        assert!(GroupElement::new(bad.matrix().clone()).is_err());
    }

    #[test]
    fn ad_derivative_is_bracket() {
        // central finite difference of t -> Ad(exp(tA)) X at 0, error O(h^2)
        let su3 = catalog::su(3);
        let mut rng = rng_from_seed(5);
        let a = random_element(&su3, &mut rng);
        let x = random_element(&su3, &mut rng);
        let exact = a.commutator(&x);
        let mut prev = f64::INFINITY;
        for h in [1e-2, 5e-3, 2.5e-3] {
            let plus = exp(&a.scale(h)).conjugate_element(&x);
            let minus = exp(&a.scale(-h)).conjugate_element(&x);
            let fd = (&plus - &minus).scale(0.5 / h);
            let err = (&fd - &exact).norm();
            assert!(err < prev);
            prev = err;
            assert!(err < 10.0 * h * h * a.norm().powi(3) * x.norm());
        }
    }

    #[test]
    fn exp_cases() {
        let zero = AlgebraElement::zeros(3);
        assert!((exp(&zero).matrix() - CMatrix::identity(3, 3)).norm() < 1e-15);
        let x =
            AlgebraElement::imaginary_diagonal(&[std::f64::consts::PI, -std::f64::consts::PI, 0.0]);
        let expected = real_matrix(3, &[-1., 0., 0., 0., -1., 0., 0., 0., 1.]);
        assert!((exp(&x).matrix() - expected).norm() < 1e-14);
        let mut rng = rng_from_seed(1);
        let y = random_element(&catalog::su(3), &mut rng);
        let prod = exp(&y).compose(&exp(&y.scale(-1.0)));
        assert!((prod.matrix() - CMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(exp(&y).unitarity_residual() < 1e-12);
    }

    #[test]
    fn exp_is_one_parameter_subgroup() {
        let mut rng = rng_from_seed(2);
        let y = random_element(&catalog::sp(2), &mut rng);
        let (s, t) = (0.37, -1.21);
        let lhs = exp(&y.scale(s + t));
        let rhs = exp(&y.scale(s)).compose(&exp(&y.scale(t)));
        assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-10);
    }

    #[test]
    fn spectrum_cases() {
        let p =
            AlgebraElement::new(real_matrix(3, &[0., 2., 1., -2., 0., 0., -1., 0., 0.])).unwrap();
        let s = spectrum(&p);
        let r5 = 5f64.sqrt();
        assert!((s[0] - c(0.0, r5)).norm() < 1e-12);
        assert!(s[1].norm() < 1e-12);
        assert!((s[2] - c(0.0, -r5)).norm() < 1e-12);
        let d = spectrum(&AlgebraElement::imaginary_diagonal(&[1., -1., 0.]));
        assert_eq!(d.len(), 3);
        assert!((d[0] - c(0., 1.)).norm() < 1e-15 && (d[2] - c(0., -1.)).norm() < 1e-15);
        for z in spectrum(&random_element(&catalog::su(4), &mut rng_from_seed(3))) {
            assert!(z.re.abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_similarity_invariance() {
        let mut rng = rng_from_seed(11);
        let su3 = catalog::su(3);
        let x = random_element(&su3, &mut rng);
        let g = random_unitary(&su3, &mut rng);
        let y = ad_group(&g, &x).unwrap();
        assert!(multiset_distance(&spectrum(&x), &spectrum(&y)) < 1e-10);
    }

    #[test]
    fn general_spectrum_uses_schur() {
        let m = complex_matrix(2, &[(1.0, 0.0), (2.0, 0.0), (0.0, 0.0), (3.0, 0.0)]);
        let s = spectrum_of_matrix(&m);
        assert!((s[0] - c(3.0, 0.0)).norm() < 1e-12);
        assert!((s[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn projection_properties() {
        let su3 = catalog::su(3);
        let u2 = catalog::resolve("u2_upper_su3").unwrap();
        let mut rng = rng_from_seed(4);
        let x = random_element(&su3, &mut rng);
        let y = random_element(&su3, &mut rng);
        let px = project(&u2, &x).unwrap();
        assert!((&project(&u2, &px).unwrap() - &px).norm() < 1e-14);
        let lhs = inner(&px, &y).unwrap();
        let rhs = inner(&x, &project(&u2, &y).unwrap()).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let perp = &x - &px;
        assert!(project(&u2, &perp).unwrap().norm() < 1e-14);
        assert!(project(&u2, &AlgebraElement::zeros(4)).is_err());
    }

    #[test]
    fn non_closed_span_rejected() {
        // two off-diagonal generators of su(2) without their bracket
        let a = AlgebraElement::new(real_matrix(2, &[0., 1., -1., 0.])).unwrap();
        let b = AlgebraElement::new(complex_matrix(2, &[(0., 0.), (0., 1.), (0., 1.), (0., 0.)]))
            .unwrap();
        let err = Subalgebra::from_spanning("broken", 2, vec![a, b], None).unwrap_err();
        assert!(matches!(err, Error::InvalidSubalgebra { .. }));
    }
}
