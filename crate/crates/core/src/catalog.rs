//! Named subalgebras and their JSON form.
//!
//! Names understood by [`resolve`]:
//!
//! | name | meaning |
//! |------|---------|
//! | `su{n}`, `so{n}`, `sp{n}` | full algebras (`sp{n}` inside `u(2n)`) |
//! | `t_su{n}` | diagonal torus |
//! | `u{k}_upper_su{n}` | `s(u(k) + u(n-k))`, read out on the upper `k` block |
//! | `u{k}_lower_su{n}` | `s(u(n-k) + u(k))`, read out on the lower `k` block |
//! | `u1_su3` | `diag(z, 1, conj z)`, read out on the first entry |
//! | `so{k}_upper_so{n}`, `so2_lower_so{n}` | block orthogonal subalgebras |
//! | `so2_sp2`, `sp1x1_sp2`, `1xsp1_sp2`, `sp1xsp1_sp2`, `l_sp2` | `sp(2)` chain pieces |
//! | `diag_su{n}` | diagonal `su(n)` in `su(n) + su(n)` (block size `2n`) |
//! | `u_{k}_{l}_{p}_{q}` | the line through `(diag(k,l,-k-l), diag(p,q,-p-q))` in `su(3) + su(3)` |
//! | `A|B` | direct sum of two names (`0` for the zero algebra), block size `2n` |

use serde::{Deserialize, Serialize};

use crate::algebra::{c, AlgebraElement, CMatrix, Subalgebra};
use crate::error::{Error, Result};
use crate::expr::Scalar;
use crate::quaternion::{quaternion_diag, Quaternion, QuaternionMatrix};

fn unit(n: usize, i: usize, j: usize, z: num_complex::Complex64) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = z;
    m
}

fn off_diagonal_pair(n: usize, i: usize, j: usize) -> [AlgebraElement; 2] {
    let real = unit(n, i, j, c(1.0, 0.0)) - unit(n, j, i, c(1.0, 0.0));
    let imag = unit(n, i, j, c(0.0, 1.0)) + unit(n, j, i, c(0.0, 1.0));
    [
        AlgebraElement::from_matrix_unchecked(real),
        AlgebraElement::from_matrix_unchecked(imag),
    ]
}

fn traceless_diagonals(n: usize, range: std::ops::Range<usize>) -> Vec<AlgebraElement> {
    let idx: Vec<usize> = range.collect();
    idx.windows(2)
        .map(|w| {
            let mut d = vec![0.0; n];
            d[w[0]] = 1.0;
            d[w[1]] = -1.0;
            AlgebraElement::imaginary_diagonal(&d)
        })
        .collect()
}

fn build(
    name: String,
    n: usize,
    spanning: Vec<AlgebraElement>,
    readout: Option<Vec<usize>>,
) -> Subalgebra {
    Subalgebra::from_spanning(name, n, spanning, readout).expect("catalog subalgebra is valid")
}

/// `su(n)`.
pub fn su(n: usize) -> Subalgebra {
    let mut span = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            span.extend(off_diagonal_pair(n, i, j));
        }
    }
    span.extend(traceless_diagonals(n, 0..n));
    build(format!("su{n}"), n, span, None)
}

/// `so(n)`: real skew-symmetric matrices.
pub fn so(n: usize) -> Subalgebra {
    let mut span = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            span.push(off_diagonal_pair(n, i, j)[0].clone());
        }
    }
    build(format!("so{n}"), n, span, None)
}

fn imaginary_units() -> [Quaternion; 3] {
    [Quaternion::I, Quaternion::J, Quaternion::K]
}

fn q_slot(n: usize, i: usize, j: usize, q: Quaternion) -> AlgebraElement {
    let mut m = QuaternionMatrix::zeros(n);
    m.set(i, j, q);
    if i != j {
        m.set(j, i, -q.conj());
    }
    AlgebraElement::from_matrix_unchecked(m.to_complex())
}

/// `sp(n)`: skew-quaternion-Hermitian `n x n` matrices, embedded in `u(2n)`.
pub fn sp(n: usize) -> Subalgebra {
    let mut span = Vec::new();
    for i in 0..n {
        for q in imaginary_units() {
            span.push(q_slot(n, i, i, q));
        }
        for j in (i + 1)..n {
            for q in [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K] {
                span.push(q_slot(n, i, j, q));
            }
        }
    }
    build(format!("sp{n}"), 2 * n, span, None)
}

/// Diagonal torus of `su(n)`.
pub fn torus_su(n: usize) -> Subalgebra {
    build(format!("t_su{n}"), n, traceless_diagonals(n, 0..n), None)
}

/// Block-diagonal `s(u(k) + u(n-k))`, read out on the upper `k` block
/// (`upper`) or on the lower block of size `k` for `s(u(n-k) + u(k))`.
pub fn block_su(n: usize, k: usize, upper: bool) -> Subalgebra {
    assert!(k >= 1 && k <= n, "block size {k} out of range for su({n})");
    let name = format!("u{k}_{}_su{n}", if upper { "upper" } else { "lower" });
    if k == n {
        return su(n).with_name(name);
    }
    let (a, b) = if upper {
        (0..k, k..n)
    } else {
        (0..n - k, n - k..n)
    };
    let mut span = Vec::new();
    for r in [a.clone(), b.clone()] {
        for i in r.clone() {
            for j in (i + 1)..r.end {
                span.extend(off_diagonal_pair(n, i, j));
            }
        }
    }
    span.extend(traceless_diagonals(n, 0..n));
    let readout: Vec<usize> = if upper { a.collect() } else { b.collect() };
    build(name, n, span, Some(readout))
}

/// The circle `diag(z, 1, conj z)` in `su(3)`; its algebra is spanned by
/// `diag(i, 0, -i)` and the abstract `u(1)` is read off the first entry.
pub fn u1_su3() -> Subalgebra {
    build(
        "u1_su3".into(),
        3,
        vec![AlgebraElement::imaginary_diagonal(&[1.0, 0.0, -1.0])],
        Some(vec![0]),
    )
}

/// `so(k)` in the upper-left corner of `so(n)`.
pub fn so_upper(n: usize, k: usize) -> Subalgebra {
    let mut span = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            span.push(off_diagonal_pair(n, i, j)[0].clone());
        }
    }
    build(
        format!("so{k}_upper_so{n}"),
        n,
        span,
        Some((0..k).collect()),
    )
}

/// `so(2)` in the lower-right corner of `so(n)`.
pub fn so2_lower(n: usize) -> Subalgebra {
    let span = vec![off_diagonal_pair(n, n - 2, n - 1)[0].clone()];
    build(
        format!("so2_lower_so{n}"),
        n,
        span,
        Some(vec![n - 2, n - 1]),
    )
}

fn sp2_from(name: &str, span: Vec<QuaternionMatrix>) -> Subalgebra {
    let span = span
        .into_iter()
        .map(|q| AlgebraElement::from_matrix_unchecked(q.to_complex()))
        .collect();
    build(name.to_string(), 4, span, None)
}

/// Lie algebra of the real rotations `F(t)` in `Sp(2)`.
pub fn so2_sp2() -> Subalgebra {
    sp2_from(
        "so2_sp2",
        vec![QuaternionMatrix::from_rows(&[
            &[Quaternion::ZERO, Quaternion::ONE],
            &[-Quaternion::ONE, Quaternion::ZERO],
        ])],
    )
}

/// `sp(1) x 1`: imaginary quaternions in the first diagonal slot.
pub fn sp1x1_sp2() -> Subalgebra {
    sp2_from(
        "sp1x1_sp2",
        imaginary_units()
            .iter()
            .map(|&q| quaternion_diag(&[q, Quaternion::ZERO]))
            .collect(),
    )
}

/// `1 x sp(1)`: imaginary quaternions in the second diagonal slot.
pub fn onexsp1_sp2() -> Subalgebra {
    sp2_from(
        "1xsp1_sp2",
        imaginary_units()
            .iter()
            .map(|&q| quaternion_diag(&[Quaternion::ZERO, q]))
            .collect(),
    )
}

/// `sp(1) x sp(1)`: diagonal quaternionic matrices.
pub fn sp1xsp1_sp2() -> Subalgebra {
    let mut span: Vec<QuaternionMatrix> = imaginary_units()
        .iter()
        .map(|&q| quaternion_diag(&[q, Quaternion::ZERO]))
        .collect();
    span.extend(
        imaginary_units()
            .iter()
            .map(|&q| quaternion_diag(&[Quaternion::ZERO, q])),
    );
    sp2_from("sp1xsp1_sp2", span)
}

/// The line through `diag(0, k)`.
pub fn l_sp2() -> Subalgebra {
    sp2_from(
        "l_sp2",
        vec![quaternion_diag(&[Quaternion::ZERO, Quaternion::K])],
    )
}

/// Block-diagonal embedding of a pair of elements of `n x n` algebras.
pub fn block_pair(left: &AlgebraElement, right: &AlgebraElement) -> AlgebraElement {
    let n = left.dim();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(left.matrix());
    m.view_mut((n, n), (n, n)).copy_from(right.matrix());
    AlgebraElement::from_matrix_unchecked(m)
}

/// Splits a `2n x 2n` block-diagonal matrix into its two diagonal blocks.
pub fn split_pair(x: &AlgebraElement) -> (AlgebraElement, AlgebraElement) {
    let n = x.dim() / 2;
    let l = x.matrix().view((0, 0), (n, n)).into_owned();
    let r = x.matrix().view((n, n), (n, n)).into_owned();
    (
        AlgebraElement::from_matrix_unchecked(l),
        AlgebraElement::from_matrix_unchecked(r),
    )
}

/// Direct sum `a + b` realised block-diagonally; `None` is the zero algebra
/// of the given block size.
pub fn direct_sum(
    name: impl Into<String>,
    n: usize,
    a: Option<&Subalgebra>,
    b: Option<&Subalgebra>,
) -> Subalgebra {
    let zero = AlgebraElement::zeros(n);
    let mut basis = Vec::new();
    if let Some(a) = a {
        basis.extend(a.basis().iter().map(|x| block_pair(x, &zero)));
    }
    if let Some(b) = b {
        basis.extend(b.basis().iter().map(|y| block_pair(&zero, y)));
    }
    Subalgebra::new(name, 2 * n, basis, None).expect("direct sum of valid subalgebras")
}

/// Diagonal `su(n)` inside `su(n) + su(n)`.
pub fn diag_su(n: usize) -> Subalgebra {
    let span = su(n).basis().iter().map(|x| block_pair(x, x)).collect();
    build(format!("diag_su{n}"), 2 * n, span, None)
}

/// The line through `(diag(k,l,-k-l), diag(p,q,-p-q))` in `su(3) + su(3)`.
pub fn u_klpq(k: i64, l: i64, p: i64, q: i64) -> Result<Subalgebra> {
    let (kf, lf, pf, qf) = (k as f64, l as f64, p as f64, q as f64);
    let left = AlgebraElement::imaginary_diagonal(&[kf, lf, -kf - lf]);
    let right = AlgebraElement::imaginary_diagonal(&[pf, qf, -pf - qf]);
    let v = block_pair(&left, &right);
    if v.norm() == 0.0 {
        return Err(Error::InvalidInput("u_klpq with all weights zero".into()));
    }
    Subalgebra::from_spanning(format!("u_{k}_{l}_{p}_{q}"), 6, vec![v], None)
}

fn parse_usize(s: &str) -> Option<usize> {
    s.parse().ok().filter(|&n| n >= 1)
}

fn unknown(name: &str) -> Error {
    Error::Unknown {
        kind: "subalgebra",
        name: name.to_string(),
    }
}

/// Looks a subalgebra up by name.
pub fn resolve(name: &str) -> Result<Subalgebra> {
    if let Some((a, b)) = name.split_once('|') {
        return resolve_sum(name, a.trim(), b.trim());
    }
    match name {
        "u1_su3" => return Ok(u1_su3()),
        "so2_sp2" => return Ok(so2_sp2()),
        "sp1x1_sp2" => return Ok(sp1x1_sp2()),
        "1xsp1_sp2" => return Ok(onexsp1_sp2()),
        "sp1xsp1_sp2" => return Ok(sp1xsp1_sp2()),
        "l_sp2" => return Ok(l_sp2()),
        _ => {}
    }
    if let Some(rest) = name.strip_prefix("u_") {
        let parts: Vec<i64> = rest.split('_').filter_map(|s| s.parse().ok()).collect();
        if parts.len() == 4 && rest.split('_').count() == 4 {
            return u_klpq(parts[0], parts[1], parts[2], parts[3]);
        }
        return Err(unknown(name));
    }
    if let Some(n) = name.strip_prefix("t_su").and_then(parse_usize) {
        return Ok(torus_su(n));
    }
    if let Some(n) = name.strip_prefix("diag_su").and_then(parse_usize) {
        return Ok(diag_su(n));
    }
    if let Some(rest) = name.strip_prefix('u') {
        for (tag, upper) in [("_upper_su", true), ("_lower_su", false)] {
            if let Some((k, n)) = rest.split_once(tag) {
                if let (Some(k), Some(n)) = (parse_usize(k), parse_usize(n)) {
                    if k <= n && n >= 2 {
                        return Ok(block_su(n, k, upper));
                    }
                }
                return Err(unknown(name));
            }
        }
    }
    if let Some(rest) = name.strip_prefix("so") {
        if let Some((k, n)) = rest.split_once("_upper_so") {
            if let (Some(k), Some(n)) = (parse_usize(k), parse_usize(n)) {
                if k <= n {
                    return Ok(so_upper(n, k));
                }
            }
            return Err(unknown(name));
        }
        if let Some(n) = rest.strip_prefix("2_lower_so").and_then(parse_usize) {
            if n >= 2 {
                return Ok(so2_lower(n));
            }
            return Err(unknown(name));
        }
        if let Some(n) = parse_usize(rest) {
            return Ok(so(n));
        }
    }
    if let Some(n) = name.strip_prefix("su").and_then(parse_usize) {
        return Ok(su(n));
    }
    if let Some(n) = name.strip_prefix("sp").and_then(parse_usize) {
        return Ok(sp(n));
    }
    Err(unknown(name))
}

fn resolve_sum(name: &str, a: &str, b: &str) -> Result<Subalgebra> {
    let side = |s: &str| -> Result<Option<Subalgebra>> {
        if s == "0" {
            Ok(None)
        } else {
            resolve(s).map(Some)
        }
    };
    let (sa, sb) = (side(a)?, side(b)?);
    let n = match (&sa, &sb) {
        (Some(x), Some(y)) => {
            if x.ambient_dim() != y.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    left: x.ambient_dim(),
                    right: y.ambient_dim(),
                });
            }
            x.ambient_dim()
        }
        (Some(x), None) | (None, Some(x)) => x.ambient_dim(),
        (None, None) => return Err(unknown(name)),
    };
    Ok(direct_sum(name, n, sa.as_ref(), sb.as_ref()))
}

/// JSON form: each basis matrix is a list of rows of `[re, im]` pairs, whose
/// entries may be numbers or expression strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubalgebraDoc {
    pub name: String,
    pub ambient_dim: usize,
    pub basis: Vec<Vec<Vec<[Scalar; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout: Option<Vec<usize>>,
}

impl SubalgebraDoc {
    pub fn from_subalgebra(h: &Subalgebra) -> Self {
        let basis = h
            .basis()
            .iter()
            .map(|b| {
                let m = b.matrix();
                (0..m.nrows())
                    .map(|i| {
                        (0..m.ncols())
                            .map(|j| [Scalar::Number(m[(i, j)].re), Scalar::Number(m[(i, j)].im)])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            name: h.name().to_string(),
            ambient_dim: h.ambient_dim(),
            basis,
            readout: h.readout().map(|r| r.to_vec()),
        }
    }

    /// Validates the document. The listed matrices need only span the
    /// subalgebra; they are orthonormalised before the closure check.
    pub fn build(&self) -> Result<Subalgebra> {
        let n = self.ambient_dim;
        let mut span = Vec::with_capacity(self.basis.len());
        for (k, rows) in self.basis.iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidSubalgebra {
                    name: self.name.clone(),
                    reason: format!("basis element {k} is not {n}x{n}"),
                });
            }
            let mut m = CMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                for (j, [re, im]) in row.iter().enumerate() {
                    m[(i, j)] = c(re.value()?, im.value()?);
                }
            }
            span.push(AlgebraElement::new(m)?);
        }
        Subalgebra::from_spanning(self.name.clone(), n, span, self.readout.clone())
    }
}

/// Parses a single subalgebra document or a list of them.
pub fn load_catalog_str(text: &str) -> Result<Vec<Subalgebra>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Docs {
        One(SubalgebraDoc),
        Many(Vec<SubalgebraDoc>),
    }
    let docs = match serde_json::from_str(text)? {
        Docs::One(d) => vec![d],
        Docs::Many(v) => v,
    };
    docs.iter().map(SubalgebraDoc::build).collect()
}

pub fn load_catalog(path: &std::path::Path) -> Result<Vec<Subalgebra>> {
    load_catalog_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(su(3).dim(), 8);
        assert_eq!(su(4).dim(), 15);
        assert_eq!(so(4).dim(), 6);
        assert_eq!(sp(2).dim(), 10);
        assert_eq!(sp(1).dim(), 3);
        assert_eq!(torus_su(3).dim(), 2);
        assert_eq!(block_su(3, 2, true).dim(), 4);
        assert_eq!(block_su(3, 1, false).dim(), 4);
        assert_eq!(block_su(3, 3, true).dim(), 8);
        assert_eq!(so2_sp2().dim(), 1);
        assert_eq!(sp1xsp1_sp2().dim(), 6);
        assert_eq!(diag_su(3).dim(), 8);
        assert_eq!(u_klpq(1, -1, 2, 2).unwrap().dim(), 1);
    }

    #[test]
    fn chain_inclusions() {
        let tol = 1e-12;
        assert!(u1_su3().is_contained_in(&block_su(3, 2, true), tol));
        assert!(block_su(3, 2, true).is_contained_in(&su(3), tol));
        assert!(sp1x1_sp2().is_contained_in(&sp1xsp1_sp2(), tol));
        assert!(l_sp2().is_contained_in(&onexsp1_sp2(), tol));
        assert!(sp1xsp1_sp2().is_contained_in(&sp(2), tol));
        assert!(so2_sp2().is_contained_in(&sp(2), tol));
        assert!(!so2_sp2().is_contained_in(&sp1xsp1_sp2(), tol));
    }

    #[test]
    fn names_resolve() {
        for name in [
            "su3",
            "so5",
            "sp2",
            "t_su4",
            "u2_upper_su3",
            "u1_lower_su3",
            "u3_lower_su3",
            "u1_su3",
            "so2_upper_so4",
            "so2_lower_so4",
            "so2_sp2",
            "sp1x1_sp2",
            "1xsp1_sp2",
            "sp1xsp1_sp2",
            "l_sp2",
            "diag_su3",
            "u_1_-1_2_2",
            "0|u1_su3",
            "u2_upper_su3|su3",
        ] {
            let h = resolve(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(h.name(), name);
        }
        for bad in ["su0", "xyz", "u4_upper_su3", "u_1_2", "0|0", "su3|sp2"] {
            assert!(resolve(bad).is_err(), "{bad} should not resolve");
        }
    }

    #[test]
    fn json_round_trip_with_expressions() {
        let text = r#"{
            "name": "u1_custom",
            "ambient_dim": 3,
            "basis": [[[[0, "1/sqrt(2)"], [0, 0], [0, 0]],
                       [[0, 0], [0, 0], [0, 0]],
                       [[0, 0], [0, 0], [0, "-sqrt(2)/2"]]]],
            "readout": [0]
        }"#;
        let hs = load_catalog_str(text).unwrap();
        assert_eq!(hs.len(), 1);
        assert!(hs[0].is_contained_in(&u1_su3(), 1e-12));
        let doc = SubalgebraDoc::from_subalgebra(&hs[0]);
        let again = doc.build().unwrap();
        assert_eq!(again.dim(), 1);
        assert_eq!(again.readout(), Some(&[0usize][..]));
    }

    #[test]
    fn json_rejects_non_skew_and_bad_shapes() {
        let bad = r#"{"name":"x","ambient_dim":2,"basis":[[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#;
        assert!(load_catalog_str(bad).is_err());
        let short = r#"{"name":"x","ambient_dim":2,"basis":[[[[0,1],[0,0]]]]}"#;
        assert!(load_catalog_str(short).is_err());
        assert!(load_catalog_str("{ not json").is_err());
    }
}
