//! Real SVD helpers: sorted singular values, numerical rank, row and null spaces.

use nalgebra::{DMatrix, SVD};

pub type RMatrix = DMatrix<f64>;

/// Singular values and right singular vectors (as rows of `vt`, full
/// `ncols x ncols`), sorted by descending singular value. Rows of `vt` past
/// `min(nrows, ncols)` span the remainder of the domain and carry value 0.
pub struct SortedSvd {
    pub singular_values: Vec<f64>,
    pub vt: RMatrix,
}

pub fn sorted_svd(m: &RMatrix) -> SortedSvd {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return SortedSvd {
            singular_values: Vec::new(),
            vt: RMatrix::zeros(0, 0),
        };
    }
    // pad with zero rows so that V^T is square
    let padded = if rows < cols {
        let mut p = RMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("requested V^T");
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| {
        sv[b]
            .partial_cmp(&sv[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut sorted_vt = RMatrix::zeros(vt.nrows(), cols);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vt.row_mut(dst).copy_from(&vt.row(src));
    }
    let keep = rows.min(cols);
    let singular_values = order.iter().take(keep).map(|&k| sv[k]).collect();
    SortedSvd {
        singular_values,
        vt: sorted_vt,
    }
}

/// Descending singular values.
pub fn singular_values(m: &RMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Count of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(sv: &[f64], rel_tol: f64) -> usize {
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (rows) of the row space of `m`.
pub fn row_space(m: &RMatrix, rel_tol: f64) -> RMatrix {
    let svd = sorted_svd(m);
    let r = numerical_rank(&svd.singular_values, rel_tol);
    svd.vt.rows(0, r).into_owned()
}

/// Orthonormal basis (rows) of the null space of `m`.
pub fn null_space(m: &RMatrix, rel_tol: f64) -> RMatrix {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return RMatrix::identity(cols, cols);
    }
    let svd = sorted_svd(m);
    let r = numerical_rank(&svd.singular_values, rel_tol);
    svd.vt.rows(r, cols - r).into_owned()
}

/// Distance from `v` to the row span of the orthonormal rows `basis`.
pub fn distance_to_span(basis: &RMatrix, v: &[f64]) -> f64 {
    let v = nalgebra::DVector::from_column_slice(v);
    if basis.nrows() == 0 {
        return v.norm();
    }
    let coeffs = basis * &v;
    (v - basis.transpose() * coeffs).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space_of_wide_matrix() {
        let m = RMatrix::from_row_slice(2, 4, &[1., 0., 0., 0., 0., 2., 0., 0.]);
        let svd = sorted_svd(&m);
        assert_eq!(svd.singular_values.len(), 2);
        assert!((svd.singular_values[0] - 2.0).abs() < 1e-14);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.shape(), (2, 4));
        assert!((&m * ns.transpose()).norm() < 1e-14);
    }

    #[test]
    fn row_space_drops_dependent_rows() {
        let m = RMatrix::from_row_slice(3, 3, &[1., 1., 0., 2., 2., 0., 0., 0., 1.]);
        let rs = row_space(&m, 1e-10);
        assert_eq!(rs.nrows(), 2);
        assert!(distance_to_span(&rs, &[3., 3., -1.]) < 1e-12);
        assert!((distance_to_span(&rs, &[1., -1., 0.]) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_of_zero_matrix() {
        let m = RMatrix::zeros(3, 2);
        assert_eq!(numerical_rank(&singular_values(&m), 1e-8), 0);
        assert_eq!(null_space(&m, 1e-10).nrows(), 2);
    }
}
