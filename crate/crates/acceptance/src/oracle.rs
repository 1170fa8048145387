//! Small dense complex arithmetic written out by hand, kept apart from the
//! library's nalgebra-based code so the two can check each other.

use num_complex::Complex64;

pub type C = Complex64;
pub type M3 = [[C; 3]; 3];

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn real3(rows: [[f64; 3]; 3]) -> M3 {
    rows.map(|r| r.map(|x| c(x, 0.0)))
}

pub fn imag3(rows: [[f64; 3]; 3]) -> M3 {
    rows.map(|r| r.map(|x| c(0.0, x)))
}

pub fn add(a: &M3, b: &M3) -> M3 {
    let mut out = *a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn scale(a: &M3, s: C) -> M3 {
    a.map(|r| r.map(|x| x * s))
}

pub fn mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[c(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn commutator(a: &M3, b: &M3) -> M3 {
    add(&mul(a, b), &scale(&mul(b, a), c(-1.0, 0.0)))
}

pub fn trace(a: &M3) -> C {
    a[0][0] + a[1][1] + a[2][2]
}

/// Cofactor expansion along the first row.
pub fn det(a: &M3) -> C {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// `det(a - lambda I)`.
pub fn char_poly(a: &M3, lambda: C) -> C {
    let mut s = *a;
    for (i, row) in s.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    det(&s)
}

pub fn max_abs_diff(a: &M3, b: &M3) -> f64 {
    let mut m = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            m = m.max((a[i][j] - b[i][j]).norm());
        }
    }
    m
}

pub fn to_nalgebra(a: &M3) -> nalgebra::DMatrix<C> {
    nalgebra::DMatrix::from_fn(3, 3, |i, j| a[i][j])
}

pub fn from_nalgebra(m: &nalgebra::DMatrix<C>) -> M3 {
    let mut out = [[c(0.0, 0.0); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = m[(i, j)];
        }
    }
    out
}

/// Entrywise equality with no tolerance.
pub fn exactly_equal(a: &M3, b: &M3) -> bool {
    (0..3).all(|i| (0..3).all(|j| a[i][j] == b[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_of_diagonal_and_permutation() {
        assert_eq!(
            det(&real3([[2., 0., 0.], [0., 3., 0.], [0., 0., 5.]])),
            c(30.0, 0.0)
        );
        assert_eq!(
            det(&real3([[0., 1., 0.], [1., 0., 0.], [0., 0., 1.]])),
            c(-1.0, 0.0)
        );
    }

    #[test]
    fn char_poly_vanishes_at_eigenvalues() {
        let a = real3([[1., 0., 0.], [0., 2., 0.], [0., 0., -4.]]);
        for l in [1.0, 2.0, -4.0] {
            assert_eq!(char_poly(&a, c(l, 0.0)), c(0.0, 0.0));
        }
    }

    #[test]
    fn commutator_of_matrix_units() {
        let e12 = real3([[0., 1., 0.], [0., 0., 0.], [0., 0., 0.]]);
        let e21 = real3([[0., 0., 0.], [1., 0., 0.], [0., 0., 0.]]);
        let h = real3([[1., 0., 0.], [0., -1., 0.], [0., 0., 0.]]);
        assert!(exactly_equal(&commutator(&e12, &e21), &h));
    }
}
