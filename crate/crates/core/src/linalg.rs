//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

pub fn rows_from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Columns of `frame` must be orthonormal to within 1e-8.
pub fn check_orthonormal(frame: &DMatrix<f64>) -> Result<()> {
    let gram = frame.transpose() * frame;
    let dev = (gram - DMatrix::identity(frame.ncols(), frame.ncols())).amax();
    if dev > 1e-8 {
        return Err(Error::BadFrame(dev));
    }
    Ok(())
}

/// Orthonormal basis (as columns) of the orthogonal complement of span(`vectors`) in R^n.
pub fn orthogonal_complement(vectors: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            w -= b * b.dot(&w);
        }
        let norm = w.norm();
        if norm > 1e-12 {
            basis.push(w / norm);
        }
    }
    let span = basis.len();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = DVector::zeros(n);
        w[i] = 1.0;
        for b in &basis {
            w -= b * b.dot(&w);
        }
        // second pass for stability
        for b in &basis {
            w -= b * b.dot(&w);
        }
        let norm = w.norm();
        if norm > 1e-8 {
            basis.push(w / norm);
        }
    }
    let cols: Vec<DVector<f64>> = basis.into_iter().skip(span).collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormalize columns (Gram–Schmidt); returns `None` if they are dependent.
pub fn orthonormalize_columns(vectors: &[DVector<f64>]) -> Option<DMatrix<f64>> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                w -= b * b.dot(&w);
            }
        }
        let norm = w.norm();
        if norm <= 1e-12 * v.norm().max(1.0) {
            return None;
        }
        basis.push(w / norm);
    }
    Some(DMatrix::from_columns(&basis))
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
pub fn random_rotation<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    use rand_distr::StandardNormal;
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

/// Symmetric polarization of the determinant:
/// D(A_1..A_m) = (1/m!) sum_{S} (-1)^{m-|S|} det(sum_{i in S} A_i).
pub fn mixed_discriminant(mats: &[DMatrix<f64>]) -> f64 {
    let m = mats.len();
    if m == 0 {
        return 1.0;
    }
    let n = mats[0].nrows();
    let mut total = 0.0;
    for mask in 1u32..(1 << m) {
        let mut acc = DMatrix::zeros(n, n);
        for (i, a) in mats.iter().enumerate() {
            if mask & (1 << i) != 0 {
                acc += a;
            }
        }
        let sign = if (m - mask.count_ones() as usize) % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * acc.determinant();
    }
    total / crate::constants::factorial(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let v = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let c = orthogonal_complement(&[v.clone()], 3);
        assert_eq!(c.ncols(), 2);
        check_orthonormal(&c).unwrap();
        assert!((c.transpose() * v).amax() < 1e-12);
    }

    #[test]
    fn mixed_discriminant_of_equal_matrices_is_det() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let d = mixed_discriminant(&[a.clone(), a.clone()]);
        assert!((d - a.determinant()).abs() < 1e-12);
        let i = DMatrix::<f64>::identity(3, 3);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0]));
        // D(I, I, B) = trace(B) / 3
        let d = mixed_discriminant(&[i.clone(), i, b]);
        assert!((d - 2.0).abs() < 1e-12);
    }
}
