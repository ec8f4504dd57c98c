use crate::error::{Error, Result};
use crate::linalg::Matrix;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues in descending order with the matching unit eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// `V Λ Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            for i in 0..n {
                let vi = self.vectors[(i, k)] * lambda;
                if vi == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigendecomposition of `(A + Aᵀ) / 2`.
///
/// Sweeps over all `(p, q)` pairs until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖A‖_F` or 100 sweeps have run.
pub fn eigendecompose_symmetric(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Shape(format!(
            "eigendecomposition of a {}x{} matrix",
            n,
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix passed to eigensolver".into()));
    }
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    let mut v = Matrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * s.frobenius_norm();

    let mut converged = off_diagonal_norm(&s) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut s, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&s) <= threshold;
    }
    if !converged {
        return Err(Error::Solver(format!(
            "Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {:e})",
            off_diagonal_norm(&s)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[(j, j)].total_cmp(&s[(i, i)]));
    let values = order.iter().map(|&i| s[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Applies the rotation that annihilates `s[p][q]`, accumulating it into `v`.
fn rotate(s: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = s[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = s[(p, p)];
    let aqq = s[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    // theta = 0 has signum 1, giving the 45° rotation
    let c = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * c;

    let n = s.rows();
    for k in 0..n {
        let skp = s[(k, p)];
        let skq = s[(k, q)];
        s[(k, p)] = c * skp - sn * skq;
        s[(k, q)] = sn * skp + c * skq;
    }
    for k in 0..n {
        let spk = s[(p, k)];
        let sqk = s[(q, k)];
        s[(p, k)] = c * spk - sn * sqk;
        s[(q, k)] = sn * spk + c * sqk;
    }
    s[(p, q)] = 0.0;
    s[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - sn * vkq;
        v[(k, q)] = sn * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let a = Matrix::from_rows(&[
            vec![3.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let e = eigendecompose_symmetric(&a).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        // axis eigenvectors: columns are e0, e2, e1
        for (k, axis) in [0, 2, 1].into_iter().enumerate() {
            for i in 0..3 {
                let expected = if i == axis { 1.0 } else { 0.0 };
                assert_eq!(e.vectors[(i, k)].abs(), expected);
            }
        }
    }

    #[test]
    fn two_by_two_hand_case() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = eigendecompose_symmetric(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)].abs() - h).abs() < 1e-14);
        assert!((e.vectors[(0, 0)] - e.vectors[(1, 0)]).abs() < 1e-14);
        assert!((e.vectors[(0, 1)] + e.vectors[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_and_non_square() {
        let mut a = Matrix::identity(2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(
            eigendecompose_symmetric(&a),
            Err(Error::NonFinite(_))
        ));
        assert!(eigendecompose_symmetric(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_and_empty_matrices() {
        let e = eigendecompose_symmetric(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(e.values, vec![0.0; 3]);
        assert_eq!(e.vectors, Matrix::identity(3));
        let e = eigendecompose_symmetric(&Matrix::zeros(0, 0)).unwrap();
        assert!(e.values.is_empty());
    }
}
