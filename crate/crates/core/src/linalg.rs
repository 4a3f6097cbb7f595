//! Dense complex matrix helpers and the Hermitian eigensolver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const C0: Complex64 = Complex64::new(0.0, 0.0);
pub const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Off-diagonal Frobenius norm at which the Jacobi sweeps stop, relative to the matrix norm.
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Tolerance used when deciding whether an input matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermitian_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest entrywise deviation of `m` from the identity.
pub fn identity_residual(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { C1 } else { C0 };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `U†U - I`, entrywise maximum.
pub fn unitarity_residual(u: &CMat) -> f64 {
    identity_residual(&(u.adjoint() * u))
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Eigenvalues (descending) and eigenvectors (columns) of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn reconstruct(&self) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] *= self.values[j];
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Applies a real function to the spectrum: `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v = f(*v);
        }
        out.reconstruct()
    }
}

/// Cyclic complex Jacobi diagonalization.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation to the pair.
pub fn eigh(m: &CMat) -> Result<Eigh> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let res = hermitian_residual(m);
    if res > HERMITIAN_TOL {
        return Err(Error::NotHermitian(res));
    }
    let mut a = (m + m.adjoint()).scale(0.5);
    let mut v = CMat::identity(n, n);
    let scale = a.norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(Eigh { values, vectors })
}

fn off_diagonal_norm(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let g = a[(p, q)];
    let mag = g.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        0.0
    } else if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;
    let phase = (g / mag).conj();

    // W restricted to (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
    let wpp = re(cs);
    let wpq = re(sn);
    let wqp = phase * (-sn);
    let wqq = phase * cs;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * wpp + akq * wqp;
        a[(k, q)] = akp * wpq + akq * wqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = wpp.conj() * apk + wqp.conj() * aqk;
        a[(q, k)] = wpq.conj() * apk + wqq.conj() * aqk;
    }
    a[(p, q)] = C0;
    a[(q, p)] = C0;
    a[(p, p)] = re(a[(p, p)].re);
    a[(q, q)] = re(a[(q, q)].re);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * wpp + vkq * wqp;
        v[(k, q)] = vkp * wpq + vkq * wqq;
    }
}

/// `-Σ λ log2 λ` over a spectrum, clipping tiny negative rounding to zero.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in values {
        if l < -HERMITIAN_TOL {
            return Err(Error::NotPositive(l));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s)
}

/// Principal square root of a Hermitian non-negative matrix.
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    let e = eigh(m)?;
    if let Some(&low) = e.values.last() {
        if low < -HERMITIAN_TOL {
            return Err(Error::NotPositive(low));
        }
    }
    Ok(e.map(|l| l.max(0.0).sqrt()))
}

/// Completes a set of orthonormal columns to an orthonormal basis of `C^n`.
///
/// Candidates are the canonical basis vectors in index order; each one is
/// orthogonalized twice (modified Gram-Schmidt) and kept if its residual norm
/// exceeds `cutoff`.
pub fn complete_basis(fixed: &[CVec], n: usize, cutoff: f64) -> Result<Vec<CVec>> {
    let mut basis: Vec<CVec> = fixed.to_vec();
    let mut added = Vec::new();
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut w = CVec::zeros(n);
        w[k] = C1;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w.axpy(-proj, b, C1);
            }
        }
        let norm = w.norm();
        if norm < cutoff {
            continue;
        }
        w.unscale_mut(norm);
        basis.push(w.clone());
        added.push(w);
    }
    if basis.len() != n {
        return Err(Error::NotUnitarizable(basis.len()));
    }
    Ok(added)
}

/// Orthonormalizes the columns of a square matrix (Gram-Schmidt with the
/// diagonal of R made positive). Applied to a complex Gaussian matrix this
/// yields a Haar-distributed unitary.
pub fn orthonormalize_columns(m: &CMat) -> CMat {
    let n = m.ncols();
    let mut out = m.clone();
    for j in 0..n {
        let mut w = out.column(j).clone_owned();
        for _ in 0..2 {
            for k in 0..j {
                let b = out.column(k).clone_owned();
                let proj = b.dotc(&w);
                w.axpy(-proj, &b, C1);
            }
        }
        let norm = w.norm();
        out.set_column(j, &w.unscale(norm));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&x| re(x))))
    }

    #[test]
    fn eigh_of_diagonal_is_sorted() {
        let e = eigh(&diag(&[0.2, 0.5, 0.3])).unwrap();
        assert_eq!(e.values, vec![0.5, 0.3, 0.2]);
    }

    #[test]
    fn eigh_of_complex_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let m = CMat::from_row_slice(2, 2, &[re(2.0), c(0.0, 1.0), c(0.0, -1.0), re(2.0)]);
        let e = eigh(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(max_abs_diff(&e.reconstruct(), &m) < 1e-13);
        assert!(unitarity_residual(&e.vectors) < 1e-13);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMat::from_row_slice(2, 2, &[C0, C1, C0, C0]);
        assert!(matches!(eigh(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn sqrt_of_diag() {
        let s = sqrt_psd(&diag(&[4.0, 1.0])).unwrap();
        assert!(max_abs_diff(&s, &diag(&[2.0, 1.0])) < 1e-14);
    }

    #[test]
    fn completion_spans_space() {
        let v = CVec::from_vec(vec![re(0.6), re(0.8), C0]);
        let added = complete_basis(&[v.clone()], 3, 1e-10).unwrap();
        assert_eq!(added.len(), 2);
        let mut cols = vec![v];
        cols.extend(added);
        let m = CMat::from_columns(&cols);
        assert!(unitarity_residual(&m) < 1e-14);
    }
}
