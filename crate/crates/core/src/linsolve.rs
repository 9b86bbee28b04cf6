//! Sparse 9-point linear algebra: CSR storage, ILU(0) preconditioning and
//! BiCGSTAB. Iteration order is fixed, so repeated solves are bit-identical.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Build from per-row (column, value) lists; columns are sorted here.
    pub fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Csr {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        row_ptr.push(0);
        for r in &mut rows {
            r.sort_unstable_by_key(|e| e.0);
            for &(c, v) in r.iter() {
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        Csr { n, row_ptr, col, val }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[i] = acc;
        }
    }
}

/// Zero-fill incomplete LU factorization sharing the CSR pattern.
pub struct Ilu0 {
    lu: Csr,
    diag_ptr: Vec<usize>,
}

pub fn ilu0(a: &Csr) -> Result<Ilu0> {
    let n = a.n;
    let mut lu = a.clone();
    let mut diag_ptr = vec![usize::MAX; n];
    for i in 0..n {
        for k in lu.row_ptr[i]..lu.row_ptr[i + 1] {
            if lu.col[k] == i {
                diag_ptr[i] = k;
            }
        }
        if diag_ptr[i] == usize::MAX {
            return Err(Error::Numerical(format!("missing diagonal in row {i}")));
        }
    }
    // position lookup workspace for the current row
    let mut pos = vec![usize::MAX; n];
    for i in 0..n {
        let (ri, re) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
        for k in ri..re {
            pos[lu.col[k]] = k;
        }
        for k in ri..re {
            let c = lu.col[k];
            if c >= i {
                break;
            }
            let dkk = lu.val[diag_ptr[c]];
            if dkk.abs() < 1e-300 {
                return Err(Error::Numerical(format!("zero pivot in row {c}")));
            }
            let factor = lu.val[k] / dkk;
            lu.val[k] = factor;
            for kk in diag_ptr[c] + 1..lu.row_ptr[c + 1] {
                let j = lu.col[kk];
                let p = pos[j];
                if p != usize::MAX {
                    lu.val[p] -= factor * lu.val[kk];
                }
            }
        }
        for k in ri..re {
            pos[lu.col[k]] = usize::MAX;
        }
    }
    Ok(Ilu0 { lu, diag_ptr })
}

impl Ilu0 {
    /// `z = U^{-1} L^{-1} r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.lu.n;
        z.copy_from_slice(r);
        for i in 0..n {
            let mut acc = z[i];
            for k in self.lu.row_ptr[i]..self.diag_ptr[i] {
                acc -= self.lu.val[k] * z[self.lu.col[k]];
            }
            z[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = z[i];
            for k in self.diag_ptr[i] + 1..self.lu.row_ptr[i + 1] {
                acc -= self.lu.val[k] * z[self.lu.col[k]];
            }
            z[i] = acc / self.lu.val[self.diag_ptr[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub struct LinOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Preconditioned BiCGSTAB for `A x = b`, starting from `x = 0`, run to a
/// relative 2-norm residual of `tol`.
pub fn bicgstab(
    a: &Csr,
    m: &Ilu0,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<LinOutcome> {
    let n = a.n;
    x.iter_mut().for_each(|v| *v = 0.0);
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(LinOutcome {
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    for it in 1..=max_iters {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::Numerical("bicgstab breakdown (rho)".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut phat);
        a.matvec(&phat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            return Err(Error::Numerical("bicgstab breakdown (r_hat . v)".into()));
        }
        alpha = rho_new / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) <= tol * bnorm {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok(LinOutcome {
                iterations: it,
                rel_residual: norm2(&s) / bnorm,
            });
        }
        m.apply(&s, &mut shat);
        a.matvec(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt.abs() < 1e-300 {
            return Err(Error::Numerical("bicgstab breakdown (t . t)".into()));
        }
        omega = dot(&t, &s) / tt;
        if omega.abs() < 1e-300 {
            return Err(Error::Numerical("bicgstab stagnation (omega)".into()));
        }
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        let rel = norm2(&r) / bnorm;
        if rel <= tol {
            return Ok(LinOutcome {
                iterations: it,
                rel_residual: rel,
            });
        }
        rho = rho_new;
    }
    Err(Error::Numerical(format!(
        "bicgstab did not reach tol {tol:.1e} within {max_iters} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 1D Laplacian with Dirichlet ends.
    fn laplacian(n: usize) -> Csr {
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = vec![(i, 2.0)];
            if i > 0 {
                row.push((i - 1, -1.0));
            }
            if i + 1 < n {
                row.push((i + 1, -1.0));
            }
            rows.push(row);
        }
        Csr::from_rows(rows)
    }

    #[test]
    fn bicgstab_solves_laplacian() {
        let a = laplacian(200);
        let m = ilu0(&a).unwrap();
        // manufactured solution
        let xs: Vec<f64> = (0..200).map(|i| (i as f64 * 0.1).sin()).collect();
        let mut b = vec![0.0; 200];
        a.matvec(&xs, &mut b);
        let mut x = vec![0.0; 200];
        let out = bicgstab(&a, &m, &b, &mut x, 1e-12, 1000).unwrap();
        assert!(out.rel_residual <= 1e-12);
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn ilu0_is_exact_for_tridiagonal() {
        // no fill is dropped on a tridiagonal pattern, so M == A
        let a = laplacian(50);
        let m = ilu0(&a).unwrap();
        let b: Vec<f64> = (0..50).map(|i| 1.0 + (i % 3) as f64).collect();
        let mut z = vec![0.0; 50];
        m.apply(&b, &mut z);
        let mut check = vec![0.0; 50];
        a.matvec(&z, &mut check);
        for (u, v) in check.iter().zip(&b) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
