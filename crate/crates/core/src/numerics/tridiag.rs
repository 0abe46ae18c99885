//! Symmetric tridiagonal eigenpairs (Sturm bisection + inverse iteration)
//! and tridiagonal linear solvers.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Lowest eigenpairs of a symmetric tridiagonal matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Unit-norm eigenvectors, `vectors[j]` belonging to `values[j]`, with the
    /// first significant component positive.
    pub vectors: Vec<Vec<f64>>,
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

const INVERSE_ITERATIONS: usize = 6;

/// The `k` lowest eigenpairs of the symmetric tridiagonal matrix with main
/// diagonal `diag` and off-diagonal `offdiag`.
pub fn tridiag_eigensolve(diag: &[f64], offdiag: &[f64], k: usize) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 || offdiag.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "tridiagonal matrix needs n >= 1 diagonal and n-1 off-diagonal entries, got {} and {}",
            n,
            offdiag.len()
        )));
    }
    if k > n {
        return Err(Error::InvalidInput(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    if diag.iter().chain(offdiag).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("tridiagonal entries must be finite".into()));
    }

    // Gershgorin interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { offdiag[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let norm = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * norm);
    lo -= 2.0 * f64::EPSILON * norm;
    hi += 2.0 * f64::EPSILON * norm;

    let mut values = Vec::with_capacity(k);
    for j in 0..k {
        let (mut a, mut b) = (values.last().copied().unwrap_or(lo).min(hi), hi);
        // Eigenvalue j is the smallest x with count(x) > j.
        if sturm_count(diag, offdiag, a, pivmin) > j {
            a = lo;
        }
        let mut iterations = 0;
        while b - a > 2.0 * f64::EPSILON * (a.abs().max(b.abs())) + pivmin {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(diag, offdiag, mid, pivmin) > j {
                b = mid;
            } else {
                a = mid;
            }
            iterations += 1;
            if iterations > 2000 {
                return Err(Error::NoConvergence {
                    what: format!("Sturm bisection for eigenvalue {j}"),
                    iterations,
                    residual: b - a,
                });
            }
        }
        values.push(0.5 * (a + b));
    }

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (j, &lambda) in values.iter().enumerate() {
        let v = inverse_iteration(diag, offdiag, lambda, norm, j, &vectors)?;
        vectors.push(v);
    }

    Ok(TridiagEigen { values, vectors })
}

fn matvec(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += off[i] * x[i + 1];
            }
            s
        })
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    lambda: f64,
    norm: f64,
    index: usize,
    previous: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // Deterministic start vector with components along every eigenvector.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * (0.7 + index as f64 * 0.13)).sin())
        .collect();
    normalize(&mut v);
    let shifted: Vec<f64> = diag.iter().map(|d| d - lambda).collect();
    let tol = 1e-10 * norm.max(1.0) * (n as f64).sqrt().max(1.0) * 1e-2;

    let mut residual = f64::INFINITY;
    for it in 0..INVERSE_ITERATIONS {
        let mut x = v.clone();
        solve_tridiagonal_pivoted(off, &shifted, off, &mut x, f64::EPSILON * norm);
        for p in previous {
            let dot: f64 = p.iter().zip(&x).map(|(a, b)| a * b).sum();
            x.iter_mut().zip(p).for_each(|(xi, pi)| *xi -= dot * pi);
        }
        if normalize(&mut x) == 0.0 || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::NoConvergence {
                what: format!("inverse iteration for eigenvector {index}"),
                iterations: it + 1,
                residual: f64::NAN,
            });
        }
        v = x;
        let tv = matvec(diag, off, &v);
        residual = tv
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol && it >= 1 {
            break;
        }
    }
    if residual > tol {
        return Err(Error::NoConvergence {
            what: format!("inverse iteration for eigenvector {index}"),
            iterations: INVERSE_ITERATIONS,
            residual,
        });
    }
    fix_sign(&mut v);
    Ok(v)
}

/// Make the first significant component positive.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8 * max) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Solve a general tridiagonal system with partial pivoting (LAPACK gtsv
/// elimination). `sub[i]` is A[i+1][i], `sup[i]` is A[i][i+1]. Zero pivots are
/// replaced by `tiny` so nearly singular shifted systems still solve.
pub fn solve_tridiagonal_pivoted(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64], tiny: f64) {
    let n = diag.len();
    assert!(sub.len() + 1 == n && sup.len() + 1 == n && rhs.len() == n);
    let tiny = if tiny > 0.0 { tiny } else { f64::MIN_POSITIVE };
    let mut dl = sub.to_vec();
    let mut d = diag.to_vec();
    let mut du = sup.to_vec();
    // Second superdiagonal created by interchanges.
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let b = rhs;
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            if i + 2 < n {
                du2[i] = 0.0;
            }
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

/// Precomputed Thomas factorization of a complex tridiagonal matrix, reused
/// for many right-hand sides. No pivoting: intended for matrices whose pivots
/// stay bounded away from zero (diagonally dominant or shifted off the real
/// axis).
#[derive(Debug, Clone)]
pub struct ComplexTridiagonal {
    sub: Vec<Complex64>,
    sup_prime: Vec<Complex64>,
    inv_pivot: Vec<Complex64>,
}

impl ComplexTridiagonal {
    pub fn factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::InvalidInput("inconsistent tridiagonal sizes".into()));
        }
        let mut sup_prime = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut inv_pivot = vec![Complex64::new(0.0, 0.0); n];
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - sub[i - 1] * sup_prime[i - 1];
            }
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::NoConvergence {
                    what: "complex tridiagonal factorization (zero pivot)".into(),
                    iterations: i,
                    residual: pivot.norm(),
                });
            }
            inv_pivot[i] = pivot.inv();
            if i + 1 < n {
                sup_prime[i] = sup[i] * inv_pivot[i];
            }
        }
        Ok(ComplexTridiagonal {
            sub: sub.to_vec(),
            sup_prime,
            inv_pivot,
        })
    }

    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let n = self.inv_pivot.len();
        assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            let next = rhs[i + 1];
            rhs[i] -= self.sup_prime[i] * next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let r = tridiag_eigensolve(&[2.0, 2.0], &[1.0], 2).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-14);
        assert!((r.values[1] - 3.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        assert!((r.vectors[0][0] - s).abs() < 1e-12 && (r.vectors[0][1] + s).abs() < 1e-12);
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        let n = 200;
        let r = tridiag_eigensolve(&vec![2.0; n], &vec![-1.0; n - 1], 12).unwrap();
        for (j, &lam) in r.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((lam - exact).abs() < 1e-10, "{j}: {lam} vs {exact}");
        }
        for i in 0..12 {
            for j in 0..12 {
                let dot: f64 = r.vectors[i].iter().zip(&r.vectors[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
            assert!(r.vectors[i][0] > 0.0);
        }
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(tridiag_eigensolve(&[1.0, 2.0], &[], 1).is_err());
        assert!(tridiag_eigensolve(&[1.0, 2.0], &[0.5], 3).is_err());
        assert!(tridiag_eigensolve(&[f64::NAN, 2.0], &[0.5], 1).is_err());
    }

    #[test]
    fn pivoted_solve_handles_zero_leading_diagonal() {
        // [[0,1,0],[1,0,1],[0,1,1]] x = [1,2,3]
        let mut b = vec![1.0, 2.0, 3.0];
        solve_tridiagonal_pivoted(&[1.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0], &mut b, 1e-300);
        let x = b;
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + x[2] - 2.0).abs() < 1e-14);
        assert!((x[1] + x[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn complex_thomas_round_trip() {
        let c = |re, im| Complex64::new(re, im);
        let sub = vec![c(1.0, 0.5); 4];
        let sup = vec![c(-0.3, 1.0); 4];
        let diag = vec![c(4.0, 1.0); 5];
        let x: Vec<Complex64> = (0..5).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let mut b: Vec<Complex64> = (0..5)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += sub[i - 1] * x[i - 1];
                }
                if i < 4 {
                    s += sup[i] * x[i + 1];
                }
                s
            })
            .collect();
        ComplexTridiagonal::factor(&sub, &diag, &sup).unwrap().solve_in_place(&mut b);
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).norm() < 1e-13);
        }
    }
}
