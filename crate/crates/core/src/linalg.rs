//! Dense complex linear algebra at desk scale.
//!
//! Hermitian eigendecomposition (cyclic Jacobi), matrix exponential
//! (Pade 13 with scaling and squaring), and an LU solver. All routines are
//! deterministic and dependency-free; dimensions stay small enough (at most
//! a few thousand) that O(n^3) with plain loops is acceptable.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unitary of column
/// eigenvectors, so that `a = v diag(w) v^dagger`.
pub fn eigh(a: &Array2<Complex64>) -> (Array1<f64>, Array2<Complex64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigh: matrix must be square");
    let mut m = a.clone();
    let mut v = Array2::<Complex64>::eye(n);

    let norm: f64 = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let tol = 1e-15 * norm.max(1.0);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = m[(p, q)];
                let w = alpha.norm();
                if w <= tol * 1e-2 / (n as f64) {
                    continue;
                }
                let phase = alpha / w; // e^{i phi}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = 0.5 * (2.0 * w).atan2(app - aqq);
                let (s, c) = theta.sin_cos();
                let cs = Complex64::new(c, 0.0);
                let sn = Complex64::new(s, 0.0);
                let ph = phase.conj(); // e^{-i phi}

                // columns p and q of m: m <- m * J
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = cs * mip + sn * ph * miq;
                    m[(i, q)] = -sn * mip + cs * ph * miq;
                }
                // rows p and q: m <- J^dagger * m
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = cs * mpj + sn * ph.conj() * mqj;
                    m[(q, j)] = -sn * mpj + cs * ph.conj() * mqj;
                }
                // eigenvector accumulation: v <- v * J
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = cs * vip + sn * ph * viq;
                    v[(i, q)] = -sn * vip + cs * ph * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let w = Array1::from_iter(order.iter().map(|&i| diag[i]));
    let mut vs = Array2::<Complex64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vs[(i, dst)] = v[(i, src)];
        }
    }
    (w, vs)
}

/// exp(-i h t) for Hermitian `h`, via its eigendecomposition.
pub fn propagator(h: &Array2<Complex64>, t: f64) -> Array2<Complex64> {
    let (w, v) = eigh(h);
    propagator_from_eig(&w, &v, t)
}

/// exp(-i h t) given a precomputed eigendecomposition of `h`.
pub fn propagator_from_eig(
    w: &Array1<f64>,
    v: &Array2<Complex64>,
    t: f64,
) -> Array2<Complex64> {
    let n = w.len();
    let mut phased = v.clone();
    for j in 0..n {
        let ph = Complex64::from_polar(1.0, -w[j] * t);
        for i in 0..n {
            phased[(i, j)] *= ph;
        }
    }
    let vh = v.t().mapv(|x| x.conj());
    phased.dot(&vh)
}

/// LU factorization with partial pivoting; solves a x = b for many rhs.
pub fn lu_solve(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "lu_solve: matrix must be square");
    assert_eq!(n, b.nrows(), "lu_solve: rhs rows must match");
    let mut lu = a.clone();
    let mut x = b.clone();
    let nrhs = b.ncols();
    let mut piv: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].norm();
        for i in (k + 1)..n {
            let m = lu[(i, k)].norm();
            if m > best {
                best = m;
                p = i;
            }
        }
        assert!(best > 0.0, "lu_solve: singular matrix");
        if p != k {
            piv.swap(p, k);
            for j in 0..n {
                let tmp = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
            for j in 0..nrhs {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = tmp;
            }
        }
        let pivot = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / pivot;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let sub = f * lu[(k, j)];
                lu[(i, j)] -= sub;
            }
            for j in 0..nrhs {
                let sub = f * x[(k, j)];
                x[(i, j)] -= sub;
            }
        }
    }
    // back substitution
    for j in 0..nrhs {
        for i in (0..n).rev() {
            let mut acc = x[(i, j)];
            for k in (i + 1)..n {
                acc -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = acc / lu[(i, i)];
        }
    }
    x
}

fn one_norm(a: &Array2<Complex64>) -> f64 {
    let (n, m) = a.dim();
    (0..m)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by Pade 13 approximation with scaling and squaring.
pub fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    const THETA_13: f64 = 5.371920351148152;
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm: matrix must be square");

    let norm = one_norm(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.mapv(|x| x / Complex64::new(2f64.powi(s), 0.0));

    let eye = Array2::<Complex64>::eye(n);
    let a2 = scaled.dot(&scaled);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = a6.mapv(|x| x * B[13]) + &a4.mapv(|x| x * B[11]) + &a2.mapv(|x| x * B[9]);
    let u_poly = a6.dot(&u_inner)
        + &a6.mapv(|x| x * B[7])
        + &a4.mapv(|x| x * B[5])
        + &a2.mapv(|x| x * B[3])
        + &eye.mapv(|x| x * B[1]);
    let u = scaled.dot(&u_poly);

    let v_inner = a6.mapv(|x| x * B[12]) + &a4.mapv(|x| x * B[10]) + &a2.mapv(|x| x * B[8]);
    let v = a6.dot(&v_inner)
        + &a6.mapv(|x| x * B[6])
        + &a4.mapv(|x| x * B[4])
        + &a2.mapv(|x| x * B[2])
        + &eye.mapv(|x| x * B[0]);

    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut f = lu_solve(&lhs, &rhs);
    for _ in 0..s {
        f = f.dot(&f);
    }
    f
}

/// Trace distance (1/2) ||a - b||_1 between Hermitian matrices.
pub fn trace_distance(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let diff = a - b;
    // symmetrize against roundoff; inputs are Hermitian by contract
    let herm = (&diff + &diff.t().mapv(|x| x.conj())).mapv(|x| 0.5 * x);
    let (w, _) = eigh(&herm);
    0.5 * w.iter().map(|x| x.abs()).sum::<f64>()
}

/// Frobenius norm.
pub fn fro_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry magnitude.
pub fn max_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Hermitian adjoint of a dense matrix.
pub fn dagger(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|x| x.conj())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> Array2<Complex64> {
        // small deterministic LCG; avoids pulling rand into this module
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut a = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = Complex64::new(next(), next());
            }
        }
        let ad = dagger(&a);
        (&a + &ad).mapv(|x| 0.5 * x)
    }

    #[test]
    fn eigh_reconstructs() {
        let a = random_hermitian(12, 7);
        let (w, v) = eigh(&a);
        let mut rec = Array2::<Complex64>::zeros((12, 12));
        for k in 0..12 {
            for i in 0..12 {
                for j in 0..12 {
                    rec[(i, j)] += v[(i, k)] * Complex64::new(w[k], 0.0) * v[(j, k)].conj();
                }
            }
        }
        assert!(max_norm(&(&rec - &a)) < 1e-12);
        let vhv = dagger(&v).dot(&v);
        assert!(max_norm(&(&vhv - &Array2::<Complex64>::eye(12))) < 1e-12);
        for k in 1..12 {
            assert!(w[k] >= w[k - 1]);
        }
    }

    #[test]
    fn expm_matches_series_small() {
        let mut a = Array2::<Complex64>::zeros((3, 3));
        a[(0, 1)] = c(0.3, 0.1);
        a[(1, 0)] = c(-0.2, 0.4);
        a[(1, 2)] = c(0.0, -0.5);
        a[(2, 2)] = c(0.1, 0.0);
        let e = expm(&a);
        // Taylor series reference
        let mut term = Array2::<Complex64>::eye(3);
        let mut sum = term.clone();
        for k in 1..40 {
            term = term.dot(&a).mapv(|x| x / Complex64::new(k as f64, 0.0));
            sum += &term;
        }
        assert!(max_norm(&(&e - &sum)) < 1e-13);
    }

    #[test]
    fn expm_scales_large_norm() {
        let mut a = Array2::<Complex64>::zeros((2, 2));
        a[(0, 0)] = c(0.0, 40.0);
        a[(1, 1)] = c(0.0, -40.0);
        let e = expm(&a);
        assert!((e[(0, 0)] - Complex64::from_polar(1.0, 40.0)).norm() < 1e-11);
        assert!((e[(1, 1)] - Complex64::from_polar(1.0, -40.0)).norm() < 1e-11);
    }

    #[test]
    fn lu_solves() {
        let a = random_hermitian(6, 3) + &Array2::<Complex64>::eye(6).mapv(|x| x * 4.0);
        let b = random_hermitian(6, 9);
        let x = lu_solve(&a, &b);
        assert!(max_norm(&(&a.dot(&x) - &b)) < 1e-12);
    }

    #[test]
    fn propagator_unitary() {
        let h = random_hermitian(5, 11);
        let u = propagator(&h, 0.7);
        let uu = dagger(&u).dot(&u);
        assert!(max_norm(&(&uu - &Array2::<Complex64>::eye(5))) < 1e-12);
    }
}
