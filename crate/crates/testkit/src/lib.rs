//! Test-only oracles and random instance generators.
//!
//! The eigenvalue oracle here is deliberately independent of the library's
//! computational path: the library answers Hermitian questions through a real
//! 2d x 2d embedding and nalgebra's symmetric eigensolver, while this crate
//! diagonalizes the d x d complex Hermitian matrix directly with cyclic
//! Jacobi rotations. nalgebra appears below only as matrix storage, never for
//! spectral work.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---- complex Hermitian Jacobi oracle ----

/// Eigenvalues of a complex Hermitian matrix, ascending, via cyclic Jacobi.
///
/// The input is re-hermitized as (H + H*)/2 before iterating, so callers may
/// pass data with roundoff-level asymmetry.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "oracle needs a square matrix");
    let mut a = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = 0.5 * (h[(i, j)] + h[(j, i)].conj());
        }
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    for _sweep in 0..120 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let abs_b = beta.norm();
                if abs_b <= 1e-300 {
                    continue;
                }
                let phase = beta / Complex64::new(abs_b, 0.0);
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                // zero (p,q): t^2 + 2 tau t - 1 = 0, smaller-magnitude root
                let tau = (alpha - gamma) / (2.0 * abs_b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cs = Complex64::new(c, 0.0);
                let sp = phase * s; // s e^{i psi}
                // A <- G* A G with G = [[c, -s e^{i psi}],[s e^{-i psi}, c]]
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = cs * aip + sp.conj() * aiq;
                    a[(i, q)] = -sp * aip + cs * aiq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = cs * apj + sp * aqj;
                    a[(q, j)] = -sp.conj() * apj + cs * aqj;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Eigenvalues, ascending, of the Hermitian matrix sym + i*antisym.
pub fn hermitian_eigenvalues_parts(sym: &DMatrix<f64>, antisym: &DMatrix<f64>) -> Vec<f64> {
    let n = sym.nrows();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = Complex64::new(sym[(i, j)], antisym[(i, j)]);
        }
    }
    hermitian_eigenvalues(&h)
}

/// Smallest eigenvalue of sym + i*antisym per the Jacobi oracle.
pub fn min_eig_oracle(sym: &DMatrix<f64>, antisym: &DMatrix<f64>) -> f64 {
    hermitian_eigenvalues_parts(sym, antisym)[0]
}

// ---- random instances ----

pub fn random_matrix(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * (rng.gen::<f64>() * 2.0 - 1.0))
}

pub fn random_vector(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| scale * (rng.gen::<f64>() * 2.0 - 1.0))
}

pub fn random_symmetric(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = random_matrix(n, n, scale, rng);
    0.5 * (&m + m.transpose())
}

pub fn random_antisymmetric(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = random_matrix(n, n, scale, rng);
    0.5 * (&m - m.transpose())
}

pub fn random_psd(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = random_matrix(n, n, scale, rng);
    &m * m.transpose() / n as f64
}

/// Random matrix with singular values clipped into [smin, smax]. Keeps test
/// channels and observables away from degenerate corners.
pub fn random_matrix_clipped(
    rows: usize,
    cols: usize,
    smin: f64,
    smax: f64,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let m = random_matrix(rows, cols, 1.0, rng);
    let svd = m.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    // thin SVD: u is rows x r and vt is r x cols with r = min(rows, cols)
    let r = svd.singular_values.len();
    let mut d = DMatrix::<f64>::zeros(r, r);
    for i in 0..r {
        d[(i, i)] = svd.singular_values[i].clamp(smin, smax);
    }
    u * d * vt
}

/// Random element of SL(2, R) built as rotation * squeeze * rotation; for one
/// mode that is exactly the symplectic group of the standard form.
pub fn random_one_mode_symplectic(rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let rot = |t: f64| {
        DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
    };
    let t1 = rng.gen::<f64>() * std::f64::consts::TAU;
    let t2 = rng.gen::<f64>() * std::f64::consts::TAU;
    let r = rng.gen::<f64>() * 1.2 - 0.6;
    let sq = DMatrix::from_row_slice(2, 2, &[r.exp(), 0.0, 0.0, (-r).exp()]);
    rot(t1) * sq * rot(t2)
}

/// Covariance of the standard two-mode pure state whose one-mode marginals
/// are thermal with symplectic eigenvalue `nu` (>= 1/2): blocks
/// [[nu I, c Z], [c Z, nu I]] with Z = diag(1, -1), c = sqrt(nu^2 - 1/4).
pub fn two_mode_squeezed_cov(nu: f64) -> DMatrix<f64> {
    assert!(nu >= 0.5);
    let c = (nu * nu - 0.25).sqrt();
    let mut m = DMatrix::<f64>::zeros(4, 4);
    for i in 0..4 {
        m[(i, i)] = nu;
    }
    m[(0, 2)] = c;
    m[(2, 0)] = c;
    m[(1, 3)] = -c;
    m[(3, 1)] = -c;
    m
}

/// (mean, cov) of a random valid n-mode state: cov = PSD + (1/2 + margin) I
/// dominates the vacuum covariance, hence satisfies the state inequality.
pub fn random_valid_state(
    n_modes: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> (DVector<f64>, DMatrix<f64>) {
    let d = 2 * n_modes;
    let mean = random_vector(d, 1.0, rng);
    let cov = random_psd(d, 0.7, rng) + DMatrix::identity(d, d) * (0.5 + margin);
    (mean, cov)
}

fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// (k, m, alpha) of a random valid channel from n_a to n_b modes: alpha is a
/// random PSD matrix plus a multiple of I that dominates the Hermitian
/// obstruction (i/2)(Delta_B - K^T Delta_A K).
pub fn random_valid_channel(
    n_a: usize,
    n_b: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (da, db) = (2 * n_a, 2 * n_b);
    let k = random_matrix_clipped(da, db, 0.2, 1.3, rng);
    let delta_a = standard_delta(n_a);
    let delta_b = standard_delta(n_b);
    let obstruction = &delta_b - k.transpose() * delta_a * &k;
    let floor = 0.5 * spectral_norm(&obstruction) + margin;
    let alpha = random_psd(db, 0.5, rng) + DMatrix::identity(db, db) * floor;
    let m = random_vector(db, 1.0, rng);
    (k, m, alpha)
}

/// Random channel that is entanglement-breaking by construction, with the
/// certificate used to build it: nu >= (i/2) Delta_B by an identity floor,
/// mu >= +-(i/2) K^T Delta_A K by a spectral-norm floor, alpha = nu + mu.
pub fn random_eb_channel(
    n_a: usize,
    n_b: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (da, db) = (2 * n_a, 2 * n_b);
    let k = random_matrix_clipped(da, db, 0.2, 1.2, rng);
    let delta_a = standard_delta(n_a);
    let twisted = k.transpose() * delta_a * &k;
    let nu = random_psd(db, 0.4, rng) + DMatrix::identity(db, db) * (0.5 + margin);
    let mu = random_psd(db, 0.4, rng)
        + DMatrix::identity(db, db) * (0.5 * spectral_norm(&twisted) + margin);
    let alpha = &nu + &mu;
    (k, alpha, nu, mu)
}

/// (k, mu) of a random valid observable on n modes with invertible K, so
/// K^T Delta_A K is nondegenerate.
pub fn random_nondegenerate_observable(
    n_modes: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = 2 * n_modes;
    let k = random_matrix_clipped(d, d, 0.4, 1.6, rng);
    let delta = standard_delta(n_modes);
    let twisted = k.transpose() * delta * &k;
    let mu = random_psd(d, 0.5, rng)
        + DMatrix::identity(d, d) * (0.5 * spectral_norm(&twisted) + margin);
    (k, mu)
}

/// Standard commutation form: 2x2 blocks [[0, -1], [1, 0]] down the diagonal.
/// Kept local so the generators stay independent of the library crate.
pub fn standard_delta(n_modes: usize) -> DMatrix<f64> {
    let d = 2 * n_modes;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for j in 0..n_modes {
        m[(2 * j, 2 * j + 1)] = -1.0;
        m[(2 * j + 1, 2 * j)] = 1.0;
    }
    m
}

/// Direct sum of two matrices.
pub fn direct_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut m = DMatrix::<f64>::zeros(ra + rb, ca + cb);
    m.view_mut((0, 0), (ra, ca)).copy_from(a);
    m.view_mut((ra, ca), (rb, cb)).copy_from(b);
    m
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

pub fn rel_frobenius_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / a.norm().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_matches_analytic_two_by_two() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let mut h = DMatrix::<Complex64>::zeros(2, 2);
        h[(0, 0)] = Complex64::new(1.0, 0.0);
        h[(1, 1)] = Complex64::new(1.0, 0.0);
        h[(0, 1)] = Complex64::new(0.0, 1.0);
        h[(1, 0)] = Complex64::new(0.0, -1.0);
        let e = hermitian_eigenvalues(&h);
        assert!((e[0] - 0.0).abs() < 1e-12);
        assert!((e[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_matches_vacuum_form() {
        // c I + i (-Delta/2) has eigenvalues c -+ 1/2
        for &c in &[0.5, 0.4, 1.0] {
            let sym = DMatrix::<f64>::identity(2, 2) * c;
            let antisym = standard_delta(1) * -0.5;
            let e = hermitian_eigenvalues_parts(&sym, &antisym);
            assert!((e[0] - (c - 0.5)).abs() < 1e-12, "c = {c}");
            assert!((e[1] - (c + 0.5)).abs() < 1e-12, "c = {c}");
        }
    }

    #[test]
    fn oracle_preserves_trace_and_frobenius() {
        let mut r = rng(7);
        for n in 2..=8 {
            let s = random_symmetric(n, 1.0, &mut r);
            let a = random_antisymmetric(n, 1.0, &mut r);
            let e = hermitian_eigenvalues_parts(&s, &a);
            let trace: f64 = (0..n).map(|i| s[(i, i)]).sum();
            let fro2: f64 = s.iter().map(|x| x * x).sum::<f64>()
                + a.iter().map(|x| x * x).sum::<f64>();
            let esum: f64 = e.iter().sum();
            let e2sum: f64 = e.iter().map(|x| x * x).sum();
            assert!((esum - trace).abs() < 1e-10 * trace.abs().max(1.0));
            assert!((e2sum - fro2).abs() < 1e-10 * fro2.max(1.0));
        }
    }

    #[test]
    fn oracle_shifts_linearly() {
        let mut r = rng(11);
        let s = random_symmetric(5, 1.0, &mut r);
        let a = random_antisymmetric(5, 1.0, &mut r);
        let e0 = hermitian_eigenvalues_parts(&s, &a);
        let shifted = &s + DMatrix::identity(5, 5) * 0.7;
        let e1 = hermitian_eigenvalues_parts(&shifted, &a);
        for i in 0..5 {
            assert!((e1[i] - e0[i] - 0.7).abs() < 1e-11);
        }
    }

    #[test]
    fn two_mode_squeezed_cov_is_pure_shape() {
        let m = two_mode_squeezed_cov(1.5);
        assert_eq!(m[(0, 2)], (1.5_f64 * 1.5 - 0.25).sqrt());
        assert_eq!(m[(1, 3)], -m[(0, 2)]);
        assert_eq!(m[(0, 0)], 1.5);
    }
}
