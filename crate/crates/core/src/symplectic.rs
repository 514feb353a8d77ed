//! Symplectic phase spaces and the real-embedding Hermitian machinery.
//!
//! Every positivity question in this crate is about a complex Hermitian form
//! H = S + iA with S real symmetric and A real antisymmetric. Instead of
//! complex arithmetic, H is embedded as the real symmetric matrix
//!
//! ```text
//!     [[ S, -A ],
//!      [ A,  S ]]
//! ```
//!
//! whose spectrum equals the spectrum of H with every eigenvalue doubled: if
//! H(u + iv) = t(u + iv) then both [u; v] and [-v; u] are eigenvectors of the
//! embedding for t. One deterministic dense symmetric eigensolver therefore
//! serves the whole crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GaussError, Result};

/// Relative slack for well-formedness checks (symmetry of inputs that are
/// symmetric by construction). Far looser than roundoff, far tighter than any
/// decision tolerance, so it only ever rejects genuinely malformed data.
const SHAPE_SLACK: f64 = 1e-8;

/// Phase space of `n_modes` bosonic modes with coordinates ordered
/// (x_1, y_1, ..., x_n, y_n) and the standard commutation form delta:
/// 2x2 blocks [[0, -1], [1, 0]] down the diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    n_modes: usize,
    delta: DMatrix<f64>,
}

impl SymplecticSpace {
    pub fn standard_form(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(GaussError::InvalidArgument(
                "a symplectic space needs at least one mode".into(),
            ));
        }
        let d = 2 * n_modes;
        let mut delta = DMatrix::<f64>::zeros(d, d);
        for j in 0..n_modes {
            delta[(2 * j, 2 * j + 1)] = -1.0;
            delta[(2 * j + 1, 2 * j)] = 1.0;
        }
        Ok(Self { n_modes, delta })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Dimension of the phase space, 2 * n_modes.
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn delta(&self) -> &DMatrix<f64> {
        &self.delta
    }
}

/// Hermitian form sym + i*antisym held as its two real parts.
#[derive(Debug, Clone)]
pub struct HermitianPart {
    sym: DMatrix<f64>,
    antisym: DMatrix<f64>,
}

impl HermitianPart {
    pub fn new(sym: DMatrix<f64>, antisym: DMatrix<f64>) -> Result<Self> {
        if sym.nrows() != sym.ncols() || sym.shape() != antisym.shape() {
            return Err(GaussError::InvalidArgument(format!(
                "Hermitian parts must be square and congruent, got {:?} and {:?}",
                sym.shape(),
                antisym.shape()
            )));
        }
        if sym.is_empty() {
            return Err(GaussError::InvalidArgument(
                "Hermitian part must be nonempty".into(),
            ));
        }
        let scale = sym.amax().max(antisym.amax()).max(1.0);
        if (&sym - sym.transpose()).amax() > SHAPE_SLACK * scale {
            return Err(GaussError::InvalidArgument(
                "sym part is not symmetric".into(),
            ));
        }
        if (&antisym + antisym.transpose()).amax() > SHAPE_SLACK * scale {
            return Err(GaussError::InvalidArgument(
                "antisym part is not antisymmetric".into(),
            ));
        }
        Ok(Self { sym, antisym })
    }

    /// Purely real Hermitian form (antisymmetric part zero).
    pub fn from_sym(sym: DMatrix<f64>) -> Result<Self> {
        let z = DMatrix::zeros(sym.nrows(), sym.ncols());
        Self::new(sym, z)
    }

    pub fn dim(&self) -> usize {
        self.sym.nrows()
    }

    pub fn sym(&self) -> &DMatrix<f64> {
        &self.sym
    }

    pub fn antisym(&self) -> &DMatrix<f64> {
        &self.antisym
    }

    /// Real symmetric 2d x 2d embedding. The parts are re-symmetrized so the
    /// result is exactly symmetric in floating point.
    fn embedding(&self) -> DMatrix<f64> {
        let d = self.dim();
        let s = 0.5 * (&self.sym + self.sym.transpose());
        let a = 0.5 * (&self.antisym - self.antisym.transpose());
        let mut m = DMatrix::<f64>::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&s);
        m.view_mut((d, d), (d, d)).copy_from(&s);
        m.view_mut((0, d), (d, d)).copy_from(&(-&a));
        m.view_mut((d, 0), (d, d)).copy_from(&a);
        m
    }

    /// Eigenvalues of the embedding (each Hermitian eigenvalue twice),
    /// ascending. Exposed for tests of the doubling structure.
    pub fn embedding_eigenvalues(&self) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.embedding());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}

/// Smallest eigenvalue of the Hermitian form, computed through the real
/// embedding.
pub fn min_eig_hermitian(h: &HermitianPart) -> f64 {
    let eig = SymmetricEigen::new(h.embedding());
    eig.eigenvalues.min()
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone)]
pub struct PsdReport {
    pub psd: bool,
    /// Raw smallest eigenvalue, before any tolerance.
    pub min_eig: f64,
    /// max(1, largest |eigenvalue|); the tolerance is relative to this.
    pub scale: f64,
}

/// H >= 0 up to `tol`: true iff min_eig >= -tol * scale.
pub fn psd_check(h: &HermitianPart, tol: f64) -> PsdReport {
    let eig = SymmetricEigen::new(h.embedding());
    let min_eig = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    PsdReport {
        psd: min_eig >= -tol * scale,
        min_eig,
        scale,
    }
}

/// Smallest eigenvalue together with a subgradient of nu -> min_eig(nu + iA)
/// with respect to the real symmetric part: the symmetrized outer product
/// Re(u u*) of the minimal eigenvector, averaged over an orthonormal basis of
/// the minimal eigenspace when it is degenerate (within `cluster_rel` of the
/// bottom, relative to the spectral scale).
pub(crate) fn min_eig_subgradient(h: &HermitianPart, cluster_rel: f64) -> (f64, DMatrix<f64>) {
    let d = h.dim();
    let eig = SymmetricEigen::new(h.embedding());
    let min_eig = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    let width = cluster_rel * scale;
    let mut g = DMatrix::<f64>::zeros(d, d);
    let mut count = 0usize;
    for i in 0..eig.eigenvalues.len() {
        if eig.eigenvalues[i] <= min_eig + width {
            let w = eig.eigenvectors.column(i);
            let p = DVector::from_iterator(d, w.rows(0, d).iter().copied());
            let q = DVector::from_iterator(d, w.rows(d, d).iter().copied());
            g += &p * p.transpose() + &q * q.transpose();
            count += 1;
        }
    }
    (min_eig, g / count as f64)
}

/// Adjoint of K: Z_B -> Z_A with respect to the commutation forms:
/// K' = Delta_B^{-1} K^T Delta_A. An involution when A = B.
pub fn symplectic_transpose(
    k: &DMatrix<f64>,
    space_a: &SymplecticSpace,
    space_b: &SymplecticSpace,
) -> Result<DMatrix<f64>> {
    if k.nrows() != space_a.dim() || k.ncols() != space_b.dim() {
        return Err(GaussError::InvalidArgument(format!(
            "operator shape {:?} does not map {} -> {} mode spaces",
            k.shape(),
            space_b.n_modes(),
            space_a.n_modes()
        )));
    }
    // delta^{-1} = delta^T exactly for the standard form
    Ok(space_b.delta().transpose() * k.transpose() * space_a.delta())
}

/// Canonical congruence of a real antisymmetric matrix:
/// T^T a T = direct sum of c_j * [[0, -1], [1, 0]] blocks, then zeros.
#[derive(Debug, Clone)]
pub struct CanonicalAntisym {
    /// Invertible (here: orthogonal) congruence T, block columns first.
    pub congruence: DMatrix<f64>,
    /// Rank of the form; twice the number of blocks.
    pub rank: usize,
    /// Block values c_j > 0, descending.
    pub values: Vec<f64>,
}

/// Greedy canonical-pair extraction. b^T b has eigenvalue c^2 (doubled) for
/// each block value c of the antisymmetric b; the top eigenvector u together
/// with v = b u / c spans an invariant plane on which the form restricts to
/// c * [[0, -1], [1, 0]], and b preserves the orthogonal complement. Values
/// at or below tol * max(1, c_max) are assigned to the kernel.
pub fn antisymmetric_canonical(a: &DMatrix<f64>, tol: f64) -> Result<CanonicalAntisym> {
    if a.nrows() != a.ncols() || a.is_empty() {
        return Err(GaussError::InvalidArgument(
            "antisymmetric canonical form needs a nonempty square matrix".into(),
        ));
    }
    let scale0 = a.amax().max(1.0);
    if (a + a.transpose()).amax() > SHAPE_SLACK * scale0 {
        return Err(GaussError::InvalidArgument(
            "matrix is not antisymmetric".into(),
        ));
    }
    let d = a.nrows();
    let anti = 0.5 * (a - a.transpose());

    let mut basis = DMatrix::<f64>::identity(d, d);
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(d);
    let mut values: Vec<f64> = Vec::new();
    let mut threshold: Option<f64> = None;

    while basis.ncols() >= 2 {
        let dim = basis.ncols();
        let b = basis.transpose() * &anti * &basis;
        let gram = b.transpose() * &b;
        let eig = SymmetricEigen::new(gram);
        let mut top = 0usize;
        for i in 1..dim {
            if eig.eigenvalues[i] > eig.eigenvalues[top] {
                top = i;
            }
        }
        let sigma = eig.eigenvalues[top].max(0.0).sqrt();
        let thr = *threshold.get_or_insert(tol * sigma.max(1.0));
        if sigma <= thr {
            break;
        }
        let u = eig.eigenvectors.column(top).into_owned();
        let mut v = &b * &u / sigma;
        v -= &u * u.dot(&v);
        let vn = v.norm();
        if vn <= thr {
            break; // defensive: cannot complete the pair
        }
        v /= vn;

        let t1 = &basis * &u;
        let t2 = &basis * &v;
        // measure the block value against the original form
        let c = 0.5 * (t2.dot(&(&anti * &t1)) - t1.dot(&(&anti * &t2)));
        columns.push(t1);
        columns.push(t2);
        values.push(c);

        // deflate: orthonormal basis of the complement of {u, v} in the
        // current subspace, read off a projector eigendecomposition
        let proj = DMatrix::<f64>::identity(dim, dim) - &u * u.transpose() - &v * v.transpose();
        let proj = 0.5 * (&proj + proj.transpose());
        let peig = SymmetricEigen::new(proj);
        let mut keep = DMatrix::<f64>::zeros(dim, dim - 2);
        let mut col = 0usize;
        for i in 0..dim {
            if peig.eigenvalues[i] > 0.5 {
                if col < dim - 2 {
                    keep.set_column(col, &peig.eigenvectors.column(i));
                }
                col += 1;
            }
        }
        if col != dim - 2 {
            return Err(GaussError::InternalInconsistency(
                "deflation lost track of the complement dimension".into(),
            ));
        }
        basis = &basis * keep;
    }

    let rank = 2 * values.len();
    let mut t = DMatrix::<f64>::zeros(d, d);
    for (i, c) in columns.iter().enumerate() {
        t.set_column(i, c);
    }
    for j in 0..basis.ncols() {
        t.set_column(rank + j, &basis.column(j));
    }
    Ok(CanonicalAntisym {
        congruence: t,
        rank,
        values,
    })
}
