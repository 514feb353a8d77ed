//! Gaussian channels in characteristic-function form.
//!
//! A channel from an `n_a`-mode system to an `n_b`-mode system is the triple
//! (K, m, alpha) acting on characteristic functions as
//!
//! ```text
//! chi_out(z) = chi_in(K z) * exp(i m.z - z.alpha z / 2),    z in R^(2 n_b)
//! ```
//!
//! so `k` is a real 2n_a x 2n_b matrix that pulls output-side arguments back
//! to the input side, `m` displaces the output mean, and `alpha` is the added
//! noise covariance. On moments this reads mean -> K^T mean + m and
//! cov -> K^T cov K + alpha. Complete positivity is the matrix inequality
//! alpha >= (i/2)(Delta_B - K^T Delta_A K), checked through the same real
//! embedding used for states.

use nalgebra::{DMatrix, DVector};

use crate::error::{GaussError, Result};
use crate::states::GaussianState;
use crate::symplectic::{psd_check, HermitianPart, SymplecticSpace};

#[derive(Debug, Clone)]
pub struct GaussianChannel {
    pub(crate) space_in: SymplecticSpace,
    pub(crate) space_out: SymplecticSpace,
    pub(crate) k: DMatrix<f64>,
    pub(crate) m: DVector<f64>,
    pub(crate) alpha: DMatrix<f64>,
}

impl GaussianChannel {
    pub fn new(
        space_in: SymplecticSpace,
        space_out: SymplecticSpace,
        k: DMatrix<f64>,
        m: DVector<f64>,
        alpha: DMatrix<f64>,
    ) -> Result<Self> {
        let (da, db) = (space_in.dim(), space_out.dim());
        if k.shape() != (da, db) {
            return Err(GaussError::InvalidArgument(format!(
                "matrix K has shape {:?}, channel needs ({da}, {db})",
                k.shape()
            )));
        }
        if m.len() != db {
            return Err(GaussError::InvalidArgument(format!(
                "displacement m has length {}, output space needs {db}",
                m.len()
            )));
        }
        if alpha.shape() != (db, db) {
            return Err(GaussError::InvalidArgument(format!(
                "noise alpha has shape {:?}, output space needs ({db}, {db})",
                alpha.shape()
            )));
        }
        let scale = alpha.amax().max(1.0);
        if (&alpha - alpha.transpose()).amax() > 1e-8 * scale {
            return Err(GaussError::InvalidArgument(
                "noise alpha is not symmetric".into(),
            ));
        }
        Ok(Self {
            space_in,
            space_out,
            k,
            m,
            alpha,
        })
    }

    /// Identity channel on `space`: K = I, m = 0, alpha = 0.
    pub fn identity(space: SymplecticSpace) -> Self {
        let d = space.dim();
        Self {
            space_in: space.clone(),
            space_out: space,
            k: DMatrix::identity(d, d),
            m: DVector::zeros(d),
            alpha: DMatrix::zeros(d, d),
        }
    }

    pub fn space_in(&self) -> &SymplecticSpace {
        &self.space_in
    }

    pub fn space_out(&self) -> &SymplecticSpace {
        &self.space_out
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn m(&self) -> &DVector<f64> {
        &self.m
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    /// The matrix Delta_B - K^T Delta_A K whose halved imaginary part the
    /// noise must dominate. Zero exactly when K is a symplectic map.
    pub fn symplectic_defect(&self) -> DMatrix<f64> {
        self.space_out.delta() - self.k.transpose() * self.space_in.delta() * &self.k
    }

    /// The pulled-back form K^T Delta_A K (the "twist" the measurement side
    /// of a split has to absorb).
    pub fn twist(&self) -> DMatrix<f64> {
        self.k.transpose() * self.space_in.delta() * &self.k
    }
}

/// Outcome of the complete-positivity test, keeping the defect matrix around
/// for diagnostics.
#[derive(Debug, Clone)]
pub struct ChannelValidity {
    pub valid: bool,
    pub min_eig: f64,
    pub scale: f64,
    pub symplectic_defect: DMatrix<f64>,
}

/// Test alpha >= (i/2)(Delta_B - K^T Delta_A K) at relative tolerance `tol`.
pub fn validate_channel(c: &GaussianChannel, tol: f64) -> ChannelValidity {
    let defect = c.symplectic_defect();
    let h = HermitianPart::new(c.alpha.clone(), &defect * -0.5)
        .expect("channel pieces were shape-checked at construction");
    let rep = psd_check(&h, tol);
    ChannelValidity {
        valid: rep.psd,
        min_eig: rep.min_eig,
        scale: rep.scale,
        symplectic_defect: defect,
    }
}

/// Push a state through: mean -> K^T mean + m, cov -> K^T cov K + alpha.
pub fn apply(c: &GaussianChannel, s: &GaussianState) -> Result<GaussianState> {
    if s.space != c.space_in {
        return Err(GaussError::InvalidArgument(format!(
            "state has {} modes, channel input needs {}",
            s.space.n_modes(),
            c.space_in.n_modes()
        )));
    }
    let kt = c.k.transpose();
    GaussianState::new(
        c.space_out.clone(),
        &kt * &s.mean + &c.m,
        &kt * &s.cov * &c.k + &c.alpha,
    )
}

/// Composite running `first` and then `second`. On characteristic functions
/// the K matrices multiply as k_first * k_second while m and alpha push
/// through the second leg.
pub fn compose(second: &GaussianChannel, first: &GaussianChannel) -> Result<GaussianChannel> {
    if first.space_out != second.space_in {
        return Err(GaussError::InvalidArgument(format!(
            "first channel ends on {} modes, second starts on {}",
            first.space_out.n_modes(),
            second.space_in.n_modes()
        )));
    }
    let k2t = second.k.transpose();
    GaussianChannel::new(
        first.space_in.clone(),
        second.space_out.clone(),
        &first.k * &second.k,
        &k2t * &first.m + &second.m,
        &k2t * &first.alpha * &second.k + &second.alpha,
    )
}

impl GaussianChannel {
    /// `first.then(second)` = run `self`, then `next`.
    pub fn then(&self, next: &GaussianChannel) -> Result<GaussianChannel> {
        compose(next, self)
    }
}

/// Parallel composition: block-diagonal K and alpha, stacked m.
pub fn tensor(c1: &GaussianChannel, c2: &GaussianChannel) -> GaussianChannel {
    let space_in =
        SymplecticSpace::standard_form(c1.space_in.n_modes() + c2.space_in.n_modes())
            .expect("mode counts are positive");
    let space_out =
        SymplecticSpace::standard_form(c1.space_out.n_modes() + c2.space_out.n_modes())
            .expect("mode counts are positive");
    let (da1, db1) = c1.k.shape();
    let (da2, db2) = c2.k.shape();
    let mut k = DMatrix::zeros(da1 + da2, db1 + db2);
    k.view_mut((0, 0), (da1, db1)).copy_from(&c1.k);
    k.view_mut((da1, db1), (da2, db2)).copy_from(&c2.k);
    let mut m = DVector::zeros(db1 + db2);
    m.rows_mut(0, db1).copy_from(&c1.m);
    m.rows_mut(db1, db2).copy_from(&c2.m);
    let mut alpha = DMatrix::zeros(db1 + db2, db1 + db2);
    alpha.view_mut((0, 0), (db1, db1)).copy_from(&c1.alpha);
    alpha.view_mut((db1, db1), (db2, db2)).copy_from(&c2.alpha);
    GaussianChannel {
        space_in,
        space_out,
        k,
        m,
        alpha,
    }
}

/// Image of a phase-space displacement under the dual action: the argument
/// maps to K w, the amplitude is damped by exp(-w.alpha w / 2), and the
/// phase picks up m.w.
#[derive(Debug, Clone)]
pub struct WeylDual {
    pub vector: DVector<f64>,
    pub log_damping: f64,
    pub phase: f64,
}

pub fn dual_weyl(c: &GaussianChannel, w: &DVector<f64>) -> Result<WeylDual> {
    if w.len() != c.space_out.dim() {
        return Err(GaussError::InvalidArgument(format!(
            "argument has length {}, output space needs {}",
            w.len(),
            c.space_out.dim()
        )));
    }
    Ok(WeylDual {
        vector: &c.k * w,
        log_damping: 0.5 * (w.transpose() * &c.alpha * w)[(0, 0)],
        phase: c.m.dot(w),
    })
}

/// Covariance of the channel output on one half of a joint input covariance
/// over A tensor A (the channel acts on the second half):
///
/// ```text
/// [[ g11,       g12 K        ],
///  [ K^T g21,   K^T g22 K + alpha ]]
/// ```
///
/// Feeding a strongly correlated pure state produces the Choi-type state
/// whose separability tracks the channel's entanglement breaking.
pub fn choi_covariance(c: &GaussianChannel, joint_cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let da = c.space_in.dim();
    let db = c.space_out.dim();
    if joint_cov.shape() != (2 * da, 2 * da) {
        return Err(GaussError::InvalidArgument(format!(
            "joint covariance has shape {:?}, needs ({}, {})",
            joint_cov.shape(),
            2 * da,
            2 * da
        )));
    }
    let g11 = joint_cov.view((0, 0), (da, da));
    let g12 = joint_cov.view((0, da), (da, da));
    let g21 = joint_cov.view((da, 0), (da, da));
    let g22 = joint_cov.view((da, da), (da, da));
    let mut out = DMatrix::zeros(da + db, da + db);
    out.view_mut((0, 0), (da, da)).copy_from(&g11);
    out.view_mut((0, da), (da, db)).copy_from(&(g12 * &c.k));
    out.view_mut((da, 0), (db, da))
        .copy_from(&(c.k.transpose() * g21));
    out.view_mut((da, da), (db, db))
        .copy_from(&(c.k.transpose() * g22 * &c.k + &c.alpha));
    Ok(out)
}
