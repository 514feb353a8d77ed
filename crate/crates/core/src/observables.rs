//! Gaussian observables with phase-space outcomes, their statistics, and
//! dilation to sharp measurements on an enlarged system.
//!
//! An observable on an `n_a`-mode system with outcomes in R^(2 n_b) is the
//! pair (K, mu): a real 2n_a x 2n_b matrix and a symmetric 2n_b x 2n_b
//! measurement-noise covariance obeying mu >= (i/2) K^T Delta_A K. Sharp
//! observables are the mu = 0 case, which forces the pulled-back symplectic
//! form K^T Delta_A K to vanish (jointly measurable quadratures). Outcome
//! statistics on a Gaussian state are again Gaussian.

use nalgebra::{DMatrix, DVector};

use crate::error::{GaussError, Result};
use crate::states::GaussianState;
use crate::symplectic::{
    antisymmetric_canonical, min_eig_hermitian, psd_check, HermitianPart, PsdReport,
    SymplecticSpace,
};

#[derive(Debug, Clone)]
pub struct GaussianObservable {
    pub(crate) space_sys: SymplecticSpace,
    pub(crate) space_out: SymplecticSpace,
    pub(crate) k: DMatrix<f64>,
    pub(crate) mu: DMatrix<f64>,
}

impl GaussianObservable {
    pub fn new(
        space_sys: SymplecticSpace,
        space_out: SymplecticSpace,
        k: DMatrix<f64>,
        mu: DMatrix<f64>,
    ) -> Result<Self> {
        let (da, db) = (space_sys.dim(), space_out.dim());
        if k.shape() != (da, db) {
            return Err(GaussError::InvalidArgument(format!(
                "matrix K has shape {:?}, observable needs ({da}, {db})",
                k.shape()
            )));
        }
        if mu.shape() != (db, db) {
            return Err(GaussError::InvalidArgument(format!(
                "noise mu has shape {:?}, outcome space needs ({db}, {db})",
                mu.shape()
            )));
        }
        let scale = mu.amax().max(1.0);
        if (&mu - mu.transpose()).amax() > 1e-8 * scale {
            return Err(GaussError::InvalidArgument(
                "noise mu is not symmetric".into(),
            ));
        }
        Ok(Self {
            space_sys,
            space_out,
            k,
            mu,
        })
    }

    /// Joint noisy measurement of all quadratures: K = I, mu = I/2. The
    /// minimal isotropic noise that makes position and momentum jointly
    /// readable.
    pub fn heterodyne(space: SymplecticSpace) -> Self {
        let d = space.dim();
        Self {
            space_sys: space.clone(),
            space_out: space,
            k: DMatrix::identity(d, d),
            mu: DMatrix::identity(d, d) * 0.5,
        }
    }

    pub fn space_sys(&self) -> &SymplecticSpace {
        &self.space_sys
    }

    pub fn space_out(&self) -> &SymplecticSpace {
        &self.space_out
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn mu(&self) -> &DMatrix<f64> {
        &self.mu
    }

    /// The pulled-back symplectic form K^T Delta_A K.
    pub fn twist(&self) -> DMatrix<f64> {
        self.k.transpose() * self.space_sys.delta() * &self.k
    }

    /// Noise-free observables (mu = 0) correspond to projective measurement
    /// of commuting quadrature combinations.
    pub fn is_sharp(&self, tol: f64) -> bool {
        self.mu.amax() <= tol
    }
}

/// Test mu >= (i/2) K^T Delta_A K at relative tolerance `tol`.
pub fn validate_observable(o: &GaussianObservable, tol: f64) -> PsdReport {
    let h = HermitianPart::new(o.mu.clone(), o.twist() * -0.5)
        .expect("observable pieces were shape-checked at construction");
    psd_check(&h, tol)
}

/// Gaussian outcome law of `o` measured on `s`, in both parameterizations.
///
/// The natural parameters live on the symplectic-Fourier side:
/// `mean_sf = K^T mean`, `cov_sf = K^T cov K + mu`. Outcomes themselves are
/// labeled in ordinary phase-space coordinates through w = Delta z, giving
/// `mean = Delta^T mean_sf` and `cov = Delta^T cov_sf Delta` on the outcome
/// space.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub mean_sf: DVector<f64>,
    pub cov_sf: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

pub fn outcome_distribution(
    o: &GaussianObservable,
    s: &GaussianState,
) -> Result<OutcomeDistribution> {
    if s.space != o.space_sys {
        return Err(GaussError::InvalidArgument(format!(
            "state has {} modes, observable measures {}",
            s.space.n_modes(),
            o.space_sys.n_modes()
        )));
    }
    let kt = o.k.transpose();
    let mean_sf = &kt * &s.mean;
    let cov_sf = &kt * &s.cov * &o.k + &o.mu;
    let delta = o.space_out.delta();
    let mean = delta.transpose() * &mean_sf;
    let cov = delta.transpose() * &cov_sf * delta;
    Ok(OutcomeDistribution {
        mean_sf,
        cov_sf,
        mean,
        cov,
    })
}

/// Density of the observable against Lebesgue measure on outcome space, for
/// square nondegenerate K with strictly positive mu: a Gaussian envelope of
/// covariance `sigma_a_cov` centered at `displacement_map * outcome`, scaled
/// by `norm_factor`.
#[derive(Debug, Clone)]
pub struct DensityParams {
    pub displacement_map: DMatrix<f64>,
    pub sigma_a_cov: DMatrix<f64>,
    pub norm_factor: f64,
}

pub fn density_params(o: &GaussianObservable, tol: f64) -> Result<DensityParams> {
    if o.space_sys.n_modes() != o.space_out.n_modes() {
        return Err(GaussError::PreconditionViolation(
            "density form needs a square K (matching mode counts)".into(),
        ));
    }
    let mu_min = min_eig_hermitian(&HermitianPart::from_sym(o.mu.clone())?);
    if mu_min <= tol {
        return Err(GaussError::PreconditionViolation(format!(
            "density form needs strictly positive mu (min eigenvalue {mu_min:.3e})"
        )));
    }
    let det_k = o.k.determinant();
    if det_k.abs() <= tol {
        return Err(GaussError::PreconditionViolation(format!(
            "density form needs nondegenerate K (determinant {det_k:.3e})"
        )));
    }
    let k_inv = o
        .k
        .clone()
        .try_inverse()
        .ok_or_else(|| GaussError::PreconditionViolation("K is numerically singular".into()))?;
    // inverse of the symplectic transpose, written with exact Delta inverses
    let displacement_map =
        o.space_sys.delta().transpose() * k_inv.transpose() * o.space_out.delta();
    let sigma_a_cov = k_inv.transpose() * &o.mu * &k_inv;
    let n = o.space_sys.n_modes() as i32;
    let norm_factor = 1.0 / ((2.0 * std::f64::consts::PI).powi(n) * det_k.abs());
    Ok(DensityParams {
        displacement_map,
        sigma_a_cov,
        norm_factor,
    })
}

/// Sharp dilation of a noisy observable: an ancilla preparation
/// (covariance `alpha_c` on `space_anc`) plus a joint sharp observable
/// whose marginal statistics reproduce the original (K, mu) exactly.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub space_anc: SymplecticSpace,
    pub k_c: DMatrix<f64>,
    pub alpha_c: DMatrix<f64>,
}

/// Build the dilation. The ancilla matrix K_C is a solution of
/// K_C^T Delta_C K_C = -K^T Delta_A K obtained from the canonical form of
/// the right-hand side, and the ancilla state alpha_c = (K_C^-T) mu (K_C^-1)
/// turns the measurement noise into honest quantum noise of the ancilla.
/// Only the generic case is handled: the twist K^T Delta_A K must be
/// nondegenerate (in particular sharp observables, twist = 0, have nothing
/// to dilate and are rejected as unsupported).
pub fn naimark_dilate(o: &GaussianObservable, tol: f64) -> Result<NaimarkDilation> {
    let gamma = -o.twist();
    let canonical = antisymmetric_canonical(&gamma, tol)?;
    let db = o.space_out.dim();
    if canonical.rank < db {
        return Err(GaussError::UnsupportedCase(format!(
            "twist form is degenerate (rank {} of {db}); the generic dilation needs full rank",
            canonical.rank
        )));
    }
    let space_anc = SymplecticSpace::standard_form(o.space_out.n_modes())?;
    // scale the canonical pairs so each block carries a unit symplectic form
    let mut d_scale = DVector::zeros(db);
    let mut d_scale_inv = DVector::zeros(db);
    for (j, &c) in canonical.values.iter().enumerate() {
        let r = c.sqrt();
        d_scale[2 * j] = r;
        d_scale[2 * j + 1] = r;
        d_scale_inv[2 * j] = 1.0 / r;
        d_scale_inv[2 * j + 1] = 1.0 / r;
    }
    let t = &canonical.congruence;
    let k_c = DMatrix::from_diagonal(&d_scale) * t.transpose();
    let alpha_c =
        DMatrix::from_diagonal(&d_scale_inv) * t.transpose() * &o.mu * t
            * DMatrix::from_diagonal(&d_scale_inv);
    // the construction guarantees these identities; failing them means the
    // canonical form went numerically bad, which callers cannot fix
    let twist_rebuilt = k_c.transpose() * space_anc.delta() * &k_c;
    let twist_err = (&twist_rebuilt - &gamma).norm() / gamma.norm();
    if twist_err > 1e-12 {
        return Err(GaussError::InternalInconsistency(format!(
            "dilated twist off by relative {twist_err:.3e}"
        )));
    }
    let mu_rebuilt = k_c.transpose() * &alpha_c * &k_c;
    let mu_err = (&mu_rebuilt - &o.mu).norm() / o.mu.norm();
    if mu_err > 1e-10 {
        return Err(GaussError::InternalInconsistency(format!(
            "dilated noise off by relative {mu_err:.3e}"
        )));
    }
    let anc_state = HermitianPart::new(alpha_c.clone(), space_anc.delta() * -0.5)?;
    let anc_rep = psd_check(&anc_state, tol.max(1e-10));
    if !anc_rep.psd {
        return Err(GaussError::InternalInconsistency(format!(
            "ancilla covariance is not a state (min eigenvalue {:.3e})",
            anc_rep.min_eig
        )));
    }
    Ok(NaimarkDilation {
        space_anc,
        k_c,
        alpha_c,
    })
}

impl NaimarkDilation {
    /// The sharp observable on system + ancilla whose outcome statistics on
    /// `state tensor ancilla` match the original observable on `state`: K
    /// matrices stack, and the combined twist cancels exactly.
    pub fn joint_observable(&self, original: &GaussianObservable) -> Result<GaussianObservable> {
        let da = original.space_sys.dim();
        let dc = self.space_anc.dim();
        let db = original.space_out.dim();
        let joint_space =
            SymplecticSpace::standard_form(original.space_sys.n_modes() + self.space_anc.n_modes())?;
        let mut k = DMatrix::zeros(da + dc, db);
        k.view_mut((0, 0), (da, db)).copy_from(&original.k);
        k.view_mut((da, 0), (dc, db)).copy_from(&self.k_c);
        GaussianObservable::new(
            joint_space,
            original.space_out.clone(),
            k,
            DMatrix::zeros(db, db),
        )
    }

    /// The prepared ancilla as a state (zero mean).
    pub fn ancilla_state(&self) -> GaussianState {
        GaussianState {
            space: self.space_anc.clone(),
            mean: DVector::zeros(self.space_anc.dim()),
            cov: self.alpha_c.clone(),
        }
    }
}
