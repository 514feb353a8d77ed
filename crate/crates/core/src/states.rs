//! Gaussian states as (mean, covariance) pairs over a symplectic space.

use nalgebra::{DMatrix, DVector};

use crate::error::{GaussError, Result};
use crate::symplectic::{psd_check, HermitianPart, PsdReport, SymplecticSpace};

/// State with characteristic function exp(i mean.z - z.cov z / 2). The vacuum
/// has cov = I/2 in these units.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub(crate) space: SymplecticSpace,
    pub(crate) mean: DVector<f64>,
    pub(crate) cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(space: SymplecticSpace, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = space.dim();
        if mean.len() != d {
            return Err(GaussError::InvalidArgument(format!(
                "mean has length {}, space needs {}",
                mean.len(),
                d
            )));
        }
        if cov.shape() != (d, d) {
            return Err(GaussError::InvalidArgument(format!(
                "covariance has shape {:?}, space needs ({d}, {d})",
                cov.shape()
            )));
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-8 * scale {
            return Err(GaussError::InvalidArgument(
                "covariance is not symmetric".into(),
            ));
        }
        Ok(Self { space, mean, cov })
    }

    pub fn vacuum(space: SymplecticSpace) -> Self {
        let d = space.dim();
        Self {
            space,
            mean: DVector::zeros(d),
            cov: DMatrix::identity(d, d) * 0.5,
        }
    }

    /// Isotropic state with `occupation` quanta per mode: cov = (N + 1/2) I.
    pub fn thermal(space: SymplecticSpace, occupation: f64) -> Result<Self> {
        if occupation < 0.0 {
            return Err(GaussError::InvalidArgument(
                "thermal occupation must be nonnegative".into(),
            ));
        }
        let d = space.dim();
        Ok(Self {
            space,
            mean: DVector::zeros(d),
            cov: DMatrix::identity(d, d) * (occupation + 0.5),
        })
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
}

/// State inequality cov >= (i/2) Delta, tested through the real embedding.
pub fn validate_state(s: &GaussianState, tol: f64) -> PsdReport {
    let h = HermitianPart::new(s.cov.clone(), s.space.delta() * -0.5)
        .expect("state covariance was shape-checked at construction");
    psd_check(&h, tol)
}

/// Product state: means concatenate, covariances direct-sum, modes of `s1`
/// come first.
pub fn tensor(s1: &GaussianState, s2: &GaussianState) -> GaussianState {
    let space = SymplecticSpace::standard_form(s1.space.n_modes() + s2.space.n_modes())
        .expect("mode counts are positive");
    let (d1, d2) = (s1.space.dim(), s2.space.dim());
    let mut mean = DVector::zeros(d1 + d2);
    mean.rows_mut(0, d1).copy_from(&s1.mean);
    mean.rows_mut(d1, d2).copy_from(&s2.mean);
    let mut cov = DMatrix::zeros(d1 + d2, d1 + d2);
    cov.view_mut((0, 0), (d1, d1)).copy_from(&s1.cov);
    cov.view_mut((d1, d1), (d2, d2)).copy_from(&s2.cov);
    GaussianState { space, mean, cov }
}

/// Phase-space displacement: shifts the mean, leaves the covariance alone.
pub fn displace(s: &GaussianState, d: &DVector<f64>) -> Result<GaussianState> {
    if d.len() != s.space.dim() {
        return Err(GaussError::InvalidArgument(format!(
            "displacement has length {}, space needs {}",
            d.len(),
            s.space.dim()
        )));
    }
    Ok(GaussianState {
        space: s.space.clone(),
        mean: &s.mean + d,
        cov: s.cov.clone(),
    })
}

/// Split of the modes into two groups for partial-transpose tests.
#[derive(Debug, Clone)]
pub struct BipartitePartition {
    pub modes_a: Vec<usize>,
    pub modes_b: Vec<usize>,
}

impl BipartitePartition {
    pub fn new(modes_a: Vec<usize>, modes_b: Vec<usize>) -> Self {
        Self { modes_a, modes_b }
    }

    fn check(&self, n_modes: usize) -> Result<()> {
        let mut seen = vec![false; n_modes];
        for &m in self.modes_a.iter().chain(self.modes_b.iter()) {
            if m >= n_modes {
                return Err(GaussError::InvalidArgument(format!(
                    "partition names mode {m}, state has {n_modes}"
                )));
            }
            if seen[m] {
                return Err(GaussError::InvalidArgument(format!(
                    "partition repeats mode {m}"
                )));
            }
            seen[m] = true;
        }
        if seen.iter().any(|&s| !s) {
            return Err(GaussError::InvalidArgument(
                "partition does not cover all modes".into(),
            ));
        }
        Ok(())
    }
}

/// Partial-transpose test: flip the momentum sign on every mode of group B
/// (Lambda cov Lambda with Lambda = diag(1, -1) on those modes) and re-test
/// the state inequality. Separable states always pass; failure certifies
/// entanglement across the cut.
pub fn ppt_state_check(
    s: &GaussianState,
    partition: &BipartitePartition,
    tol: f64,
) -> Result<PsdReport> {
    partition.check(s.space.n_modes())?;
    let d = s.space.dim();
    let mut flip = DVector::from_element(d, 1.0);
    for &m in &partition.modes_b {
        flip[2 * m + 1] = -1.0;
    }
    let mut flipped = s.cov.clone();
    for i in 0..d {
        for j in 0..d {
            flipped[(i, j)] *= flip[i] * flip[j];
        }
    }
    let h = HermitianPart::new(flipped, s.space.delta() * -0.5)?;
    Ok(psd_check(&h, tol))
}
