//! Classification of single-mode channels, closed-form breaking criteria,
//! and conjectured classical-capacity values for the canonical families.
//!
//! Up to symplectic changes of frame before and after the channel, a valid
//! one-mode channel is pinned down by two invariants: d = det K and
//! s = sqrt(det alpha). The sign and size of d sort channels into the
//! canonical families
//!
//! * A  — rank-deficient K (d ~ 0): measure-and-reprepare along one line,
//! * B1 — d = 1 with rank-one noise: a degenerate quadrature-noise channel,
//! * B2 — d = 1 with full noise: classical additive Gaussian noise,
//! * C  — 0 < d != 1: attenuators (d < 1) and amplifiers (d > 1),
//! * D  — d < 0: transposed amplifiers.
//!
//! `gain` reports the canonical parameter k (k^2 = |d|, except family A
//! which keeps the largest singular value, and B families where k = 1) and
//! `added_noise` the excess noise N over the validity floor.

use nalgebra::{DMatrix, DVector};

use crate::channels::{validate_channel, GaussianChannel};
use crate::error::{GaussError, Result};
use crate::symplectic::SymplecticSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OneModeCase {
    A,
    B1,
    B2,
    C,
    D,
}

impl std::fmt::Display for OneModeCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OneModeCase::A => "A",
            OneModeCase::B1 => "B1",
            OneModeCase::B2 => "B2",
            OneModeCase::C => "C",
            OneModeCase::D => "D",
        };
        f.write_str(s)
    }
}

/// Raw invariants the classification is computed from.
#[derive(Debug, Clone, Copy)]
pub struct ClassInvariants {
    pub det_k: f64,
    pub sqrt_det_alpha: f64,
}

#[derive(Debug, Clone)]
pub struct OneModeClass {
    pub case: OneModeCase,
    /// Canonical gain parameter k (see module docs for the per-family
    /// meaning). `None` only when the family does not define one.
    pub gain: f64,
    /// Excess noise N over the validity floor; `None` for family B1 where
    /// the rank-one noise escapes the determinant invariant.
    pub added_noise: Option<f64>,
    pub invariants: ClassInvariants,
    /// Set when the reported numbers are frame-dependent: family A with
    /// anisotropic noise keeps its invariants only up to pre/post scaling.
    pub low_confidence: bool,
}

fn sym_eig_range_2x2(a: &DMatrix<f64>) -> (f64, f64) {
    let tr = a[(0, 0)] + a[(1, 1)];
    let off = 0.5 * (a[(0, 1)] + a[(1, 0)]);
    let gap = (0.25 * (a[(0, 0)] - a[(1, 1)]).powi(2) + off * off).sqrt();
    (0.5 * tr - gap, 0.5 * tr + gap)
}

fn spectral_norm_2x2(k: &DMatrix<f64>) -> f64 {
    let (_, top) = sym_eig_range_2x2(&(k.transpose() * k));
    top.max(0.0).sqrt()
}

/// Sort a valid one-mode channel into its canonical family and extract the
/// (k, N) parameters. The displacement m plays no role.
pub fn classify(c: &GaussianChannel, tol: f64) -> Result<OneModeClass> {
    if c.space_in().n_modes() != 1 || c.space_out().n_modes() != 1 {
        return Err(GaussError::InvalidArgument(format!(
            "classification covers one-mode channels; got {} -> {} modes",
            c.space_in().n_modes(),
            c.space_out().n_modes()
        )));
    }
    if !validate_channel(c, tol).valid {
        return Err(GaussError::PreconditionViolation(
            "classification needs a valid channel".into(),
        ));
    }
    let d = c.k().determinant();
    let det_alpha = c.alpha().determinant();
    let s = det_alpha.max(0.0).sqrt();
    let invariants = ClassInvariants {
        det_k: d,
        sqrt_det_alpha: s,
    };
    let alpha_scale = c.alpha().amax();

    let (case, gain, added_noise, low_confidence) = if d.abs() <= tol {
        // rank-deficient K: every input collapses onto one noisy line
        let k_norm = spectral_norm_2x2(c.k());
        let gain = if k_norm <= tol { 0.0 } else { k_norm };
        let (lo, hi) = sym_eig_range_2x2(c.alpha());
        let anisotropic = (hi - lo) > 1e-8 * hi.max(1.0);
        (
            OneModeCase::A,
            gain,
            Some(s - 0.5),
            gain > 0.0 && anisotropic,
        )
    } else if (d - 1.0).abs() <= tol {
        if alpha_scale <= tol {
            // noiseless symplectic map: the trivial member of B2
            (OneModeCase::B2, 1.0, Some(0.0), false)
        } else if det_alpha <= tol * alpha_scale * alpha_scale {
            (OneModeCase::B1, 1.0, None, false)
        } else {
            (OneModeCase::B2, 1.0, Some(s), false)
        }
    } else if d > 0.0 {
        (OneModeCase::C, d.sqrt(), Some(s - 0.5 * (1.0 - d).abs()), false)
    } else {
        (OneModeCase::D, (-d).sqrt(), Some(s - 0.5 * (1.0 - d)), false)
    };

    let added_noise = match added_noise {
        Some(n) if n < -tol => {
            return Err(GaussError::InconsistentChannel(format!(
                "family {case} reports negative excess noise N = {n:.3e}"
            )))
        }
        Some(n) => Some(n.max(0.0)),
        None => None,
    };
    Ok(OneModeClass {
        case,
        gain,
        added_noise,
        invariants,
        low_confidence,
    })
}

/// Closed-form entanglement-breaking decision per family:
/// A and D always break, B1 never does, B2 breaks iff N >= 1, and C breaks
/// iff N >= min(1, k^2).
pub fn eb_decide_analytic(cls: &OneModeClass) -> bool {
    match cls.case {
        OneModeCase::A | OneModeCase::D => true,
        OneModeCase::B1 => false,
        OneModeCase::B2 => cls.added_noise.unwrap_or(0.0) >= 1.0,
        OneModeCase::C => {
            let k2 = cls.gain * cls.gain;
            cls.added_noise.unwrap_or(0.0) >= k2.min(1.0)
        }
    }
}

/// Bosonic entropy kernel g(x) = (x+1) ln(x+1) - x ln x in nats, with
/// g(0) = 0. Strictly increasing and concave on x >= 0.
pub fn g_function(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(GaussError::InvalidArgument(format!(
            "g is defined for nonnegative arguments, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * (x + 1.0).ln() - x * x.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogBase {
    Nat,
    Two,
}

/// A capacity value that rests on an unproven optimality assumption.
#[derive(Debug, Clone, Copy)]
pub struct CapacityEstimate {
    pub value: f64,
    pub base: LogBase,
    /// Always true: the Gaussian-input single-letter formula below is the
    /// conjectured optimum, not a theorem.
    pub conjectured: bool,
}

/// Conjectured classical capacity of the B2/C/D families under mean photon
/// constraint `photon_budget` at the input: g(k^2 c + N0) - g(N0) with the
/// effective output noise floor N0 = (k^2 - 1)_+ + N for B2 and C, and
/// N0 = k^2 + N for D.
pub fn capacity_conjectured(
    cls: &OneModeClass,
    photon_budget: f64,
    base: LogBase,
) -> Result<CapacityEstimate> {
    if photon_budget < 0.0 {
        return Err(GaussError::InvalidArgument(
            "photon budget must be nonnegative".into(),
        ));
    }
    let n = match (cls.case, cls.added_noise) {
        (OneModeCase::B2, Some(n)) | (OneModeCase::C, Some(n)) | (OneModeCase::D, Some(n)) => n,
        _ => {
            return Err(GaussError::UnsupportedCase(format!(
                "the closed capacity form covers families B2, C, D; got {}",
                cls.case
            )))
        }
    };
    let k2 = cls.gain * cls.gain;
    let n0 = match cls.case {
        OneModeCase::D => k2 + n,
        _ => (k2 - 1.0).max(0.0) + n,
    };
    let nats = g_function(k2 * photon_budget + n0)? - g_function(n0)?;
    let value = match base {
        LogBase::Nat => nats,
        LogBase::Two => nats / std::f64::consts::LN_2,
    };
    Ok(CapacityEstimate {
        value,
        base,
        conjectured: true,
    })
}

/// Build the canonical representative of a family.
///
/// * A: K = diag(k, 0), alpha = (N + 1/2) I
/// * B1: K = I, alpha = diag(0, 1/2)  (k and N are ignored)
/// * B2: K = I, alpha = N I
/// * C: K = k I, alpha = (N + |1 - k^2|/2) I, k > 0
/// * D: K = k diag(1, -1), alpha = (N + (1 + k^2)/2) I, k > 0
pub fn normal_form_channel(case: OneModeCase, k: f64, n: f64) -> Result<GaussianChannel> {
    let space = SymplecticSpace::standard_form(1)?;
    if n < 0.0 {
        return Err(GaussError::InvalidArgument(
            "excess noise N must be nonnegative".into(),
        ));
    }
    let (k_mat, alpha) = match case {
        OneModeCase::A => {
            if k < 0.0 {
                return Err(GaussError::InvalidArgument(
                    "family A needs k >= 0".into(),
                ));
            }
            (
                DMatrix::from_row_slice(2, 2, &[k, 0.0, 0.0, 0.0]),
                DMatrix::identity(2, 2) * (n + 0.5),
            )
        }
        OneModeCase::B1 => (
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.5]),
        ),
        OneModeCase::B2 => (DMatrix::identity(2, 2), DMatrix::identity(2, 2) * n),
        OneModeCase::C => {
            if k <= 0.0 {
                return Err(GaussError::InvalidArgument(
                    "family C needs k > 0".into(),
                ));
            }
            (
                DMatrix::identity(2, 2) * k,
                DMatrix::identity(2, 2) * (n + 0.5 * (1.0 - k * k).abs()),
            )
        }
        OneModeCase::D => {
            if k <= 0.0 {
                return Err(GaussError::InvalidArgument(
                    "family D needs k > 0".into(),
                ));
            }
            (
                DMatrix::from_row_slice(2, 2, &[k, 0.0, 0.0, -k]),
                DMatrix::identity(2, 2) * (n + 0.5 * (1.0 + k * k)),
            )
        }
    };
    GaussianChannel::new(space.clone(), space, k_mat, DVector::zeros(2), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::validate_channel;
    use gausschan_testkit as tk;

    fn classify_form(case: OneModeCase, k: f64, n: f64) -> OneModeClass {
        let c = normal_form_channel(case, k, n).unwrap();
        assert!(validate_channel(&c, 1e-9).valid);
        classify(&c, 1e-9).unwrap()
    }

    #[test]
    fn attenuator_classifies_as_c() {
        let cls = classify_form(OneModeCase::C, 0.5, 0.0);
        assert_eq!(cls.case, OneModeCase::C);
        assert!((cls.gain - 0.5).abs() < 1e-12);
        assert!(cls.added_noise.unwrap().abs() < 1e-12);
        assert!(!cls.low_confidence);
    }

    #[test]
    fn transposed_amplifier_classifies_as_d() {
        let cls = classify_form(OneModeCase::D, 2.0, 1.0);
        assert_eq!(cls.case, OneModeCase::D);
        assert!((cls.gain - 2.0).abs() < 1e-12);
        assert!((cls.added_noise.unwrap() - 1.0).abs() < 1e-12);
        assert!((cls.invariants.sqrt_det_alpha - 3.5).abs() < 1e-12);
    }

    #[test]
    fn symplectic_noise_classifies_as_b2() {
        // K = I with alpha = S^T S for symplectic S has det alpha = 1, N = 1
        let mut r = tk::rng(5);
        let s_mat = tk::random_one_mode_symplectic(&mut r);
        let space = SymplecticSpace::standard_form(1).unwrap();
        let c = GaussianChannel::new(
            space.clone(),
            space,
            DMatrix::identity(2, 2),
            DVector::zeros(2),
            s_mat.transpose() * &s_mat,
        )
        .unwrap();
        let cls = classify(&c, 1e-9).unwrap();
        assert_eq!(cls.case, OneModeCase::B2);
        assert!((cls.added_noise.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_noise_classifies_as_b1() {
        let cls = classify_form(OneModeCase::B1, 1.0, 0.0);
        assert_eq!(cls.case, OneModeCase::B1);
        assert!(cls.added_noise.is_none());
    }

    #[test]
    fn noiseless_identity_is_trivial_b2() {
        let c = GaussianChannel::identity(SymplecticSpace::standard_form(1).unwrap());
        let cls = classify(&c, 1e-9).unwrap();
        assert_eq!(cls.case, OneModeCase::B2);
        assert_eq!(cls.added_noise, Some(0.0));
    }

    #[test]
    fn collapse_channel_classifies_as_a() {
        let cls = classify_form(OneModeCase::A, 0.7, 0.25);
        assert_eq!(cls.case, OneModeCase::A);
        assert!((cls.gain - 0.7).abs() < 1e-12);
        assert!((cls.added_noise.unwrap() - 0.25).abs() < 1e-12);
        assert!(!cls.low_confidence, "isotropic noise is frame-stable");
    }

    #[test]
    fn anisotropic_collapse_is_flagged_low_confidence() {
        let space = SymplecticSpace::standard_form(1).unwrap();
        let c = GaussianChannel::new(
            space.clone(),
            space,
            DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, 0.0]),
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.6]),
        )
        .unwrap();
        let cls = classify(&c, 1e-9).unwrap();
        assert_eq!(cls.case, OneModeCase::A);
        assert!(cls.low_confidence);
    }

    #[test]
    fn multimode_channels_are_rejected() {
        let c = GaussianChannel::identity(SymplecticSpace::standard_form(2).unwrap());
        assert!(matches!(
            classify(&c, 1e-9),
            Err(GaussError::InvalidArgument(_))
        ));
    }

    #[test]
    fn invalid_channels_are_rejected() {
        let space = SymplecticSpace::standard_form(1).unwrap();
        let c = GaussianChannel::new(
            space.clone(),
            space,
            DMatrix::identity(2, 2) * 0.5,
            DVector::zeros(2),
            DMatrix::identity(2, 2) * 0.3,
        )
        .unwrap();
        assert!(matches!(
            classify(&c, 1e-9),
            Err(GaussError::PreconditionViolation(_))
        ));
    }

    #[test]
    fn classification_is_frame_invariant() {
        // pre/post symplectic frames leave (case, k, N) alone
        let mut r = tk::rng(19);
        let space = SymplecticSpace::standard_form(1).unwrap();
        let forms = [
            (OneModeCase::C, 0.5, 0.3),
            (OneModeCase::C, 1.4, 0.2),
            (OneModeCase::D, 1.1, 0.5),
            (OneModeCase::B2, 1.0, 0.8),
        ];
        for &(case, k, n) in &forms {
            let c = normal_form_channel(case, k, n).unwrap();
            for _ in 0..5 {
                let s1 = tk::random_one_mode_symplectic(&mut r);
                let s2 = tk::random_one_mode_symplectic(&mut r);
                let framed = GaussianChannel::new(
                    space.clone(),
                    space.clone(),
                    &s1 * c.k() * &s2,
                    DVector::zeros(2),
                    s2.transpose() * c.alpha() * &s2,
                )
                .unwrap();
                assert!(validate_channel(&framed, 1e-9).valid);
                let cls = classify(&framed, 1e-8).unwrap();
                assert_eq!(cls.case, case);
                assert!((cls.gain - k).abs() < 1e-8);
                assert!((cls.added_noise.unwrap() - n).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn breaking_rule_per_family() {
        assert!(eb_decide_analytic(&classify_form(OneModeCase::A, 0.7, 0.0)));
        assert!(eb_decide_analytic(&classify_form(OneModeCase::D, 1.3, 0.0)));
        assert!(!eb_decide_analytic(&classify_form(OneModeCase::B1, 1.0, 0.0)));
        assert!(eb_decide_analytic(&classify_form(OneModeCase::B2, 1.0, 1.0)));
        assert!(!eb_decide_analytic(&classify_form(OneModeCase::B2, 1.0, 0.99)));
        assert!(eb_decide_analytic(&classify_form(OneModeCase::C, 0.5, 0.25)));
        assert!(!eb_decide_analytic(&classify_form(OneModeCase::C, 0.5, 0.2)));
        assert!(eb_decide_analytic(&classify_form(OneModeCase::C, 2.0, 1.0)));
        assert!(!eb_decide_analytic(&classify_form(OneModeCase::C, 2.0, 0.99)));
    }

    #[test]
    fn g_function_values() {
        assert_eq!(g_function(0.0).unwrap(), 0.0);
        let g1 = g_function(1.0).unwrap();
        assert!((g1 - 2.0 * std::f64::consts::LN_2).abs() < 1e-14);
        assert!((g1 - 1.386294).abs() < 1e-5);
        let g2 = g_function(2.0).unwrap();
        assert!((g2 - (3.0 * 3.0f64.ln() - 2.0 * 2.0f64.ln())).abs() < 1e-14);
        assert!(g_function(-0.1).is_err());
    }

    #[test]
    fn g_function_is_increasing_and_concave() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let gs: Vec<f64> = xs.iter().map(|&x| g_function(x).unwrap()).collect();
        for w in gs.windows(2) {
            assert!(w[1] > w[0]);
        }
        for w in gs.windows(3) {
            assert!(w[2] - w[1] <= w[1] - w[0] + 1e-12);
        }
    }

    #[test]
    fn capacity_of_unit_noise_additive_channel() {
        let cls = classify_form(OneModeCase::B2, 1.0, 1.0);
        let cap = capacity_conjectured(&cls, 1.0, LogBase::Nat).unwrap();
        // g(2) - g(1) = 3 ln 3 - 4 ln 2
        let exact = 3.0 * 3.0f64.ln() - 4.0 * 2.0f64.ln();
        assert!((cap.value - exact).abs() < 1e-12);
        assert!((cap.value - 0.523248).abs() < 1e-5);
        assert!(cap.conjectured);
        let bits = capacity_conjectured(&cls, 1.0, LogBase::Two).unwrap();
        assert!((bits.value - exact / std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn capacity_noise_floor_per_family() {
        // attenuator: N0 = N
        let c_att = classify_form(OneModeCase::C, 0.5, 0.3);
        let cap = capacity_conjectured(&c_att, 2.0, LogBase::Nat).unwrap();
        let exact = g_function(0.25 * 2.0 + 0.3).unwrap() - g_function(0.3).unwrap();
        assert!((cap.value - exact).abs() < 1e-12);
        // amplifier: N0 = k^2 - 1 + N
        let c_amp = classify_form(OneModeCase::C, 2.0, 0.5);
        let cap = capacity_conjectured(&c_amp, 1.0, LogBase::Nat).unwrap();
        let exact = g_function(4.0 + 3.5).unwrap() - g_function(3.5).unwrap();
        assert!((cap.value - exact).abs() < 1e-12);
        // transposed amplifier: N0 = k^2 + N
        let c_d = classify_form(OneModeCase::D, 2.0, 0.5);
        let cap = capacity_conjectured(&c_d, 1.0, LogBase::Nat).unwrap();
        let exact = g_function(4.0 + 4.5).unwrap() - g_function(4.5).unwrap();
        assert!((cap.value - exact).abs() < 1e-12);
        // unit-gain D matches the unit-noise additive value: N0 = 1
        let c_d1 = classify_form(OneModeCase::D, 1.0, 0.0);
        let cap = capacity_conjectured(&c_d1, 1.0, LogBase::Nat).unwrap();
        assert!((cap.value - 0.523248).abs() < 1e-5);
    }

    #[test]
    fn capacity_is_monotone_in_the_budget() {
        let cls = classify_form(OneModeCase::C, 0.8, 0.4);
        let mut last = -1.0;
        for i in 0..100 {
            let c = i as f64 * 0.1;
            let cap = capacity_conjectured(&cls, c, LogBase::Nat).unwrap();
            assert!(cap.value > last || (i == 0 && cap.value == 0.0));
            last = cap.value;
        }
    }

    #[test]
    fn capacity_rejects_uncovered_families() {
        let cls = classify_form(OneModeCase::B1, 1.0, 0.0);
        assert!(capacity_conjectured(&cls, 1.0, LogBase::Nat).is_err());
        let cls = classify_form(OneModeCase::A, 0.5, 0.1);
        assert!(capacity_conjectured(&cls, 1.0, LogBase::Nat).is_err());
        let cls = classify_form(OneModeCase::C, 0.5, 0.1);
        assert!(capacity_conjectured(&cls, -1.0, LogBase::Nat).is_err());
    }

    #[test]
    fn normal_forms_are_valid_and_round_trip() {
        let cases = [
            (OneModeCase::A, 0.0, 0.3),
            (OneModeCase::A, 1.2, 0.0),
            (OneModeCase::B1, 1.0, 0.0),
            (OneModeCase::B2, 1.0, 0.5),
            (OneModeCase::C, 0.3, 0.7),
            (OneModeCase::C, 1.7, 0.1),
            (OneModeCase::D, 0.9, 0.0),
        ];
        for &(case, k, n) in &cases {
            let c = normal_form_channel(case, k, n).unwrap();
            assert!(validate_channel(&c, 1e-9).valid, "{case} k={k} N={n}");
            let cls = classify(&c, 1e-9).unwrap();
            assert_eq!(cls.case, case);
        }
        assert!(normal_form_channel(OneModeCase::C, 0.0, 0.1).is_err());
        assert!(normal_form_channel(OneModeCase::B2, 1.0, -0.1).is_err());
    }
}
