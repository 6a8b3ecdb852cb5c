//! Radial multipliers `Φ_t`, length projections `P_d`, the truncations
//! `Φ_{t,m} = Φ_t(P_0 + … + P_m)`, the telescoped blocks `Ψ_k`, and the
//! tail bounds on `‖Φ_t − Φ_{t,m}‖_cb`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{CoefficientMap, GroupAlgebraElement, MatrixLevelElement};
use crate::error::{Error, Result};
use crate::free_group::Word;

/// Default number of schedule terms scanned by [`schedule_sup_bound`].
pub const DEFAULT_SCHEDULE_KMAX: usize = 64;

/// The default parameter schedule `(t_k, m_k) = (1/√k, k)`.
pub fn schedule(k: usize) -> (f64, usize) {
    (1.0 / (k as f64).sqrt(), k)
}

type Symbol = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Which radial map a [`RadialMultiplier`] realizes.
#[derive(Clone)]
pub enum MultiplierKind {
    /// `Φ_t`, symbol `e^{−td}`.
    Phi { t: f64 },
    /// `P_d`, indicator of one length.
    Band { d: usize },
    /// `Φ_{t,m}`, symbol `e^{−td}` for `d ≤ m`.
    PhiTm { t: f64, m: usize },
    /// `Ψ_k = Φ_{1/√k,k} − Φ_{1/√(k−1),k−1}` (with `Ψ_1 = Φ_{1,1}`).
    Psi { k: usize },
    Custom { label: String, symbol: Symbol, cutoff: Option<usize> },
}

impl fmt::Debug for MultiplierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplierKind::Phi { t } => write!(f, "Phi(t={t})"),
            MultiplierKind::Band { d } => write!(f, "Band(d={d})"),
            MultiplierKind::PhiTm { t, m } => write!(f, "PhiTm(t={t}, m={m})"),
            MultiplierKind::Psi { k } => write!(f, "Psi(k={k})"),
            MultiplierKind::Custom { label, cutoff, .. } => write!(f, "Custom({label}, cutoff={cutoff:?})"),
        }
    }
}

/// A map scaling the coefficient of `λ_s` by `symbol(|s|)`.
#[derive(Clone, Debug)]
pub struct RadialMultiplier {
    kind: MultiplierKind,
}

impl RadialMultiplier {
    pub fn phi(t: f64) -> Result<Self> {
        check_t(t)?;
        Ok(RadialMultiplier { kind: MultiplierKind::Phi { t } })
    }

    pub fn band(d: usize) -> Self {
        RadialMultiplier { kind: MultiplierKind::Band { d } }
    }

    pub fn phi_tm(t: f64, m: usize) -> Result<Self> {
        check_t(t)?;
        Ok(RadialMultiplier { kind: MultiplierKind::PhiTm { t, m } })
    }

    pub fn psi(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("block index k starts at 1"));
        }
        Ok(RadialMultiplier { kind: MultiplierKind::Psi { k } })
    }

    pub fn custom<F>(label: impl Into<String>, cutoff: Option<usize>, symbol: F) -> Self
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        RadialMultiplier {
            kind: MultiplierKind::Custom { label: label.into(), symbol: Arc::new(symbol), cutoff },
        }
    }

    /// `Φ_t − Φ_{t,m}`: symbol `e^{−td}` for `d > m`, else 0.
    pub fn phi_tail(t: f64, m: usize) -> Result<Self> {
        check_t(t)?;
        Ok(Self::custom(format!("phi_tail(t={t}, m={m})"), None, move |d| {
            if d > m {
                (-t * d as f64).exp()
            } else {
                0.0
            }
        }))
    }

    pub fn kind(&self) -> &MultiplierKind {
        &self.kind
    }

    /// Largest length with a possibly nonzero symbol, `None` if unbounded.
    pub fn cutoff(&self) -> Option<usize> {
        match &self.kind {
            MultiplierKind::Phi { .. } => None,
            MultiplierKind::Band { d } => Some(*d),
            MultiplierKind::PhiTm { m, .. } => Some(*m),
            MultiplierKind::Psi { k } => Some(*k),
            MultiplierKind::Custom { cutoff, .. } => *cutoff,
        }
    }

    pub fn symbol(&self, d: usize) -> f64 {
        match &self.kind {
            MultiplierKind::Phi { t } => (-t * d as f64).exp(),
            MultiplierKind::Band { d: d0 } => {
                if d == *d0 {
                    1.0
                } else {
                    0.0
                }
            }
            MultiplierKind::PhiTm { t, m } => {
                if d <= *m {
                    (-t * d as f64).exp()
                } else {
                    0.0
                }
            }
            MultiplierKind::Psi { k } => psi_symbol(*k, d),
            MultiplierKind::Custom { symbol, cutoff, .. } => match cutoff {
                Some(c) if d > *c => 0.0,
                _ => symbol(d),
            },
        }
    }

    pub fn apply(&self, x: &GroupAlgebraElement) -> GroupAlgebraElement {
        x.apply_map(self)
    }

    pub fn apply_matrix(&self, u: &MatrixLevelElement) -> MatrixLevelElement {
        u.apply_map(self)
    }
}

impl CoefficientMap for RadialMultiplier {
    fn weight(&self, w: &Word) -> f64 {
        self.symbol(w.len())
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("t must be positive and finite, got {t}")))
    }
}

/// `Φ_{1/√K,K}` symbol at length `d`: `e^{−d/√K}` for `d ≤ K`, else 0
/// (and identically 0 for `K = 0`).
pub fn schedule_symbol(k: usize, d: usize) -> f64 {
    if k == 0 || d > k {
        0.0
    } else {
        (-(d as f64) / (k as f64).sqrt()).exp()
    }
}

/// Coefficient of `Ψ_k` at length `d`.
pub fn psi_symbol(k: usize, d: usize) -> f64 {
    match k {
        0 => 0.0,
        1 => {
            if d <= 1 {
                (-(d as f64)).exp()
            } else {
                0.0
            }
        }
        _ if d < k => schedule_symbol(k, d) - schedule_symbol(k - 1, d),
        _ if d == k => schedule_symbol(k, d),
        _ => 0.0,
    }
}

/// `Σ_{k=1}^{K} psi_symbol(k, d)`, accumulated term by term.
pub fn telescope_check(big_k: usize, d: usize) -> f64 {
    (1..=big_k).map(|k| psi_symbol(k, d)).sum()
}

/// `Σ_{d=m+1}^∞ d·e^{−td} = x^{m+2}/(1−x)² + (m+1)x^{m+1}/(1−x)`, `x = e^{−t}`.
pub fn tail_sum_closed_form(t: f64, m: usize) -> Result<f64> {
    check_t(t)?;
    let x = (-t).exp();
    // 1 − e^{−t} without cancellation
    let one_minus_x = -(-t).exp_m1();
    let m = m as f64;
    let xm1 = (-t * (m + 1.0)).exp();
    Ok(xm1 * x / (one_minus_x * one_minus_x) + (m + 1.0) * xm1 / one_minus_x)
}

/// Upper bound `‖Φ_t − Φ_{t,m}‖_cb ≤ 2·Σ_{d>m} d·e^{−td}`.
pub fn cb_defect_upper(t: f64, m: usize) -> Result<f64> {
    Ok(2.0 * tail_sum_closed_form(t, m)?)
}

/// Upper bound on `‖Φ_{1/√k,k}‖_cb`: `1 + cb_defect_upper(1/√k, k)`, and 0 for
/// `k = 0` (the empty map).
pub fn schedule_cb_upper(k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let (t, m) = schedule(k);
    1.0 + cb_defect_upper(t, m).expect("schedule t is positive")
}

/// `1 + max_{1≤k≤k_max} cb_defect_upper(1/√k, k)`.
///
/// The defect peaks at k = 8 and decreases for k ≥ 9, so any `k_max ≥ 9`
/// already gives the supremum over all k.
pub fn schedule_sup_bound(k_max: usize) -> Result<f64> {
    if k_max == 0 {
        return Err(Error::input("k_max must be at least 1"));
    }
    Ok((1..=k_max).map(schedule_cb_upper).fold(f64::MIN, f64::max))
}

/// One row of the parameter table printed by the `params` subcommand.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ScheduleRow {
    pub k: usize,
    pub t: f64,
    pub m: usize,
    pub tail: f64,
    pub cb_defect: f64,
    pub cumulative_sup: f64,
}

pub fn schedule_table(k_max: usize) -> Vec<ScheduleRow> {
    let mut sup = f64::MIN;
    (1..=k_max)
        .map(|k| {
            let (t, m) = schedule(k);
            let tail = tail_sum_closed_form(t, m).expect("schedule t is positive");
            let cb_defect = 2.0 * tail;
            sup = sup.max(1.0 + cb_defect);
            ScheduleRow { k, t, m, tail, cb_defect, cumulative_sup: sup }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::C64;

    fn el(terms: &[(&str, f64)]) -> GroupAlgebraElement {
        GroupAlgebraElement::from_real_terms(terms.iter().copied()).unwrap()
    }

    /// Direct summation oracle for `Σ_{d>m} d e^{−td}`.
    fn tail_direct(t: f64, m: usize) -> f64 {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut d = m + 1;
        loop {
            let term = d as f64 * (-t * d as f64).exp();
            let y = term - comp;
            let s = sum + y;
            comp = (s - sum) - y;
            sum = s;
            if term < sum * 1e-20 || term == 0.0 {
                break;
            }
            d += 1;
        }
        sum
    }

    #[test]
    fn apply_examples() {
        let phi1 = RadialMultiplier::phi(1.0).unwrap();
        let y = phi1.apply(&el(&[("a", 1.0)]));
        assert_eq!(y, el(&[("a", (-1.0f64).exp())]));
        assert_eq!(RadialMultiplier::band(1).apply(&el(&[("e", 1.0), ("a", 2.0)])), el(&[("a", 2.0)]));
        assert!(RadialMultiplier::psi(2).unwrap().apply(&el(&[("e", 1.0)])).is_empty());
        assert!(RadialMultiplier::phi(0.0).is_err());
        assert!(RadialMultiplier::psi(0).is_err());
    }

    #[test]
    fn psi_symbol_examples() {
        assert_eq!(psi_symbol(1, 1), (-1.0f64).exp());
        assert_eq!(psi_symbol(1, 0), 1.0);
        assert!((psi_symbol(2, 2) - (-(2f64.sqrt())).exp()).abs() < 1e-16);
        assert_eq!(psi_symbol(3, 5), 0.0);
        for k in 2..20 {
            assert_eq!(psi_symbol(k, 0), 0.0);
            for d in 1..=k {
                assert!(psi_symbol(k, d) > 0.0 && psi_symbol(k, d) <= 1.0);
            }
        }
    }

    #[test]
    fn psi_matches_difference_of_truncations() {
        for k in 2..12 {
            let hi = RadialMultiplier::phi_tm(1.0 / (k as f64).sqrt(), k).unwrap();
            let lo = RadialMultiplier::phi_tm(1.0 / ((k - 1) as f64).sqrt(), k - 1).unwrap();
            for d in 0..15 {
                assert!((psi_symbol(k, d) - (hi.symbol(d) - lo.symbol(d))).abs() <= 1e-15);
            }
        }
        let psi1 = RadialMultiplier::psi(1).unwrap();
        let phi11 = RadialMultiplier::phi_tm(1.0, 1).unwrap();
        for d in 0..5 {
            assert_eq!(psi1.symbol(d), phi11.symbol(d));
        }
    }

    #[test]
    fn telescope_examples() {
        assert_eq!(telescope_check(1, 0), 1.0);
        assert!((telescope_check(5, 3) - (-3.0 / 5f64.sqrt()).exp()).abs() < 1e-15);
        assert_eq!(telescope_check(5, 6), 0.0);
        for big_k in 1..=30 {
            for d in 0..=30 {
                assert!((telescope_check(big_k, d) - schedule_symbol(big_k, d)).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn tail_examples() {
        assert!(tail_sum_closed_form(50.0, 1).unwrap() < 1e-20);
        let direct: f64 = (2..=200).map(|d| d as f64 * (-(d as f64)).exp()).sum();
        assert!((tail_sum_closed_form(1.0, 1).unwrap() - direct).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for m in 0..=50 {
            let v = tail_sum_closed_form(0.7, m).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(tail_sum_closed_form(-1.0, 1).is_err());
        assert!(tail_sum_closed_form(0.0, 1).is_err());
    }

    #[test]
    fn tail_matches_direct_summation_grid() {
        for t in [0.1, 0.5, 1.0, 2.0] {
            for m in 0..=50 {
                let closed = tail_sum_closed_form(t, m).unwrap();
                let direct = tail_direct(t, m);
                assert!(((closed - direct) / direct).abs() < 1e-12, "t={t} m={m}");
            }
        }
    }

    #[test]
    fn cb_defect_examples() {
        assert_eq!(cb_defect_upper(1.0, 3).unwrap(), 2.0 * tail_sum_closed_form(1.0, 3).unwrap());
        let mut prev = f64::INFINITY;
        for k in 10..200 {
            let (t, m) = schedule(k);
            let v = cb_defect_upper(t, m).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn schedule_sup_examples() {
        let b64 = schedule_sup_bound(64).unwrap();
        assert!(b64.is_finite() && b64 > 1.0);
        let b128 = schedule_sup_bound(128).unwrap();
        assert!((b128 - b64).abs() <= 1e-12);
        let oracle = (1..=64)
            .map(|k| 1.0 + 2.0 * tail_direct(1.0 / (k as f64).sqrt(), k))
            .fold(f64::MIN, f64::max);
        assert!(((oracle - b64) / b64).abs() < 1e-12);
        assert!(schedule_sup_bound(0).is_err());
    }

    #[test]
    fn positivity_and_unitality_surrogates() {
        for t in [0.01, 0.3, 1.0, 4.0] {
            let phi = RadialMultiplier::phi(t).unwrap();
            let e = el(&[("e", 1.0)]);
            assert_eq!(phi.apply(&e), e);
            let mut prev = 1.0;
            for d in 0..40 {
                let s = phi.symbol(d);
                assert!(s > 0.0 && s <= 1.0 && s <= prev);
                prev = s;
            }
        }
    }

    #[test]
    fn matrix_level_acts_entrywise() {
        let x = GroupAlgebraElement::from_terms([
            (Word::parse("ab").unwrap(), C64::new(1.0, 2.0)),
            (Word::identity(), C64::new(-1.0, 0.0)),
        ]);
        let m = RadialMultiplier::phi_tm(0.5, 1).unwrap();
        assert_eq!(m.apply_matrix(&x.to_matrix_level()).to_scalar().unwrap(), m.apply(&x));
    }

    #[test]
    fn schedule_table_is_cumulative() {
        let rows = schedule_table(20);
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[19].cumulative_sup, schedule_sup_bound(20).unwrap());
        assert!(rows.windows(2).all(|w| w[1].cumulative_sup >= w[0].cumulative_sup));
    }
}
