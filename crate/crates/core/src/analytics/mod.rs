//! Precision/recall scoring and the closed-form anonymity bounds, generic
//! over the floating point type.

mod bounds;
mod metrics;
mod ward;

pub use bounds::{
    ato_precision_bounds, expected_extra_delay, fundamental_bounds, matching_precision_bounds,
    oto_first_spy_precision, partial_deployment_recall_bounds, theorem1_check, timer_threshold, ward_pmf, Clamped,
    PartialDeploymentBounds,
};
pub use metrics::{precision_recall, PrecisionRecallReport};
pub use ward::simulate_ward_size;

use crate::error::Result;
use crate::scalar::Scalar;
use crate::topology::DeploymentMode;

/// Parameters echoed alongside a [`BoundsReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsParams {
    pub n: usize,
    pub eta: usize,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub k: usize,
    pub epsilon: f64,
    pub delta_hop: f64,
}

impl Default for BoundsParams {
    fn default() -> Self {
        BoundsParams { n: 1000, eta: 8, p: 0.2, q: 0.2, beta: 0.5, k: 10, epsilon: 0.1, delta_hop: 0.3 }
    }
}

/// One named bound; `raw` differs from `value` only when clamping applied.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEntry<T> {
    pub name: String,
    pub value: T,
    pub raw: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport<T> {
    pub params: BoundsParams,
    pub t_base: T,
    pub entries: Vec<BoundEntry<T>>,
}

impl<T: Scalar> BoundsReport<T> {
    pub fn get(&self, name: &str) -> Option<T> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

/// Evaluates every closed form that is defined at `params`. Forms whose
/// domain excludes the parameters are left out.
pub fn bounds_report<T: Scalar>(params: &BoundsParams) -> Result<BoundsReport<T>> {
    let p = T::lit(params.p);
    let q = T::lit(params.q);
    let beta = T::lit(params.beta);
    let mut entries = Vec::new();
    let mut push = |name: &str, value: T, raw: T| entries.push(BoundEntry { name: name.to_string(), value, raw });

    let (pf, rf) = fundamental_bounds(p)?;
    push("precision_floor", pf, pf);
    push("recall_floor", rf, rf);
    if let Ok(d) = oto_first_spy_precision(p) {
        push("oto_first_spy_precision", d, d);
    }
    let (lo, hi) = ato_precision_bounds(p)?;
    push("ato_precision_lower", lo, lo);
    push("ato_precision_upper", hi, hi);
    if let Ok((lo, hi)) = matching_precision_bounds(p) {
        push("matching_precision_lower", lo, lo);
        push("matching_precision_upper", hi.value, hi.raw);
    }
    let t_base = timer_threshold(params.k, T::lit(params.delta_hop), T::lit(params.epsilon))?;
    push("timer_threshold", t_base, t_base);
    let extra = expected_extra_delay(t_base, params.k)?;
    push("expected_extra_delay", extra, extra);
    for mode in [DeploymentMode::VersionChecking, DeploymentMode::NoVersionChecking] {
        if let Ok(b) = partial_deployment_recall_bounds(params.n, p, beta, q, params.eta, mode) {
            let tag = match mode {
                DeploymentMode::VersionChecking => "vc",
                DeploymentMode::NoVersionChecking => "nvc",
            };
            push(&format!("{tag}_recall_lower"), b.lower, b.lower);
            push(&format!("{tag}_recall_upper"), b.upper.value, b.upper.raw);
            push(&format!("{tag}_recall_upper_finite"), b.upper_finite.value, b.upper_finite.raw);
            push(&format!("{tag}_recall_upper_asymptotic"), b.upper_asymptotic.value, b.upper_asymptotic.raw);
            if mode == DeploymentMode::VersionChecking {
                push("f", b.f, b.f);
                push("phi", b.phi, b.phi);
                push("zeta", b.zeta, b.zeta);
                push("C", b.c, b.c);
            }
        }
    }
    Ok(BoundsReport { params: *params, t_base, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_has_core_entries_in_both_precisions() {
        let r64: BoundsReport<f64> = bounds_report(&BoundsParams::default()).unwrap();
        let r32: BoundsReport<f32> = bounds_report(&BoundsParams::default()).unwrap();
        for name in ["precision_floor", "oto_first_spy_precision", "timer_threshold", "vc_recall_upper_finite", "zeta"] {
            let a = r64.get(name).unwrap();
            let b = r32.get(name).unwrap() as f64;
            assert!((a - b).abs() < 1e-4 * a.abs().max(1.0), "{name}: {a} vs {b}");
        }
        assert!((r64.t_base - 128.1).abs() < 0.05);
    }

    #[test]
    fn clamped_entries_keep_raw() {
        let params = BoundsParams { p: 0.5, ..BoundsParams::default() };
        let r: BoundsReport<f64> = bounds_report(&params).unwrap();
        let e = r.entries.iter().find(|e| e.name == "matching_precision_upper").unwrap();
        assert_eq!(e.value, 1.0);
        assert!((e.raw - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_forms_omitted() {
        let params = BoundsParams { p: 0.0, ..BoundsParams::default() };
        let r: BoundsReport<f64> = bounds_report(&params).unwrap();
        assert!(r.get("oto_first_spy_precision").is_none());
        assert_eq!(r.get("precision_floor"), Some(0.0));
    }
}
