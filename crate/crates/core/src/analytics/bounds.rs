use crate::error::{Error, Result};
use crate::protocol::ForwardingScheme;
use crate::scalar::Scalar;
use crate::topology::DeploymentMode;

fn domain<T: Scalar>(what: &str, v: T) -> Error {
    Error::Domain(format!("{what} out of domain: {v:?}"))
}

fn check_prob<T: Scalar>(name: &str, p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(domain(name, p))
    }
}

/// `(p^2, p)`: no spreading protocol can push expected precision or recall
/// below these.
pub fn fundamental_bounds<T: Scalar>(p: T) -> Result<(T, T)> {
    check_prob("p", p)?;
    Ok((p * p, p))
}

/// Expected first-spy precision under one-to-one forwarding on a 4-regular
/// graph: `2p^2/(1-p) ln((1+p)/(2p))`. The limits are 0 at `p -> 0` and 1 at
/// `p -> 1`, but both endpoints are rejected.
pub fn oto_first_spy_precision<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain("p", p));
    }
    let two = T::lit(2.0);
    Ok(two * p * p / (T::one() - p) * ((T::one() + p) / (two * p)).ln())
}

/// Probability that a ward has exactly `w` members, given the exit edge
/// leads to a spy.
///
/// One-to-one: `(2p/(1-p)) ((1-p)/(1+p))^w`. All-to-one: the Catalan
/// weighted `C_w ((1-p)/2)^(w-1) ((1+p)/2)^(w+1)`, evaluated in logs.
pub fn ward_pmf<T: Scalar>(scheme: ForwardingScheme, w: usize, p: T) -> Result<T> {
    if w < 1 {
        return Err(Error::invalid("ward size must be >= 1"));
    }
    let one = T::one();
    let two = T::lit(2.0);
    match scheme {
        ForwardingScheme::OneToOne => {
            if !(p > T::zero() && p < one) {
                return Err(domain("p", p));
            }
            Ok(two * p / (one - p) * ((one - p) / (one + p)).powi(w as i32))
        }
        ForwardingScheme::AllToOne => {
            if !(p >= T::zero() && p < one) {
                return Err(domain("p", p));
            }
            // ln C_w = sum_{k=2..w} ln((w+k)/k)
            let ln_catalan = (2..=w).fold(T::zero(), |acc, k| acc + (T::from_count(w + k) / T::from_count(k)).ln());
            let a = (one - p) / two;
            let b = (one + p) / two;
            let ln_a = if w == 1 { T::zero() } else { T::from_count(w - 1) * a.ln() };
            Ok((ln_catalan + ln_a + T::from_count(w + 1) * b.ln()).exp())
        }
        other => Err(Error::invalid(format!("no ward distribution for {}", other.label()))),
    }
}

/// Leading-order first-spy precision bounds under all-to-one forwarding:
/// `(p/4, e^2/(2 pi) p)`.
pub fn ato_precision_bounds<T: Scalar>(p: T) -> Result<(T, T)> {
    check_prob("p", p)?;
    let e2 = T::E() * T::E();
    Ok((p / T::lit(4.0), e2 / (T::lit(2.0) * T::PI()) * p))
}

/// A bound that denotes a probability: the clamped value with the raw one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped<T> {
    pub value: T,
    pub raw: T,
}

impl<T: Scalar> Clamped<T> {
    pub fn new(raw: T) -> Self {
        Clamped { value: raw.max(T::zero()).min(T::one()), raw }
    }
}

/// Matching-estimator precision on a 4-regular graph:
/// `(p + p^2 - 2p^3)/(1 - p^2)` and twice that.
pub fn matching_precision_bounds<T: Scalar>(p: T) -> Result<(T, Clamped<T>)> {
    if !(p >= T::zero() && p < T::one()) {
        return Err(domain("p", p));
    }
    let lower = (p + p * p - T::lit(2.0) * p * p * p) / (T::one() - p * p);
    Ok((lower, Clamped::new(T::lit(2.0) * lower)))
}

/// Checks `d_opt <= 8 d_fs + 6 p^2 + slack`; returns the verdict and the
/// margin (positive when satisfied).
pub fn theorem1_check<T: Scalar>(d_opt: T, d_fs: T, p: T, slack: T) -> (bool, T) {
    let margin = T::lit(8.0) * d_fs + T::lit(6.0) * p * p + slack - d_opt;
    (margin >= T::zero(), margin)
}

/// Smallest embargo mean keeping `k` hops free of timer-triggered
/// diffusion with probability `1 - eps`: `-k(k-1) delta / (2 ln(1 - eps))`.
pub fn timer_threshold<T: Scalar>(k: usize, delta_hop: T, eps: T) -> Result<T> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(domain("epsilon", eps));
    }
    if !(delta_hop > T::zero()) {
        return Err(domain("delta_hop", delta_hop));
    }
    let k_t = T::from_count(k);
    Ok(-(k_t * (k_t - T::one()) * delta_hop) / (T::lit(2.0) * (T::one() - eps).ln()))
}

/// Mean extra delay after a black hole at hop `k`: `T_base / k`. The
/// standard deviation equals the mean.
pub fn expected_extra_delay<T: Scalar>(t_base: T, k: usize) -> Result<T> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    Ok(t_base / T::from_count(k))
}

/// Recall bounds under partial deployment together with their ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialDeploymentBounds<T> {
    /// Fraction of all nodes running the protocol.
    pub f: T,
    pub phi: T,
    pub zeta: T,
    pub c: T,
    pub lower: T,
    /// Upper bound as stated in closed form.
    pub upper: Clamped<T>,
    /// Finite-`n` upper bound.
    pub upper_finite: Clamped<T>,
    /// `n -> infinity` limit of the finite-`n` bound.
    pub upper_asymptotic: Clamped<T>,
}

/// Expected-recall bounds for `n` nodes on an approximately `2 eta`-regular
/// P2P graph with spy fraction `p` and honest support fraction `beta`.
pub fn partial_deployment_recall_bounds<T: Scalar>(
    n: usize,
    p: T,
    beta: T,
    q: T,
    eta: usize,
    mode: DeploymentMode,
) -> Result<PartialDeploymentBounds<T>> {
    check_prob("p", p)?;
    check_prob("beta", beta)?;
    check_prob("q", q)?;
    if eta < 1 || n <= eta + 1 {
        return Err(Error::invalid(format!("need n > eta + 1 and eta >= 1 (n={n}, eta={eta})")));
    }
    let one = T::one();
    let n_t = T::from_count(n);
    let eta_i = eta as i32;
    let f = p + (one - p) * beta;
    if f <= T::zero() {
        return Err(Error::domain("no node runs the protocol (f = 0)"));
    }
    let phi = one - (one - one / T::from_count(n - eta)).powi(eta_i);
    let n_h = (one - p) * n_t;
    let zeta = if n_h > T::zero() { (one - (one - phi).powf(n_h)) / (n_h * phi) } else { T::zero() };
    let miss = (one - f).powi(eta_i);
    let c = (one - p / f) * (one - miss) * zeta;
    let b = match mode {
        DeploymentMode::VersionChecking => {
            let lower = p / f * (one - miss);
            let upper = lower + miss + c * (one - beta);
            let fin_reach = one - (one - f * n_t / T::from_count(n - eta)).powi(eta_i);
            let upper_finite = fin_reach * (p * n_t / (f * n_t - one) + (one - p / f) * q * zeta) + miss;
            let upper_asym = (one - miss) * (p / f + (one - p / f) * q * zeta) + miss;
            PartialDeploymentBounds {
                f,
                phi,
                zeta,
                c,
                lower,
                upper: Clamped::new(upper),
                upper_finite: Clamped::new(upper_finite),
                upper_asymptotic: Clamped::new(upper_asym),
            }
        }
        DeploymentMode::NoVersionChecking => {
            let k = one - beta * (one - q);
            let upper_asym = p + k * (one - p) * zeta;
            let upper_finite = p * n_t / (n_t - one) + (one - p) * n_t / (n_t - one) * zeta * k * n_h / (n_h - one);
            PartialDeploymentBounds {
                f,
                phi,
                zeta,
                c,
                lower: p,
                upper: Clamped::new(upper_asym),
                upper_finite: Clamped::new(upper_finite),
                upper_asymptotic: Clamped::new(upper_asym),
            }
        }
    };
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from_seed;
    use approx::assert_relative_eq;
    use rand_distr::{Binomial, Distribution};

    #[test]
    fn fundamental_values() {
        assert_eq!(fundamental_bounds(0.0f64).unwrap(), (0.0, 0.0));
        assert_eq!(fundamental_bounds(1.0f64).unwrap(), (1.0, 1.0));
        let (a, b) = fundamental_bounds(0.2f64).unwrap();
        assert_relative_eq!(a, 0.04, epsilon = 1e-15);
        assert_eq!(b, 0.2);
        assert!(fundamental_bounds(1.5f64).is_err());
    }

    #[test]
    fn oto_closed_form() {
        // 2(0.04)/0.8 * ln(1.2/0.4) = 0.1 ln 3
        assert_relative_eq!(oto_first_spy_precision(0.2f64).unwrap(), 0.1 * 3f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(oto_first_spy_precision(0.2f32).unwrap(), 0.109_861_23, epsilon = 1e-6);
        assert!(oto_first_spy_precision(1e-6f64).unwrap() < 1e-9);
        assert!((oto_first_spy_precision(1.0f64 - 1e-6).unwrap() - 1.0).abs() < 1e-5);
        assert!(oto_first_spy_precision(0.0f64).is_err());
        assert!(oto_first_spy_precision(1.0f64).is_err());
    }

    #[test]
    fn oto_matches_series_of_ward_pmf() {
        // E[1/W] p summed from the pmf
        for p in [0.1f64, 0.3, 0.6] {
            let s: f64 = (1..5000).map(|w| ward_pmf(ForwardingScheme::OneToOne, w, p).unwrap() / w as f64).sum();
            assert_relative_eq!(p * s, oto_first_spy_precision(p).unwrap(), epsilon = 1e-10);
        }
    }

    #[test]
    fn ward_pmf_values() {
        assert_relative_eq!(ward_pmf(ForwardingScheme::OneToOne, 1, 1.0f64 / 3.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(ward_pmf(ForwardingScheme::AllToOne, 1, 0.0f64).unwrap(), 0.25, epsilon = 1e-12);
        assert_relative_eq!(ward_pmf(ForwardingScheme::AllToOne, 2, 0.0f64).unwrap(), 0.125, epsilon = 1e-12);
        // C_3 = 5
        let p = 0.3f64;
        let direct = 5.0 * (0.35f64).powi(2) * (0.65f64).powi(4);
        assert_relative_eq!(ward_pmf(ForwardingScheme::AllToOne, 3, p).unwrap(), direct, epsilon = 1e-12);
        assert!(ward_pmf(ForwardingScheme::OneToOne, 0, 0.3f64).is_err());
        assert!(ward_pmf(ForwardingScheme::PerTransaction, 1, 0.3f64).is_err());
    }

    #[test]
    fn ward_pmf_normalized() {
        for scheme in [ForwardingScheme::OneToOne, ForwardingScheme::AllToOne] {
            for p in [0.1f64, 0.3, 0.5, 0.9] {
                let mut total = 0.0;
                let mut w = 1;
                loop {
                    let x = ward_pmf(scheme, w, p).unwrap();
                    total += x;
                    if x < 1e-16 && w > 10 {
                        break;
                    }
                    w += 1;
                }
                assert!((total - 1.0).abs() < 1e-9, "{scheme:?} p={p}: {total}");
            }
        }
        // huge w stays finite in logs
        assert!(ward_pmf(ForwardingScheme::AllToOne, 5000, 0.01f64).unwrap().is_finite());
    }

    #[test]
    fn ato_bounds() {
        assert_eq!(ato_precision_bounds(0.0f64).unwrap(), (0.0, 0.0));
        let (lo, hi) = ato_precision_bounds(0.2f64).unwrap();
        assert_relative_eq!(lo, 0.05, epsilon = 1e-15);
        assert!((hi - 0.23522).abs() < 1e-4);
        for i in 0..=100 {
            let p = i as f64 / 100.0;
            let (lo, hi) = ato_precision_bounds(p).unwrap();
            assert!(lo <= hi);
        }
    }

    #[test]
    fn matching_bounds() {
        let (lo, hi) = matching_precision_bounds(0.0f64).unwrap();
        assert_eq!((lo, hi.raw), (0.0, 0.0));
        let (lo, hi) = matching_precision_bounds(0.5f64).unwrap();
        assert_relative_eq!(lo, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(hi.raw, 4.0 / 3.0, epsilon = 1e-12);
        assert_eq!(hi.value, 1.0);
        for i in 0..99 {
            let p = i as f32 / 100.0;
            let (lo, hi) = matching_precision_bounds(p).unwrap();
            assert_eq!(hi.raw, 2.0 * lo);
        }
        assert!(matching_precision_bounds(1.0f64).is_err());
    }

    #[test]
    fn optimal_vs_first_spy_inequality() {
        for p in [0.0f64, 0.3, 0.9] {
            assert!(theorem1_check(0.2, 0.2, p, 0.0).0);
        }
        let (ok, margin) = theorem1_check(0.05f64, 0.01, 0.0, 0.0);
        assert!(ok);
        assert_relative_eq!(margin, 0.03, epsilon = 1e-12);
    }

    #[test]
    fn timers() {
        assert_eq!(timer_threshold(1, 0.3f64, 0.1).unwrap(), 0.0);
        let t = timer_threshold(10, 0.3f64, 0.1).unwrap();
        assert!((t - 128.1).abs() < 0.05, "{t}");
        let t5 = timer_threshold(10, 0.3f64, 0.05).unwrap();
        assert!((t5 - 263.2).abs() < 0.05, "{t5}");
        assert!(timer_threshold(11, 0.3f64, 0.1).unwrap() > t);
        assert!(t5 > t);
        assert!(timer_threshold(10, 0.3f64, 0.0).is_err());
        assert!(timer_threshold(10, 0.3f64, 1.0).is_err());
        assert!((timer_threshold(10, 0.3f32, 0.1).unwrap() - 128.1).abs() < 0.05);
        assert_eq!(expected_extra_delay(128.1f64, 1).unwrap(), 128.1);
        assert_relative_eq!(expected_extra_delay(128.1f64, 10).unwrap(), 12.81, epsilon = 1e-12);
    }

    #[test]
    fn extra_delay_matches_min_of_exponentials() {
        use rand_distr::Exp;
        let mut rng = rng_from_seed(11);
        let (t_base, k) = (128.1, 10);
        let exp = Exp::new(1.0 / t_base).unwrap();
        let xs: Vec<f64> = (0..50_000).map(|_| (0..k).map(|_| exp.sample(&mut rng)).fold(f64::INFINITY, f64::min)).collect();
        let m = crate::stats::mean(&xs);
        assert!((m - expected_extra_delay(t_base, k).unwrap()).abs() < 3.0 * crate::stats::std_err(&xs));
    }

    #[test]
    fn partial_full_deployment() {
        let b = partial_deployment_recall_bounds(1000, 0.2f64, 1.0, 0.2, 8, DeploymentMode::VersionChecking).unwrap();
        assert_eq!(b.f, 1.0);
        assert_relative_eq!(b.lower, 0.2, epsilon = 1e-12);
        let nv = partial_deployment_recall_bounds(1000, 0.2f64, 0.3, 0.2, 8, DeploymentMode::NoVersionChecking).unwrap();
        assert_eq!(nv.lower, 0.2);
        assert!(partial_deployment_recall_bounds(1000, 0.0f64, 0.0, 0.2, 8, DeploymentMode::VersionChecking).is_err());
    }

    #[test]
    fn partial_upper_near_one_for_small_beta() {
        let b = partial_deployment_recall_bounds(1000, 0.2f64, 0.0, 0.2, 8, DeploymentMode::VersionChecking).unwrap();
        assert!(b.upper.value > 0.9);
    }

    #[test]
    fn zeta_matches_binomial_sampling() {
        let (n, p, eta) = (1000usize, 0.2f64, 8usize);
        let b = partial_deployment_recall_bounds(n, p, 0.5, 0.2, eta, DeploymentMode::VersionChecking).unwrap();
        let n_h = ((1.0 - p) * n as f64) as u64;
        let bin = Binomial::new(n_h - 1, b.phi).unwrap();
        let mut rng = rng_from_seed(5);
        let xs: Vec<f64> = (0..100_000).map(|_| 1.0 / (bin.sample(&mut rng) as f64 + 1.0)).collect();
        let m = crate::stats::mean(&xs);
        assert!((m - b.zeta).abs() < 3.0 * crate::stats::std_err(&xs), "{m} vs {}", b.zeta);
    }

    #[test]
    fn lower_below_upper_on_grid() {
        let grid: Vec<f64> = (1..=19).map(|i| i as f64 * 0.05).collect();
        for n in [500usize, 1000] {
            for &p in &grid {
                for &q in &grid {
                    for &beta in &grid {
                        for mode in [DeploymentMode::VersionChecking, DeploymentMode::NoVersionChecking] {
                            let b = partial_deployment_recall_bounds(n, p, beta, q, 8, mode).unwrap();
                            assert!(b.lower <= b.upper.raw + 1e-12, "{mode:?} n={n} p={p} q={q} beta={beta}");
                            assert!(b.lower <= b.upper_finite.raw + 1e-12);
                            assert!(b.lower <= b.upper_asymptotic.raw + 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn finite_converges_to_asymptotic() {
        for mode in [DeploymentMode::VersionChecking, DeploymentMode::NoVersionChecking] {
            let b = partial_deployment_recall_bounds(10_000_000, 0.2f64, 0.4, 0.2, 8, mode).unwrap();
            assert!((b.upper_finite.raw - b.upper_asymptotic.raw).abs() < 1e-4);
        }
    }
}
