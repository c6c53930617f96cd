//! Beam-wandering fading: the deflection law, the instantaneous
//! transmissivity τ(q), its induced distribution P(τ) and expectations.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam::tau_diffraction;
use crate::error::{Error, Result};
use crate::numerics::{
    bessel_i_scaled, gauss_legendre, integrate_breaks, integrate_to_infinity, one_minus_scaled_i0,
    scaled_i0_excess, BesselOrder, QuadratureSpec,
};

/// Deflections beyond `σ·Q_TAIL` carry less than 1e-17 of the Rayleigh mass.
const Q_TAIL: f64 = 8.876_539_060_299_78; // √(2 ln 1e17)

/// Λ_n(x) = e^(−2x) I_n(2x).
pub fn lambda_n(order: BesselOrder, x: f64) -> f64 {
    bessel_i_scaled(order, 2.0 * x)
}

/// Points on `[0, upper]` around the Gaussian bump of the scaled Weber
/// integrand, centred at `2x` with spread `√(2x)`.
fn weber_points(x: f64, upper: f64) -> Vec<f64> {
    let centre = 2.0 * x;
    let spread = (2.0 * x).sqrt();
    let mut points = vec![0.0, upper];
    for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
        let p = centre + k * spread;
        if p > 0.0 && p < upper {
            points.push(p);
        }
    }
    points.sort_by(f64::total_cmp);
    points
}

/// e^(−2x) Q0(x, y), the form that stays finite for every x.
fn weber_q0_scaled(x: f64, y: f64) -> Result<f64> {
    if y <= 0.0 {
        return Ok(0.0);
    }
    // Beyond 2x + 12√(2x) the Gaussian factor is below e^(−72).
    let cut = 2.0 * x + 12.0 * (2.0 * x).sqrt();
    let upper = y.min(cut);
    let inv4x = 0.25 / x;
    let integrand = |t: f64| {
        let d = t - 2.0 * x;
        t * (-d * d * inv4x).exp() * bessel_i_scaled(BesselOrder::Zero, t)
    };
    let spec = QuadratureSpec {
        rel_tol: 1e-11,
        abs_tol: 1e-300,
        ..QuadratureSpec::default()
    };
    let est = integrate_breaks(integrand, &weber_points(x, upper), spec)?;
    Ok(est.value / (2.0 * x))
}

/// Incomplete Weber integral Q0(x, y) = e^x/(2x) ∫₀^y t e^(−t²/4x) I0(t) dt.
/// `y` may be infinite.
pub fn weber_q0(x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0) || !(y >= 0.0) {
        return Err(Error::domain(format!(
            "weber_q0 needs x > 0 and y >= 0, got ({x}, {y})"
        )));
    }
    Ok(weber_q0_scaled(x, y)? * (2.0 * x).exp())
}

/// Fraction of a Gaussian beam of waist `w` collected by an aperture of
/// radius `aperture` when the beam centre is displaced by `q`.
pub fn tau_st_of_q(q: f64, w: f64, aperture: f64) -> Result<f64> {
    if !(q >= 0.0) || !(w > 0.0) || !(aperture > 0.0) {
        return Err(Error::domain(
            "tau_st_of_q needs q >= 0 and positive waist and aperture",
        ));
    }
    let x = 2.0 * (q / w) * (q / w);
    if x < 1e-14 {
        return Ok(tau_diffraction(w, aperture));
    }
    if q.is_infinite() {
        return Ok(0.0);
    }
    weber_q0_scaled(x, 4.0 * q * aperture / (w * w))
}

/// Weibull-shaped fading law τ(q) = τ_max e^(−(q/q0)^γ) with Rayleigh
/// deflections of scale σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub tau_max: f64,
    pub gamma: f64,
    pub q0: f64,
    pub sigma: f64,
    /// Centred short-term diffraction transmissivity.
    pub tau_st: f64,
    /// 2a_R²/ϖ_st².
    pub tau_st_far: f64,
}

/// Fit the Weibull shape to a beam of short-term waist `w_st` on an
/// aperture `aperture`.
pub fn fit_fading_params(
    w_st: f64,
    aperture: f64,
    tau_atm: f64,
    tau_eff: f64,
    sigma: f64,
) -> Result<FadingParams> {
    if !(w_st > 0.0 && aperture > 0.0) {
        return Err(Error::domain(
            "fading fit needs positive waist and aperture",
        ));
    }
    if !(tau_atm > 0.0 && tau_atm <= 1.0 && tau_eff > 0.0 && tau_eff <= 1.0) {
        return Err(Error::domain("transmissivities must lie in (0, 1]"));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::domain(
            "wandering scale must be finite and non-negative",
        ));
    }
    let far = 2.0 * (aperture / w_st) * (aperture / w_st);
    let tau_st = tau_diffraction(w_st, aperture);
    let one_minus_l0 = one_minus_scaled_i0(2.0 * far);
    if !(one_minus_l0 > 0.0) || !(tau_st > 0.0) {
        return Err(Error::Degenerate(format!(
            "aperture collects nothing: 2a²/w² = {far:e}"
        )));
    }
    let l1 = lambda_n(BesselOrder::One, far);
    // 2τ_st − (1 − Λ0) = τ_st² + e^(−2x)(I0(2x) − 1), free of cancellation.
    let excess = tau_st * tau_st + scaled_i0_excess(2.0 * far);
    let log_term = (excess / one_minus_l0).ln_1p();
    if !(log_term > 0.0) {
        return Err(Error::Degenerate(format!(
            "shape logarithm vanished at 2a²/w² = {far:e}"
        )));
    }
    let gamma = 4.0 * far * l1 / one_minus_l0 / log_term;
    let q0 = aperture * log_term.powf(-1.0 / gamma);
    if !(gamma.is_finite() && gamma > 0.0 && q0.is_finite() && q0 > 0.0) {
        return Err(Error::Degenerate(format!(
            "non-finite shape: gamma={gamma}, q0={q0}"
        )));
    }
    Ok(FadingParams {
        tau_max: tau_st * tau_atm * tau_eff,
        gamma,
        q0,
        sigma,
        tau_st,
        tau_st_far: far,
    })
}

/// Tolerances for the expectation integrals.
fn expect_spec() -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: 1e-10,
        abs_tol: 1e-15,
        ..QuadratureSpec::default()
    }
}

impl FadingParams {
    /// A channel with fixed transmissivity `tau`.
    pub fn deterministic(tau: f64) -> Self {
        Self {
            tau_max: tau,
            gamma: 2.0,
            q0: 1.0,
            sigma: 0.0,
            tau_st: tau,
            tau_st_far: f64::INFINITY,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.sigma == 0.0
    }

    /// Same fading shape with the peak transmissivity scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            tau_max: self.tau_max * factor,
            ..*self
        }
    }

    pub fn tau_of_q(&self, q: f64) -> f64 {
        self.tau_max * (-(q / self.q0).powf(self.gamma)).exp()
    }

    /// Deflection at which the transmissivity equals `tau`.
    pub fn q_of_tau(&self, tau: f64) -> f64 {
        self.q0 * (self.tau_max / tau).ln().powf(1.0 / self.gamma)
    }

    /// Density of τ on `(0, τ_max]`.
    pub fn p_of_tau(&self, tau: f64) -> f64 {
        if !(tau > 0.0 && tau <= self.tau_max) || self.sigma == 0.0 {
            return 0.0;
        }
        let s = (self.tau_max / tau).ln();
        self.density_in_log(s) / tau
    }

    /// Density of s = ln(τ_max/τ).
    fn density_in_log(&self, s: f64) -> f64 {
        let a = self.q0 * self.q0 / (self.sigma * self.sigma);
        let p = 2.0 / self.gamma;
        a / self.gamma * s.powf(p - 1.0) * (-0.5 * a * s.powf(p)).exp()
    }

    /// P(τ' ≤ τ).
    pub fn cdf_tau(&self, tau: f64) -> f64 {
        if tau >= self.tau_max {
            return 1.0;
        }
        if tau <= 0.0 {
            return 0.0;
        }
        if self.sigma == 0.0 {
            return 0.0;
        }
        let q = self.q_of_tau(tau);
        (-0.5 * (q / self.sigma) * (q / self.sigma)).exp()
    }

    fn q_points(&self) -> Vec<f64> {
        let upper = self.sigma * Q_TAIL;
        let mut points = vec![0.0, upper];
        for k in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
            for base in [self.q0, self.sigma] {
                let p = k * base;
                if p > 0.0 && p < upper {
                    points.push(p);
                }
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    /// E[f(τ)] over the Rayleigh deflection law, integrated in q.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        if self.is_deterministic() {
            return Ok(f(self.tau_max));
        }
        let s2 = self.sigma * self.sigma;
        let integrand = |q: f64| q / s2 * (-0.5 * q * q / s2).exp() * f(self.tau_of_q(q));
        Ok(integrate_breaks(integrand, &self.q_points(), expect_spec())?.value)
    }

    /// E[f(τ)] integrated against P(τ) in the variable s = ln(τ_max/τ).
    pub fn expect_tau_space<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        if self.is_deterministic() {
            return Ok(f(self.tau_max));
        }
        let integrand = |s: f64| {
            if s <= 0.0 {
                return 0.0;
            }
            self.density_in_log(s) * f(self.tau_max * (-s).exp())
        };
        // Natural scale of s: where q0² s^(2/γ) / (2σ²) = 1.
        let scale = (2.0 * self.sigma * self.sigma / (self.q0 * self.q0)).powf(self.gamma / 2.0);
        let mut points = vec![0.0];
        points.extend([1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0].iter().map(|k| k * scale));
        let head = integrate_breaks(integrand, &points, expect_spec())?;
        let tail = integrate_to_infinity(integrand, scale, scale, expect_spec())?;
        Ok(head.value + tail.value)
    }

    /// (⟨τ⟩, ⟨√τ⟩).
    pub fn moments(&self) -> Result<(f64, f64)> {
        Ok((self.expect(|t| t)?, self.expect(f64::sqrt)?))
    }

    /// Deflection for a uniform variate `u ∈ [0, 1)` by inverting the
    /// Rayleigh CDF.
    pub fn q_from_uniform(&self, u: f64) -> f64 {
        self.sigma * (-2.0 * (-u).ln_1p()).sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.tau_of_q(self.q_from_uniform(u))
    }
}

/// `n` transmissivity draws from a ChaCha stream seeded with `seed`.
pub fn sample_tau(params: &FadingParams, seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| params.sample(&mut rng)).collect()
}

/// Monte Carlo (⟨τ⟩, ⟨√τ⟩) from `n` stratified draws: one jittered
/// uniform per stratum `[i/n, (i+1)/n)`.
pub fn stratified_moments(params: &FadingParams, seed: u64, n: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut t1, mut t2) = (0.0, 0.0);
    for i in 0..n {
        let u = (i as f64 + rng.random::<f64>()) / n as f64;
        let tau = params.tau_of_q(params.q_from_uniform(u.min(1.0 - f64::EPSILON)));
        t1 += tau;
        t2 += tau.sqrt();
    }
    (t1 / n as f64, t2 / n as f64)
}

/// Outcome of a two-dimensional fading average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Average2 {
    pub value: f64,
    /// The tensor Gauss-Legendre rule did not settle and nested adaptive
    /// quadrature was used instead.
    pub fallback: bool,
}

fn tensor_average<F: Fn(f64, f64) -> f64>(
    a: &FadingParams,
    b: &FadingParams,
    f: &F,
    n: usize,
) -> f64 {
    let rule = gauss_legendre(n);
    let ta: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&u| a.tau_of_q(a.q_from_uniform(u)))
        .collect();
    let tb: Vec<f64> = rule
        .nodes
        .iter()
        .map(|&u| b.tau_of_q(b.q_from_uniform(u)))
        .collect();
    let mut total = 0.0;
    for (i, wa) in rule.weights.iter().enumerate() {
        let mut row = 0.0;
        for (j, wb) in rule.weights.iter().enumerate() {
            row += wb * f(ta[i], tb[j]);
        }
        total += wa * row;
    }
    total
}

/// E[f(τ_a, τ_b)] for independent fading on two links.
pub fn expect2<F: Fn(f64, f64) -> f64>(
    a: &FadingParams,
    b: &FadingParams,
    f: F,
) -> Result<Average2> {
    match (a.is_deterministic(), b.is_deterministic()) {
        (true, true) => {
            return Ok(Average2 {
                value: f(a.tau_max, b.tau_max),
                fallback: false,
            })
        }
        (true, false) => {
            return Ok(Average2 {
                value: b.expect(|t| f(a.tau_max, t))?,
                fallback: false,
            })
        }
        (false, true) => {
            return Ok(Average2 {
                value: a.expect(|t| f(t, b.tau_max))?,
                fallback: false,
            })
        }
        (false, false) => {}
    }
    let coarse = tensor_average(a, b, &f, 64);
    let fine = tensor_average(a, b, &f, 128);
    if (coarse - fine).abs() <= 1e-6 * fine.abs().max(1e-300) {
        return Ok(Average2 {
            value: fine,
            fallback: false,
        });
    }
    let err = RefCell::new(None);
    let value = a.expect(|ta| match b.expect(|tb| f(ta, tb)) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(Average2 {
        value: value?,
        fallback: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn typical() -> FadingParams {
        fit_fading_params(0.6, 0.4, 0.95, 1.0, 0.3).unwrap()
    }

    #[test]
    fn lambda_values() {
        assert_eq!(lambda_n(BesselOrder::Zero, 0.0), 1.0);
        assert_eq!(lambda_n(BesselOrder::One, 0.0), 0.0);
        let l = lambda_n(BesselOrder::Zero, 100.0);
        assert_relative_eq!(l, 0.028227160, max_relative = 1e-7);
        assert_relative_eq!(
            l,
            1.0 / (400.0 * std::f64::consts::PI).sqrt(),
            max_relative = 5e-3
        );
        assert!(lambda_n(BesselOrder::Zero, 1e6).is_finite());
    }

    #[test]
    fn weber_reference_values() {
        assert_eq!(weber_q0(1.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            weber_q0(1.0, f64::INFINITY).unwrap(),
            1f64.exp().powi(2),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            weber_q0(2.0, 1.0).unwrap(),
            0.97897937479888059,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            weber_q0(0.5, 3.0).unwrap(),
            2.5994494973034078,
            max_relative = 1e-9
        );
        for x in [0.1, 0.5, 1.0, 3.0, 7.0, 10.0] {
            assert_relative_eq!(
                weber_q0(x, f64::INFINITY).unwrap(),
                (2.0 * x).exp(),
                max_relative = 1e-8
            );
        }
    }

    #[test]
    fn weber_against_simpson_oracle() {
        // Independent fixed-step Simpson rule on the unscaled integrand with
        // a series Bessel evaluation.
        fn i0(t: f64) -> f64 {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..200 {
                term *= (t / 2.0) * (t / 2.0) / (k as f64 * k as f64);
                sum += term;
            }
            sum
        }
        let (x, y) = (2.0f64, 1.0f64);
        let n = 20000;
        let h = y / n as f64;
        let f = |t: f64| t * (-t * t / (4.0 * x)).exp() * i0(t);
        let mut s = f(0.0) + f(y);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = x.exp() / (2.0 * x) * s * h / 3.0;
        assert_relative_eq!(weber_q0(x, y).unwrap(), oracle, max_relative = 1e-8);
    }

    #[test]
    fn centred_and_far_transmissivity() {
        let (w, a) = (0.6, 0.4);
        assert_relative_eq!(
            tau_st_of_q(0.0, w, a).unwrap(),
            tau_diffraction(w, a),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            tau_st_of_q(1e-9, w, a).unwrap(),
            tau_diffraction(w, a),
            max_relative = 1e-8
        );
        assert!(tau_st_of_q(20.0, w, a).unwrap() < 1e-300);
        assert_eq!(tau_st_of_q(f64::INFINITY, w, a).unwrap(), 0.0);
    }

    #[test]
    fn offset_beam_matches_direct_overlap() {
        // Direct polar integration of the displaced Gaussian over the aperture.
        let (w, a, q) = (0.5f64, 0.3f64, 0.35f64);
        let nr = 400;
        let nphi = 400;
        let mut total = 0.0;
        for i in 0..nr {
            let r = (i as f64 + 0.5) * a / nr as f64;
            for j in 0..nphi {
                let phi = (j as f64 + 0.5) * 2.0 * std::f64::consts::PI / nphi as f64;
                let d2 = r * r + q * q - 2.0 * r * q * phi.cos();
                total += r * (-2.0 * d2 / (w * w)).exp();
            }
        }
        let direct = total * (a / nr as f64) * (2.0 * std::f64::consts::PI / nphi as f64) * 2.0
            / (std::f64::consts::PI * w * w);
        assert_relative_eq!(tau_st_of_q(q, w, a).unwrap(), direct, max_relative = 1e-5);
    }

    #[test]
    fn shape_passes_through_one_over_e() {
        let p = typical();
        assert_relative_eq!(
            p.tau_of_q(p.q0),
            p.tau_max / std::f64::consts::E,
            max_relative = 1e-14
        );
        assert_eq!(p.tau_of_q(0.0), p.tau_max);
    }

    #[test]
    fn efficiency_scales_only_peak() {
        let a = fit_fading_params(0.6, 0.4, 0.9, 1.0, 0.2).unwrap();
        let b = fit_fading_params(0.6, 0.4, 0.9, 0.4, 0.2).unwrap();
        assert_relative_eq!(b.tau_max, 0.4 * a.tau_max, max_relative = 1e-15);
        assert_eq!(a.gamma, b.gamma);
        assert_eq!(a.q0, b.q0);
    }

    #[test]
    fn far_field_limit() {
        let w = 50.0;
        let a = 0.4;
        let p = fit_fading_params(w, a, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(p.gamma, 2.0, max_relative = 1e-4);
        assert_relative_eq!(p.q0, w / 2f64.sqrt(), max_relative = 1e-4);
        let tiny = fit_fading_params(1e7, a, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(tiny.gamma, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn far_field_shape_agrees_with_least_squares_fit() {
        // Fit ln τ_st(q) = ln τ0 − (q/q0)^γ on a grid by brute-force search
        // over (γ, q0) and compare to the closed-form shape.
        let (w, a) = (8.0, 0.4);
        let p = fit_fading_params(w, a, 1.0, 1.0, 1.0).unwrap();
        let qs: Vec<f64> = (1..40).map(|i| i as f64 * 0.2).collect();
        let data: Vec<f64> = qs
            .iter()
            .map(|&q| tau_st_of_q(q, w, a).unwrap().ln())
            .collect();
        let t0 = tau_st_of_q(0.0, w, a).unwrap().ln();
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for gi in 0..=200 {
            let g = 1.9 + gi as f64 * 0.001;
            for qi in 0..=200 {
                let q0 = p.q0 * (0.98 + qi as f64 * 0.0002);
                let err: f64 = qs
                    .iter()
                    .zip(&data)
                    .map(|(&q, &d)| (t0 - (q / q0).powf(g) - d).powi(2))
                    .sum();
                if err < best.0 {
                    best = (err, g, q0);
                }
            }
        }
        assert!(
            (best.1 - p.gamma).abs() < 0.01,
            "gamma {} vs {}",
            best.1,
            p.gamma
        );
        assert!(
            (best.2 / p.q0 - 1.0).abs() < 0.005,
            "q0 {} vs {}",
            best.2,
            p.q0
        );
    }

    #[test]
    fn degenerate_fit_is_reported() {
        assert!(matches!(
            fit_fading_params(1e200, 1e-200, 1.0, 1.0, 0.1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn deterministic_ensemble() {
        let p = FadingParams {
            sigma: 0.0,
            ..typical()
        };
        let (t1, t2) = p.moments().unwrap();
        assert_eq!(t1, p.tau_max);
        assert_eq!(t2, p.tau_max.sqrt());
    }

    #[test]
    fn density_normalises() {
        for sigma in [0.01, 0.1, 0.3, 1.0, 3.0] {
            let p = FadingParams { sigma, ..typical() };
            let total = p.expect_tau_space(|_| 1.0).unwrap();
            assert!((total - 1.0).abs() < 1e-6, "sigma={sigma}: {total}");
        }
    }

    #[test]
    fn density_matches_change_of_variables() {
        let p = typical();
        for tau in [0.05, 0.2, 0.4, 0.5] {
            if tau >= p.tau_max {
                continue;
            }
            let q = p.q_of_tau(tau);
            let h = 1e-6 * tau;
            let dq = (p.q_of_tau(tau - h) - p.q_of_tau(tau + h)) / (2.0 * h);
            let s2 = p.sigma * p.sigma;
            let wb = q / s2 * (-0.5 * q * q / s2).exp();
            assert_relative_eq!(p.p_of_tau(tau), wb * dq, max_relative = 1e-6);
        }
        assert_eq!(p.p_of_tau(p.tau_max * 1.01), 0.0);
        assert_eq!(p.p_of_tau(0.0), 0.0);
    }

    #[test]
    fn sampling_is_reproducible_and_bounded() {
        let p = typical();
        let a = sample_tau(&p, 7, 1000);
        let b = sample_tau(&p, 7, 1000);
        assert_eq!(a, b);
        assert!(a.iter().all(|&t| t <= p.tau_max && t >= 0.0));
    }

    #[test]
    fn sample_mean_within_three_standard_errors() {
        let p = typical();
        let n = 1_000_000;
        let draws = sample_tau(&p, 11, n);
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let (t1, _) = p.moments().unwrap();
        assert!(
            (mean - t1).abs() < 3.0 * (var / n as f64).sqrt(),
            "{mean} vs {t1}"
        );
    }

    #[test]
    fn histogram_matches_density() {
        let p = typical();
        let n = 1_000_000;
        let mut draws = sample_tau(&p, 3, n);
        draws.sort_by(f64::total_cmp);
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let c = p.cdf_tau(t);
                (c - i as f64 / n as f64)
                    .abs()
                    .max((c - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn tensor_average_of_separable_function() {
        let a = typical();
        let b = fit_fading_params(1.2, 0.4, 0.9, 0.8, 0.5).unwrap();
        let avg = expect2(&a, &b, |x, y| x * y.sqrt()).unwrap();
        let exact = a.moments().unwrap().0 * b.moments().unwrap().1;
        assert_relative_eq!(avg.value, exact, max_relative = 1e-6);
    }

    #[test]
    fn tensor_average_falls_back_on_sharp_integrands() {
        let a = FadingParams {
            sigma: 40.0,
            ..typical()
        };
        let avg = expect2(&a, &a, |x, y| x * y).unwrap();
        let m = a.moments().unwrap().0;
        assert!(avg.fallback);
        assert_relative_eq!(avg.value, m * m, max_relative = 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn moment_bounds(w in 0.05f64..20.0, a in 0.05f64..2.0, sigma in 0.0f64..5.0, atm in 0.1f64..1.0) {
            let p = fit_fading_params(w, a, atm, 1.0, sigma).unwrap();
            let (t1, t2) = p.moments().unwrap();
            prop_assert!(t2 > 0.0);
            prop_assert!(t2 <= t1.sqrt() * (1.0 + 1e-9));
            prop_assert!(t1.sqrt() <= p.tau_max.sqrt() * (1.0 + 1e-12));
        }

        #[test]
        fn moments_fall_with_wandering(w in 0.05f64..20.0, a in 0.05f64..2.0, sigma in 0.001f64..5.0, f in 1.01f64..3.0) {
            let p = fit_fading_params(w, a, 1.0, 1.0, sigma).unwrap();
            let q = FadingParams { sigma: sigma * f, ..p };
            let (a1, a2) = p.moments().unwrap();
            let (b1, b2) = q.moments().unwrap();
            prop_assert!(b1 <= a1 * (1.0 + 1e-9));
            prop_assert!(b2 <= a2 * (1.0 + 1e-9));
        }

        #[test]
        fn q_and_tau_space_agree(w in 0.1f64..10.0, a in 0.1f64..1.0, sigma in 0.01f64..3.0) {
            let p = fit_fading_params(w, a, 1.0, 1.0, sigma).unwrap();
            for g in [|t: f64| t, |t: f64| t.sqrt(), |t: f64| 1.0 / (1.0 + t)] {
                let q = p.expect(g).unwrap();
                let s = p.expect_tau_space(g).unwrap();
                prop_assert!(((q - s) / q).abs() < 1e-6, "{} vs {}", q, s);
            }
        }
    }
}
