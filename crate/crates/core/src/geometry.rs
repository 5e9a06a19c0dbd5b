//! Waveguide geometry: periodic coefficient functions, the cross-section and
//! the derived quantities entering the fiber forms.

use std::f64::consts::PI;

use thiserror::Error;

/// Margin kept between `β_ε` and zero.
pub const DELTA_SAFE: f64 = 0.05;

/// Default number of samples for periodic functions.
pub const DEFAULT_SAMPLES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("tube self-intersecting: eps * max|k| * max|y| = {bound:.4} must stay below {limit}")]
    TubeSelfIntersecting { bound: f64, limit: f64 },
    #[error("h positivity violated: min h = {min}")]
    HPositivity { min: f64 },
    #[error("rotation angle must vanish at s = 0, got alpha(0) = {value}")]
    AlphaNotZero { value: f64 },
    #[error("shift constant c must be positive, got {0}")]
    NonPositiveShift(f64),
    #[error("thickness eps must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("periodic function needs an even sample count >= 4, got {0}")]
    InvalidSamples(usize),
    #[error("invalid cross-section: {0}")]
    InvalidSection(String),
    #[error("period mismatch: {name} has period {found}, expected {expected}")]
    PeriodMismatch { name: &'static str, found: f64, expected: f64 },
}

/// Smooth `L`-periodic real function stored by uniform samples `s_i = iL/N`
/// and evaluated through its trigonometric interpolant.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicScalar {
    period: f64,
    samples: Vec<f64>,
    // a_0, then (a_m, b_m) for 1 <= m < N/2, then the Nyquist cosine coefficient.
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl PeriodicScalar {
    pub fn from_samples(period: f64, samples: Vec<f64>) -> Result<Self, GeometryError> {
        let n = samples.len();
        if n < 4 || !n.is_multiple_of(2) {
            return Err(GeometryError::InvalidSamples(n));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(GeometryError::PeriodMismatch { name: "period", found: period, expected: f64::NAN });
        }
        let half = n / 2;
        let mut cos = vec![0.0; half + 1];
        let mut sin = vec![0.0; half + 1];
        for m in 0..=half {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, &f) in samples.iter().enumerate() {
                // Reduce the phase index exactly to keep the transform well conditioned.
                let phase = 2.0 * PI * ((m * j) % n) as f64 / n as f64;
                c += f * phase.cos();
                s += f * phase.sin();
            }
            let scale = if m == 0 || m == half { 1.0 } else { 2.0 } / n as f64;
            cos[m] = c * scale;
            sin[m] = if m == 0 || m == half { 0.0 } else { s * scale };
        }
        // Round-off in the transform would otherwise be amplified by differentiation.
        let floor = 1e-14 * samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for v in cos.iter_mut().chain(sin.iter_mut()) {
            if v.abs() <= floor {
                *v = 0.0;
            }
        }
        Ok(Self { period, samples, cos, sin })
    }

    pub fn from_fn(period: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GeometryError> {
        let samples = (0..n).map(|i| f(i as f64 * period / n as f64)).collect();
        Self::from_samples(period, samples)
    }

    pub fn constant(period: f64, n: usize, value: f64) -> Result<Self, GeometryError> {
        Self::from_fn(period, n, |_| value)
    }

    /// `Σ amp · cos(2πms/L + phase)` over the given `(m, amp, phase)` terms.
    pub fn from_cosine_series(period: f64, n: usize, terms: &[(u32, f64, f64)]) -> Result<Self, GeometryError> {
        let omega = 2.0 * PI / period;
        Self::from_fn(period, n, |s| {
            terms.iter().map(|&(m, amp, phase)| amp * (omega * m as f64 * s + phase).cos()).sum()
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Sample location `s_i = iL/N`.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.period / self.len() as f64
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivative_value(s, 0)
    }

    /// `d^order f / ds^order` of the interpolant at `s`.
    ///
    /// The Nyquist mode is carried as a pure cosine, so it contributes to even
    /// derivatives only.
    pub fn derivative_value(&self, s: f64, order: u32) -> f64 {
        let s = s.rem_euclid(self.period);
        let omega = 2.0 * PI / self.period;
        let half = self.len() / 2;
        let mut acc = if order == 0 { self.cos[0] } else { 0.0 };
        for m in 1..=half {
            if m == half && order % 2 == 1 {
                continue;
            }
            let k = omega * m as f64;
            let x = k * s;
            let (c, sn) = (x.cos(), x.sin());
            // d^r/ds^r of (a cos kx + b sin kx) cycles through four phases.
            let (a, b) = (self.cos[m], self.sin[m]);
            let term = match order % 4 {
                0 => a * c + b * sn,
                1 => -a * sn + b * c,
                2 => -a * c - b * sn,
                _ => a * sn - b * c,
            };
            acc += k.powi(order as i32) * term;
        }
        acc
    }

    pub fn derivative(&self, order: u32) -> Self {
        let samples = (0..self.len()).map(|i| self.derivative_value(self.node(i), order)).collect();
        Self::from_samples(self.period, samples).expect("sample count already validated")
    }

    /// Complex Fourier coefficient `f̂_m` with `f(s) = Σ f̂_m exp(2πims/L)`.
    /// The Nyquist coefficient is split evenly between `±N/2`.
    pub fn fourier_coefficient(&self, m: i64) -> num_complex::Complex64 {
        let half = (self.len() / 2) as i64;
        let k = m.unsigned_abs() as usize;
        match m.abs() {
            0 => num_complex::Complex64::new(self.cos[0], 0.0),
            a if a < half => {
                let sign = if m > 0 { -1.0 } else { 1.0 };
                num_complex::Complex64::new(self.cos[k] / 2.0, sign * self.sin[k] / 2.0)
            }
            a if a == half => num_complex::Complex64::new(self.cos[k] / 2.0, 0.0),
            _ => num_complex::Complex64::new(0.0, 0.0),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_samples(self.period, self.samples.iter().map(|&v| f(v)).collect())
            .expect("sample count already validated")
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "sample grids differ");
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| f(a, b)).collect();
        Self::from_samples(self.period, samples).expect("sample count already validated")
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |f|` of the interpolant, estimated on an 8x oversampled grid.
    pub fn sup_abs(&self) -> f64 {
        let n = 8 * self.len();
        (0..n).map(|i| self.value(i as f64 * self.period / n as f64).abs()).fold(self.max_abs(), f64::max)
    }
}

/// Axis-aligned rectangle `[o1 − a/2, o1 + a/2] × [o2 − b/2, o2 + b/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectionShape {
    a: f64,
    b: f64,
    offset: [f64; 2],
}

impl SectionShape {
    pub fn rectangle(a: f64, b: f64, offset: [f64; 2]) -> Result<Self, GeometryError> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(GeometryError::InvalidSection(format!("side lengths must be positive, got {a} x {b}")));
        }
        if !offset.iter().all(|o| o.is_finite()) {
            return Err(GeometryError::InvalidSection("offset must be finite".into()));
        }
        Ok(Self { a, b, offset })
    }

    /// Unit square centered at the origin.
    pub fn unit_square() -> Self {
        Self { a: 1.0, b: 1.0, offset: [0.0, 0.0] }
    }

    pub fn sides(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn offset(&self) -> [f64; 2] {
        self.offset
    }

    pub fn area(&self) -> f64 {
        self.a * self.b
    }

    pub fn centroid(&self) -> [f64; 2] {
        self.offset
    }

    /// Lower-left and upper-right corners.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let [o1, o2] = self.offset;
        ([o1 - self.a / 2.0, o2 - self.b / 2.0], [o1 + self.a / 2.0, o2 + self.b / 2.0])
    }

    /// `max_{y ∈ S} |y|`, attained at a corner.
    pub fn max_radius(&self) -> f64 {
        let [o1, o2] = self.offset;
        let r1 = o1.abs() + self.a / 2.0;
        let r2 = o2.abs() + self.b / 2.0;
        r1.hypot(r2)
    }
}

/// Complete geometry of a periodic thin waveguide.
#[derive(Clone, Debug)]
pub struct WaveguideSpec {
    period: f64,
    k: PeriodicScalar,
    tau: PeriodicScalar,
    alpha: PeriodicScalar,
    h: PeriodicScalar,
    section: SectionShape,
    c: f64,
    dh: PeriodicScalar,
    ddh: PeriodicScalar,
    dalpha: PeriodicScalar,
}

impl WaveguideSpec {
    pub fn builder(period: f64) -> WaveguideBuilder {
        WaveguideBuilder {
            period,
            samples: None,
            k: None,
            tau: None,
            alpha: None,
            h: None,
            section: SectionShape::unit_square(),
            c: 1.0,
        }
    }

    /// Straight tube with constant profile `h ≡ 1` and the unit square section.
    pub fn straight(period: f64) -> Result<Self, GeometryError> {
        Self::builder(period).build()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn curvature(&self) -> &PeriodicScalar {
        &self.k
    }

    pub fn torsion(&self) -> &PeriodicScalar {
        &self.tau
    }

    pub fn rotation(&self) -> &PeriodicScalar {
        &self.alpha
    }

    pub fn profile(&self) -> &PeriodicScalar {
        &self.h
    }

    pub fn profile_derivative(&self) -> &PeriodicScalar {
        &self.dh
    }

    pub fn section(&self) -> &SectionShape {
        &self.section
    }

    pub fn shift(&self) -> f64 {
        self.c
    }

    pub fn is_straight(&self) -> bool {
        self.k.max_abs() == 0.0
    }

    /// Largest admissible-looking thickness; `validate_epsilon` is strict at it.
    pub fn epsilon_limit(&self) -> f64 {
        let kr = self.k.sup_abs() * self.section.max_radius();
        if kr == 0.0 {
            f64::INFINITY
        } else {
            (1.0 - DELTA_SAFE) / kr
        }
    }

    /// Checks `ε · max|k| · max|y| < 1 − δ_safe`, which keeps `β_ε ≥ δ_safe`.
    pub fn validate_epsilon(&self, eps: f64) -> Result<(), GeometryError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(GeometryError::NonPositiveEpsilon(eps));
        }
        let bound = eps * self.k.sup_abs() * self.section.max_radius();
        if bound < 1.0 - DELTA_SAFE {
            Ok(())
        } else {
            Err(GeometryError::TubeSelfIntersecting { bound, limit: 1.0 - DELTA_SAFE })
        }
    }

    /// `β_ε(s, y) = 1 − εk(s)(y1 cos α(s) + y2 sin α(s))`.
    pub fn beta(&self, eps: f64, s: f64, y: [f64; 2]) -> f64 {
        let a = self.alpha.value(s);
        1.0 - eps * self.k.value(s) * (y[0] * a.cos() + y[1] * a.sin())
    }

    /// `R^h(s, y) = (τ + α')(s) R y − (h'/h)(s) y` with `R = [[0, 1], [−1, 0]]`.
    pub fn rh(&self, s: f64, y: [f64; 2]) -> [f64; 2] {
        let twist = self.tau.value(s) + self.dalpha.value(s);
        let g = self.dh.value(s) / self.h.value(s);
        [twist * y[1] - g * y[0], -twist * y[0] - g * y[1]]
    }

    /// `h''/h` on the sample grid of `h`. The shift `c` is not included.
    pub fn potential(&self) -> PeriodicScalar {
        self.ddh.zip_with(&self.h, |d2, h| d2 / h)
    }

    /// `h'/h` on the sample grid of `h`.
    pub fn log_derivative(&self) -> PeriodicScalar {
        self.dh.zip_with(&self.h, |d1, h| d1 / h)
    }

    /// `a_ε(s) = ∫_S β_ε(s, y) dy = |S| (1 − εk(s)(ȳ1 cos α + ȳ2 sin α))`.
    pub fn averaged_weight(&self, eps: f64) -> PeriodicScalar {
        let [c1, c2] = self.section.centroid();
        let area = self.section.area();
        let n = self.h.len();
        let samples = (0..n)
            .map(|i| {
                let s = self.h.node(i);
                let a = self.alpha.value(s);
                area * (1.0 - eps * self.k.value(s) * (c1 * a.cos() + c2 * a.sin()))
            })
            .collect();
        PeriodicScalar::from_samples(self.period, samples).expect("sample count already validated")
    }
}

#[derive(Clone, Debug)]
pub struct WaveguideBuilder {
    period: f64,
    samples: Option<usize>,
    k: Option<PeriodicScalar>,
    tau: Option<PeriodicScalar>,
    alpha: Option<PeriodicScalar>,
    h: Option<PeriodicScalar>,
    section: SectionShape,
    c: f64,
}

impl WaveguideBuilder {
    /// Sample count used for coefficients left at their defaults.
    pub fn samples(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }

    pub fn curvature(mut self, k: PeriodicScalar) -> Self {
        self.k = Some(k);
        self
    }

    pub fn torsion(mut self, tau: PeriodicScalar) -> Self {
        self.tau = Some(tau);
        self
    }

    pub fn rotation(mut self, alpha: PeriodicScalar) -> Self {
        self.alpha = Some(alpha);
        self
    }

    pub fn profile(mut self, h: PeriodicScalar) -> Self {
        self.h = Some(h);
        self
    }

    pub fn section(mut self, section: SectionShape) -> Self {
        self.section = section;
        self
    }

    pub fn shift(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn build(self) -> Result<WaveguideSpec, GeometryError> {
        let period = self.period;
        if !(period > 0.0 && period.is_finite()) {
            return Err(GeometryError::PeriodMismatch { name: "L", found: period, expected: f64::NAN });
        }
        let n = self
            .samples
            .or_else(|| [&self.h, &self.k, &self.tau, &self.alpha].iter().find_map(|f| f.as_ref().map(|f| f.len())))
            .unwrap_or(DEFAULT_SAMPLES);
        let pick = |f: Option<PeriodicScalar>, name: &'static str, default: f64| match f {
            Some(f) => {
                if (f.period() - period).abs() > 1e-12 * period {
                    Err(GeometryError::PeriodMismatch { name, found: f.period(), expected: period })
                } else {
                    Ok(f)
                }
            }
            None => PeriodicScalar::constant(period, n, default),
        };
        let k = pick(self.k, "k", 0.0)?;
        let tau = pick(self.tau, "tau", 0.0)?;
        let alpha = pick(self.alpha, "alpha", 0.0)?;
        let h = pick(self.h, "h", 1.0)?;
        let min_h = h.min();
        if min_h.is_nan() || min_h <= 0.0 {
            return Err(GeometryError::HPositivity { min: min_h });
        }
        let alpha0 = alpha.value(0.0);
        if alpha0.abs() > 1e-12 {
            return Err(GeometryError::AlphaNotZero { value: alpha0 });
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(GeometryError::NonPositiveShift(self.c));
        }
        let dh = h.derivative(1);
        let ddh = h.derivative(2);
        let dalpha = alpha.derivative(1);
        Ok(WaveguideSpec { period, k, tau, alpha, h, section: self.section, c: self.c, dh, ddh, dalpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const L: f64 = 2.0 * PI;

    fn ripple(period: f64) -> PeriodicScalar {
        PeriodicScalar::from_cosine_series(period, 64, &[(0, 1.0, 0.0), (1, 0.3, 0.0)]).unwrap()
    }

    #[test]
    fn rejects_bad_sample_counts() {
        assert_eq!(PeriodicScalar::constant(1.0, 3, 0.0), Err(GeometryError::InvalidSamples(3)));
        assert_eq!(PeriodicScalar::constant(1.0, 7, 0.0), Err(GeometryError::InvalidSamples(7)));
        assert!(PeriodicScalar::constant(1.0, 4, 0.0).is_ok());
    }

    #[test]
    fn interpolant_is_periodic_and_exact_at_nodes() {
        let f = PeriodicScalar::from_fn(3.0, 16, |s| (s * 2.0 * PI / 3.0).sin() + 0.2).unwrap();
        assert_eq!(f.value(0.0), f.value(3.0));
        for i in 0..16 {
            assert_abs_diff_eq!(f.value(f.node(i)), f.samples()[i], epsilon = 1e-13);
        }
        assert_abs_diff_eq!(f.value(0.7), (0.7 * 2.0 * PI / 3.0).sin() + 0.2, epsilon = 1e-13);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let f = PeriodicScalar::constant(L, 32, 2.5).unwrap();
        for order in 1..4 {
            assert!(f.derivative(order).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn fourier_coefficients_of_shifted_cosine() {
        let f = PeriodicScalar::from_cosine_series(L, 16, &[(2, 1.0, 0.5)]).unwrap();
        let c = f.fourier_coefficient(2);
        assert_abs_diff_eq!(c.re, 0.5 * 0.5f64.cos(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.im, 0.5 * 0.5f64.sin(), epsilon = 1e-14);
        assert_abs_diff_eq!((f.fourier_coefficient(-2) - c.conj()).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(f.fourier_coefficient(9).norm(), 0.0);
    }

    #[test]
    fn validate_epsilon_examples() {
        let k = PeriodicScalar::constant(L, 16, 1.0).unwrap();
        let spec = WaveguideSpec::builder(L).curvature(k).build().unwrap();
        assert!(spec.validate_epsilon(0.5).is_ok());
        assert!(matches!(spec.validate_epsilon(1.4), Err(GeometryError::TubeSelfIntersecting { .. })));
        assert!(matches!(spec.validate_epsilon(0.0), Err(GeometryError::NonPositiveEpsilon(_))));
        let straight = WaveguideSpec::straight(L).unwrap();
        assert!(straight.validate_epsilon(100.0).is_ok());
    }

    #[test]
    fn beta_examples() {
        let k = PeriodicScalar::constant(L, 16, 1.0).unwrap();
        let spec = WaveguideSpec::builder(L).curvature(k).build().unwrap();
        assert_abs_diff_eq!(spec.beta(0.1, 0.3, [0.2, 0.7]), 0.98, epsilon = 1e-15);
        assert_eq!(WaveguideSpec::straight(L).unwrap().beta(0.3, 1.0, [0.4, 0.4]), 1.0);
    }

    #[test]
    fn rh_examples() {
        let spec = WaveguideSpec::straight(L).unwrap();
        assert_eq!(spec.rh(0.4, [0.3, -0.2]), [0.0, 0.0]);
        let twisted = WaveguideSpec::builder(L).torsion(PeriodicScalar::constant(L, 16, 1.0).unwrap()).build().unwrap();
        let r = twisted.rh(1.0, [1.0, 0.0]);
        assert_abs_diff_eq!(r[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1], -1.0, epsilon = 1e-15);
        let rippled = WaveguideSpec::builder(L).profile(ripple(L)).build().unwrap();
        let s = L / 4.0;
        let expect = 0.6 * PI / L / (1.0 + 0.3 * (2.0 * PI * s / L).cos());
        let r = rippled.rh(s, [1.0, 1.0]);
        assert_abs_diff_eq!(r[0], expect, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], expect, epsilon = 1e-12);
    }

    #[test]
    fn potential_matches_closed_form() {
        let period = 3.0;
        let spec = WaveguideSpec::builder(period).profile(ripple(period)).build().unwrap();
        let v = spec.potential();
        let w = 2.0 * PI / period;
        for i in 0..v.len() {
            let s = v.node(i);
            let exact = -0.3 * w * w * (w * s).cos() / (1.0 + 0.3 * (w * s).cos());
            assert_abs_diff_eq!(v.samples()[i], exact, epsilon = 1e-10);
        }
        let flat =
            WaveguideSpec::builder(period).profile(PeriodicScalar::constant(period, 16, 2.0).unwrap()).build().unwrap();
        assert!(flat.potential().max_abs() <= 1e-12);
    }

    #[test]
    fn averaged_weight_examples() {
        let k = PeriodicScalar::constant(L, 16, 1.0).unwrap();
        let centered = WaveguideSpec::builder(L).curvature(k.clone()).build().unwrap();
        assert!(centered.averaged_weight(0.3).samples().iter().all(|&a| (a - 1.0).abs() < 1e-15));
        let offset = WaveguideSpec::builder(L)
            .curvature(k)
            .section(SectionShape::rectangle(1.0, 1.0, [0.5, 0.0]).unwrap())
            .build()
            .unwrap();
        assert!(offset.averaged_weight(0.1).samples().iter().all(|&a| (a - 0.95).abs() < 1e-14));
    }

    #[test]
    fn builder_enforces_invariants() {
        let neg = PeriodicScalar::from_cosine_series(L, 16, &[(0, 0.2, 0.0), (1, 0.5, 0.0)]).unwrap();
        assert!(matches!(WaveguideSpec::builder(L).profile(neg).build(), Err(GeometryError::HPositivity { .. })));
        let alpha = PeriodicScalar::constant(L, 16, 0.1).unwrap();
        assert!(matches!(WaveguideSpec::builder(L).rotation(alpha).build(), Err(GeometryError::AlphaNotZero { .. })));
        assert!(matches!(WaveguideSpec::builder(L).shift(0.0).build(), Err(GeometryError::NonPositiveShift(_))));
        let wrong = PeriodicScalar::constant(1.0, 16, 1.0).unwrap();
        assert!(matches!(WaveguideSpec::builder(L).profile(wrong).build(), Err(GeometryError::PeriodMismatch { .. })));
    }

    #[test]
    fn section_shape_accessors() {
        let s = SectionShape::rectangle(2.0, 0.5, [0.1, -0.3]).unwrap();
        assert_eq!(s.area(), 1.0);
        assert_eq!(s.centroid(), [0.1, -0.3]);
        assert_abs_diff_eq!(s.max_radius(), (1.1f64).hypot(0.55), epsilon = 1e-15);
        assert!(SectionShape::rectangle(0.0, 1.0, [0.0; 2]).is_err());
    }

    proptest! {
        #[test]
        fn second_derivative_of_cosine(m in 0u32..10, n_half in 12usize..40) {
            let n = 2 * n_half;
            let f = PeriodicScalar::from_cosine_series(L, n, &[(m, 1.0, 0.0)]).unwrap();
            let d2 = f.derivative(2);
            for i in 0..n {
                let s = f.node(i);
                let exact = -(m as f64).powi(2) * (m as f64 * s).cos();
                prop_assert!((d2.samples()[i] - exact).abs() <= 1e-10);
            }
        }

        #[test]
        fn potential_is_scale_invariant(scale in 0.1f64..10.0, amp in 0.0f64..0.6) {
            let h = PeriodicScalar::from_cosine_series(L, 32, &[(0, 1.0, 0.0), (2, amp, 0.3)]).unwrap();
            let a = WaveguideSpec::builder(L).profile(h.clone()).build().unwrap().potential();
            let b = WaveguideSpec::builder(L).profile(h.map(|v| v * scale)).build().unwrap().potential();
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn beta_stays_above_margin(eps_frac in 0.01f64..0.999, s in 0.0f64..L, u in -0.5f64..0.5, v in -0.5f64..0.5) {
            let k = PeriodicScalar::from_cosine_series(L, 32, &[(0, 0.5, 0.0), (1, 1.0, 0.2)]).unwrap();
            let alpha = PeriodicScalar::from_cosine_series(L, 32, &[(1, 0.4, -PI / 2.0)]).unwrap();
            let spec = WaveguideSpec::builder(L)
                .curvature(k)
                .rotation(alpha)
                .section(SectionShape::rectangle(1.0, 1.0, [0.2, 0.1]).unwrap())
                .build()
                .unwrap();
            let eps = eps_frac * spec.epsilon_limit();
            prop_assert!(spec.validate_epsilon(eps).is_ok());
            let y = [0.2 + u, 0.1 + v];
            prop_assert!(spec.beta(eps, s, y) >= DELTA_SAFE - 1e-12);
        }
    }
}
