//! Exponential weights and the discrete time operators built on them.
//!
//! For a damping rate `a(t)` with antiderivative `θ(t) = ∫₀ᵗ a(s) ds`, one
//! time step `[t_i, t_i + dt]` carries two weights
//!
//! ```text
//! w₊ = exp(∫_{t_{i+1/2}}^{t_{i+1}} a),   w₋ = exp(-∫_{t_i}^{t_{i+1/2}} a)
//! ```
//!
//! and the averaging / differencing operators
//!
//! ```text
//! A z = ½ (w₊ z^{i+1} + w₋ z^i),   D z = (w₊ z^{i+1} - w₋ z^i) / dt.
//! ```
//!
//! Both reduce to the implicit-midpoint average and forward difference when
//! `a ≡ 0`, and both are exact on the envelope `z ∝ exp(-θ(t))`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Largest quadrature panel used when no closed-form antiderivative exists.
pub const DEFAULT_PANEL_WIDTH: f64 = 0.01;

/// Step used for the central-difference fallback of `a'(t)`.
const DERIVATIVE_STEP: f64 = 1e-6;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, indexed by node count.
fn gauss_legendre(order: usize) -> &'static [(f64, f64)] {
    const GL1: [(f64, f64); 1] = [(0.0, 2.0)];
    const GL2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];
    const GL3: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
        (0.0, 0.888_888_888_888_888_8),
        (0.774_596_669_241_483_4, 0.555_555_555_555_555_6),
    ];
    const GL4: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    ];
    const GL5: [(f64, f64); 5] = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.0, 0.568_888_888_888_888_9),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    match order {
        1 => &GL1,
        2 => &GL2,
        3 => &GL3,
        4 => &GL4,
        _ => &GL5,
    }
}

/// The scalar damping rate `a(t)` of a damped/driven system.
#[derive(Clone)]
pub struct DampingCoefficient {
    rate: ScalarFn,
    antiderivative: Option<ScalarFn>,
    derivative: Option<ScalarFn>,
    quadrature_order: usize,
    panel_width: f64,
    label: String,
}

impl fmt::Debug for DampingCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DampingCoefficient")
            .field("label", &self.label)
            .field("exact_antiderivative", &self.antiderivative.is_some())
            .field("quadrature_order", &self.quadrature_order)
            .finish()
    }
}

impl DampingCoefficient {
    /// A rate with no closed-form antiderivative; θ falls back to
    /// composite Gauss–Legendre quadrature.
    pub fn from_fn(rate: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        DampingCoefficient {
            rate: Arc::new(rate),
            antiderivative: None,
            derivative: None,
            quadrature_order: 4,
            panel_width: DEFAULT_PANEL_WIDTH,
            label: "custom".into(),
        }
    }

    /// Attach an exact antiderivative. It is shifted so that θ(0) = 0.
    pub fn with_antiderivative(mut self, theta: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let theta0 = theta(0.0);
        self.antiderivative = Some(Arc::new(move |t| theta(t) - theta0));
        self
    }

    pub fn with_derivative(mut self, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn with_quadrature(mut self, order: usize, panel_width: f64) -> Result<Self> {
        if !(1..=5).contains(&order) {
            return Err(Error::Argument(format!(
                "quadrature order must be in 1..=5, got {order}"
            )));
        }
        if !(panel_width > 0.0) {
            return Err(Error::Argument(format!(
                "quadrature panel width must be positive, got {panel_width}"
            )));
        }
        self.quadrature_order = order;
        self.panel_width = panel_width;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Drop the exact antiderivative so θ is always computed by quadrature.
    pub fn quadrature_only(mut self) -> Self {
        self.antiderivative = None;
        self
    }

    pub fn zero() -> Self {
        Self::constant(0.0).with_label("zero")
    }

    pub fn constant(value: f64) -> Self {
        Self::from_fn(move |_| value)
            .with_antiderivative(move |t| value * t)
            .with_derivative(|_| 0.0)
            .with_label(format!("constant({value})"))
    }

    /// `a(t) = offset + amplitude·sin(frequency·t)`.
    pub fn sinusoid(offset: f64, amplitude: f64, frequency: f64) -> Self {
        let coeff = Self::from_fn(move |t| offset + amplitude * (frequency * t).sin())
            .with_derivative(move |t| amplitude * frequency * (frequency * t).cos())
            .with_label(format!("{offset} + {amplitude}·sin({frequency}·t)"));
        if frequency == 0.0 {
            coeff.with_antiderivative(move |t| offset * t)
        } else {
            coeff.with_antiderivative(move |t| offset * t + amplitude / frequency * (1.0 - (frequency * t).cos()))
        }
    }

    /// The coefficient `k·a(t)`, with `k·θ` and `k·a'` carried along.
    pub fn scaled(&self, k: f64) -> Self {
        let rate = self.rate.clone();
        let mut out = DampingCoefficient {
            rate: Arc::new(move |t| k * rate(t)),
            antiderivative: None,
            derivative: None,
            quadrature_order: self.quadrature_order,
            panel_width: self.panel_width,
            label: format!("{k}·({})", self.label),
        };
        if let Some(theta) = self.antiderivative.clone() {
            out.antiderivative = Some(Arc::new(move |t| k * theta(t)));
        }
        if let Some(d) = self.derivative.clone() {
            out.derivative = Some(Arc::new(move |t| k * d(t)));
        }
        out
    }

    pub fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }

    /// `a'(t)`, exact when supplied, else a central difference.
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(t),
            None => {
                let h = DERIVATIVE_STEP;
                ((self.rate)(t + h) - (self.rate)(t - h)) / (2.0 * h)
            }
        }
    }

    pub fn has_exact_antiderivative(&self) -> bool {
        self.antiderivative.is_some()
    }

    pub fn quadrature_order(&self) -> usize {
        self.quadrature_order
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `θ(t) = ∫₀ᵗ a(s) ds`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Argument(format!("theta requested at non-finite t = {t}")));
        }
        match &self.antiderivative {
            Some(theta) => Ok(theta(t)),
            None => self.quadrature(0.0, t),
        }
    }

    /// `∫_{t0}^{t1} a(s) ds`, from θ differences or local quadrature.
    pub fn integral(&self, t0: f64, t1: f64) -> Result<f64> {
        match &self.antiderivative {
            Some(theta) => Ok(theta(t1) - theta(t0)),
            None => self.quadrature(t0, t1),
        }
    }

    /// Composite Gauss–Legendre over `[t0, t1]` with panels no wider than
    /// the configured panel width.
    pub fn quadrature(&self, t0: f64, t1: f64) -> Result<f64> {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(0.0);
        }
        let panels = ((span.abs() / self.panel_width).ceil() as usize).max(1);
        let h = span / panels as f64;
        let rule = gauss_legendre(self.quadrature_order);
        let mut total = 0.0;
        for p in 0..panels {
            let mid = t0 + (p as f64 + 0.5) * h;
            let mut panel = 0.0;
            for &(x, w) in rule {
                let s = mid + 0.5 * h * x;
                let v = (self.rate)(s);
                if !v.is_finite() {
                    return Err(Error::Evaluation {
                        t: s,
                        what: format!("damping rate `{}` returned {v}", self.label),
                    });
                }
                panel += w * v;
            }
            total += 0.5 * h * panel;
        }
        Ok(total)
    }
}

/// The two exponential weights of one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialWeights {
    pub plus: f64,
    pub minus: f64,
    pub t: f64,
    pub dt: f64,
}

impl ExponentialWeights {
    /// Weights of the undamped method: `w₊ = w₋ = 1`.
    pub fn unit(t: f64, dt: f64) -> Self {
        ExponentialWeights {
            plus: 1.0,
            minus: 1.0,
            t,
            dt,
        }
    }

    pub fn t_half(&self) -> f64 {
        self.t + 0.5 * self.dt
    }

    pub fn t_next(&self) -> f64 {
        self.t + self.dt
    }

    /// Weights of the doubled coefficient `2a`.
    pub fn squared(&self) -> Self {
        ExponentialWeights {
            plus: self.plus * self.plus,
            minus: self.minus * self.minus,
            ..*self
        }
    }

    #[inline]
    pub fn avg(&self, old: f64, new: f64) -> f64 {
        0.5 * (self.plus * new + self.minus * old)
    }

    #[inline]
    pub fn diff(&self, old: f64, new: f64) -> f64 {
        (self.plus * new - self.minus * old) / self.dt
    }
}

/// θ(t) for the given coefficient.
pub fn theta(coeff: &DampingCoefficient, t: f64) -> Result<f64> {
    coeff.theta(t)
}

/// Exponential weights of the step `[t_i, t_i + dt]`.
pub fn exp_weights(coeff: &DampingCoefficient, t_i: f64, dt: f64) -> Result<ExponentialWeights> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    if !t_i.is_finite() {
        return Err(Error::Argument(format!("step start must be finite, got {t_i}")));
    }
    let t_half = t_i + 0.5 * dt;
    let upper = coeff.integral(t_half, t_i + dt)?;
    let lower = coeff.integral(t_i, t_half)?;
    Ok(ExponentialWeights {
        plus: upper.exp(),
        minus: (-lower).exp(),
        t: t_i,
        dt,
    })
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Argument(format!(
            "vector length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `A z = ½ (w₊ z^{i+1} + w₋ z^i)`.
pub fn op_a(w: &ExponentialWeights, z_i: &[f64], z_ip1: &[f64]) -> Result<Vec<f64>> {
    check_lengths(z_i, z_ip1)?;
    Ok(z_i.iter().zip(z_ip1).map(|(&o, &n)| w.avg(o, n)).collect())
}

/// `D z = (w₊ z^{i+1} - w₋ z^i) / dt`.
pub fn op_d(w: &ExponentialWeights, z_i: &[f64], z_ip1: &[f64]) -> Result<Vec<f64>> {
    check_lengths(z_i, z_ip1)?;
    Ok(z_i.iter().zip(z_ip1).map(|(&o, &n)| w.diff(o, n)).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|D^{2a}[zᵀy] - (D^a z)ᵀ(A^a y) - (A^a z)ᵀ(D^a y)|`, with the doubled
/// coefficient's weights built from an independently constructed `2a`.
#[allow(clippy::too_many_arguments)]
pub fn product_rule_residual(
    coeff: &DampingCoefficient,
    t_i: f64,
    dt: f64,
    z_i: &[f64],
    z_ip1: &[f64],
    y_i: &[f64],
    y_ip1: &[f64],
) -> Result<f64> {
    check_lengths(z_i, z_ip1)?;
    check_lengths(z_i, y_i)?;
    check_lengths(z_i, y_ip1)?;
    let w = exp_weights(coeff, t_i, dt)?;
    let w2 = exp_weights(&coeff.scaled(2.0), t_i, dt)?;
    let lhs = w2.diff(dot(z_i, y_i), dot(z_ip1, y_ip1));
    let rhs = dot(&op_d(&w, z_i, z_ip1)?, &op_a(&w, y_i, y_ip1)?) + dot(&op_a(&w, z_i, z_ip1)?, &op_d(&w, y_i, y_ip1)?);
    Ok((lhs - rhs).abs())
}

/// `|(e^{θ₁}y¹ - e^{θ₀}y⁰)/dt - e^{θ_h}·D y|` relative to
/// `(|e^{θ₁}y¹| + |e^{θ₀}y⁰|)/dt`, with θ evaluated independently of the
/// step weights.
pub fn exp_difference_residual(coeff: &DampingCoefficient, t_i: f64, dt: f64, y_i: f64, y_ip1: f64) -> Result<f64> {
    let w = exp_weights(coeff, t_i, dt)?;
    let e0 = coeff.theta(t_i)?.exp();
    let e1 = coeff.theta(t_i + dt)?.exp();
    let eh = coeff.theta(t_i + 0.5 * dt)?.exp();
    let lhs = (e1 * y_ip1 - e0 * y_i) / dt;
    let scale = (e1 * y_ip1).abs() + (e0 * y_i).abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok((lhs - eh * w.diff(y_i, y_ip1)).abs() * dt / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn reference_beta() -> DampingCoefficient {
        DampingCoefficient::sinusoid(0.1, -0.2, PI)
    }

    #[test]
    fn theta_of_zero_rate_is_zero() {
        assert_eq!(DampingCoefficient::zero().theta(7.3).unwrap(), 0.0);
        assert_eq!(DampingCoefficient::zero().quadrature_only().theta(7.3).unwrap(), 0.0);
    }

    #[test]
    fn sinusoid_antiderivative_closed_form() {
        let (g, c, w) = (0.3, 0.7, 2.5);
        let a = DampingCoefficient::sinusoid(g, c, w);
        for &t in &[0.0, 0.4, 1.0, 3.3] {
            let expected = g * t + c / w * (1.0 - (w * t).cos());
            assert!((a.theta(t).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrature_matches_analytic_theta() {
        let exact = 0.1 - 0.4 / PI;
        let q = reference_beta().quadrature_only();
        assert!((q.theta(1.0).unwrap() - exact).abs() < 1e-12);
        assert!((reference_beta().theta(1.0).unwrap() - exact).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_consistent_with_quadrature() {
        let a = reference_beta();
        let q = a.clone().quadrature_only();
        for i in 0..20 {
            let t0 = 0.37 * i as f64;
            let t1 = t0 + 0.21 + 0.05 * i as f64;
            let d = a.integral(t0, t1).unwrap();
            assert!((d - q.integral(t0, t1).unwrap()).abs() <= 1e-10 * (1.0 + d.abs()));
        }
    }

    #[test]
    fn non_finite_rate_reports_time() {
        let a = DampingCoefficient::from_fn(|t| if t > 0.5 { f64::NAN } else { 1.0 });
        match a.theta(1.0) {
            Err(Error::Evaluation { t, .. }) => assert!(t > 0.5),
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn weights_of_zero_and_constant_rates() {
        let w = exp_weights(&DampingCoefficient::zero(), 0.2, 0.01).unwrap();
        assert_eq!((w.plus, w.minus), (1.0, 1.0));
        let w = exp_weights(&DampingCoefficient::constant(0.1), 0.0, 0.001).unwrap();
        assert!((w.plus - 5e-5f64.exp()).abs() < 1e-16);
        assert!((w.minus - (-5e-5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn weights_exact_vs_quadrature() {
        let a = reference_beta();
        let we = exp_weights(&a, 0.0, 0.001).unwrap();
        let wq = exp_weights(&a.clone().quadrature_only(), 0.0, 0.001).unwrap();
        assert!((we.plus - wq.plus).abs() < 1e-12);
        assert!((we.minus - wq.minus).abs() < 1e-12);
    }

    #[test]
    fn weights_match_theta_differences() {
        let a = reference_beta();
        for i in 0..50 {
            let t = 0.113 * i as f64;
            let dt = 0.001 * (1 + i % 7) as f64;
            let w = exp_weights(&a, t, dt).unwrap();
            let th = |s: f64| a.theta(s).unwrap();
            assert!((w.plus / (th(t + dt) - th(t + 0.5 * dt)).exp() - 1.0).abs() < 1e-12);
            assert!((w.minus / (th(t) - th(t + 0.5 * dt)).exp() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_positive_step_rejected() {
        assert!(matches!(
            exp_weights(&DampingCoefficient::zero(), 0.0, 0.0),
            Err(Error::Argument(_))
        ));
        assert!(exp_weights(&DampingCoefficient::zero(), 0.0, -1.0).is_err());
    }

    #[test]
    fn operator_examples() {
        let zero = exp_weights(&DampingCoefficient::zero(), 0.0, 0.5).unwrap();
        assert_eq!(op_a(&zero, &[1.0, 3.0], &[3.0, 5.0]).unwrap(), vec![2.0, 4.0]);
        assert_eq!(op_d(&zero, &[1.0, 3.0], &[3.0, 6.0]).unwrap(), vec![4.0, 6.0]);
        assert_eq!(op_a(&zero, &[0.0], &[0.0]).unwrap(), vec![0.0]);

        let w = exp_weights(&DampingCoefficient::constant(0.1), 0.0, 0.001).unwrap();
        let a = op_a(&w, &[1.0], &[1.0]).unwrap()[0];
        assert!((a - 5e-5f64.cosh()).abs() < 1e-15);
        let d = op_d(&w, &[1.0], &[1.0]).unwrap()[0];
        assert!((d - 2.0 * 5e-5f64.sinh() / 0.001).abs() < 1e-12);

        // exponential decay is annihilated
        let z0 = [0.7, -1.3];
        let z1: Vec<f64> = z0.iter().map(|z| z * w.minus / w.plus).collect();
        let d = op_d(&w, &z0, &z1).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn length_mismatch_is_argument_error() {
        let w = ExponentialWeights::unit(0.0, 0.1);
        assert!(matches!(op_a(&w, &[1.0], &[1.0, 2.0]), Err(Error::Argument(_))));
        assert!(matches!(op_d(&w, &[1.0], &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn product_rule_zero_damping() {
        let r = product_rule_residual(
            &DampingCoefficient::zero(),
            0.0,
            0.01,
            &[1.0, 2.0],
            &[1.5, -2.0],
            &[0.3, 0.1],
            &[-4.0, 2.0],
        )
        .unwrap();
        assert!(r <= 1e-14, "{r}");
    }

    #[test]
    fn exp_difference_identity() {
        for (t, y0, y1) in [(0.0, 1.0, 2.0), (3.7, -0.4, 0.9), (10.0, 5.0, 5.0)] {
            let r = exp_difference_residual(&reference_beta(), t, 0.01, y0, y1).unwrap();
            assert!(r < 1e-13, "{r}");
        }
        assert_eq!(
            exp_difference_residual(&reference_beta(), 0.0, 0.1, 0.0, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn scaled_coefficient_doubles_theta() {
        let a = reference_beta();
        let a2 = a.scaled(2.0);
        assert!((a2.theta(0.77).unwrap() - 2.0 * a.theta(0.77).unwrap()).abs() < 1e-15);
        assert!((a2.rate(0.3) - 2.0 * a.rate(0.3)).abs() < 1e-15);
    }

    #[test]
    fn derivative_fallback() {
        let a = DampingCoefficient::from_fn(|t| (2.0 * t).sin());
        assert!((a.derivative(0.3) - 2.0 * (0.6f64).cos()).abs() < 1e-8);
    }
}
