//! Propagation of bang-bang and Fourier-truncated drives, first-order
//! Magnus analysis in the toggling frame, and closed-form fidelity estimates.

use std::f64::consts::PI;

use serde::Serialize;

use crate::bangbang::{BangSequence, DriveParams, Gate};
use crate::error::{Error, Result};
use crate::fourier::{series_of, FourierWaveform};
use crate::qmat::{expm_hermitian_unchecked, fidelity_unchecked, pauli, Axis, CMat};
use crate::quadrature::gauss_legendre;

/// Richardson bound between the last two refinement levels.
pub const RICHARDSON_TOL: f64 = 1e-8;
/// Maximum number of step halvings after the first comparison.
pub const MAX_REFINEMENTS: usize = 3;
/// Quadrature node cap for [`magnus_effective`].
pub const QUADRATURE_BUDGET: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    /// Fourth-order Magnus step with two Gauss nodes; exactly unitary.
    #[default]
    Magnus4,
    /// Exponential of the Hamiltonian at the step midpoint; second order.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationResult {
    pub final_unitary: CMat,
    pub fidelity: f64,
    pub steps: usize,
    pub max_unitarity_defect: f64,
    pub step_size: f64,
    /// Max-entry distance between the last two refinement levels (0 for exact products).
    pub richardson_defect: f64,
}

impl PropagationResult {
    fn new(u: CMat, target: &CMat, steps: usize, step_size: f64, richardson_defect: f64) -> Self {
        PropagationResult {
            final_unitary: u,
            fidelity: fidelity_unchecked(target, &u),
            steps,
            max_unitarity_defect: u.unitarity_defect(),
            step_size,
            richardson_defect,
        }
    }

    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }
}

fn check_target(target: &CMat, dim: usize) -> Result<()> {
    if target.dim() != dim {
        return Err(Error::DimMismatch { left: target.dim(), right: dim });
    }
    if !target.is_unitary() {
        return Err(Error::NonUnitary { defect: target.unitarity_defect() });
    }
    Ok(())
}

/// Exact product of bang propagators, compared against `target`.
pub fn propagate_bb(seq: &BangSequence, target: &CMat) -> Result<PropagationResult> {
    check_target(target, 2)?;
    Ok(PropagationResult::new(seq.unitary(), target, seq.len(), 0.0, 0.0))
}

/// Single-qubit Hamiltonian `½[ω₀σz + Ω̄ f σx]`.
pub fn drive_hamiltonian(params: &DriveParams, f: f64) -> CMat {
    let mut h = CMat::zeros(2);
    h.set(0, 0, (0.5 * params.omega0).into());
    h.set(1, 1, (-0.5 * params.omega0).into());
    h.set(0, 1, (0.5 * params.omega_bar * f).into());
    h.set(1, 0, (0.5 * params.omega_bar * f).into());
    h
}

/// Fixed-step propagation of `i dU/dt = H(t) U` on `[0, T]`.
pub fn propagate_steps<H: Fn(f64) -> CMat>(
    hamiltonian: &H,
    dim: usize,
    period: f64,
    steps: usize,
    integrator: Integrator,
) -> CMat {
    let h = period / steps as f64;
    let g = 3f64.sqrt() / 6.0;
    let mut u = CMat::identity(dim);
    for j in 0..steps {
        let t = j as f64 * h;
        let generator = match integrator {
            Integrator::Midpoint => hamiltonian(t + 0.5 * h).scale_re(h),
            Integrator::Magnus4 => {
                let h1 = hamiltonian(t + (0.5 - g) * h);
                let h2 = hamiltonian(t + (0.5 + g) * h);
                // −i[H2, H1] is Hermitian
                let comm = h2.commutator(&h1).scale(num_complex::Complex64::new(0.0, -1.0));
                (h1 + h2).scale_re(0.5 * h) + comm.scale_re(3f64.sqrt() / 12.0 * h * h)
            }
        };
        u = expm_hermitian_unchecked(&generator, 1.0) * u;
    }
    u
}

/// Step-doubling propagation: starts at `ceil(T/h0)` steps, doubles until two
/// consecutive levels agree within [`RICHARDSON_TOL`].
pub fn propagate_checked<H: Fn(f64) -> CMat>(
    hamiltonian: &H,
    target: &CMat,
    period: f64,
    h0: f64,
    integrator: Integrator,
) -> Result<PropagationResult> {
    let dim = target.dim();
    check_target(target, dim)?;
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::NonPositiveInput { name: "period", value: period });
    }
    if !(h0 > 0.0) {
        return Err(Error::NonPositiveInput { name: "step", value: h0 });
    }
    let mut steps = ((period / h0).ceil() as usize).max(1);
    let mut coarse = propagate_steps(hamiltonian, dim, period, steps, integrator);
    let mut defect = f64::INFINITY;
    for _ in 0..=MAX_REFINEMENTS {
        steps *= 2;
        let fine = propagate_steps(hamiltonian, dim, period, steps, integrator);
        defect = coarse.max_abs_diff(&fine);
        if defect < RICHARDSON_TOL {
            return Ok(PropagationResult::new(fine, target, steps, period / steps as f64, defect));
        }
        coarse = fine;
    }
    Err(Error::NoConvergence { defect, steps })
}

/// Initial step for a waveform of order `K`: 64 samples per fastest cycle.
pub fn default_step(period: f64, order: usize, step_hint: f64) -> f64 {
    let h = period / (64.0 * order.max(1) as f64);
    if step_hint > 0.0 {
        h.min(step_hint)
    } else {
        h
    }
}

/// Propagates the truncated series as the drive, `Ω(t) = Ω̄ S_K(t)`.
pub fn propagate_waveform(
    waveform: &FourierWaveform,
    params: &DriveParams,
    target: &CMat,
    step_hint: f64,
) -> Result<PropagationResult> {
    propagate_waveform_with(waveform, params, target, step_hint, Integrator::default())
}

pub fn propagate_waveform_with(
    waveform: &FourierWaveform,
    params: &DriveParams,
    target: &CMat,
    step_hint: f64,
    integrator: Integrator,
) -> Result<PropagationResult> {
    let h0 = default_step(waveform.duration, waveform.order, step_hint);
    let ham = |t: f64| drive_hamiltonian(params, waveform.value(t));
    propagate_checked(&ham, target, waveform.duration, h0, integrator)
}

/// Max-entry distances `|U_n − U_2n|, |U_2n − U_4n|, …` for `levels` halvings.
pub fn richardson_defects<H: Fn(f64) -> CMat>(
    hamiltonian: &H,
    dim: usize,
    period: f64,
    steps: usize,
    levels: usize,
    integrator: Integrator,
) -> Vec<f64> {
    let mut n = steps.max(1);
    let mut prev = propagate_steps(hamiltonian, dim, period, n, integrator);
    (0..levels)
        .map(|_| {
            n *= 2;
            let next = propagate_steps(hamiltonian, dim, period, n, integrator);
            let d = prev.max_abs_diff(&next);
            prev = next;
            d
        })
        .collect()
}

/// Time-averaged toggling-frame error Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveHamiltonian {
    pub matrix: CMat,
    /// `|h|` for `H̄ = h·σ`.
    pub norm: f64,
    /// `(h_x, h_y, h_z)`.
    pub components: [f64; 3],
    pub total_time: f64,
    /// Ideal bang-bang propagator `U_id(T)`.
    pub ideal: CMat,
    pub tail_error: f64,
    pub nodes: usize,
}

impl EffectiveHamiltonian {
    /// `|Tr[U_id† U_id exp(−i H̄ T)]|/2`, the first-order fidelity estimate.
    pub fn predicted_fidelity(&self) -> f64 {
        (self.norm * self.total_time).cos().abs()
    }
}

/// First-order Magnus average `H̄ = (1/T) ∫ U_id† H_R U_id dt` with
/// `H_R = (Ω̄/2) R_K σx` and `R_K = f − S_K`.
///
/// `R_K` is evaluated exactly as the bang value minus the partial sum, so no
/// harmonic cut-off enters. The integral uses 16-point Gauss–Legendre panels
/// inside each bang, about four panels per retained harmonic period.
pub fn magnus_effective(seq: &BangSequence, order: usize) -> Result<EffectiveHamiltonian> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let wf = series_of(seq, order)?;
    let params = seq.params;
    let period = seq.total_time;
    let (gx, gw) = gauss_legendre(16);
    let min_panels = 16usize.div_ceil(seq.len());
    let panels: Vec<usize> = seq
        .bangs
        .iter()
        .map(|b| ((b.duration / period * 4.0 * order as f64).ceil() as usize).max(4).max(min_panels))
        .collect();
    let nodes = 16 * panels.iter().sum::<usize>();
    if nodes > QUADRATURE_BUDGET {
        return Err(Error::QuadratureBudgetExceeded { nodes, budget: QUADRATURE_BUDGET });
    }
    let sx = pauli(Axis::X);
    let mut acc = CMat::zeros(2);
    let mut start = CMat::identity(2);
    let mut a = 0.0;
    for (b, &np) in seq.bangs.iter().zip(&panels) {
        let width = b.duration / np as f64;
        for p in 0..np {
            let lo = p as f64 * width;
            for (x, w) in gx.iter().zip(&gw) {
                let local = lo + 0.5 * width * (1.0 + x);
                let remainder = b.level.value() - wf.value(a + local);
                let u = params.bang_unitary(b.level, local) * start;
                let weight = 0.5 * width * w * 0.5 * params.omega_bar * remainder;
                acc = acc + (u.adjoint() * sx * u).scale_re(weight);
            }
        }
        start = params.bang_unitary(b.level, b.duration) * start;
        a += b.duration;
    }
    let matrix = acc.scale_re(1.0 / period);
    let [_, hx, hy, hz] = matrix.pauli_components();
    let components = [hx.re, hy.re, hz.re];
    let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(EffectiveHamiltonian {
        matrix,
        norm,
        components,
        total_time: period,
        ideal: start,
        tail_error: wf.tail_error,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Weak,
    Strong,
}

impl Regime {
    pub fn of(params: &DriveParams) -> Regime {
        if params.is_strong() {
            Regime::Strong
        } else {
            Regime::Weak
        }
    }
}

/// Which constant multiplies the weak-driving prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffVariant {
    /// `cos[tan θ · E_K · π/4]`
    QuarterPi,
    /// `cos[tan θ · E_K · π/2]`
    HalfPi,
}

/// Closed-form fidelity estimates. Weak: `cos[tanθ E π/4]` or
/// `cos[tanθ E π/2]`; strong X: `cos[(2/π) sinθ E]`; strong Y:
/// `cos[(2/π) tanθ E]`. The magnitude is returned since fidelity is `|cos|`.
pub fn analytic_fidelity(
    regime: Regime,
    gate: Gate,
    theta: f64,
    e_k: f64,
    variant: CoeffVariant,
) -> Result<f64> {
    if !(e_k >= 0.0) {
        return Err(Error::Precondition(format!("e_k must be non-negative, got {e_k}")));
    }
    let arg = match regime {
        Regime::Weak => match variant {
            CoeffVariant::QuarterPi => theta.tan() * e_k * PI / 4.0,
            CoeffVariant::HalfPi => theta.tan() * e_k * PI / 2.0,
        },
        Regime::Strong => match gate {
            Gate::X => 2.0 / PI * theta.sin() * e_k,
            Gate::Y => 2.0 / PI * theta.tan() * e_k,
        },
    };
    Ok(arg.cos().abs())
}

/// Analytic estimate with the convention that matches simulation: weak
/// regime uses the π/2 constant with `E_K`, strong regime uses `2E_K`.
pub fn predicted_fidelity(params: &DriveParams, gate: Gate, waveform: &FourierWaveform) -> f64 {
    let regime = Regime::of(params);
    let e = match regime {
        Regime::Weak => waveform.tail_error,
        Regime::Strong => waveform.tail_integral(),
    };
    analytic_fidelity(regime, gate, params.theta, e, CoeffVariant::HalfPi).unwrap_or(f64::NAN)
}

/// Level-aware single bang value, used where a bare drive function is needed.
pub fn bang_value(seq: &BangSequence, t: f64) -> f64 {
    let mut a = 0.0;
    for b in &seq.bangs {
        a += b.duration;
        if t < a {
            return b.level.value();
        }
    }
    seq.bangs.last().map_or(0.0, |b| b.level.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bangbang::{strong_pi_sequence, weak_pi_sequence, Bang, Level};
    use crate::fourier::series_of_segments;
    use crate::qmat::exp_su2;

    fn weak(n: usize) -> BangSequence {
        let p = DriveParams::from_theta(1.0, PI / (2.0 * n as f64)).unwrap();
        let gate = if n % 2 == 1 { Gate::X } else { Gate::Y };
        weak_pi_sequence(gate, n, p).unwrap()
    }

    #[test]
    fn bb_examples() {
        let r = propagate_bb(&weak(5), &pauli(Axis::X)).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-9);
        assert!(r.max_unitarity_defect < 1e-12);
        let p = DriveParams::from_theta(1.0, 0.3).unwrap();
        let empty = BangSequence::empty(p);
        let r = propagate_bb(&empty, &CMat::identity(2)).unwrap();
        assert_eq!(r.final_unitary, CMat::identity(2));
        let single = BangSequence::new(vec![Bang::new(Level::Zero, PI)], p).unwrap();
        let r = propagate_bb(&single, &pauli(Axis::Z)).unwrap();
        let expect = pauli(Axis::Z).scale(num_complex::Complex64::new(0.0, -1.0));
        assert!(r.final_unitary.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn zero_waveform_is_pure_drift() {
        let p = DriveParams::from_theta(1.0, 0.3).unwrap();
        let wf = series_of_segments(&[(0.0, 7.0)], 4).unwrap();
        let target = exp_su2(0.0, 0.0, 1.0, 0.5 * p.omega0 * 7.0).unwrap();
        let r = propagate_waveform(&wf, &p, &target, 0.0).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-10);
        assert!(r.max_unitarity_defect < 1e-9);
    }

    #[test]
    fn large_order_approaches_bang_product() {
        let seq = weak(3);
        let wf = series_of(&seq, 30 * 3).unwrap();
        let r = propagate_waveform(&wf, &seq.params, &pauli(Axis::X), 0.0).unwrap();
        let bb = propagate_bb(&seq, &pauli(Axis::X)).unwrap();
        assert!((r.fidelity - bb.fidelity).abs() < 1e-3, "{}", r.fidelity);
    }

    #[test]
    fn integrator_orders() {
        let seq = weak(4);
        let wf = series_of(&seq, 6).unwrap();
        let p = seq.params;
        let ham = |t: f64| drive_hamiltonian(&p, wf.value(t));
        for (integ, min_ratio) in [(Integrator::Midpoint, 3.0), (Integrator::Magnus4, 12.0)] {
            let d = richardson_defects(&ham, 2, wf.period, 64, 3, integ);
            for w in d.windows(2) {
                assert!(w[0] / w[1] >= min_ratio, "{integ:?} {d:?}");
            }
        }
    }

    #[test]
    fn richardson_failure_is_reported() {
        let p = DriveParams::from_theta(1.0, 0.3).unwrap();
        let ham = |t: f64| drive_hamiltonian(&p, (40.0 * t).sin() * 30.0);
        let r = propagate_checked(&ham, &CMat::identity(2), 10.0, 5.0, Integrator::Midpoint);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn magnus_vanishes_for_constant_drive() {
        let p = DriveParams::from_theta(1.0, 0.3).unwrap();
        let seq = BangSequence::new(vec![Bang::new(Level::Plus, 4.0)], p).unwrap();
        let h = magnus_effective(&seq, 3).unwrap();
        assert!(h.tail_error < 1e-12);
        assert!(h.norm < 1e-6 * p.omega0);
    }

    #[test]
    fn magnus_matches_first_order_estimate() {
        // Y gates: h_x tracks (ω₀θ/π) tanθ E_K and the first-order fidelity
        // tracks the simulation
        for n in [2, 4] {
            let seq = weak(n);
            let theta = seq.params.theta;
            for k in [18, 40] {
                let h = magnus_effective(&seq, k).unwrap();
                let closed_hx = theta / PI * theta.tan() * h.tail_error;
                assert!((h.components[0].abs() / closed_hx - 1.0).abs() < 0.2, "n={n} k={k}");
                let wf = series_of(&seq, k).unwrap();
                let sim = propagate_waveform(&wf, &seq.params, &pauli(Axis::Y), 0.0).unwrap();
                let pred = 1.0 - h.predicted_fidelity();
                assert!((pred / sim.infidelity() - 1.0).abs() < 0.2, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn analytic_examples() {
        for (r, g, v) in [
            (Regime::Weak, Gate::X, CoeffVariant::QuarterPi),
            (Regime::Weak, Gate::Y, CoeffVariant::HalfPi),
            (Regime::Strong, Gate::X, CoeffVariant::QuarterPi),
            (Regime::Strong, Gate::Y, CoeffVariant::QuarterPi),
        ] {
            assert_eq!(analytic_fidelity(r, g, 0.4, 0.0, v).unwrap(), 1.0);
        }
        let f = analytic_fidelity(Regime::Weak, Gate::X, PI / 10.0, 0.1, CoeffVariant::QuarterPi)
            .unwrap();
        assert!((f - ((PI / 10.0).tan() * 0.1 * PI / 4.0).cos()).abs() < 1e-15);
        assert!((f - 0.99967).abs() < 5e-6);
        let f = analytic_fidelity(Regime::Strong, Gate::Y, PI / 3.0, 0.05, CoeffVariant::QuarterPi)
            .unwrap();
        assert!((f - 0.99848).abs() < 5e-6);
        assert!(analytic_fidelity(Regime::Weak, Gate::X, 0.3, -1.0, CoeffVariant::QuarterPi).is_err());
    }

    #[test]
    fn strong_waveform_propagates() {
        let p = DriveParams::from_theta(1.0, PI / 3.0).unwrap();
        let seq = strong_pi_sequence(Gate::Y, p).unwrap();
        let wf = series_of(&seq, 40).unwrap();
        let r = propagate_waveform(&wf, &p, &pauli(Axis::Y), 0.0).unwrap();
        assert!(r.fidelity > 0.99 && r.fidelity <= 1.0 + 1e-12);
        assert!(r.richardson_defect < RICHARDSON_TOL);
    }
}
