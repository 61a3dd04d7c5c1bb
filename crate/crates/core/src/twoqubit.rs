//! Two-qubit studies: simultaneous driving of two qubits with opposite
//! drifts, and a SWAP gate built from ZZ evolution and collective π/2 pulses.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::bangbang::BangSequence;
use crate::dynamics::{default_step, drive_hamiltonian, propagate_checked, propagate_steps, Integrator};
use crate::error::{Error, Result};
use crate::fourier::{order_for_bandwidth, series_of, series_of_segments, FourierWaveform};
use crate::qmat::{expm_hermitian_unchecked, fidelity_unchecked, kron, pauli, Axis, CMat};

/// Distance to SWAP below which the delta-pulse schedule is accepted.
pub const SWAP_ORACLE_TOL: f64 = 1e-9;

fn k(a: &CMat, b: &CMat) -> CMat {
    kron(a, b).expect("2x2 operands")
}

fn collective(axis: Axis) -> CMat {
    let id = CMat::identity(2);
    k(&pauli(axis), &id) + k(&id, &pauli(axis))
}

fn zz() -> CMat {
    k(&pauli(Axis::Z), &pauli(Axis::Z))
}

/// `|00⟩, |01⟩, |10⟩, |11⟩ ↦ |00⟩, |10⟩, |01⟩, |11⟩`.
pub fn swap_matrix() -> CMat {
    CMat::from_real(&[
        1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    ])
    .expect("16 entries")
}

/// Fidelity of the simultaneous gate on two qubits with drifts `±ω₀`,
/// both driven by the same truncated waveform.
///
/// Returns `(f2q, f1q)`. The two-qubit target is `U_id ⊗ σx U_id σx` where
/// `U_id` is the ideal bang-bang propagator, and the two-qubit run uses the
/// step count that the single-qubit run converged to.
pub fn opposite_drift_fidelity(seq: &BangSequence, order: usize) -> Result<(f64, f64)> {
    let wf = series_of(seq, order)?;
    opposite_drift_waveform(seq, &wf)
}

pub fn opposite_drift_waveform(seq: &BangSequence, wf: &FourierWaveform) -> Result<(f64, f64)> {
    let params = seq.params;
    let ideal = seq.unitary();
    let h0 = default_step(wf.duration, wf.order, 0.0);
    let ham1 = |t: f64| drive_hamiltonian(&params, wf.value(t));
    let single = propagate_checked(&ham1, &ideal, wf.duration, h0, Integrator::Magnus4)?;

    let sx = pauli(Axis::X);
    let id = CMat::identity(2);
    let drift = (k(&pauli(Axis::Z), &id) - k(&id, &pauli(Axis::Z))).scale_re(0.5 * params.omega0);
    let xc = collective(Axis::X);
    let ham2 = |t: f64| drift + xc.scale_re(0.5 * params.omega_bar * wf.value(t));
    let u2 = propagate_steps(&ham2, 4, wf.duration, single.steps, Integrator::Magnus4);
    let defect = u2.unitarity_defect();
    if defect > 1e-9 {
        return Err(Error::NonUnitary { defect });
    }
    let target = k(&ideal, &(sx * ideal * sx));
    Ok((fidelity_unchecked(&target, &u2), single.fidelity))
}

/// One piece of a SWAP schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SwapSegment {
    /// Free evolution under `J σz σz / 2`.
    Free { duration: f64 },
    /// Collective rectangular pulse `±(Ω/2)(σ¹ + σ²)` about x or y.
    Pulse { axis: char, sign: i8, duration: f64 },
}

impl SwapSegment {
    pub fn duration(&self) -> f64 {
        match *self {
            SwapSegment::Free { duration } | SwapSegment::Pulse { duration, .. } => duration,
        }
    }
}

/// SWAP control schedule with its x and y drive channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoQubitDrive {
    /// ZZ coupling `J`.
    pub coupling: f64,
    /// Pulse amplitude `Ω`.
    pub drive_amp: f64,
    pub segments: Vec<SwapSegment>,
    pub total_time: f64,
    /// Whether `J` stays on while pulses play in the rectangular model.
    pub coupling_during_pulses: bool,
    /// Pulse assignment chosen by the construction oracle, e.g. `"+x|-x|+y|-y"`.
    pub assignment: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot(Option<(Axis, i8)>);

impl Slot {
    const ALL: [Slot; 5] = [
        Slot(None),
        Slot(Some((Axis::X, 1))),
        Slot(Some((Axis::X, -1))),
        Slot(Some((Axis::Y, 1))),
        Slot(Some((Axis::Y, -1))),
    ];

    fn label(self) -> String {
        match self.0 {
            None => "0".into(),
            Some((a, s)) => {
                let sign = if s > 0 { '+' } else { '-' };
                let axis = if a == Axis::X { 'x' } else { 'y' };
                format!("{sign}{axis}")
            }
        }
    }
}

/// Collective π/2 rotation in the delta-pulse limit.
fn delta_pulse(axis: Axis, sign: i8) -> CMat {
    expm_hermitian_unchecked(&collective(axis).scale_re(sign as f64), FRAC_PI_4)
}

fn delta_product(slots: &[Slot; 4]) -> CMat {
    let free = expm_hermitian_unchecked(&zz(), FRAC_PI_4);
    let mut u = CMat::identity(4);
    for (i, slot) in slots.iter().enumerate() {
        if let Some((a, s)) = slot.0 {
            u = delta_pulse(a, s) * u;
        }
        if i < 3 {
            u = free * u;
        }
    }
    u
}

/// SWAP from three `π/(2J)` ZZ periods with collective π/2 pulses of
/// amplitude `omega` in the four gaps around them.
///
/// Every assignment of `{none, ±x, ±y}` to the gaps is checked against the
/// SWAP matrix in the delta-pulse limit; the first passing one with the
/// fewest pulses is kept.
pub fn build_swap_schedule(j: f64, omega: f64) -> Result<TwoQubitDrive> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::NonPositiveInput { name: "J", value: j });
    }
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::NonPositiveInput { name: "omega", value: omega });
    }
    let swap = swap_matrix();
    let mut families: Vec<[Slot; 4]> = Vec::with_capacity(625);
    for a in Slot::ALL {
        for b in Slot::ALL {
            for c in Slot::ALL {
                for d in Slot::ALL {
                    families.push([a, b, c, d]);
                }
            }
        }
    }
    families.sort_by_key(|f| f.iter().filter(|s| s.0.is_some()).count());
    let slots = families
        .into_iter()
        .find(|f| swap.phase_aligned_distance(&delta_product(f)) < SWAP_ORACLE_TOL)
        .ok_or_else(|| Error::ConstructionFailed("no pulse assignment reproduces SWAP".into()))?;

    let t_free = FRAC_PI_2 / j;
    let t_pulse = FRAC_PI_2 / omega;
    let mut segments = Vec::new();
    for (i, slot) in slots.iter().enumerate() {
        if let Some((a, s)) = slot.0 {
            let axis = if a == Axis::X { 'x' } else { 'y' };
            segments.push(SwapSegment::Pulse { axis, sign: s, duration: t_pulse });
        }
        if i < 3 {
            segments.push(SwapSegment::Free { duration: t_free });
        }
    }
    let total_time = segments.iter().map(|s| s.duration()).sum();
    let assignment = slots.iter().map(|s| s.label()).collect::<Vec<_>>().join("|");
    Ok(TwoQubitDrive {
        coupling: j,
        drive_amp: omega,
        segments,
        total_time,
        coupling_during_pulses: true,
        assignment,
    })
}

impl TwoQubitDrive {
    pub fn with_coupling_during_pulses(mut self, on: bool) -> Self {
        self.coupling_during_pulses = on;
        self
    }

    /// Time spent in free ZZ evolution, `3π/(2J)`.
    pub fn free_time(&self) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| match s {
                SwapSegment::Free { duration } => Some(*duration),
                _ => None,
            })
            .sum()
    }

    /// `(level, duration)` segments of one drive channel.
    pub fn profile(&self, channel: char) -> Vec<(f64, f64)> {
        self.segments
            .iter()
            .map(|s| match *s {
                SwapSegment::Pulse { axis, sign, duration } if axis == channel => {
                    (sign as f64, duration)
                }
                other => (0.0, other.duration()),
            })
            .collect()
    }

    pub fn x_profile(&self) -> Vec<(f64, f64)> {
        self.profile('x')
    }

    pub fn y_profile(&self) -> Vec<(f64, f64)> {
        self.profile('y')
    }

    /// `J σzσz/2 + (Ω/2)[fx (σx¹+σx²) + fy (σy¹+σy²)]`.
    pub fn hamiltonian(&self, fx: f64, fy: f64, coupling_on: bool) -> CMat {
        let mut h = collective(Axis::X).scale_re(0.5 * self.drive_amp * fx)
            + collective(Axis::Y).scale_re(0.5 * self.drive_amp * fy);
        if coupling_on {
            h = h + zz().scale_re(0.5 * self.coupling);
        }
        h
    }

    /// Exact propagator of the rectangular-pulse schedule.
    pub fn rect_unitary(&self) -> CMat {
        self.segments.iter().fold(CMat::identity(4), |u, s| {
            let h = match *s {
                SwapSegment::Free { .. } => self.hamiltonian(0.0, 0.0, true),
                SwapSegment::Pulse { axis, sign, .. } => {
                    let f = sign as f64;
                    let (fx, fy) = if axis == 'x' { (f, 0.0) } else { (0.0, f) };
                    self.hamiltonian(fx, fy, self.coupling_during_pulses)
                }
            };
            expm_hermitian_unchecked(&h, s.duration()) * u
        })
    }

    pub fn rect_fidelity(&self) -> f64 {
        fidelity_unchecked(&swap_matrix(), &self.rect_unitary())
    }

    /// Truncated x and y channels for a bandwidth.
    pub fn waveforms(&self, bandwidth: f64) -> Result<(FourierWaveform, FourierWaveform)> {
        let min = 2.0 * PI / self.total_time;
        if bandwidth < min * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "bandwidth {bandwidth} is below 2pi/T = {min}"
            )));
        }
        let order = order_for_bandwidth(bandwidth, self.total_time)?;
        let mut wx = series_of_segments(&self.x_profile(), order)?;
        let mut wy = series_of_segments(&self.y_profile(), order)?;
        wx.bandwidth = bandwidth;
        wy.bandwidth = bandwidth;
        Ok((wx, wy))
    }
}

/// `(f_fato, f_rect)` for the schedule with both channels truncated to
/// `bandwidth`. The coupling stays on throughout the truncated drive.
pub fn fato_swap_fidelity(schedule: &TwoQubitDrive, bandwidth: f64) -> Result<(f64, f64)> {
    let (wx, wy) = schedule.waveforms(bandwidth)?;
    let ham = |t: f64| schedule.hamiltonian(wx.value(t), wy.value(t), true);
    let h0 = default_step(schedule.total_time, wx.order, 0.0);
    let r = propagate_checked(&ham, &swap_matrix(), schedule.total_time, h0, Integrator::Magnus4)?;
    Ok((r.fidelity, schedule.rect_fidelity()))
}

/// Collective drive profile values for plotting: `(t, fx, fy)`.
pub fn sample_profiles(
    schedule: &TwoQubitDrive,
    bandwidth: f64,
    samples: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let (wx, wy) = schedule.waveforms(bandwidth)?;
    Ok(wx.sample(samples).into_iter().map(|(t, fx)| (t, fx, wy.value(t))).collect())
}
