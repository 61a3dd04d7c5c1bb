//! Parameter sweeps over bandwidth, drive strength, calibration errors and
//! SWAP settings, with on-resonance reference runs and CSV output.
//!
//! Every grid point is computed independently and in parallel; records come
//! back in grid order, so the output does not depend on the worker count.
//!
//! All kinds share one CSV schema. Two kinds reuse columns:
//! `time_ratio` stores `T_TO/T_RWA` in `total_time`, and the SWAP kinds store
//! the rectangular-pulse fidelity in `fidelity_analytic`.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bangbang::{pi_sequence, rwa_reference, BangSequence, DriveParams, Gate};
use crate::dynamics::{drive_hamiltonian, predicted_fidelity, propagate_checked, propagate_waveform, Integrator};
use crate::error::{Error, Result};
use crate::fourier::{order_for_bandwidth, series_of, FourierWaveform};
use crate::qmat::{exp_su2_unchecked, fidelity_unchecked, CMat};
use crate::twoqubit::{build_swap_schedule, fato_swap_fidelity};

pub const CSV_HEADER: &str = "x,fidelity_sim,fidelity_analytic,fidelity_rwa,total_time,order_K,e_k";

/// Largest fractional calibration error accepted by [`robustness_point`].
pub const MAX_EPS: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `x` = bandwidth in units of the normalisation frequency.
    Bandwidth,
    /// `x` = θ in radians at fixed bandwidth.
    Theta,
    /// `x` = fractional error in ω₀.
    DetuneOmega0,
    /// `x` = fractional error in Ω̄.
    DetuneAmp,
    /// `x` = θ; `total_time` holds `T_TO/T_RWA`.
    TimeRatio,
    /// `x` = bandwidth in units of `J`.
    SwapBandwidth,
    /// `x` = pulse amplitude in units of `J` at fixed bandwidth.
    SwapAmp,
}

impl SweepKind {
    pub const ALL: [SweepKind; 7] = [
        SweepKind::Bandwidth,
        SweepKind::Theta,
        SweepKind::DetuneOmega0,
        SweepKind::DetuneAmp,
        SweepKind::TimeRatio,
        SweepKind::SwapBandwidth,
        SweepKind::SwapAmp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Bandwidth => "bandwidth",
            SweepKind::Theta => "theta",
            SweepKind::DetuneOmega0 => "detune_omega0",
            SweepKind::DetuneAmp => "detune_amp",
            SweepKind::TimeRatio => "time_ratio",
            SweepKind::SwapBandwidth => "swap_bandwidth",
            SweepKind::SwapAmp => "swap_amp",
        }
    }

    fn is_swap(self) -> bool {
        matches!(self, SweepKind::SwapBandwidth | SweepKind::SwapAmp)
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        SweepKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown sweep kind '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepGate {
    X,
    Y,
    Swap,
}

impl SweepGate {
    pub fn single(self) -> Option<Gate> {
        match self {
            SweepGate::X => Some(Gate::X),
            SweepGate::Y => Some(Gate::Y),
            SweepGate::Swap => None,
        }
    }
}

/// Unit for single-qubit bandwidth values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    Omega0,
    OmegaBar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub gate: SweepGate,
    pub grid: Vec<f64>,
    pub omega0: f64,
    /// Base θ for kinds that do not sweep it.
    pub theta: f64,
    /// Fixed bandwidth (normalisation units, or `J` for SWAP kinds).
    pub bandwidth: Option<f64>,
    /// Fixed order; takes precedence over `bandwidth`.
    pub order: Option<usize>,
    pub normalize: Normalization,
    /// ZZ coupling `J` for SWAP kinds.
    pub coupling: f64,
    /// Pulse amplitude for `swap_bandwidth`, in units of `J`.
    pub drive_amp: f64,
}

/// Fixed bandwidth used when a spec gives neither `bandwidth` nor `order`.
pub const DEFAULT_BANDWIDTH: f64 = 10.0;

impl SweepSpec {
    pub fn new(kind: SweepKind, gate: SweepGate, grid: Vec<f64>) -> Self {
        SweepSpec {
            kind,
            gate,
            grid,
            omega0: 1.0,
            theta: PI / 10.0,
            bandwidth: None,
            order: None,
            normalize: Normalization::Omega0,
            coupling: 1.0,
            drive_amp: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::Precondition("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("sweep grid contains non-finite values".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("sweep grid must be strictly increasing".into()));
        }
        if self.kind.is_swap() != (self.gate == SweepGate::Swap) {
            return Err(Error::Precondition(format!(
                "sweep kind {} does not apply to gate {:?}",
                self.kind, self.gate
            )));
        }
        for (name, v) in [("omega0", self.omega0), ("coupling", self.coupling), ("drive_amp", self.drive_amp)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::NonPositiveInput { name, value: v });
            }
        }
        if let Some(b) = self.bandwidth {
            if !(b > 0.0) {
                return Err(Error::NonPositiveInput { name: "bandwidth", value: b });
            }
        }
        Ok(())
    }

    fn unit(&self, params: &DriveParams) -> f64 {
        match self.normalize {
            Normalization::Omega0 => params.omega0,
            Normalization::OmegaBar => params.omega_bar,
        }
    }

    /// Fixed order for kinds that hold the bandwidth constant.
    fn fixed_order(&self, params: &DriveParams, period: f64) -> Result<usize> {
        if let Some(k) = self.order {
            return Ok(k);
        }
        let b = self.bandwidth.unwrap_or(DEFAULT_BANDWIDTH) * self.unit(params);
        order_for_bandwidth(b, period)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub x: f64,
    pub fidelity_sim: f64,
    pub fidelity_analytic: f64,
    pub fidelity_rwa: f64,
    pub total_time: f64,
    pub order_k: usize,
    pub e_k: f64,
    /// Set when this grid point failed; the numeric columns are then NaN.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRecord {
    fn blank(x: f64) -> Self {
        SweepRecord {
            x,
            fidelity_sim: f64::NAN,
            fidelity_analytic: f64::NAN,
            fidelity_rwa: f64::NAN,
            total_time: f64::NAN,
            order_k: 0,
            e_k: f64::NAN,
            error: None,
        }
    }

    fn failed(x: f64, e: &Error) -> Self {
        SweepRecord { error: Some(e.to_string()), ..SweepRecord::blank(x) }
    }
}

/// Runs a sweep on the global rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let ctx = Context::prepare(spec);
    Ok(spec
        .grid
        .par_iter()
        .map(|&x| ctx.point(spec, x).unwrap_or_else(|e| SweepRecord::failed(x, &e)))
        .collect())
}

/// Runs a sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<Vec<SweepRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

/// Work shared by all grid points of one sweep.
struct Context {
    base: Option<Result<(DriveParams, BangSequence)>>,
    rwa: Option<f64>,
}

impl Context {
    fn prepare(spec: &SweepSpec) -> Context {
        let needs_base = matches!(
            spec.kind,
            SweepKind::Bandwidth | SweepKind::DetuneOmega0 | SweepKind::DetuneAmp
        );
        let base = match (needs_base, spec.gate.single()) {
            (true, Some(gate)) => Some(
                DriveParams::from_theta(spec.omega0, spec.theta)
                    .and_then(|p| pi_sequence(gate, p).map(|s| (p, s))),
            ),
            _ => None,
        };
        let rwa = match (&base, spec.kind, spec.gate.single()) {
            (Some(Ok((p, _))), SweepKind::Bandwidth, Some(gate)) => {
                rwa_infidelity(gate, p).ok().map(|inf| 1.0 - inf)
            }
            _ => None,
        };
        Context { base, rwa }
    }

    fn base(&self) -> Result<&(DriveParams, BangSequence)> {
        match &self.base {
            Some(Ok(b)) => Ok(b),
            Some(Err(e)) => Err(e.clone()),
            None => Err(Error::Precondition("sweep has no base sequence".into())),
        }
    }

    fn point(&self, spec: &SweepSpec, x: f64) -> Result<SweepRecord> {
        match spec.kind {
            SweepKind::Bandwidth => {
                let (params, seq) = self.base()?;
                let gate = spec.gate.single().expect("validated");
                let order = order_for_bandwidth(x * spec.unit(params), seq.total_time)?;
                let mut rec = fidelity_point(gate, params, seq, order)?;
                rec.x = x;
                rec.fidelity_rwa = self.rwa.unwrap_or(f64::NAN);
                Ok(rec)
            }
            SweepKind::Theta => {
                let gate = spec.gate.single().expect("validated");
                let params = DriveParams::from_theta(spec.omega0, x)?;
                let seq = pi_sequence(gate, params)?;
                let order = spec.fixed_order(&params, seq.total_time)?;
                let mut rec = fidelity_point(gate, &params, &seq, order)?;
                rec.x = x;
                if params.theta <= FRAC_PI_4 {
                    rec.fidelity_rwa = 1.0 - rwa_infidelity(gate, &params)?;
                }
                Ok(rec)
            }
            SweepKind::DetuneOmega0 | SweepKind::DetuneAmp => {
                let (params, seq) = self.base()?;
                let gate = spec.gate.single().expect("validated");
                let order = spec.fixed_order(params, seq.total_time)?;
                let wf = series_of(seq, order)?;
                let (ew, ea) = if spec.kind == SweepKind::DetuneOmega0 { (x, 0.0) } else { (0.0, x) };
                let mut rec = perturbed_point(gate, params, &wf, ew, ea)?;
                rec.x = x;
                Ok(rec)
            }
            SweepKind::TimeRatio => {
                let params = DriveParams::from_theta(spec.omega0, x)?;
                let (_, ratio) = rwa_reference(&params)?;
                Ok(SweepRecord { total_time: ratio, ..SweepRecord::blank(x) })
            }
            SweepKind::SwapBandwidth => {
                let j = spec.coupling;
                let schedule = build_swap_schedule(j, spec.drive_amp * j)?;
                swap_point(x, &schedule, x * j)
            }
            SweepKind::SwapAmp => {
                let j = spec.coupling;
                let schedule = build_swap_schedule(j, x * j)?;
                let bw = spec.bandwidth.unwrap_or(400.0) * j;
                swap_point(x, &schedule, bw)
            }
        }
    }
}

fn fidelity_point(
    gate: Gate,
    params: &DriveParams,
    seq: &BangSequence,
    order: usize,
) -> Result<SweepRecord> {
    let wf = series_of(seq, order)?;
    let r = propagate_waveform(&wf, params, &gate.target(), 0.0)?;
    Ok(SweepRecord {
        fidelity_sim: r.fidelity,
        fidelity_analytic: predicted_fidelity(params, gate, &wf),
        total_time: seq.total_time,
        order_k: order,
        e_k: wf.tail_error,
        ..SweepRecord::blank(f64::NAN)
    })
}

fn swap_point(x: f64, schedule: &crate::twoqubit::TwoQubitDrive, bandwidth: f64) -> Result<SweepRecord> {
    let (wx, _) = schedule.waveforms(bandwidth)?;
    let (f_fato, f_rect) = fato_swap_fidelity(schedule, bandwidth)?;
    Ok(SweepRecord {
        fidelity_sim: f_fato,
        fidelity_analytic: f_rect,
        total_time: schedule.total_time,
        order_k: wx.order,
        ..SweepRecord::blank(x)
    })
}

/// Propagates a nominal waveform under perturbed physics.
fn perturbed_point(
    gate: Gate,
    nominal: &DriveParams,
    wf: &FourierWaveform,
    eps_omega0: f64,
    eps_amp: f64,
) -> Result<SweepRecord> {
    if eps_omega0.abs() > MAX_EPS || eps_amp.abs() > MAX_EPS {
        return Err(Error::Precondition(format!(
            "fractional errors must satisfy |eps| <= {MAX_EPS}"
        )));
    }
    let actual = nominal.perturbed(eps_omega0, eps_amp)?;
    let r = propagate_waveform(wf, &actual, &gate.target(), 0.0)?;
    let fidelity_rwa = if nominal.theta <= FRAC_PI_4 {
        1.0 - rwa_infidelity_perturbed(gate, nominal, eps_omega0, eps_amp)?
    } else {
        f64::NAN
    };
    Ok(SweepRecord {
        fidelity_sim: r.fidelity,
        fidelity_rwa,
        total_time: wf.duration,
        order_k: wf.order,
        e_k: wf.tail_error,
        ..SweepRecord::blank(if eps_amp == 0.0 { eps_omega0 } else { eps_amp })
    })
}

/// Fidelity of the order-`K` waveform for `gate` when the physical ω₀ and Ω̄
/// deviate by the given fractions. The waveform is synthesised for the
/// nominal parameters; `fidelity_rwa` holds the on-resonance run with the
/// same errors when `θ ≤ π/4`.
pub fn robustness_point(
    gate: Gate,
    params: &DriveParams,
    order: usize,
    eps_omega0: f64,
    eps_amp: f64,
) -> Result<SweepRecord> {
    let seq = pi_sequence(gate, *params)?;
    let wf = series_of(&seq, order)?;
    perturbed_point(gate, params, &wf, eps_omega0, eps_amp)
}

/// Infidelity of on-resonance driving `Ω̄ cos(ω₀t)` (X) or `Ω̄ sin(ω₀t)` (Y)
/// for `T = 2π/Ω̄`, judged in the frame rotating at ω₀.
pub fn rwa_infidelity(gate: Gate, params: &DriveParams) -> Result<f64> {
    rwa_infidelity_perturbed(gate, params, 0.0, 0.0)
}

/// As [`rwa_infidelity`], with the drive tuned to the nominal parameters but
/// the qubit evolving under `ω₀(1+eps_omega0)` and `Ω̄(1+eps_amp)`.
pub fn rwa_infidelity_perturbed(
    gate: Gate,
    params: &DriveParams,
    eps_omega0: f64,
    eps_amp: f64,
) -> Result<f64> {
    let (t_rwa, _) = rwa_reference(params)?;
    let actual = params.perturbed(eps_omega0, eps_amp)?;
    let w0 = params.omega0;
    let ham = |t: f64| {
        let f = match gate {
            Gate::X => (w0 * t).cos(),
            Gate::Y => (w0 * t).sin(),
        };
        drive_hamiltonian(&actual, f)
    };
    let h0 = 2.0 * PI / actual.omega.max(w0) / 64.0;
    let r = propagate_checked(&ham, &CMat::identity(2), t_rwa, h0, Integrator::Magnus4)?;
    let frame = exp_su2_unchecked(0.0, 0.0, 1.0, -0.5 * w0 * t_rwa);
    Ok(1.0 - fidelity_unchecked(&gate.target(), &(frame * r.final_unitary)))
}

/// `θ = π/(2n)` for `n = 2..=16` with the parity that `gate` requires, increasing.
pub fn weak_theta_grid(gate: Gate) -> Vec<f64> {
    let mut g: Vec<f64> = (2..=16usize)
        .filter(|n| match gate {
            Gate::X => n % 2 == 1,
            Gate::Y => n % 2 == 0,
        })
        .map(|n| PI / (2.0 * n as f64))
        .collect();
    g.reverse();
    g
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}

/// CSV with [`CSV_HEADER`], shortest round-trip decimals, `nan` for NaN.
pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_f64(r.x),
            fmt_f64(r.fidelity_sim),
            fmt_f64(r.fidelity_analytic),
            fmt_f64(r.fidelity_rwa),
            fmt_f64(r.total_time),
            r.order_k,
            fmt_f64(r.e_k)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in SweepKind::ALL {
            assert_eq!(k.name().parse::<SweepKind>().unwrap(), k);
        }
        assert!("nope".parse::<SweepKind>().is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec::new(SweepKind::Bandwidth, SweepGate::X, vec![]);
        assert!(s.validate().is_err());
        s.grid = vec![1.0, 1.0];
        assert!(s.validate().is_err());
        s.grid = vec![1.0, 2.0];
        s.validate().unwrap();
        s.gate = SweepGate::Swap;
        assert!(s.validate().is_err());
    }

    #[test]
    fn time_ratio_endpoint() {
        let s = SweepSpec::new(SweepKind::TimeRatio, SweepGate::X, vec![0.1, FRAC_PI_4]);
        let r = run_sweep(&s).unwrap();
        assert!((r[1].total_time - 0.83368).abs() < 5e-4);
        assert!(r.iter().all(|x| x.total_time < 1.0));
    }

    #[test]
    fn zero_detuning_is_baseline() {
        let p = DriveParams::from_theta(1.0, PI / 6.0).unwrap();
        let seq = pi_sequence(Gate::X, p).unwrap();
        let wf = series_of(&seq, 8).unwrap();
        let base = propagate_waveform(&wf, &p, &Gate::X.target(), 0.0).unwrap();
        let mut s = SweepSpec::new(SweepKind::DetuneOmega0, SweepGate::X, vec![-0.01, 0.0, 0.01]);
        s.theta = PI / 6.0;
        s.order = Some(8);
        let r = run_sweep(&s).unwrap();
        assert_eq!(r[1].fidelity_sim, base.fidelity);
    }

    #[test]
    fn errors_stay_local() {
        let mut s = SweepSpec::new(SweepKind::DetuneAmp, SweepGate::X, vec![0.0, 0.5]);
        s.theta = PI / 6.0;
        s.order = Some(4);
        let r = run_sweep(&s).unwrap();
        assert!(r[0].error.is_none() && r[0].fidelity_sim > 0.0);
        assert!(r[1].error.is_some() && r[1].fidelity_sim.is_nan());
        assert!(to_csv(&r).lines().nth(2).unwrap().starts_with("0.5,nan,"));
    }

    #[test]
    fn rwa_weak_limit_and_errors() {
        let p = crate::bangbang::derive_params(1.0, 0.01).unwrap();
        assert!(rwa_infidelity(Gate::X, &p).unwrap() < 1e-3);
        let strong = DriveParams::from_theta(1.0, PI / 3.0).unwrap();
        assert!(matches!(rwa_infidelity(Gate::X, &strong), Err(Error::StrongRegime { .. })));
    }

    #[test]
    fn theta_grid_parity() {
        let gx = weak_theta_grid(Gate::X);
        assert_eq!(gx.len(), 7);
        assert!(gx.windows(2).all(|w| w[0] < w[1]));
        assert!((gx.last().unwrap() - PI / 6.0).abs() < 1e-15);
        assert_eq!(weak_theta_grid(Gate::Y).len(), 8);
    }

    #[test]
    fn csv_format() {
        let rec = SweepRecord { x: 0.5, order_k: 3, ..SweepRecord::blank(0.5) };
        assert_eq!(to_csv(&[rec]), format!("{CSV_HEADER}\n0.5,nan,nan,nan,nan,3,nan\n"));
    }
}
