//! Time-optimal bang-bang sequences for a qubit with drift `ω₀σz/2` and a
//! bounded drive `Ω(t)σx/2`, `|Ω| ≤ Ω̄`.
//!
//! A bang holds the normalised drive `f = Ω/Ω̄` at one of `{+1, 0, −1}`. The
//! nonzero bangs rotate about `(±sinθ, 0, cosθ)` at rate `ω`; a singular bang
//! (`f = 0`) rotates about `z` at rate `ω₀`.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::qmat::{exp_su2_unchecked, fidelity_unchecked, pauli, Axis, CMat};
use crate::quadrature::sine_integral;

/// Distance (max entry, phase aligned) under which a synthesised sequence
/// counts as reaching its target.
pub const REACH_TOL: f64 = 1e-9;

/// Tolerance when matching θ against the analytic family `π/(2n)`.
pub const THETA_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    X,
    Y,
}

impl Gate {
    /// The π rotation as a Pauli matrix (equal to `exp(−iπσ/2)` up to phase).
    pub fn target(self) -> CMat {
        match self {
            Gate::X => pauli(Axis::X),
            Gate::Y => pauli(Axis::Y),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::X => "X",
            Gate::Y => "Y",
        })
    }
}

/// Physical frame: drift `ω₀`, drive bound `Ω̄`, plus derived `θ` and `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveParams {
    pub omega0: f64,
    pub omega_bar: f64,
    /// `arctan(Ω̄/ω₀)`, half the angle between the `±` rotation axes.
    pub theta: f64,
    /// `√(ω₀² + Ω̄²)`, rotation rate during a nonzero bang.
    pub omega: f64,
}

pub fn derive_params(omega0: f64, omega_bar: f64) -> Result<DriveParams> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::NonPositiveInput { name: "omega0", value: omega0 });
    }
    if !(omega_bar > 0.0) || !omega_bar.is_finite() {
        return Err(Error::NonPositiveInput { name: "omega_bar", value: omega_bar });
    }
    Ok(DriveParams {
        omega0,
        omega_bar,
        theta: (omega_bar / omega0).atan(),
        omega: omega0.hypot(omega_bar),
    })
}

impl DriveParams {
    /// Parameters with a prescribed `θ ∈ (0, π/2)`.
    pub fn from_theta(omega0: f64, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(Error::Precondition(format!("theta must lie in (0, pi/2), got {theta}")));
        }
        let mut p = derive_params(omega0, omega0 * theta.tan())?;
        p.theta = theta;
        Ok(p)
    }

    /// The same drive with `ω₀` and `Ω̄` scaled by `(1+eps_omega0)` and `(1+eps_amp)`.
    pub fn perturbed(&self, eps_omega0: f64, eps_amp: f64) -> Result<Self> {
        derive_params(self.omega0 * (1.0 + eps_omega0), self.omega_bar * (1.0 + eps_amp))
    }

    pub fn is_strong(&self) -> bool {
        self.theta > FRAC_PI_4
    }

    /// Smallest bandwidth that resolves the fastest bang dynamics.
    pub fn min_bandwidth(&self) -> f64 {
        self.omega
    }

    /// Exact propagator of a single bang.
    pub fn bang_unitary(&self, level: Level, duration: f64) -> CMat {
        match level {
            Level::Zero => exp_su2_unchecked(0.0, 0.0, 1.0, 0.5 * self.omega0 * duration),
            l => {
                let s = l.value() * self.omega_bar / self.omega;
                let c = self.omega0 / self.omega;
                exp_su2_unchecked(s, 0.0, c, 0.5 * self.omega * duration)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Level {
    Plus,
    Zero,
    Minus,
}

impl Level {
    pub fn value(self) -> f64 {
        i8::from(self) as f64
    }

    pub fn flipped(self) -> Level {
        match self {
            Level::Plus => Level::Minus,
            Level::Zero => Level::Zero,
            Level::Minus => Level::Plus,
        }
    }
}

impl From<Level> for i8 {
    fn from(l: Level) -> i8 {
        match l {
            Level::Plus => 1,
            Level::Zero => 0,
            Level::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Level {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Level::Plus),
            0 => Ok(Level::Zero),
            -1 => Ok(Level::Minus),
            other => Err(format!("bang level must be -1, 0 or 1, got {other}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bang {
    pub level: Level,
    pub duration: f64,
}

impl Bang {
    pub fn new(level: Level, duration: f64) -> Self {
        Bang { level, duration }
    }
}

/// Which reading of the strong-driving `t₂ˣ` expression produced the middle bang.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum T2xParsing {
    /// `t₂ = (2π − 2 arccsc[2 sin θ]) / ω`
    WholeOverOmega,
    /// `t₂ = 2π − 2 arccsc[2 sin θ] / ω`
    OffsetOverOmega,
}

/// How a sequence was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Construction {
    Weak { n: usize },
    StrongX { t2x_parsing: T2xParsing },
    StrongY,
    Search { pattern: String, infidelity: f64 },
    Custom,
}

/// Ordered bangs with their drive frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BangSequence {
    pub bangs: Vec<Bang>,
    pub params: DriveParams,
    pub total_time: f64,
    pub construction: Construction,
    /// Set for sequences produced by the time-optimal constructions.
    pub time_optimal: bool,
}

impl BangSequence {
    /// Validates and wraps a list of bangs. Durations must be positive and
    /// consecutive bangs must differ in level.
    pub fn new(bangs: Vec<Bang>, params: DriveParams) -> Result<Self> {
        for (i, b) in bangs.iter().enumerate() {
            if !(b.duration > 0.0) || !b.duration.is_finite() {
                return Err(Error::InvalidSequence(format!(
                    "bang {i} has non-positive duration {}",
                    b.duration
                )));
            }
        }
        if let Some(i) = bangs.windows(2).position(|w| w[0].level == w[1].level) {
            return Err(Error::InvalidSequence(format!(
                "bangs {i} and {} share level {}",
                i + 1,
                i8::from(bangs[i].level)
            )));
        }
        let total_time = bangs.iter().map(|b| b.duration).sum();
        Ok(BangSequence {
            bangs,
            params,
            total_time,
            construction: Construction::Custom,
            time_optimal: false,
        })
    }

    /// Drops vanishing bangs and merges neighbours with equal level.
    pub fn normalized(bangs: Vec<Bang>, params: DriveParams, min_duration: f64) -> Result<Self> {
        let mut out: Vec<Bang> = Vec::with_capacity(bangs.len());
        for b in bangs.into_iter().filter(|b| b.duration > min_duration) {
            match out.last_mut() {
                Some(last) if last.level == b.level => last.duration += b.duration,
                _ => out.push(b),
            }
        }
        Self::new(out, params)
    }

    pub fn empty(params: DriveParams) -> Self {
        BangSequence {
            bangs: vec![],
            params,
            total_time: 0.0,
            construction: Construction::Custom,
            time_optimal: true,
        }
    }

    fn with_construction(mut self, construction: Construction, time_optimal: bool) -> Self {
        self.construction = construction;
        self.time_optimal = time_optimal;
        self
    }

    pub fn len(&self) -> usize {
        self.bangs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bangs.is_empty()
    }

    /// `(level, duration)` pairs, the form the Fourier module consumes.
    pub fn segments(&self) -> Vec<(f64, f64)> {
        self.bangs.iter().map(|b| (b.level.value(), b.duration)).collect()
    }

    /// Ideal product of the exact bang propagators, in time order.
    pub fn unitary(&self) -> CMat {
        self.bangs
            .iter()
            .fold(CMat::identity(2), |u, b| self.params.bang_unitary(b.level, b.duration) * u)
    }

    /// Start times of every bang plus the final time.
    pub fn switch_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = vec![0.0];
        for b in &self.bangs {
            t += b.duration;
            out.push(t);
        }
        out
    }

    pub fn t2x_parsing(&self) -> Option<T2xParsing> {
        match self.construction {
            Construction::StrongX { t2x_parsing } => Some(t2x_parsing),
            _ => None,
        }
    }

    /// Durations of interior nonzero bangs must be equal and at least `π/ω`.
    pub fn check_time_optimal_shape(&self) -> Result<()> {
        let n = self.bangs.len();
        if n < 3 {
            return Ok(());
        }
        let interior: Vec<f64> = self.bangs[1..n - 1]
            .iter()
            .filter(|b| b.level != Level::Zero)
            .map(|b| b.duration)
            .collect();
        let min_t = PI / self.params.omega;
        if let Some(&first) = interior.first() {
            if interior.iter().any(|d| (d - first).abs() > 1e-10) {
                return Err(Error::InvalidSequence("interior bangs differ in duration".into()));
            }
            if first < min_t - 1e-10 {
                return Err(Error::InvalidSequence(format!(
                    "interior bang duration {first} is below pi/omega = {min_t}"
                )));
            }
        }
        Ok(())
    }
}

fn reaches(seq: &BangSequence, target: &CMat) -> f64 {
    target.phase_aligned_distance(&seq.unitary())
}

/// `n` alternating bangs of duration `π/ω` for `θ = π/(2n)`; odd `n` gives
/// an X π rotation, even `n` a Y one.
pub fn weak_pi_sequence(gate: Gate, n: usize, params: DriveParams) -> Result<BangSequence> {
    if n < 2 {
        return Err(Error::Precondition(format!("weak sequences need n >= 2, got {n}")));
    }
    let expected = PI / (2.0 * n as f64);
    if (params.theta - expected).abs() > THETA_MATCH_TOL {
        return Err(Error::ThetaMismatch { theta: params.theta, expected, n });
    }
    let parity_ok = match gate {
        Gate::X => n % 2 == 1,
        Gate::Y => n % 2 == 0,
    };
    if !parity_ok {
        return Err(Error::ParityMismatch { gate: gate.to_string(), n });
    }
    let t = PI / params.omega;
    let bangs = (0..n)
        .map(|i| Bang::new(if i % 2 == 0 { Level::Plus } else { Level::Minus }, t))
        .collect();
    let seq = BangSequence::new(bangs, params)?.with_construction(Construction::Weak { n }, true);
    let d = reaches(&seq, &gate.target());
    if d > REACH_TOL {
        return Err(Error::ConstructionFailed(format!(
            "weak {gate} sequence misses its target by {d:e}"
        )));
    }
    Ok(seq)
}

/// Three-bang π rotations for `θ > π/4`.
///
/// X uses `(+1, −1, +1)` with equal outer bangs `2 arccsc[2 sin θ]/ω`; both
/// readings of the middle-bang expression are tried and the one that
/// reaches σx is kept. Y uses a singular middle bang of duration
/// `2 arctan[√(tan²θ − 1)]/ω₀` and outer bangs `2 arccot[√(−cos 2θ)]/ω`;
/// the outer levels are resolved the same way.
pub fn strong_pi_sequence(gate: Gate, params: DriveParams) -> Result<BangSequence> {
    let theta = params.theta;
    if theta <= FRAC_PI_4 {
        return Err(Error::WeakRegime { theta });
    }
    let (omega, omega0) = (params.omega, params.omega0);
    let target = gate.target();
    match gate {
        Gate::X => {
            let acsc = (1.0 / (2.0 * theta.sin())).asin();
            let outer = 2.0 * acsc / omega;
            let candidates = [
                (T2xParsing::WholeOverOmega, (2.0 * PI - 2.0 * acsc) / omega),
                (T2xParsing::OffsetOverOmega, 2.0 * PI - 2.0 * acsc / omega),
            ];
            let mut best = f64::INFINITY;
            for (parsing, middle) in candidates {
                let bangs = vec![
                    Bang::new(Level::Plus, outer),
                    Bang::new(Level::Minus, middle),
                    Bang::new(Level::Plus, outer),
                ];
                let seq = BangSequence::new(bangs, params)?
                    .with_construction(Construction::StrongX { t2x_parsing: parsing }, true);
                let d = reaches(&seq, &target);
                if d < REACH_TOL {
                    return Ok(seq);
                }
                best = best.min(d);
            }
            Err(Error::ConstructionFailed(format!(
                "no t2x parsing reaches sigma_x (closest {best:e})"
            )))
        }
        Gate::Y => {
            let outer = 2.0 * (1.0 / (-(2.0 * theta).cos()).sqrt()).atan() / omega;
            let middle = 2.0 * (theta.tan().powi(2) - 1.0).sqrt().atan() / omega0;
            let mut best = f64::INFINITY;
            for last in [Level::Plus, Level::Minus] {
                let bangs = vec![
                    Bang::new(Level::Plus, outer),
                    Bang::new(Level::Zero, middle),
                    Bang::new(last, outer),
                ];
                let seq = BangSequence::new(bangs, params)?
                    .with_construction(Construction::StrongY, true);
                let d = reaches(&seq, &target);
                if d < REACH_TOL {
                    return Ok(seq);
                }
                best = best.min(d);
            }
            Err(Error::ConstructionFailed(format!(
                "no outer-level assignment reaches sigma_y (closest {best:e})"
            )))
        }
    }
}

/// Picks the analytic construction for `gate` when one applies (strong
/// regime, or `θ = π/(2n)` with the right parity) and falls back to
/// [`search_to_sequence`] otherwise.
pub fn pi_sequence(gate: Gate, params: DriveParams) -> Result<BangSequence> {
    if params.is_strong() {
        return strong_pi_sequence(gate, params);
    }
    let n = (PI / (2.0 * params.theta)).round() as usize;
    let on_grid = n >= 2 && (params.theta - PI / (2.0 * n as f64)).abs() <= THETA_MATCH_TOL;
    let parity_ok = match gate {
        Gate::X => n % 2 == 1,
        Gate::Y => n % 2 == 0,
    };
    if on_grid && parity_ok {
        return weak_pi_sequence(gate, n, params);
    }
    let n_max = search_bang_cap(&params);
    search_to_sequence(&gate.target(), params, n_max, 1e-10)
}

/// Upper bound on the bang count: at most `⌊π/(2θ)⌋ + 1` switches.
pub fn search_bang_cap(params: &DriveParams) -> usize {
    (PI / (2.0 * params.theta)).floor() as usize + 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pattern {
    Alternating(Level),
    SingularMiddle(Level),
}

impl Pattern {
    fn levels(self, n: usize) -> Vec<Level> {
        let (start, singular) = match self {
            Pattern::Alternating(s) => (s, false),
            Pattern::SingularMiddle(s) => (s, true),
        };
        let mut out: Vec<Level> =
            (0..n).map(|i| if i % 2 == 0 { start } else { start.flipped() }).collect();
        if singular {
            out[n / 2] = Level::Zero;
        }
        out
    }

    fn label(self, n: usize) -> String {
        let levels: Vec<String> = self.levels(n).iter().map(|&l| i8::from(l).to_string()).collect();
        format!("[{}]", levels.join(","))
    }

    fn for_count(n: usize) -> Vec<Pattern> {
        let mut out = vec![Pattern::Alternating(Level::Plus), Pattern::Alternating(Level::Minus)];
        if n == 1 {
            out.push(Pattern::SingularMiddle(Level::Plus));
        } else if n % 2 == 1 {
            out.push(Pattern::SingularMiddle(Level::Plus));
            out.push(Pattern::SingularMiddle(Level::Minus));
        }
        out
    }
}

/// Expands the `(t_i, t_m, t_f)` parametrisation into per-bang durations.
fn durations(x: &[f64], n: usize) -> Vec<f64> {
    match n {
        1 => vec![x[0].abs()],
        2 => vec![x[0].abs(), x[1].abs()],
        _ => {
            let mut d = vec![x[1].abs(); n];
            d[0] = x[0].abs();
            d[n - 1] = x[2].abs();
            d
        }
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    total_time: f64,
    bangs: usize,
    key: Vec<f64>,
    sequence: BangSequence,
}

impl Candidate {
    /// Shorter time first, then fewer bangs, then lexicographic parameters.
    fn cmp(&self, other: &Candidate) -> Ordering {
        let scale = self.total_time.abs().max(other.total_time.abs()).max(1.0);
        if (self.total_time - other.total_time).abs() > 1e-9 * scale {
            return self.total_time.total_cmp(&other.total_time);
        }
        self.bangs.cmp(&other.bangs).then_with(|| {
            self.key
                .iter()
                .zip(&other.key)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    }
}

/// Multi-start search for the shortest bang sequence realising `target`.
///
/// Bang counts `1..=n_max` are tried with alternating `±1` levels and with
/// a singular middle bang, both starting signs. Each pattern is described
/// by `(t_i, t_m, t_f)` with all interior bangs equal. An `8^d` grid of
/// starts over `[0, 2π/ω]^d` seeds Nelder–Mead runs on the phase-aligned
/// distance to the target; among the runs with infidelity below `tol` the
/// shortest total time wins.
pub fn search_to_sequence(
    target: &CMat,
    params: DriveParams,
    n_max: usize,
    tol: f64,
) -> Result<BangSequence> {
    if target.dim() != 2 {
        return Err(Error::DimMismatch { left: target.dim(), right: 2 });
    }
    if !target.is_unitary() {
        return Err(Error::NonUnitary { defect: target.unitarity_defect() });
    }
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::NonPositiveInput { name: "tol", value: tol });
    }
    if 1.0 - fidelity_unchecked(target, &CMat::identity(2)) < tol {
        let mut seq = BangSequence::empty(params);
        seq.construction = Construction::Search { pattern: "[]".into(), infidelity: 0.0 };
        return Ok(seq);
    }

    let t_min_interior = PI / params.omega;
    let span = 2.0 * PI / params.omega;
    let mut best: Option<Candidate> = None;
    let mut best_residual = f64::INFINITY;

    for n in 1..=n_max {
        for pattern in Pattern::for_count(n) {
            // every interior nonzero bang lasts at least π/ω
            let interior_nonzero = pattern.levels(n)[1..n.saturating_sub(1).max(1)]
                .iter()
                .filter(|&&l| l != Level::Zero)
                .count();
            let lower_bound = interior_nonzero as f64 * t_min_interior;
            if let Some(b) = &best {
                if lower_bound >= b.total_time * (1.0 - 1e-12) {
                    continue;
                }
            }
            let (found, residual) = search_pattern(target, &params, pattern, n, span, tol);
            best_residual = best_residual.min(residual);
            for cand in found {
                let better = match &best {
                    None => true,
                    Some(b) => cand.cmp(b) == Ordering::Less,
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    match best {
        Some(c) => Ok(c.sequence),
        None => Err(Error::NotFound { best_infidelity: best_residual }),
    }
}

fn search_pattern(
    target: &CMat,
    params: &DriveParams,
    pattern: Pattern,
    n: usize,
    span: f64,
    tol: f64,
) -> (Vec<Candidate>, f64) {
    let levels = pattern.levels(n);
    let dim = n.min(3);
    let grid: Vec<f64> = (0..8).map(|j| (j as f64 + 0.5) / 8.0 * span).collect();
    let starts: Vec<Vec<f64>> = (0..8usize.pow(dim as u32))
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let v = grid[idx % 8];
                    idx /= 8;
                    v
                })
                .collect()
        })
        .collect();

    let t_min_interior = PI / params.omega;
    let interior_constrained = n >= 3 && levels[1] != Level::Zero || n >= 5;
    let objective = |x: &[f64]| -> f64 {
        let d = durations(x, n);
        let u = levels
            .iter()
            .zip(&d)
            .fold(CMat::identity(2), |u, (&l, &t)| params.bang_unitary(l, t) * u);
        let mut v = target.phase_aligned_frobenius(&u);
        if interior_constrained {
            v += 10.0 * (t_min_interior - x[1].abs()).max(0.0);
        }
        v
    };

    let opts = NelderMeadOptions {
        initial_step: span / 16.0,
        f_tol: 1e-15,
        x_tol: 1e-13,
        max_evals: 2500,
    };
    let results: Vec<(f64, Option<Candidate>)> = starts
        .par_iter()
        .map(|x0| {
            let first = nelder_mead(objective, x0, &opts);
            // a second pass from the best vertex recovers from premature collapse
            let polish = NelderMeadOptions { initial_step: span / 1000.0, ..opts };
            let r = nelder_mead(objective, &first.x, &polish);
            let d = durations(&r.x, n);
            if interior_constrained && r.x[1].abs() < t_min_interior - 1e-10 {
                return (f64::INFINITY, None);
            }
            let bangs: Vec<Bang> = levels.iter().zip(&d).map(|(&l, &t)| Bang::new(l, t)).collect();
            let Ok(seq) = BangSequence::normalized(bangs, *params, 1e-10 * span) else {
                return (f64::INFINITY, None);
            };
            let infidelity = 1.0 - fidelity_unchecked(target, &seq.unitary());
            if infidelity >= tol || seq.is_empty() {
                return (infidelity, None);
            }
            let mut key = r.x.iter().map(|v| v.abs()).collect::<Vec<_>>();
            key.resize(3, 0.0);
            let construction =
                Construction::Search { pattern: pattern.label(n), infidelity: infidelity.max(0.0) };
            let sequence = seq.with_construction(construction, true);
            let cand = Candidate {
                total_time: sequence.total_time,
                bangs: sequence.len(),
                key,
                sequence,
            };
            (infidelity, Some(cand))
        })
        .collect();

    let residual = results.iter().map(|(r, _)| *r).fold(f64::INFINITY, f64::min);
    let mut found: Vec<Candidate> = Vec::new();
    for (_, c) in results.into_iter() {
        if let Some(c) = c {
            found.push(c);
        }
    }
    (found, residual)
}

/// On-resonance reference time `2π/Ω̄` and the Gibbs-corrected time ratio
/// `Si(π) sin θ / (2θ)`. Only defined for `θ ≤ π/4`.
pub fn rwa_reference(params: &DriveParams) -> Result<(f64, f64)> {
    if params.theta > FRAC_PI_4 {
        return Err(Error::StrongRegime { theta: params.theta });
    }
    let t_rwa = 2.0 * PI / params.omega_bar;
    let ratio = sine_integral(PI) * params.theta.sin() / (2.0 * params.theta);
    Ok((t_rwa, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn theta_frac(n: usize) -> DriveParams {
        DriveParams::from_theta(1.0, PI / (2.0 * n as f64)).unwrap()
    }

    #[test]
    fn derive_params_examples() {
        let p = derive_params(1.0, 1.0).unwrap();
        assert!((p.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((p.omega - 2f64.sqrt()).abs() < 1e-15);
        let p = derive_params(1.0, (PI / 10.0).tan()).unwrap();
        assert!((p.theta - PI / 10.0).abs() < 1e-12);
        assert!((p.omega - 1.0 / (PI / 10.0).cos()).abs() < 1e-12);
        assert!((p.omega - 1.05146).abs() < 1e-5);
        let p = derive_params(1.0, (PI / 3.0).tan()).unwrap();
        assert!((p.theta - PI / 3.0).abs() < 1e-12);
        assert!((p.omega - 2.0).abs() < 1e-12);
        assert!(matches!(derive_params(0.0, 1.0), Err(Error::NonPositiveInput { .. })));
        assert!(matches!(derive_params(1.0, -1.0), Err(Error::NonPositiveInput { .. })));
    }

    #[test]
    fn weak_x_five_bangs() {
        let p = theta_frac(5);
        let seq = weak_pi_sequence(Gate::X, 5, p).unwrap();
        assert_eq!(seq.len(), 5);
        for b in &seq.bangs {
            assert!((b.duration - PI * (PI / 10.0).cos()).abs() < 1e-12);
            assert!((b.duration - 2.987_83).abs() < 1e-5);
        }
        let t_closed = PI * PI * (PI / 10.0).cos() / (2.0 * (PI / 10.0));
        assert!((seq.total_time - t_closed).abs() < 1e-12);
        assert!((seq.total_time - 14.939_16).abs() < 1e-5);
        assert!(reaches(&seq, &pauli(Axis::X)) < 1e-9);
        seq.check_time_optimal_shape().unwrap();
    }

    #[test]
    fn weak_y_two_bangs_by_direct_product() {
        let p = theta_frac(2);
        let seq = weak_pi_sequence(Gate::Y, 2, p).unwrap();
        // independent product: U- · U+ with U± = -i(±sinθ σx + cosθ σz)
        let s = FRAC_PI_4.sin();
        let up = crate::qmat::pauli_vector(s, 0.0, s).scale(Complex64::new(0.0, -1.0));
        let um = crate::qmat::pauli_vector(-s, 0.0, s).scale(Complex64::new(0.0, -1.0));
        assert!((um * up).phase_aligned_distance(&seq.unitary()) < 1e-12);
        assert!(pauli(Axis::Y).phase_aligned_distance(&seq.unitary()) < 1e-9);
        assert!((seq.bangs[0].duration - PI / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weak_sequence_errors() {
        assert!(matches!(
            weak_pi_sequence(Gate::X, 2, theta_frac(2)),
            Err(Error::ParityMismatch { .. })
        ));
        assert!(matches!(
            weak_pi_sequence(Gate::X, 5, theta_frac(4)),
            Err(Error::ThetaMismatch { .. })
        ));
    }

    #[test]
    fn strong_y_at_pi_over_three() {
        let p = DriveParams::from_theta(1.0, PI / 3.0).unwrap();
        let seq = strong_pi_sequence(Gate::Y, p).unwrap();
        assert_eq!(seq.bangs[1].level, Level::Zero);
        assert!((seq.bangs[0].duration - (0.5f64.sqrt()).recip().atan()).abs() < 1e-12);
        assert!((seq.bangs[0].duration - 0.95532).abs() < 1e-5);
        assert!((seq.bangs[1].duration - 2.0 * 2f64.sqrt().atan()).abs() < 1e-12);
        assert!((seq.bangs[1].duration - 1.91063).abs() < 1e-5);
        assert!(reaches(&seq, &pauli(Axis::Y)) < 1e-9);
        // the reachable assignment has opposite outer levels
        assert_eq!(seq.bangs[2].level, Level::Minus);
    }

    #[test]
    fn strong_x_at_pi_over_three() {
        let p = DriveParams::from_theta(1.0, PI / 3.0).unwrap();
        let seq = strong_pi_sequence(Gate::X, p).unwrap();
        assert!((seq.bangs[0].duration - (1.0 / 3f64.sqrt()).asin()).abs() < 1e-12);
        assert!((seq.bangs[0].duration - 0.61548).abs() < 1e-5);
        assert_eq!(seq.t2x_parsing(), Some(T2xParsing::WholeOverOmega));
        assert!(reaches(&seq, &pauli(Axis::X)) < 1e-9);
        assert!(matches!(
            strong_pi_sequence(Gate::X, DriveParams::from_theta(1.0, PI / 5.0).unwrap()),
            Err(Error::WeakRegime { .. })
        ));
        assert!(matches!(
            strong_pi_sequence(Gate::Y, DriveParams::from_theta(1.0, FRAC_PI_4).unwrap()),
            Err(Error::WeakRegime { .. })
        ));
    }

    #[test]
    fn boundary_routes_to_weak_branch() {
        let seq = pi_sequence(Gate::Y, DriveParams::from_theta(1.0, FRAC_PI_4).unwrap()).unwrap();
        assert_eq!(seq.construction, Construction::Weak { n: 2 });
    }

    #[test]
    fn sequence_validation() {
        let p = theta_frac(5);
        let same = vec![Bang::new(Level::Plus, 1.0), Bang::new(Level::Plus, 1.0)];
        assert!(BangSequence::new(same.clone(), p).is_err());
        assert!(BangSequence::new(vec![Bang::new(Level::Plus, 0.0)], p).is_err());
        let merged = BangSequence::normalized(same, p, 0.0).unwrap();
        assert_eq!(merged.len(), 1);
        assert!((merged.total_time - 2.0).abs() < 1e-15);
    }

    #[test]
    fn search_identity_is_empty() {
        let seq = search_to_sequence(&CMat::identity(2), theta_frac(5), 6, 1e-10).unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.total_time, 0.0);
    }

    #[test]
    fn search_z_rotation_uses_single_singular_bang() {
        let p = DriveParams::from_theta(1.0, 0.4).unwrap();
        let target = crate::qmat::exp_su2(0.0, 0.0, 1.0, FRAC_PI_4).unwrap();
        let seq = search_to_sequence(&target, p, 4, 1e-10).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.bangs[0].level, Level::Zero);
        assert!((seq.total_time - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn search_rejects_bad_input() {
        let p = theta_frac(5);
        assert!(search_to_sequence(&pauli(Axis::X).scale_re(2.0), p, 3, 1e-8).is_err());
        assert!(search_to_sequence(&pauli(Axis::X), p, 0, 1e-8).is_err());
    }

    #[test]
    fn rwa_reference_values() {
        let (t, r) = rwa_reference(&DriveParams::from_theta(1.0, FRAC_PI_4).unwrap()).unwrap();
        assert!((t - 2.0 * PI).abs() < 1e-12);
        assert!((r - 0.83368).abs() < 5e-5);
        let (_, r) = rwa_reference(&DriveParams::from_theta(1.0, 1e-4).unwrap()).unwrap();
        assert!((r - 0.92597).abs() < 5e-5);
        assert!(matches!(
            rwa_reference(&DriveParams::from_theta(1.0, PI / 3.0).unwrap()),
            Err(Error::StrongRegime { .. })
        ));
    }

    #[test]
    fn level_serde_roundtrip() {
        for l in [Level::Plus, Level::Zero, Level::Minus] {
            assert_eq!(Level::try_from(i8::from(l)).unwrap(), l);
        }
        assert!(Level::try_from(2).is_err());
    }
}
