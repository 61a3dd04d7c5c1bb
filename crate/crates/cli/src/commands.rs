use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use fato::dynamics::{predicted_fidelity, propagate_waveform};
use fato::fourier::series_of_segments;
use fato::sweeps::{rwa_infidelity, run_sweep, run_sweep_with_threads, to_csv, weak_theta_grid, Normalization};
use fato::twoqubit::sample_profiles;
use fato::{
    analytic_fidelity, build_swap_schedule, fato_swap_fidelity, odd_extension, order_for_bandwidth, pi_sequence,
    propagate_bb, series_odd_extension, series_of, Bang, BangSequence, CoeffVariant, Construction, DriveParams,
    FourierWaveform, Gate, Regime, SweepGate, SweepKind, SweepRecord, SweepSpec, SwapSegment, T2xParsing,
};
use serde::{Deserialize, Serialize};

use crate::{
    CliError, Drive, FidelityArgs, Format, GateArg, NormalizeArg, Strength, SwapArgs, SwapMode, SweepArgs,
    SweepGateArg, SynthArgs, Truncation, WaveformArgs,
};

/// Bumped whenever a JSON document changes shape.
const SCHEMA_VERSION: u32 = 1;

type CliResult<T> = Result<T, CliError>;

impl From<GateArg> for Gate {
    fn from(g: GateArg) -> Gate {
        match g {
            GateArg::X => Gate::X,
            GateArg::Y => Gate::Y,
        }
    }
}

fn theta_of(omega0: f64, s: &Strength) -> Option<(&'static str, f64)> {
    if let Some(b) = s.omega_bar {
        Some(("--omega-bar", (b / omega0).atan()))
    } else if let Some(t) = s.theta {
        Some(("--theta", t))
    } else {
        s.theta_frac.map(|n| ("--theta-frac", PI / (2.0 * f64::from(n))))
    }
}

fn params(d: &Drive) -> CliResult<DriveParams> {
    let s = &d.strength;
    if let Some(b) = s.omega_bar {
        return fato::derive_params(d.omega0, b).map_err(|e| CliError::usage("--omega-bar", e));
    }
    match theta_of(d.omega0, s) {
        Some((flag, theta)) => DriveParams::from_theta(d.omega0, theta).map_err(|e| CliError::usage(flag, e)),
        None => Err(CliError::Usage("one of --omega-bar, --theta or --theta-frac is required".into())),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SequenceFile {
    Doc { bangs: Vec<Bang> },
    List(Vec<Bang>),
}

fn load_sequence(path: &Path, params: DriveParams) -> CliResult<BangSequence> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage("--sequence", format!("{}: {e}", path.display())))?;
    let bangs = match serde_json::from_str(&text) {
        Ok(SequenceFile::Doc { bangs }) | Ok(SequenceFile::List(bangs)) => bangs,
        Err(e) => return Err(CliError::usage("--sequence", format!("expected a list of {{level, duration}}: {e}"))),
    };
    BangSequence::new(bangs, params).map_err(|e| CliError::usage("--sequence", e))
}

fn sequence(params: DriveParams, gate: Option<GateArg>, file: Option<&PathBuf>) -> CliResult<BangSequence> {
    match (file, gate) {
        (Some(path), _) => load_sequence(path, params),
        (None, Some(g)) => Ok(pi_sequence(g.into(), params)?),
        (None, None) => Err(CliError::Usage("--gate or --sequence is required".into())),
    }
}

fn waveform_of(seq: &BangSequence, trunc: &Truncation, odd: bool) -> CliResult<FourierWaveform> {
    if seq.total_time <= 0.0 {
        return Err(CliError::Usage("sequence has zero duration".into()));
    }
    let odd_err = |e| CliError::usage("--odd-extension", e);
    match (trunc.order, trunc.bandwidth) {
        (Some(k), _) => {
            if odd {
                let mut wf = series_of_segments(&odd_extension(seq).map_err(odd_err)?, k)?;
                wf.duration = seq.total_time;
                Ok(wf)
            } else {
                Ok(series_of(seq, k)?)
            }
        }
        (None, Some(bw)) => {
            let min = seq.params.min_bandwidth();
            if bw < min {
                eprintln!("warning: --bandwidth {bw} is below the minimum bandwidth omega = {min}");
            }
            let wf = if odd {
                series_odd_extension(seq, bw).map_err(odd_err)?
            } else {
                let mut wf = series_of(seq, order_for_bandwidth(bw, seq.total_time)?)?;
                wf.bandwidth = bw;
                wf
            };
            if wf.order == 0 {
                return Err(CliError::usage(
                    "--bandwidth",
                    format!("{bw} gives K = 0; at least 2pi/T = {} is needed", 2.0 * PI / wf.period),
                ));
            }
            Ok(wf)
        }
        (None, None) => Err(CliError::Usage("one of --bandwidth or --order is required".into())),
    }
}

fn emit(output: Option<&PathBuf>, content: &str) -> CliResult<()> {
    match output {
        Some(path) => {
            fs::write(path, content).map_err(|e| CliError::usage("--output", format!("{}: {e}", path.display())))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents contain no maps with non-string keys");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SynthDoc<'a> {
    schema_version: u32,
    gate: String,
    params: &'a DriveParams,
    bangs: &'a [Bang],
    total_time: f64,
    construction: &'a Construction,
    time_optimal: bool,
    t2x_parsing: Option<T2xParsing>,
    gate_fidelity_check: f64,
}

pub fn synth(a: SynthArgs) -> CliResult<()> {
    let p = params(&a.drive)?;
    let gate = Gate::from(a.gate);
    let seq = pi_sequence(gate, p)?;
    let check = propagate_bb(&seq, &gate.target())?;
    let out = match a.format {
        Format::Json => to_json(&SynthDoc {
            schema_version: SCHEMA_VERSION,
            gate: gate.to_string(),
            params: &seq.params,
            bangs: &seq.bangs,
            total_time: seq.total_time,
            construction: &seq.construction,
            time_optimal: seq.time_optimal,
            t2x_parsing: seq.t2x_parsing(),
            gate_fidelity_check: check.fidelity,
        }),
        Format::Csv => {
            let mut s = String::from("level,duration\n");
            for b in &seq.bangs {
                s.push_str(&format!("{},{}\n", i8::from(b.level), b.duration));
            }
            s
        }
    };
    emit(a.output.as_ref(), &out)
}

#[derive(Serialize)]
struct WaveformSidecar {
    schema_version: u32,
    order: usize,
    bandwidth: f64,
    period: f64,
    duration: f64,
    odd_extension: bool,
    tail_error: f64,
    nonzero_harmonics: usize,
    /// Largest `|f|` on a dense grid; above 1 the drive exceeds its bound.
    gibbs_max: f64,
    exceeds_bound: bool,
}

pub fn waveform(a: WaveformArgs) -> CliResult<()> {
    let p = params(&a.drive)?;
    let seq = sequence(p, a.gate, a.sequence.as_ref())?;
    let wf = waveform_of(&seq, &a.truncation, a.odd_extension)?;
    let samples = usize::try_from(a.samples).map_err(|e| CliError::usage("--samples", e))?;
    emit(a.output.as_ref(), &wf.to_csv(samples, a.clamp))?;
    if let Some(path) = &a.sidecar {
        let gibbs_max = wf.peak((64 * wf.order + 1).max(4097));
        let doc = WaveformSidecar {
            schema_version: SCHEMA_VERSION,
            order: wf.order,
            bandwidth: wf.bandwidth,
            period: wf.period,
            duration: wf.duration,
            odd_extension: a.odd_extension,
            tail_error: wf.tail_error,
            nonzero_harmonics: wf.nonzero_harmonics(1e-12),
            gibbs_max,
            exceeds_bound: gibbs_max > 1.0,
        };
        fs::write(path, to_json(&doc)).map_err(|e| CliError::usage("--sidecar", format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FidelityDoc {
    schema_version: u32,
    gate: String,
    theta: f64,
    regime: &'static str,
    #[serde(rename = "T")]
    total_time: f64,
    #[serde(rename = "K")]
    order: usize,
    bandwidth: f64,
    odd_extension: bool,
    #[serde(rename = "E_K")]
    tail_error: f64,
    #[serde(rename = "F_sim")]
    sim: f64,
    /// Weak regime, `cos(tanθ E_K π/4)`.
    #[serde(rename = "F_analytic_quarter_pi")]
    quarter_pi: Option<f64>,
    /// Weak regime, `cos(tanθ E_K π/2)`.
    #[serde(rename = "F_analytic_half_pi")]
    half_pi: Option<f64>,
    /// The estimate that tracks simulation in this regime.
    #[serde(rename = "F_predicted")]
    predicted: f64,
    #[serde(rename = "F_rwa")]
    rwa: Option<f64>,
    steps: usize,
    richardson_defect: f64,
}

pub fn fidelity(a: FidelityArgs) -> CliResult<()> {
    let p = params(&a.drive)?;
    let gate = Gate::from(a.gate);
    let seq = sequence(p, Some(a.gate), a.sequence.as_ref())?;
    let wf = waveform_of(&seq, &a.truncation, a.odd_extension)?;
    let r = propagate_waveform(&wf, &p, &gate.target(), 0.0)?;
    let regime = Regime::of(&p);
    let weak = |v| match regime {
        Regime::Weak => analytic_fidelity(regime, gate, p.theta, wf.tail_error, v).ok(),
        Regime::Strong => None,
    };
    let rwa = match regime {
        Regime::Weak => Some(1.0 - rwa_infidelity(gate, &p)?),
        Regime::Strong => None,
    };
    let doc = FidelityDoc {
        schema_version: SCHEMA_VERSION,
        gate: gate.to_string(),
        theta: p.theta,
        regime: match regime {
            Regime::Weak => "weak",
            Regime::Strong => "strong",
        },
        total_time: wf.duration,
        order: wf.order,
        bandwidth: wf.bandwidth,
        odd_extension: a.odd_extension,
        tail_error: wf.tail_error,
        sim: r.fidelity,
        quarter_pi: weak(CoeffVariant::QuarterPi),
        half_pi: weak(CoeffVariant::HalfPi),
        predicted: predicted_fidelity(&p, gate, &wf),
        rwa,
        steps: r.steps,
        richardson_defect: r.richardson_defect,
    };
    emit(a.output.as_ref(), &to_json(&doc))
}

/// `a:b:n` inclusive, a comma list, or `weak`.
fn parse_grid(s: &str, gate: Option<Gate>) -> CliResult<Vec<f64>> {
    let bad = |msg: String| CliError::usage("--grid", msg);
    if s == "weak" {
        return gate.map(weak_theta_grid).ok_or_else(|| bad("'weak' needs gate x or y".into()));
    }
    let num = |t: &str| -> CliResult<f64> {
        match t.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(bad(format!("'{t}' is not a finite number"))),
        }
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad(format!("point count '{n}' is not a positive integer")))?;
            match n {
                0 => Err(bad("point count must be at least 1".into())),
                1 => Ok(vec![a]),
                n => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad(format!("expected a:b:n or a comma list, got '{s}'"))),
    }
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    schema_version: u32,
    spec: &'a SweepSpec,
    records: &'a [SweepRecord],
}

fn execute(spec: &SweepSpec, threads: usize) -> CliResult<Vec<SweepRecord>> {
    spec.validate().map_err(|e| CliError::usage("--grid", e))?;
    Ok(if threads == 0 { run_sweep(spec)? } else { run_sweep_with_threads(spec, threads)? })
}

pub fn sweep(a: SweepArgs) -> CliResult<()> {
    let gate = match a.gate {
        SweepGateArg::X => SweepGate::X,
        SweepGateArg::Y => SweepGate::Y,
        SweepGateArg::Swap => SweepGate::Swap,
    };
    let grid = parse_grid(&a.grid, gate.single())?;
    let mut spec = SweepSpec::new(a.kind, gate, grid);
    spec.omega0 = a.omega0;
    if let Some((flag, theta)) = theta_of(a.omega0, &a.strength) {
        if !(theta > 0.0 && theta < PI / 2.0) {
            return Err(CliError::usage(flag, format!("theta must lie in (0, pi/2), got {theta}")));
        }
        spec.theta = theta;
    }
    spec.bandwidth = a.bandwidth;
    spec.order = a.order;
    spec.normalize = match a.normalize {
        NormalizeArg::Omega0 => Normalization::Omega0,
        NormalizeArg::OmegaBar => Normalization::OmegaBar,
    };
    spec.coupling = a.j;
    spec.drive_amp = a.amp;
    let records = execute(&spec, a.threads)?;
    let out = match a.format {
        Format::Csv => to_csv(&records),
        Format::Json => to_json(&SweepDoc { schema_version: SCHEMA_VERSION, spec: &spec, records: &records }),
    };
    emit(a.output.as_ref(), &out)
}

#[derive(Serialize)]
struct SwapDoc<'a> {
    schema_version: u32,
    coupling: f64,
    drive_amp: f64,
    bandwidth: f64,
    #[serde(rename = "K")]
    order: usize,
    assignment: &'a str,
    total_time: f64,
    coupling_during_pulses: bool,
    segments: &'a [SwapSegment],
    #[serde(rename = "F_rect")]
    rect: f64,
    #[serde(rename = "F_fato")]
    fato: f64,
}

fn rect_value(segments: &[(f64, f64)], t: f64) -> f64 {
    let mut start = 0.0;
    for &(v, d) in segments {
        if t < start + d {
            return v;
        }
        start += d;
    }
    segments.last().map_or(0.0, |&(v, _)| v)
}

pub fn swap2q(a: SwapArgs) -> CliResult<()> {
    let bw = a.bandwidth * a.j;
    let schedule = build_swap_schedule(a.j, a.amp * a.j)
        .map_err(|e| CliError::usage("--amp", e))?
        .with_coupling_during_pulses(!a.coupling_off_during_pulses);
    let out = match a.mode {
        SwapMode::Summary => {
            let (wx, _) = schedule.waveforms(bw).map_err(|e| CliError::usage("--bandwidth", e))?;
            let (fato, rect) = fato_swap_fidelity(&schedule, bw)?;
            to_json(&SwapDoc {
                schema_version: SCHEMA_VERSION,
                coupling: schedule.coupling,
                drive_amp: schedule.drive_amp,
                bandwidth: bw,
                order: wx.order,
                assignment: &schedule.assignment,
                total_time: schedule.total_time,
                coupling_during_pulses: schedule.coupling_during_pulses,
                segments: &schedule.segments,
                rect,
                fato,
            })
        }
        SwapMode::Profiles => {
            let samples = usize::try_from(a.samples).map_err(|e| CliError::usage("--samples", e))?;
            let rows = sample_profiles(&schedule, bw, samples).map_err(|e| CliError::usage("--bandwidth", e))?;
            let (rx, ry) = (schedule.x_profile(), schedule.y_profile());
            let mut s = String::from("t,fx,fy,fx_rect,fy_rect\n");
            for (t, fx, fy) in rows {
                s.push_str(&format!("{t},{fx},{fy},{},{}\n", rect_value(&rx, t), rect_value(&ry, t)));
            }
            s
        }
        SwapMode::Bandwidth | SwapMode::Amp => {
            let grid = a.grid.as_deref().ok_or_else(|| CliError::usage("--grid", "required for the sweep modes"))?;
            let kind = if a.mode == SwapMode::Bandwidth { SweepKind::SwapBandwidth } else { SweepKind::SwapAmp };
            let mut spec = SweepSpec::new(kind, SweepGate::Swap, parse_grid(grid, None)?);
            spec.coupling = a.j;
            spec.drive_amp = a.amp;
            spec.bandwidth = Some(a.bandwidth);
            to_csv(&execute(&spec, a.threads)?)
        }
    };
    emit(a.output.as_ref(), &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:1:3", None).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1", None).unwrap(), vec![2.0]);
        assert_eq!(parse_grid("-0.02:0.02:5", None).unwrap().len(), 5);
        assert_eq!(parse_grid("1, 2.5,4", None).unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("weak", Some(Gate::X)).unwrap().len(), 7);
        for bad in ["0:1:0", "0:1", "a:1:3", "1,,2", "nan", "weak", "0:1:2:3"] {
            assert!(matches!(parse_grid(bad, None), Err(CliError::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn rectangular_lookup() {
        let segs = [(0.0, 1.0), (1.0, 0.5), (0.0, 1.0)];
        assert_eq!(rect_value(&segs, 0.5), 0.0);
        assert_eq!(rect_value(&segs, 1.2), 1.0);
        assert_eq!(rect_value(&segs, 2.5), 0.0);
    }
}
