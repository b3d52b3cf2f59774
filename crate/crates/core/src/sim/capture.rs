//! Symbol-level capture evaluation.

use super::trace::FrameEvent;
use super::CaptureModel;
use crate::phy::{CaptureThresholds, SpreadingFactor};

/// Number of consecutive passing preamble symbols needed for lock.
pub const LOCK_SYMBOLS: u32 = 4;

/// Linear thresholds and link constants for symbol checks.
#[derive(Debug, Clone, Copy)]
pub struct CaptureContext {
    pub model: CaptureModel,
    pub snr_constant: f64,
    pub alpha: f64,
    /// Distances are floored here so a device sitting on the gateway keeps
    /// a finite received power.
    pub min_distance: f64,
    snr: [f64; 6],
    inter_sf: [f64; 6],
    co_sf: f64,
}

impl CaptureContext {
    pub fn new(model: CaptureModel, thresholds: &CaptureThresholds, snr_constant: f64, alpha: f64, radius: f64) -> Self {
        CaptureContext {
            model,
            snr_constant,
            alpha,
            min_distance: radius * 1e-9,
            snr: SpreadingFactor::ALL.map(|sf| thresholds.snr(sf)),
            inter_sf: SpreadingFactor::ALL.map(|sf| thresholds.inter_sf(sf)),
            co_sf: thresholds.co_sf(),
        }
    }

    /// `|h|^2 r^-alpha`.
    pub fn received_power(&self, frame: &FrameEvent) -> f64 {
        frame.gain * frame.distance.max(self.min_distance).powf(-self.alpha)
    }

    /// Condition 1 alone: `c |h|^2 r^-alpha > Gamma_m`.
    pub fn covered(&self, frame: &FrameEvent) -> bool {
        match self.model {
            CaptureModel::CollisionOnly => true,
            _ => self.snr_constant * self.received_power(frame) > self.snr[frame.sf.index()],
        }
    }

    /// Whether one symbol survives. `case` is the `(co-SF, inter-SF)`
    /// presence that selects the threshold; `co` and `inter` are the
    /// interference powers on this symbol.
    fn symbol_passes(&self, sf: SpreadingFactor, signal: f64, case: (bool, bool), co: f64, inter: f64) -> bool {
        let noise = 1.0 / self.snr_constant;
        if self.model == CaptureModel::CollisionOnly {
            return !case.0 && !case.1;
        }
        match case {
            (false, false) => signal / noise > self.snr[sf.index()],
            (true, false) => signal / (co + noise) > self.co_sf,
            (false, true) => signal / (inter + noise) > self.inter_sf[sf.index()],
            // Gamma_co dominates every Gamma_int,m
            (true, true) => signal / (co + inter + noise) > self.co_sf,
        }
    }
}

/// Per-symbol outcome of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolVerdict {
    /// Capture outcome per symbol under the configured model.
    pub symbols: Vec<bool>,
    pub captured: bool,
    /// Offset from frame start at which the preamble lock completes.
    pub lock_offset: Option<f64>,
}

/// Symbol indices of `frame` that `other` overlaps, if any. Frames that
/// merely touch do not overlap.
fn overlapped_symbols(frame: &FrameEvent, other: &FrameEvent) -> Option<(usize, usize)> {
    let n = frame.timing.frame_symbols as i64;
    let ts = frame.timing.symbol_period;
    let first = ((other.start - frame.start) / ts).floor() as i64;
    let last = ((other.end() - frame.start) / ts).ceil() as i64 - 1;
    let (first, last) = (first.max(0), last.min(n - 1));
    (first <= last).then_some((first as usize, last as usize))
}

/// Checks every symbol of `frame` against the noise and the interferers
/// active during that symbol. `interferers` must share the frame's channel;
/// frames that do not overlap it are ignored.
pub fn evaluate_capture(ctx: &CaptureContext, frame: &FrameEvent, interferers: &[&FrameEvent]) -> SymbolVerdict {
    let n = frame.timing.frame_symbols as usize;
    // difference arrays over symbol index
    let mut co_power = vec![0.0; n + 1];
    let mut int_power = vec![0.0; n + 1];
    let mut co_count = vec![0i32; n + 1];
    let mut int_count = vec![0i32; n + 1];
    for other in interferers {
        if other.id == frame.id {
            continue;
        }
        let Some((first, last)) = overlapped_symbols(frame, other) else {
            continue;
        };
        let p = ctx.received_power(other);
        let (power, count) = if other.sf == frame.sf {
            (&mut co_power, &mut co_count)
        } else {
            (&mut int_power, &mut int_count)
        };
        power[first] += p;
        power[last + 1] -= p;
        count[first] += 1;
        count[last + 1] -= 1;
    }

    let frame_case = (
        co_count.iter().any(|&c| c > 0),
        int_count.iter().any(|&c| c > 0),
    );
    let signal = ctx.received_power(frame);
    let mut symbols = Vec::with_capacity(n);
    // preamble lock happens before later interferers arrive, so it always
    // judges a symbol by the interference present on that symbol
    let mut lock_symbols = Vec::with_capacity(n);
    let (mut cp, mut ip, mut cc, mut ic) = (0.0, 0.0, 0, 0);
    for k in 0..n {
        cp += co_power[k];
        ip += int_power[k];
        cc += co_count[k];
        ic += int_count[k];
        if cc == 0 {
            cp = 0.0;
        }
        if ic == 0 {
            ip = 0.0;
        }
        let local = (cc > 0, ic > 0);
        let local_pass = ctx.symbol_passes(frame.sf, signal, local, cp, ip);
        let pass = match ctx.model {
            CaptureModel::FrameCase => ctx.symbol_passes(frame.sf, signal, frame_case, cp, ip),
            _ => local_pass,
        };
        symbols.push(pass);
        lock_symbols.push(local_pass);
    }

    let captured = symbols.iter().all(|&s| s);
    let lock = LOCK_SYMBOLS as usize;
    let preamble = (frame.timing.preamble_symbols as usize).min(n);
    let mut run = 0;
    let mut lock_offset = None;
    for (k, &ok) in lock_symbols.iter().take(preamble).enumerate() {
        run = if ok { run + 1 } else { 0 };
        if run == lock {
            lock_offset = Some((k + 1) as f64 * frame.timing.symbol_period);
            break;
        }
    }
    SymbolVerdict {
        symbols,
        captured,
        lock_offset,
    }
}
