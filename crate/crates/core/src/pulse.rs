//! Piecewise-constant pulse shapes and their accumulated phases.
//!
//! A [`PulseShape`] is an ordered list of constant-amplitude segments on
//! `[0, τp]`. The rotation angle of a shape is twice its area, so a π pulse
//! has `∫V dt = π/2`. [`DesignedPulse`] pairs a shape with the placement
//! instant `τs` of the equivalent instantaneous pulse.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

/// Absolute tolerance on `rotation_angle(shape) == intended_angle`.
pub const ANGLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("segment {index}: duration must be positive, got {duration}")]
    NonPositiveDuration { index: usize, duration: f64 },
    #[error("segment {index}: non-finite value")]
    NonFinite { index: usize },
    #[error("pulse has no segments")]
    Empty,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("rotation angle {actual} does not match intended angle {intended}")]
    AngleMismatch { intended: f64, actual: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub amplitude: f64,
}

impl Segment {
    pub fn new(duration: f64, amplitude: f64) -> Self {
        Self {
            duration,
            amplitude,
        }
    }

    pub fn area(&self) -> f64 {
        self.duration * self.amplitude
    }
}

/// Piecewise-constant amplitude profile `V(t)` on `[0, τp]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    segments: Vec<Segment>,
    duration: f64,
}

impl PulseShape {
    pub fn new(segments: Vec<Segment>) -> Result<Self, PulseError> {
        if segments.is_empty() {
            return Err(PulseError::Empty);
        }
        for (index, seg) in segments.iter().enumerate() {
            if !seg.duration.is_finite() || !seg.amplitude.is_finite() {
                return Err(PulseError::NonFinite { index });
            }
            if seg.duration <= 0.0 {
                return Err(PulseError::NonPositiveDuration {
                    index,
                    duration: seg.duration,
                });
            }
        }
        let duration = segments.iter().map(|s| s.duration).sum();
        Ok(Self { segments, duration })
    }

    pub fn constant(duration: f64, amplitude: f64) -> Result<Self, PulseError> {
        Self::new(vec![Segment::new(duration, amplitude)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Total duration `τp`.
    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Segment boundaries `0 = t₀ < t₁ < … < t_N = τp`.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        let mut t = 0.0;
        out.push(t);
        for seg in &self.segments[..self.segments.len() - 1] {
            t += seg.duration;
            out.push(t);
        }
        out.push(self.duration);
        out
    }

    /// `V(t)`, right-continuous at switch points; `V(τp)` is the last amplitude.
    pub fn amplitude_at(&self, t: f64) -> f64 {
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration;
            if t < end {
                return seg.amplitude;
            }
            start = end;
        }
        self.segments[self.segments.len() - 1].amplitude
    }

    /// `∫₀ᵗ V(s) ds`, exact for piecewise-constant `V`.
    pub fn cumulative_phase(&self, t: f64) -> Result<f64, PulseError> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(PulseError::Domain(format!(
                "t = {t} outside [0, {}]",
                self.duration
            )));
        }
        if t == self.duration {
            return Ok(self.area());
        }
        let mut acc = 0.0;
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration;
            if t < end {
                return Ok(acc + (t - start) * seg.amplitude);
            }
            acc += seg.area();
            start = end;
        }
        Ok(acc)
    }

    /// `∫₀^τp V(s) ds`, i.e. `φ₊`.
    pub fn area(&self) -> f64 {
        self.segments.iter().map(Segment::area).sum()
    }

    /// Rotation angle `2·∫V dt`.
    pub fn rotation_angle(&self) -> f64 {
        2.0 * self.area()
    }

    /// True iff `V(t) = V(τp − t)` within `tol` almost everywhere.
    ///
    /// Both sides are compared at the midpoint of every piece of the common
    /// refinement of the switch points and their mirror images, where both
    /// are constant. Pieces shorter than `1e-12·τp` come from rounding of
    /// the mirrored boundaries and are skipped.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let tau_p = self.duration;
        let mut cuts = self.boundaries();
        cuts.extend(self.boundaries().iter().map(|&b| tau_p - b));
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .filter(|w| w[1] - w[0] > 1e-12 * tau_p)
            .all(|w| {
                let t = 0.5 * (w[0] + w[1]);
                (self.amplitude_at(t) - self.amplitude_at(tau_p - t)).abs() <= tol
            })
    }

    /// Time-rescaled copy: durations multiplied by `factor`, amplitudes divided by it.
    /// The area (and hence rotation angle) is preserved.
    pub fn time_scaled(&self, factor: f64) -> Result<Self, PulseError> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(PulseError::Domain(format!("scale factor {factor}")));
        }
        Self::new(
            self.segments
                .iter()
                .map(|s| Segment::new(s.duration * factor, s.amplitude / factor))
                .collect(),
        )
    }

    /// Copy with every amplitude multiplied by `factor`.
    pub fn amplitude_scaled(&self, factor: f64) -> Result<Self, PulseError> {
        Self::new(
            self.segments
                .iter()
                .map(|s| Segment::new(s.duration, s.amplitude * factor))
                .collect(),
        )
    }

    /// Same profile with every segment split into `parts` equal pieces.
    pub fn subdivided(&self, parts: usize) -> Result<Self, PulseError> {
        if parts == 0 {
            return Err(PulseError::Domain("zero subdivision".into()));
        }
        let k = parts as f64;
        Self::new(
            self.segments
                .iter()
                .flat_map(|s| std::iter::repeat_n(Segment::new(s.duration / k, s.amplitude), parts))
                .collect(),
        )
    }
}

/// Three-level symmetric shape: `−a` on `[0, τ1)`, `+a` on `[τ1, τp−τ1]`, `−a` after.
pub fn make_symmetric(tau_p: f64, tau_1: f64, a_max: f64) -> Result<PulseShape, PulseError> {
    if !(tau_p > 0.0) || !(a_max > 0.0) {
        return Err(PulseError::InvalidGeometry(format!(
            "need tau_p > 0 and a_max > 0, got tau_p = {tau_p}, a_max = {a_max}"
        )));
    }
    if !(tau_1 > 0.0 && tau_1 < 0.5 * tau_p) {
        return Err(PulseError::InvalidGeometry(format!(
            "symmetric pulse needs 0 < tau_1 < tau_p/2, got tau_1 = {tau_1}, tau_p = {tau_p}"
        )));
    }
    PulseShape::new(vec![
        Segment::new(tau_1, -a_max),
        Segment::new(tau_p - 2.0 * tau_1, a_max),
        Segment::new(tau_1, -a_max),
    ])
}

/// Two-level asymmetric shape: `+a` on `[0, τ1)`, `−a` on `[τ1, τp]`.
pub fn make_asymmetric(tau_p: f64, tau_1: f64, a_max: f64) -> Result<PulseShape, PulseError> {
    if !(tau_p > 0.0) || !(a_max > 0.0) {
        return Err(PulseError::InvalidGeometry(format!(
            "need tau_p > 0 and a_max > 0, got tau_p = {tau_p}, a_max = {a_max}"
        )));
    }
    if !(tau_1 > 0.0 && tau_1 < tau_p) {
        return Err(PulseError::InvalidGeometry(format!(
            "asymmetric pulse needs 0 < tau_1 < tau_p, got tau_1 = {tau_1}, tau_p = {tau_p}"
        )));
    }
    PulseShape::new(vec![
        Segment::new(tau_1, a_max),
        Segment::new(tau_p - tau_1, -a_max),
    ])
}

/// `φ₊` and `φ₋` of a placed pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair {
    pub phi_plus: f64,
    pub phi_minus: f64,
}

/// A shape placed at instant `τs` with its intended rotation angle.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedPulse {
    shape: PulseShape,
    tau_s: f64,
    intended_angle: f64,
}

impl DesignedPulse {
    pub fn new(shape: PulseShape, tau_s: f64, intended_angle: f64) -> Result<Self, PulseError> {
        if !(0.0..=shape.duration()).contains(&tau_s) {
            return Err(PulseError::Domain(format!(
                "tau_s = {tau_s} outside [0, {}]",
                shape.duration()
            )));
        }
        let actual = shape.rotation_angle();
        if !intended_angle.is_finite() || (actual - intended_angle).abs() > ANGLE_TOLERANCE {
            return Err(PulseError::AngleMismatch {
                intended: intended_angle,
                actual,
            });
        }
        Ok(Self {
            shape,
            tau_s,
            intended_angle,
        })
    }

    /// Places `shape` at `tau_s`, taking its own rotation angle as intended.
    pub fn placed(shape: PulseShape, tau_s: f64) -> Result<Self, PulseError> {
        let angle = shape.rotation_angle();
        Self::new(shape, tau_s, angle)
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    pub fn tau_p(&self) -> f64 {
        self.shape.duration()
    }

    pub fn intended_angle(&self) -> f64 {
        self.intended_angle
    }

    pub fn phase_pair(&self) -> PhasePair {
        let phi_plus = self.shape.area();
        let before = self
            .shape
            .cumulative_phase(self.tau_s)
            .expect("tau_s validated at construction");
        PhasePair {
            phi_plus,
            phi_minus: phi_plus - 2.0 * before,
        }
    }

    pub fn phase_functions(&self) -> PhaseFunctions<'_> {
        let offset = self
            .shape
            .cumulative_phase(self.tau_s)
            .expect("tau_s validated at construction");
        PhaseFunctions {
            shape: &self.shape,
            pair: self.phase_pair(),
            offset,
        }
    }

    /// The same pulse under `t → factor·t`, `V → V/factor`.
    pub fn time_scaled(&self, factor: f64) -> Result<Self, PulseError> {
        let shape = self.shape.time_scaled(factor)?;
        let tau_s = (self.tau_s * factor).min(shape.duration());
        Self::new(shape, tau_s, self.intended_angle)
    }
}

/// `φ±` together with `ψ(t) = 2∫_{τs}^t V(s) ds`.
#[derive(Debug, Clone, Copy)]
pub struct PhaseFunctions<'a> {
    shape: &'a PulseShape,
    pub pair: PhasePair,
    offset: f64,
}

impl PhaseFunctions<'_> {
    pub fn psi(&self, t: f64) -> Result<f64, PulseError> {
        Ok(2.0 * (self.shape.cumulative_phase(t)? - self.offset))
    }
}

/// The asymmetric π-pulse family with index `n`:
/// `τ1 = (2n+1)τp/(4n)`, `a_max = πn/τp`, `τs = τp[1/2 + (−1)ⁿ/(2nπ)]`.
pub fn asymmetric_family(n: u32, tau_p: f64) -> Result<DesignedPulse, PulseError> {
    if n == 0 {
        return Err(PulseError::Domain("family index n must be >= 1".into()));
    }
    let nf = f64::from(n);
    let tau_1 = (2.0 * nf + 1.0) * tau_p / (4.0 * nf);
    let a_max = PI * nf / tau_p;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let tau_s = tau_p * (0.5 + sign / (2.0 * nf * PI));
    let shape = make_asymmetric(tau_p, tau_1, a_max)?;
    DesignedPulse::new(shape, tau_s, PI)
}

/// Pulse file contents: a shape plus the optional `tau_s` / `angle` headers.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseDescription {
    pub shape: PulseShape,
    pub tau_s: Option<f64>,
    pub angle: Option<f64>,
}

impl PulseDescription {
    /// Builds a [`DesignedPulse`]; `τs` defaults to `τp/2` and the angle to the shape's own.
    pub fn into_designed(self) -> Result<DesignedPulse, PulseError> {
        let tau_s = self.tau_s.unwrap_or(0.5 * self.shape.duration());
        match self.angle {
            Some(angle) => DesignedPulse::new(self.shape, tau_s, angle),
            None => DesignedPulse::placed(self.shape, tau_s),
        }
    }
}

fn parse_number(token: &str, line: usize) -> Result<f64, PulseError> {
    let value: f64 = token.parse().map_err(|_| PulseError::Parse {
        line,
        reason: format!("not a number: {token:?}"),
    })?;
    if !value.is_finite() {
        return Err(PulseError::Parse {
            line,
            reason: format!("non-finite value {token:?}"),
        });
    }
    Ok(value)
}

/// Parses the text pulse format (`<duration> <amplitude>` per line,
/// `#` comments, optional `tau_s` and `angle` headers).
pub fn parse_pulse_description(text: &str) -> Result<PulseDescription, PulseError> {
    let mut segments = Vec::new();
    let mut tau_s = None;
    let mut angle = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(PulseError::Parse {
                line,
                reason: format!("expected two fields, found {}", tokens.len()),
            });
        }
        let header = match tokens[0] {
            "tau_s" => Some(&mut tau_s),
            "angle" => Some(&mut angle),
            _ => None,
        };
        if let Some(slot) = header {
            if slot.is_some() {
                return Err(PulseError::Parse {
                    line,
                    reason: format!("duplicate {} header", tokens[0]),
                });
            }
            *slot = Some(parse_number(tokens[1], line)?);
            continue;
        }
        let duration = parse_number(tokens[0], line)?;
        let amplitude = parse_number(tokens[1], line)?;
        if duration <= 0.0 {
            return Err(PulseError::Parse {
                line,
                reason: format!("non-positive duration {duration}"),
            });
        }
        segments.push(Segment::new(duration, amplitude));
    }
    if segments.is_empty() {
        return Err(PulseError::Parse {
            line: text.lines().count(),
            reason: "no segments in pulse file".into(),
        });
    }
    Ok(PulseDescription {
        shape: PulseShape::new(segments)?,
        tau_s,
        angle,
    })
}

pub fn parse_pulse_file(text: &str) -> Result<PulseShape, PulseError> {
    parse_pulse_description(text).map(|d| d.shape)
}

fn write_segments(out: &mut String, shape: &PulseShape) {
    for seg in shape.segments() {
        // `{}` on f64 prints the shortest representation that round-trips.
        let _ = writeln!(out, "{} {}", seg.duration, seg.amplitude);
    }
}

pub fn write_pulse_shape(shape: &PulseShape) -> String {
    let mut out = String::from("# duration amplitude\n");
    write_segments(&mut out, shape);
    out
}

pub fn write_designed_pulse(pulse: &DesignedPulse) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tau_s {}", pulse.tau_s());
    let _ = writeln!(out, "angle {}", pulse.intended_angle());
    out.push_str("# duration amplitude\n");
    write_segments(&mut out, pulse.shape());
    out
}
