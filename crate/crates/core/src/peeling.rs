//! Boundary-level simulation of percolation interfaces on the half-plane
//! UIPT.
//!
//! Only the colored boundary is tracked. Each peel event either inserts a
//! fresh vertex of a fair color next to the explored end-point or swallows
//! `k` boundary vertices on one side; swallowed vertices are enclosed in a
//! finite region that never influences crossing events, so it is dropped.
//! A run ends when a finite segment next to the explored end-point is
//! swallowed entirely: the color of the vertex the revealed triangle lands
//! on decides the crossing.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::{LandingSampler, StepDistribution, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn opposite(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Length {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub color: Color,
    pub len: Length,
}

impl Segment {
    pub fn finite(color: Color, len: u64) -> Self {
        Segment { color, len: Length::Finite(len) }
    }

    pub fn infinite(color: Color) -> Self {
        Segment { color, len: Length::Infinite }
    }
}

/// Colored boundary of the half-plane, segments ordered left to right. The
/// boundary is a bi-infinite line, so the extreme segments are infinite and
/// all others finite. Every junction between adjacent segments is an
/// interface end-point; end-point `i` sits between segments `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentBoundary {
    segments: Vec<Segment>,
}

/// One revealed triangle at an end-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeelEvent {
    /// The third vertex is new, with the given color.
    Internal(Color),
    /// The third vertex is the boundary vertex `k` steps left of the edge.
    SplitLeft(u64),
    /// The third vertex is the boundary vertex `k` steps right of the edge.
    SplitRight(u64),
}

impl PeelEvent {
    /// Boundary length of the enclosed polygon, for splits.
    pub fn enclosed_boundary_size(&self) -> Option<u64> {
        match *self {
            PeelEvent::Internal(_) => None,
            PeelEvent::SplitLeft(k) | PeelEvent::SplitRight(k) => Some(k + 1),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PeelEvent::Internal(Color::Black) => "internal-black",
            PeelEvent::Internal(Color::White) => "internal-white",
            PeelEvent::SplitLeft(_) => "split-left",
            PeelEvent::SplitRight(_) => "split-right",
        }
    }

    fn k(&self) -> u64 {
        match *self {
            PeelEvent::Internal(_) => 0,
            PeelEvent::SplitLeft(k) | PeelEvent::SplitRight(k) => k,
        }
    }

    /// Draws an event: internal w.p. 2/3 with a fair color, a split at
    /// distance `k` w.p. `p_k` on each side.
    pub fn sample<R: Rng + ?Sized>(dist: &StepDistribution, rng: &mut R) -> PeelEvent {
        let u: f64 = rng.random();
        if u < 1.0 / 3.0 {
            PeelEvent::Internal(Color::Black)
        } else if u < 2.0 / 3.0 {
            PeelEvent::Internal(Color::White)
        } else if u < 5.0 / 6.0 {
            PeelEvent::SplitLeft(dist.sample_jump(rng))
        } else {
            PeelEvent::SplitRight(dist.sample_jump(rng))
        }
    }
}

/// What a peel event did to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeelEffect {
    /// Finite segments swallowed entirely: `(index before the step, length)`
    /// of the first one, if any.
    pub swallowed: Option<(usize, u64)>,
    /// Color of the vertex the triangle landed on, for splits.
    pub landing_color: Option<Color>,
    /// Vertices removed past the first swallowed segment.
    pub overshoot: u64,
}

impl SegmentBoundary {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Contract("boundary needs at least one segment".into()));
        }
        for w in segments.windows(2) {
            if w[0].color == w[1].color {
                return Err(Error::Contract("adjacent segments must have opposite colors".into()));
            }
        }
        let last = segments.len() - 1;
        for (i, s) in segments.iter().enumerate() {
            match s.len {
                Length::Finite(0) => return Err(Error::Contract("segment lengths must be >= 1".into())),
                Length::Infinite if i != 0 && i != last => {
                    return Err(Error::Contract("only the extreme segments may be infinite".into()))
                }
                Length::Finite(_) if i == 0 || i == last => {
                    return Err(Error::Contract("the extreme segments must be infinite".into()))
                }
                _ => {}
            }
        }
        Ok(SegmentBoundary { segments })
    }

    /// `[white oo | black a | white b | black oo]`.
    pub fn two_segment(a: u64, b: u64) -> Result<Self> {
        Self::new(vec![
            Segment::infinite(Color::White),
            Segment::finite(Color::Black, a),
            Segment::finite(Color::White, b),
            Segment::infinite(Color::Black),
        ])
    }

    /// `[white oo | black a | white b | black c | white oo]`.
    pub fn three_segment(a: u64, b: u64, c: u64) -> Result<Self> {
        Self::new(vec![
            Segment::infinite(Color::White),
            Segment::finite(Color::Black, a),
            Segment::finite(Color::White, b),
            Segment::finite(Color::Black, c),
            Segment::infinite(Color::White),
        ])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn end_points(&self) -> usize {
        self.segments.len() - 1
    }

    /// Total finite length of the given color.
    pub fn finite_length(&self, color: Color) -> u64 {
        self.segments
            .iter()
            .filter(|s| s.color == color)
            .map(|s| match s.len {
                Length::Finite(n) => n,
                Length::Infinite => 0,
            })
            .sum()
    }

    fn check_end_point(&self, end_point: usize) -> Result<()> {
        if end_point >= self.end_points() {
            return Err(Error::Contract(format!(
                "end-point {end_point} does not exist ({} end-points)",
                self.end_points()
            )));
        }
        let (l, r) = (self.segments[end_point].len, self.segments[end_point + 1].len);
        if l == Length::Infinite && r == Length::Infinite {
            return Err(Error::Contract("end-point has no finite neighbouring segment".into()));
        }
        Ok(())
    }

    /// Applies `event` at `end_point`, keeping adjacent colors opposite by
    /// merging when a split brings equal colors together.
    pub fn apply(&mut self, end_point: usize, event: PeelEvent) -> Result<PeelEffect> {
        self.check_end_point(end_point)?;
        let mut effect = PeelEffect { swallowed: None, landing_color: None, overshoot: 0 };
        match event {
            PeelEvent::Internal(color) => {
                let idx = if self.segments[end_point].color == color { end_point } else { end_point + 1 };
                if let Length::Finite(n) = &mut self.segments[idx].len {
                    *n += 1;
                }
            }
            PeelEvent::SplitRight(k) => self.swallow(end_point, k, true, &mut effect),
            PeelEvent::SplitLeft(k) => self.swallow(end_point, k, false, &mut effect),
        }
        Ok(effect)
    }

    fn swallow(&mut self, end_point: usize, k: u64, rightwards: bool, effect: &mut PeelEffect) {
        let mut remaining = k;
        // Index of the segment currently being eaten, and of the kept
        // neighbour on the other side of the edge.
        let (mut j, keep) = if rightwards { (end_point + 1, end_point) } else { (end_point, end_point + 1) };
        let mut removed = Vec::new();
        loop {
            match &mut self.segments[j].len {
                Length::Infinite => break,
                Length::Finite(n) if *n > remaining => {
                    *n -= remaining;
                    break;
                }
                Length::Finite(n) => {
                    remaining -= *n;
                    if effect.swallowed.is_none() {
                        effect.swallowed = Some((j, *n));
                        effect.overshoot = remaining;
                    }
                    removed.push(j);
                    if rightwards {
                        j += 1;
                    } else {
                        j -= 1;
                    }
                }
            }
        }
        effect.landing_color = Some(self.segments[j].color);
        if removed.is_empty() {
            return;
        }
        let (lo, hi) = if rightwards { (removed[0], *removed.last().unwrap()) } else { (*removed.last().unwrap(), removed[0]) };
        self.segments.drain(lo..=hi);
        // The kept neighbour and the landing segment are now adjacent.
        let (left, right) = if rightwards { (keep, keep + 1) } else { (keep - removed.len() - 1, keep - removed.len()) };
        if self.segments[left].color == self.segments[right].color {
            let merged = match (self.segments[left].len, self.segments[right].len) {
                (Length::Finite(x), Length::Finite(y)) => Length::Finite(x + y),
                _ => Length::Infinite,
            };
            self.segments[left].len = merged;
            self.segments.remove(right);
        }
    }
}

impl fmt::Display for SegmentBoundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .segments
            .iter()
            .map(|s| {
                let c = if s.color == Color::Black { 'B' } else { 'W' };
                match s.len {
                    Length::Finite(n) => format!("{c}{n}"),
                    Length::Infinite => format!("{c}inf"),
                }
            })
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Draws one peel event at `end_point` and applies it.
pub fn peel_step<R: Rng + ?Sized>(
    boundary: &mut SegmentBoundary,
    end_point: usize,
    dist: &StepDistribution,
    rng: &mut R,
) -> Result<(PeelEvent, PeelEffect)> {
    let event = PeelEvent::sample(dist, rng);
    let effect = boundary.apply(end_point, event)?;
    Ok((event, effect))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossingResult {
    BlackCrossing,
    WhiteCrossing,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingOutcome {
    pub result: CrossingResult,
    /// Peel events simulated (including events with no effect on finite
    /// segments).
    pub steps_used: u64,
    /// Vertices swallowed past the finite segment whose loss ended the run.
    pub terminal_overshoot: u64,
    /// Whether the run was finished by the exact landing law.
    pub completed: bool,
}

impl CrossingOutcome {
    fn undetermined(steps: u64) -> Self {
        CrossingOutcome { result: CrossingResult::Undetermined, steps_used: steps, terminal_overshoot: 0, completed: false }
    }
}

/// Simulation limits for peeling runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeelConfig {
    /// Maximum number of peel events per run.
    pub budget: u64,
    /// In single-interface runs, once the explored finite segment reaches
    /// `max(h, start + 1)` the rest of the run is drawn from the exact
    /// landing law of the walk (strong Markov property; upward moves are
    /// `+1`, so the level is hit exactly). `None` simulates every event.
    pub completion_height: Option<u64>,
}

impl Default for PeelConfig {
    fn default() -> Self {
        PeelConfig { budget: DEFAULT_BUDGET, completion_height: Some(64) }
    }
}

/// One line of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub step_index: u64,
    pub event_kind: &'static str,
    pub k: u64,
    pub black_len: u64,
    pub white_len: u64,
}

impl TraceRecord {
    pub const HEADER: &'static str = "step_index,event_kind,k,black_len,white_len";
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.step_index, self.event_kind, self.k, self.black_len, self.white_len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwoSegmentMode {
    /// Explore at the end-point between the infinite white segment and the
    /// black segment of length `a`.
    Primary,
    /// Explore at the end-point between the white segment of length `b` and
    /// the infinite black segment.
    Dual,
}

/// Boundary plus optional trace sink, shared by the run loops.
struct Runner<F> {
    boundary: SegmentBoundary,
    trace: Option<F>,
}

impl<F: FnMut(&TraceRecord)> Runner<F> {
    fn record(&mut self, step: u64, kind: &'static str, k: u64) {
        if let Some(t) = self.trace.as_mut() {
            let rec = TraceRecord {
                step_index: step,
                event_kind: kind,
                k,
                black_len: self.boundary.finite_length(Color::Black),
                white_len: self.boundary.finite_length(Color::White),
            };
            t(&rec);
        }
    }

    /// Applies one event and reports the outcome if the run ended.
    fn step(&mut self, steps: u64, end_point: usize, event: PeelEvent) -> Result<Option<CrossingOutcome>> {
        let before = self.boundary.end_points();
        let effect = self.boundary.apply(end_point, event)?;
        if self.boundary.end_points() > before {
            return Err(Error::Consistency("number of interface end-points increased".into()));
        }
        self.record(steps, event.kind(), event.k());
        Ok(effect.swallowed.map(|_| CrossingOutcome {
            result: match effect.landing_color {
                Some(Color::Black) => CrossingResult::BlackCrossing,
                _ => CrossingResult::WhiteCrossing,
            },
            steps_used: steps,
            terminal_overshoot: effect.overshoot,
            completed: false,
        }))
    }
}

/// Crossing between the black segment `a` and the infinite black segment
/// across `b` white vertices, by following a single interface.
///
/// In [`TwoSegmentMode::Primary`] the explored black length performs the
/// boundary walk and a black crossing occurs iff its overshoot is at least
/// `b`. In [`TwoSegmentMode::Dual`] the colors and sides are exchanged: the
/// white length walks from `b` and a black crossing occurs iff its overshoot
/// is below `a`.
pub fn run_two_segment<R: Rng + ?Sized>(
    a: u64,
    b: u64,
    mode: TwoSegmentMode,
    config: &PeelConfig,
    dist: &StepDistribution,
    rng: &mut R,
) -> Result<CrossingOutcome> {
    TwoSegmentSimulator::new(a, b, mode, *config)?.run(dist, rng)
}

/// [`run_two_segment`] with a per-event trace callback.
pub fn run_two_segment_traced<R: Rng + ?Sized, F: FnMut(&TraceRecord)>(
    a: u64,
    b: u64,
    mode: TwoSegmentMode,
    config: &PeelConfig,
    dist: &StepDistribution,
    rng: &mut R,
    trace: F,
) -> Result<CrossingOutcome> {
    TwoSegmentSimulator::new(a, b, mode, *config)?.run_traced(dist, rng, Some(trace))
}

/// Two-segment runs at fixed parameters, with the completion law
/// precomputed once.
pub struct TwoSegmentSimulator {
    a: u64,
    b: u64,
    mode: TwoSegmentMode,
    budget: u64,
    landing: Option<LandingSampler>,
}

impl TwoSegmentSimulator {
    pub fn new(a: u64, b: u64, mode: TwoSegmentMode, config: PeelConfig) -> Result<Self> {
        if a < 1 || b < 1 {
            return Err(Error::Domain("a, b must be >= 1".into()));
        }
        let start = if mode == TwoSegmentMode::Primary { a } else { b };
        let landing = match config.completion_height {
            Some(h) => Some(LandingSampler::new(h.max(start + 1))?),
            None => None,
        };
        Ok(TwoSegmentSimulator { a, b, mode, budget: config.budget, landing })
    }

    pub fn run<R: Rng + ?Sized>(&self, dist: &StepDistribution, rng: &mut R) -> Result<CrossingOutcome> {
        self.run_traced(dist, rng, None::<fn(&TraceRecord)>)
    }

    pub fn run_traced<R: Rng + ?Sized, F: FnMut(&TraceRecord)>(
        &self,
        dist: &StepDistribution,
        rng: &mut R,
        trace: Option<F>,
    ) -> Result<CrossingOutcome> {
        let (end_point, tracked) = match self.mode {
            TwoSegmentMode::Primary => (0, 1),
            TwoSegmentMode::Dual => (2, 2),
        };
        let boundary = SegmentBoundary::two_segment(self.a, self.b)?;
        let mut runner = Runner { boundary, trace };
        runner.record(0, "start", 0);
        let level = self.landing.as_ref().map_or(u64::MAX, |l| l.start());
        for steps in 1..=self.budget {
            let event = PeelEvent::sample(dist, rng);
            if let Some(out) = runner.step(steps, end_point, event)? {
                return Ok(out);
            }
            let Length::Finite(n) = runner.boundary.segments[tracked].len else { unreachable!() };
            if n >= level {
                // Finish with the killing jump drawn from the exact law.
                let (_, overshoot) = self.landing.as_ref().expect("level is set").sample(dist, rng);
                let event = match self.mode {
                    TwoSegmentMode::Primary => PeelEvent::SplitRight(n + overshoot),
                    TwoSegmentMode::Dual => PeelEvent::SplitLeft(n + overshoot),
                };
                let mut out = runner
                    .step(steps, end_point, event)?
                    .ok_or_else(|| Error::Consistency("completion jump did not end the run".into()))?;
                out.completed = true;
                return Ok(out);
            }
        }
        Ok(CrossingOutcome::undetermined(self.budget))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThreeSegmentVariant {
    /// Explore at the corner between the segments of lengths `a` and `b`.
    LeftCorner,
    /// Explore at the corner between the segments of lengths `b` and `c`.
    RightCorner,
}

/// Crossing between two finite black segments `a`, `c` separated by `b`
/// white vertices, everything else white, by following the interface from a
/// corner between finite segments. The two adjacent lengths perform
/// independent walks in the embedded chain; a black crossing occurs iff the
/// white walk dies first and lands inside the far black segment.
pub fn run_three_segment<R: Rng + ?Sized>(
    a: u64,
    b: u64,
    c: u64,
    variant: ThreeSegmentVariant,
    config: &PeelConfig,
    dist: &StepDistribution,
    rng: &mut R,
) -> Result<CrossingOutcome> {
    let boundary =
        SegmentBoundary::three_segment(a, b, c).map_err(|_| Error::Domain("a, b, c must be >= 1".into()))?;
    let end_point = match variant {
        ThreeSegmentVariant::LeftCorner => 1,
        ThreeSegmentVariant::RightCorner => 2,
    };
    let mut runner = Runner { boundary, trace: None::<fn(&TraceRecord)> };
    for steps in 1..=config.budget {
        let event = PeelEvent::sample(dist, rng);
        if let Some(out) = runner.step(steps, end_point, event)? {
            return Ok(out);
        }
    }
    Ok(CrossingOutcome::undetermined(config.budget))
}

/// Exploration along both interfaces that touch an infinite segment of the
/// two-segment boundary, revealing triangles at rates `1` (left, next to the
/// black segment) and `rate_ratio` (right, next to the white segment).
pub fn run_mixed_growth<R: Rng + ?Sized>(
    a: u64,
    b: u64,
    rate_ratio: f64,
    config: &PeelConfig,
    dist: &StepDistribution,
    rng: &mut R,
) -> Result<CrossingOutcome> {
    if !(rate_ratio > 0.0 && rate_ratio.is_finite()) {
        return Err(Error::Domain(format!("rate ratio must be positive, got {rate_ratio}")));
    }
    let boundary = SegmentBoundary::two_segment(a, b).map_err(|_| Error::Domain("a, b must be >= 1".into()))?;
    let left_weight = 1.0 / (1.0 + rate_ratio);
    let mut runner = Runner { boundary, trace: None::<fn(&TraceRecord)> };
    for steps in 1..=config.budget {
        // The right end-point is always the last one while the run is alive.
        let end_point = if rng.random::<f64>() < left_weight { 0 } else { runner.boundary.end_points() - 1 };
        let event = PeelEvent::sample(dist, rng);
        if let Some(out) = runner.step(steps, end_point, event)? {
            return Ok(out);
        }
    }
    Ok(CrossingOutcome::undetermined(config.budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn b2(a: u64, b: u64) -> SegmentBoundary {
        SegmentBoundary::two_segment(a, b).unwrap()
    }

    #[test]
    fn boundary_validation() {
        assert!(SegmentBoundary::new(vec![]).is_err());
        assert!(SegmentBoundary::new(vec![Segment::finite(Color::Black, 1), Segment::finite(Color::Black, 2)]).is_err());
        assert!(SegmentBoundary::new(vec![
            Segment::finite(Color::Black, 1),
            Segment::infinite(Color::White),
            Segment::finite(Color::Black, 1)
        ])
        .is_err());
        assert!(SegmentBoundary::two_segment(0, 1).is_err());
        assert_eq!(b2(3, 4).to_string(), "[Winf B3 W4 Binf]");
    }

    #[test]
    fn internal_vertex_joins_its_color() {
        let mut s = SegmentBoundary::new(vec![
            Segment::infinite(Color::White),
            Segment::finite(Color::Black, 4),
            Segment::infinite(Color::White),
        ])
        .unwrap();
        s.apply(0, PeelEvent::Internal(Color::Black)).unwrap();
        assert_eq!(s.segments()[1].len, Length::Finite(5));
        s.apply(0, PeelEvent::Internal(Color::White)).unwrap();
        assert_eq!(s.to_string(), "[Winf B5 Winf]");
    }

    #[test]
    fn split_into_infinite_side_leaves_pattern() {
        let mut s = b2(4, 2);
        let eff = s.apply(0, PeelEvent::SplitLeft(1000)).unwrap();
        assert_eq!(s, b2(4, 2));
        assert_eq!(eff.swallowed, None);
        assert_eq!(eff.landing_color, Some(Color::White));
    }

    #[test]
    fn split_within_and_past_a_segment() {
        let mut s = b2(4, 2);
        s.apply(0, PeelEvent::SplitRight(3)).unwrap();
        assert_eq!(s, b2(1, 2));
        // Swallow the black segment and land on the first white vertex.
        let eff = s.apply(0, PeelEvent::SplitRight(1)).unwrap();
        assert_eq!(eff.swallowed, Some((1, 1)));
        assert_eq!(eff.overshoot, 0);
        assert_eq!(eff.landing_color, Some(Color::White));
        assert_eq!(s.to_string(), "[Winf Binf]");
        assert_eq!(s.end_points(), 1);

        // Landing past the white segment reaches the infinite black one.
        let mut s = b2(3, 2);
        let eff = s.apply(0, PeelEvent::SplitRight(5)).unwrap();
        assert_eq!(eff.overshoot, 2);
        assert_eq!(eff.landing_color, Some(Color::Black));
        assert_eq!(s.to_string(), "[Winf Binf]");
    }

    #[test]
    fn left_splits_mirror_right_splits() {
        let mut s = SegmentBoundary::three_segment(3, 2, 4).unwrap();
        // From the b|c corner, swallow the white segment and 1 black vertex.
        let eff = s.apply(2, PeelEvent::SplitLeft(3)).unwrap();
        assert_eq!(eff.swallowed, Some((2, 2)));
        assert_eq!(eff.overshoot, 1);
        assert_eq!(eff.landing_color, Some(Color::Black));
        assert_eq!(s.to_string(), "[Winf B6 Winf]");
    }

    #[test]
    fn contract_violations() {
        let mut s = b2(1, 1);
        assert!(matches!(s.apply(3, PeelEvent::Internal(Color::Black)), Err(Error::Contract(_))));
        let mut s = SegmentBoundary::new(vec![Segment::infinite(Color::White), Segment::infinite(Color::Black)]).unwrap();
        assert!(s.apply(0, PeelEvent::SplitLeft(1)).is_err());
        assert!(SegmentBoundary::new(vec![Segment::finite(Color::White, 3), Segment::infinite(Color::Black)]).is_err());
    }

    #[test]
    fn event_law_frequencies() {
        let d = StepDistribution::default();
        let mut rng = seeded(31);
        let n = 600_000u64;
        let (mut black, mut left1, mut right2) = (0u64, 0u64, 0u64);
        for _ in 0..n {
            match PeelEvent::sample(&d, &mut rng) {
                PeelEvent::Internal(Color::Black) => black += 1,
                PeelEvent::SplitLeft(1) => left1 += 1,
                PeelEvent::SplitRight(2) => right2 += 1,
                _ => {}
            }
        }
        for (c, p) in [(black, 1.0 / 3.0), (left1, 1.0 / 8.0), (right2, 1.0 / 48.0)] {
            let f = c as f64 / n as f64;
            assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
        }
    }

    #[test]
    fn trace_records_every_event() {
        let d = StepDistribution::default();
        let mut rng = seeded(32);
        let mut lines = Vec::new();
        let cfg = PeelConfig { budget: 10_000, completion_height: None };
        let out = run_two_segment_traced(2, 3, TwoSegmentMode::Primary, &cfg, &d, &mut rng, |r: &TraceRecord| {
            lines.push(r.to_string())
        })
        .unwrap();
        assert_eq!(lines[0], "0,start,0,2,3");
        if out.result != CrossingResult::Undetermined {
            assert_eq!(lines.len() as u64, out.steps_used + 1);
        }
    }

    fn arb_boundary() -> impl Strategy<Value = SegmentBoundary> {
        (any::<bool>(), prop::collection::vec(1u64..12, 0..6)).prop_map(|(first_black, lens)| {
            let mut color = if first_black { Color::Black } else { Color::White };
            let mut segs = vec![Segment::infinite(color)];
            for n in lens {
                color = color.opposite();
                segs.push(Segment::finite(color, n));
            }
            segs.push(Segment::infinite(color.opposite()));
            SegmentBoundary::new(segs).unwrap()
        })
    }

    fn arb_event() -> impl Strategy<Value = PeelEvent> {
        prop_oneof![
            any::<bool>().prop_map(|b| PeelEvent::Internal(if b { Color::Black } else { Color::White })),
            (1u64..40).prop_map(PeelEvent::SplitLeft),
            (1u64..40).prop_map(PeelEvent::SplitRight),
        ]
    }

    proptest! {
        #[test]
        fn peeling_keeps_boundary_invariants(
            start in arb_boundary(),
            moves in prop::collection::vec((any::<prop::sample::Index>(), arb_event()), 1..40),
        ) {
            let mut s = start;
            for (pick, event) in moves {
                if s.end_points() == 0 {
                    break;
                }
                let ep = pick.index(s.end_points());
                let before = s.clone();
                match s.apply(ep, event) {
                    Err(_) => {
                        // Only rejected when both neighbours are infinite, and
                        // then nothing changes.
                        prop_assert_eq!(&s, &before);
                        continue;
                    }
                    Ok(effect) => {
                        prop_assert!(s.end_points() <= before.end_points());
                        prop_assert!(SegmentBoundary::new(s.segments().to_vec()).is_ok());
                        let total = |b: &SegmentBoundary| {
                            (b.finite_length(Color::Black) + b.finite_length(Color::White)) as i64
                        };
                        let removed_finite = total(&before) - total(&s);
                        match event {
                            PeelEvent::Internal(_) => prop_assert!(removed_finite == 0 || removed_finite == -1),
                            PeelEvent::SplitLeft(k) | PeelEvent::SplitRight(k) => {
                                prop_assert!(removed_finite >= 0);
                                prop_assert!(effect.landing_color.is_some());
                                if let Some((_, n)) = effect.swallowed {
                                    prop_assert!(n + effect.overshoot <= k);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
