use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::MonodromyError;

/// Detour discs around interfering poles use this fraction of the pole's
/// loop radius, which keeps the discs pairwise disjoint.
const DETOUR_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::CounterClockwise => 1.0,
            Orientation::Clockwise => -1.0,
        }
    }

    fn flipped(self) -> Self {
        match self {
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::CounterClockwise,
        }
    }
}

/// A path piece. Endpoints are stored so that consecutive segments join
/// exactly; the interior is evaluated from the geometric data.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Line {
        start: Complex64,
        end: Complex64,
    },
    Arc {
        center: Complex64,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
        orientation: Orientation,
        start: Complex64,
        end: Complex64,
    },
}

impl Segment {
    pub fn line(start: Complex64, end: Complex64) -> Self {
        Segment::Line { start, end }
    }

    /// Arc from `angle_start` to `angle_end`, travelled in `orientation`.
    /// The angles are taken literally: for a counterclockwise arc
    /// `angle_end >= angle_start`, and a full circle has
    /// `angle_end = angle_start + 2 pi` and identical endpoints.
    pub fn arc(
        center: Complex64,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
        orientation: Orientation,
    ) -> Self {
        let start = center + Complex64::from_polar(radius, angle_start);
        let sweep = (angle_end - angle_start).abs();
        let end = if (sweep - TAU).abs() <= 4.0 * f64::EPSILON * TAU {
            start
        } else {
            center + Complex64::from_polar(radius, angle_end)
        };
        Segment::Arc {
            center,
            radius,
            angle_start,
            angle_end,
            orientation,
            start,
            end,
        }
    }

    pub fn start_point(&self) -> Complex64 {
        match self {
            Segment::Line { start, .. } | Segment::Arc { start, .. } => *start,
        }
    }

    pub fn end_point(&self) -> Complex64 {
        match self {
            Segment::Line { end, .. } | Segment::Arc { end, .. } => *end,
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            Segment::Line { start, end } => (end - start).norm(),
            Segment::Arc {
                radius,
                angle_start,
                angle_end,
                ..
            } => radius * (angle_end - angle_start).abs(),
        }
    }

    /// Point and unit tangent `dz/ds` at arc length `s` from the start.
    pub fn point(&self, s: f64) -> (Complex64, Complex64) {
        match self {
            Segment::Line { start, end } => {
                let len = (end - start).norm();
                if len == 0.0 {
                    return (*start, Complex64::new(0.0, 0.0));
                }
                let u = (end - start) / len;
                (start + u * s, u)
            }
            Segment::Arc {
                center,
                radius,
                angle_start,
                orientation,
                ..
            } => {
                let sign = orientation.sign();
                let theta = angle_start + sign * s / radius;
                let e = Complex64::from_polar(1.0, theta);
                (center + e * *radius, Complex64::new(0.0, sign) * e)
            }
        }
    }

    pub fn reversed(&self) -> Self {
        match self {
            Segment::Line { start, end } => Segment::Line {
                start: *end,
                end: *start,
            },
            Segment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                orientation,
                start,
                end,
            } => Segment::Arc {
                center: *center,
                radius: *radius,
                angle_start: *angle_end,
                angle_end: *angle_start,
                orientation: orientation.flipped(),
                start: *end,
                end: *start,
            },
        }
    }

    /// Distance from `p` to the segment.
    pub fn distance_to(&self, p: Complex64) -> f64 {
        match self {
            Segment::Line { start, end } => {
                let d = end - start;
                let len2 = d.norm_sqr();
                if len2 == 0.0 {
                    return (p - start).norm();
                }
                let t = ((p - start) * d.conj()).re / len2;
                let t = t.clamp(0.0, 1.0);
                (p - (start + d * t)).norm()
            }
            Segment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                start,
                end,
                ..
            } => {
                let endpoints = (p - start).norm().min((p - end).norm());
                let rel = p - center;
                if rel.norm() == 0.0 {
                    return *radius;
                }
                let (lo, hi) = if angle_start <= angle_end {
                    (*angle_start, *angle_end)
                } else {
                    (*angle_end, *angle_start)
                };
                let phi = rel.arg();
                let k = ((lo - phi) / TAU).ceil();
                if phi + k * TAU <= hi {
                    (rel.norm() - radius).abs()
                } else {
                    endpoints
                }
            }
        }
    }
}

/// Contiguous segments from `start_point()` to `end_point()`, together with
/// the minimum distance to the poles they were built to avoid.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationPath {
    segments: Vec<Segment>,
    clearance: f64,
}

impl ContinuationPath {
    /// Checks contiguity and records the audited clearance from `poles`.
    pub fn new(segments: Vec<Segment>, poles: &[Complex64]) -> Result<Self, MonodromyError> {
        if segments.is_empty() {
            return Err(MonodromyError::EmptyPath);
        }
        for (k, w) in segments.windows(2).enumerate() {
            if w[0].end_point() != w[1].start_point() {
                return Err(MonodromyError::Discontinuous { segment: k + 1 });
            }
        }
        let clearance = audit_clearance(&segments, poles);
        if !(clearance > 0.0) {
            return Err(MonodromyError::PathHitsPole { clearance });
        }
        Ok(Self {
            segments,
            clearance,
        })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn start_point(&self) -> Complex64 {
        self.segments[0].start_point()
    }

    pub fn end_point(&self) -> Complex64 {
        self.segments[self.segments.len() - 1].end_point()
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn is_closed(&self) -> bool {
        self.start_point() == self.end_point()
    }

    pub fn reversed(&self) -> Self {
        Self {
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            clearance: self.clearance,
        }
    }
}

/// Minimum distance from any segment to any pole.
pub fn audit_clearance(segments: &[Segment], poles: &[Complex64]) -> f64 {
    segments
        .iter()
        .flat_map(|s| poles.iter().map(move |&p| s.distance_to(p)))
        .fold(f64::INFINITY, f64::min)
}

/// Standard generators of the fundamental group of the punctured plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSet {
    pub base_point: Complex64,
    /// One loop per pole, in pole order.
    pub loops: Vec<ContinuationPath>,
    /// Loop radii `r_j`.
    pub radii: Vec<f64>,
    /// Pole indices in composition order: the loop around
    /// `composition_order[0]` is traversed first, and with `M_j` the
    /// transfer along loop `j`,
    /// `M[order[n-1]] ... M[order[0]] = I`.
    pub composition_order: Vec<usize>,
}

/// Default base point `1 + max |a_i|` on the positive real axis.
pub fn default_base_point(poles: &[Complex64]) -> Complex64 {
    let r = poles.iter().map(|a| a.norm()).fold(0.0, f64::max);
    Complex64::new(1.0 + r, 0.0)
}

/// Loop `j`: a chord from the base point toward `a_j` (detouring around
/// other poles whose disc it would cross), a full counterclockwise circle
/// of radius `r_j` about `a_j`, and the chord reversed.
///
/// `r_j` is half the distance from `a_j` to the nearest other pole or the
/// base point. A chord passing within `0.75 r_k` of another pole `a_k`
/// follows that circle instead, on the side of `a_k` the chord was already
/// on; a chord through `a_k` keeps `a_k` on its left.
pub fn build_loops(
    poles: &[Complex64],
    base: Option<Complex64>,
) -> Result<LoopSet, MonodromyError> {
    let z0 = base.unwrap_or_else(|| default_base_point(poles));
    if !(z0.re.is_finite() && z0.im.is_finite()) {
        return Err(MonodromyError::BadBasePoint { base: z0 });
    }
    let scale = poles
        .iter()
        .map(|a| a.norm())
        .fold(z0.norm(), f64::max)
        .max(1.0);
    let radii: Vec<f64> = poles
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let others = poles
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, b)| (a - b).norm())
                .fold(f64::INFINITY, f64::min);
            0.5 * others.min((z0 - a).norm())
        })
        .collect();
    for (j, &r) in radii.iter().enumerate() {
        if (z0 - poles[j]).norm() <= 1e-12 * scale {
            return Err(MonodromyError::BadBasePoint { base: z0 });
        }
        if !(r > 1e-12 * scale) {
            return Err(MonodromyError::DegenerateGeometry { pole: j, radius: r });
        }
    }

    let mut loops = Vec::with_capacity(poles.len());
    for (j, &a) in poles.iter().enumerate() {
        let u = (z0 - a) / (z0 - a).norm();
        let theta = u.arg();
        let circle_start = a + u * radii[j];
        let approach = chord(z0, circle_start, poles, &radii, j);
        let mut segments = approach.clone();
        let circle = Segment::arc(
            a,
            radii[j],
            theta,
            theta + TAU,
            Orientation::CounterClockwise,
        );
        // Snap so the chord's end and the circle's start agree exactly.
        let circle = match circle {
            Segment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                orientation,
                ..
            } => Segment::Arc {
                center,
                radius,
                angle_start,
                angle_end,
                orientation,
                start: circle_start,
                end: circle_start,
            },
            line => line,
        };
        segments.push(circle);
        segments.extend(approach.iter().rev().map(Segment::reversed));
        loops.push(ContinuationPath::new(segments, poles)?);
    }

    Ok(LoopSet {
        base_point: z0,
        loops,
        radii,
        composition_order: composition_order(poles, z0),
    })
}

/// Straight segment from `from` to `to` with arcs around every pole
/// `k != target` whose detour disc it crosses.
fn chord(
    from: Complex64,
    to: Complex64,
    poles: &[Complex64],
    radii: &[f64],
    target: usize,
) -> Vec<Segment> {
    let d = to - from;
    let len = d.norm();
    let u = d / len;
    // (entry parameter, exit parameter, pole index)
    let mut crossings: Vec<(f64, f64, usize)> = Vec::new();
    for (k, &a) in poles.iter().enumerate() {
        if k == target {
            continue;
        }
        let rho = DETOUR_FRACTION * radii[k];
        let rel = (a - from) * u.conj();
        let (along, across) = (rel.re, rel.im);
        if across.abs() >= rho {
            continue;
        }
        let half = (rho * rho - across * across).sqrt();
        let (t0, t1) = (along - half, along + half);
        if t1 <= 0.0 || t0 >= len {
            continue;
        }
        crossings.push((t0, t1, k));
    }
    crossings.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut segments = Vec::new();
    let mut cursor = from;
    for (t0, t1, k) in crossings {
        let a = poles[k];
        let rho = DETOUR_FRACTION * radii[k];
        let entry = from + u * t0;
        let exit = from + u * t1;
        let across = ((a - from) * u.conj()).im;
        // Pole on the left of the direction of travel (or on the chord):
        // go around it counterclockwise.
        let orientation = if across >= 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        };
        let alpha0 = (entry - a).arg();
        let mut alpha1 = (exit - a).arg();
        match orientation {
            Orientation::CounterClockwise => {
                while alpha1 <= alpha0 {
                    alpha1 += TAU;
                }
            }
            Orientation::Clockwise => {
                while alpha1 >= alpha0 {
                    alpha1 -= TAU;
                }
            }
        }
        debug_assert!((alpha1 - alpha0).abs() <= PI * (1.0 + 1e-12));
        if cursor != entry {
            segments.push(Segment::line(cursor, entry));
        }
        let mut arc = Segment::arc(a, rho, alpha0, alpha1, orientation);
        if let Segment::Arc { start, end, .. } = &mut arc {
            *start = entry;
            *end = exit;
        }
        segments.push(arc);
        cursor = exit;
    }
    segments.push(Segment::line(cursor, to));
    segments
}

/// Poles sorted by the direction in which their loops leave `z0`,
/// counterclockwise, starting after the widest empty angular sector.
/// Poles in the same direction are ordered farthest first: the loop to a
/// far pole passes the nearer ones keeping them on its left.
fn composition_order(poles: &[Complex64], z0: Complex64) -> Vec<usize> {
    let n = poles.len();
    let angle = |j: usize| (poles[j] - z0).arg();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| {
        angle(x)
            .total_cmp(&angle(y))
            .then((poles[y] - z0).norm().total_cmp(&(poles[x] - z0).norm()))
    });
    // widest gap between consecutive directions (cyclically)
    let mut cut = 0;
    let mut widest = -1.0;
    for k in 0..n {
        let a = angle(idx[k]);
        let b = angle(idx[(k + 1) % n]);
        let gap = if k + 1 == n { b + TAU - a } else { b - a };
        if gap > widest {
            widest = gap;
            cut = (k + 1) % n;
        }
    }
    idx.rotate_left(cut);
    idx
}
