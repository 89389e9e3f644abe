//! Dormand–Prince 5(4) integration of `Y' = Omega(z) Y` along a path,
//! parameterized by arc length.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::path::{ContinuationPath, Segment};
use super::MonodromyError;

type M = DMatrix<Complex64>;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;
const MAX_STEPS: usize = 2_000_000;
/// Reported error estimate = accumulated local error estimates times this.
pub const ERROR_SAFETY_FACTOR: f64 = 10.0;

/// Coefficient matrix `Omega(z)` of `Y' = Omega(z) Y`.
pub trait Coefficients: Sync {
    fn dimension(&self) -> usize;
    /// Writes `Omega(z)` into `out`.
    fn eval_into(&self, z: Complex64, out: &mut M);
}

/// Poles and residues of `Omega(z) = sum_i B_i / (z - a_i)`.
#[derive(Debug, Clone, Copy)]
pub struct Field<'a> {
    pub poles: &'a [Complex64],
    pub residues: &'a [M],
}

impl Coefficients for Field<'_> {
    fn dimension(&self) -> usize {
        self.residues.first().map_or(0, |b| b.nrows())
    }

    fn eval_into(&self, z: Complex64, out: &mut M) {
        out.fill(Complex64::new(0.0, 0.0));
        for (a, b) in self.poles.iter().zip(self.residues) {
            let w = (z - a).inv();
            out.zip_apply(b, |o, x| *o += x * w);
        }
    }
}

/// `out = Omega(z(s)) z'(s)`.
fn eval_on_segment<F: Coefficients + ?Sized>(field: &F, seg: &Segment, s: f64, out: &mut M) {
    let (z, dz) = seg.point(s);
    field.eval_into(z, out);
    for v in out.iter_mut() {
        *v *= dz;
    }
}

/// Result of continuing the identity along a path.
#[derive(Debug, Clone)]
pub struct Transfer {
    pub matrix: M,
    pub error_estimate: f64,
    /// Accepted step sizes, one list per segment.
    pub mesh: Mesh,
}

/// Accepted step sizes per segment; replaying a mesh gives a map that is
/// smooth in the residues.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh(pub Vec<Vec<f64>>);

impl Mesh {
    pub fn steps(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }
}

struct Workspace {
    k: [M; 7],
    omega: M,
    stage: M,
    y_new: M,
    err: M,
}

impl Workspace {
    fn new(p: usize) -> Self {
        let z = || M::zeros(p, p);
        Self {
            k: [z(), z(), z(), z(), z(), z(), z()],
            omega: z(),
            stage: z(),
            y_new: z(),
            err: z(),
        }
    }

    /// One DP5 step from `(s, y)` with step `h`; leaves the 5th-order
    /// solution in `y_new` and the error vector in `err`. `k[0]` must hold
    /// the derivative at `(s, y)`.
    fn step<F: Coefficients + ?Sized>(&mut self, field: &F, seg: &Segment, s: f64, h: f64, y: &M) {
        for i in 1..7 {
            self.stage.copy_from(y);
            for j in 0..i {
                let a = A[i][j];
                if a != 0.0 {
                    self.stage
                        .zip_apply(&self.k[j], |st, kj| *st += kj * (a * h));
                }
            }
            eval_on_segment(field, seg, s + C[i] * h, &mut self.omega);
            self.omega.mul_to(&self.stage, &mut self.k[i]);
            if i == 6 {
                // The last stage is evaluated at the 5th-order solution.
                self.y_new.copy_from(&self.stage);
            }
        }
        self.err.fill(Complex64::new(0.0, 0.0));
        for i in 0..7 {
            let e = E[i];
            if e != 0.0 {
                self.err.zip_apply(&self.k[i], |er, ki| *er += ki * (e * h));
            }
        }
    }

    fn derivative_into_k0<F: Coefficients + ?Sized>(
        &mut self,
        field: &F,
        seg: &Segment,
        s: f64,
        y: &M,
    ) {
        eval_on_segment(field, seg, s, &mut self.omega);
        self.omega.mul_to(y, &mut self.k[0]);
    }
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Continues `Y(start) = I` along `path` with local error per unit arc
/// length at most `tol / length`, measured entrywise relative to
/// `1 + |Y|`.
pub fn continue_identity<F: Coefficients + ?Sized>(
    field: &F,
    path: &ContinuationPath,
    tol: f64,
) -> Result<Transfer, MonodromyError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(MonodromyError::BadTolerance { tol });
    }
    let p = field.dimension();
    let total = path.length();
    let mut y = M::identity(p, p);
    if total == 0.0 {
        return Ok(Transfer {
            matrix: y,
            error_estimate: 0.0,
            mesh: Mesh(vec![Vec::new(); path.segments().len()]),
        });
    }
    let per_length = tol / total;
    let mut ws = Workspace::new(p);
    let mut accumulated = 0.0;
    let mut steps = 0usize;
    let mut mesh = Vec::with_capacity(path.segments().len());
    // first trial step: a fraction of the clearance
    let mut h = (0.1 * path.clearance()).min(total);

    for seg in path.segments() {
        let len = seg.length();
        let mut seg_steps = Vec::new();
        let mut s = 0.0;
        if len == 0.0 {
            mesh.push(seg_steps);
            continue;
        }
        ws.derivative_into_k0(field, seg, s, &y);
        while s < len {
            let last = h >= len - s;
            let step = if last { len - s } else { h };
            ws.step(field, seg, s, step, &y);
            let scale = 1.0 + max_abs(&y).max(max_abs(&ws.y_new));
            let err = max_abs(&ws.err) / scale;
            if !err.is_finite() {
                return Err(MonodromyError::NonFinite);
            }
            let allowed = per_length * step;
            if err <= allowed {
                s = if last { len } else { s + step };
                y.copy_from(&ws.y_new);
                ws.k.swap(0, 6);
                accumulated += err * scale;
                seg_steps.push(step);
                steps += 1;
                if steps > MAX_STEPS {
                    return Err(MonodromyError::TooManySteps { steps });
                }
            }
            let ratio = if err == 0.0 {
                MAX_GROWTH
            } else {
                (SAFETY * (allowed / err).powf(0.25)).clamp(MIN_SHRINK, MAX_GROWTH)
            };
            // keep the step size from the interior of the segment rather
            // than the truncated last step
            if !(last && err <= allowed) {
                h = step * ratio;
            }
            if h < 1e-14 * total {
                return Err(MonodromyError::StepUnderflow { at: seg.point(s).0 });
            }
        }
        mesh.push(seg_steps);
    }
    Ok(Transfer {
        matrix: y,
        error_estimate: ERROR_SAFETY_FACTOR * accumulated,
        mesh: Mesh(mesh),
    })
}

/// Fixed-step DP5 along `path` with the step sizes of `mesh`.
pub fn replay<F: Coefficients + ?Sized>(
    field: &F,
    path: &ContinuationPath,
    mesh: &Mesh,
) -> Result<M, MonodromyError> {
    let p = field.dimension();
    let mut y = M::identity(p, p);
    let mut ws = Workspace::new(p);
    for (seg, steps) in path.segments().iter().zip(&mesh.0) {
        let mut s = 0.0;
        if !steps.is_empty() {
            ws.derivative_into_k0(field, seg, s, &y);
        }
        for &h in steps {
            ws.step(field, seg, s, h, &y);
            y.copy_from(&ws.y_new);
            ws.k.swap(0, 6);
            s += h;
        }
    }
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MonodromyError::NonFinite);
    }
    Ok(y)
}
