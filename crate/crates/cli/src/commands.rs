use std::fmt::Write as _;
use std::path::Path;

use fuchsia::equivalence::{
    companion_of_scalar, matrix_from_module, module_from_matrix, DifferentialModule, RationalMatrix,
};
use fuchsia::inverse::{solve, InstanceOptions, InverseError, InverseProblemInstance};
use fuchsia::io::{self, InstanceFile, IoError, SystemFile};
use fuchsia::linalg::LinalgError;
use fuchsia::monodromy::{
    monodromy_from, verify_theorem_with, MonodromyError, PoleStatus, VerifyOptions,
};
use fuchsia::system::{
    galois_generators, is_non_resonant, levelt_data, FuchsianSystem, SystemError,
};
use num_complex::Complex64;

use crate::{Form, SystemArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Default)]
pub struct Outcome {
    pub code: u8,
    /// Human-readable summary for stdout.
    pub text: String,
    /// Serialized JSON payload.
    pub json: Option<String>,
    /// When set, the payload goes to stdout if no `--json` path is given.
    pub payload_is_output: bool,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl Outcome {
    fn fail(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            error: Some(message.into()),
            ..Self::default()
        }
    }
}

fn linalg_code(e: &LinalgError) -> u8 {
    match e {
        LinalgError::NotConverged { .. }
        | LinalgError::AmbiguousClustering { .. }
        | LinalgError::ExpOverflow { .. } => EXIT_NUMERIC,
        _ => EXIT_INPUT,
    }
}

fn system_code(e: &SystemError) -> u8 {
    match e {
        SystemError::Linalg(l) => linalg_code(l),
        _ => EXIT_INPUT,
    }
}

fn monodromy_code(e: &MonodromyError) -> u8 {
    match e {
        MonodromyError::BadBasePoint { .. }
        | MonodromyError::DegenerateGeometry { .. }
        | MonodromyError::BadTolerance { .. } => EXIT_INPUT,
        MonodromyError::System(s) => system_code(s),
        MonodromyError::Linalg(l) => linalg_code(l),
        _ => EXIT_NUMERIC,
    }
}

fn inverse_code(e: &InverseError) -> u8 {
    match e {
        InverseError::Monodromy(m) => monodromy_code(m),
        InverseError::System(s) => system_code(s),
        InverseError::Linalg(l) => linalg_code(l),
        _ => EXIT_INPUT,
    }
}

fn io_code(e: &IoError) -> u8 {
    match e {
        IoError::System(s) => system_code(s),
        _ => EXIT_INPUT,
    }
}

fn read(path: &Path) -> Result<String, Outcome> {
    std::fs::read_to_string(path)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn load_system(file: &Path, tol: f64) -> Result<FuchsianSystem, Outcome> {
    let text = read(file)?;
    SystemFile::parse(&text)
        .and_then(|f| f.validate(tol))
        .map_err(|e| Outcome::fail(io_code(&e), format!("{}: {e}", file.display())))
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

macro_rules! tri {
    ($e:expr, $code:expr) => {
        match $e {
            Ok(v) => v,
            Err(e) => return Outcome::fail($code(&e), e.to_string()),
        }
    };
}

pub fn check(file: &Path, tol: f64, resonance_tol: f64) -> Outcome {
    let sys = match load_system(file, tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let resonance = tri!(is_non_resonant(&sys, resonance_tol), system_code);
    let levelt = tri!(levelt_data(&sys), system_code);
    let mut text = String::new();
    let _ = writeln!(
        text,
        "system: dimension {}, {} poles, residue-sum defect {:.3e}",
        sys.dimension(),
        sys.pole_count(),
        sys.residue_sum_defect()
    );
    let mut warnings = Vec::new();
    for (j, (r, l)) in resonance.poles.iter().zip(&levelt.poles).enumerate() {
        let _ = writeln!(text, "pole {j} at {}:", fmt_c(sys.poles()[j]));
        for &(e, k) in &r.eigenvalues {
            let _ = writeln!(text, "  eigenvalue {} (multiplicity {k})", fmt_c(e));
        }
        for rec in &l.records {
            let _ = writeln!(
                text,
                "  levelt: {} = {} + {}",
                fmt_c(rec.lambda),
                rec.integer_part,
                fmt_c(rec.normalized_part)
            );
        }
        for w in &r.witnesses {
            warnings.push(format!(
                "pole {j} is resonant: {} - {} is close to {}",
                fmt_c(w.upper),
                fmt_c(w.lower),
                w.shift
            ));
        }
    }
    let _ = writeln!(text, "non-resonant: {}", resonance.is_non_resonant());
    Outcome {
        code: EXIT_OK,
        text,
        json: Some(io::to_string(&io::check_report(&sys, &resonance, &levelt))),
        warnings,
        ..Outcome::default()
    }
}

fn resonance_warnings(poles: &[usize]) -> Vec<String> {
    poles
        .iter()
        .map(|j| format!("pole {j} is resonant; the generator statement does not apply there"))
        .collect()
}

pub fn galois(args: &SystemArgs) -> Outcome {
    let sys = match load_system(&args.file, args.sum_tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let g = tri!(galois_generators(&sys), system_code);
    let mut text = String::new();
    for (j, m) in g.generators.iter().enumerate() {
        let _ = writeln!(text, "generator {j} (pole {}):\n{m}", fmt_c(sys.poles()[j]));
    }
    Outcome {
        code: EXIT_OK,
        text,
        json: Some(io::to_string(&io::galois_report(&sys, &g))),
        warnings: resonance_warnings(&g.resonant_poles),
        ..Outcome::default()
    }
}

pub fn monodromy(args: &SystemArgs, tol: f64, base: Option<Complex64>) -> Outcome {
    let sys = match load_system(&args.file, args.sum_tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let rep = tri!(monodromy_from(&sys, base, tol), monodromy_code);
    let mut text = format!("base point {}\n", fmt_c(rep.base_point));
    for (j, m) in rep.matrices.iter().enumerate() {
        let _ = writeln!(
            text,
            "M_{j} (pole {}, error estimate {:.2e}):\n{m}",
            fmt_c(sys.poles()[j]),
            rep.error_estimates[j]
        );
    }
    let _ = writeln!(
        text,
        "ordered product defect {:.3e} (bound {:.3e})",
        rep.product_defect(),
        rep.product_bound()
    );
    Outcome {
        code: EXIT_OK,
        text,
        json: Some(io::to_string(&io::monodromy_report(&sys, &rep, tol))),
        ..Outcome::default()
    }
}

pub fn verify(
    args: &SystemArgs,
    tol: f64,
    integration_tol: f64,
    resonance_tol: f64,
    base: Option<Complex64>,
) -> Outcome {
    let sys = match load_system(&args.file, args.sum_tol) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let mut options = VerifyOptions::new(tol);
    options.integration_tol = integration_tol;
    options.resonance_tol = resonance_tol;
    options.base_point = base;
    let report = tri!(verify_theorem_with(&sys, options), monodromy_code);
    let mut text = String::new();
    for (j, v) in report.poles.iter().enumerate() {
        let residual = v
            .conjugator_residual
            .map_or_else(|| "-".to_string(), |r| format!("{r:.2e}"));
        let _ = writeln!(
            text,
            "pole {j}: {} (spectrum {}, structure {}, conjugator residual {residual})",
            io::status_name(v.status),
            v.spectrum_match,
            v.structure_match
        );
    }
    let _ = writeln!(
        text,
        "cross-check difference {:.2e}\nverdict: {}",
        report.cross_check_difference,
        if report.verdict { "pass" } else { "fail" }
    );
    let unmet: Vec<usize> = report
        .poles
        .iter()
        .enumerate()
        .filter(|(_, v)| v.status == PoleStatus::HypothesisUnmet)
        .map(|(j, _)| j)
        .collect();
    Outcome {
        code: if report.verdict { EXIT_OK } else { EXIT_FAILED },
        text,
        json: Some(io::to_string(&io::verify_report(&sys, &report))),
        warnings: resonance_warnings(&unmet),
        ..Outcome::default()
    }
}

/// `--json` receives the recovered system in the system format, so the
/// output feeds straight back into the other commands.
pub fn invert(
    file: &Path,
    tol: f64,
    max_iter: usize,
    proximity: Option<f64>,
    product_tol: f64,
) -> Outcome {
    let text = match read(file) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let parsed = tri!(InstanceFile::parse(&text), io_code);
    let options = InstanceOptions {
        proximity,
        product_tol,
        base_point: parsed.base_point,
        convention: parsed.convention,
    };
    let inst = tri!(
        InverseProblemInstance::new(parsed.poles, parsed.targets, &options),
        inverse_code
    );
    let sol = tri!(solve(&inst, tol, max_iter), inverse_code);
    let sys = tri!(sol.to_system(&inst), inverse_code);
    let mut text = String::new();
    for (j, a) in sol.residues.iter().enumerate() {
        let _ = writeln!(text, "A_{j} (pole {}):\n{a}", fmt_c(inst.poles()[j]));
    }
    let _ = writeln!(
        text,
        "residual {:.3e} after {} iterations ({})",
        sol.residual,
        sol.iterations,
        if sol.converged {
            "converged"
        } else {
            "not converged"
        }
    );
    let mut warnings = Vec::new();
    if !sol.non_resonant {
        warnings.push("recovered system is resonant".to_string());
    }
    let mut out = Outcome {
        code: EXIT_OK,
        text,
        json: Some(io::to_string(&io::system_json(&sys))),
        warnings,
        ..Outcome::default()
    };
    if !sol.converged {
        out.code = EXIT_NUMERIC;
        out.error = Some(format!(
            "residual {:.3e} did not reach {tol:.1e} within {max_iter} iterations",
            sol.residual
        ));
    }
    out
}

pub fn convert(file: &Path, from: Form, to: Form, basis: Option<&Path>) -> Outcome {
    match convert_inner(file, from, to, basis) {
        Ok(json) => Outcome {
            code: EXIT_OK,
            json: Some(json),
            payload_is_output: true,
            ..Outcome::default()
        },
        Err(o) => o,
    }
}

fn convert_inner(
    file: &Path,
    from: Form,
    to: Form,
    basis: Option<&Path>,
) -> Result<String, Outcome> {
    let input = |e: IoError| Outcome::fail(EXIT_INPUT, format!("{}: {e}", file.display()));
    let text = read(file)?;
    let basis = match basis {
        Some(p) => {
            if to != Form::Matrix {
                return Err(Outcome::fail(
                    EXIT_INPUT,
                    "--basis only applies with --to matrix",
                ));
            }
            let t = read(p)?;
            Some(
                io::parse_rational_system(&t)
                    .map_err(|e| Outcome::fail(EXIT_INPUT, format!("{}: {e}", p.display())))?,
            )
        }
        None => None,
    };
    // everything is routed through a module; scalar output needs a cyclic
    // vector, which is only trivial when the input already is scalar
    let module: DifferentialModule = match from {
        Form::Scalar => {
            let eq = io::parse_scalar_equation(&text).map_err(input)?;
            if to == Form::Scalar {
                return Ok(io::to_string(&io::scalar_equation_json(&eq)));
            }
            module_from_matrix(&companion_of_scalar(&eq))
        }
        Form::Matrix => module_from_matrix(&io::parse_rational_system(&text).map_err(input)?),
        Form::Module => io::parse_module(&text).map_err(input)?,
    };
    match to {
        Form::Scalar => Err(Outcome::fail(
            EXIT_INPUT,
            "conversion to a scalar equation is only supported from a scalar equation",
        )),
        Form::Matrix => {
            let a: RationalMatrix = matrix_from_module(&module, basis.as_ref())
                .map_err(|e| Outcome::fail(EXIT_INPUT, e.to_string()))?;
            Ok(io::to_string(&io::rational_system_json(&a)))
        }
        Form::Module => Ok(io::to_string(&io::module_json(&module))),
    }
}
