//! Batch driver: runs verification suites and computes decompositions
//! from serialized inputs, emitting deterministic JSON (and CSV for the
//! circle/torus lab).
//!
//! Exit codes: 0 all checks pass, 1 a verification check failed,
//! 2 malformed input. Reports embed the config and a `"schema": 1` tag;
//! identical configs produce byte-identical reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use specdec::action::RcSubspace;
use specdec::arcs::{rat, ArcSet};
use specdec::bundle::{
    build_bundle, check_axioms, roundtrip_from_algebra, roundtrip_from_bundle,
};
use specdec::error::Error;
use specdec::group::FiniteAbelianGroup;
use specdec::jsonio;
use specdec::linalg::{c, CMatrix};
use specdec::multiplicity::{csd_exists, essential_lsc_envelope, CsdVerdict};
use specdec::proper::{
    catalog, commutative_bundle_of_space, proper_fiber_dimension, uniqueness_check,
    FiniteProperAction,
};
use specdec::random::random_action;
use specdec::tol;
use specdec::torus::{
    conjugacy_check, e_chi_fejer, exel_rc_modulus, h_chi_exponent, line_bundle_section_check,
    phase, rc_check_torus, winding_number, DecompositionTriple, GridCircleFn, GridTorusFn,
    Rotation,
};

#[derive(Parser)]
#[command(
    name = "specdec",
    about = "Spectral decompositions of finite abelian group actions: verification suites and batch computations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Input JSON file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output report path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Grid size (power of two).
    #[arg(long, default_value_t = 32)]
    grid: usize,
    /// Fejér window.
    #[arg(long, default_value_t = 8)]
    window: usize,
    /// Override for toleranced pass gates.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a matrix algebra with a group action into its bundle.
    Decompose(CommonArgs),
    /// Randomized algebra→bundle→algebra roundtrip suite.
    Roundtrip(CommonArgs),
    /// Circle/torus lab: twisted surfaces, Fejér sums, winding, conjugacy.
    Torus(CommonArgs),
    /// Multiplicity-function verdict: does a continuous decomposition exist?
    Multiplicity(CommonArgs),
    /// Proper-action suite: fiber counts, commutative bundles, uniqueness.
    Proper(CommonArgs),
}

/// Failures are split by exit code: malformed input (2) versus a check
/// that ran and failed (1).
enum Failure {
    Input(String),
    Verification(String),
}

type CmdResult = Result<(Value, bool), Failure>;

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn read_input(args: &CommonArgs) -> Result<Value, Failure> {
    let path = args
        .input
        .as_ref()
        .ok_or_else(|| Failure::Input("this command requires --input".to_string()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("invalid JSON in {}: {e}", path.display())))
}

fn config_json(command: &str, args: &CommonArgs) -> Value {
    json!({
        "command": command,
        "input": args.input.as_ref().map(|p| p.display().to_string()),
        "seed": args.seed,
        "grid": args.grid,
        "window": args.window,
        "tol": args.tol,
    })
}

fn gate(args: &CommonArgs, default: f64) -> f64 {
    args.tol.unwrap_or(default)
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

fn cmd_decompose(args: &CommonArgs) -> CmdResult {
    let input = read_input(args)?;
    let group = jsonio::group_from_json(
        input
            .get("group")
            .ok_or_else(|| Failure::Input("input needs a \"group\"".to_string()))?,
    )
    .map_err(input_err)?;
    let generators = input
        .get("generators")
        .and_then(Value::as_array)
        .ok_or_else(|| Failure::Input("input needs a \"generators\" array".to_string()))?
        .iter()
        .map(jsonio::matrix_from_json)
        .collect::<Result<Vec<CMatrix>, Error>>()
        .map_err(input_err)?;

    // Construction errors are malformed input: the file does not describe
    // a unitary representation of the declared group.
    let action = specdec::action::MatrixAction::new(group, generators).map_err(|e| match e {
        Error::NotUnitary { .. } => Failure::Input(format!("rep not unitary: {e}")),
        other => Failure::Input(other.to_string()),
    })?;
    let n = action.dim();

    let r = match input.get("r_generators") {
        None => RcSubspace::full(n),
        Some(v) => {
            let gens = v
                .as_array()
                .ok_or_else(|| Failure::Input("\"r_generators\" must be an array".to_string()))?
                .iter()
                .map(jsonio::matrix_from_json)
                .collect::<Result<Vec<CMatrix>, Error>>()
                .map_err(input_err)?;
            RcSubspace::new(gens)
        }
    };

    let bundle =
        build_bundle(&action, &r).map_err(|e| Failure::Verification(format!("bundle: {e}")))?;
    let axioms = check_axioms(&bundle);
    let fiber_dims = bundle.fiber_dims();
    let total: usize = fiber_dims.iter().sum();

    // Φ-side checks: Fourier inversion on deterministic samples, and the
    // homomorphism identities for the section-integration map.
    let mut samples: Vec<CMatrix> = vec![CMatrix::identity(n), CMatrix::unit(n, n, 0, 0)];
    if n > 1 {
        samples.push(CMatrix::unit(n, n, 0, n - 1));
    }
    for t in action.elements() {
        samples.push(action.unitary(t).clone());
    }
    let mut inversion = 0.0f64;
    let weight = 1.0 / action.group().order() as f64;
    for a in &samples {
        let mut sum = CMatrix::zeros(n, n);
        for chi in action.characters() {
            sum = &sum + &action.fourier_coefficient(chi, a);
        }
        inversion = inversion.max((&sum.scale_re(weight) - a).max_abs());
    }

    let mut homomorphism = 0.0f64;
    let mut involution = 0.0f64;
    let mut equivariance = 0.0f64;
    let mut phi_note = Value::Null;
    let one_hot_sections: Vec<_> = bundle
        .fibers()
        .iter()
        .enumerate()
        .filter(|(_, f)| f.dim() > 0)
        .take(3)
        .map(|(i, f)| {
            let values: Vec<CMatrix> = bundle
                .fibers()
                .iter()
                .enumerate()
                .map(|(j, _)| {
                    if i == j {
                        f.basis()[0].clone()
                    } else {
                        CMatrix::zeros(n, n)
                    }
                })
                .collect();
            specdec::bundle::BundleSection::from_values_unchecked(values)
        })
        .collect();
    let phi_result = (|| -> Result<(), Error> {
        for f in &one_hot_sections {
            let phi_f = bundle.integrate(f);
            let f_star = bundle.involute(f)?;
            involution = involution.max((&bundle.integrate(&f_star) - &phi_f.adjoint()).max_abs());
            for t in action.elements() {
                let shifted = bundle.dual_act(t, f)?;
                equivariance = equivariance
                    .max((&bundle.integrate(&shifted) - &action.act(t, &phi_f)).max_abs());
            }
            for g in &one_hot_sections {
                let conv = bundle.convolve(f, g)?;
                let lhs = bundle.integrate(&conv);
                let rhs = &phi_f * &bundle.integrate(g);
                homomorphism = homomorphism.max((&lhs - &rhs).max_abs());
            }
        }
        Ok(())
    })();
    if let Err(e) = phi_result {
        phi_note = Value::String(format!("section algebra incomplete: {e}"));
    }

    let id_gate = gate(args, tol::IDENTITY);
    let bijective = total == n * n;
    let mut failures: Vec<String> = Vec::new();
    if inversion > id_gate {
        failures.push(format!("fourier inversion residual {inversion:.3e}"));
    }
    for name in axioms.failing_axioms() {
        failures.push(format!("bundle axiom {name}"));
    }
    if homomorphism > id_gate || involution > id_gate || equivariance > id_gate {
        failures.push("integration map is not a *-homomorphism".to_string());
    }
    let pass = failures.is_empty();

    let report = json!({
        "schema": 1,
        "config": config_json("decompose", args),
        "group": jsonio::group_to_json(action.group()),
        "ambient_dim": n,
        "fiber_dims": fiber_dims,
        "total_fiber_dim": total,
        "phi": {
            "inversion_residual": inversion,
            "homomorphism_residual": homomorphism,
            "involution_residual": involution,
            "equivariance_residual": equivariance,
            "bijective": bijective,
            "note": phi_note,
        },
        "axiom_residuals": {
            "multiplicativity": axioms.multiplicativity,
            "involution": axioms.involution,
            "positivity": axioms.positivity,
        },
        "failures": failures,
        "pass": pass,
    });
    Ok((report, pass))
}

// ---------------------------------------------------------------------------
// roundtrip
// ---------------------------------------------------------------------------

fn cmd_roundtrip(args: &CommonArgs) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let groups: Vec<Vec<u64>> = vec![
        vec![2],
        vec![3],
        vec![2, 2],
        vec![4],
        vec![5],
        vec![6],
        vec![2, 3],
        vec![2, 4],
    ];
    let dims = [2usize, 3, 4];
    let instances = 20usize;
    let mut rows = Vec::with_capacity(instances);
    let mut passes = 0usize;
    for i in 0..instances {
        let factors = &groups[i % groups.len()];
        let dim = dims[i % dims.len()];
        let group = FiniteAbelianGroup::new(factors.clone()).map_err(input_err)?;
        let action = random_action(&mut rng, &group, dim)
            .map_err(|e| Failure::Verification(format!("instance {i}: {e}")))?;
        let r = RcSubspace::full(dim);
        let algebra_report = roundtrip_from_algebra(&action, &r)
            .map_err(|e| Failure::Verification(format!("instance {i}: {e}")))?;
        let bundle = build_bundle(&action, &r)
            .map_err(|e| Failure::Verification(format!("instance {i}: {e}")))?;
        let bundle_report = roundtrip_from_bundle(&bundle)
            .map_err(|e| Failure::Verification(format!("instance {i}: {e}")))?;
        let ok = algebra_report.pass && bundle_report.pass;
        passes += ok as usize;
        rows.push(json!({
            "index": i,
            "group": factors,
            "dim": dim,
            "algebra_pass": algebra_report.pass,
            "algebra_fiber_dims": algebra_report.fiber_dims,
            "algebra_max_fiber_mismatch": algebra_report.max_fiber_mismatch,
            "bundle_pass": bundle_report.pass,
            "bundle_max_fiber_mismatch": bundle_report.max_fiber_mismatch,
            "pass": ok,
        }));
    }
    let pass = passes == instances;
    let report = json!({
        "schema": 1,
        "config": config_json("roundtrip", args),
        "instances": instances,
        "passes": passes,
        "rows": rows,
        "pass": pass,
    });
    Ok((report, pass))
}

// ---------------------------------------------------------------------------
// torus
// ---------------------------------------------------------------------------

fn require_power_of_two(n: usize) -> Result<(), Failure> {
    if n < 8 || !n.is_power_of_two() {
        return Err(Failure::Input(format!(
            "--grid must be a power of two ≥ 8, got {n}"
        )));
    }
    Ok(())
}

fn rotation_to_json(r: &Rotation) -> Value {
    match r {
        Rotation::Circle(q) => json!({ "circle": jsonio::rational_to_string(q) }),
        Rotation::Torus { z, t } => json!({
            "torus": [jsonio::rational_to_string(z), jsonio::rational_to_string(t)],
        }),
    }
}

fn cmd_torus(args: &CommonArgs, extra: &mut Vec<(PathBuf, String)>) -> CmdResult {
    require_power_of_two(args.grid)?;
    let n_grid = args.grid;
    let m_window = args.window.max(1);
    let id_gate = gate(args, tol::IDENTITY);

    // Twisted line bundles: transition surfaces, gluing, winding.
    let a_turns = rat(1, 8);
    let b_jump = rat(3, 8);
    let mut surface_csv = String::from("twist,zi,tj,re,im\n");
    let mut table_csv = String::from(
        "twist,winding,expected_winding,psi_gluing_defect,period_defect,modulus_defect\n",
    );
    let mut twist_rows = Vec::new();
    let mut pass = true;
    for twist in -2i64..=2 {
        let psi = GridTorusFn::psi_section(twist, n_grid)
            .map_err(|e| Failure::Verification(e.to_string()))?;
        let gluing = line_bundle_section_check(twist, &psi);
        let boundary_row = &psi.values()[n_grid];
        let winding = winding_number(boundary_row)
            .map_err(|e| Failure::Verification(format!("winding({twist}): {e}")))?;

        let mut period_defect = 0.0f64;
        let mut modulus_defect = 0.0f64;
        for zi in 0..n_grid {
            let z_turns = rat(zi as i64, n_grid as i64);
            for tj in 0..=n_grid {
                let t_turns = rat(tj as i64, n_grid as i64);
                let e0 = h_chi_exponent(twist, &a_turns, &b_jump, &z_turns, &t_turns);
                let v = phase(&e0);
                if tj < n_grid {
                    let _ = write!(
                        surface_csv,
                        "{twist},{zi},{tj},{:.17},{:.17}\n",
                        v.re, v.im
                    );
                }
                let e1 = h_chi_exponent(
                    twist,
                    &a_turns,
                    &b_jump,
                    &z_turns,
                    &(&t_turns + BigRational::from_integer(BigInt::from(1))),
                );
                period_defect = period_defect.max((phase(&e1) - v).norm());
                modulus_defect = modulus_defect.max((v.norm() - 1.0).abs());
            }
        }

        let twist_ok = winding == twist
            && gluing.defect == 0.0
            && period_defect <= id_gate
            && modulus_defect <= id_gate;
        pass &= twist_ok;
        let _ = write!(
            table_csv,
            "{twist},{winding},{twist},{:.3e},{:.3e},{:.3e}\n",
            gluing.defect, period_defect, modulus_defect
        );
        twist_rows.push(json!({
            "twist": twist,
            "winding": winding,
            "psi_gluing_defect": gluing.defect,
            "period_defect": period_defect,
            "modulus_defect": modulus_defect,
            "pass": twist_ok,
        }));
    }

    // Fejér approximation of the closed-form fiber element on smooth data.
    let tau = std::f64::consts::TAU;
    let xi = GridCircleFn::smooth(n_grid, |t| c((tau * t).cos(), (tau * t).sin()))
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let eta = GridCircleFn::constant(n_grid, c(1.0, 0.0))
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let zeta = GridCircleFn::smooth(n_grid, |t| c(1.0 + (tau * t).cos(), 0.0))
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let chi = rat(1, 8);
    let fejer = |m: usize| -> Result<f64, Failure> {
        let result = e_chi_fejer(&xi, &eta, &chi, m, &zeta)
            .map_err(|e| Failure::Verification(e.to_string()))?;
        result
            .residual
            .ok_or_else(|| Failure::Verification("χ unexpectedly off-grid".to_string()))
    };
    let res_m = fejer(m_window)?;
    let res_2m = fejer(2 * m_window)?;
    let expected_m = 1.0 / (m_window as f64 + 1.0);
    let ratio = res_2m / res_m.max(f64::MIN_POSITIVE);
    let fejer_ok = (res_m * (m_window as f64 + 1.0) - 1.0).abs() <= 0.05
        && (0.45..=0.55).contains(&ratio);
    pass &= fejer_ok;

    // Relative-continuity dichotomy and the rotation-offset defect table.
    let xi_var = GridCircleFn::smooth(n_grid, |t| {
        c(0.25 * ((tau * t).cos() + 2.0), 0.25 * (tau * t).sin())
    })
    .map_err(|e| Failure::Verification(e.to_string()))?;
    let smooth_rc = rc_check_torus(&xi_var, &xi_var).map_err(|e| Failure::Verification(e.to_string()))?;
    let half = ArcSet::new(vec![(rat(0, 1), rat(1, 2))]).map_err(input_err)?;
    let step_fn = GridCircleFn::indicator(n_grid, &half, c(1.0, 0.0))
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let rough_rc = rc_check_torus(&step_fn, &eta).map_err(|e| Failure::Verification(e.to_string()))?;
    let smooth_modulus = exel_rc_modulus(&xi_var, &xi_var, &rat(1, 4))
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let rough_modulus = exel_rc_modulus(&step_fn, &eta, &rat(1, 4))
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let smooth_last = smooth_modulus.last().map(|r| r.defect).unwrap_or(f64::NAN);
    let rough_last = rough_modulus.last().map(|r| r.defect).unwrap_or(f64::NAN);
    let rc_ok = smooth_rc.continuous
        && !rough_rc.continuous
        && smooth_last <= 0.2
        && rough_last >= 0.5;
    pass &= rc_ok;

    // Conjugacy verdicts on canonical decomposition data.
    let arcs_a = DecompositionTriple::circle(half.clone());
    let arcs_b = DecompositionTriple::circle(half.translate(&rat(1, 2)));
    let punct_a = DecompositionTriple::circle(ArcSet::full_minus_points(&[rat(0, 1)]));
    let punct_b = DecompositionTriple::circle(ArcSet::full_minus_points(&[rat(1, 3)]));
    let torus_one = DecompositionTriple::torus(ArcSet::full(), ArcSet::full(), 1)
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let torus_two = DecompositionTriple::torus(ArcSet::full(), ArcSet::full(), 2)
        .map_err(|e| Failure::Verification(e.to_string()))?;
    let cases = vec![
        (
            "translated half circles",
            conjugacy_check(&arcs_a, &arcs_b),
            Some(Rotation::Circle(rat(1, 2))),
        ),
        (
            "punctured circles",
            conjugacy_check(&punct_a, &punct_b),
            Some(Rotation::Circle(rat(1, 3))),
        ),
        (
            "torus twist 1 vs twist 2",
            conjugacy_check(&torus_one, &torus_two),
            None,
        ),
    ];
    let mut conjugacy_rows = Vec::new();
    let mut conj_ok = true;
    for (name, got, expected) in cases {
        let ok = got == expected;
        conj_ok &= ok;
        conjugacy_rows.push(json!({
            "case": name,
            "witness": got.as_ref().map(rotation_to_json),
            "expected": expected.as_ref().map(rotation_to_json),
            "pass": ok,
        }));
    }
    pass &= conj_ok;

    if let Some(out) = &args.out {
        extra.push((sibling(out, "_surface.csv"), surface_csv));
        extra.push((sibling(out, "_table.csv"), table_csv));
    }

    let report = json!({
        "schema": 1,
        "config": config_json("torus", args),
        "twists": twist_rows,
        "fejer": {
            "window": m_window,
            "residual": res_m,
            "residual_doubled_window": res_2m,
            "ratio": ratio,
            "expected_residual": expected_m,
            "pass": fejer_ok,
        },
        "relative_continuity": {
            "smooth_defect": smooth_rc.defect,
            "smooth_continuous": smooth_rc.continuous,
            "indicator_defect": rough_rc.defect,
            "indicator_continuous": rough_rc.continuous,
            "smooth_modulus_last": smooth_last,
            "indicator_modulus_last": rough_last,
            "pass": rc_ok,
        },
        "conjugacy": conjugacy_rows,
        "pass": pass,
    });
    Ok((report, pass))
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".to_string());
    out.with_file_name(format!("{stem}{suffix}"))
}

// ---------------------------------------------------------------------------
// multiplicity
// ---------------------------------------------------------------------------

fn cmd_multiplicity(args: &CommonArgs) -> CmdResult {
    let input = read_input(args)?;
    // Structural problems with the partition are input errors.
    let d = jsonio::step_fn_from_json(&input).map_err(input_err)?;
    let envelope =
        essential_lsc_envelope(&d).map_err(|e| Failure::Verification(e.to_string()))?;
    let verdict = csd_exists(&d).map_err(|e| Failure::Verification(e.to_string()))?;

    let mut report = Map::new();
    report.insert("schema".to_string(), json!(1));
    report.insert("config".to_string(), config_json("multiplicity", args));
    report.insert("input".to_string(), jsonio::step_fn_to_json(&d));
    report.insert(
        "envelope".to_string(),
        jsonio::step_fn_to_json(&envelope),
    );
    match verdict {
        CsdVerdict::Exists { chain } => {
            report.insert("exists".to_string(), json!(true));
            let chain_json: Vec<Value> = chain
                .iter()
                .map(|(level, set)| {
                    json!({
                        "level": level,
                        "set": jsonio::set_expr_to_json(set),
                    })
                })
                .collect();
            report.insert("chain".to_string(), Value::Array(chain_json));
        }
        CsdVerdict::No {
            defect_measure,
            offending_pieces,
        } => {
            report.insert("exists".to_string(), json!(false));
            report.insert(
                "defect_measure".to_string(),
                Value::String(jsonio::rational_to_string(&defect_measure)),
            );
            report.insert("offending_pieces".to_string(), json!(offending_pieces));
        }
    }
    // Either verdict is a successful computation; only structural errors
    // fail the run.
    Ok((Value::Object(report), true))
}

// ---------------------------------------------------------------------------
// proper
// ---------------------------------------------------------------------------

fn proper_report_row(
    name: &str,
    action: &FiniteProperAction,
    gate_val: f64,
) -> Result<(Value, bool), Failure> {
    let group = action.group();
    let fiber_dims: Vec<usize> = group
        .characters()
        .iter()
        .map(|omega| proper_fiber_dimension(action, omega))
        .collect();
    let total: usize = fiber_dims.iter().sum();
    let sum_ok = total == action.n_points();
    let bundle_report = commutative_bundle_of_space(action)
        .map_err(|e| Failure::Verification(format!("{name}: {e}")))?;
    let uniqueness = uniqueness_check(action)
        .map_err(|e| Failure::Verification(format!("{name}: {e}")))?;
    let ok = sum_ok
        && bundle_report.commutativity_residual <= gate_val
        && bundle_report.fibers_match
        && bundle_report.axioms_pass
        && uniqueness.pass();
    let row = json!({
        "name": name,
        "group": jsonio::group_to_json(group),
        "points": action.n_points(),
        "orbits": action.orbits().len(),
        "fiber_dims": fiber_dims,
        "fiber_dim_sum": total,
        "sum_equals_points": sum_ok,
        "bundle_fiber_dims": bundle_report.bundle.fiber_dims(),
        "commutativity_residual": bundle_report.commutativity_residual,
        "fibers_match": bundle_report.fibers_match,
        "axioms_pass": bundle_report.axioms_pass,
        "uniqueness": {
            "generated_equals_full": uniqueness.generated_equals_full,
            "bundles_agree": uniqueness.bundles_agree,
            "max_fiber_mismatch": uniqueness.max_fiber_mismatch,
        },
        "pass": ok,
    });
    Ok((row, ok))
}

fn cmd_proper(args: &CommonArgs) -> CmdResult {
    let gate_val = gate(args, tol::COMMUTATIVITY);
    let mut rows = Vec::new();
    let mut pass = true;
    match &args.input {
        Some(_) => {
            let input = read_input(args)?;
            let action = jsonio::proper_action_from_json(&input).map_err(input_err)?;
            let (row, ok) = proper_report_row("input action", &action, gate_val)?;
            rows.push(row);
            pass &= ok;
        }
        None => {
            for (name, action) in catalog() {
                let (row, ok) = proper_report_row(&name, &action, gate_val)?;
                rows.push(row);
                pass &= ok;
            }
        }
    }
    let report = json!({
        "schema": 1,
        "config": config_json("proper", args),
        "actions": rows,
        "pass": pass,
    });
    Ok((report, pass))
}

// ---------------------------------------------------------------------------
// plumbing
// ---------------------------------------------------------------------------

fn write_output(out: &Option<PathBuf>, report: &Value) -> Result<(), Failure> {
    let text = format!("{}\n", serde_json::to_string_pretty(report).expect("valid JSON"));
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut extra_files: Vec<(PathBuf, String)> = Vec::new();
    let (args, result) = match &cli.command {
        Command::Decompose(a) => (a, cmd_decompose(a)),
        Command::Roundtrip(a) => (a, cmd_roundtrip(a)),
        Command::Torus(a) => {
            let r = cmd_torus(a, &mut extra_files);
            (a, r)
        }
        Command::Multiplicity(a) => (a, cmd_multiplicity(a)),
        Command::Proper(a) => (a, cmd_proper(a)),
    };
    match result {
        Ok((report, pass)) => {
            for (path, content) in &extra_files {
                if let Err(e) = std::fs::write(path, content) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            if let Err(Failure::Input(msg)) = write_output(&args.out, &report) {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed; see report");
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("input error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification error: {msg}");
            ExitCode::from(1)
        }
    }
}
