use std::fmt::Write as _;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use engel_core::abnormal::{
    conjugate_shoot, conjugate_times_const, delta_const, delta_range, is_strict,
    minimality_verdict, AbnormalCurve, CoefficientProfile,
};
use engel_core::algebra::{
    canonical_frame, derived_constants, engel_flag, levi_kernel, structure_constants_from_t,
    EngelConstants, FrameDerivatives,
};
use engel_core::classify::{build_family, classify, diagnose_type3, jacobi_restrictions, Family};
use engel_core::flow::{
    center_momentum, conservation_report, hamiltonian, independence_matrix, integral_g, integrate,
    right_momenta, type1_constants, type1_integrals, VerticalState,
};
use engel_core::io::{algebra_from_json, profile_from_csv, AlgebraInput};
use engel_core::ode::IntegratorConfig;
use serde_json::{json, Value};

use crate::args::{
    Command, ConjugateArgs, ConstantsArgs, FlowArgs, IntegralsArgs, OutputFormat, ProfileArgs,
    VerdictArgs,
};
use crate::error::{usage, CliError};
use crate::sweep;

pub enum Output {
    Json(Value),
    Text(String),
}

pub fn run(command: &Command, seed: u64) -> Result<Output, CliError> {
    let output = match command {
        Command::Classify(c) => classify_cmd(c).map(Output::Json),
        Command::Build(c) => build_cmd(c).map(Output::Json),
        Command::Frame(f) => frame_cmd(&f.input).map(Output::Json),
        Command::Flow(f) => flow_cmd(f),
        Command::Integrals(i) => integrals_cmd(i).map(Output::Json),
        Command::Conjugate(c) => conjugate_cmd(c).map(Output::Json),
        Command::Verdict(v) => verdict_cmd(v).map(Output::Json),
        Command::Sweep(s) => sweep::run(&read_text(&s.config)?, seed).map(Output::Json),
    }?;
    Ok(match output {
        Output::Json(mut value) => {
            clear_negative_zeros(&mut value);
            Output::Json(value)
        }
        text => text,
    })
}

/// Rewrites -0.0 as 0.0 so reports never depend on the sign of a zero.
fn clear_negative_zeros(value: &mut Value) {
    match value {
        Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *value = json!(0.0),
        Value::Array(items) => items.iter_mut().for_each(clear_negative_zeros),
        Value::Object(map) => map.values_mut().for_each(clear_negative_zeros),
        _ => {}
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    let result = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)
    } else {
        File::open(path).and_then(|mut f| f.read_to_string(&mut text))
    };
    result.map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(text)
}

pub fn resolve_constants(args: &ConstantsArgs) -> Result<EngelConstants, CliError> {
    match (&args.t, args.family) {
        (Some(t), None) => {
            let t: [f64; 6] = t
                .as_slice()
                .try_into()
                .map_err(|_| usage(format!("--t expects 6 values, got {}", t.len())))?;
            Ok(EngelConstants(t))
        }
        (None, Some(family)) => {
            let params = args.params.clone().unwrap_or_default();
            Ok(build_family(family, &params)?)
        }
        _ => Err(usage("give either --t or --family")),
    }
}

fn vec4(values: &[f64], flag: &str) -> Result<VerticalState, CliError> {
    let a: [f64; 4] = values
        .try_into()
        .map_err(|_| usage(format!("{flag} expects 4 values, got {}", values.len())))?;
    Ok(a.into())
}

/// Shortest round-trip decimal, formatted as in the JSON reports.
fn num(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&(x + 0.0)).expect("finite float")
    } else {
        x.to_string()
    }
}

fn classify_cmd(args: &ConstantsArgs) -> Result<Value, CliError> {
    let t = resolve_constants(args)?;
    let families = classify(&t)?;
    let diagnosis = if families.contains(&Family::III) {
        Some(diagnose_type3(&t)?)
    } else {
        None
    };
    Ok(json!({
        "t": t,
        "families": families,
        "residuals": jacobi_restrictions(&t),
        "diagnosis": diagnosis,
    }))
}

fn build_cmd(args: &ConstantsArgs) -> Result<Value, CliError> {
    let t = resolve_constants(args)?;
    let table = structure_constants_from_t(&t)?;
    Ok(json!({
        "t": t,
        "families": classify(&t).ok(),
        "derived": derived_constants(&t, &FrameDerivatives::default()),
        "algebra": AlgebraInput::from_table(&table),
    }))
}

fn frame_cmd(path: &Path) -> Result<Value, CliError> {
    let (table, dist) = algebra_from_json(&read_text(path)?)?;
    let growth = engel_flag(&table, &dist)?;
    let frame = canonical_frame(&table, &dist)?;
    let kernel = levi_kernel(&table, &dist)?;
    let vectors: Vec<[f64; 4]> = frame
        .vectors
        .iter()
        .map(|v| [v[0], v[1], v[2], v[3]])
        .collect();
    Ok(json!({
        "growth": growth,
        "frame": vectors,
        "kernel": [kernel[0], kernel[1], kernel[2], kernel[3]],
        "t": frame.constants,
        "families": classify(&frame.constants).ok(),
    }))
}

fn flow_cmd(args: &FlowArgs) -> Result<Output, CliError> {
    let t = resolve_constants(&args.constants)?;
    let h0 = vec4(&args.h0, "--h0")?;
    let traj = integrate(&t, &h0, &args.integrator.config(args.t_max))?;
    let type3 = Family::III.contains(&t);
    let r = right_momenta(&traj);
    let h_values: Vec<f64> = traj.states.iter().map(hamiltonian).collect();
    let g_values: Option<Vec<f64>> = type3.then(|| {
        traj.states
            .iter()
            .map(|h| integral_g(&t, h).expect("type III"))
            .collect()
    });
    let h4p_values: Option<Vec<f64>> = type3.then(|| {
        traj.states
            .iter()
            .map(|h| center_momentum(&t, h).expect("type III"))
            .collect()
    });

    match args.out {
        OutputFormat::Csv => {
            let mut out = String::from("t,h1,h2,h3,h4,H,G,h4p,r1,r2,r3,r4\n");
            let blank =
                |v: &Option<Vec<f64>>, i: usize| v.as_ref().map(|v| num(v[i])).unwrap_or_default();
            for (i, (time, h)) in traj.times.iter().zip(&traj.states).enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{}",
                    num(*time),
                    num(h.h1),
                    num(h.h2),
                    num(h.h3),
                    num(h.h4),
                    num(h_values[i]),
                    blank(&g_values, i),
                    blank(&h4p_values, i),
                    num(r[i][0]),
                    num(r[i][1]),
                    num(r[i][2]),
                    num(r[i][3])
                );
            }
            Ok(Output::Text(out))
        }
        OutputFormat::Json => {
            let states: Vec<[f64; 4]> = traj.states.iter().map(|h| h.to_array()).collect();
            Ok(Output::Json(json!({
                "t": t,
                "families": classify(&t).ok(),
                "times": traj.times,
                "states": states,
                "H": h_values,
                "G": g_values,
                "h4p": h4p_values,
                "right_momenta": r,
                "drift": conservation_report(&t, &traj),
            })))
        }
    }
}

fn integrals_cmd(args: &IntegralsArgs) -> Result<Value, CliError> {
    let h = vec4(&args.h, "--h")?;
    if let Some(nm) = &args.type1 {
        let [n, m]: [u32; 2] = nm
            .as_slice()
            .try_into()
            .map_err(|_| usage("--type1 expects n,m"))?;
        let t = type1_constants(n, m)?;
        let (f1, f2) = type1_integrals(n, m, &h)?;
        return Ok(json!({ "t": t, "H": hamiltonian(&h), "F1": f1, "F2": f2 }));
    }
    if !args.constants.is_given() {
        return Err(usage("give --t, --family or --type1"));
    }
    let t = resolve_constants(&args.constants)?;
    engel_core::classify::check_restrictions(&t)?;
    let h4p = center_momentum(&t, &h)?;
    let witness = independence_matrix(&t, &h, h4p)?;
    let rows: Vec<Vec<f64>> = witness
        .matrix
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    Ok(json!({
        "t": t,
        "H": hamiltonian(&h),
        "G": integral_g(&t, &h)?,
        "h4p": h4p,
        "independence": {
            "matrix": rows,
            "minor_det": witness.minor_det,
            "h1_h3_cubed": h.h1 * h.h3.powi(3),
        },
    }))
}

enum Source {
    Constant(EngelConstants),
    Profile(CoefficientProfile, bool),
}

fn resolve_source(args: &ProfileArgs) -> Result<Source, CliError> {
    match &args.profile {
        Some(path) => {
            let text = read_text(path)?;
            Ok(Source::Profile(
                profile_from_csv(text.as_bytes())?,
                args.strict,
            ))
        }
        None => {
            let t = resolve_constants(&args.constants)?;
            engel_core::classify::check_restrictions(&t)?;
            Ok(Source::Constant(t))
        }
    }
}

fn conjugate_cmd(args: &ConjugateArgs) -> Result<Value, CliError> {
    let source = resolve_source(&args.source)?;
    let cfg = args.source.integrator.config(args.horizon);
    match source {
        Source::Constant(t) => {
            let (times, method) = if args.shoot {
                let p = CoefficientProfile::from_constants(&t);
                (conjugate_shoot(&p, args.horizon, &cfg)?, "shooting")
            } else {
                (conjugate_times_const(&t, args.horizon), "closed_form")
            };
            let verdict = minimality_verdict(&AbnormalCurve::LeftInvariant(t), args.horizon, &cfg)?;
            Ok(json!({
                "t": t,
                "delta": delta_const(&t),
                "strict": is_strict(&t),
                "conjugate_times": times,
                "method": method,
                "verdict": verdict.verdict,
                "first_conjugate": verdict.first_conjugate,
                "basis": verdict.basis,
            }))
        }
        Source::Profile(p, strict) => {
            let (lo, hi) = delta_range(&p, args.horizon, cfg.step)?;
            let times = conjugate_shoot(&p, args.horizon, &cfg)?;
            let curve = AbnormalCurve::Profile {
                profile: &p,
                strict,
            };
            let verdict = minimality_verdict(&curve, args.horizon, &cfg)?;
            Ok(json!({
                "delta": { "min": lo, "max": hi },
                "strict": strict,
                "conjugate_times": times,
                "method": "shooting",
                "verdict": verdict.verdict,
                "first_conjugate": verdict.first_conjugate,
                "basis": verdict.basis,
            }))
        }
    }
}

fn verdict_cmd(args: &VerdictArgs) -> Result<Value, CliError> {
    let source = resolve_source(&args.source)?;
    let cfg: IntegratorConfig = args.source.integrator.config(args.tau);
    match source {
        Source::Constant(t) => {
            let v = minimality_verdict(&AbnormalCurve::LeftInvariant(t), args.tau, &cfg)?;
            Ok(json!({
                "t": t,
                "tau": args.tau,
                "delta": delta_const(&t),
                "strict": is_strict(&t),
                "verdict": v.verdict,
                "first_conjugate": v.first_conjugate,
                "basis": v.basis,
            }))
        }
        Source::Profile(p, strict) => {
            let v = minimality_verdict(
                &AbnormalCurve::Profile {
                    profile: &p,
                    strict,
                },
                args.tau,
                &cfg,
            )?;
            Ok(json!({
                "tau": args.tau,
                "strict": strict,
                "verdict": v.verdict,
                "first_conjugate": v.first_conjugate,
                "basis": v.basis,
            }))
        }
    }
}
