//! `concert` — command-line frontend for the contraction toolkit.
//!
//! Exit codes: 0 computed/certified, 1 refuted (or a self-test failure),
//! 2 input error, 3 numerical failure.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use concert_core::certify::{
    certify_jacobian_conic, check_dini_contraction, check_equilibrium_contraction,
    check_factored_conic, check_one_sided_lipschitz, check_trajectory_contraction, CertifyConfig,
};
use concert_core::error::CoreError;
use concert_core::measures::{
    classical_measure_limit_oracle, conic_measure, conic_measure_limit_oracle, matrix_measure,
    SamplerConfig,
};
use concert_core::models::{
    hopfield_certificate, hopfield_equilibrium, iss_envelope, matrosov_certify,
    separable_contraction, ModelFile,
};
use concert_core::norm::{weighted_norm, Weight};
use concert_core::odesim::{flow, DomainBox, StepControl, VectorField};
use concert_core::{acceptance, sampling, Matrix, NormSpec, PExp, Vector};

#[derive(Parser)]
#[command(
    name = "concert",
    about = "Matrix measures, weak pairings, and sampling-based contraction certificates",
    after_help = "Rates are one-sided bounds b: contraction at rate c > 0 is b = -c.\n\
                  All randomness is seeded; the seed is recorded in every JSON report."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct NormFlags {
    /// Norm exponent: 1, 2, any finite p, or "inf"
    #[arg(long, default_value = "2")]
    p: String,
    /// Norm weight: "identity", "diag:<csv>", or "general:<matrix.json>"
    #[arg(long, default_value = "identity")]
    weight: String,
}

#[derive(Args, Clone)]
struct OutFlags {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Matrix measure and conic matrix measure of a matrix (JSON rows)
    Measure {
        /// Path to a JSON file holding an array of rows
        matrix: String,
        #[command(flatten)]
        norm: NormFlags,
        /// Cross-check against the definitional limit oracles
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Run one sampling-based contraction condition on a model file
    Certify {
        /// Model file: {"type": "hopfield" | "separable_monotone" |
        /// "separable_positive" | "comparison", ...}
        model: String,
        /// Condition: jacobian, one-sided-lipschitz, trajectory, dini,
        /// equilibrium, factored, separable, matrosov
        #[arg(long)]
        condition: String,
        /// One-sided rate b (contraction when negative)
        #[arg(long, allow_hyphen_values = true)]
        rate: f64,
        #[command(flatten)]
        norm: NormFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Horizon for the trajectory/dini conditions
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Integrate a model and emit trajectories with norm/Dini traces
    Simulate {
        model: String,
        /// Initial condition as a comma-separated list; repeat for a pair
        #[arg(long, required = true, allow_hyphen_values = true)]
        x0: Vec<String>,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[command(flatten)]
        norm: NormFlags,
        /// Output format: csv (default) or json
        #[arg(long, default_value = "csv")]
        format: String,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Perron-based rate and weight for a Hopfield model, with optional
    /// equilibrium solve
    Hopfield {
        model: String,
        #[command(flatten)]
        norm: NormFlags,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also locate the equilibrium (constant input only)
        #[arg(long)]
        equilibrium: bool,
        #[command(flatten)]
        out: OutFlags,
    },
    /// ISS envelope for a comparison model along a simulation
    Iss {
        /// Comparison model file
        model: String,
        /// One-sided rate b < 0 (envelope decay c = -b)
        #[arg(long, allow_hyphen_values = true)]
        rate: f64,
        /// Constant input as a comma-separated list
        #[arg(long, default_value = "")]
        u: String,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        /// Initial condition of the comparison state
        #[arg(long)]
        v0: String,
        #[command(flatten)]
        norm: NormFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Run the acceptance suite and print one line per criterion
    Selftest {
        /// Reduced sample counts (completes in well under a minute)
        #[arg(long)]
        quick: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::IntegrationFailure { .. }
        | CoreError::NoConvergence(_)
        | CoreError::Singular { .. }
        | CoreError::NonFinite { .. } => 3,
        _ => 2,
    }
}

fn parse_csv_vec(s: &str) -> Result<Vector, CoreError> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|e| CoreError::Parse(format!("'{t}': {e}"))))
        .collect()
}

fn load_matrix(path: &str) -> Result<Matrix, CoreError> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::Parse(format!("{path}: {e}")))?;
    let rows: Vec<Vec<f64>> =
        serde_json::from_str(&text).map_err(|e| CoreError::Parse(format!("{path}: {e}")))?;
    Matrix::from_rows(&rows)
}

fn parse_norm(flags: &NormFlags) -> Result<NormSpec, CoreError> {
    let p = match flags.p.as_str() {
        "inf" | "Inf" | "INF" => PExp::Inf,
        s => PExp::Finite(
            s.parse::<f64>().map_err(|e| CoreError::Parse(format!("--p {s}: {e}")))?,
        ),
    };
    let weight = if flags.weight == "identity" {
        Weight::Identity
    } else if let Some(csv) = flags.weight.strip_prefix("diag:") {
        Weight::Diagonal(parse_csv_vec(csv)?)
    } else if let Some(path) = flags.weight.strip_prefix("general:") {
        Weight::General(load_matrix(path)?)
    } else {
        return Err(CoreError::Parse(format!(
            "--weight {}: expected identity, diag:<csv>, or general:<file>",
            flags.weight
        )));
    };
    NormSpec::new(p, weight)
}

fn load_model(path: &str) -> Result<ModelFile, CoreError> {
    let text = fs::read_to_string(path).map_err(|e| CoreError::Parse(format!("{path}: {e}")))?;
    ModelFile::from_json(&text)
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn emit(out: &OutFlags, text: &str) -> Result<(), CoreError> {
    match &out.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| CoreError::Parse(format!("{path}: {e}")))
        }
        None => {
            print!("{}", text);
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn emit_json(out: &OutFlags, command: &str, seed: u64, payload: Value) -> Result<(), CoreError> {
    let report = json!({
        "command": command,
        "timestamp": timestamp(),
        "seed": seed,
        "report": payload,
    });
    emit(out, &serde_json::to_string_pretty(&report).unwrap())
}

/// Vector field, sampling domain, and monotone flag for a model file.
fn model_field(model: &ModelFile) -> (VectorField, DomainBox, bool) {
    match model {
        ModelFile::Hopfield(net) => {
            let n = net.dim();
            (
                net.vector_field(),
                DomainBox::new(vec![-1.0; n], vec![1.0; n]).unwrap(),
                true,
            )
        }
        ModelFile::SeparableMonotone(sys) => {
            (sys.vector_field(), DomainBox::unit(sys.dim()), true)
        }
        ModelFile::SeparablePositive(sys) => {
            (sys.vector_field(), DomainBox::unit(sys.dim()), false)
        }
        ModelFile::Comparison(spec) => {
            let n = spec.dim();
            (
                spec.comparison_field(concert_core::models::InputSignal::zero(n)),
                DomainBox::unit(n),
                true,
            )
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CoreError> {
    match cli.command {
        Command::Measure { matrix, norm, oracle, seed, out } => {
            let a = load_matrix(&matrix)?;
            let ns = parse_norm(&norm)?;
            let mu = matrix_measure(&a, &ns)?;
            let mu_plus = conic_measure(&a, &ns)?;
            let mut payload = json!({
                "mu": mu.value,
                "mu_method": mu.method,
                "mu_plus": mu_plus.value,
                "mu_plus_method": mu_plus.method,
            });
            if oracle {
                let cfg = SamplerConfig { seed, ..Default::default() };
                let co = conic_measure_limit_oracle(&a, &ns, &[], &cfg)?;
                let mo = classical_measure_limit_oracle(&a, &ns, seed)?;
                payload["oracle"] = json!({
                    "mu": mo.value,
                    "mu_gap": (mo.value - mu.value).abs(),
                    "mu_plus": co.value,
                    "mu_plus_gap": (co.value - mu_plus.value).abs(),
                });
            }
            emit_json(&out, "measure", seed, payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { model, condition, rate, norm, seed, samples, horizon, out } => {
            let model = load_model(&model)?;
            let ns = parse_norm(&norm)?;
            let cfg = CertifyConfig { seed, n_samples: samples, ..Default::default() };
            let (vf, domain, monotone) = model_field(&model);
            let pairs = || {
                let mut rng = sampling::rng_from_seed(seed);
                (0..4)
                    .map(|_| sampling::ordered_pair(&mut rng, &domain.lo, &domain.hi))
                    .collect::<Vec<_>>()
            };
            let cert = match condition.as_str() {
                "jacobian" => certify_jacobian_conic(&vf, &domain, &ns, monotone, &cfg)?,
                "one-sided-lipschitz" => {
                    check_one_sided_lipschitz(&vf, &ns, rate, &domain, monotone, &cfg)?
                }
                "trajectory" => check_trajectory_contraction(&vf, &ns, rate, &pairs(), horizon, &cfg)?,
                "dini" => check_dini_contraction(&vf, &ns, rate, &pairs(), horizon, &cfg)?,
                "equilibrium" => check_equilibrium_contraction(&vf, &ns, rate, &domain, &cfg)?,
                "factored" => check_factored_conic(&vf, &ns, rate, &domain, &cfg)?,
                "separable" => match &model {
                    ModelFile::SeparableMonotone(sys) | ModelFile::SeparablePositive(sys) => {
                        separable_contraction(sys, &ns, -rate, &domain, &cfg)?
                    }
                    _ => {
                        return Err(CoreError::Precondition(
                            "condition 'separable' needs a separable model".into(),
                        ))
                    }
                },
                "matrosov" => match &model {
                    ModelFile::Comparison(spec) => matrosov_certify(spec, &ns, -rate, &domain, &cfg)?,
                    _ => {
                        return Err(CoreError::Precondition(
                            "condition 'matrosov' needs a comparison model".into(),
                        ))
                    }
                },
                other => {
                    return Err(CoreError::Parse(format!("unknown condition '{other}'")))
                }
            };
            let passed = cert.passed();
            emit_json(&out, "certify", seed, serde_json::to_value(&cert).unwrap())?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Simulate { model, x0, horizon, norm, format, out } => {
            let model = load_model(&model)?;
            let ns = parse_norm(&norm)?;
            let (vf, _, _) = model_field(&model);
            let ctrl = StepControl::default();
            let starts: Vec<Vector> =
                x0.iter().map(|s| parse_csv_vec(s)).collect::<Result<_, _>>()?;
            let trajs: Vec<_> = starts
                .iter()
                .map(|s| flow(&vf, 0.0, s, horizon, &ctrl))
                .collect::<Result<_, _>>()?;
            let grid: Vec<f64> = (0..=200).map(|k| horizon * k as f64 / 200.0).collect();
            match format.as_str() {
                "csv" => {
                    let mut text = String::new();
                    let n = vf.dim;
                    if trajs.len() == 1 {
                        text.push_str("t,");
                        text.push_str(
                            &(1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(","),
                        );
                        text.push_str(",norm,dini\n");
                        for &t in &grid {
                            let x = trajs[0].eval(t);
                            let nx = weighted_norm(&x, &ns)?;
                            let h = 1e-6 * (1.0 + t);
                            let xh = trajs[0].eval((t + h).min(horizon));
                            let dini = (weighted_norm(&xh, &ns)? - nx) / h;
                            let cells: Vec<String> =
                                x.iter().map(|v| format!("{v:.12e}")).collect();
                            text.push_str(&format!(
                                "{t:.6},{},{nx:.12e},{dini:.12e}\n",
                                cells.join(",")
                            ));
                        }
                    } else {
                        // Pair mode: both trajectories plus their weighted
                        // distance.
                        text.push_str("t,");
                        for (k, _) in trajs.iter().enumerate() {
                            for i in 1..=n {
                                text.push_str(&format!("x{}_{i},", (b'a' + k as u8) as char));
                            }
                        }
                        text.push_str("dist\n");
                        for &t in &grid {
                            let states: Vec<Vector> =
                                trajs.iter().map(|tr| tr.eval(t)).collect();
                            let d: Vector = states[0]
                                .iter()
                                .zip(&states[1])
                                .map(|(a, b)| a - b)
                                .collect();
                            let cells: Vec<String> = states
                                .iter()
                                .flat_map(|s| s.iter().map(|v| format!("{v:.12e}")))
                                .collect();
                            text.push_str(&format!(
                                "{t:.6},{},{:.12e}\n",
                                cells.join(","),
                                weighted_norm(&d, &ns)?
                            ));
                        }
                    }
                    emit(&out, &text)?;
                }
                "json" => {
                    let norms: Vec<Vec<f64>> = trajs
                        .iter()
                        .map(|tr| {
                            grid.iter()
                                .map(|&t| weighted_norm(&tr.eval(t), &ns))
                                .collect::<Result<_, _>>()
                        })
                        .collect::<Result<_, _>>()?;
                    let states: Vec<Vec<Vector>> = trajs
                        .iter()
                        .map(|tr| grid.iter().map(|&t| tr.eval(t)).collect())
                        .collect();
                    emit_json(
                        &out,
                        "simulate",
                        0,
                        json!({ "times": grid, "states": states, "norms": norms }),
                    )?;
                }
                other => return Err(CoreError::Parse(format!("unknown format '{other}'"))),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Hopfield { model, norm, seed, equilibrium, out } => {
            let model = load_model(&model)?;
            let net = match model {
                ModelFile::Hopfield(net) => net,
                _ => return Err(CoreError::Precondition("hopfield needs a hopfield model".into())),
            };
            let ns = parse_norm(&norm)?;
            let cfg = CertifyConfig { seed, n_samples: 300, ..Default::default() };
            match hopfield_certificate(&net, ns.p, &cfg) {
                Ok(cert) => {
                    let mut payload = serde_json::to_value(&cert).unwrap();
                    if equilibrium {
                        let eq = hopfield_equilibrium(&net, ns.p, &cfg)?;
                        payload["equilibrium"] = serde_json::to_value(&eq).unwrap();
                    }
                    let passed = cert.lipschitz.passed() && cert.trajectory.passed();
                    emit_json(&out, "hopfield", seed, payload)?;
                    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
                }
                // A nonnegative Perron eigenvalue is a refutation, not an
                // input error.
                Err(CoreError::Model(msg)) if msg.contains("no contraction certificate") => {
                    emit_json(&out, "hopfield", seed, json!({ "verdict": "refuted", "reason": msg }))?;
                    Ok(ExitCode::from(1))
                }
                Err(e) => Err(e),
            }
        }
        Command::Iss { model, rate, u, horizon, v0, norm, out } => {
            let model = load_model(&model)?;
            let spec = match model {
                ModelFile::Comparison(spec) => spec,
                _ => return Err(CoreError::Precondition("iss needs a comparison model".into())),
            };
            if rate >= 0.0 {
                return Err(CoreError::Precondition("iss needs --rate b < 0".into()));
            }
            let c = -rate;
            let ns = parse_norm(&norm)?;
            let n = spec.dim();
            let uvec = if u.is_empty() { vec![0.0; n] } else { parse_csv_vec(&u)? };
            let v0 = parse_csv_vec(&v0)?;
            let vf = spec.comparison_field(concert_core::models::InputSignal::Constant {
                value: uvec.clone(),
            });
            let traj = flow(&vf, 0.0, &v0, horizon, &StepControl::default())?;
            let gamma_u: Vector = (0..n).map(|i| spec.input_gains[i].eval(uvec[i])).collect();
            let gtrace: Vec<Vector> = traj.times.iter().map(|_| gamma_u.clone()).collect();
            let rep = iss_envelope(&spec, &ns, c, &traj.times, &traj.states, &gtrace)?;
            let ok = rep.ok;
            emit_json(&out, "iss", 0, serde_json::to_value(&rep).unwrap())?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Selftest { quick } => {
            let results = acceptance::run_all(quick);
            let mut ok = true;
            for r in &results {
                println!("{}", acceptance::format_line(r));
                ok &= r.gate_ok();
            }
            let n_green = results.iter().filter(|r| r.gate_ok()).count();
            println!("{n_green}/{} criteria at their expected outcome", results.len());
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}
