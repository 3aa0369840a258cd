mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nll_core::contextuality::ks::{self, build_triad_graph, ks_color, ks_color_parallel, KsOutcome};
use nll_core::contextuality::{
    commuting_sets_mermin, linearity_counterexamples, mermin_check, octant_coloring, verify_coloring,
    vn_reconstruct, ColoringCertificate,
};
use nll_core::entangle::verify_random;
use nll_core::lhv::{
    bell_inequality, bell_inequality_sampled, lhv_bell_terms, maximize_violation, singlet_correlation,
    CoplanarTable, LambdaDistribution, LhvStrategy,
};
use nll_core::linalg::{inner, random, CMatrix};
use nll_core::schrodinger_nl::{
    bellext_state, conditional_correlation, schrodinger_ks_demo, schrodinger_mermin_demo,
};
use nll_core::sterngerlach::{equivariance_check, integrate_trajectory, EnsembleParams, FieldConfig};
use nll_core::{rng, Direction};

use output::{fmt_f64, Csv};

#[derive(Parser)]
#[command(name = "nll", version, about = "Desk-scale checks of hidden-variable no-go arguments")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, env = "NLL_SEED", default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Bell's inequality for the singlet and for local hidden-variable models.
    #[command(subcommand)]
    Bell(BellCmd),
    /// Kochen–Specker colorings of direction sets.
    #[command(subcommand)]
    Ks(KsCmd),
    /// The two-qubit parity argument.
    Mermin,
    /// Perfect correlations of maximally entangled states.
    #[command(subcommand)]
    Entangle(EntangleCmd),
    /// Contextuality arguments realized on maximally entangled states.
    #[command(subcommand)]
    Schrodinger(SchrodingerCmd),
    /// Density matrices from expectation functionals.
    #[command(subcommand)]
    Vn(VnCmd),
    /// Bohmian Stern–Gerlach trajectories.
    #[command(subcommand)]
    Bohm(BohmCmd),
}

#[derive(Subcommand)]
enum BellCmd {
    /// Every coplanar triple on a grid (CSV).
    Scan {
        #[arg(long, default_value_t = 10.0)]
        grid_deg: f64,
    },
    /// Largest singlet violation: grid search then local refinement.
    Maximize {
        #[arg(long, default_value_t = 1.0)]
        grid_deg: f64,
    },
    /// Singlet correlations at one triple of in-plane angles (degrees).
    Check {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 120.0, allow_negative_numbers = true)]
        c: f64,
    },
    /// Monte Carlo correlations of a local model at one triple.
    Lhv {
        #[arg(long, value_enum, default_value_t = Strategy::Sign)]
        strategy: Strategy,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 120.0, allow_negative_numbers = true)]
        c: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Sign,
    Const,
}

#[derive(Subcommand)]
enum KsCmd {
    /// Search for a coloring of the directions in a file.
    Color {
        #[arg(long)]
        file: PathBuf,
        /// Split the search across this many workers.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// The octant coloring applied to the explicit orthogonal triple.
    PaperTriple,
}

#[derive(Subcommand)]
enum EntangleCmd {
    Verify {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Subcommand)]
enum SchrodingerCmd {
    KsDemo {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Direction file; the bundled 33-direction set if omitted.
        #[arg(long)]
        dirs: Option<PathBuf>,
        #[arg(long)]
        parallel: Option<usize>,
    },
    MerminDemo {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
    },
    Conditional {
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Kept trials.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// In-plane angle of the first setting, degrees.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        b: f64,
    },
}

#[derive(Subcommand)]
enum VnCmd {
    Reconstruct {
        #[arg(long, value_enum, default_value_t = VnState::Random)]
        state: VnState,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Value assignments that linearity would force.
    Linearity {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VnState {
    Random,
    Mixed,
}

#[derive(Args, Clone, Copy)]
struct FieldArgs {
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    gradient: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    bias: f64,
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    #[arg(long, default_value_t = 1.0)]
    t_exit: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 5.0)]
    t_total: f64,
}

impl FieldArgs {
    fn config(&self) -> FieldConfig {
        FieldConfig {
            gradient: self.gradient,
            bias: self.bias,
            width: self.width,
            t_exit: self.t_exit,
            ..FieldConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum BohmCmd {
    /// One trajectory (CSV of t, z, v, density).
    Run {
        #[arg(long, allow_negative_numbers = true)]
        z0: f64,
        #[command(flatten)]
        field: FieldArgs,
        /// Keep every n-th step.
        #[arg(long, default_value_t = 10)]
        stride: usize,
    },
    /// Ensemble sampled from the initial density.
    Ensemble {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        bins: usize,
        #[command(flatten)]
        field: FieldArgs,
    },
}

/// Output text and whether every verification in it passed.
struct Report {
    text: String,
    ok: bool,
}

impl Report {
    fn json(v: Value, ok: bool) -> Self {
        Self {
            text: output::json(v),
            ok,
        }
    }
}

/// Malformed input; exits with status 2.
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    BadInput(msg.into()).into()
}

fn core(e: nll_core::Error) -> anyhow::Error {
    use nll_core::Error as E;
    match e {
        E::InvalidInput(_) | E::BadIndices(_) | E::DimMismatch(_) | E::NegativeTime(_) => {
            bad(e.to_string())
        }
        other => other.into(),
    }
}

fn format_or(f: Option<Format>, default: Format, allowed: &[Format]) -> anyhow::Result<Format> {
    let f = f.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(bad("this command does not support the requested format"))
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn read_directions(path: &PathBuf) -> anyhow::Result<Vec<[f64; 3]>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    ks::parse_directions(&text).map_err(core)
}

fn outcome_value(g: &ks::TriadGraph, out: &KsOutcome) -> anyhow::Result<(Value, bool)> {
    Ok(match out {
        KsOutcome::Colorable { coloring, .. } => {
            let cert = ColoringCertificate::new(g, coloring).map_err(core)?;
            let ok = cert.violations.is_empty() && ks::pair_violations(g, coloring).is_empty();
            (to_value(&cert), ok)
        }
        KsOutcome::Uncolorable { .. } => (Value::String("UNCOLORABLE".into()), true),
    })
}

fn bell(cmd: BellCmd, seed: u64, fmt: Option<Format>) -> anyhow::Result<Report> {
    match cmd {
        BellCmd::Scan { grid_deg } => {
            format_or(fmt, Format::Csv, &[Format::Csv])?;
            let table = CoplanarTable::new(singlet_correlation, grid_deg).map_err(core)?;
            let mut csv = Csv::new(&["phi_a", "phi_b", "phi_c", "lhs", "rhs", "margin"]);
            table.for_each(|r| {
                csv.row(&[r.phi_a, r.phi_b, r.phi_c, r.lhs, r.rhs, r.margin].map(fmt_f64));
            });
            Ok(Report {
                text: csv.finish(),
                ok: true,
            })
        }
        BellCmd::Maximize { grid_deg } => {
            format_or(fmt, Format::Json, &[Format::Json])?;
            let s = maximize_violation(singlet_correlation, grid_deg, true).map_err(core)?;
            Ok(Report::json(to_value(&s), true))
        }
        BellCmd::Check { a, b, c } => {
            format_or(fmt, Format::Json, &[Format::Json, Format::Csv])?;
            let [da, db, dc] = [a, b, c].map(Direction::in_plane_deg);
            let chk = bell_inequality(singlet_correlation, &da, &db, &dc);
            let p = [
                singlet_correlation(&da, &db),
                singlet_correlation(&da, &dc),
                singlet_correlation(&db, &dc),
            ];
            if fmt == Some(Format::Csv) {
                let mut csv = Csv::new(&[
                    "phi_a", "phi_b", "phi_c", "p_ab", "p_ac", "p_bc", "lhs", "rhs", "margin", "violated",
                ]);
                let mut cells: Vec<String> =
                    [a, b, c, p[0], p[1], p[2], chk.lhs, chk.rhs, chk.margin].map(fmt_f64).to_vec();
                cells.push(chk.violated.to_string());
                csv.row(&cells);
                return Ok(Report {
                    text: csv.finish(),
                    ok: true,
                });
            }
            Ok(Report::json(
                json!({
                    "angles_deg": [a, b, c],
                    "p_ab": p[0], "p_ac": p[1], "p_bc": p[2],
                    "lhs": chk.lhs, "rhs": chk.rhs, "margin": chk.margin,
                    "violated": chk.violated,
                }),
                true,
            ))
        }
        BellCmd::Lhv {
            strategy,
            samples,
            a,
            b,
            c,
        } => {
            format_or(fmt, Format::Json, &[Format::Json])?;
            let strat = match strategy {
                Strategy::Sign => LhvStrategy::sign_model(),
                Strategy::Const => LhvStrategy::constant(),
            };
            let [da, db, dc] = [a, b, c].map(Direction::in_plane_deg);
            let dist = LambdaDistribution::uniform_sphere();
            let t = lhv_bell_terms(&strat, &dist, &da, &db, &dc, samples, seed).map_err(core)?;
            let chk = bell_inequality_sampled(t.p_ab, t.p_ac, t.p_bc);
            Ok(Report::json(
                json!({
                    "strategy": strat.name(),
                    "samples": samples,
                    "seed": seed,
                    "angles_deg": [a, b, c],
                    "terms": to_value(&t),
                    "check": to_value(&chk),
                }),
                !chk.violated,
            ))
        }
    }
}

fn ks_cmd(cmd: KsCmd, fmt: Option<Format>) -> anyhow::Result<Report> {
    format_or(fmt, Format::Json, &[Format::Json])?;
    match cmd {
        KsCmd::Color { file, parallel } => {
            let dirs = read_directions(&file)?;
            let g = build_triad_graph(&dirs, ks::ORTHO_TOL);
            let out = match parallel {
                Some(w) if w > 1 => ks_color_parallel(&g, w),
                _ => ks_color(&g),
            };
            let (result, ok) = outcome_value(&g, &out)?;
            let mut v = json!({
                "directions": g.len(),
                "triads": g.triads.len(),
                "orthogonal_pairs": g.pairs.len(),
                "result": result,
            });
            // colorable node counts depend on worker scheduling
            if let KsOutcome::Uncolorable { nodes } = out {
                v["nodes"] = json!(nodes);
            }
            Ok(Report::json(v, ok))
        }
        KsCmd::PaperTriple => {
            let triple = ks::octant_counterexample_triple();
            let g = build_triad_graph(&triple, 1e-12);
            let c = octant_coloring(&g);
            let cert = ColoringCertificate::new(&g, &c).map_err(core)?;
            let axes = build_triad_graph(&ks::axes(), ks::ORTHO_TOL);
            let axes_violations = verify_coloring(&axes, &octant_coloring(&axes)).map_err(core)?;
            let violated = cert.violations.len() == 1;
            Ok(Report::json(
                json!({
                    "coloring": "octant",
                    "triple": to_value(&cert),
                    "triple_violated": violated,
                    "axes_violations": axes_violations,
                }),
                violated && axes_violations.is_empty(),
            ))
        }
    }
}

fn mermin(fmt: Option<Format>) -> anyhow::Result<Report> {
    let f = format_or(fmt, Format::Json, &[Format::Json, Format::Csv])?;
    let r = mermin_check();
    let sets = commuting_sets_mermin();
    let mut sets_ok = true;
    let mut set_rows = Vec::new();
    for s in &sets {
        let comm = s.max_commutator();
        let spec_ok = nll_core::contextuality::check_spectrum_constraints(s).map_err(core)?;
        sets_ok &= comm <= 1e-10 && spec_ok;
        set_rows.push(json!({
            "name": s.name,
            "members": s.labels,
            "relation": s.constraints.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
            "max_commutator": comm,
            "spectrum_satisfies_relation": spec_ok,
        }));
    }
    let ok = r.contradiction() && sets_ok;
    if f == Format::Csv {
        let mut csv = Csv::new(&["sx1", "sy1", "sx2", "sy2", "A", "B", "X", "Y", "C", "Z", "CZ"]);
        for a in &r.assignments {
            csv.row(&[a.sx1, a.sy1, a.sx2, a.sy2, a.a, a.b, a.x, a.y, a.c, a.z, a.cz].map(|x| x.to_string()));
        }
        return Ok(Report { text: csv.finish(), ok });
    }
    let scalar = r.operator_product[(0, 0)].re;
    let is_scalar = r
        .operator_product
        .max_diff(&CMatrix::identity(4).scale(nll_core::linalg::re(scalar)))
        <= 1e-12;
    let all = r.assignment_products();
    Ok(Report::json(
        json!({
            "assignments": to_value(&r.assignments),
            "assignments_all": if all.iter().all(|&x| x == all[0]) { json!(all[0]) } else { Value::Null },
            "operator_product": if is_scalar { json!(scalar.round() as i64) } else { Value::Null },
            "operator_product_deviation": r.product_deviation_from_minus_identity(),
            "commuting_sets": set_rows,
            "contradiction": r.contradiction(),
        }),
        ok,
    ))
}

fn entangle(cmd: EntangleCmd, seed: u64, fmt: Option<Format>) -> anyhow::Result<Report> {
    format_or(fmt, Format::Json, &[Format::Json])?;
    let EntangleCmd::Verify { dim, trials } = cmd;
    if dim < 1 {
        return Err(bad("dimension must be positive"));
    }
    let mut r = rng::stream(seed, 0);
    let rep = verify_random(dim, trials, &mut r).map_err(core)?;
    let ok = rep.max_residual <= 1e-10 && rep.max_basis_invariance_residual <= 1e-10;
    Ok(Report::json(to_value(&rep), ok))
}

fn schrodinger(cmd: SchrodingerCmd, seed: u64, fmt: Option<Format>) -> anyhow::Result<Report> {
    format_or(fmt, Format::Json, &[Format::Json])?;
    match cmd {
        SchrodingerCmd::KsDemo { dim, dirs, parallel } => {
            let directions = match &dirs {
                Some(p) => read_directions(p)?,
                None => ks::peres33(),
            };
            let rep = schrodinger_ks_demo(dim, &directions, parallel).map_err(core)?;
            let g = build_triad_graph(&directions, ks::ORTHO_TOL);
            let (coloring, color_ok) = outcome_value(&g, &rep.outcome)?;
            let mut v = json!({
                "dim": rep.dim,
                "directions": rep.directions,
                "triads": rep.triads,
                "residual_max": rep.residual_max,
                "coloring": coloring,
                "restricted_spectrum_ok": rep.restricted_spectrum_ok,
                "contradiction": rep.contradiction(),
            });
            if let KsOutcome::Uncolorable { nodes } = rep.outcome {
                v["nodes"] = json!(nodes);
            }
            let ok = rep.residual_max < 1e-10 && color_ok && rep.restricted_spectrum_ok != Some(false);
            Ok(Report::json(v, ok))
        }
        SchrodingerCmd::MerminDemo { trials, dim } => {
            let rep = schrodinger_mermin_demo(dim, trials, seed).map_err(core)?;
            let ok = rep.contradiction() && rep.no_signaling.iter().all(|c| c.within_4_sigma);
            let mut v = to_value(&rep);
            v["contradiction"] = json!(rep.contradiction());
            Ok(Report::json(v, ok))
        }
        SchrodingerCmd::Conditional { dim, samples, a, b } => {
            let s = bellext_state(dim).map_err(core)?;
            let (da, db) = (Direction::in_plane_deg(a), Direction::in_plane_deg(b));
            let est = conditional_correlation(&s, &da, &db, ([0, 1], [0, 1]), samples, seed).map_err(core)?;
            let mut v = to_value(&est);
            v["angles_deg"] = json!([a, b]);
            v["minus_a_dot_b"] = json!(-da.dot(&db));
            Ok(Report::json(v, true))
        }
    }
}

fn vn(cmd: VnCmd, seed: u64, fmt: Option<Format>) -> anyhow::Result<Report> {
    format_or(fmt, Format::Json, &[Format::Json])?;
    match cmd {
        VnCmd::Reconstruct { state, dim } => {
            if dim < 1 {
                return Err(bad("dimension must be positive"));
            }
            let (expected, e): (CMatrix, Box<dyn Fn(&CMatrix) -> nll_core::C64>) = match state {
                VnState::Random => {
                    let mut r = rng::stream(seed, 1);
                    let psi = random::state(vec![dim], &mut r).amps().to_vec();
                    let rho = CMatrix::outer(&psi, &psi);
                    (rho, Box::new(move |o: &CMatrix| inner(&psi, &o.mul_vec(&psi).expect("square"))))
                }
                VnState::Mixed => {
                    let n = dim as f64;
                    (
                        CMatrix::identity(dim).scale(nll_core::linalg::re(1.0 / n)),
                        Box::new(move |o: &CMatrix| o.trace() / n),
                    )
                }
            };
            let rep = vn_reconstruct(dim, &e, seed).map_err(core)?;
            let err = rep.density.max_diff(&expected);
            let ok = err <= 1e-10 && rep.trace_ok == Some(true) && rep.positive == Some(true);
            Ok(Report::json(
                json!({
                    "dim": dim,
                    "reconstruction_error": err,
                    "roundtrip_error": rep.roundtrip_error,
                    "trace": [rep.trace.re, rep.trace.im],
                    "trace_ok": rep.trace_ok,
                    "min_eigenvalue": rep.min_eigenvalue,
                    "positive": rep.positive,
                }),
                ok,
            ))
        }
        VnCmd::Linearity { samples } => {
            let rep = linearity_counterexamples(samples, seed);
            let ok = rep.spin_satisfying == 0 && rep.oscillator_failures == rep.oscillator_samples.len();
            let mut v = to_value(&rep);
            if let Value::Object(m) = &mut v {
                // the sample list is long; keep the first few as illustration
                if let Some(Value::Array(xs)) = m.get_mut("oscillator_samples") {
                    xs.truncate(5);
                }
                m.insert("oscillator_total".into(), json!(rep.oscillator_samples.len()));
            }
            Ok(Report::json(v, ok))
        }
    }
}

fn bohm(cmd: BohmCmd, seed: u64, fmt: Option<Format>) -> anyhow::Result<Report> {
    match cmd {
        BohmCmd::Run { z0, field, stride } => {
            format_or(fmt, Format::Csv, &[Format::Csv])?;
            if stride == 0 {
                return Err(bad("stride must be positive"));
            }
            let t = integrate_trajectory(z0, &field.config(), field.dt, field.t_total).map_err(core)?;
            let mut csv = Csv::new(&["t", "z", "v", "density"]);
            let last = t.times.len() - 1;
            for i in (0..t.times.len()).filter(|&i| i % stride == 0 || i == last) {
                csv.row(&[t.times[i], t.z[i], t.v[i], t.density[i]].map(fmt_f64));
            }
            let mut text = csv.finish();
            text.push_str(&format!(
                "# branch={:?} outcome={} crossings={}\n",
                t.final_branch, t.outcome, t.crossings
            ));
            Ok(Report {
                text,
                ok: t.crossings == 0,
            })
        }
        BohmCmd::Ensemble { n, bins, field } => {
            format_or(fmt, Format::Json, &[Format::Json])?;
            let params = EnsembleParams {
                n,
                dt: field.dt,
                t_total: field.t_total,
                bins,
                seed,
            };
            let rep = equivariance_check(&field.config(), &params).map_err(core)?;
            let ok = rep.crossings == 0 && (rep.degenerate || rep.upper_within_4_sigma);
            Ok(Report::json(to_value(&rep), ok))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Report> {
    let (seed, fmt) = (cli.seed, cli.format);
    match cli.command {
        Command::Bell(c) => bell(c, seed, fmt),
        Command::Ks(c) => ks_cmd(c, fmt),
        Command::Mermin => mermin(fmt),
        Command::Entangle(c) => entangle(c, seed, fmt),
        Command::Schrodinger(c) => schrodinger(c, seed, fmt),
        Command::Vn(c) => vn(c, seed, fmt),
        Command::Bohm(c) => bohm(c, seed, fmt),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return if e.downcast_ref::<BadInput>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            };
        }
    };
    let written = match &out {
        Some(p) => std::fs::write(p, &report.text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{}", report.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed");
        ExitCode::from(1)
    }
}
