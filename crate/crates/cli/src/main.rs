//! `lorentzdyn`: command-line front end.
//!
//! Exit codes: 0 on success, 2 on precondition errors (bad input, wrong kind
//! of sequence, usage errors), 3 on numerical failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lorentzdyn::approx_stability::{
    as_subspace_all, as_subspace_ellipsoid, as_subspace_graph, as_subspace_kak, brute_force_as, lorentz_as_check,
    spas_subspace, BruteForceOptions,
};
use lorentzdyn::cocycles::{entropy_dichotomy, lyapunov_exponent, TorusAutomorphism};
use lorentzdyn::io::{fmt_f64, read_json, read_matrices, read_matrix, read_sequence, to_csv_string, to_json_string};
use lorentzdyn::linalg::singular_values;
use lorentzdyn::model_spaces::torus::is_hyperbolic_exact;
use lorentzdyn::model_spaces::{
    ads_other_family, ads_pair_orbit, ads_plane_family, ads_second_factor_action, fixed_isotropic_directions,
    hopf_trace, integer_isometries, mobius, plus_minus_identity_check, CircleParam, HopfModel, IsotropicPlane2,
    RationalLorentzForm,
};
use lorentzdyn::projective::{classify_elementary, limit_set, LimitSetOptions};
use lorentzdyn::reports::{
    AdsCircleReport, AdsOrbitReport, AsReport, BruteSummary, KakReport, LimitSetReport, LorentzCheckReport,
    TorusFixedReport, TorusIsometriesReport,
};
use lorentzdyn::{kak, lorentz_kak, AsOptions, Error, HyperbolicPoint, QuadraticForm, Result};
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lorentzdyn", version, about = "Approximate stability of Lorentz and linear dynamics")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override NAME=VALUE (repeatable): agreement, bound-threshold,
    /// growth-ratio, cluster-threshold, converge, intersection, cluster-angle,
    /// divergence-threshold.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Use the data-parallel code paths (output is unchanged).
    #[arg(long, global = true)]
    parallel: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Cartan decomposition A = L·D·R of a matrix file.
    Kak {
        input: PathBuf,
        /// Gram matrix of a Lorentz form; adds the (λ, 1, …, 1, 1/λ) check.
        #[arg(long)]
        form: Option<PathBuf>,
    },
    /// Approximately stable and strongly approximately stable subspaces.
    As {
        sequence: PathBuf,
        #[arg(long, value_enum, default_value_t = Oracle::Kak)]
        oracle: Oracle,
        /// Gram matrix of a Lorentz form; adds the lightlike-hyperplane check.
        #[arg(long)]
        form: Option<PathBuf>,
    },
    /// Limit set of the group generated by the matrices in a file.
    LimitSet {
        generators: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Gram matrix of the form (default: diag(−1, 1, …, 1)).
        #[arg(long)]
        form: Option<PathBuf>,
    },
    /// Reports on the model spaces.
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    Kak,
    Ellipsoid,
    Graph,
    Brute,
    All,
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Integer isometries of a flat torus with entries bounded by the height.
    TorusIsoms {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        height: i64,
        #[arg(long, default_value_t = lorentzdyn::model_spaces::torus::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Fixed isotropic directions, cocycle exponents and entropy of one
    /// integer isometry.
    TorusFixed {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Return cocycle of the Hopf manifold along the orbit of a point.
    Hopf {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        lambda: f64,
        /// `x,y`
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        n: i64,
    },
    /// Orbit type of a pair of totally isotropic planes of AdS₃.
    AdsOrbit {
        /// `alpha:A` (with A a number or `inf`) or `c:C1,C2`.
        #[arg(long, allow_hyphen_values = true)]
        first: String,
        #[arg(long, allow_hyphen_values = true)]
        second: String,
    },
    /// Action of the second SL(2,R) factor on the plane family.
    AdsCircle {
        /// Row-major `a,b;c,d` with determinant 1.
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        /// A number or `inf`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
    },
}

/// A finished command: the report text and, for checks that ran but did
/// not pass, the failure to report after writing it.
struct Output {
    text: String,
    failure: Option<Error>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, failure: None }
    }
}

struct Tuning {
    as_opts: AsOptions,
    brute: BruteForceOptions,
    limit_set: LimitSetOptions,
}

impl Tuning {
    fn from_config(run: &RunConfig) -> Result<Self> {
        let mut t = Tuning {
            as_opts: AsOptions { parallel: run.parallel, ..AsOptions::default() },
            brute: BruteForceOptions::default(),
            limit_set: LimitSetOptions { seed: run.seed, parallel: run.parallel, ..LimitSetOptions::default() },
        };
        for item in &run.tolerances {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Precondition(format!("tolerance `{item}` is not NAME=VALUE")))?;
            let value: f64 =
                value.trim().parse().map_err(|_| Error::Precondition(format!("tolerance `{item}` is not a number")))?;
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Precondition(format!("tolerance `{name}` must be positive")));
            }
            match name.trim() {
                "agreement" => t.as_opts.agreement_tol = value,
                "bound-threshold" => {
                    t.as_opts.bound_threshold = value;
                    t.brute.bound_threshold = value;
                }
                "growth-ratio" => {
                    t.as_opts.growth_ratio = value;
                    t.brute.growth_ratio = value;
                }
                "cluster-threshold" => t.as_opts.limit.cluster_threshold = value,
                "converge" => t.as_opts.limit.converge_tol = value,
                "intersection" => t.as_opts.limit.intersection_tol = value,
                "cluster-angle" => t.limit_set.cluster_angle = value,
                "divergence-threshold" => t.limit_set.divergence_threshold = value,
                other => return Err(Error::Precondition(format!("unknown tolerance `{other}`"))),
            }
        }
        Ok(t)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Tuning::from_config(&cli.run).and_then(|t| run(&cli, &t));
    let output = match result {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let written = match &cli.run.output {
        Some(path) => std::fs::write(path, &output.text).map_err(Error::from),
        None => {
            print!("{}", output.text);
            Ok(())
        }
    };
    if let Err(e) = written {
        return fail(&e);
    }
    match output.failure {
        Some(e) => fail(&e),
        None => ExitCode::SUCCESS,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_precondition() { 2 } else { 3 })
}

fn run(cli: &Cli, t: &Tuning) -> Result<Output> {
    let format = cli.run.format;
    match &cli.command {
        Command::Kak { input, form } => cmd_kak(input, form.as_deref(), format),
        Command::As { sequence, oracle, form } => cmd_as(sequence, *oracle, form.as_deref(), t, format),
        Command::LimitSet { generators, depth, samples, form } => {
            let opts = LimitSetOptions { depth: *depth, samples: *samples, ..t.limit_set.clone() };
            cmd_limit_set(generators, form.as_deref(), &opts, format)
        }
        Command::Model(m) => cmd_model(m, t, format),
    }
}

fn json<T: Serialize>(value: &T) -> Result<Output> {
    Ok(Output::ok(to_json_string(value)?))
}

fn no_csv(what: &str) -> Error {
    Error::Precondition(format!("csv output is not available for {what}"))
}

fn read_form(path: &Path) -> Result<QuadraticForm> {
    QuadraticForm::from_rows(&read_json::<Vec<Vec<f64>>>(path)?)
}

fn read_int_matrix(path: &Path) -> Result<DMatrix<i64>> {
    let rows: Vec<Vec<i64>> = read_json(path)?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Parse(format!("{}: expected a non-empty rectangular matrix", path.display())));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |i, j| rows[i][j]))
}

fn int_rows(m: &DMatrix<i64>) -> Vec<Vec<i64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_kak(input: &Path, form: Option<&Path>, format: Option<Format>) -> Result<Output> {
    let a = read_matrix(input)?;
    let report = match form {
        Some(f) => KakReport::from_lorentz(&lorentz_kak(&read_form(f)?, &a)?, &a),
        None => KakReport::new(&kak(&a)?, &a),
    };
    match format {
        Some(Format::Csv) => {
            let rows: Vec<Vec<String>> =
                report.d.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), fmt_f64(*d)]).collect();
            Ok(Output::ok(to_csv_string(&["i", "d"], &rows)?))
        }
        _ => json(&report),
    }
}

fn cmd_as(sequence: &Path, oracle: Oracle, form: Option<&Path>, t: &Tuning, format: Option<Format>) -> Result<Output> {
    let seq = read_sequence(sequence)?;
    let form = form.map(read_form).transpose()?;
    if let Some(f) = &form {
        if f.dim() != seq.dim() {
            return Err(Error::DimensionMismatch { expected: seq.dim(), got: f.dim() });
        }
    }
    if format == Some(Format::Csv) {
        let d = seq.dim();
        let mut header = vec!["n".to_string()];
        header.extend((1..=d).map(|k| format!("sigma_{k}")));
        let rows: Vec<Vec<String>> = seq
            .terms()
            .iter()
            .zip(seq.indices())
            .map(|(a, n)| {
                let mut row = vec![fmt_f64(*n)];
                row.extend(singular_values(a).iter().rev().map(|s| fmt_f64(*s)));
                row
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        return Ok(Output::ok(to_csv_string(&header, &rows)?));
    }
    let opts = &t.as_opts;
    let mut report = AsReport {
        generator_spec: seq.generator_spec().map(str::to_string),
        oracle: match oracle {
            Oracle::Kak => "kak",
            Oracle::Ellipsoid => "ellipsoid",
            Oracle::Graph => "graph",
            Oracle::Brute => "brute",
            Oracle::All => "all",
        }
        .into(),
        approx_stable: None,
        strongly_stable: None,
        brute: None,
        lorentz: None,
    };
    if oracle == Oracle::Brute {
        report.brute = Some(BruteSummary::from(&brute_force_as(&seq, &t.brute)?));
    } else {
        report.approx_stable = Some(match oracle {
            Oracle::Ellipsoid => as_subspace_ellipsoid(&seq, opts)?,
            Oracle::Graph => as_subspace_graph(&seq, opts)?,
            Oracle::All => as_subspace_all(&seq, opts)?,
            _ => as_subspace_kak(&seq, opts)?,
        });
        let lorentz_form = form.as_ref().filter(|f| f.is_lorentz());
        report.strongly_stable = Some(spas_subspace(&seq, lorentz_form, opts)?);
    }
    let mut failure = None;
    if let Some(f) = &form {
        let check = lorentz_as_check(f, &seq, opts)?;
        if let Some(c) = check.violations().first() {
            failure = Some(Error::LorentzViolation { clause: c.name.into(), detail: c.detail.clone() });
        }
        report.lorentz = Some(LorentzCheckReport::from(&check));
    }
    Ok(Output { text: to_json_string(&report)?, failure })
}

fn cmd_limit_set(
    generators: &Path,
    form: Option<&Path>,
    opts: &LimitSetOptions,
    format: Option<Format>,
) -> Result<Output> {
    let gens = read_matrices(generators)?;
    let d = gens.first().map(|g| g.nrows()).ok_or_else(|| Error::Precondition("no generators".into()))?;
    let form = match form {
        Some(f) => read_form(f)?,
        None => QuadraticForm::minkowski(d),
    };
    if !form.is_lorentz() {
        return Err(Error::InvalidForm(format!("signature {:?} is not Lorentz", form.signature())));
    }
    let mut e0 = DVector::zeros(form.dim());
    e0[0] = 1.0;
    let base = HyperbolicPoint::normalize(&form, &(form.standardizing_congruence() * e0))?;
    let estimate = limit_set(&form, &gens, &base, opts)?;
    match format {
        Some(Format::Csv) => {
            let mut header = vec!["sample".to_string(), "word_length".into(), "growth".into()];
            header.extend((0..d).map(|k| format!("ray_{k}")));
            let rows: Vec<Vec<String>> = estimate
                .trace
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let mut row = vec![k.to_string(), r.word_length.to_string(), fmt_f64(r.growth)];
                    row.extend(r.ray.iter().map(|x| fmt_f64(*x)));
                    row
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(Output::ok(to_csv_string(&header, &rows)?))
        }
        _ => json(&LimitSetReport {
            classification: classify_elementary(&estimate),
            estimate,
            seed: opts.seed,
            depth: opts.depth,
            samples: opts.samples,
        }),
    }
}

fn cmd_model(m: &ModelCommand, t: &Tuning, format: Option<Format>) -> Result<Output> {
    match m {
        ModelCommand::TorusIsoms { gram, height, budget } => {
            let g = RationalLorentzForm::new(read_int_matrix(gram)?)?;
            let elements = integer_isometries(&g, *height, *budget, t.as_opts.parallel)?;
            let hyperbolic = elements.iter().map(is_hyperbolic_exact).collect::<lorentzdyn::Result<Vec<bool>>>()?;
            if format == Some(Format::Csv) {
                let d = g.dim();
                let mut header = vec!["index".to_string(), "hyperbolic".into()];
                header.extend((0..d * d).map(|k| format!("a_{}{}", k / d + 1, k % d + 1)));
                let rows: Vec<Vec<String>> = elements
                    .iter()
                    .zip(&hyperbolic)
                    .enumerate()
                    .map(|(k, (a, h))| {
                        let mut row = vec![k.to_string(), h.to_string()];
                        row.extend(a.transpose().iter().map(|x| x.to_string()));
                        row
                    })
                    .collect();
                let header: Vec<&str> = header.iter().map(String::as_str).collect();
                return Ok(Output::ok(to_csv_string(&header, &rows)?));
            }
            json(&TorusIsometriesReport {
                gram: int_rows(g.gram()),
                height: *height,
                count: elements.len(),
                elements: elements.iter().map(int_rows).collect(),
                hyperbolic,
            })
        }
        ModelCommand::TorusFixed { gram, matrix } => {
            if format == Some(Format::Csv) {
                return Err(no_csv("torus-fixed"));
            }
            let g = RationalLorentzForm::new(read_int_matrix(gram)?)?;
            let aut = TorusAutomorphism::new(g.clone(), read_int_matrix(matrix)?)?;
            let form = g.form();
            let a = aut.matrix_f64();
            let fixed = fixed_isotropic_directions(&form, std::slice::from_ref(&a), 1e-9)?;
            let mut plus_minus_identity = Vec::new();
            let rays = &fixed.rays;
            for i in 0..rays.len() {
                for j in i + 1..rays.len() {
                    for k in j + 1..rays.len() {
                        let triple = [rays[i].clone(), rays[j].clone(), rays[k].clone()];
                        plus_minus_identity.push(plus_minus_identity_check(&form, &a, &triple, 1e-8)?);
                    }
                }
            }
            let entropy = entropy_dichotomy(&aut, &t.as_opts)?;
            let lyapunov = if aut.is_hyperbolic() {
                Some([lyapunov_exponent(&aut, 1)?, lyapunov_exponent(&aut, 2)?])
            } else {
                None
            };
            json(&TorusFixedReport {
                gram: int_rows(g.gram()),
                matrix: int_rows(aut.matrix()),
                fixed,
                plus_minus_identity,
                entropy,
                lyapunov,
            })
        }
        ModelCommand::Hopf { alpha, lambda, point, n } => {
            let model = HopfModel::new(*alpha, *lambda)?;
            let p = parse_numbers(point)?;
            let [x, y] = p[..] else {
                return Err(Error::Precondition(format!("point `{point}` must have two coordinates")));
            };
            if *n < 0 {
                return Err(Error::Precondition("n must be non-negative".into()));
            }
            let trace = hopf_trace(&model, [x, y], *n)?;
            if format == Some(Format::Json) {
                return json(&trace);
            }
            let rows: Vec<Vec<String>> = trace
                .iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        s.m.to_string(),
                        fmt_f64(s.rep[0][0]),
                        fmt_f64(s.rep[1][1]),
                        fmt_f64(s.norm),
                        fmt_f64(s.image[0]),
                        fmt_f64(s.image[1]),
                    ]
                })
                .collect();
            Ok(Output::ok(to_csv_string(&["n", "m", "rep_11", "rep_22", "norm", "image_x", "image_y"], &rows)?))
        }
        ModelCommand::AdsOrbit { first, second } => {
            if format == Some(Format::Csv) {
                return Err(no_csv("ads-orbit"));
            }
            let (p1, p2) = (parse_plane(first)?, parse_plane(second)?);
            json(&AdsOrbitReport {
                orbit: ads_pair_orbit(&p1, &p2),
                first: p1.subspace().clone(),
                second: p2.subspace().clone(),
            })
        }
        ModelCommand::AdsCircle { h, alpha } => {
            if format == Some(Format::Csv) {
                return Err(no_csv("ads-circle"));
            }
            let h = parse_sl2(h)?;
            let alpha = parse_circle(alpha)?;
            json(&AdsCircleReport {
                h: [[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]],
                alpha,
                image: ads_second_factor_action(&h, alpha)?,
                mobius: mobius(&h, alpha),
            })
        }
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Precondition(format!("`{x}` is not a number"))))
        .collect()
}

fn parse_circle(s: &str) -> Result<CircleParam> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(CircleParam::Infinity),
        x => x
            .parse::<f64>()
            .ok()
            .filter(|a| a.is_finite())
            .map(CircleParam::Finite)
            .ok_or_else(|| Error::Precondition(format!("`{x}` is neither a number nor `inf`"))),
    }
}

fn parse_plane(s: &str) -> Result<IsotropicPlane2> {
    match s.split_once(':') {
        Some(("alpha", a)) => Ok(ads_plane_family(parse_circle(a)?)),
        Some(("c", c)) => match parse_numbers(c)?[..] {
            [c1, c2] => ads_other_family([c1, c2]),
            _ => Err(Error::Precondition(format!("`{s}`: c needs two coordinates"))),
        },
        _ => Err(Error::Precondition(format!("`{s}` is neither `alpha:A` nor `c:C1,C2`"))),
    }
}

fn parse_sl2(s: &str) -> Result<Matrix2<f64>> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_numbers).collect::<Result<_>>()?;
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        return Err(Error::Precondition(format!("`{s}` is not a 2x2 matrix `a,b;c,d`")));
    }
    Ok(Matrix2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1]))
}
