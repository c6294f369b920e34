//! Command-line experiment driver. Every subcommand writes one CSV table.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{DecayConfig, GroupConfig};
use crate::constants::{c_ball, c_ball_integral_check, c_ball_stirling};
use crate::error::{Error, Result};
use crate::geometry::{
    bergman_kernel, bergman_kernel_power, hyperbolic_distance, pairing, BallPoint, KernelContext,
};
use crate::laplace::{laplace_error_order, min_eigenvalue, shipped_problem, SHIPPED_CASES};
use crate::poincare::{
    element_residual, enumerate, reproducing_check, theta_scalar_partial_sums, AveragedMonomial,
};
use crate::quadrature::QuadratureConfig;
use crate::report::{sci, Table};
use crate::submanifold::{example_by_name, fit_power_law, ratio_to_law, separated_decay, LawKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ballseries", version, about = "Bergman kernel and Poincare series experiments on the unit ball")]
struct Cli {
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
struct QuadArgs {
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long, default_value_t = 1e-6)]
    rel_tol: f64,
    /// Gauss-Legendre nodes per axis of each adaptive cell.
    #[arg(long, default_value_t = 8)]
    nodes: usize,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig> {
        let q = QuadratureConfig {
            nodes_per_axis: self.nodes,
            ..QuadratureConfig::adaptive(self.rel_tol)
        };
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PoincareMode {
    Residual,
    Reproducing,
    Tail,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pairing, kernels and distance between points.
    Kernel {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// First point as `re,im,re,im,...`.
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        w: Option<String>,
        /// Number of random point pairs drawn from `--seed`.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Table of c(B^n,k) with Stirling ratios and the normalization integral.
    Constant {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: u32,
    },
    /// Laplace leading term against quadrature for a shipped phase.
    LaplaceCheck {
        /// One of the shipped cases or `all`.
        #[arg(long, default_value = "all")]
        case: String,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
    },
    /// I_1 for one of the worked examples, with the ratio to its law.
    Pairing {
        #[arg(long)]
        example: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<u32>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Exponential decay of the pairing between separated submanifolds.
    Decay {
        /// `parallel` or a JSON file with `x` and `y` submanifolds.
        #[arg(long, default_value = "parallel")]
        geometry: String,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<u32>,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
    },
    /// Truncated Poincare series diagnostics for a group.
    Poincare {
        /// Built-in group name or a JSON file.
        #[arg(long)]
        group_config: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        radius: usize,
        #[arg(long, value_enum)]
        mode: PoincareMode,
        /// Seed point `p` as `re,im`.
        #[arg(long, default_value = "0.1,0.05", allow_hyphen_values = true)]
        p: String,
        /// 0-based component of the vector-valued series.
        #[arg(long, default_value_t = 0)]
        j: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        /// Polar nodes for the reproducing check; the table also doubles them.
        #[arg(long, default_value_t = 16)]
        nodes: usize,
        /// Monomial degree of the averaged test function.
        #[arg(long, default_value_t = 2)]
        exponent: u32,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let flags: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &flags) {
        Ok(table) => {
            let text = table.render();
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 1;
                    }
                }
                None => print!("{text}"),
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::OutsideBall { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn execute(cli: &Cli, flags: &[String]) -> Result<Table> {
    let mut t = match &cli.command {
        Command::Kernel { n, k, z, w, random } => kernel_table(*n, *k, z.as_deref(), w.as_deref(), *random, cli.seed)?,
        Command::Constant { n, kmax } => constant_table(*n, *kmax)?,
        Command::LaplaceCheck { case, lambdas, rel_tol } => laplace_table(case, lambdas, *rel_tol)?,
        Command::Pairing {
            example,
            n,
            alpha,
            beta,
            k_list,
            quad,
        } => pairing_table(example, *n, *alpha, *beta, k_list, &quad.config()?)?,
        Command::Decay {
            geometry,
            k_list,
            rel_tol,
        } => decay_table(geometry, k_list, *rel_tol)?,
        Command::Poincare {
            group_config,
            k,
            radius,
            mode,
            p,
            j,
            samples,
            nodes,
            exponent,
            cap,
        } => {
            let p = parse_point(p)?;
            let opts = PoincareOpts {
                k: *k,
                radius: *radius,
                p,
                j: *j,
                samples: *samples,
                nodes: *nodes,
                exponent: *exponent,
                cap: *cap,
            };
            let cfg = GroupConfig::load(group_config)?;
            match mode {
                PoincareMode::Residual => residual_table(&cfg, &opts)?,
                PoincareMode::Reproducing => reproducing_table(&cfg, &opts)?,
                PoincareMode::Tail => tail_table(&cfg, &opts)?,
            }
        }
    };
    let mut meta = vec![
        ("tool".to_string(), format!("ballseries {VERSION}")),
        ("flags".to_string(), flags.join(" ")),
        ("seed".to_string(), cli.seed.to_string()),
    ];
    meta.append(&mut t.metadata);
    t.metadata = meta;
    Ok(t)
}

fn parse_point(s: &str) -> Result<BallPoint> {
    let xs = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::InvalidArgument(format!("bad point '{s}': {e}")))?;
    if xs.is_empty() || xs.len() % 2 != 0 {
        return Err(Error::InvalidArgument(format!("point '{s}' needs re,im pairs")));
    }
    BallPoint::from_interleaved(&xs)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> BallPoint {
    loop {
        let xs: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if xs.iter().map(|x| x * x).sum::<f64>() < 0.9 {
            return BallPoint::from_interleaved(&xs).expect("sample is inside the ball");
        }
    }
}

fn kernel_table(n: usize, k: u32, z: Option<&str>, w: Option<&str>, random: usize, seed: u64) -> Result<Table> {
    let ctx = KernelContext::new(n, k)?;
    let mut pairs = Vec::new();
    match (z, w) {
        (Some(z), Some(w)) => pairs.push((parse_point(z)?, parse_point(w)?)),
        (None, None) => {}
        _ => return Err(Error::InvalidArgument("--z and --w go together".into())),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        pairs.push((random_point(&mut rng, n), random_point(&mut rng, n)));
    }
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("give --z and --w or --random N".into()));
    }
    let mut t = Table::new(&[
        "index", "pairing_re", "pairing_im", "kernel_re", "kernel_im", "kernel_k_re", "kernel_k_im", "distance",
    ]);
    for (i, (z, w)) in pairs.iter().enumerate() {
        if z.dim() != n || w.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.dim().max(w.dim()),
            });
        }
        let pr = pairing(z, w)?;
        let kk = bergman_kernel(z, w, &KernelContext::new(n, 1)?)?;
        let kp = bergman_kernel_power(z, w, &ctx)?;
        let d = hyperbolic_distance(z, w)?;
        t.push(vec![
            i.to_string(),
            sci(pr.re),
            sci(pr.im),
            sci(kk.re),
            sci(kk.im),
            sci(kp.re),
            sci(kp.im),
            sci(d),
        ]);
    }
    Ok(t)
}

fn constant_table(n: usize, kmax: u32) -> Result<Table> {
    if kmax == 0 {
        return Err(Error::InvalidArgument("kmax must be >= 1".into()));
    }
    let quad = QuadratureConfig::fixed(64, 1e-13);
    let mut t = Table::new(&["k", "c", "stirling", "ratio", "integral_check"]);
    for k in 1..=kmax {
        let c = c_ball(n, k)?;
        let exact = c.exact().map(|v| v.to_string()).unwrap_or_else(|| sci(c.value()));
        let (st, ratio) = match c_ball_stirling(n, k) {
            Ok(s) => (sci(s), sci(c.value() / s)),
            Err(_) => (String::new(), String::new()),
        };
        let check = if n <= 2 && k <= 8 {
            sci(c_ball_integral_check(n, k, &quad)?)
        } else {
            String::new()
        };
        t.push(vec![k.to_string(), exact, st, ratio, check]);
    }
    Ok(t)
}

fn laplace_table(case: &str, lambdas: &[f64], rel_tol: f64) -> Result<Table> {
    let cases: Vec<&str> = if case == "all" {
        SHIPPED_CASES.to_vec()
    } else {
        vec![case]
    };
    let quad = QuadratureConfig::adaptive(rel_tol);
    let mut t = Table::new(&[
        "case", "lambda", "quadrature", "leading", "ratio", "min_hessian_eig", "slope",
    ]);
    for c in cases {
        let p = shipped_problem(c)?;
        let eig = min_eigenvalue(&p.hessian());
        let order = laplace_error_order(&p, lambdas, &quad)?;
        let slope = order.slope.map(sci).unwrap_or_else(|| "exact".into());
        for r in &order.rows {
            t.push(vec![
                c.to_string(),
                sci(r.lambda),
                sci(r.quadrature),
                sci(r.leading),
                sci(r.ratio),
                sci(eig),
                slope.clone(),
            ]);
        }
    }
    Ok(t)
}

fn pairing_table(
    example: &str,
    n: usize,
    alpha: f64,
    beta: Option<f64>,
    ks: &[u32],
    quad: &QuadratureConfig,
) -> Result<Table> {
    let ex = example_by_name(example, n, alpha, beta)?;
    let rows = ratio_to_law(&ex.x, &ex.y, &ex.law, ks, quad)?;
    let mut t = Table::new(&["k", "i1", "law", "ratio", "est_rel_err"]);
    t.meta("law", &ex.law.description);
    t.meta(
        "law_kind",
        match ex.law.kind {
            LawKind::Asymptotic => "asymptotic",
            LawKind::UpperBound => "upper_bound",
        },
    );
    t.meta("law_exponent", sci(ex.law.exponent));
    if ks.len() >= 2 && rows.iter().all(|r| r.i1 > 0.0) {
        let vals: Vec<f64> = rows.iter().map(|r| r.i1).collect();
        t.meta("fitted_exponent", sci(fit_power_law(ks, &vals)?.exponent));
    }
    for r in rows {
        let law = ex.law.constant.map(|c| sci(c * (r.k as f64).powf(ex.law.exponent)));
        t.push(vec![
            r.k.to_string(),
            sci(r.i1),
            law.unwrap_or_default(),
            r.ratio.map(sci).unwrap_or_default(),
            sci(r.est_rel_err),
        ]);
    }
    Ok(t)
}

fn decay_table(geometry: &str, ks: &[u32], rel_tol: f64) -> Result<Table> {
    let (x, y) = DecayConfig::load(geometry)?.build()?;
    let n = x.ambient_dim();
    let fit = separated_decay(&x, &y, n, ks, &QuadratureConfig::adaptive(rel_tol))?;
    let mut t = Table::new(&["k", "value", "ln_value"]);
    t.meta("d_eff", sci(fit.d_eff));
    t.meta("slope", sci(fit.slope));
    t.meta("bound", sci(fit.bound));
    t.meta("passes", fit.passes);
    for (k, v) in fit.values {
        t.push(vec![k.to_string(), sci(v), sci(v.ln())]);
    }
    Ok(t)
}

struct PoincareOpts {
    k: u32,
    radius: usize,
    p: BallPoint,
    j: usize,
    samples: usize,
    nodes: usize,
    exponent: u32,
    cap: usize,
}

/// Deterministic sample points spiralling out from the origin of `B^1`.
pub fn sample_points(count: usize) -> Vec<BallPoint> {
    (0..count)
        .map(|i| {
            let z = Complex64::from_polar(0.05 + 0.04 * i as f64, 2.3 * i as f64);
            BallPoint::new(vec![z]).expect("sample inside the disc")
        })
        .collect()
}

fn residual_table(cfg: &GroupConfig, o: &PoincareOpts) -> Result<Table> {
    let (spec, rep) = cfg.build()?;
    let ctx = KernelContext::for_series(spec.dim(), o.k)?;
    let half = o.radius / 2;
    let full = enumerate(&spec, &rep, o.radius, o.cap)?;
    let coarse = enumerate(&spec, &rep, half, o.cap)?;
    let mut t = Table::new(&[
        "sample", "z_re", "z_im", "generator", "residual_half_radius", "residual_radius", "decreased",
    ]);
    t.meta("elements", full.len());
    t.meta("half_radius", half);
    for (i, z) in sample_points(o.samples).iter().enumerate() {
        for (g, name) in spec.names.iter().enumerate() {
            let letter = g as i32 + 1;
            let e = full
                .elements
                .iter()
                .find(|e| e.word == [letter])
                .ok_or_else(|| Error::Precondition(format!("generator {name} coincides with another element")))?;
            let r_half = element_residual(&o.p, o.j, z, &ctx, &coarse, e)?;
            let r_full = element_residual(&o.p, o.j, z, &ctx, &full, e)?;
            t.push(vec![
                i.to_string(),
                sci(z.coords()[0].re),
                sci(z.coords()[0].im),
                name.clone(),
                sci(r_half),
                sci(r_full),
                (r_full < r_half).to_string(),
            ]);
        }
    }
    Ok(t)
}

fn reproducing_table(cfg: &GroupConfig, o: &PoincareOpts) -> Result<Table> {
    let (spec, rep) = cfg.build()?;
    let ctx = KernelContext::for_series(spec.dim(), o.k)?;
    let trunc = enumerate(&spec, &rep, o.radius, o.cap)?;
    let mut vector = vec![Complex64::new(0.0, 0.0); trunc.m];
    if o.j >= trunc.m {
        return Err(Error::InvalidArgument(format!("component {} out of range", o.j)));
    }
    vector[o.j] = Complex64::new(1.0, 0.0);
    let h = AveragedMonomial {
        exponent: o.exponent,
        vector,
    };
    let mut t = Table::new(&[
        "nodes", "pairing_re", "pairing_im", "expected_re", "expected_im", "deviation",
    ]);
    for nodes in [o.nodes, 2 * o.nodes] {
        let r = reproducing_check(&h, &o.p, o.j, &ctx, &trunc, nodes)?;
        t.push(vec![
            nodes.to_string(),
            sci(r.pairing.re),
            sci(r.pairing.im),
            sci(r.expected.re),
            sci(r.expected.im),
            sci(r.deviation),
        ]);
    }
    Ok(t)
}

fn tail_table(cfg: &GroupConfig, o: &PoincareOpts) -> Result<Table> {
    let (spec, rep) = cfg.build()?;
    let ctx = KernelContext::for_series(spec.dim(), o.k)?;
    let trunc = enumerate(&spec, &rep, o.radius, o.cap)?;
    let z = sample_points(1).remove(0);
    let partial = theta_scalar_partial_sums(&o.p, &z, &ctx, &trunc)?;
    let mut t = Table::new(&["radius", "elements", "partial_re", "partial_im", "increment"]);
    t.meta("z", format!("{},{}", sci(z.coords()[0].re), sci(z.coords()[0].im)));
    for (r, s) in partial.iter().enumerate() {
        let inc = if r == 0 { s.norm() } else { (s - partial[r - 1]).norm() };
        t.push(vec![
            r.to_string(),
            trunc.up_to(r).len().to_string(),
            sci(s.re),
            sci(s.im),
            sci(inc),
        ]);
    }
    Ok(t)
}
