//! Command-line driver: config resolution, command execution and report
//! emission.

use std::path::{Path, PathBuf};

use clap::Parser;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, ConfigError, RunConfig};
use crate::error::Result;
use crate::evolve::{fit_decay_rate, propagate};
use crate::generator::Generator;
use crate::grid::Grid;
use crate::params::{ModelParams, SystemId};
use crate::probe::{lemma_probe, summarize};
use crate::regionmap::{classify, sweep, Check, Label, SweepSpec};
use crate::report::{to_csv, to_json, write_file, Cell, SCHEMA_VERSION};
use crate::resolvent::{
    lambda_max_resolved, log_spaced, resolvent_norm, sample_seed, scan_with_band, stationary_check,
};
use crate::spectrum::{self, MAX_DENSE_DIM};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "thermobeam", version, about = "Resolvent, spectrum and energy diagnostics for damped thermoelastic beams")]
pub struct Cli {
    pub command: Command,
    /// Config file (`key = value` lines, `[command]` sections).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config system.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub system: Option<u8>,
    /// Worker threads for region sweeps.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// What a command produced, before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub assertions: Vec<Assertion>,
    /// Extra files by name.
    pub files: Vec<(&'static str, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Reads the config file and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> std::result::Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError { key: "--config".into(), message: format!("{}: {e}", path.display()) })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(k) = cli.system {
        cfg.system = SystemId::from_number(k).expect("clap restricts the range");
    }
    cfg.validate(cli.command)?;
    Ok(cfg)
}

/// Runs the parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let cfg = match resolve_config(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = match execute(&cfg, cli.command, cli.jobs) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{} failed: {e}", cli.command.name());
            return EXIT_ASSERTION;
        }
    };
    if let Err(e) = write_outputs(&cli.out, &cfg, cli.command, &outcome) {
        eprintln!("cannot write reports to {}: {e}", cli.out.display());
        return EXIT_ASSERTION;
    }
    for a in &outcome.assertions {
        println!("{} {}: {}", if a.passed { "ok  " } else { "FAIL" }, a.name, a.detail);
    }
    if outcome.passed() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}

pub fn write_outputs(dir: &Path, cfg: &RunConfig, command: Command, outcome: &Outcome) -> std::io::Result<()> {
    let report = json!({
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "passed": outcome.passed(),
        "assertions": outcome.assertions,
        "result": outcome.result,
    });
    write_file(dir, "report.json", &to_json(&report).map_err(std::io::Error::other)?)?;
    for (name, body) in &outcome.files {
        write_file(dir, name, body)?;
    }
    Ok(())
}

pub fn execute(cfg: &RunConfig, command: Command, jobs: usize) -> Result<Outcome> {
    if command == Command::RegionMap {
        return region_map(cfg, jobs);
    }
    let grid = Grid::new(cfg.n, cfg.length)?;
    let gen = Generator::assemble(&cfg.params, &grid, cfg.system)?;
    match command {
        Command::Verify => verify(cfg, &gen),
        Command::Spectrum => spectrum_cmd(&gen),
        Command::ResolventScan => resolvent_scan(cfg, &gen),
        Command::Probe => probe(cfg, &gen),
        Command::Simulate => simulate(cfg, &gen),
        Command::RegionMap => unreachable!(),
    }
}

/// `(mu1, mu2, thermal)` damping coefficients.
fn damping(p: &ModelParams<f64>, system: SystemId) -> [f64; 3] {
    [p.mu1, p.mu2, p.thermal_damping(system)]
}

fn verify(cfg: &RunConfig, gen: &Generator<f64>) -> Result<Outcome> {
    let mut dissipativity = 0.0f64;
    for k in 0..cfg.verify.states {
        let u = gen.random_state(sample_seed(cfg.seed, 0, k));
        let rate = gen.dissipation_rate(&u)?;
        let form = gen.dissipation_form(&u)?;
        dissipativity = dissipativity.max((rate + form).abs() / rate.abs().max(1.0));
    }

    let grid = gen.grid();
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut semigroup = 0.0f64;
    let mut square_root = 0.0f64;
    for _ in 0..50 {
        let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        let lhs = grid.frac_power_apply(a, &grid.frac_power_apply(b, &x)?)?;
        let rhs = grid.frac_power_apply(a + b, &x)?;
        semigroup = semigroup.max((lhs - &rhs).norm() / rhs.norm().max(x.norm()));
        let half = grid.frac_power_apply(0.5, &grid.frac_power_apply(0.5, &x)?)?;
        let full = grid.laplacian_matrix() * &x;
        square_root = square_root.max((half - &full).norm() / full.norm());
    }

    let g = gen.gram();
    let c = gen.chol();
    let cholesky = (c.transpose() * c - g).norm() / g.norm();
    let cb = c * gen.matrix();
    let similarity = (&cb - gen.energy_similar() * c).norm() / cb.norm();

    let stationary = stationary_check(gen, cfg.verify.samples, cfg.seed)?;
    let norm0 = resolvent_norm(gen, 0.0)?;

    let assertions = vec![
        Assertion::new("dissipativity", dissipativity <= 1e-9, format!("max relative residual {dissipativity:.3e}")),
        Assertion::new("fractional-semigroup", semigroup <= 1e-10, format!("max relative residual {semigroup:.3e}")),
        Assertion::new("square-root", square_root <= 1e-10, format!("max relative residual {square_root:.3e}")),
        Assertion::new("gram-cholesky", cholesky <= 1e-12, format!("relative residual {cholesky:.3e}")),
        Assertion::new("energy-similarity", similarity <= 1e-10, format!("relative residual {similarity:.3e}")),
        Assertion::new(
            "stationary",
            stationary.is_finite() && stationary <= norm0 + 1e-9,
            format!("max amplification {stationary:.6e}, resolvent norm at 0 {norm0:.6e}"),
        ),
    ];
    Ok(Outcome {
        result: json!({
            "dissipativity_residual": dissipativity,
            "fractional_semigroup_residual": semigroup,
            "square_root_residual": square_root,
            "gram_cholesky_residual": cholesky,
            "energy_similarity_residual": similarity,
            "stationary_amplification": stationary,
            "resolvent_norm_at_zero": norm0,
        }),
        assertions,
        files: Vec::new(),
    })
}

fn spectrum_cmd(gen: &Generator<f64>) -> Result<Outcome> {
    let r = spectrum::report(gen)?;
    let scale = r.eigenvalues.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let mut assertions = vec![Assertion::new(
        "abscissa-nonpositive",
        r.abscissa <= 1e-8 * scale,
        format!("abscissa {:.6e}", r.abscissa),
    )];
    if damping(gen.params(), gen.system()).iter().all(|&d| d > 0.0) {
        assertions.push(Assertion::new(
            "exponential-stability",
            r.abscissa < 0.0 && r.axis_gap > 0.0,
            format!("abscissa {:.6e}, axis gap {:.6e}", r.abscissa, r.axis_gap),
        ));
    }
    let rows = r
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, z)| vec![Cell::from(k), z.re.into(), z.im.into()])
        .collect::<Vec<_>>();
    Ok(Outcome {
        result: json!({ "abscissa": r.abscissa, "axis_gap": r.axis_gap, "count": r.eigenvalues.len() }),
        assertions,
        files: vec![("spectrum.csv", to_csv(&["index", "re", "im"], &rows))],
    })
}

/// Contract on a fitted exponent given the predicted class.
fn eta_assertion(label: Label, eta_pred: f64, fit: Option<f64>) -> Option<Assertion> {
    let detail = |f: f64| format!("fitted {f:.6}, predicted {eta_pred:.6} ({label})");
    match (label, fit) {
        (Label::StableOnly, _) => None,
        (_, None) => Some(Assertion::new("eta-fit", false, "no exponent fit in the window")),
        (Label::Analytic, Some(f)) => Some(Assertion::new("eta-analytic", f >= 0.85, detail(f))),
        (Label::Gevrey, Some(f)) => Some(Assertion::new("eta-gevrey-band", f >= eta_pred - 0.2, detail(f))),
    }
}

fn resolvent_scan(cfg: &RunConfig, gen: &Generator<f64>) -> Result<Outcome> {
    let band = lambda_max_resolved(gen)?;
    let hi = cfg.scan.lambda_max.unwrap_or(band);
    let report = scan_with_band(gen, cfg.scan.lambda_min, hi, cfg.scan.points, band)?;
    let p = gen.params();
    let class = classify(p.tau, p.sigma, p.xi, gen.system())?;
    let mut assertions = vec![Assertion::new(
        "finite-norms",
        report.norms.iter().all(|v| v.is_finite() && *v > 0.0),
        format!("{} points", report.norms.len()),
    )];
    assertions.extend(eta_assertion(class.label, class.eta_pred, report.eta_fit.map(|f| f.eta)));
    let rows = report
        .lambdas
        .iter()
        .zip(&report.norms)
        .map(|(l, v)| vec![Cell::from(*l), (*v).into(), (l * v).into()])
        .collect::<Vec<_>>();
    Ok(Outcome {
        result: json!({ "scan": report, "predicted": class.label, "eta_pred": class.eta_pred }),
        assertions,
        files: vec![("scan.csv", to_csv(&["lambda", "resolvent_norm", "lambda_times_norm"], &rows))],
    })
}

fn probe(cfg: &RunConfig, gen: &Generator<f64>) -> Result<Outcome> {
    let hi = match cfg.probe.lambda_max {
        Some(h) => h,
        None => lambda_max_resolved(gen)?,
    };
    let lambdas = log_spaced(cfg.probe.lambda_min, hi, cfg.probe.points);
    let probes = cfg.probes();
    let mut columns = Vec::new();
    let mut summaries = Vec::new();
    let mut assertions = Vec::new();
    for &id in &probes {
        let ratios = lemma_probe(gen, id, &lambdas, cfg.probe.samples, cfg.seed)?;
        let s = summarize(id, &lambdas, &ratios);
        assertions.push(Assertion::new(
            id.name(),
            s.bounded,
            format!("top-decade max {:.6e}, median {:.6e}", s.top_decade_max, s.median),
        ));
        summaries.push(s);
        columns.push(ratios);
    }
    let mut header = vec!["lambda"];
    header.extend(probes.iter().map(|p| p.name()));
    let rows = lambdas
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let mut row = vec![Cell::from(*l)];
            row.extend(columns.iter().map(|c| Cell::from(c[i])));
            row
        })
        .collect::<Vec<_>>();
    Ok(Outcome {
        result: json!({ "lambdas": lambdas, "summaries": summaries }),
        assertions,
        files: vec![("scan.csv", to_csv(&header, &rows))],
    })
}

fn simulate(cfg: &RunConfig, gen: &Generator<f64>) -> Result<Outcome> {
    let s = &cfg.simulate;
    let u0 = gen.random_state(cfg.seed);
    let traj = propagate(gen, &u0, s.t_end, s.steps, s.method)?;
    let smooth = traj.smoothness(gen)?;
    let worst_increase = traj
        .energies
        .windows(2)
        .map(|w| (w[1] - w[0]) / w[0].max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    let e0 = traj.energies[0];
    let drift = traj.energies.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max);
    let mut assertions = vec![Assertion::new(
        "energy-monotone",
        worst_increase <= 1e-9,
        format!("largest relative step increase {worst_increase:.3e}"),
    )];
    if damping(gen.params(), gen.system()).iter().all(|&d| d == 0.0) {
        assertions.push(Assertion::new("energy-conserved", drift <= 1e-9, format!("relative drift {drift:.3e}")));
    }
    let mut warnings = traj.warnings.clone();
    let rate = match fit_decay_rate(&traj, s.tail_fraction) {
        Ok(r) => Some(r),
        Err(e) => {
            warnings.push(format!("no decay fit: {e}"));
            None
        }
    };
    let abscissa = if gen.dim() <= MAX_DENSE_DIM {
        Some(spectrum::spectral_abscissa(gen)?)
    } else {
        None
    };
    let rows = traj
        .times
        .iter()
        .zip(&traj.energies)
        .zip(&smooth)
        .map(|((t, e), r)| vec![Cell::from(*t), (*e).into(), (*r).into()])
        .collect::<Vec<_>>();
    Ok(Outcome {
        result: json!({
            "method": traj.method,
            "decay_rate": rate,
            "abscissa": abscissa,
            "initial_energy": e0,
            "final_energy": traj.energies.last(),
            "warnings": warnings,
        }),
        assertions,
        files: vec![("trace.csv", to_csv(&["t", "energy", "smoothness"], &rows))],
    })
}

fn region_map(cfg: &RunConfig, jobs: usize) -> Result<Outcome> {
    let r = &cfg.region;
    let spec = SweepSpec {
        system: cfg.system,
        base: cfg.params.clone(),
        n: cfg.n,
        length: cfg.length,
        lattice: r.lattice.clone(),
        checks: r.checks.clone(),
        lambda_min: r.lambda_min,
        scan_points: r.scan_points,
        probe_points: r.probe_points,
        probe_samples: r.probe_samples,
        seed: cfg.seed,
    };
    let report = sweep(&spec, jobs)?;
    let damped = damping(&cfg.params, cfg.system).iter().all(|&d| d > 0.0);
    let mut assertions = Vec::new();
    for p in &report.points {
        let at = format!("({}, {}, {})", p.tau, p.sigma, p.xi);
        if let Some(e) = &p.error {
            assertions.push(Assertion::new("point-error", false, format!("{at}: {e}")));
            continue;
        }
        if let Some(a) = p.abscissa.filter(|_| damped) {
            assertions.push(Assertion::new("abscissa-negative", a < 0.0, format!("{at}: {a:.6e}")));
        }
        if r.checks.contains(&Check::Scan) {
            if let Some(mut a) = eta_assertion(p.predicted, p.eta_pred, p.eta_fit) {
                a.detail = format!("{at}: {}", a.detail);
                assertions.push(a);
            }
        }
        if let Some(ok) = p.probes_passed {
            assertions.push(Assertion::new("probes-bounded", ok, at));
        }
    }
    let rows = report
        .points
        .iter()
        .map(|p| {
            vec![
                Cell::from(p.tau),
                p.sigma.into(),
                p.xi.into(),
                Cell::Int(i64::from(p.system.number())),
                p.predicted.name().into(),
                p.eta_pred.into(),
                p.eta_gevrey.into(),
                p.eta_fit.into(),
                p.abscissa.into(),
                p.probes_passed.map_or(Cell::Empty, |b| Cell::from(if b { "true" } else { "false" })),
                p.error.clone().map_or(Cell::Empty, Cell::from),
            ]
        })
        .collect::<Vec<_>>();
    let header = [
        "tau", "sigma", "xi", "system", "predicted", "eta_pred", "eta_gevrey", "eta_fit", "abscissa", "probes_passed", "error",
    ];
    Ok(Outcome {
        result: json!({ "points": report.points }),
        assertions,
        files: vec![("region.csv", to_csv(&header, &rows))],
    })
}
