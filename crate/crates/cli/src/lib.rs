//! Experiment runner for the QID simulator.
//!
//! Every experiment returns an [`Outcome`]: a table of rows, a summary, and the
//! list of checks that failed. Output is deterministic for a given
//! configuration; numbers are printed with 17 significant digits.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use qid_core::cv::gaussian::{coherent_cloner, GaussianState, SqueezingParam};
use qid_core::cv::kernel::{cross_weight, kernel_norm, kernel_norm_exact, Kernel, KernelTriple};
use qid_core::cv::wavefunction::{distributor_fidelities, Wavefunction};
use qid_core::cv::wigner::{output_wigner_terms, GridSpec, WignerGrid, DEFAULT_GRID_POINTS};
use qid_core::format::{sci, Sci};
use qid_core::network::{
    clone_fidelity, clone_scaling, covariance_check, distribute, predicted_outputs, solve_beta, ProgramState,
};
use qid_core::qudit::fidelity;
use qid_core::random::{haar_state, seeded_rng};
use qid_core::{Dim, PureState};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "QID_OUTPUT_DIR";

/// Tolerances of the built-in checks.
pub const PIPELINE_TOL: f64 = 1e-10;
pub const COVARIANCE_TOL: f64 = 1e-8;
pub const KERNEL_NORM_TOL: f64 = 1e-6;
pub const GRID_NORM_TOL: f64 = 1e-4;
pub const CLONER_TOL: f64 = 1e-9;

/// Stated coherent-cloner fidelities.
pub const COHERENT_CLONE_FIDELITY: f64 = 2.0 / 3.0;
pub const COHERENT_ANTICLONE_FIDELITY: f64 = 1.0 / 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => bail!("unknown format {other:?} (expected csv or json)"),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Input state for the discrete distributor.
#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    Random(u64),
    Amplitudes(Vec<Complex64>),
}

impl std::str::FromStr for InputSpec {
    type Err = anyhow::Error;

    /// `random:<seed>` or a comma-separated amplitude list; complex entries
    /// are written `re:im`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(seed) = s.strip_prefix("random:") {
            let seed = seed.parse().with_context(|| format!("bad seed in input spec {s:?}"))?;
            return Ok(InputSpec::Random(seed));
        }
        let amps = s.split(',').map(parse_complex).collect::<Result<Vec<_>>>()?;
        if amps.len() < 2 {
            bail!("input spec {s:?} must be random:<seed> or at least two amplitudes");
        }
        Ok(InputSpec::Amplitudes(amps))
    }
}

impl std::fmt::Display for InputSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputSpec::Random(seed) => write!(f, "random:{seed}"),
            InputSpec::Amplitudes(a) => {
                let parts: Vec<String> = a.iter().map(|c| format!("{}:{}", sci(c.re), sci(c.im))).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

/// Parses `re:im`, or a bare real number.
pub fn parse_complex(entry: &str) -> Result<Complex64> {
    let entry = entry.trim();
    let parse = |v: &str| v.trim().parse::<f64>().with_context(|| format!("bad number {entry:?}"));
    match entry.split_once(':') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(entry)?, 0.0)),
    }
}

/// Parses `A:B` into an inclusive range.
pub fn parse_dim_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("dim range {s:?} must look like A:B"))?;
    let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
    if a < 2 || b < a {
        bail!("dim range {s:?} must satisfy 2 <= A <= B");
    }
    Ok((a, b))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Clone { dims: (usize, usize) },
    Distribute { dim: usize, alpha: f64, input: InputSpec },
    Covariance { dim: usize, trials: usize },
    Cv { xi: Vec<f64>, alpha: Option<f64>, grid: usize },
    CoherentClone { displacements: Vec<Complex64> },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Clone { .. } => "clone",
            Experiment::Distribute { .. } => "distribute",
            Experiment::Covariance { .. } => "covariance",
            Experiment::Cv { .. } => "cv",
            Experiment::CoherentClone { .. } => "coherent-clone",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    /// Explicit `out`, else `$QID_OUTPUT_DIR/<command>.<ext>`, else stdout.
    pub fn destination(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV)
                .map(|dir| PathBuf::from(dir).join(format!("{}.{}", self.experiment.name(), self.format.extension())))
        })
    }
}

/// One table or summary value.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => sci(*v),
            Cell::Num(_) => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) => Sci(*v).serialize(s),
            Cell::Int(v) => v.serialize(s),
            Cell::Text(v) => v.serialize(s),
            Cell::Flag(v) => v.serialize(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

/// Result of one experiment.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(&'static str, Cell)>,
    pub config: Vec<(&'static str, Cell)>,
    pub failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(message());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Summary value by key.
    pub fn value(&self, key: &str) -> Option<&Cell> {
        self.summary.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    /// Column of the table by name.
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn write<W: Write>(&self, command: &str, seed: u64, format: Format, mut writer: W) -> Result<()> {
        match format {
            Format::Csv => {
                let mut lines = Vec::new();
                if self.rows.is_empty() {
                    lines.push("key,value".to_string());
                    for (k, v) in &self.summary {
                        lines.push(format!("{k},{}", v.csv()));
                    }
                } else {
                    lines.push(self.columns.join(","));
                    for row in &self.rows {
                        lines.push(row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                    }
                }
                for line in lines {
                    writeln!(writer, "{line}")?;
                }
            }
            Format::Json => {
                #[derive(Serialize)]
                struct Doc<'a> {
                    schema_version: u32,
                    command: &'a str,
                    seed: u64,
                    config: BTreeMap<&'a str, &'a Cell>,
                    summary: BTreeMap<&'a str, &'a Cell>,
                    rows: Vec<BTreeMap<&'a str, &'a Cell>>,
                    passed: bool,
                    failures: &'a [String],
                }
                let doc = Doc {
                    schema_version: SCHEMA_VERSION,
                    command,
                    seed,
                    config: self.config.iter().map(|(k, v)| (*k, v)).collect(),
                    summary: self.summary.iter().map(|(k, v)| (*k, v)).collect(),
                    rows: self.rows.iter().map(|r| self.columns.iter().copied().zip(r).collect()).collect(),
                    passed: self.passed(),
                    failures: &self.failures,
                };
                serde_json::to_writer_pretty(&mut writer, &doc)?;
                writeln!(writer)?;
            }
        }
        Ok(())
    }
}

/// Runs the configured experiment.
pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    match &config.experiment {
        Experiment::Clone { dims } => cmd_clone(*dims, config.seed),
        Experiment::Distribute { dim, alpha, input } => cmd_distribute(*dim, *alpha, input),
        Experiment::Covariance { dim, trials } => cmd_covariance(*dim, *trials, config.seed),
        Experiment::Cv { xi, alpha, grid } => cmd_cv(xi, *alpha, *grid),
        Experiment::CoherentClone { displacements } => cmd_coherent_clone(displacements),
    }
}

/// Runs and writes the experiment; returns whether every check passed.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let outcome = run(config)?;
    let command = config.experiment.name();
    match config.destination() {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            let file = std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let mut writer = std::io::BufWriter::new(file);
            outcome.write(command, config.seed, config.format, &mut writer)?;
            writer.flush()?;
        }
        None => outcome.write(command, config.seed, config.format, std::io::stdout().lock())?,
    }
    Ok(outcome)
}

fn dim(n: usize) -> Result<Dim> {
    Ok(Dim::new(n)?)
}

/// Scaling factor and fidelity of the symmetric cloner per dimension, closed
/// form next to full simulation.
pub fn cmd_clone(dims: (usize, usize), seed: u64) -> Result<Outcome> {
    let mut out = Outcome {
        columns: vec!["N", "s_closed", "s_simulated", "F_closed", "F_simulated", "deviation"],
        config: vec![("dim_range", Cell::Text(format!("{}:{}", dims.0, dims.1)))],
        ..Default::default()
    };
    let mut rng = seeded_rng(seed);
    let mut previous = f64::INFINITY;
    for n in dims.0..=dims.1 {
        let d = dim(n)?;
        let (s, f) = (clone_scaling(d), clone_fidelity(d));
        let simulated = if d.check_simulation_cap().is_ok() {
            let psi = haar_state(&[d], &mut rng)?;
            let output = distribute(&psi, &ProgramState::cloner(d)?)?;
            let f1 = fidelity(output.rho1(), &psi)?;
            let f2 = fidelity(output.rho2(), &psi)?;
            let nf = n as f64;
            let s_sim = (f1 - 1.0 / nf) / (1.0 - 1.0 / nf);
            out.check((f1 - f2).abs() < PIPELINE_TOL, || format!("N={n}: clones differ ({f1} vs {f2})"));
            Some((s_sim, f1))
        } else {
            None
        };
        let (s_sim, f_sim) = simulated.unwrap_or((f64::NAN, f64::NAN));
        let deviation = if simulated.is_some() { (s_sim - s).abs().max((f_sim - f).abs()) } else { f64::NAN };
        if simulated.is_some() {
            out.check(deviation < PIPELINE_TOL, || format!("N={n}: simulation deviates by {deviation:e}"));
        }
        out.check(f < previous, || format!("N={n}: fidelity not decreasing"));
        previous = f;
        out.rows.push(vec![n.into(), s.into(), s_sim.into(), f.into(), f_sim.into(), deviation.into()]);
    }
    out.summary.push(("limit_fidelity", 0.5.into()));
    Ok(out)
}

fn input_state(d: Dim, spec: &InputSpec) -> Result<PureState> {
    match spec {
        InputSpec::Random(seed) => Ok(haar_state(&[d], &mut seeded_rng(*seed))?),
        InputSpec::Amplitudes(a) => {
            if a.len() != d.get() {
                bail!("input has {} amplitudes but the dimension is {}", a.len(), d.get());
            }
            Ok(PureState::normalized(vec![d], a.clone())?)
        }
    }
}

/// Full simulation of the distributor against the closed-form outputs.
pub fn cmd_distribute(n: usize, alpha: f64, input: &InputSpec) -> Result<Outcome> {
    let d = dim(n)?;
    let beta = solve_beta(d, alpha)?;
    let psi = input_state(d, input)?;
    let conj = PureState::new(vec![d], psi.amplitudes().iter().map(|a| a.conj()).collect())?;
    let program = ProgramState::two_parameter(d, alpha, beta)?;
    let simulated = distribute(&psi, &program)?;
    let predicted = predicted_outputs(d, alpha, beta, &psi)?;

    let nf = n as f64;
    let f1 = fidelity(simulated.rho1(), &psi)?;
    let f2 = fidelity(simulated.rho2(), &psi)?;
    let f3 = fidelity(simulated.rho3(), &conj)?;
    let f1_pred = 1.0 - beta * beta * (1.0 - 1.0 / nf);
    let f2_pred = 1.0 - alpha * alpha * (1.0 - 1.0 / nf);
    let f3_pred = 2.0 * alpha * beta / nf + (nf - 2.0 * alpha * beta) / (nf * nf);
    let deviation = simulated.max_deviation(&predicted);

    let mut out = Outcome {
        config: vec![("dim", n.into()), ("alpha", alpha.into()), ("input", Cell::Text(input.to_string()))],
        ..Default::default()
    };
    out.summary = vec![
        ("alpha", alpha.into()),
        ("beta", beta.into()),
        ("rho1_fidelity", f1.into()),
        ("rho2_fidelity", f2.into()),
        ("rho3_transpose_fidelity", f3.into()),
        ("rho1_fidelity_predicted", f1_pred.into()),
        ("rho2_fidelity_predicted", f2_pred.into()),
        ("rho3_transpose_fidelity_predicted", f3_pred.into()),
        ("max_density_deviation", deviation.into()),
    ];
    out.check(deviation < PIPELINE_TOL, || format!("outputs deviate from the closed form by {deviation:e}"));
    for (name, got, want) in [("rho1", f1, f1_pred), ("rho2", f2, f2_pred), ("rho3", f3, f3_pred)] {
        out.check((got - want).abs() < PIPELINE_TOL, || format!("{name} fidelity {got} differs from {want}"));
    }
    Ok(out)
}

/// Covariance under all `N²` shifts for random inputs and programs.
pub fn cmd_covariance(n: usize, trials: usize, seed: u64) -> Result<Outcome> {
    if trials == 0 {
        bail!("trials must be at least 1");
    }
    let d = dim(n)?;
    let mut rng = seeded_rng(seed);
    let mut out = Outcome {
        columns: vec!["trial", "alpha", "beta", "max_deviation", "max_fidelity_delta"],
        config: vec![("dim", n.into()), ("trials", trials.into())],
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let alpha: f64 = rand::Rng::random_range(&mut rng, 0.0..=1.0);
        let beta = solve_beta(d, alpha)?;
        let program = ProgramState::two_parameter(d, alpha, beta)?;
        let psi = haar_state(&[d], &mut rng)?;
        let (mut dev, mut fid) = (0.0f64, 0.0f64);
        for sn in 0..n as i64 {
            for sm in 0..n as i64 {
                let report = covariance_check(&psi, &program, sn, sm)?;
                dev = dev.max(report.max_deviation);
                fid = report.fidelity_deltas.iter().copied().fold(fid, f64::max);
            }
        }
        worst = worst.max(dev);
        out.rows.push(vec![trial.into(), alpha.into(), beta.into(), dev.into(), fid.into()]);
    }
    out.summary.push(("max_deviation", worst.into()));
    out.check(worst <= COVARIANCE_TOL, || format!("covariance deviation {worst:e} exceeds {COVARIANCE_TOL:e}"));
    Ok(out)
}

/// One row of the continuous-variable scan.
#[derive(Clone, Debug, PartialEq)]
pub struct CvRow {
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub norm_residuals: [f64; 3],
    pub k3_norm: f64,
    pub grid_normalization: f64,
    pub f1_grid: f64,
    pub noise_term: f64,
    pub f1_asymptotic: f64,
    pub exact: [f64; 3],
    pub method: &'static str,
}

/// Kernel normalizations and output fidelities for a vacuum input.
pub fn cv_row(xi_value: f64, alpha: Option<f64>, grid: usize) -> Result<CvRow> {
    let xi = SqueezingParam::new(xi_value)?;
    let triple = match alpha {
        Some(a) => KernelTriple::from_alpha(xi, a)?,
        None => KernelTriple::symmetric(xi),
    };
    let norm_residuals = Kernel::ALL.map(|k| kernel_norm(k, xi) - kernel_norm_exact(k, xi));
    let vacuum = GaussianState::vacuum(1);
    let c = (2.0 * xi_value).cosh();

    // Large-squeezing closed form: retain and cross kernels act as weighted deltas.
    let noise_overlap = 1.0 / (1.0 + c);
    let f1_asymptotic = triple.coefficient(Kernel::Retain)
        + triple.coefficient(Kernel::Noise) * noise_overlap
        + triple.coefficient(Kernel::Cross) * cross_weight(xi);

    let (f1_grid, noise_term, grid_normalization, method) = if xi.within_grid_range() {
        let spec = GridSpec::covering((0.5 + c).sqrt(), grid)?;
        let input = WignerGrid::from_gaussian(&vacuum, spec)?;
        let terms = output_wigner_terms(&input, &triple)?;
        let total = terms.total()?;
        let parts = terms.fidelity_terms(&input)?;
        (parts.iter().sum(), parts[1], total.normalization(), "grid")
    } else {
        (f64::NAN, triple.coefficient(Kernel::Noise) * noise_overlap, f64::NAN, "asymptotic")
    };
    let exact = distributor_fidelities(
        &Wavefunction::coherent(Complex64::new(0.0, 0.0)),
        &Wavefunction::distributor_program(&triple),
    )?;
    Ok(CvRow {
        xi: xi_value,
        alpha: triple.alpha(),
        beta: triple.beta(),
        norm_residuals,
        k3_norm: kernel_norm(Kernel::Cross, xi),
        grid_normalization,
        f1_grid,
        noise_term,
        f1_asymptotic,
        exact,
        method,
    })
}

pub fn cmd_cv(xi: &[f64], alpha: Option<f64>, grid: usize) -> Result<Outcome> {
    if xi.is_empty() {
        bail!("at least one squeezing value is required");
    }
    if grid < 16 {
        bail!("grid must have at least 16 points per axis");
    }
    let mut out = Outcome {
        columns: vec![
            "xi",
            "nbar",
            "alpha",
            "beta",
            "k1_norm_residual",
            "k2_norm_residual",
            "k3_norm",
            "k3_norm_residual",
            "grid_normalization",
            "f1_grid",
            "f1_asymptotic",
            "f1_exact",
            "f2_exact",
            "f3_exact",
            "noise_term",
            "method",
        ],
        config: vec![
            ("xi", Cell::Text(xi.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(";"))),
            ("alpha", alpha.map_or(Cell::Text("symmetric".into()), Cell::Num)),
            ("grid", grid.into()),
            ("input", "vacuum".into()),
        ],
        ..Default::default()
    };
    for &v in xi {
        let row = cv_row(v, alpha, grid)?;
        for (k, r) in Kernel::ALL.iter().zip(row.norm_residuals) {
            out.check(r.abs() < KERNEL_NORM_TOL, || format!("ξ={v}: K{} normalization off by {r:e}", k.index()));
        }
        if row.method == "grid" {
            let g = row.grid_normalization;
            out.check((g - 1.0).abs() < GRID_NORM_TOL, || format!("ξ={v}: output normalization {g}"));
        }
        let nbar = SqueezingParam::new(v)?.nbar();
        out.rows.push(vec![
            v.into(),
            nbar.into(),
            row.alpha.into(),
            row.beta.into(),
            row.norm_residuals[0].into(),
            row.norm_residuals[1].into(),
            row.k3_norm.into(),
            row.norm_residuals[2].into(),
            row.grid_normalization.into(),
            row.f1_grid.into(),
            row.f1_asymptotic.into(),
            row.exact[0].into(),
            row.exact[1].into(),
            row.exact[2].into(),
            row.noise_term.into(),
            row.method.into(),
        ]);
    }
    Ok(out)
}

/// Gaussian coherent-state cloner across input displacements.
pub fn cmd_coherent_clone(displacements: &[Complex64]) -> Result<Outcome> {
    if displacements.is_empty() {
        bail!("at least one displacement is required");
    }
    let mut out = Outcome {
        columns: vec![
            "z_re",
            "z_im",
            "clone1_fidelity",
            "clone2_fidelity",
            "anticlone_fidelity",
            "anticlone_fidelity_wavefunction",
            "out3_mean_x",
            "out3_mean_p",
            "out3_var_x",
            "out3_var_p",
        ],
        config: vec![(
            "displacements",
            Cell::Text(displacements.iter().map(|z| format!("{}:{}", sci(z.re), sci(z.im))).collect::<Vec<_>>().join(";")),
        )],
        ..Default::default()
    };
    let mut results = Vec::new();
    for &z in displacements {
        let input = GaussianState::coherent(z);
        let cloned = coherent_cloner(&input)?;
        let [c1, c2] = cloned.clone_fidelities(&input)?;
        let anti = cloned.anticlone_fidelity(&input)?;
        let dual = distributor_fidelities(&Wavefunction::coherent(z), &Wavefunction::coherent_cloner_program())?;
        out.check((dual[0] - c1).abs() < CLONER_TOL && (dual[2] - anti).abs() < CLONER_TOL, || {
            format!("z={z}: covariance and wavefunction routes disagree")
        });
        let third = &cloned.outputs[2];
        out.rows.push(vec![
            z.re.into(),
            z.im.into(),
            c1.into(),
            c2.into(),
            anti.into(),
            dual[2].into(),
            third.mean()[0].into(),
            third.mean()[1].into(),
            third.cov()[(0, 0)].into(),
            third.cov()[(1, 1)].into(),
        ]);
        results.push((z, c1, c2, anti, cloned));
    }
    let (_, c1, _, anti, first) = &results[0];
    for (z, a, b, c, _) in &results {
        out.check((a - COHERENT_CLONE_FIDELITY).abs() < CLONER_TOL && (b - COHERENT_CLONE_FIDELITY).abs() < CLONER_TOL, || {
            format!("z={z}: clone fidelities {a}, {b} differ from 2/3")
        });
        out.check((c - COHERENT_ANTICLONE_FIDELITY).abs() < CLONER_TOL, || {
            format!("z={z}: anticlone fidelity {c} differs from 1/8")
        });
        out.check((a - c1).abs() < CLONER_TOL && (c - anti).abs() < CLONER_TOL, || {
            format!("z={z}: fidelities depend on the displacement")
        });
    }
    out.summary.push(("clone_fidelity", (*c1).into()));
    out.summary.push(("anticlone_fidelity", (*anti).into()));
    for (i, o) in first.outputs.iter().enumerate() {
        let key = ["output1_covariance", "output2_covariance", "output3_covariance"][i];
        let c = o.cov();
        out.summary.push((key, Cell::Text(format!("{},{},{}", sci(c[(0, 0)]), sci(c[(0, 1)]), sci(c[(1, 1)])))));
    }
    Ok(out)
}

/// Default scan values for the `cv` command.
pub const DEFAULT_XI: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 3.0, 4.0];

/// Default grid size for the `cv` command.
pub const DEFAULT_GRID: usize = DEFAULT_GRID_POINTS;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_spec_parsing() {
        assert_eq!("random:42".parse::<InputSpec>().unwrap(), InputSpec::Random(42));
        let parsed: InputSpec = "0.6, 0:0.8".parse().unwrap();
        assert_eq!(parsed, InputSpec::Amplitudes(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]));
        assert!("random:x".parse::<InputSpec>().is_err());
        assert!("1.0".parse::<InputSpec>().is_err());
        assert!("a,b".parse::<InputSpec>().is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_dim_range("2:16").unwrap(), (2, 16));
        assert!(parse_dim_range("1:4").is_err());
        assert!(parse_dim_range("5:3").is_err());
        assert!(parse_dim_range("5").is_err());
        assert_eq!(parse_complex(" 1.5:-2").unwrap(), Complex64::new(1.5, -2.0));
        assert!(parse_complex("1:x").is_err());
    }

    #[test]
    fn clone_rows() {
        let out = cmd_clone((2, 3), 1).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert_eq!(out.rows[0][3], Cell::Num(5.0 / 6.0));
        assert_eq!(out.rows[1][1], Cell::Num(0.625));
        assert_eq!(out.rows[1][3], Cell::Num(0.75));
    }

    #[test]
    fn distribute_endpoints() {
        let one = cmd_distribute(3, 1.0, &InputSpec::Random(3)).unwrap();
        assert!(one.passed());
        let Some(Cell::Num(f1)) = one.value("rho1_fidelity") else { panic!() };
        assert!((f1 - 1.0).abs() < 1e-12);
        let zero = cmd_distribute(3, 0.0, &InputSpec::Random(3)).unwrap();
        let Some(Cell::Num(f2)) = zero.value("rho2_fidelity") else { panic!() };
        assert!((f2 - 1.0).abs() < 1e-12);
        let sym = cmd_distribute(2, (1.0f64 / 3.0).sqrt(), &InputSpec::Random(9)).unwrap();
        for key in ["rho1_fidelity", "rho2_fidelity"] {
            let Some(Cell::Num(f)) = sym.value(key) else { panic!() };
            assert!((f - 5.0 / 6.0).abs() < 1e-10);
        }
        assert!(cmd_distribute(3, 0.5, &InputSpec::Amplitudes(vec![Complex64::new(1.0, 0.0); 2])).is_err());
    }

    #[test]
    fn covariance_small() {
        let out = cmd_covariance(2, 3, 5).unwrap();
        assert!(out.passed());
        assert!(cmd_covariance(2, 0, 5).is_err());
    }

    #[test]
    fn csv_writer_blanks_missing_values() {
        let out = Outcome {
            columns: vec!["a", "b"],
            rows: vec![vec![Cell::Num(0.5), Cell::Num(f64::NAN)]],
            ..Default::default()
        };
        let mut buf = Vec::new();
        out.write("x", 0, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n5.0000000000000000e-1,\n");
    }
}
