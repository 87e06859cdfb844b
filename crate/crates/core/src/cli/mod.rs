//! Batch command-line surface. Precedence: flags, then the `--config` file,
//! then built-in defaults.

pub mod config;
pub mod specfile;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::cantor::{CantorSet, CantorSpec};
use crate::decomposition::{decompose, product_decompose, ProductDecomposition};
use crate::density::{l2_trajectory, pushforward_histogram, pushforward_refined, weight_constant, CSV_HEADER};
use crate::error::{Error, Result};
use crate::lab::{box_dimension, dyadic_scales, lemma_suite, product_regularity, ScalingFit, Status, SuiteConfig};
use crate::output::fmt_float;
use crate::projection::{bucket_profile, energy, good_angles, measured_c3, Angle, EnergyOptions, EnergyReport};
use config::{FileConfig, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "cantorproj", version, about = "Projections of products of regular Cantor sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Check the spec(s) and print basic invariants.
    Validate,
    /// Solve for the Hausdorff dimension.
    Dimension,
    /// Write the product decomposition at every ladder scale.
    Decompose,
    /// Projection profile at a single angle along the ladder.
    Project,
    /// N(θ) and good-angle verdicts over the angle grid.
    Scan,
    /// Energy at every ladder scale with the scaling fit.
    Energy,
    /// L² trajectory of the projected density at one angle.
    Density,
    /// Full verification suite.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Dimension => "dimension",
            Command::Decompose => "decompose",
            Command::Project => "project",
            Command::Scan => "scan",
            Command::Energy => "energy",
            Command::Density => "density",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Spec file or `builtin:<name>`.
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Second factor (defaults to the first).
    #[arg(long, global = true)]
    spec2: Option<String>,
    /// Coarsest scale; accepts `a/b`.
    #[arg(long, global = true)]
    rho0: Option<String>,
    /// Ladder ratio in (0, 1); accepts `a/b`.
    #[arg(long, global = true)]
    factor: Option<String>,
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Angle in radians for `project` and `density`; accepts `a/b`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long, global = true)]
    grid: Option<usize>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    max_squares: Option<usize>,
    /// Largest n² for exact energy sums.
    #[arg(long, global = true)]
    pair_cap: Option<u64>,
    /// Sampled pairs when the energy is estimated.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Quadrature cells for the energy cross-check.
    #[arg(long, global = true)]
    quadrature: Option<usize>,
    /// Skip the quadrature above this many squares.
    #[arg(long, global = true)]
    quadrature_max_squares: Option<usize>,
    /// Final ladder steps an angle must stay good at.
    #[arg(long, global = true)]
    tail: Option<usize>,
    /// `density`: also histogram a decomposition this many times finer on
    /// each step's grid.
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// `density`: write the per-bucket histograms.
    #[arg(long, global = true)]
    dump: bool,
}

fn number(s: &str) -> Result<f64> {
    specfile::parse_rational(s).map_err(|_| Error::Config(format!("cannot parse number {s:?}")))
}

fn resolve(flags: &Flags) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    if let Some(path) = &flags.config {
        c.apply_file(FileConfig::load(path)?)?;
    }
    macro_rules! set {
        ($($field:ident),*) => {$( if let Some(v) = flags.$field.clone() { c.$field = v; } )*};
    }
    macro_rules! set_num {
        ($($field:ident),*) => {$( if let Some(v) = &flags.$field { c.$field = number(v)?; } )*};
    }
    set!(
        spec,
        steps,
        grid,
        seed,
        out,
        max_squares,
        pair_cap,
        samples,
        quadrature,
        quadrature_max_squares,
        tail,
        refine
    );
    set_num!(rho0, factor, theta, epsilon);
    if flags.spec2.is_some() {
        c.spec2 = flags.spec2.clone();
    }
    if flags.jobs.is_some() {
        c.jobs = flags.jobs;
    }
    c.validate()?;
    Ok(c)
}

/// Parses `argv`, runs the command and returns the process exit status:
/// 0 on success, 1 on invalid input, 2 on an exceeded budget, 3 when
/// `verify` reports a failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = resolve(&cli.flags).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| Session::open(cfg, cli.command, cli.flags.dump)?.dispatch())
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_budget() {
                2
            } else {
                1
            }
        }
    }
}

struct Session {
    cfg: RunConfig,
    command: Command,
    k1: CantorSet,
    k2: CantorSet,
    meta: String,
    dump: bool,
}

impl Session {
    fn open(cfg: RunConfig, command: Command, dump: bool) -> Result<Self> {
        let s1 = specfile::load_spec(&cfg.spec)?;
        let s2 = match &cfg.spec2 {
            Some(src) => specfile::load_spec(src)?,
            None => s1.clone(),
        };
        let meta = format!("cantorproj {VERSION} config={} command={}", cfg.hash(&[&s1, &s2]), command.name());
        Ok(Session { k1: CantorSet::new(s1)?, k2: CantorSet::new(s2)?, cfg, command, meta, dump })
    }

    fn dispatch(&self) -> Result<i32> {
        match self.command {
            Command::Validate => self.validate(),
            Command::Dimension => self.dimension(),
            Command::Decompose => self.decompose(),
            Command::Project => self.project(),
            Command::Scan => self.scan(),
            Command::Energy => self.energy(),
            Command::Density => self.density(),
            Command::Verify => self.verify(),
        }
    }

    fn ladder(&self) -> Result<Vec<ProductDecomposition>> {
        self.cfg
            .ladder()
            .into_iter()
            .map(|rho| product_decompose(&self.k1, &self.k2, rho, self.cfg.max_squares))
            .collect()
    }

    fn factors(&self) -> Vec<(&str, &CantorSet)> {
        match self.cfg.spec2 {
            Some(_) => vec![("K1", &self.k1), ("K2", &self.k2)],
            None => vec![("K", &self.k1)],
        }
    }

    fn angle(&self) -> Result<Angle> {
        Angle::new(self.cfg.theta)
    }

    /// Opens `<out>/<name>` and writes the metadata line and column header.
    fn csv(&self, name: &str, header: &str) -> Result<BufWriter<File>> {
        let mut w = self.create(name)?;
        writeln!(w, "# {}", self.meta)?;
        writeln!(w, "{header}")?;
        Ok(w)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        std::fs::create_dir_all(&self.cfg.out)?;
        Ok(BufWriter::new(File::create(self.cfg.out.join(name))?))
    }

    fn validate(&self) -> Result<i32> {
        for (label, set) in self.factors() {
            let spec: &CantorSpec = set.spec();
            print!("{label}: {} symbols, lambda = {:.6}", spec.symbols(), set.lambda());
            if set.is_affine() {
                println!(", affine, d = {:.10}", set.dimension()?.d);
            } else {
                println!(", nonlinear");
            }
        }
        for (label, set) in self.factors() {
            let dec = decompose(set, self.cfg.rho0, self.cfg.max_squares)?;
            println!("{label}: rho0 = {:.6e} gives {} pieces", dec.rho, dec.len());
        }
        println!("ok");
        Ok(0)
    }

    fn dimension(&self) -> Result<i32> {
        for (label, set) in self.factors() {
            if set.is_affine() {
                let dim = set.dimension()?;
                let fit = box_dimension(set, &dyadic_scales(4, 16))?;
                println!(
                    "{label}: d = {:.10}  residual = {:.3e}  box-count slope = {:.6}",
                    dim.d, dim.residual, fit.slope
                );
            } else {
                let fit = box_dimension(set, &dyadic_scales(12, 18))?;
                println!(
                    "{label}: nonlinear spec, box-count slope = {:.6} (r² = {:.6}) over rho = 2^-12..2^-18",
                    fit.slope, fit.r_squared
                );
            }
        }
        Ok(0)
    }

    fn decompose(&self) -> Result<i32> {
        for (i, pd) in self.ladder()?.iter().enumerate() {
            let name = format!("decomposition_{i}.csv");
            let mut w = self.create(&name)?;
            pd.write_csv(&mut w, &self.meta)?;
            w.flush()?;
            println!(
                "rho = {:.6e}: {} x {} = {} squares, weight {:.12} -> {name}",
                pd.rho,
                pd.x.len(),
                pd.y.len(),
                pd.len(),
                pd.total_weight()
            );
        }
        Ok(0)
    }

    fn project(&self) -> Result<i32> {
        let angle = self.angle()?;
        let mut w = self.csv(
            "profile.csv",
            "theta,rho,squares,N,sum_s2,occupied,cs_ratio,lower_bound,bucket_estimate,cover_measure",
        )?;
        for pd in self.ladder()? {
            let p = bucket_profile(&pd, angle)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                fmt_float(angle.radians()),
                fmt_float(p.rho),
                p.squares,
                p.pair_count,
                p.sum_s2,
                p.occupied,
                fmt_float(p.cs_ratio),
                fmt_float(p.measure_lower_bound),
                fmt_float(p.bucket_estimate),
                fmt_float(p.cover_measure)
            )?;
            println!(
                "rho = {:.6e}: N = {}, sum s^2 = {}, occupied = {}, cover = {:.10}, lower bound = {:.6e}",
                p.rho, p.pair_count, p.sum_s2, p.occupied, p.cover_measure, p.measure_lower_bound
            );
        }
        w.flush()?;
        Ok(0)
    }

    fn energy_options(&self, quadrature: bool) -> EnergyOptions {
        EnergyOptions {
            pair_cap: u128::from(self.cfg.pair_cap),
            samples: self.cfg.samples,
            seed: self.cfg.seed,
            quadrature_points: if quadrature { self.cfg.quadrature } else { 0 },
        }
    }

    fn energies(&self, ladder: &[ProductDecomposition], quadrature: bool) -> Vec<EnergyReport> {
        ladder
            .iter()
            .map(|pd| energy(pd, &self.energy_options(quadrature && pd.len() <= self.cfg.quadrature_max_squares)))
            .collect()
    }

    fn scan(&self) -> Result<i32> {
        let ladder = self.ladder()?;
        let d = ladder[0].d;
        let c3 = measured_c3(&self.energies(&ladder, false), d);
        let good = good_angles(&ladder, c3, self.cfg.epsilon, self.cfg.grid, self.cfg.tail);
        let mut w = self.csv("scan.csv", "theta,rho,N,threshold,good,persistent")?;
        for v in &good.per_rho {
            for (k, angle) in good.grid.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt_float(angle.radians()),
                    fmt_float(v.rho),
                    v.counts[k],
                    fmt_float(v.threshold),
                    u8::from(v.good[k]),
                    u8::from(good.persistent[k])
                )?;
            }
            println!("rho = {:.6e}: threshold = {:.6e}, bad-angle measure = {:.6}", v.rho, v.threshold, v.bad_measure);
        }
        w.flush()?;
        println!(
            "c3 = {:.6}, epsilon = {}: {} of {} grid angles good at the last {} steps",
            c3,
            self.cfg.epsilon,
            good.persistent_angles().len(),
            good.grid.len(),
            good.tail
        );
        Ok(0)
    }

    fn energy(&self) -> Result<i32> {
        let ladder = self.ladder()?;
        let d = ladder[0].d;
        let reports = self.energies(&ladder, true);
        let mut w = self.csv("energy.csv", "rho,squares,E,E_quadrature,exact,slope_to_date")?;
        let mut a = self.csv("annuli.csv", "rho,s,lo,hi,pairs,energy")?;
        for (i, e) in reports.iter().enumerate() {
            let slope = if i == 0 { f64::NAN } else { fit(&reports[..=i]).slope };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_float(e.rho),
                e.squares,
                fmt_float(e.energy),
                fmt_float(e.quadrature.unwrap_or(f64::NAN)),
                u8::from(e.exact),
                fmt_float(slope)
            )?;
            for an in &e.annuli {
                writeln!(
                    a,
                    "{},{},{},{},{},{}",
                    fmt_float(e.rho),
                    an.s,
                    fmt_float(an.lo),
                    fmt_float(an.hi),
                    fmt_float(an.pairs),
                    fmt_float(an.energy)
                )?;
            }
            let quad = match e.quadrature_rel_err {
                Some(err) => format!(", quadrature rel. err {err:.2e}"),
                None => String::new(),
            };
            println!(
                "rho = {:.6e}: {} squares, E = {:.10e} ({}){quad}",
                e.rho,
                e.squares,
                e.energy,
                if e.exact { "exact" } else { "subsampled" }
            );
        }
        w.flush()?;
        a.flush()?;
        if reports.len() >= 2 {
            let f = fit(&reports);
            println!(
                "slope of log E vs log rho = {:.6} (1 - 2d = {:.6}), r² = {:.6}",
                f.slope,
                1.0 - 2.0 * d,
                f.r_squared
            );
        }
        Ok(0)
    }

    fn density(&self) -> Result<i32> {
        let angle = self.angle()?;
        let ladder = self.ladder()?;
        let regularity = product_regularity(&self.k1, &self.k2, 64, self.cfg.seed, &dyadic_scales(1, 12))?;
        let c1 = ladder.iter().map(weight_constant).fold(regularity.c, f64::max);
        let traj = l2_trajectory(&ladder, angle, c1)?;
        let mut w = self.csv("density.csv", "theta,rho,l2_sq,l2_sq_refined,sum_s2,N,bound_s2,bound,within_bounds")?;
        for (i, (pd, step)) in ladder.iter().zip(&traj.steps).enumerate() {
            let refined = if self.cfg.refine > 1 {
                let fine =
                    product_decompose(&self.k1, &self.k2, pd.rho / self.cfg.refine as f64, self.cfg.max_squares)?;
                pushforward_refined(&fine, angle, pd.rho)?.l2_sq
            } else {
                step.l2_sq
            };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_float(angle.radians()),
                fmt_float(step.rho),
                fmt_float(step.l2_sq),
                fmt_float(refined),
                step.sum_s2,
                step.pair_count,
                fmt_float(step.bound_s2),
                fmt_float(step.bound),
                u8::from(step.within_bounds())
            )?;
            println!(
                "rho = {:.6e}: l2_sq = {:.10} (refined {:.10}), bound = {:.6e}, within = {}",
                step.rho,
                step.l2_sq,
                refined,
                step.bound,
                step.within_bounds()
            );
            if self.dump {
                let mut h = self.csv(&format!("histogram_{i}.csv"), CSV_HEADER)?;
                pushforward_histogram(pd, angle)?.write_csv(&mut h, false)?;
                h.flush()?;
            }
        }
        w.flush()?;
        println!("c1 = {:.6}, last increase = {:.4}, verdict: {:?}", c1, traj.last_increase, traj.verdict);
        Ok(0)
    }

    fn verify(&self) -> Result<i32> {
        let cfg = SuiteConfig {
            ladder: self.cfg.ladder(),
            grid: self.cfg.grid,
            epsilon: self.cfg.epsilon,
            seed: self.cfg.seed,
            energy: self.energy_options(true),
            max_squares: self.cfg.max_squares,
            tail: self.cfg.tail,
            ..SuiteConfig::default()
        };
        let report = lemma_suite(&self.k1, &self.k2, &cfg)?;
        let text = report.to_text();
        let mut t = self.create("report.txt")?;
        writeln!(t, "# {}", self.meta)?;
        t.write_all(text.as_bytes())?;
        t.flush()?;
        let json = serde_json::json!({ "meta": self.meta, "report": report });
        let mut j = self.create("report.json")?;
        serde_json::to_writer_pretty(&mut j, &json).map_err(std::io::Error::from)?;
        writeln!(j)?;
        j.flush()?;
        let mut c = self.create("checks.csv")?;
        report.write_csv(&mut c, &self.meta)?;
        c.flush()?;
        print!("{text}");
        let failed = report.items.iter().any(|i| i.status == Status::Fail);
        Ok(if failed { 3 } else { 0 })
    }
}

fn fit(reports: &[EnergyReport]) -> ScalingFit {
    ScalingFit::fit(
        reports.iter().map(|e| e.rho.ln()).collect(),
        reports.iter().map(|e| e.energy.ln()).collect(),
        None,
        0.0,
    )
}
