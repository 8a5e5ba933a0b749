//! Command-line front end: argument parsing, report assembly and output files.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aphbxii::{Aphbxii, QuantileSummary};
use crate::data::{atomic_write, describe, load_csv, load_embedded, ttt_transform, Dataset, EMBEDDED};
use crate::error::{Error, Result};
use crate::estimation::{fit, lr_test, FitConfig, FitResult, ModelKind, PARAMETER_NAMES};
use crate::gof::{league_table, EdfVariant, GofReport, LeagueRow};
use crate::montecarlo::{run_study, McConfig, McResult, PAPER_SAMPLE_SIZES};
use crate::properties::{
    average_waiting_time, bonferroni, lorenz, mean_deviation_about_mean,
    mean_deviation_about_median, mean_residual_life, moment_report, renyi_entropy,
    shannon_entropy, tsallis_entropy, MomentReport,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::UnknownModel(_) | Error::UnknownParameterSet(_) => EXIT_USAGE,
        Error::Data(_)
        | Error::Row { .. }
        | Error::UnknownDataset(_)
        | Error::Csv(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_DATA,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "aphg", version, about = "Alpha power Harris-G Burr XII distributions")]
pub struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "APHG_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit models to a dataset and compare them.
    Fit(FitArgs),
    /// Distributional properties at a parameter vector.
    Props(PropsArgs),
    /// Simulation study for one of the reference parameter sets.
    Simulate(SimulateArgs),
    /// Scaled total-time-on-test coordinates of a dataset.
    Ttt(DataArgs),
    /// Plot-ready series.
    Plotdata {
        #[command(subcommand)]
        kind: PlotKind,
    },
    /// Regenerate the quantile, moment and descriptive tables.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Embedded dataset name (kevlar, cancer, device) or a CSV path.
    #[arg(long)]
    pub data: String,
    /// Header of the CSV column to read; without it the file has no header.
    #[arg(long)]
    pub column: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EdfChoice {
    Classical,
    Modified,
    Normal,
}

impl From<EdfChoice> for EdfVariant {
    fn from(c: EdfChoice) -> Self {
        match c {
            EdfChoice::Classical => EdfVariant::Classical,
            EdfChoice::Modified => EdfVariant::Modified,
            EdfChoice::Normal => EdfVariant::NormalTransformed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// `all` or a comma-separated list of aphbxii, hbxii, apbxii, mobxii, bxii.
    #[arg(long, default_value = "all")]
    pub models: String,
    #[arg(long, default_value_t = FitConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = FitConfig::default().restarts)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = EdfChoice::Normal)]
    pub edf: EdfChoice,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be positive and finite"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, value_parser = positive)]
    pub alpha: f64,
    #[arg(long, value_parser = positive)]
    pub c: f64,
    #[arg(long, value_parser = positive)]
    pub upsilon: f64,
    #[arg(long, value_parser = positive)]
    pub phi: f64,
    #[arg(long, value_parser = positive)]
    pub eta: f64,
}

impl ParamArgs {
    fn theta(&self) -> [f64; 5] {
        [self.alpha, self.c, self.upsilon, self.phi, self.eta]
    }
}

#[derive(Debug, Clone, Args)]
pub struct PropsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Entropy orders.
    #[arg(long, value_delimiter = ',', value_parser = positive)]
    pub rho: Vec<f64>,
    /// Ages for the mean residual life and average waiting time.
    #[arg(long = "t", value_delimiter = ',', value_parser = positive)]
    pub ages: Vec<f64>,
    /// Probabilities for the Lorenz and Bonferroni curves.
    #[arg(long = "p", value_delimiter = ',', default_value = "0.1,0.25,0.5,0.75,0.9")]
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub set: usize,
    #[arg(long, default_value_t = 200)]
    pub replications: usize,
    #[arg(long, default_value_t = 20_240_611)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 20_000)]
    pub population: usize,
}

#[derive(Debug, Clone, Subcommand)]
pub enum PlotKind {
    /// Density, distribution, survival and hazard over a grid.
    Curves {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 5.0, value_parser = positive)]
        x_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Empirical against fitted distribution and density, plus a histogram.
    Overlay {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "aphbxii")]
        model: String,
        #[arg(long, default_value_t = FitConfig::default().seed)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableChoice {
    Quantiles,
    Moments,
    Descriptive,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum, default_value_t = TableChoice::All)]
    pub which: TableChoice,
}

pub fn resolve_dataset(args: &DataArgs) -> Result<Dataset> {
    let key = args.data.trim().to_ascii_lowercase();
    if EMBEDDED.contains(&key.as_str()) {
        return load_embedded(&key);
    }
    let path = Path::new(&args.data);
    if path.exists() {
        return load_csv(path, args.column.as_deref());
    }
    Err(Error::UnknownDataset(args.data.clone()))
}

pub fn parse_models(list: &str) -> Result<Vec<ModelKind>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelKind::ALL.to_vec());
    }
    let mut models = Vec::new();
    for part in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: ModelKind = part.parse()?;
        if !models.contains(&m) {
            models.push(m);
        }
    }
    if models.is_empty() {
        return Err(Error::UnknownModel(list.to_string()));
    }
    Ok(models)
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub fit: FitResult,
    pub gof: GofReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct LrRow {
    pub model: ModelKind,
    pub df: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub dataset: String,
    pub n: usize,
    pub models: Vec<ModelReport>,
    pub league: Vec<LeagueRow>,
    /// Each nested model against APHBXII; empty unless APHBXII was fitted.
    pub lr_tests: Vec<LrRow>,
}

pub fn fit_report(dataset: &Dataset, models: &[ModelKind], config: &FitConfig, edf: EdfVariant) -> Result<FitReport> {
    let mut reports = Vec::with_capacity(models.len());
    for &m in models {
        let f = fit(&dataset.values, m, config)?;
        let gof = GofReport::from_fit(&dataset.values, &f, edf)?;
        reports.push(ModelReport { fit: f, gof });
    }
    let league = league_table(
        &reports
            .iter()
            .map(|r| (r.fit.model.to_string(), r.gof.clone()))
            .collect::<Vec<_>>(),
    );
    let mut lr_tests = Vec::new();
    if let Some(full) = reports.iter().find(|r| r.fit.model == ModelKind::Aphbxii) {
        for r in reports.iter().filter(|r| r.fit.model != ModelKind::Aphbxii) {
            let df = ModelKind::Aphbxii.k() - r.fit.model.k();
            lr_tests.push(match lr_test(&full.fit, &r.fit, df) {
                Ok(t) => LrRow {
                    model: r.fit.model,
                    df,
                    statistic: Some(t.statistic),
                    p_value: Some(t.p_value),
                    note: None,
                },
                Err(e) => LrRow {
                    model: r.fit.model,
                    df,
                    statistic: None,
                    p_value: None,
                    note: Some(e.to_string()),
                },
            });
        }
    }
    Ok(FitReport {
        dataset: dataset.name.clone(),
        n: dataset.len(),
        models: reports,
        league,
        lr_tests,
    })
}

#[derive(Serialize)]
struct FitCsvRow {
    model: ModelKind,
    k: usize,
    n: usize,
    loglik: f64,
    neg2loglik: f64,
    aic: f64,
    bic: f64,
    hqic: f64,
    caic: f64,
    cvm: f64,
    ad: f64,
    ks: f64,
    ks_pvalue: f64,
    alpha: f64,
    c: f64,
    upsilon: f64,
    phi: f64,
    eta: f64,
    se_alpha: Option<f64>,
    se_c: Option<f64>,
    se_upsilon: Option<f64>,
    se_phi: Option<f64>,
    se_eta: Option<f64>,
    converged: bool,
    at_bound: bool,
}

fn fit_csv_row(r: &ModelReport) -> FitCsvRow {
    let se = |name: &str| r.fit.standard_errors.as_ref().and_then(|m| m.get(name).copied());
    let t = r.fit.theta;
    let g = &r.gof;
    FitCsvRow {
        model: r.fit.model,
        k: g.k,
        n: g.n,
        loglik: r.fit.loglik,
        neg2loglik: g.neg2loglik,
        aic: g.aic,
        bic: g.bic,
        hqic: g.hqic,
        caic: g.caic,
        cvm: g.cvm,
        ad: g.ad,
        ks: g.ks,
        ks_pvalue: g.ks_pvalue,
        alpha: t[0],
        c: t[1],
        upsilon: t[2],
        phi: t[3],
        eta: t[4],
        se_alpha: se("alpha"),
        se_c: se("c"),
        se_upsilon: se("upsilon"),
        se_phi: se("phi"),
        se_eta: se("eta"),
        converged: r.fit.converged,
        at_bound: r.fit.at_bound,
    }
}

#[derive(Serialize)]
struct LeagueCsvRow<'a> {
    position: usize,
    model: &'a str,
    rank_sum: usize,
    neg2loglik: usize,
    aic: usize,
    bic: usize,
    hqic: usize,
    caic: usize,
    cvm: usize,
    ad: usize,
    ks: usize,
    ks_pvalue: usize,
}

// ---------------------------------------------------------------------------
// props
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct EntropyRow {
    pub rho: f64,
    pub renyi: Option<f64>,
    pub tsallis: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgeRow {
    pub t: f64,
    pub mean_residual_life: Option<f64>,
    pub average_waiting_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub p: f64,
    pub lorenz: Option<f64>,
    pub bonferroni: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropsReport {
    pub theta: [f64; 5],
    pub quantiles: QuantileSummary,
    pub moments: Option<MomentReport>,
    pub mean_deviation_about_mean: Option<f64>,
    pub mean_deviation_about_median: Option<f64>,
    pub shannon_entropy: Option<f64>,
    pub entropies: Vec<EntropyRow>,
    pub ages: Vec<AgeRow>,
    pub curves: Vec<CurveRow>,
    /// Quantities that do not exist or could not be computed.
    pub notes: Vec<String>,
}

pub fn props_report(args: &PropsArgs) -> Result<PropsReport> {
    let theta = args.params.theta();
    let d = Aphbxii::from_slice(&theta)?;
    let mut notes = Vec::new();
    let mut keep = |label: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{label}: {e}"));
            None
        }
    };
    let moments = match moment_report(&d) {
        Ok(m) => Some(m),
        Err(e) => {
            keep("moments", Err(e));
            None
        }
    };
    let md_mean = keep("mean deviation about the mean", mean_deviation_about_mean(&d));
    let md_median = keep("mean deviation about the median", mean_deviation_about_median(&d));
    let shannon = keep("shannon entropy", shannon_entropy(&d));
    let entropies = args
        .rho
        .iter()
        .map(|&rho| EntropyRow {
            rho,
            renyi: keep(&format!("renyi entropy at rho = {rho}"), renyi_entropy(rho, &d)),
            tsallis: keep(&format!("tsallis entropy at rho = {rho}"), tsallis_entropy(rho, &d)),
        })
        .collect();
    let ages = args
        .ages
        .iter()
        .map(|&t| AgeRow {
            t,
            mean_residual_life: keep(&format!("mean residual life at t = {t}"), mean_residual_life(t, &d)),
            average_waiting_time: keep(&format!("average waiting time at t = {t}"), average_waiting_time(t, &d)),
        })
        .collect();
    let curves = args
        .probabilities
        .iter()
        .map(|&p| CurveRow {
            p,
            lorenz: keep(&format!("lorenz at p = {p}"), lorenz(p, &d)),
            bonferroni: keep(&format!("bonferroni at p = {p}"), bonferroni(p, &d)),
        })
        .collect();
    Ok(PropsReport {
        theta,
        quantiles: d.quantile_summary()?,
        moments,
        mean_deviation_about_mean: md_mean,
        mean_deviation_about_median: md_median,
        shannon_entropy: shannon,
        entropies,
        ages,
        curves,
        notes,
    })
}

#[derive(Serialize)]
struct LongRow<'a> {
    quantity: &'a str,
    argument: Option<f64>,
    value: Option<f64>,
}

fn props_long_rows(r: &PropsReport) -> Vec<LongRow<'_>> {
    let mut rows = Vec::new();
    let mut push = |quantity: &'static str, argument: Option<f64>, value: Option<f64>| {
        rows.push(LongRow { quantity, argument, value })
    };
    for (name, v) in PARAMETER_NAMES.iter().zip(r.theta) {
        push(name, None, Some(v));
    }
    let q = &r.quantiles;
    push("q1", None, Some(q.q1));
    push("median", None, Some(q.q2));
    push("q3", None, Some(q.q3));
    push("galton_skewness", None, Some(q.galton_s));
    push("moors_kurtosis", None, Some(q.moors_k));
    if let Some(m) = &r.moments {
        for (i, v) in m.raw_moments.iter().enumerate() {
            push("raw_moment", Some(i as f64 + 1.0), Some(*v));
        }
        push("variance", None, m.variance);
        push("sd", None, m.sd);
        push("cv", None, m.cv);
        push("skewness", None, m.skewness);
        push("kurtosis", None, m.kurtosis);
    }
    push("mean_deviation_about_mean", None, r.mean_deviation_about_mean);
    push("mean_deviation_about_median", None, r.mean_deviation_about_median);
    push("shannon_entropy", None, r.shannon_entropy);
    for e in &r.entropies {
        push("renyi_entropy", Some(e.rho), e.renyi);
        push("tsallis_entropy", Some(e.rho), e.tsallis);
    }
    for a in &r.ages {
        push("mean_residual_life", Some(a.t), a.mean_residual_life);
        push("average_waiting_time", Some(a.t), a.average_waiting_time);
    }
    for c in &r.curves {
        push("lorenz", Some(c.p), c.lorenz);
        push("bonferroni", Some(c.p), c.bonferroni);
    }
    rows
}

// ---------------------------------------------------------------------------
// plot data
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub pdf: f64,
    pub cdf: f64,
    pub sf: f64,
    pub hrf: f64,
}

pub fn curve_points(theta: &[f64; 5], x_max: f64, points: usize) -> Result<Vec<CurvePoint>> {
    if points < 2 {
        return Err(Error::domain("need at least two grid points"));
    }
    let d = Aphbxii::from_slice(theta)?;
    (1..=points)
        .map(|i| {
            let x = x_max * i as f64 / points as f64;
            Ok(CurvePoint {
                x,
                pdf: d.pdf(x)?,
                cdf: d.cdf(x)?,
                sf: d.sf(x)?,
                hrf: d.hrf(x).unwrap_or(f64::INFINITY),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OverlayPoint {
    pub x: f64,
    /// Empirical distribution just before and at `x`.
    pub ecdf_lower: f64,
    pub ecdf_upper: f64,
    pub fitted_cdf: f64,
    pub fitted_pdf: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub density: f64,
    pub fitted_density: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Overlay {
    pub dataset: String,
    pub fit: FitResult,
    pub points: Vec<OverlayPoint>,
    pub histogram: Vec<HistogramBin>,
}

pub fn overlay(dataset: &Dataset, model: ModelKind, config: &FitConfig) -> Result<Overlay> {
    let f = fit(&dataset.values, model, config)?;
    let d = Aphbxii::from_slice(&f.theta)?;
    let sorted = dataset.sorted();
    let n = sorted.len() as f64;
    let points = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            Ok(OverlayPoint {
                x,
                ecdf_lower: i as f64 / n,
                ecdf_upper: (i as f64 + 1.0) / n,
                fitted_cdf: d.cdf(x)?,
                fitted_pdf: d.pdf(x)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Sturges bins over [0, max].
    let bins = (n.log2().ceil() as usize + 1).max(1);
    let hi = sorted[sorted.len() - 1];
    let width = hi / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        counts[((x / width) as usize).min(bins - 1)] += 1;
    }
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(b, &count)| {
            let lower = b as f64 * width;
            let upper = lower + width;
            Ok(HistogramBin {
                lower,
                upper,
                count,
                density: count as f64 / (n * width),
                fitted_density: (d.cdf(upper)? - d.cdf(lower)?) / width,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Overlay {
        dataset: dataset.name.clone(),
        fit: f,
        points,
        histogram,
    })
}

// ---------------------------------------------------------------------------
// tables
// ---------------------------------------------------------------------------

/// `(c, η, φ)` of the quantile table rows at α = 0.5, υ = 1.2.
const QUANTILE_ROWS: [[f64; 3]; 10] = [
    [0.3, 0.3, 1.2],
    [0.5, 0.5, 1.5],
    [0.8, 0.8, 2.0],
    [1.2, 1.2, 2.5],
    [2.0, 2.0, 3.5],
    [2.5, 2.5, 3.8],
    [4.0, 4.0, 5.0],
    [4.5, 4.5, 5.8],
    [5.5, 5.5, 7.0],
    [10.0, 10.0, 10.0],
];

/// `(α, υ, c)` of the moment table columns at φ = 2.5, η = 3.
const MOMENT_COLUMNS: [[f64; 3]; 4] = [[0.5, 1.0, 1.5], [1.5, 1.5, 2.5], [2.5, 2.0, 3.0], [4.5, 5.5, 3.5]];

#[derive(Debug, Clone, Serialize)]
pub struct QuantileRow {
    pub c: f64,
    pub eta: f64,
    pub phi: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub moors_k: f64,
    pub galton_s: f64,
}

pub fn quantile_table() -> Result<Vec<QuantileRow>> {
    QUANTILE_ROWS
        .iter()
        .map(|&[c, eta, phi]| {
            let s = Aphbxii::from_params(0.5, c, 1.2, phi, eta)?.quantile_summary()?;
            Ok(QuantileRow {
                c,
                eta,
                phi,
                q1: s.q1,
                q2: s.q2,
                q3: s.q3,
                moors_k: s.moors_k,
                galton_s: s.galton_s,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub alpha: f64,
    pub upsilon: f64,
    pub c: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub sd: f64,
    pub cv: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

pub fn moment_table() -> Result<Vec<MomentRow>> {
    MOMENT_COLUMNS
        .iter()
        .map(|&[alpha, upsilon, c]| {
            let r = moment_report(&Aphbxii::from_params(alpha, c, upsilon, 2.5, 3.0)?)?;
            let m = &r.raw_moments;
            let need = |v: Option<f64>| v.ok_or_else(|| Error::range("moment table needs six moments"));
            if m.len() < 6 {
                return Err(Error::range("moment table needs six moments"));
            }
            Ok(MomentRow {
                alpha,
                upsilon,
                c,
                mu1: m[0],
                mu2: m[1],
                mu3: m[2],
                mu4: m[3],
                mu5: m[4],
                mu6: m[5],
                sd: need(r.sd)?,
                cv: need(r.cv)?,
                skewness: need(r.skewness)?,
                kurtosis: need(r.kurtosis)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptiveRow {
    pub dataset: String,
    #[serde(flatten)]
    pub stats: crate::data::DescriptiveStats,
}

pub fn descriptive_table() -> Result<Vec<DescriptiveRow>> {
    EMBEDDED
        .iter()
        .map(|name| {
            let d = load_embedded(name)?;
            Ok(DescriptiveRow {
                dataset: d.name.clone(),
                stats: describe(&d),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

struct Output<'a> {
    dir: &'a Path,
    format: Format,
    written: Vec<PathBuf>,
}

impl<'a> Output<'a> {
    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}.{ext}"))
    }

    fn json<T: Serialize + ?Sized>(&mut self, stem: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        let path = self.path(stem, "json");
        atomic_write(&path, &bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        let path = self.path(stem, "csv");
        atomic_write(&path, &bytes)?;
        self.written.push(path);
        Ok(())
    }

    /// A table in the selected format.
    fn table<T: Serialize>(&mut self, stem: &str, rows: &[T]) -> Result<()> {
        match self.format {
            Format::Json => self.json(stem, rows),
            Format::Csv => self.csv(stem, rows),
        }
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Runs a parsed command and returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let mut out = Output {
        dir: &cli.out_dir,
        format: cli.format,
        written: Vec::new(),
    };
    match &cli.command {
        Command::Fit(args) => {
            let dataset = resolve_dataset(&args.data)?;
            let models = parse_models(&args.models)?;
            let config = FitConfig {
                seed: args.seed,
                restarts: args.restarts,
                ..FitConfig::default()
            };
            let report = fit_report(&dataset, &models, &config, args.edf.into())?;
            let stem = file_stem(&dataset.name);
            match cli.format {
                Format::Json => out.json(&format!("fit_{stem}"), &report)?,
                Format::Csv => {
                    let rows: Vec<FitCsvRow> = report.models.iter().map(fit_csv_row).collect();
                    out.csv(&format!("fit_{stem}"), &rows)?;
                    let league: Vec<LeagueCsvRow> = report
                        .league
                        .iter()
                        .enumerate()
                        .map(|(i, r)| LeagueCsvRow {
                            position: i + 1,
                            model: &r.label,
                            rank_sum: r.rank_sum,
                            neg2loglik: r.ranks[0],
                            aic: r.ranks[1],
                            bic: r.ranks[2],
                            hqic: r.ranks[3],
                            caic: r.ranks[4],
                            cvm: r.ranks[5],
                            ad: r.ranks[6],
                            ks: r.ranks[7],
                            ks_pvalue: r.ranks[8],
                        })
                        .collect();
                    out.csv(&format!("league_{stem}"), &league)?;
                    out.csv(&format!("lr_{stem}"), &report.lr_tests)?;
                }
            }
            print_league(&report);
        }
        Command::Props(args) => {
            let report = props_report(args)?;
            match cli.format {
                Format::Json => out.json("props", &report)?,
                Format::Csv => out.csv("props", &props_long_rows(&report))?,
            }
            let q = &report.quantiles;
            println!(
                "q1 {:.4}  median {:.4}  q3 {:.4}  Moors {:.4}  Galton {:.4}",
                q.q1, q.q2, q.q3, q.moors_k, q.galton_s
            );
            for e in &report.entropies {
                if let (Some(r), Some(t)) = (e.renyi, e.tsallis) {
                    println!("rho {}: Renyi {:.6}  Tsallis {:.6}", e.rho, r, t);
                }
            }
        }
        Command::Simulate(args) => {
            let mut config = McConfig::reference(args.set, args.replications, args.seed)?;
            config.population_size = args.population;
            config.sample_sizes = args.sizes.clone().unwrap_or_else(|| PAPER_SAMPLE_SIZES.to_vec());
            let result: McResult = run_study(&config)?;
            let stem = format!("simulate_set{}", args.set);
            match cli.format {
                Format::Json => out.json(&stem, &result)?,
                Format::Csv => out.csv(&stem, &result.cells)?,
            }
        }
        Command::Ttt(args) => {
            let dataset = resolve_dataset(args)?;
            #[derive(Serialize)]
            struct Row {
                u: f64,
                t: f64,
            }
            let rows: Vec<Row> = ttt_transform(&dataset).into_iter().map(|(u, t)| Row { u, t }).collect();
            out.table(&format!("ttt_{}", file_stem(&dataset.name)), &rows)?;
        }
        Command::Plotdata { kind } => match kind {
            PlotKind::Curves { params, x_max, points } => {
                let rows = curve_points(&params.theta(), *x_max, *points)?;
                out.table("curves", &rows)?;
            }
            PlotKind::Overlay { data, model, seed } => {
                let dataset = resolve_dataset(data)?;
                let model: ModelKind = model.parse()?;
                let config = FitConfig {
                    seed: *seed,
                    ..FitConfig::default()
                };
                let o = overlay(&dataset, model, &config)?;
                let stem = format!("overlay_{}_{}", file_stem(&dataset.name), model.name().to_ascii_lowercase());
                match cli.format {
                    Format::Json => out.json(&stem, &o)?,
                    Format::Csv => {
                        out.csv(&stem, &o.points)?;
                        out.csv(&format!("{stem}_histogram"), &o.histogram)?;
                    }
                }
            }
        },
        Command::Tables(args) => {
            let all = args.which == TableChoice::All;
            if all || args.which == TableChoice::Quantiles {
                out.table("table_quantiles", &quantile_table()?)?;
            }
            if all || args.which == TableChoice::Moments {
                out.table("table_moments", &moment_table()?)?;
            }
            if all || args.which == TableChoice::Descriptive {
                match cli.format {
                    Format::Json => out.json("table_descriptive", &descriptive_table()?)?,
                    // Flattened fields need a record-by-record writer.
                    Format::Csv => {
                        let rows: Vec<_> = descriptive_table()?
                            .into_iter()
                            .map(|r| {
                                let s = r.stats;
                                (r.dataset, s.n, s.min, s.q1, s.median, s.mean, s.q3, s.max, s.variance, s.skewness, s.kurtosis)
                            })
                            .collect();
                        let mut w = csv::Writer::from_writer(Vec::new());
                        w.write_record([
                            "dataset", "n", "min", "q1", "median", "mean", "q3", "max", "variance", "skewness",
                            "kurtosis",
                        ])?;
                        for r in rows {
                            w.serialize(r)?;
                        }
                        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
                        let path = out.path("table_descriptive", "csv");
                        atomic_write(&path, &bytes)?;
                        out.written.push(path);
                    }
                }
            }
        }
    }
    Ok(out.written)
}

fn print_league(report: &FitReport) {
    println!("{} (n = {})", report.dataset, report.n);
    println!(
        "{:<8} {:>10} {:>10} {:>10} {:>8} {:>8} {:>8} {:>10} {:>5}",
        "model", "-2l", "AIC", "BIC", "CvM", "AD", "KS", "KS p", "rank"
    );
    for row in &report.league {
        let m = report
            .models
            .iter()
            .find(|m| m.fit.model.to_string() == row.label)
            .expect("league rows come from the fitted models");
        let g = &m.gof;
        println!(
            "{:<8} {:>10.3} {:>10.3} {:>10.3} {:>8.4} {:>8.4} {:>8.4} {:>10.3e} {:>5}",
            row.label, g.neg2loglik, g.aic, g.bic, g.cvm, g.ad, g.ks, g.ks_pvalue, row.rank_sum
        );
    }
    for lr in &report.lr_tests {
        match (lr.statistic, lr.p_value) {
            (Some(s), Some(p)) => println!("LR APHBXII vs {}: {:.3} on {} df, p = {:.3e}", lr.model, s, lr.df, p),
            _ => println!("LR APHBXII vs {}: {}", lr.model, lr.note.as_deref().unwrap_or("unavailable")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_lists() {
        assert_eq!(parse_models("all").unwrap().len(), 5);
        assert_eq!(parse_models("bxii, APHBXII,bxii").unwrap(), vec![ModelKind::Bxii, ModelKind::Aphbxii]);
        assert!(matches!(parse_models("weibull"), Err(Error::UnknownModel(_))));
        assert!(parse_models(",").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::UnknownDataset("x".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::Row { row: 1, message: String::new() }), EXIT_DATA);
        assert_eq!(exit_code(&Error::UnknownParameterSet(9)), EXIT_USAGE);
        assert_eq!(exit_code(&Error::AllStartsFailed(3)), EXIT_NUMERICAL);
    }

    #[test]
    fn positive_parser() {
        assert_eq!(positive("1.5"), Ok(1.5));
        assert!(positive("0").is_err() && positive("-2").is_err() && positive("inf").is_err());
        assert!(positive("abc").is_err());
    }

    #[test]
    fn hazard_with_small_phi_decreases() {
        let pts = curve_points(&[1.5, 0.8, 1.2, 0.6, 1.5], 10.0, 400).unwrap();
        assert!(pts.windows(2).all(|w| w[1].hrf < w[0].hrf));
    }

    #[test]
    fn generated_tables_have_expected_shapes() {
        assert_eq!(quantile_table().unwrap().len(), 10);
        let m = moment_table().unwrap();
        assert_eq!(m.len(), 4);
        assert!((m[0].mu1 - 0.6447).abs() < 5e-4);
        let d = descriptive_table().unwrap();
        assert_eq!(d.iter().map(|r| r.stats.n).collect::<Vec<_>>(), vec![101, 128, 50]);
    }
}
