//! Batch front end behind the `qdbar` binary.
//!
//! Every command reads one JSON [`RunConfig`], writes its reports under the
//! output directory and returns an exit code: 0 success, 1 a checked property
//! failed, 2 the config or the command line is unusable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aps::{
    compactness_evidence, index, mode_assembly, ApsError, ApsParams, ApsSystem, BlockNorm,
    IndexOptions, IndexReport, OracleCache, QForm, ResidualReport,
};
use crate::fourier::{FourierError, FourierSpace};
use crate::weight_model::{
    eval_weights, validate_conditions, DomainKind, FamilySpec, WeightError, WeightSequence,
};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Aps(#[from] ApsError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Weights(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_residual")]
    pub residual: f64,
    #[serde(default = "default_norm")]
    pub block_norm: f64,
}

fn default_residual() -> f64 {
    1e-8
}
fn default_norm() -> f64 {
    1e-8
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: default_residual(),
            block_norm: default_norm(),
        }
    }
}

/// Everything a run needs. Only `family`, `domain` and `k_max` are required.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilySpec,
    pub domain: DomainKind,
    pub k_max: usize,
    #[serde(default = "default_m_max")]
    pub m_max: usize,
    /// values of `N`
    #[serde(default)]
    pub n_grid: Vec<i64>,
    /// values of `M`, annulus only
    #[serde(default)]
    pub m_grid: Vec<i64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_windows")]
    pub oracle_windows: Vec<usize>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_m_max() -> usize {
    16
}
fn default_windows() -> Vec<usize> {
    vec![40, 80]
}
fn default_trials() -> usize {
    20
}
fn default_n_max() -> usize {
    12
}

impl RunConfig {
    /// Parses and checks a config. CSV paths resolve against the config's directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.check()?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn check(&self) -> Result<(), CliError> {
        if self.k_max < 4 * self.m_max {
            return Err(CliError::Config(format!(
                "k_max = {} is below 4·m_max = {}",
                self.k_max,
                4 * self.m_max
            )));
        }
        if self.trials == 0 {
            return Err(CliError::Config("trials must be positive".into()));
        }
        Ok(())
    }

    /// Grid points in row-major `(M, N)` order.
    pub fn points(&self) -> Result<Vec<ApsParams>, CliError> {
        let pts: Vec<ApsParams> = match self.domain {
            DomainKind::Disk => self.n_grid.iter().map(|&n| ApsParams::disk(n)).collect(),
            DomainKind::Annulus => self
                .m_grid
                .iter()
                .flat_map(|&m| self.n_grid.iter().map(move |&n| ApsParams::annulus(m, n)))
                .collect(),
        };
        if pts.is_empty() {
            return Err(CliError::Config("the parameter grid is empty".into()));
        }
        Ok(pts)
    }

    pub fn weights(&self, base: &Path) -> Result<WeightSequence, CliError> {
        let family = self.family.resolve(base)?;
        Ok(eval_weights(&family, self.domain, self.k_max)?)
    }
}

/// Command-line overrides.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub oracle: bool,
    pub out: Option<PathBuf>,
}

pub struct Run {
    pub cfg: RunConfig,
    pub base: PathBuf,
    pub out: PathBuf,
}

impl Run {
    pub fn new(config: &Path, o: &Overrides) -> Result<Self, CliError> {
        let (mut cfg, base) = RunConfig::load(config)?;
        cfg.oracle |= o.oracle;
        let out = o
            .out
            .clone()
            .or_else(|| {
                cfg.out
                    .clone()
                    .map(|p| if p.is_absolute() { p } else { base.join(p) })
            })
            .unwrap_or_else(|| PathBuf::from("qdbar-out"));
        Ok(Self { cfg, base, out })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.out.join(name);
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        fs::create_dir_all(&self.out).map_err(io)?;
        fs::write(&path, bytes).map_err(io)?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn write_csv<R: Serialize>(&self, name: &str, rows: &[R]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.write(name, &bytes)
    }

    fn space(&self) -> Result<FourierSpace, CliError> {
        let ws = self.cfg.weights(&self.base)?;
        let v = validate_conditions(&ws);
        if !v.all_pass() {
            return Err(CliError::Aps(ApsError::WindowTooSmall(format!(
                "weights fail their conditions: {}",
                v.failures().join("; ")
            ))));
        }
        Ok(FourierSpace::new(&ws, self.cfg.m_max)?)
    }
}

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: &'a T,
}

fn versioned<T: Serialize>(body: &T) -> Versioned<'_, T> {
    Versioned {
        schema: SCHEMA,
        body,
    }
}

fn point_tag(p: &ApsParams) -> String {
    match p.domain {
        DomainKind::Disk => format!("disk_N{}", p.n),
        DomainKind::Annulus => format!("annulus_M{}_N{}", p.m, p.n),
    }
}

fn m_column(p: &ApsParams) -> String {
    match p.domain {
        DomainKind::Disk => String::new(),
        DomainKind::Annulus => p.m.to_string(),
    }
}

/// Checks the weight conditions.
pub fn cmd_validate(run: &Run) -> Result<i32, CliError> {
    let ws = run.cfg.weights(&run.base)?;
    let report = validate_conditions(&ws);
    #[derive(Serialize)]
    struct Out<'a> {
        family: String,
        domain: DomainKind,
        pass: bool,
        failures: Vec<String>,
        #[serde(flatten)]
        report: &'a crate::weight_model::ValidationReport,
    }
    let out = Out {
        family: ws.family.label(),
        domain: ws.domain,
        pass: report.all_pass(),
        failures: report.failures(),
        report: &report,
    };
    let path = run.write_json("validate.json", &versioned(&out))?;
    if out.pass {
        println!("all weight conditions hold on [{}, {}]", ws.lo, ws.hi);
    } else {
        for f in &out.failures {
            println!("{f}");
        }
    }
    println!("report: {}", path.display());
    Ok(if out.pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct SummaryRow {
    domain: DomainKind,
    #[serde(rename = "M")]
    m: String,
    #[serde(rename = "N")]
    n: i64,
    analytic: i64,
    computed: i64,
    oracle: String,
    agree: bool,
}

#[derive(Serialize)]
struct SweepRow {
    domain: DomainKind,
    #[serde(rename = "M")]
    m: String,
    #[serde(rename = "N")]
    n: i64,
    index: i64,
    residual_max: f64,
    tail: f64,
    max_block_norm: f64,
}

/// One index report per grid point plus the summary and sweep tables.
pub fn cmd_index(run: &Run) -> Result<i32, CliError> {
    let points = run.cfg.points()?;
    let space = run.space()?;
    let cache = OracleCache::default();
    let opts = IndexOptions {
        oracle_windows: if run.cfg.oracle {
            run.cfg.oracle_windows.clone()
        } else {
            Vec::new()
        },
        trials: run.cfg.trials,
        seed: run.cfg.seed,
        n_max: run.cfg.n_max.min(run.cfg.m_max),
    };
    let reports: Vec<IndexReport> = points
        .par_iter()
        .map(|p| {
            let sys = ApsSystem::new(&space, *p)?;
            index(&sys, &opts, &cache)
        })
        .collect::<Result<_, _>>()?;
    let mut summary = Vec::new();
    let mut sweep = Vec::new();
    let mut ok = true;
    for r in &reports {
        run.write_json(&format!("index_{}.json", point_tag(&r.params)), r)?;
        let res = r.residuals.expect("trials > 0");
        let res_ok = res.max() <= run.cfg.tolerances.residual + res.tail;
        let norms_ok = r
            .block_norm_decay
            .iter()
            .all(|b| b.measured <= b.bound + run.cfg.tolerances.block_norm);
        let agree = r.agrees();
        ok &= agree && res_ok && norms_ok;
        summary.push(SummaryRow {
            domain: r.params.domain,
            m: m_column(&r.params),
            n: r.params.n,
            analytic: r.analytic_index,
            computed: r.total_index,
            oracle: r
                .oracle
                .last()
                .map(|o| o.index.to_string())
                .unwrap_or_default(),
            agree,
        });
        sweep.push(SweepRow {
            domain: r.params.domain,
            m: m_column(&r.params),
            n: r.params.n,
            index: r.total_index,
            residual_max: res.max(),
            tail: res.tail,
            max_block_norm: r
                .block_norm_decay
                .iter()
                .map(|b| b.measured)
                .fold(0.0, f64::max),
        });
        println!(
            "{:<22} analytic {:>3}  computed {:>3}  {}",
            r.params.to_string(),
            r.analytic_index,
            r.total_index,
            if agree { "agree" } else { "DISAGREE" }
        );
    }
    run.write_csv("index_summary.csv", &summary)?;
    run.write_csv("sweep.csv", &sweep)?;
    Ok(if ok { 0 } else { 1 })
}

#[derive(Serialize)]
struct ResidualRow {
    domain: DomainKind,
    #[serde(rename = "M")]
    m: String,
    #[serde(rename = "N")]
    n: i64,
    form: QForm,
    residual_qd: f64,
    residual_dq: f64,
    q_on_cokernel: f64,
    tail: f64,
    pass: bool,
}

/// Composition residuals of `Q` and `D` for both parametrix forms.
pub fn cmd_residuals(run: &Run) -> Result<i32, CliError> {
    let points = run.cfg.points()?;
    let space = run.space()?;
    let tol = run.cfg.tolerances.residual;
    let results: Vec<(ApsParams, Vec<ResidualReport>)> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let sys = ApsSystem::new(&space, *p)?;
            let mut rng = ChaCha8Rng::seed_from_u64(run.cfg.seed.wrapping_add(i as u64));
            let reps = [QForm::Orthogonal, QForm::Displayed]
                .iter()
                .map(|&f| sys.residuals(run.cfg.trials, f, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            Ok::<_, ApsError>((*p, reps))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (p, reps) in &results {
        for r in reps {
            let pass = r.max() <= tol + r.tail;
            rows.push(ResidualRow {
                domain: p.domain,
                m: m_column(p),
                n: p.n,
                form: r.form,
                residual_qd: r.residual_qd,
                residual_dq: r.residual_dq,
                q_on_cokernel: r.q_on_cokernel,
                tail: r.tail,
                pass,
            });
            println!(
                "{:<22} {:<10} max residual {:.3e}  tail {:.3e}  {}",
                p.to_string(),
                format!("{:?}", r.form).to_lowercase(),
                r.max(),
                r.tail,
                if pass { "ok" } else { "FAIL" }
            );
        }
    }
    #[derive(Serialize)]
    struct Entry<'a> {
        params: &'a ApsParams,
        reports: &'a [ResidualReport],
    }
    let entries: Vec<Entry> = results
        .iter()
        .map(|(p, r)| Entry {
            params: p,
            reports: r,
        })
        .collect();
    run.write_json(
        "residuals.json",
        &versioned(&serde_json::json!({ "points": entries })),
    )?;
    run.write_csv("residuals.csv", &rows)?;
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}

#[derive(Serialize)]
struct CompactRow {
    domain: DomainKind,
    #[serde(rename = "M")]
    m: String,
    #[serde(rename = "N")]
    n: i64,
    mode: usize,
    parametrix: String,
    bound: f64,
    stated_bound: f64,
    measured: f64,
    pass: bool,
}

/// Block norms of the antiholomorphic parametrix blocks against their bounds.
pub fn cmd_compactness(run: &Run) -> Result<i32, CliError> {
    let points = run.cfg.points()?;
    let space = run.space()?;
    let n_max = run.cfg.n_max;
    let tol = run.cfg.tolerances.block_norm;
    let results: Vec<(ApsParams, Vec<BlockNorm>)> = points
        .par_iter()
        .map(|p| {
            let sys = ApsSystem::new(&space, *p)?;
            Ok::<_, ApsError>((*p, compactness_evidence(&sys, n_max)?))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut ok = true;
    for (p, norms) in &results {
        ok &= norms.windows(2).all(|w| w[1].bound < w[0].bound);
        for b in norms {
            let pass = b.measured <= b.bound + tol;
            ok &= pass;
            rows.push(CompactRow {
                domain: p.domain,
                m: m_column(p),
                n: p.n,
                mode: b.n,
                parametrix: format!("{:?}", b.parametrix),
                bound: b.bound,
                stated_bound: b.stated_bound,
                measured: b.measured,
                pass,
            });
        }
    }
    if let Some((p, norms)) = results.first() {
        println!("{p}");
        println!("{:>4} {:>6} {:>12} {:>12}", "n", "Q", "bound", "measured");
        for b in norms {
            println!(
                "{:>4} {:>6} {:>12.6e} {:>12.6e}",
                b.n,
                format!("{:?}", b.parametrix),
                b.bound,
                b.measured
            );
        }
    }
    run.write_json(
        "compactness.json",
        &versioned(&serde_json::json!({ "rows": rows })),
    )?;
    run.write_csv("compactness.csv", &rows)?;
    Ok(if ok { 0 } else { 1 })
}

/// Prints the variant layout of `D`, `D*` and `Q` at each grid point.
pub fn cmd_decompose(run: &Run) -> Result<i32, CliError> {
    let points = run.cfg.points()?;
    let mut text = String::new();
    let mut assemblies = Vec::new();
    for p in &points {
        if p.domain != run.cfg.domain {
            return Err(CliError::Config("grid domain mismatch".into()));
        }
        let a = mode_assembly(p);
        text.push_str(&a.describe());
        text.push('\n');
        assemblies.push(a);
    }
    print!("{text}");
    std::io::stdout().flush().ok();
    run.write("decompose.txt", text.as_bytes())?;
    run.write_json(
        "decompose.json",
        &versioned(&serde_json::json!({ "assemblies": assemblies })),
    )?;
    Ok(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Index,
    Residuals,
    Compactness,
    Decompose,
}

/// Runs a command and maps every outcome to an exit code.
pub fn run(cmd: Command, config: &Path, o: &Overrides) -> i32 {
    let result = Run::new(config, o).and_then(|r| match cmd {
        Command::Validate => cmd_validate(&r),
        Command::Index => cmd_index(&r),
        Command::Residuals => cmd_residuals(&r),
        Command::Compactness => cmd_compactness(&r),
        Command::Decompose => cmd_decompose(&r),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qdbar: {e}");
            e.exit_code()
        }
    }
}
