//! Batch verification over the catalog: run entries, gather drift reports and
//! check outcomes, and serialize the result as JSON or CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{self, CatalogEntry, CheckCtx, CustomSystemSpec};
use crate::constants::{drift, ConstantKind};
use crate::dynamics::{integrate, StepControl};
use crate::error::{Error, Result};

/// Report schema version; bumped on breaking layout changes.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Config(format!("unknown report format `{other}`"))),
        }
    }
}

/// Per-entry knobs that may be overridden from the config.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EntryOverride {
    pub interval: Option<(f64, f64)>,
    pub rel_tol: Option<f64>,
    pub tolerance: Option<f64>,
}

/// Everything a verification run needs; fully determined by CLI flags plus an
/// optional key-value config file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Catalog ids, or the single element `"all"`.
    pub entries: Vec<String>,
    pub seed: u64,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub overrides: BTreeMap<String, EntryOverride>,
    /// User systems declared in the config: built-in family + parameters.
    pub custom: BTreeMap<String, CustomSystemSpec>,
    #[serde(skip)]
    pub report_path: Option<PathBuf>,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            entries: vec!["all".into()],
            seed: 0,
            rel_tol: None,
            abs_tol: None,
            interval: None,
            overrides: BTreeMap::new(),
            custom: BTreeMap::new(),
            report_path: None,
            format: ReportFormat::Json,
        }
    }
}

fn parse_f64_list(v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad numeric list element `{x}`")))
        })
        .collect()
}

fn parse_interval(v: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("interval `{v}` must be `a,b`")));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Config(format!("bad interval endpoint `{}`", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Config(format!("bad interval endpoint `{}`", parts[1])))?;
    if b <= a {
        return Err(Error::Config(format!("interval `{v}` is empty")));
    }
    Ok((a, b))
}

impl RunConfig {
    /// Apply one `key = value` assignment; unknown keys are rejected.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        let parse_f64 = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad numeric value `{v}` for `{key}`")))
        };
        match key {
            "entries" => {
                self.entries = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad seed `{value}`")))?;
            }
            "report" => self.report_path = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "rel_tol" => self.rel_tol = Some(parse_f64(value)?),
            "abs_tol" => self.abs_tol = Some(parse_f64(value)?),
            "interval" => self.interval = Some(parse_interval(value)?),
            _ => {
                if let Some(rest) = key.strip_prefix("custom.") {
                    let (id, field) = rest.rsplit_once('.').ok_or_else(|| {
                        Error::Config(format!("expected `custom.<id>.<field>`, got `{key}`"))
                    })?;
                    let spec = self.custom.entry(id.to_string()).or_default();
                    match field {
                        "family" => spec.family = value.to_string(),
                        "params" => spec.params = parse_f64_list(value)?,
                        "t0" => spec.t0 = Some(parse_f64(value)?),
                        "q0" => spec.q0 = parse_f64_list(value)?,
                        "qdot0" => spec.qdot0 = parse_f64_list(value)?,
                        "interval" => spec.interval = Some(parse_interval(value)?),
                        other => {
                            return Err(Error::Config(format!(
                                "unknown custom-system field `{other}` in `{key}`"
                            )))
                        }
                    }
                } else if let Some(rest) = key.strip_prefix("entry.") {
                    let (id, field) = rest.rsplit_once('.').ok_or_else(|| {
                        Error::Config(format!("expected `entry.<id>.<field>`, got `{key}`"))
                    })?;
                    let ov = self.overrides.entry(id.to_string()).or_default();
                    match field {
                        "interval" => ov.interval = Some(parse_interval(value)?),
                        "rel_tol" => ov.rel_tol = Some(parse_f64(value)?),
                        "tolerance" => ov.tolerance = Some(parse_f64(value)?),
                        other => {
                            return Err(Error::Config(format!(
                                "unknown per-entry field `{other}` in `{key}`"
                            )))
                        }
                    }
                } else {
                    return Err(Error::Config(format!("unknown config key `{key}`")));
                }
            }
        }
        Ok(())
    }

    /// Read a `key = value` config file (`#` starts a comment).
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    line_no + 1
                ))
            })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Expand `"all"` and validate every id against the registry and the
    /// custom systems of this config.
    pub fn resolve_entries(&self) -> Result<Vec<String>> {
        let known = catalog::entry_ids();
        if self.entries.len() == 1 && self.entries[0] == "all" {
            return Ok(known
                .iter()
                .map(|s| s.to_string())
                .chain(self.custom.keys().cloned())
                .collect());
        }
        self.entries
            .iter()
            .map(|want| {
                let found = known.contains(&want.as_str())
                    || self.custom.contains_key(want);
                if found {
                    Ok(want.clone())
                } else {
                    Err(Error::UnknownEntry(want.clone()))
                }
            })
            .collect()
    }

    fn build_entry(&self, id: &str) -> Result<CatalogEntry> {
        match self.custom.get(id) {
            Some(spec) => catalog::custom_entry(id, spec),
            None => catalog::get_entry(id),
        }
    }
}

/// One drift measurement row; mirrors the CSV columns.
#[derive(Debug, Clone, Serialize)]
pub struct DriftRow {
    pub constant_id: String,
    pub kind: ConstantKind,
    /// Base time the drift is measured against.
    pub t0: f64,
    pub max_abs_drift: f64,
    pub rel_drift: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check_id: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryReport {
    pub entry_id: String,
    pub pass: bool,
    pub drifts: Vec<DriftRow>,
    pub checks: Vec<CheckRow>,
    /// Set when the entry failed before producing rows (build or integration).
    pub error: Option<String>,
    pub wall_ms: f64,
}

/// The full machine-readable result of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub version: String,
    pub config: RunConfig,
    pub entries: Vec<EntryReport>,
    pub pass: bool,
    pub wall_ms: f64,
}

fn verify_entry(entry: &CatalogEntry, config: &RunConfig) -> EntryReport {
    let start = Instant::now();
    let mut report = EntryReport {
        entry_id: entry.id.to_string(),
        pass: true,
        drifts: Vec::new(),
        checks: Vec::new(),
        error: None,
        wall_ms: 0.0,
    };

    let mut ivp = entry.default_ivp.clone();
    let ov = config.overrides.get(&entry.id);
    if let Some((a, b)) = config.interval.or(ov.and_then(|o| o.interval)) {
        ivp.interval = (a, b);
        ivp.pad_left = 0.2 * (b - a);
        ivp.pad_right = 0.2 * (b - a);
    }
    let rel_tol = config.rel_tol.or(ov.and_then(|o| o.rel_tol));
    if rel_tol.is_some() || config.abs_tol.is_some() {
        let (old_rel, old_abs) = match ivp.step {
            StepControl::Adaptive { rel_tol, abs_tol } => (rel_tol, abs_tol),
            StepControl::Fixed { .. } => (1e-10, 1e-12),
        };
        ivp.step = StepControl::Adaptive {
            rel_tol: rel_tol.unwrap_or(old_rel),
            abs_tol: config.abs_tol.unwrap_or(old_abs),
        };
    }

    let traj = match integrate(&entry.system, &ivp) {
        Ok(t) => t,
        Err(e) => {
            report.pass = false;
            report.error = Some(e.to_string());
            report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
            return report;
        }
    };

    for exp in &entry.expected {
        let tolerance = ov.and_then(|o| o.tolerance).unwrap_or(exp.tolerance);
        let row = match exp.build(&traj).and_then(|cq| drift(&cq, &traj, tolerance)) {
            Ok(d) => DriftRow {
                constant_id: d.constant_id,
                kind: d.kind,
                t0: d.t_base,
                max_abs_drift: d.max_abs_drift,
                rel_drift: d.rel_drift,
                tolerance: d.tolerance,
                pass: d.pass,
            },
            Err(e) => {
                report.error = Some(format!("constant `{}`: {e}", exp.id));
                DriftRow {
                    constant_id: exp.id.to_string(),
                    kind: ConstantKind::Local,
                    t0: f64::NAN,
                    max_abs_drift: f64::NAN,
                    rel_drift: f64::NAN,
                    tolerance,
                    pass: false,
                }
            }
        };
        report.pass &= row.pass;
        report.drifts.push(row);
    }

    for check in &entry.checks {
        let ctx = CheckCtx {
            entry,
            system: &entry.system,
            traj: &traj,
            seed: config.seed ^ catalog::stable_hash(&entry.id) ^ catalog::stable_hash(&check.id),
        };
        let row = match check.run(&ctx) {
            Ok(out) => CheckRow {
                check_id: check.id.clone(),
                value: out.value,
                threshold: out.threshold,
                pass: out.pass,
                detail: out.detail,
            },
            Err(e) => CheckRow {
                check_id: check.id.clone(),
                value: f64::NAN,
                threshold: f64::NAN,
                pass: false,
                detail: format!("error: {e}"),
            },
        };
        report.pass &= row.pass;
        report.checks.push(row);
    }

    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// Run the configured entries (in parallel) and assemble the document.
pub fn run_verification(config: &RunConfig) -> Result<ReportDocument> {
    let start = Instant::now();
    let ids = config.resolve_entries()?;
    let entries: Vec<CatalogEntry> = ids
        .iter()
        .map(|id| config.build_entry(id))
        .collect::<Result<_>>()?;

    let reports: Vec<EntryReport> = entries
        .par_iter()
        .map(|entry| verify_entry(entry, config))
        .collect();

    let pass = reports.iter().all(|r| r.pass);
    Ok(ReportDocument {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        entries: reports,
        pass,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Render the document in the requested format.
pub fn render_report(doc: &ReportDocument, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(doc)
            .map_err(|e| Error::Report(e.to_string()))
            .map(|mut s| {
                s.push('\n');
                s
            }),
        ReportFormat::Csv => {
            let mut out =
                String::from("entry_id,constant_id,t0,max_abs_drift,rel_drift,tolerance,pass\n");
            for entry in &doc.entries {
                for d in &entry.drifts {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        entry.entry_id,
                        d.constant_id,
                        d.t0,
                        d.max_abs_drift,
                        d.rel_drift,
                        d.tolerance,
                        d.pass
                    ));
                }
            }
            Ok(out)
        }
    }
}

/// Write the report atomically: temp file in the target directory, then rename.
pub fn write_report(doc: &ReportDocument, path: &Path, format: ReportFormat) -> Result<()> {
    let rendered = render_report(doc, format)?;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("report"),
            std::process::id()
        )),
        None => PathBuf::from(format!(".report.tmp{}", std::process::id())),
    };
    std::fs::write(&tmp, rendered)
        .map_err(|e| Error::Report(format!("write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| Error::Report(format!("rename to {}: {e}", path.display())))?;
    Ok(())
}

/// Text table for `list`.
pub fn render_list(filter: Option<&str>) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>3} {:>7} {:>9}  {}\n",
        "id", "dim", "triples", "constants", "summary"
    ));
    for s in list_filtered(filter)? {
        out.push_str(&format!(
            "{:<28} {:>3} {:>7} {:>9}  {}\n",
            s.id, s.dim, s.triples, s.constants, s.summary
        ));
    }
    Ok(out)
}

/// JSON array for `list --json`.
pub fn render_list_json(filter: Option<&str>) -> Result<String> {
    serde_json::to_string_pretty(&list_filtered(filter)?).map_err(|e| Error::Report(e.to_string()))
}

fn list_filtered(filter: Option<&str>) -> Result<Vec<catalog::EntrySummary>> {
    Ok(catalog::list_entries()?
        .into_iter()
        .filter(|s| filter.is_none_or(|f| s.id.contains(f)))
        .collect())
}

/// Human-readable description of one entry for `explain`.
pub fn render_explain(id: &str) -> Result<String> {
    let entry = catalog::get_entry(id)?;
    let mut out = String::new();
    out.push_str(&format!("{}\n", entry.id));
    out.push_str(&format!("  {}\n", entry.summary));
    out.push_str(&format!("  notes: {}\n", entry.notes));
    let (a, b) = entry.default_ivp.interval;
    out.push_str(&format!(
        "  system: {} (dim {}), interval [{a}, {b}]\n",
        entry.system.name(),
        entry.dim()
    ));
    out.push_str("  triples:\n");
    for t in &entry.triples {
        let style = match t.triple.style() {
            crate::variation::TimeStyle::Tau => "tau",
            crate::variation::TimeStyle::Theta => "theta",
        };
        let inv = match t.invariance {
            Some(a) => format!("{a:?}"),
            None => "integral-constant only".to_string(),
        };
        out.push_str(&format!(
            "    {:<22} [{style}] tag={} invariance={inv}\n",
            t.name, t.tag
        ));
    }
    out.push_str("  expected constants:\n");
    for e in &entry.expected {
        out.push_str(&format!(
            "    {:<26} tol={:<8e} ({:?}) {}\n",
            e.id, e.tolerance, e.applicability, e.description
        ));
    }
    out.push_str(&format!("  checks: {}\n", entry.checks.len()));
    for c in &entry.checks {
        out.push_str(&format!("    {:<34} {}\n", c.id, c.description));
    }
    Ok(out)
}
