//! Configuration files, figure CSV export and run manifests.
//!
//! CSV files carry one header row; floats use 17 significant digits so that
//! reruns can be compared byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::montecarlo::{ExperimentConfig, ExperimentSummary};

pub const FIG1_HEADER: &str = "instance_index,f11_opt,f12_opt,on_edge,is_global,alpha";
pub const FIG2_HEADER: &str = "noise_w,pct_global,ci_low,ci_high";
pub const FIG3_HEADER: &str = "noise_w,pct_edge_conditional,n_edge_instances";
pub const FIG4_HEADER: &str = "noise_w,mean_degradation_pct";
pub const FIG5_HEADER: &str =
    "noise_w,alpha_global_mean,alpha_global_std,alpha_subopt_mean,alpha_subopt_std";

pub const FIGURE_FILES: [&str; 5] = ["fig1.csv", "fig2.csv", "fig3.csv", "fig4.csv", "fig5.csv"];
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Float with 17 significant digits; undefined values print as `NaN`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    fmt_f64(v.unwrap_or(f64::NAN))
}

/// Reads a JSON experiment config. Missing fields take their defaults; unknown
/// fields and type errors are reported with the offending field path.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::ConfigParse {
            path: field,
            message,
        } => Error::ConfigParse {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig =
        serde_path_to_error::deserialize(de).map_err(|e| Error::ConfigParse {
            path: match e.path().to_string() {
                p if p == "." => "<root>".to_string(),
                p => p,
            },
            message: e.inner().to_string(),
        })?;
    config.validate()?;
    Ok(config)
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Renders the five figure tables as `(file name, contents)`.
pub fn figure_tables(summary: &ExperimentSummary) -> Vec<(&'static str, String)> {
    let fig1 = csv(
        FIG1_HEADER,
        summary.scatter.iter().map(|p| {
            vec![
                p.instance_index.to_string(),
                fmt_f64(p.f11_opt),
                fmt_f64(p.f12_opt),
                p.on_edge.to_string(),
                p.is_global.to_string(),
                fmt_f64(p.alpha),
            ]
        }),
    );
    let fig2 = csv(
        FIG2_HEADER,
        summary.levels.iter().map(|l| {
            vec![
                fmt_f64(l.noise_w),
                fmt_f64(l.pct_global),
                fmt_f64(l.ci_low),
                fmt_f64(l.ci_high),
            ]
        }),
    );
    let fig3 = csv(
        FIG3_HEADER,
        summary.levels.iter().map(|l| {
            vec![
                fmt_f64(l.noise_w),
                fmt_opt(l.pct_edge_conditional),
                l.n_edge_instances.to_string(),
            ]
        }),
    );
    let fig4 = csv(
        FIG4_HEADER,
        summary
            .levels
            .iter()
            .map(|l| vec![fmt_f64(l.noise_w), fmt_f64(l.mean_degradation_pct)]),
    );
    let fig5 = csv(
        FIG5_HEADER,
        summary.levels.iter().map(|l| {
            vec![
                fmt_f64(l.noise_w),
                fmt_opt(l.alpha_global.mean),
                fmt_opt(l.alpha_global.std),
                fmt_opt(l.alpha_subopt.mean),
                fmt_opt(l.alpha_subopt.std),
            ]
        }),
    );
    FIGURE_FILES
        .into_iter()
        .zip([fig1, fig2, fig3, fig4, fig5])
        .collect()
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes fig1.csv through fig5.csv into `dir`.
pub fn emit_figures(summary: &ExperimentSummary, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    figure_tables(summary)
        .into_iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            write_atomic(&path, body.as_bytes())?;
            Ok(path)
        })
        .collect()
}

pub fn write_summary(summary: &ExperimentSummary, path: &Path) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(summary)?.as_bytes())
}

pub fn read_summary(path: &Path) -> Result<ExperimentSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChecksum {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce and verify a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub base_seed: u64,
    pub config: ExperimentConfig,
    pub outputs: Vec<FileChecksum>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, outputs: &[PathBuf]) -> Result<Self> {
        let outputs = outputs
            .iter()
            .map(|p| {
                Ok(FileChecksum {
                    file: p
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            base_seed: config.base_seed,
            config: config.clone(),
            outputs,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        write_atomic(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Figures, summary and manifest for a finished run.
pub fn write_run(summary: &ExperimentSummary, dir: &Path) -> Result<RunManifest> {
    let mut outputs = emit_figures(summary, dir)?;
    let summary_path = dir.join(SUMMARY_FILE);
    write_summary(summary, &summary_path)?;
    outputs.push(summary_path);
    let manifest = RunManifest::new(&summary.config, &outputs)?;
    manifest.write(dir)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::run_experiment;
    use crate::optimize::GridSpec;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            n_instances: 4,
            noise_levels_w: vec![5e-11, 5e-10, 5e-9],
            grid: GridSpec {
                grid_points_2d: 11,
                grid_points_edge: 51,
                refine: false,
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 5e-11, 0.9, 1e300] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn headers_and_row_counts() {
        let s = run_experiment(&tiny()).unwrap();
        let tables = figure_tables(&s);
        let headers = [
            FIG1_HEADER,
            FIG2_HEADER,
            FIG3_HEADER,
            FIG4_HEADER,
            FIG5_HEADER,
        ];
        for ((name, body), header) in tables.iter().zip(headers) {
            let mut lines = body.lines();
            assert_eq!(lines.next(), Some(header), "{name}");
            let cols = header.split(',').count();
            let rows: Vec<&str> = lines.collect();
            assert!(rows.iter().all(|r| r.split(',').count() == cols));
            let expected = if *name == "fig1.csv" { 4 } else { 3 };
            assert_eq!(rows.len(), expected, "{name}");
        }
    }

    #[test]
    fn config_defaults_and_paths() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let c =
            parse_config(r#"{"n_instances": 5, "scenario": {"radio": {"noise_power_w": 1e-10}}}"#)
                .unwrap();
        assert_eq!(c.n_instances, 5);
        assert_eq!(c.scenario.radio.noise_power_w, 1e-10);

        let err =
            parse_config(r#"{"scenario": {"path_loss": {"exponent": "three"}}}"#).unwrap_err();
        assert!(
            err.to_string().contains("scenario.path_loss.exponent"),
            "{err}"
        );
        let err = parse_config(r#"{"grid": {"points": 3}}"#).unwrap_err();
        assert!(err.to_string().contains("grid"), "{err}");
        assert!(matches!(
            parse_config(r#"{"n_instances": 0}"#),
            Err(Error::InvalidConfig(_))
        ));
        let c = parse_config(r#"{"scenario": {"path_loss": {"reference_gain": {"value": 1.0}}}}"#)
            .unwrap();
        assert_eq!(c.scenario.path_loss_params().reference_gain, 1.0);
    }

    #[test]
    fn run_writes_manifest_with_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_experiment(&tiny()).unwrap();
        let manifest = write_run(&s, dir.path()).unwrap();
        assert_eq!(manifest.outputs.len(), 6);
        let read = RunManifest::read(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(read, manifest);
        for f in &read.outputs {
            assert_eq!(sha256_file(&dir.path().join(&f.file)).unwrap(), f.sha256);
        }
        let back = read_summary(&dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(figure_tables(&back), figure_tables(&s));
        assert!(!dir.path().join(".manifest.json.tmp").exists());
    }

    #[test]
    fn manifest_config_reproduces_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_experiment(&tiny()).unwrap();
        let manifest = write_run(&s, dir.path()).unwrap();
        let again = run_experiment(&manifest.config).unwrap();
        assert_eq!(figure_tables(&again), figure_tables(&s));
    }
}
