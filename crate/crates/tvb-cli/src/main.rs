//! Command-line front end: validate project files, compute graded section
//! spaces, decide equivariant splitting, run toric downgrades and cotangent
//! constructions, and render slices as SVG.
//!
//! Exit codes: 0 on success, 1 on failed validation or a failed check,
//! 2 on unreadable or malformed input.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use tvb_core::apps::klyachko::{cotangent_support_map, toric_downgrade_at};
use tvb_core::apps::sections::{global_sections, sections_bundle_on_y, weight_box};
use tvb_core::apps::split::{split_check, SplitResult};
use tvb_core::curve::{fmt_ratfunc, PointP1};
use tvb_core::project::{load_str, save_string, Project};
use tvb_core::qq::{parse_qq, RatVec};
use tvb_core::support::fmt_weight;

#[derive(Parser)]
#[command(name = "tvb", about = "Equivariant vector bundles on complexity-one T-varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the fan and support map axioms; exit 0 only if everything holds.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Graded global sections, per weight or over the whole character box.
    Sections {
        file: PathBuf,
        /// A single weight, written as comma-separated rationals.
        #[arg(long)]
        weight: Option<String>,
        /// Sweep the inflated bounding box of all characters.
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Decide equivariant splitting into line bundles.
    Split {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Downgrade the embedded toric bundle data to a support map project.
    Downgrade {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// The point below the positive half of the projection.
        #[arg(long, default_value = "0")]
        plus: String,
        /// The point below the negative half.
        #[arg(long, default_value = "inf")]
        minus: String,
    },
    /// Write the cotangent support map of the fan in the file.
    Cotangent {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render the slice at a point as deterministic SVG.
    Render {
        file: PathBuf,
        #[arg(long, default_value = "0")]
        point: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_project(path: &PathBuf) -> Result<Project, (u8, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (2u8, format!("cannot read {}: {e}", path.display())))?;
    load_str(&text).map_err(|e| (2u8, format!("cannot parse {}: {e}", path.display())))
}

fn parse_weight(s: &str, dim: usize) -> Result<RatVec, (u8, String)> {
    let coords: Result<Vec<_>, _> = s.split(',').map(|c| parse_qq(c.trim())).collect();
    match coords {
        Ok(c) if c.len() == dim => Ok(RatVec::new(c)),
        Ok(c) => Err((2, format!("weight has {} coordinates, expected {dim}", c.len()))),
        Err(e) => Err((2, format!("bad weight {s:?}: {e}"))),
    }
}

fn run() -> Result<u8, (u8, String)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { file, format } => {
            let project = read_project(&file)?;
            let Some(support) = &project.support else {
                let report = project.fan.validate();
                return emit_validation(report.failures, report.warnings, format);
            };
            let report = support.validate();
            emit_validation(report.failures, report.warnings, format)
        }
        Command::Sections {
            file,
            weight,
            all,
            format,
        } => {
            let project = read_project(&file)?;
            let support = project
                .support
                .as_ref()
                .ok_or((2u8, "file carries no bundle data".to_string()))?;
            let weights: Vec<RatVec> = if all {
                weight_box(support)
            } else if let Some(w) = weight {
                vec![parse_weight(&w, support.fan.dim)?]
            } else {
                return Err((2, "pass --weight or --all".into()));
            };
            let mut rows = Vec::new();
            for u in &weights {
                let space = global_sections(support, u)
                    .map_err(|e| (1u8, format!("sections at {}: {e}", fmt_weight(u))))?;
                let cross = sections_bundle_on_y(support, u)
                    .map_err(|e| (1u8, format!("curve-side sections at {}: {e}", fmt_weight(u))))?;
                if space.dim() != cross.dim {
                    return Err((
                        1,
                        format!(
                            "weight {}: direct solver gives {}, curve side gives {}",
                            fmt_weight(u),
                            space.dim(),
                            cross.dim
                        ),
                    ));
                }
                rows.push((u.clone(), space));
            }
            match format {
                Format::Text => {
                    let mut total = 0;
                    for (u, space) in &rows {
                        if space.dim() > 0 || !all {
                            println!("weight ({}) -> dimension {}", fmt_weight(u), space.dim());
                            for b in &space.basis {
                                let coords: Vec<String> = b.iter().map(fmt_ratfunc).collect();
                                println!("  [{}]", coords.join(", "));
                            }
                        }
                        total += space.dim();
                    }
                    println!("total dimension {total}");
                }
                Format::Json => {
                    let entries: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(u, space)| {
                            serde_json::json!({
                                "weight": fmt_weight(u),
                                "dimension": space.dim(),
                                "basis": space
                                    .basis
                                    .iter()
                                    .map(|b| b.iter().map(fmt_ratfunc).collect::<Vec<_>>())
                                    .collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    let total: usize = rows.iter().map(|(_, s)| s.dim()).sum();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&serde_json::json!({
                            "weights": entries,
                            "total": total,
                        }))
                        .expect("serializable")
                    );
                }
            }
            Ok(0)
        }
        Command::Split { file, format } => {
            let project = read_project(&file)?;
            let support = project
                .support
                .as_ref()
                .ok_or((2u8, "file carries no bundle data".to_string()))?;
            let result = split_check(support).map_err(|e| (1u8, e.to_string()))?;
            match format {
                Format::Text => match &result {
                    SplitResult::Split { witness } => {
                        println!("split");
                        for j in 0..witness.cols {
                            let col: Vec<String> =
                                (0..witness.rows).map(|i| fmt_ratfunc(&witness[(i, j)])).collect();
                            println!("  line {}: [{}]", j + 1, col.join(", "));
                        }
                    }
                    SplitResult::NotSplit { reason } => {
                        println!("not split");
                        println!("  {reason}");
                    }
                    SplitResult::Unknown { candidates_tried } => {
                        println!("unknown (searched {candidates_tried} candidate frames)");
                    }
                },
                Format::Json => {
                    let value = match &result {
                        SplitResult::Split { witness } => serde_json::json!({
                            "result": "split",
                            "witness": (0..witness.cols)
                                .map(|j| (0..witness.rows)
                                    .map(|i| fmt_ratfunc(&witness[(i, j)]))
                                    .collect::<Vec<_>>())
                                .collect::<Vec<_>>(),
                        }),
                        SplitResult::NotSplit { reason } => {
                            serde_json::json!({"result": "not split", "reason": reason})
                        }
                        SplitResult::Unknown { candidates_tried } => serde_json::json!({
                            "result": "unknown",
                            "candidates_tried": candidates_tried,
                        }),
                    };
                    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
                }
            }
            Ok(0)
        }
        Command::Downgrade {
            file,
            out,
            plus,
            minus,
        } => {
            let project = read_project(&file)?;
            let k = project
                .klyachko
                .as_ref()
                .ok_or((2u8, "file carries no toric bundle data".to_string()))?;
            let p_plus = PointP1::parse(&plus).map_err(|e| (2u8, format!("bad --plus: {e}")))?;
            let p_minus = PointP1::parse(&minus).map_err(|e| (2u8, format!("bad --minus: {e}")))?;
            let dg = toric_downgrade_at(k, &p_plus, &p_minus).map_err(|e| (1u8, e.to_string()))?;
            let report = dg.support.validate();
            if !report.is_valid() {
                return Err((1, format!("downgrade failed validation: {:?}", report.failures)));
            }
            let out_project = Project {
                fan: dg.fan,
                support: Some(dg.support),
                klyachko: None,
            };
            let text = save_string(&out_project).map_err(|e| (1u8, e.to_string()))?;
            std::fs::write(&out, text).map_err(|e| (1u8, e.to_string()))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Cotangent { file, out } => {
            let project = read_project(&file)?;
            let support = cotangent_support_map(&project.fan).map_err(|e| (1u8, e.to_string()))?;
            let report = support.validate();
            if !report.is_valid() {
                return Err((1, format!("cotangent failed validation: {:?}", report.failures)));
            }
            let out_project = Project {
                fan: project.fan.clone(),
                support: Some(support),
                klyachko: None,
            };
            let text = save_string(&out_project).map_err(|e| (1u8, e.to_string()))?;
            std::fs::write(&out, text).map_err(|e| (1u8, e.to_string()))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Render { file, point, out } => {
            let project = read_project(&file)?;
            let p = PointP1::parse(&point).map_err(|e| (2u8, format!("bad --point: {e}")))?;
            let svg = tvb_core::render::render_slice(&project.fan, &p)
                .map_err(|e| (1u8, e.to_string()))?;
            std::fs::write(&out, svg).map_err(|e| (1u8, e.to_string()))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn emit_validation(
    failures: Vec<String>,
    warnings: Vec<String>,
    format: Format,
) -> Result<u8, (u8, String)> {
    match format {
        Format::Text => {
            for w in &warnings {
                println!("warning: {w}");
            }
            if failures.is_empty() {
                println!("valid");
            } else {
                for f in &failures {
                    println!("failure: {f}");
                }
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "valid": failures.is_empty(),
                    "failures": failures,
                    "warnings": warnings,
                }))
                .expect("serializable")
            );
        }
    }
    Ok(if failures.is_empty() { 0 } else { 1 })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
