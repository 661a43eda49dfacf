use std::path::{Path, PathBuf};

use formulary_core::canon::{canonicalize, generate_report, CanonicalizationConfig, ReportEntry};
use formulary_core::latex::parse_latex;
use formulary_core::mathml::{parse_mathml, serialize_node, Formula};

use crate::{Failure, NormalizeArgs};

const EXTENSIONS: [&str; 3] = ["xml", "mml", "tex"];

fn has_known_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e))
}

/// Expands directories to their formula files, sorted by name.
fn collect(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let entries = std::fs::read_dir(input).map_err(|e| Failure::data(format!("{}: {e}", input.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && has_known_extension(p))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(Failure::data("no formula files found"));
    }
    Ok(files)
}

fn read_formula(path: &Path) -> Result<Formula, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "tex") {
        parse_latex(text.trim()).map_err(|e| {
            Failure::data(format!(
                "{}: invalid TeX at {}: {}",
                path.display(),
                e.position,
                e.message
            ))
        })
    } else {
        parse_mathml(&text).map_err(|e| {
            Failure::data(format!(
                "{}: invalid MathML at byte {}: {}",
                path.display(),
                e.position,
                e.message
            ))
        })
    }
}

pub fn run(args: NormalizeArgs) -> Result<(), Failure> {
    let config = match args.rules {
        Some(rules) => CanonicalizationConfig::only(rules),
        None => CanonicalizationConfig::default(),
    };
    let files = collect(&args.inputs)?;
    let single = files.len() == 1;
    let mut entries = Vec::with_capacity(files.len());
    for path in files {
        let before = read_formula(&path)?;
        let after = canonicalize(&before, &config);
        let markup = serialize_node(&after.root);
        let label = path
            .file_name()
            .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        if single {
            println!("{markup}");
        } else {
            println!("{label}\t{markup}");
        }
        entries.push(ReportEntry { label, before, after });
    }
    if let Some(report) = args.report {
        let html = generate_report(&entries).map_err(|e| Failure::data(e.to_string()))?;
        std::fs::write(&report, html).map_err(|e| Failure::data(format!("{}: {e}", report.display())))?;
        log::info!("wrote {}", report.display());
    }
    Ok(())
}
