//! Output-directory writing. All files for a run are written from this
//! single code path: results.csv (per trial), ages.csv (per age),
//! summary.txt, manifest.txt and optionally plot.svg.

use sha2::{Digest, Sha256};
use std::path::PathBuf;
use xalab_core::plot::{render_xa_svg, PlotSpec};
use xalab_core::report::{ages_table, manifest_text, results_table, summary_text};
use xalab_core::xa::XAResult;

pub struct RunFiles {
    pub out_dir: PathBuf,
    pub plot: bool,
    pub title: String,
}

pub fn digest_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_run_outputs(
    result: &XAResult,
    files: &RunFiles,
    mut manifest: Vec<(String, String)>,
) -> Result<(), String> {
    std::fs::create_dir_all(&files.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", files.out_dir.display()))?;
    let write = |name: &str, body: &str| -> Result<(), String> {
        let path = files.out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
    };

    let results = results_table(result);
    let ages = ages_table(result);
    let summary = summary_text(result);
    write("results.csv", &results)?;
    write("ages.csv", &ages)?;
    write("summary.txt", &summary)?;

    manifest.push(("results_digest".into(), digest_hex(results.as_bytes())));
    manifest.push(("ages_digest".into(), digest_hex(ages.as_bytes())));

    if files.plot {
        let spec = PlotSpec::from_result(result, files.title.as_str());
        let svg = render_xa_svg(&spec).map_err(|e| e.to_string())?;
        write("plot.svg", &svg)?;
        manifest.push(("plot_digest".into(), digest_hex(svg.as_bytes())));
    }
    write("manifest.txt", &manifest_text(&manifest))?;
    Ok(())
}
