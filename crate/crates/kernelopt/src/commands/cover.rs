use anyhow::Result;
use kernelopt_core::space::build_cover;

use super::{Outcome, RunContext};
use crate::build;
use crate::config::ExperimentConfig;
use crate::output::{num, tag, write_rows, Outputs};

/// Builds and validates a ball cover per radius. An invalid cover is a
/// contract violation.
pub fn run(cfg: &ExperimentConfig, ctx: &RunContext<'_>) -> Result<Outcome> {
    let b = build::search_box(cfg)?;
    let radii = &cfg.cover.as_ref().expect("validated").radii;
    let mut out = Outputs::new(ctx.out, false)?;
    out.line("cover");
    out.line(format!(
        "box: lo = {:?}, hi = {:?}",
        b.lo().coords(),
        b.hi().coords()
    ));
    let mut summary = Vec::new();
    let mut violations = 0;
    for &r in radii {
        let cover = build_cover(&b, r)?;
        let valid = cover.validate();
        if !valid {
            violations += 1;
        }
        let mut header = vec!["index".to_string()];
        header.extend((0..b.dim()).map(|k| format!("c_{k}")));
        let rows: Vec<Vec<String>> = cover
            .centers()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                std::iter::once(i.to_string())
                    .chain(c.iter().map(|x| num(*x)))
                    .collect()
            })
            .collect();
        write_rows(&out.path(&format!("cover_{}.csv", tag(r))), &header, &rows)?;
        out.line(format!(
            "radius {}: {} centers, coverage {}",
            num(r),
            cover.len(),
            if valid {
                "validated"
            } else {
                "FAILED validation"
            }
        ));
        summary.push(vec![num(r), cover.len().to_string(), valid.to_string()]);
    }
    write_rows(
        &out.path("cover_summary.csv"),
        &["radius".into(), "centers".into(), "valid".into()],
        &summary,
    )?;
    Ok(Outcome {
        report: out.finish()?,
        violations,
    })
}
