//! Serialization of metric reports and restoration traces.

use qcwarp_core::restore::TraceRecord;
use qcwarp_core::MetricReport;

/// JSON object {"mse": .., "psnr": .., "ssim": ..} with a trailing newline.
pub fn report_json(report: &MetricReport) -> String {
    format!(
        "{{\n  \"mse\": {},\n  \"psnr\": {},\n  \"ssim\": {}\n}}\n",
        report.mse, report.psnr, report.ssim
    )
}

/// CSV with a header row and one value row.
pub fn report_csv(report: &MetricReport) -> String {
    format!(
        "mse,psnr,ssim\n{},{},{}\n",
        report.mse, report.psnr, report.ssim
    )
}

/// CSV of the per-iteration restoration trace.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from("iteration,level,l_est,residual,fold_count,sup_norm\n");
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.iteration, r.level, r.l_est, r.residual, r.fold_count, r.sup_norm
        ));
    }
    out
}
