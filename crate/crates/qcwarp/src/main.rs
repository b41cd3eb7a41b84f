//! qcwarp: quasiconformal image warping toolkit.
//!
//! Subcommands cover the full pipeline: synthesize distorted data
//! (`simulate`), inspect and reconstruct deformation maps (`compute-mu`,
//! `solve`, `viz-grid`), warp images (`warp`), restore distorted images
//! against a reference (`restore`), and score results (`evaluate`).
//! All commands are deterministic given their inputs and seeds.
//!
//! Exit codes: 0 success, 2 bad input, 3 I/O failure, 4 numerical
//! inadmissibility, 5 fold (non-bijective map).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand};

use qcwarp::core::distort::make_pair;
use qcwarp::core::lbs::{assemble, solve, BoundaryCondition};
use qcwarp::core::restore::{restore_pair, RestoreConfig};
use qcwarp::core::{beltrami, metrics, warp, DistortionSpec};
use qcwarp::error::{CliError, CliResult};
use qcwarp::files::{read_field, read_map, write_field, write_map};
use qcwarp::image_io::{read_image, write_image, BitDepth};
use qcwarp::manifest::{indexed_path, load_specs};
use qcwarp::render::viz_grid;
use qcwarp::report::{report_csv, report_json, trace_csv};

#[derive(Parser)]
#[command(
    name = "qcwarp",
    version,
    about = "Quasiconformal image warping toolkit"
)]
struct Cli {
    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a synthetic distortion spec (or batch manifest) to an image.
    Simulate {
        /// Clean input image (PNG or binary PGM/PPM).
        image_in: PathBuf,
        /// Distortion spec JSON: one object, or an array for a batch.
        spec_json: PathBuf,
        /// Distorted output image; batches insert _NNN before the extension.
        image_out: PathBuf,
        /// Ground-truth map output (QCM1); batches insert _NNN as well.
        map_out: PathBuf,
        /// Override the spec seed (batch entry i uses seed + i).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compute the Beltrami coefficient of a deformation map.
    ComputeMu {
        /// Input map (QCM1).
        map_in: PathBuf,
        /// Output coefficient field (QCB1).
        mu_out: PathBuf,
    },
    /// Reconstruct the map of a coefficient field (identity boundary).
    Solve {
        /// Input coefficient field (QCB1).
        mu_in: PathBuf,
        /// Output map (QCM1).
        map_out: PathBuf,
    },
    /// Backward-warp an image by a deformation map.
    Warp {
        image_in: PathBuf,
        /// Map (QCM1) on the image's pixel grid.
        map_in: PathBuf,
        image_out: PathBuf,
        /// Refuse maps with flipped faces (exit 5).
        #[arg(long)]
        require_bijective: bool,
    },
    /// Restore a distorted image toward a reference image.
    Restore {
        distorted_in: PathBuf,
        reference_in: PathBuf,
        /// Restored output image.
        restored_out: PathBuf,
        /// Restoration parameters as JSON (defaults when omitted).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Recovered map output (QCM1).
        #[arg(long)]
        map_out: Option<PathBuf>,
        /// Recovered coefficient field output (QCB1).
        #[arg(long)]
        mu_out: Option<PathBuf>,
        /// Optimization trace output (CSV).
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Image-quality metrics (MSE, PSNR, SSIM) of an image pair.
    Evaluate {
        image_a: PathBuf,
        image_b: PathBuf,
        /// Report output; .csv writes CSV, anything else JSON.
        report_out: PathBuf,
    },
    /// Render the deformed grid of a map as a line drawing.
    VizGrid {
        map_in: PathBuf,
        image_out: PathBuf,
        /// Draw every n-th grid line.
        #[arg(long, default_value_t = 4)]
        stride: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcwarp: {e}");
            ExitCode::from(e.category.exit_code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Simulate {
            image_in,
            spec_json,
            image_out,
            map_out,
            seed,
        } => simulate(&image_in, &spec_json, &image_out, &map_out, seed, quiet),
        Command::ComputeMu { map_in, mu_out } => {
            let map = read_map(&map_in)?;
            let field = beltrami::compute_beltrami(&map)?;
            write_field(&mu_out, &field)?;
            info(quiet, format!("mu sup norm {}", beltrami::sup_norm(&field)));
            Ok(())
        }
        Command::Solve { mu_in, map_out } => {
            let field = read_field(&mu_in)?;
            let mesh = field.mesh().clone();
            let system = assemble(&mesh, &field, &BoundaryCondition::identity(&mesh))?;
            let map = solve(&system)?;
            write_map(&map_out, &map)?;
            Ok(())
        }
        Command::Warp {
            image_in,
            map_in,
            image_out,
            require_bijective,
        } => {
            let (image, depth) = read_image(&image_in)?;
            let map = read_map(&map_in)?;
            let warped = warp::warp_image(&image, &map, require_bijective)?;
            write_image(&image_out, &warped, depth)
        }
        Command::Restore {
            distorted_in,
            reference_in,
            restored_out,
            config,
            map_out,
            mu_out,
            trace_out,
        } => {
            let (distorted, depth) = read_image(&distorted_in)?;
            let (reference, _) = read_image(&reference_in)?;
            let config = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))?;
                    serde_json::from_str::<RestoreConfig>(&text)?
                }
                None => RestoreConfig::default(),
            };
            let result = restore_pair(&distorted, &reference, &config)?;
            write_image(&restored_out, &result.restored, depth)?;
            if let Some(path) = map_out {
                write_map(&path, &result.map)?;
            }
            if let Some(path) = mu_out {
                write_field(&path, &result.field)?;
            }
            if let Some(path) = trace_out {
                std::fs::write(&path, trace_csv(&result.trace))
                    .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
            }
            let last = result.trace.last().expect("non-empty trace");
            info(
                quiet,
                format!(
                    "restored in {} accepted iterations, final intensity residual {}",
                    result.trace.len() - 1,
                    last.l_est
                ),
            );
            Ok(())
        }
        Command::Evaluate {
            image_a,
            image_b,
            report_out,
        } => {
            let (a, _) = read_image(&image_a)?;
            let (b, _) = read_image(&image_b)?;
            let report = metrics::evaluate(&a, &b)?;
            let text = if report_out.extension().and_then(|e| e.to_str()) == Some("csv") {
                report_csv(&report)
            } else {
                report_json(&report)
            };
            std::fs::write(&report_out, text)
                .map_err(|e| CliError::io(format!("writing {}: {e}", report_out.display())))?;
            info(
                quiet,
                format!(
                    "mse {} psnr {} ssim {}",
                    report.mse, report.psnr, report.ssim
                ),
            );
            Ok(())
        }
        Command::VizGrid {
            map_in,
            image_out,
            stride,
        } => {
            let map = read_map(&map_in)?;
            let img = viz_grid(&map, stride);
            write_image(&image_out, &img, BitDepth::Eight)
        }
    }
}

fn simulate(
    image_in: &Path,
    spec_json: &Path,
    image_out: &Path,
    map_out: &Path,
    seed: Option<u64>,
    quiet: bool,
) -> CliResult<()> {
    let (image, depth) = read_image(image_in)?;
    let set = load_specs(spec_json)?;
    let jobs: Vec<(usize, DistortionSpec)> = set
        .specs
        .iter()
        .enumerate()
        .map(|(i, &spec)| {
            let mut spec = spec;
            if let Some(base) = seed {
                spec.seed = base + i as u64;
            }
            (i, spec)
        })
        .collect();

    if !set.batch {
        let (_, spec) = jobs[0];
        let (distorted, truth) = make_pair(&image, &spec)?;
        write_image(image_out, &distorted, depth)?;
        write_map(map_out, &truth)?;
        info(
            quiet,
            format!("wrote {} and {}", image_out.display(), map_out.display()),
        );
        return Ok(());
    }

    let workers = thread_cap()?.min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let errors: Vec<CliError> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for _ in 0..workers {
            let image = &image;
            let jobs = &jobs;
            let next = &next;
            handles.push(scope.spawn(move || -> CliResult<()> {
                loop {
                    let k = next.fetch_add(1, Ordering::Relaxed);
                    if k >= jobs.len() {
                        return Ok(());
                    }
                    let (index, spec) = jobs[k];
                    let (distorted, truth) = make_pair(image, &spec)?;
                    write_image(&indexed_path(image_out, index), &distorted, depth)?;
                    write_map(&indexed_path(map_out, index), &truth)?;
                }
            }));
        }
        handles
            .into_iter()
            .filter_map(|h| h.join().expect("worker panicked").err())
            .collect()
    });
    if let Some(e) = errors.into_iter().next() {
        return Err(e);
    }
    info(quiet, format!("wrote {} pairs", jobs.len()));
    Ok(())
}

/// Worker-thread cap: QCWARP_THREADS if set, else available parallelism.
fn thread_cap() -> CliResult<usize> {
    match std::env::var("QCWARP_THREADS") {
        Ok(text) => text
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| {
                CliError::input(format!(
                    "QCWARP_THREADS must be a positive integer, got {text:?}"
                ))
            }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn info(quiet: bool, message: String) {
    if !quiet {
        println!("{message}");
    }
}
