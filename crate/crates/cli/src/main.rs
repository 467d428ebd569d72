//! `mamsynth`: synthesizes malignant mammogram training samples from benign
//! images via saliency-guided region selection, low-frequency spectral style
//! transfer, and Gaussian soft-mask blending.
//!
//! Exit codes: 0 success, 1 partial batch failure or verification mismatch
//! (reports are still written), 2 configuration or file errors. Diagnostics
//! go to stderr; data goes to files or stdout.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mamsynth::imaging::io::{load_image, load_saliency, save_image, save_pfm, save_saliency, BitDepth};
use mamsynth::imaging::RegionSpec;
use mamsynth::pipeline::{
    run_batch, seam_report, synthesize, verify_batch, AdaptationDirection, DonorAnnotation, MaskMode,
    OutputRecord, SampleProvenance, SynthesisConfig, SynthesisInputs, SynthesisMode,
};
use mamsynth::region::{pseudo_saliency, select_region, select_region_bruteforce, select_region_constrained, SelectionConstraints};
use mamsynth::seed::rng_from_seed;
use mamsynth::softmask::{centered_mask_params, gaussian_soft_mask, sample_mask_params};
use mamsynth::{Error, GrayImage};

/// Output-directory override for `batch`; takes precedence over `--out` so
/// schedulers can redirect a run without editing its flags.
const OUT_DIR_ENV: &str = "MAMSYNTH_OUT";

#[derive(Parser)]
#[command(
    name = "mamsynth",
    version,
    about = "Synthesize malignant mammogram samples from benign images",
    propagate_version = true
)]
struct Cli {
    /// Suppress per-sample progress lines.
    #[arg(long, global = true)]
    quiet: bool,

    /// Worker threads for batch processing (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum ModeArg {
    HardCutmix,
    FdaCutmix,
    SoftAdapted,
}

impl From<ModeArg> for SynthesisMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::HardCutmix => SynthesisMode::HardCutmix,
            ModeArg::FdaCutmix => SynthesisMode::FdaCutmix,
            ModeArg::SoftAdapted => SynthesisMode::SoftAdapted,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum DirectionArg {
    BenignToMalignantStyle,
    MalignantToBenignStyle,
}

impl From<DirectionArg> for AdaptationDirection {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::BenignToMalignantStyle => AdaptationDirection::BenignToMalignantStyle,
            DirectionArg::MalignantToBenignStyle => AdaptationDirection::MalignantToBenignStyle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
#[clap(rename_all = "snake_case")]
enum MaskModeArg {
    Sampled,
    Deterministic,
}

impl From<MaskModeArg> for MaskMode {
    fn from(m: MaskModeArg) -> Self {
        match m {
            MaskModeArg::Sampled => MaskMode::Sampled,
            MaskModeArg::Deterministic => MaskMode::Deterministic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthArg {
    #[clap(name = "8")]
    Eight,
    #[clap(name = "16")]
    Sixteen,
}

impl From<DepthArg> for BitDepth {
    fn from(d: DepthArg) -> Self {
        match d {
            DepthArg::Eight => BitDepth::Eight,
            DepthArg::Sixteen => BitDepth::Sixteen,
        }
    }
}

/// Shared synthesis flags (mirror `SynthesisConfig`).
#[derive(clap::Args)]
struct ConfigArgs {
    /// Final-stage variant.
    #[arg(long, value_enum, default_value = "soft_adapted")]
    mode: ModeArg,

    /// Low-frequency window fraction, in [0, 0.5).
    #[arg(long, default_value_t = 0.05)]
    beta: f64,

    /// Which patch receives the other's low-frequency style.
    #[arg(long, value_enum, default_value = "benign_to_malignant_style")]
    direction: DirectionArg,

    /// Soft-mask parameter policy.
    #[arg(long, value_enum, default_value = "sampled")]
    mask_mode: MaskModeArg,

    /// Master seed; required whenever the mask mode is `sampled`.
    #[arg(long)]
    seed: Option<u64>,

    /// Keep selected regions this many pixels away from image borders.
    #[arg(long, default_value_t = 0)]
    margin: usize,
}

impl ConfigArgs {
    fn to_config(&self) -> Result<SynthesisConfig, Error> {
        let seed = match (self.mask_mode, self.seed) {
            (MaskModeArg::Sampled, None) => {
                return Err(Error::InvalidParameter(
                    "--seed is required in sampled mask mode".into(),
                ))
            }
            (_, seed) => seed.unwrap_or(0),
        };
        let cfg = SynthesisConfig {
            mode: self.mode.into(),
            beta: self.beta,
            adaptation_direction: self.direction.into(),
            mask_mode: self.mask_mode.into(),
            seed,
            border_margin: self.margin,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Find the placement with maximal accumulated saliency; prints `i j score`.
    SelectRegion {
        /// Saliency map (PFM).
        #[arg(long)]
        saliency: PathBuf,
        /// Region height in pixels.
        #[arg(long)]
        height: usize,
        /// Region width in pixels.
        #[arg(long)]
        width: usize,
        /// Use the literal nested-loop search instead of the summed-area table.
        #[arg(long)]
        bruteforce: bool,
        /// Keep placements this many pixels away from the borders.
        #[arg(long, default_value_t = 0)]
        margin: usize,
    },

    /// Transfer the target's low-frequency amplitude into the source patch.
    Fda {
        /// Source patch: keeps its content (phase).
        #[arg(long)]
        source: PathBuf,
        /// Target patch: lends its low-frequency style. Must match the source size.
        #[arg(long)]
        target: PathBuf,
        /// Low-frequency window fraction, in [0, 0.5).
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long)]
        out: PathBuf,
        /// Output bit depth for PNG/PGM destinations.
        #[arg(long, value_enum, default_value = "16")]
        depth: DepthArg,
    },

    /// Emit a Gaussian soft mask as a float map (PFM).
    Mask {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        width: usize,
        /// Seed for sampled parameters; required unless --deterministic.
        #[arg(long)]
        seed: Option<u64>,
        /// Center the peak and fix sigma instead of sampling.
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        out: PathBuf,
    },

    /// Blurred-intensity stand-in saliency map for images without one.
    PseudoSaliency {
        #[arg(long)]
        image: PathBuf,
        /// Gaussian blur radius in pixels.
        #[arg(long, default_value_t = 8)]
        radius: usize,
        #[arg(long)]
        out: PathBuf,
    },

    /// Synthesize one sample; prints its provenance record to stdout.
    Synthesize {
        #[arg(long)]
        benign: PathBuf,
        /// Saliency map for the benign image (PFM).
        #[arg(long)]
        saliency: PathBuf,
        /// Optional breast mask; zero pixels mark background air.
        #[arg(long)]
        breast_mask: Option<PathBuf>,
        #[arg(long)]
        donor: PathBuf,
        /// Donor finding as `top,left,height,width` (0-based pixels).
        #[arg(long, value_parser = parse_bbox)]
        bbox: Bbox,
        /// Lesion kind recorded as metadata.
        #[arg(long, default_value = "mass")]
        lesion: String,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Output bit depth for PNG/PGM destinations.
        #[arg(long, value_enum, default_value = "16")]
        depth: DepthArg,
    },

    /// Synthesize one sample per benign manifest entry (donors round-robin).
    Batch {
        /// JSON Lines dataset manifest.
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory; the MAMSYNTH_OUT environment variable overrides it.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Re-derive every sample of a batch directory from its provenance and
    /// compare bytes.
    Verify {
        /// Batch output directory (holds manifest.jsonl).
        #[arg(long)]
        out: PathBuf,
    },

    /// Seam-gradient comparison table across the three modes.
    Report {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy)]
struct Bbox([usize; 4]);

fn parse_bbox(raw: &str) -> Result<Bbox, String> {
    let parts: Vec<&str> = raw.split(',').collect();
    if parts.len() != 4 {
        return Err("expected top,left,height,width".into());
    }
    let mut vals = [0usize; 4];
    for (slot, part) in vals.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("`{part}` is not a pixel count"))?;
    }
    Ok(Bbox(vals))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::SelectRegion {
            saliency,
            height,
            width,
            bruteforce,
            margin,
        } => {
            let map = load_saliency(&saliency)?;
            let result = if bruteforce {
                if margin != 0 {
                    return Err(Error::InvalidParameter(
                        "--margin is not supported with --bruteforce".into(),
                    ));
                }
                select_region_bruteforce(&map, height, width)?
            } else if margin != 0 {
                let constraints = SelectionConstraints {
                    margin,
                    ..Default::default()
                };
                select_region_constrained(&map, height, width, &constraints)?
            } else {
                select_region(&map, height, width)?
            };
            println!("{} {} {}", result.region.top, result.region.left, result.score);
            Ok(ExitCode::SUCCESS)
        }

        Command::Fda {
            source,
            target,
            beta,
            out,
            depth,
        } => {
            let source = load_image(&source)?;
            let target = load_image(&target)?;
            let adapted = mamsynth::fourier::spectral_transfer(&source, &target, beta)?;
            save_image(&adapted, &out, depth.into())?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Mask {
            height,
            width,
            seed,
            deterministic,
            out,
        } => {
            let params = if deterministic {
                centered_mask_params(height, width)?
            } else {
                let seed = seed.ok_or_else(|| {
                    Error::InvalidParameter("--seed is required unless --deterministic".into())
                })?;
                sample_mask_params(height, width, &mut rng_from_seed(seed))?
            };
            let mask = gaussian_soft_mask(&params);
            let weights: Vec<f32> = mask.weights().iter().map(|&w| w as f32).collect();
            save_pfm(&out, mask.height(), mask.width(), &weights)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::PseudoSaliency { image, radius, out } => {
            let img = load_image(&image)?;
            let map = pseudo_saliency(&img, radius);
            save_saliency(&map, &out)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Synthesize {
            benign,
            saliency,
            breast_mask,
            donor,
            bbox,
            lesion,
            config,
            out,
            depth,
        } => {
            let cfg = config.to_config()?;
            let benign_img = load_image(&benign)?;
            let saliency_map = load_saliency(&saliency)?;
            let mask_img: Option<GrayImage> = match &breast_mask {
                Some(p) => Some(load_image(p)?),
                None => None,
            };
            let donor_img = load_image(&donor)?;
            let annotation = DonorAnnotation {
                donor_id: file_stem(&donor),
                bbox: RegionSpec::new(bbox.0[0], bbox.0[1], bbox.0[2], bbox.0[3]),
                lesion,
            };
            let inputs = SynthesisInputs {
                benign_id: &file_stem(&benign),
                benign: &benign_img,
                saliency: &saliency_map,
                breast_mask: mask_img.as_ref(),
                donor: &donor_img,
                annotation: &annotation,
            };
            let sample = synthesize(&inputs, &cfg)?;
            save_image(&sample.image, &out, depth.into())?;
            let record = OutputRecord {
                id: file_stem(&out),
                image: out.to_string_lossy().into_owned(),
                label: sample.label,
                provenance: SampleProvenance {
                    synthesis: sample.provenance,
                    benign_image: benign.to_string_lossy().into_owned(),
                    saliency: saliency.to_string_lossy().into_owned(),
                    breast_mask: breast_mask.map(|p| p.to_string_lossy().into_owned()),
                    donor_image: donor.to_string_lossy().into_owned(),
                    donor_bbox: bbox.0,
                },
            };
            println!("{}", serde_json::to_string(&record).expect("record serializes"));
            Ok(ExitCode::SUCCESS)
        }

        Command::Batch {
            manifest,
            config,
            out,
        } => {
            let cfg = config.to_config()?;
            let out_dir = resolve_out_dir(out)?;
            let quiet = cli.quiet;
            let report = run_batch(&manifest, &cfg, &out_dir, |status| {
                if !quiet {
                    if status.ok {
                        eprintln!("[{}] {} -> {}", status.index, status.id, status.detail);
                    } else {
                        eprintln!("[{}] {} FAILED: {}", status.index, status.id, status.detail);
                    }
                }
            })?;
            eprintln!(
                "batch: {} samples, {} failures -> {}",
                report.summary.count,
                report.summary.failed,
                out_dir.display()
            );
            if report.summary.failed > 0 {
                Ok(ExitCode::from(1))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }

        Command::Verify { out } => {
            let outcome = verify_batch(&out)?;
            for mismatch in &outcome.mismatches {
                eprintln!("mismatch: {mismatch}");
            }
            eprintln!(
                "verify: {} checked, {} mismatches",
                outcome.checked,
                outcome.mismatches.len()
            );
            if outcome.mismatches.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }

        Command::Report { manifest, config } => {
            let cfg = config.to_config()?;
            let stats = seam_report(&manifest, &cfg)?;
            println!("{:<14} {:>8} {:>20}", "mode", "samples", "mean_seam_gradient");
            for row in stats {
                match row.mean_seam_gradient {
                    Some(m) => println!("{:<14} {:>8} {:>20.6}", row.mode.as_str(), row.samples, m),
                    None => println!("{:<14} {:>8} {:>20}", row.mode.as_str(), row.samples, "n/a"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn resolve_out_dir(flag: Option<PathBuf>) -> Result<PathBuf, Error> {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => {
            if flag.is_some() {
                eprintln!("note: {OUT_DIR_ENV} overrides --out");
            }
            Ok(PathBuf::from(dir))
        }
        _ => flag.ok_or_else(|| {
            Error::InvalidParameter(format!("--out (or {OUT_DIR_ENV}) is required for batch runs"))
        }),
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}
