//! Command-line frontend: single-image detection, corpus evaluation, and
//! synthetic corpus generation.
//!
//! The logic lives here rather than in main.rs so tests can call
//! [`cli_main`] in-process and check exit codes without spawning binaries.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use snowroad::evaluation::evaluate_corpus;
use snowroad::io::{load_gray, load_image, save_image, save_mask};
use snowroad::pipeline::{
    run_pipeline, run_pipeline_timed, run_pipeline_with_artifacts, DetectionResult,
    PipelineConfig, StageArtifact, StageTimings,
};
use snowroad::render::render_overlay;
use snowroad::synthgen::{write_corpus, SceneSpec};
use snowroad::{mask_from_gray, BinaryMask, Error, RgbImage};

#[derive(Parser)]
#[command(
    name = "snowroad",
    version,
    about = "Road detection for snow-covered forest roads from single RGB frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the road in one image; writes overlay.png and result.json.
    Detect {
        /// Input image (binary PPM or PNG).
        image: PathBuf,
        /// Pipeline config file, `key = value` lines; defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write every intermediate stage image.
        #[arg(long)]
        dump_stages: bool,
    },
    /// Evaluate detection against ground truth over a corpus directory.
    Eval {
        /// Corpus directory holding images/ and truth/.
        #[arg(long)]
        corpus: PathBuf,
        /// Pipeline config file, as for detect.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the report JSON.
        #[arg(long)]
        report: PathBuf,
        /// Optional CSV copy of the per-image table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a synthetic corpus from a scene spec file.
    Synth {
        /// Scene spec file, `key = value` lines.
        #[arg(long)]
        spec: PathBuf,
        /// Corpus output directory.
        #[arg(long)]
        out: PathBuf,
        /// Number of scenes.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Corpus seed; defaults to the seed named in the spec file.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Runs the CLI against an argument vector and returns the process exit
/// code: 0 success, 1 detection failure (no road found), 2 usage, config,
/// or I/O error.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_default_env()
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NoRoadDetected(_) | Error::DegenerateBase(_) => 1,
                _ => 2,
            }
        }
    }
}

fn dispatch(cli: Cli) -> snowroad::Result<()> {
    match cli.command {
        Command::Detect {
            image,
            config,
            out,
            dump_stages,
        } => detect(&image, config.as_deref(), &out, dump_stages),
        Command::Eval {
            corpus,
            config,
            report,
            csv,
        } => eval(&corpus, config.as_deref(), &report, csv.as_deref()),
        Command::Synth { spec, out, n, seed } => synth(&spec, &out, n, seed),
    }
}

fn load_config(path: Option<&Path>) -> snowroad::Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            if !p.exists() {
                return Err(Error::FileNotFound(p.to_path_buf()));
            }
            PipelineConfig::parse(&fs::read_to_string(p)?)
        }
    }
}

fn detect(image: &Path, config: Option<&Path>, out: &Path, dump_stages: bool) -> snowroad::Result<()> {
    let cfg = load_config(config)?;
    let img = load_image(image)?;
    let (result, timings) = if dump_stages {
        run_pipeline_with_artifacts(&img, &cfg)?
    } else {
        run_pipeline_timed(&img, &cfg)?
    };
    fs::create_dir_all(out)?;

    let overlay = render_overlay(&img, &result.road);
    save_image(&overlay, out.join("overlay.png"))?;
    write_result_json(&out.join("result.json"), &result, &timings, &cfg)?;
    if let Some(stages) = &result.stage_artifacts {
        dump_stage_images(out, stages)?;
        save_image(&overlay, out.join("triangle-overlay.png"))?;
    }

    let vp = result.vanishing_point;
    println!(
        "vanishing point ({}, {}); {} road pixels; results in {}",
        vp.x,
        vp.y,
        result.road.mask.count_true(),
        out.display()
    );
    Ok(())
}

fn write_result_json(
    path: &Path,
    result: &DetectionResult,
    timings: &StageTimings,
    cfg: &PipelineConfig,
) -> snowroad::Result<()> {
    let timings_ms: serde_json::Map<String, serde_json::Value> = timings
        .iter()
        .map(|(name, ms)| (name.clone(), serde_json::json!(ms)))
        .collect();
    let doc = serde_json::json!({
        "vanishing_point": result.vanishing_point,
        "triangle": result.road.triangle,
        "road_pixel_count": result.road.mask.count_true(),
        "timings_ms": timings_ms,
        "config": cfg,
    });
    let text = serde_json::to_string_pretty(&doc).expect("result document serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

fn dump_stage_images(out: &Path, stages: &[(String, StageArtifact)]) -> snowroad::Result<()> {
    for (name, artifact) in stages {
        let path = out.join(format!("{name}.png"));
        match artifact {
            StageArtifact::Hsv(hsv) => {
                // The three HSV planes go straight into the RGB channels so
                // the stage is inspectable in any viewer.
                let img = RgbImage::from_raw(hsv.width(), hsv.height(), hsv.data().to_vec())?;
                save_image(&img, path)?;
            }
            StageArtifact::Mask(mask) => save_mask(mask, path)?,
        }
    }
    Ok(())
}

type CorpusEntry = (String, PathBuf, PathBuf);

/// Lists (id, image path, truth path) for every .ppm/.png under images/,
/// sorted by id. Truth is looked up as truth/<id>.pgm, then truth/<id>.png.
fn corpus_entries(corpus: &Path) -> snowroad::Result<Vec<CorpusEntry>> {
    let images = corpus.join("images");
    if !images.is_dir() {
        return Err(Error::EmptyCorpus(format!(
            "{}: no images/ directory",
            corpus.display()
        )));
    }
    let mut entries = Vec::new();
    for entry in fs::read_dir(&images)? {
        let path = entry?.path();
        let is_image = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("ppm") || e.eq_ignore_ascii_case("png"));
        if !is_image {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()).map(String::from) else {
            continue;
        };
        let truth = ["pgm", "png"]
            .iter()
            .map(|ext| corpus.join("truth").join(format!("{id}.{ext}")))
            .find(|p| p.exists())
            .ok_or_else(|| Error::FileNotFound(corpus.join("truth").join(format!("{id}.pgm"))))?;
        entries.push((id, path, truth));
    }
    if entries.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "{}: no .ppm or .png images",
            images.display()
        )));
    }
    entries.sort();
    Ok(entries)
}

fn eval(
    corpus: &Path,
    config: Option<&Path>,
    report_path: &Path,
    csv: Option<&Path>,
) -> snowroad::Result<()> {
    let cfg = load_config(config)?;
    let entries = corpus_entries(corpus)?;
    let mut evaluated: Vec<(String, BinaryMask, BinaryMask)> = Vec::with_capacity(entries.len());
    for (id, image_path, truth_path) in entries {
        let img = load_image(&image_path)?;
        let truth = mask_from_gray(&load_gray(&truth_path)?, 128);
        let pred = match run_pipeline(&img, &cfg) {
            Ok(result) => result.road.mask,
            Err(e @ (Error::NoRoadDetected(_) | Error::DegenerateBase(_))) => {
                log::warn!("{id}: {e}; scoring an empty prediction");
                BinaryMask::new(img.width(), img.height())
            }
            Err(e) => return Err(e),
        };
        evaluated.push((id, pred, truth));
    }
    let pairs: Vec<(&str, &BinaryMask, &BinaryMask)> = evaluated
        .iter()
        .map(|(id, pred, truth)| (id.as_str(), pred, truth))
        .collect();
    let report = evaluate_corpus(&pairs)?;

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(report_path, json + "\n")?;
    if let Some(csv_path) = csv {
        fs::write(csv_path, report.to_csv())?;
    }
    println!(
        "{} images: mean FNR {:.4}, mean FPR {:.4}",
        report.per_image.len(),
        report.mean_fnr,
        report.mean_fpr
    );
    Ok(())
}

fn synth(spec_path: &Path, out: &Path, n: usize, seed: Option<u64>) -> snowroad::Result<()> {
    if !spec_path.exists() {
        return Err(Error::FileNotFound(spec_path.to_path_buf()));
    }
    let spec = SceneSpec::parse(&fs::read_to_string(spec_path)?)?;
    let seed = seed.unwrap_or(spec.seed);
    let ids = write_corpus(&spec, n, seed, out)?;
    println!("wrote {} scenes under {}", ids.len(), out.display());
    Ok(())
}
