use std::path::{Path, PathBuf};

use baaf::data::DatasetManifest;
use baaf::eval::evaluate_report;
use baaf::video::split_into_subclips;
use baaf::{baaf_train, load_dataset, write_dataset, EvalLabels, PayloadFormat, Result, VideoConfig};

use crate::args::{Command, FilterArgs};
use crate::manifest::{hash_file, write_file, InputHash, RunManifest};

pub const REPORT_FILE: &str = "report.json";
pub const DETECTOR_FILE: &str = "detector.bin";
pub const FILTERED_STEM: &str = "filtered";

/// The manifest and every file it points to.
fn dataset_inputs(manifest: &Path) -> Result<Vec<InputHash>> {
    let m = DatasetManifest::read(manifest)?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut files = vec![manifest.to_path_buf(), base.join(&m.feature_file)];
    files.extend(m.labels_file.iter().map(|p| base.join(p)));
    files.extend(m.clips_file.iter().map(|p| base.join(p)));
    files.iter().map(|p| hash_file(p)).collect()
}

pub fn run(args: &FilterArgs) -> Result<()> {
    let mut config = args.filter.config()?;
    if args.video {
        config.video = Some(VideoConfig {
            closing_window: args.closing_window,
            min_clip_len: args.min_clip_len,
        });
        config.validate()?;
    }
    let inputs = dataset_inputs(&args.manifest)?;
    let out = &args.out;
    let outputs: Vec<PathBuf> = vec![
        out.join(REPORT_FILE),
        out.join(DETECTOR_FILE),
        out.join(format!("{FILTERED_STEM}.toml")),
    ];
    RunManifest::new(Command::Filter(args.clone()), &config, config.master_seed, inputs, outputs)?
        .write(out)?;

    let loaded = load_dataset::<f64>(&args.manifest)?;
    let data = &loaded.dataset;
    let (detector, mut report) = baaf_train(data, &config)?;
    if let Some(labels) = &loaded.labels {
        evaluate_report(&mut report, labels)?;
    }
    write_file(&out.join(REPORT_FILE), report.to_json()?.as_bytes())?;
    write_file(&out.join(DETECTOR_FILE), &detector.to_blob())?;

    let kept = match &report.clips {
        Some(decisions) => split_into_subclips(data, decisions)?,
        None => data.subset(&report.kept_indices())?,
    };
    let kept_labels: Option<EvalLabels> = loaded.labels.as_ref().map(|l| {
        kept.ids()
            .iter()
            .filter_map(|id| l.get(id).map(|lab| (id.clone(), lab)))
            .collect()
    });
    write_dataset(out, FILTERED_STEM, &kept, kept_labels.as_ref(), PayloadFormat::Csv)?;

    println!(
        "{} {}: kept {} of {} samples, {} fit calls",
        report.name,
        config.backend.name(),
        report.kept.len(),
        data.len(),
        report.total_fit_calls
    );
    if let Some(e) = &report.evaluation {
        let show = |v: Option<f64>| v.map_or("null".to_string(), |x| format!("{x:.3}"));
        println!(
            "filter precision {} recall {} ({} of {} anomalies removed)",
            show(e.precision),
            show(e.recall),
            e.removed_anomalies,
            e.true_anomalies
        );
    }
    Ok(())
}
