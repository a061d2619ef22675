use baaf::eval::{synth_generate, SynthConfig};
use baaf::{write_dataset, Dataset, EvalLabels, Label, Result};

use crate::args::{Command, GeneratorArgs, SynthArgs};
use crate::manifest::RunManifest;

pub fn generator_config(g: &GeneratorArgs, anomaly: usize, test_nominal: usize, seed: u64) -> SynthConfig {
    SynthConfig {
        dim: g.dim,
        n_nominal: g.nominal,
        n_test_nominal: test_nominal,
        n_anomaly: anomaly,
        exclusion_radius: g.exclusion_radius,
        box_half_width: g.box_half_width,
        seed,
    }
}

/// Training nominals, then test nominals, then anomalies, as one labelled
/// dataset whose ids are row indices.
pub fn run(args: &SynthArgs) -> Result<()> {
    let config = generator_config(&args.generator, args.anomaly, args.test_nominal, args.seed);
    config.validate()?;
    let ext = match args.format {
        crate::args::Format::F32le => "f32",
        crate::args::Format::Csv => "csv",
    };
    let outputs = vec![
        args.out.join(format!("{}.toml", args.name)),
        args.out.join(format!("{}.{ext}", args.name)),
        args.out.join(format!("{}.labels.csv", args.name)),
    ];
    RunManifest::new(Command::Synth(args.clone()), &config, args.seed, vec![], outputs)?
        .write(&args.out)?;

    let data = synth_generate::<f64>(&config)?;
    let n_train = data.train.len();
    let mut values = data.train.values().to_vec();
    values.extend_from_slice(data.test.values());
    let rows = n_train + data.test.len();
    let ids: Vec<String> = (0..rows).map(|i| i.to_string()).collect();
    let labels: EvalLabels = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let label = if i < n_train {
                Label::Nominal
            } else {
                data.test_labels
                    .get(data.test.id(i - n_train))
                    .unwrap_or(Label::Nominal)
            };
            (id.clone(), label)
        })
        .collect();
    let dataset = Dataset::new(ids, config.dim, values)?;
    let written = write_dataset(&args.out, &args.name, &dataset, Some(&labels), args.format.into())?;
    println!(
        "wrote {} rows ({} anomalous) to {}",
        rows,
        labels.anomalous_ids().count(),
        written.manifest.display()
    );
    Ok(())
}
