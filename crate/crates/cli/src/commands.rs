use std::fs;
use std::path::Path;
use std::time::Instant;

use memnet_core::dataset::{encode_idx_images, encode_idx_labels, MnistPaths};
use memnet_core::noise::add_noise;
use memnet_core::perf::group_thousands;
use memnet_core::persistence::{load_model, save_model};
use memnet_core::preprocess::preprocess_image;
use memnet_core::recognizer::{evaluate, train};
use memnet_core::{
    pgm, ConfusionMatrix, Dataset, DriftParams, Error, Image, InferenceMode, NoiseConfig,
    PerfConfig, PerfReport, PreprocessConfig, Result, Split, TrainConfig, TrainingDrive,
};

use crate::{Command, NoiseArgs};

/// 2 for bad input (usage, files, data), 3 for broken internal invariants.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidState(_) => 3,
        _ => 2,
    }
}

fn noise_cfg(n: NoiseArgs) -> Result<NoiseConfig> {
    NoiseConfig::new(n.sigma, n.seed)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_split(dir: &Path, split: Split, limit: Option<usize>) -> Result<Dataset> {
    let ds = Dataset::load_mnist(dir, split)?;
    Ok(match limit {
        Some(n) => ds.head(n),
        None => ds,
    })
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Check { mnist_dir } => check(&mnist_dir),
        Command::Noise {
            data,
            noise,
            split,
            out,
        } => noise_dataset(&data.mnist_dir, split.into(), noise_cfg(noise)?, &out),
        Command::Preprocess {
            mnist_dir,
            split,
            index,
            pgm,
            noise,
            edge_threshold,
            out,
        } => {
            let noise = noise_cfg(noise)?;
            let prep = PreprocessConfig::new(edge_threshold)?;
            let (image, noise_index) = match (pgm, mnist_dir, index) {
                (Some(p), _, _) => (pgm::read_pgm(&p)?, 0),
                (None, Some(dir), Some(i)) => {
                    let ds = Dataset::load_mnist(&dir, split.into())?;
                    let img = ds.images().get(i).cloned().ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "index {i} out of range for {} images",
                            ds.len()
                        ))
                    })?;
                    (img, i as u64)
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "give either --pgm FILE or --mnist-dir DIR --index N".into(),
                    ))
                }
            };
            preprocess_one(&image, noise_index, &noise, &prep, &out)
        }
        Command::Train {
            data,
            noise,
            edge_threshold,
            window_factor,
            control,
            model,
            images,
        } => {
            let cfg = TrainConfig {
                noise: noise_cfg(noise)?,
                preprocess: PreprocessConfig::new(edge_threshold)?,
                drift: DriftParams {
                    window_factor,
                    ..DriftParams::default()
                },
                drive: if control {
                    TrainingDrive::RawCrop
                } else {
                    TrainingDrive::Preprocessed
                },
            };
            cfg.drift.validate()?;
            let ds = load_split(&data.mnist_dir, Split::Train, images)?;
            train_cmd(&ds, &cfg, &model)
        }
        Command::Eval {
            data,
            noise,
            model,
            preprocess_inference,
            out,
            images,
        } => {
            let noise = noise_cfg(noise)?;
            let drift = load_model(&model)?;
            let ds = load_split(&data.mnist_dir, Split::Test, images)?;
            let mode = InferenceMode::from_flag(preprocess_inference);
            let ev = evaluate(&drift, &ds, &noise, mode)?;
            let comments = vec![
                format!("model={}", model.display()),
                format!("seed={}", noise.seed),
                format!("sigma={}", noise.sigma),
                format!(
                    "edge_threshold_mv={}",
                    drift.preprocess_config().edge_threshold()
                ),
                format!("preprocess_inference={preprocess_inference}"),
                format!("images={}", ds.len()),
                "rows=predicted columns=expected".to_string(),
            ];
            if let Some(out) = out {
                write(&out, ev.confusion.to_csv(&comments))?;
            }
            print!("{}", ev.confusion);
            println!("preprocess_inference={preprocess_inference}");
            println!("accuracy={:.4}", ev.accuracy);
            Ok(())
        }
        Command::Perf {
            freq,
            images,
            height,
            width,
            kv,
        } => {
            let cfg = PerfConfig {
                clock_hz: freq,
                image_h: height,
                image_w: width,
                n_train: images,
            };
            let report = PerfReport::compute(&cfg)?;
            if kv {
                print!("{}", report.to_key_values());
            } else {
                print!("{report}");
                println!(
                    "summary              {:.2} ms / {:.2} µs / {} images/s",
                    report.train_time_ms,
                    report.infer_latency_us,
                    group_thousands(report.throughput_images_per_s)
                );
            }
            Ok(())
        }
        Command::Accuracy { csv } => {
            let text = fs::read_to_string(&csv).map_err(|source| Error::Io {
                path: csv.clone(),
                source,
            })?;
            let cm = ConfusionMatrix::from_csv(&text)?;
            let totals: Vec<String> = cm.column_sums().iter().map(u64::to_string).collect();
            println!("total={}", cm.total());
            println!("correct={}", cm.correct());
            println!("per_class_totals={}", totals.join(","));
            println!("accuracy={:.4}", cm.accuracy());
            Ok(())
        }
    }
}

fn check(dir: &Path) -> Result<()> {
    for split in [Split::Train, Split::Test] {
        let ds = Dataset::load_mnist(dir, split)?;
        let counts: Vec<String> = ds.class_counts().iter().map(usize::to_string).collect();
        println!(
            "{split}: {} images, class counts {}",
            ds.len(),
            counts.join(",")
        );
    }
    Ok(())
}

fn noise_dataset(dir: &Path, split: Split, noise: NoiseConfig, out: &Path) -> Result<()> {
    let ds = Dataset::load_mnist(dir, split)?;
    let noisy: Vec<Image> = ds
        .images()
        .iter()
        .enumerate()
        .map(|(i, img)| add_noise(img, &noise, i as u64))
        .collect();
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let paths = MnistPaths::new(out, split);
    write(&paths.images, encode_idx_images(&noisy)?)?;
    write(&paths.labels, encode_idx_labels(ds.labels()))?;
    println!(
        "wrote {} noisy {split} images (seed={} sigma={}) to {}",
        noisy.len(),
        noise.seed,
        noise.sigma,
        out.display()
    );
    Ok(())
}

fn preprocess_one(
    image: &Image,
    index: u64,
    noise: &NoiseConfig,
    prep: &PreprocessConfig,
    out: &Path,
) -> Result<()> {
    let noisy = add_noise(image, noise, index);
    let map = preprocess_image(&noisy, prep)?;
    let txt = out.with_extension("txt");
    let img = out.with_extension("pgm");
    let header = format!(
        "# seed={} sigma={} noise_index={} edge_threshold_mv={} unit=mA\n",
        noise.seed,
        noise.sigma,
        index,
        prep.edge_threshold()
    );
    write(&txt, header + &map.to_text())?;
    pgm::write_p2(&map.to_gray(), &img)?;
    println!(
        "wrote {}x{} current map to {} and {}",
        map.rows(),
        map.cols(),
        txt.display(),
        img.display()
    );
    Ok(())
}

fn train_cmd(ds: &Dataset, cfg: &TrainConfig, model_path: &Path) -> Result<()> {
    let start = Instant::now();
    let model = train(ds, cfg)?;
    let elapsed = start.elapsed();
    save_model(&model, model_path)?;
    let counts = model.device_counts();
    println!("images={}", ds.len());
    println!(
        "drive={}",
        match cfg.drive {
            TrainingDrive::Preprocessed => "preprocessed",
            TrainingDrive::RawCrop => "raw-crop",
        }
    );
    println!("seed={} sigma={}", cfg.noise.seed, cfg.noise.sigma);
    println!("edge_threshold_mv={}", cfg.preprocess.edge_threshold());
    println!("a_max={}", model.a_max());
    println!("k2={}", model.params().k2);
    println!("drift_devices={}", counts.drift);
    println!(
        "diffusion_devices_per_window={}",
        counts.diffusion_per_window
    );
    println!("wall_time_s={:.3}", elapsed.as_secs_f64());
    println!("model={}", model_path.display());
    Ok(())
}
