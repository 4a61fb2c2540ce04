use memnet_core::noise::splitmix64_next;
use memnet_core::persistence::{load_model, model_from_str, model_to_string, save_model};
use memnet_core::recognizer::train;
use memnet_core::{
    Dataset, DriftArray, DriftParams, Error, Image, InferenceMode, NoiseConfig, PreprocessConfig,
    Split, TrainConfig, NUM_CLASSES,
};

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        let (v, s) = splitmix64_next(self.0);
        self.0 = s;
        v
    }
    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn random_model(rng: &mut Rng) -> DriftArray {
    let rows = 1 + (rng.next() % 6) as usize;
    let cols = 1 + (rng.next() % 6) as usize;
    let r_on = 1.0 + rng.unit() * 100.0;
    let r_off = r_on * (2.0 + rng.unit() * 1e4);
    let params =
        DriftParams::new(r_on, r_off, rng.unit() * 1e3 + 1e-9, rng.unit().max(1e-6)).unwrap();
    let mems = (0..NUM_CLASSES * rows * cols)
        .map(|_| match rng.next() % 4 {
            0 => r_on,
            1 => r_off,
            _ => r_on + rng.unit() * (r_off - r_on),
        })
        .collect();
    DriftArray::from_parts(
        rows,
        cols,
        mems,
        params,
        rng.unit() * 1e6,
        PreprocessConfig::new(rng.unit() * 20.0).unwrap(),
        NoiseConfig::new(rng.unit() * 200.0, rng.next()).unwrap(),
    )
    .unwrap()
}

#[test]
fn thousand_random_models_round_trip_bit_exact() {
    let mut rng = Rng(2024);
    for _ in 0..1000 {
        let model = random_model(&mut rng);
        let back = model_from_str(&model_to_string(&model)).unwrap();
        assert_eq!(back, model);
        for (a, b) in back.memristances().iter().zip(model.memristances()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn file_round_trip_keeps_classifications() {
    let mut rng = Rng(3);
    let imgs: Vec<Image> = (0..60)
        .map(|_| {
            Image::from_pixels(28, 28, (0..784).map(|_| (rng.next() % 256) as u8).collect())
                .unwrap()
        })
        .collect();
    let labels = (0..60).map(|i| (i % 10) as u8).collect();
    let ds = Dataset::new(imgs.clone(), labels, Split::Train).unwrap();
    let model = train(&ds, &TrainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.mmnw");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);
    for img in &imgs {
        for mode in [InferenceMode::Raw, InferenceMode::Preprocessed] {
            assert_eq!(
                back.classify(img, mode).unwrap(),
                model.classify(img, mode).unwrap()
            );
        }
    }
}

#[test]
fn failed_save_leaves_nothing_behind() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("m.mmnw");
    let model = DriftArray::untrained(2, 2, DriftParams::default());
    assert!(matches!(save_model(&model, &path), Err(Error::Io { .. })));
    assert!(!path.exists());
}

#[test]
fn out_of_window_value_is_a_validation_error() {
    let model = DriftArray::untrained(1, 1, DriftParams::default());
    let text = model_to_string(&model);
    let cut = text.trim_end().rfind('\n').unwrap();
    let bad = format!("{}\n1.3000000000000000e1\n", &text[..cut]);
    assert!(matches!(model_from_str(&bad), Err(Error::Validation(_))));
}
