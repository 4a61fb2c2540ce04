//! Checks against the canonical MNIST files. Set `MEMNET_MNIST_DIR` or place
//! the four IDX files in `<workspace>/data/mnist`.

use std::fs;
use std::path::PathBuf;

use memnet_core::dataset::{
    encode_idx_images, encode_idx_labels, parse_idx_images, parse_idx_labels, MnistPaths,
};
use memnet_core::{Dataset, Error, Split};

fn mnist_dir() -> PathBuf {
    let dir = std::env::var_os("MEMNET_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist")));
    assert!(
        dir.join("t10k-images-idx3-ubyte").is_file(),
        "MNIST not found in {}; set MEMNET_MNIST_DIR",
        dir.display()
    );
    dir
}

#[test]
fn canonical_splits_load() {
    let dir = mnist_dir();
    let train = Dataset::load_mnist(&dir, Split::Train).unwrap();
    let test = Dataset::load_mnist(&dir, Split::Test).unwrap();
    assert_eq!(train.len(), 60_000);
    assert_eq!(test.len(), 10_000);
    assert_eq!(
        test.class_counts(),
        [980, 1135, 1032, 1010, 982, 892, 958, 1028, 974, 1009]
    );
}

#[test]
fn reencoding_reproduces_the_files() {
    let paths = MnistPaths::new(&mnist_dir(), Split::Test);
    let img_bytes = fs::read(&paths.images).unwrap();
    let lbl_bytes = fs::read(&paths.labels).unwrap();
    let imgs = parse_idx_images(&img_bytes).unwrap();
    let lbls = parse_idx_labels(&lbl_bytes).unwrap();
    assert_eq!(encode_idx_images(&imgs).unwrap(), img_bytes);
    assert_eq!(encode_idx_labels(&lbls), lbl_bytes);
}

#[test]
fn damaged_copies_are_rejected() {
    let paths = MnistPaths::new(&mnist_dir(), Split::Test);
    let bytes = fs::read(&paths.images).unwrap();

    let mut bad_magic = bytes.clone();
    bad_magic[3] = 0x01;
    assert!(matches!(
        parse_idx_images(&bad_magic),
        Err(Error::Format(_))
    ));

    let mut bad_dims = bytes.clone();
    bad_dims[11] = 27;
    assert!(matches!(parse_idx_images(&bad_dims), Err(Error::Format(_))));

    let cut = &bytes[..bytes.len() - 100];
    assert!(matches!(
        parse_idx_images(cut),
        Err(Error::Truncated { .. })
    ));

    let dir = tempfile::tempdir().unwrap();
    let p = MnistPaths::new(dir.path(), Split::Test);
    fs::write(&p.images, cut).unwrap();
    fs::copy(&paths.labels, &p.labels).unwrap();
    assert!(matches!(
        Dataset::load_mnist(dir.path(), Split::Test),
        Err(Error::Truncated { .. })
    ));
}
