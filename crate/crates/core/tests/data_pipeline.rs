use std::path::PathBuf;

use proptest::prelude::*;
use tsetlin_index::data::{
    binarize_images, decode_dataset, encode_dataset, load_dataset, load_idx_images,
    load_idx_labels, parse_idx_images, parse_idx_labels, save_dataset, synthetic, tokenize,
    vectorize_text, write_idx_images, write_idx_labels, BinarizeSpec, IdxImages, Provenance,
    Vocabulary,
};
use tsetlin_index::{BoolDataset, Error};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

const TINY_PIXELS: [u8; 18] = [
    0, 40, 85, 86, 169, 170, 171, 255, 1, 84, 200, 128, 255, 254, 0, 60, 64, 191,
];

#[test]
fn idx_fixture_loads_plain_and_gzip() {
    for suffix in ["", ".gz"] {
        let images = load_idx_images(fixture(&format!("tiny-images-idx3-ubyte{suffix}"))).unwrap();
        assert_eq!((images.count, images.rows, images.cols), (3, 2, 3));
        assert_eq!(images.pixels, TINY_PIXELS);
        assert_eq!(images.image(1), &TINY_PIXELS[6..12]);
        let labels = load_idx_labels(fixture(&format!("tiny-labels-idx1-ubyte{suffix}"))).unwrap();
        assert_eq!(labels, [7, 0, 3]);
    }
}

#[test]
fn idx_fixture_round_trips_byte_exact() {
    let raw = std::fs::read(fixture("tiny-images-idx3-ubyte")).unwrap();
    let mut out = Vec::new();
    write_idx_images(&parse_idx_images(&raw).unwrap(), &mut out).unwrap();
    assert_eq!(out, raw);

    let raw = std::fs::read(fixture("tiny-labels-idx1-ubyte")).unwrap();
    let mut out = Vec::new();
    write_idx_labels(&parse_idx_labels(&raw).unwrap(), &mut out).unwrap();
    assert_eq!(out, raw);
}

#[test]
fn idx_errors_are_distinct() {
    let raw = std::fs::read(fixture("tiny-images-idx3-ubyte")).unwrap();
    assert!(matches!(
        parse_idx_images(&raw[..raw.len() - 1]),
        Err(Error::Truncated(_))
    ));
    assert!(matches!(
        parse_idx_images(&raw[..10]),
        Err(Error::Truncated(_))
    ));
    let mut longer = raw.clone();
    longer.push(0);
    assert!(matches!(
        parse_idx_images(&longer),
        Err(Error::Dimension(_))
    ));
    let labels = std::fs::read(fixture("tiny-labels-idx1-ubyte")).unwrap();
    assert!(matches!(
        parse_idx_images(&labels),
        Err(Error::BadMagic { .. })
    ));
    assert!(matches!(
        parse_idx_labels(&raw),
        Err(Error::BadMagic { .. })
    ));
}

#[test]
fn binarized_fixture_matches_hand_codes() {
    let images = load_idx_images(fixture("tiny-images-idx3-ubyte")).unwrap();
    let labels = load_idx_labels(fixture("tiny-labels-idx1-ubyte")).unwrap();
    let spec = BinarizeSpec::even(2).unwrap();
    assert_eq!(spec.thresholds(), &[85, 170]);
    let ds = binarize_images(&images.pixels, 6, &labels, 10, &spec, "tiny").unwrap();
    assert_eq!(ds.features(), 12);
    // image 0: 0, 40, 85, 86, 169, 170
    assert_eq!(ds.row(0), [0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 1, 1]);
    assert_eq!(ds.labels().collect::<Vec<_>>(), [7, 0, 3]);
}

#[test]
fn even_thresholds_by_bits() {
    let t = |b| BinarizeSpec::even(b).unwrap().thresholds().to_vec();
    assert_eq!(t(1), [128]);
    assert_eq!(t(2), [85, 170]);
    assert_eq!(t(3), [64, 128, 191]);
    assert_eq!(t(4), [51, 102, 153, 204]);
    assert!(BinarizeSpec::even(0).is_err());
    assert!(BinarizeSpec::even(5).is_err());
    assert!(BinarizeSpec::new(vec![100, 100]).is_err());
    assert!(BinarizeSpec::new(vec![0]).is_err());
}

#[test]
fn labels_are_validated() {
    let mut ds = BoolDataset::new(3, 2, Provenance::Synthetic { name: "t".into() }).unwrap();
    assert!(matches!(
        ds.push(&[1, 0, 1], 2),
        Err(Error::InvalidLabel {
            label: 2,
            classes: 2
        })
    ));
    assert!(matches!(ds.push(&[1, 0], 0), Err(Error::Shape { .. })));
    ds.push(&[1, 0, 1], 1).unwrap();
    assert_eq!(ds.len(), 1);

    let pixels = [10u8, 200];
    let spec = BinarizeSpec::even(1).unwrap();
    assert!(binarize_images(&pixels, 1, &[0, 5], 3, &spec, "x").is_err());
    assert!(binarize_images(&pixels, 1, &[0], 3, &spec, "x").is_err());
}

#[test]
fn width_must_match_provenance() {
    let images = Provenance::Images {
        source: "x".into(),
        thresholds: vec![85, 170],
    };
    assert!(BoolDataset::new(7, 2, images.clone()).is_err());
    assert!(BoolDataset::new(8, 2, images).is_ok());
    let text = Provenance::Text {
        source: "x".into(),
        vocabulary: 5,
    };
    assert!(BoolDataset::new(4, 2, text.clone()).is_err());
    assert!(BoolDataset::new(5, 2, text).is_ok());
}

#[test]
fn dataset_file_round_trip() {
    let ds = synthetic::noisy_xor(300, 70, 0.1, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("xor.tmds");
    save_dataset(&ds, &path).unwrap();
    let back = load_dataset(&path).unwrap();
    assert_eq!(back, ds);
    assert_eq!(encode_dataset(&back), std::fs::read(&path).unwrap());
}

#[test]
fn corrupted_dataset_is_rejected() {
    let ds = synthetic::noisy_xor(20, 12, 0.0, 1).unwrap();
    let bytes = encode_dataset(&ds);
    let mut flipped = bytes.clone();
    let mid = flipped.len() / 2;
    flipped[mid] ^= 0x10;
    assert!(matches!(
        decode_dataset(&flipped),
        Err(Error::Checksum { .. })
    ));
    assert!(decode_dataset(&bytes[..bytes.len() - 3]).is_err());
    let mut wrong_version = bytes.clone();
    wrong_version[4] = 9;
    assert!(matches!(
        decode_dataset(&wrong_version),
        Err(Error::Version { .. })
    ));
    let mut wrong_magic = bytes;
    wrong_magic[0] = b'X';
    assert!(matches!(
        decode_dataset(&wrong_magic),
        Err(Error::BadMagic { .. })
    ));
}

#[test]
fn text_pipeline_set_of_words() {
    let docs = [
        "Great film, great cast!",
        "Dull film.",
        "cast was dull; plot great",
    ];
    let tokens: Vec<String> = tokenize(docs[0]).collect();
    assert_eq!(tokens, ["great", "film", "great", "cast"]);
    let vocab = Vocabulary::build(&docs, 3).unwrap();
    // document frequencies: great 2, film 2, cast 2, dull 2, was 1, plot 1
    assert_eq!(vocab.tokens(), ["cast", "dull", "film"]);
    let ds = vectorize_text(&docs, &[1, 0, 1], 2, &vocab, "reviews").unwrap();
    assert_eq!(ds.row(0), [1, 0, 1]);
    assert_eq!(ds.row(1), [0, 1, 1]);
    assert_eq!(ds.row(2), [1, 1, 0]);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vocab.txt");
    vocab.save(&path).unwrap();
    assert_eq!(Vocabulary::load(&path).unwrap(), vocab);
}

fn arb_spec() -> impl Strategy<Value = BinarizeSpec> {
    prop::collection::btree_set(1u8..=255, 1..=4)
        .prop_map(|set| BinarizeSpec::new(set.into_iter().collect()).unwrap())
}

proptest! {
    #[test]
    fn thermometer_code_is_monotone(spec in arb_spec(), a in any::<u8>(), b in any::<u8>()) {
        let (lo, hi) = (a.min(b), a.max(b));
        let bits = spec.bits();
        let (mut cl, mut ch) = (vec![0; bits], vec![0; bits]);
        spec.encode_into(lo, &mut cl);
        spec.encode_into(hi, &mut ch);
        for t in 0..bits {
            prop_assert!(cl[t] <= ch[t]);
            prop_assert_eq!(cl[t] == 1, lo >= spec.thresholds()[t]);
            if t > 0 {
                prop_assert!(cl[t] <= cl[t - 1]);
            }
        }
    }

    #[test]
    fn binarized_width_is_pixels_times_bits(
        spec in arb_spec(),
        ppi in 1usize..20,
        raw in prop::collection::vec(any::<u8>(), 20..120),
    ) {
        let images = raw.len() / ppi;
        let pixels = &raw[..images * ppi];
        let labels = vec![0u8; images];
        let ds = binarize_images(pixels, ppi, &labels, 1, &spec, "p").unwrap();
        prop_assert_eq!(ds.features(), ppi * spec.bits());
        prop_assert_eq!(ds.len(), images);
        for i in 0..images {
            let row = ds.row(i);
            for p in 0..ppi {
                for t in 0..spec.bits() {
                    prop_assert_eq!(row[p * spec.bits() + t] == 1, pixels[i * ppi + p] >= spec.thresholds()[t]);
                }
            }
        }
    }

    #[test]
    fn dataset_encoding_round_trips(
        rows in prop::collection::vec((prop::collection::vec(0u8..=1, 130), 0usize..4), 0..40),
        width in 1usize..130,
    ) {
        let prov = Provenance::Synthetic { name: "p".into() };
        let mut ds = BoolDataset::new(width, 4, prov).unwrap();
        for (row, label) in &rows {
            ds.push(&row[..width], *label).unwrap();
        }
        let bytes = encode_dataset(&ds);
        let back = decode_dataset(&bytes).unwrap();
        prop_assert_eq!(&back, &ds);
        prop_assert_eq!(encode_dataset(&back), bytes);
    }

    #[test]
    fn idx_round_trips(rows in 1usize..6, cols in 1usize..6, pixels in prop::collection::vec(any::<u8>(), 0..180)) {
        let per = rows * cols;
        let count = pixels.len() / per;
        let images = IdxImages { count, rows, cols, pixels: pixels[..count * per].to_vec() };
        let mut buf = Vec::new();
        write_idx_images(&images, &mut buf).unwrap();
        prop_assert_eq!(parse_idx_images(&buf).unwrap(), images);
    }
}
