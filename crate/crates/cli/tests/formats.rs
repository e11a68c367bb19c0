use mmd_cli::io::{encode_binary, encode_text, parse_text, read_series, write_series, SeriesFormat, MAGIC};
use mmd_cli::CliError;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn binary_round_trip_is_bit_exact(values in prop::collection::vec(finite(), 0..300)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        write_series(&path, &values, SeriesFormat::Binary).unwrap();
        let back = read_series(&path).unwrap();
        prop_assert_eq!(back.len(), values.len());
        for (a, b) in back.iter().zip(&values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        let bytes = std::fs::read(&path).unwrap();
        prop_assert_eq!(&bytes[..8], MAGIC);
        prop_assert_eq!(bytes.len(), 8 + 8 * values.len());
    }

    #[test]
    fn text_round_trip_within_tolerance(values in prop::collection::vec(finite(), 0..300)) {
        let back = parse_text(&encode_text(&values)).unwrap();
        prop_assert_eq!(back.len(), values.len());
        for (a, b) in back.iter().zip(&values) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn text_accepts_blank_lines_and_plain_decimals() {
    assert_eq!(parse_text("1\n\n  2.5 \n-3e-2\n").unwrap(), vec![1.0, 2.5, -0.03]);
    assert!(parse_text("1\nabc\n").unwrap_err().contains("line 2"));
}

#[test]
fn malformed_files_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("t.bin");
    let mut bytes = encode_binary(&[1.0, 2.0]);
    bytes.pop();
    std::fs::write(&truncated, bytes).unwrap();
    assert!(matches!(read_series(&truncated), Err(CliError::Parse(_))));
    let junk = dir.path().join("j.txt");
    std::fs::write(&junk, "1.0\n2.0x\n").unwrap();
    let err = read_series(&junk).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let missing = read_series(&dir.path().join("none.txt")).unwrap_err();
    assert_eq!(missing.exit_code(), 3);
}
