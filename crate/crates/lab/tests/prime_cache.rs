use hdickman_core::primes::{sieve, PrimeTable};
use hdickman_lab::cache::{load_or_sieve, read_table, write_table};
use hdickman_lab::LabError;

#[test]
fn round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    let table = sieve(100_000).unwrap();
    write_table(&path, &table).unwrap();
    assert_eq!(read_table(&path).unwrap(), table);
}

#[test]
fn larger_cached_table_is_cut_down() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    write_table(&path, &sieve(10_000).unwrap()).unwrap();
    let t = load_or_sieve(Some(&path), 1_000).unwrap();
    assert_eq!(t, sieve(1_000).unwrap());
    // the file keeps the larger table
    assert_eq!(read_table(&path).unwrap().limit(), 10_000);
}

#[test]
fn smaller_cached_table_is_replaced() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    write_table(&path, &sieve(100).unwrap()).unwrap();
    let t = load_or_sieve(Some(&path), 5_000).unwrap();
    assert_eq!(t.len(), 669);
    assert_eq!(read_table(&path).unwrap(), t);
}

fn corrupt(bytes: &[u8]) -> LabError {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.bin");
    std::fs::write(&path, bytes).unwrap();
    read_table(&path).unwrap_err()
}

fn header(limit: u64, count: u64) -> Vec<u8> {
    let mut b = b"PTBL1".to_vec();
    b.extend(limit.to_le_bytes());
    b.extend(count.to_le_bytes());
    b
}

#[test]
fn malformed_files_are_rejected() {
    assert!(matches!(corrupt(b"PTBL2"), LabError::Cache { .. }));
    assert!(matches!(corrupt(b"PTB"), LabError::Cache { .. }));

    let mut short = header(10, 4);
    short.extend(2u64.to_le_bytes());
    assert!(matches!(corrupt(&short), LabError::Cache { .. }));

    let mut composite = header(10, 4);
    for p in [2u64, 3, 5, 9] {
        composite.extend(p.to_le_bytes());
    }
    assert!(matches!(corrupt(&composite), LabError::Cache { .. }));

    let mut trailing = header(10, 4);
    for p in [2u64, 3, 5, 7, 11] {
        trailing.extend(p.to_le_bytes());
    }
    assert!(matches!(corrupt(&trailing), LabError::Cache { .. }));

    assert!(matches!(corrupt(&header(10, u64::MAX)), LabError::Cache { .. }));
}

#[test]
fn valid_handwritten_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ok.bin");
    let mut b = header(10, 4);
    for p in [2u64, 3, 5, 7] {
        b.extend(p.to_le_bytes());
    }
    std::fs::write(&path, b).unwrap();
    assert_eq!(read_table(&path).unwrap(), PrimeTable::from_parts(10, vec![2, 3, 5, 7]).unwrap());
}
