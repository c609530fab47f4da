use std::fs;

use isac_beam::{Error, SystemConfig};

#[test]
fn partial_file_keeps_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sys.toml");
    fs::write(&path, "n_users = 3\ndelta = 0.25\n").unwrap();
    let cfg = SystemConfig::load(&path).unwrap();
    let def = SystemConfig::default();
    assert_eq!(cfg.n_users, 3);
    assert_eq!(cfg.delta, 0.25);
    assert_eq!(cfg.n_tx, def.n_tx);
    assert_eq!(cfg.p_tx, def.p_tx);
}

#[test]
fn round_trip_preserves_digest() {
    let cfg = SystemConfig {
        seed: 1234,
        ..SystemConfig::default()
    };
    let back = SystemConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.digest(), cfg.digest());
    let other = SystemConfig {
        seed: 1235,
        ..cfg.clone()
    };
    assert_ne!(other.digest(), cfg.digest());
}

#[test]
fn unknown_keys_and_bad_values_fail() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "n_userz = 3\n").unwrap();
    assert!(matches!(
        SystemConfig::load(&path),
        Err(Error::Parse { .. })
    ));
    fs::write(&path, "n_tx = 0\n").unwrap();
    assert!(matches!(
        SystemConfig::load(&path),
        Err(Error::InvalidConfig(_))
    ));
    assert!(matches!(
        SystemConfig::load(&dir.path().join("missing.toml")),
        Err(Error::Io { .. })
    ));
}
