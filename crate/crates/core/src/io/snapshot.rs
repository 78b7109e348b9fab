//! Field snapshots: a directory holding a text manifest and three raw
//! little-endian `f64` payloads.
//!
//! ```text
//! manifest.txt   UTF-8, one `key=value` per line, `#` starts a comment
//!   format_version=1
//!   n=<sites per axis>
//!   h=<lattice spacing, shortest round-trip decimal>
//!   flux=<m01>,<m02>,<m03>,<m12>,<m13>,<m23>
//!   crc32_a=<8 hex digits>     CRC-32 of a.bin
//!   crc32_phi=<8 hex digits>   CRC-32 of phi.bin
//!   crc32_kg=<8 hex digits>    CRC-32 of kg.bin
//! a.bin          4 N⁴ values, edge index 4·site + μ
//! phi.bin        4 N⁴ values, per site re φ₀, im φ₀, re φ₁, im φ₁
//! kg.bin         N⁴ values
//! ```
//!
//! Sites are enumerated lexicographically with `x₀` slowest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{BundleData, Chirality, Configuration, SpinorField};
use crate::lattice::{Cochain, Lattice};

pub const FORMAT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.txt";
const PAYLOADS: [&str; 3] = ["a", "phi", "kg"];

fn encode(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn decode(name: &str, bytes: &[u8], expected: usize) -> Result<Vec<f64>> {
    if bytes.len() != 8 * expected {
        return Err(Error::Shape(format!(
            "payload {name}.bin holds {} bytes, manifest implies {} values ({} bytes)",
            bytes.len(),
            expected,
            8 * expected
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect())
}

pub fn save_snapshot(c: &Configuration, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let lat = c.lattice();
    let payloads = [
        encode(c.a.values()),
        encode(&c.phi.to_real()),
        encode(c.bundle.kg().values()),
    ];
    let flux = c.bundle.flux().map(|m| m.to_string()).join(",");
    let mut manifest = format!(
        "# swmorse field snapshot\nformat_version={FORMAT_VERSION}\nn={}\nh={}\nflux={flux}\n",
        lat.n(),
        lat.spacing()
    );
    for (name, bytes) in PAYLOADS.iter().zip(&payloads) {
        manifest.push_str(&format!("crc32_{name}={:08x}\n", crc32fast::hash(bytes)));
        fs::write(dir.join(format!("{name}.bin")), bytes)?;
    }
    fs::write(dir.join(MANIFEST), manifest)?;
    Ok(())
}

fn parse_manifest(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Manifest(format!("line {} is not key=value: {raw:?}", i + 1)))?;
        let key = k.trim().to_string();
        let allowed = [
            "format_version",
            "n",
            "h",
            "flux",
            "crc32_a",
            "crc32_phi",
            "crc32_kg",
        ];
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Manifest(format!("unknown key {key:?}")));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Manifest(format!("duplicate key {key:?}")));
        }
    }
    Ok(map)
}

fn field<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Manifest(format!("missing key {key:?}")))
}

fn parse<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = field(map, key)?;
    raw.parse()
        .map_err(|_| Error::Manifest(format!("cannot parse {key}={raw:?}")))
}

pub fn load_snapshot(dir: &Path) -> Result<Configuration> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    let map = parse_manifest(&text)?;
    let version: u32 = parse(&map, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::SnapshotVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let lat = Lattice::new(parse(&map, "n")?, parse(&map, "h")?)?;
    let flux_raw = field(&map, "flux")?;
    let flux: Vec<i64> = flux_raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Manifest(format!("cannot parse flux={flux_raw:?}")))
        })
        .collect::<Result<_>>()?;
    let flux: [i64; 6] = flux
        .try_into()
        .map_err(|_| Error::Manifest(format!("flux needs 6 integers, got {flux_raw:?}")))?;

    let sizes = [lat.num_edges(), 4 * lat.num_sites(), lat.num_sites()];
    let mut decoded = Vec::with_capacity(3);
    for (name, size) in PAYLOADS.iter().zip(sizes) {
        let bytes = fs::read(dir.join(format!("{name}.bin")))?;
        let values = decode(name, &bytes, size)?;
        let recorded = u32::from_str_radix(field(&map, &format!("crc32_{name}"))?, 16)
            .map_err(|_| Error::Manifest(format!("bad checksum field for {name}")))?;
        if crc32fast::hash(&bytes) != recorded {
            return Err(Error::Checksum(format!("{name}.bin")));
        }
        decoded.push(values);
    }
    let kg = Cochain::from_values(lat, 0, decoded.pop().expect("kg"))?;
    let phi = SpinorField::from_real(lat, Chirality::Plus, &decoded.pop().expect("phi"))?;
    let a = Cochain::from_values(lat, 1, decoded.pop().expect("a"))?;
    Configuration::new(a, phi, BundleData::new(flux, kg)?)
}

/// Read a bare `k_g` payload (N⁴ little-endian values) for the given lattice.
pub fn load_kg_payload(path: &Path, lat: Lattice) -> Result<Cochain> {
    let bytes = fs::read(path)?;
    Cochain::from_values(lat, 0, decode("kg", &bytes, lat.num_sites())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_config(n: usize, seed: u64) -> Configuration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = Lattice::new(n, 0.37 + seed as f64 * 0.01).unwrap();
        let mut kg = Cochain::zeros(l, 0).unwrap();
        kg.values_mut()
            .iter_mut()
            .for_each(|x| *x = rng.gen_range(-1.0..1.0));
        Configuration::random(
            BundleData::new([2, 0, -4, 0, 0, 2], kg).unwrap(),
            1.0,
            1.0,
            &mut rng,
        )
    }

    fn bits(c: &Configuration) -> Vec<u64> {
        let mut out: Vec<u64> = c.a.values().iter().map(|v| v.to_bits()).collect();
        out.extend(c.phi.to_real().iter().map(|v| v.to_bits()));
        out.extend(c.bundle.kg().values().iter().map(|v| v.to_bits()));
        out.push(c.lattice().spacing().to_bits());
        out
    }

    #[test]
    fn round_trip_is_bitwise() {
        for seed in 0..4 {
            let dir = tempfile::tempdir().unwrap();
            let c = random_config(2 + seed as usize % 2, seed);
            save_snapshot(&c, dir.path()).unwrap();
            let back = load_snapshot(dir.path()).unwrap();
            assert_eq!(bits(&c), bits(&back));
            assert_eq!(c, back);
        }
    }

    #[test]
    fn corrupted_payload_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        save_snapshot(&random_config(2, 1), dir.path()).unwrap();
        let path = dir.path().join("phi.bin");
        let mut bytes = fs::read(&path).unwrap();
        bytes[17] ^= 0x40;
        fs::write(&path, bytes).unwrap();
        assert!(
            matches!(load_snapshot(dir.path()), Err(Error::Checksum(name)) if name == "phi.bin")
        );
    }

    #[test]
    fn wrong_payload_size_is_a_shape_error() {
        let dir = tempfile::tempdir().unwrap();
        save_snapshot(&random_config(2, 2), dir.path()).unwrap();
        let other = tempfile::tempdir().unwrap();
        save_snapshot(&random_config(3, 2), other.path()).unwrap();
        fs::copy(other.path().join("a.bin"), dir.path().join("a.bin")).unwrap();
        assert!(matches!(load_snapshot(dir.path()), Err(Error::Shape(_))));
    }

    #[test]
    fn version_mismatch_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        save_snapshot(&random_config(2, 3), dir.path()).unwrap();
        let path = dir.path().join(MANIFEST);
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("format_version=1", "format_version=2");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            load_snapshot(dir.path()),
            Err(Error::SnapshotVersion {
                found: 2,
                expected: 1
            })
        ));
    }

    #[test]
    fn unknown_manifest_key_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        save_snapshot(&random_config(2, 4), dir.path()).unwrap();
        let path = dir.path().join(MANIFEST);
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("colour=blue\n");
        fs::write(&path, text).unwrap();
        assert!(
            matches!(load_snapshot(dir.path()), Err(Error::Manifest(m)) if m.contains("colour"))
        );
    }
}
