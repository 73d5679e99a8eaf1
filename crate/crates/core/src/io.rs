//! JSON and CSV output with 17 significant digits, atomic file writes, and tensor files.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::bases::UnitaryErrorBasis;
use crate::error::{Error, Result};
use crate::mps::MPSTensor;

/// Pretty JSON whose floats are written as `{:.16e}` (17 significant digits).
pub struct PreciseFormatter {
    inner: PrettyFormatter<'static>,
}

impl Default for PreciseFormatter {
    fn default() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// `{:.16e}` for finite values; `NaN`, `inf` and `-inf` otherwise.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Parse(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let io = |e: std::io::Error| Error::Parse(format!("writing {}: {e}", path.display()));
    {
        let mut f = std::fs::File::create(&tmp).map_err(io)?;
        f.write_all(contents).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

/// Tensor file: the tensor plus an optional basis under which it is prepared.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub tensor: MPSTensor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<UnitaryErrorBasis>,
}

/// Parses a tensor file (either a bare tensor or an object with a `tensor` field) and
/// re-validates its shape.
pub fn parse_tensor_file(text: &str) -> Result<TensorFile> {
    let value: serde_json::Value = from_json(text)?;
    let file: TensorFile = if value.get("tensor").is_some() {
        serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?
    } else {
        TensorFile {
            tensor: serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?,
            basis: None,
        }
    };
    let t = &file.tensor;
    let tensor = MPSTensor::new(t.d, t.chi_left, t.chi_right, t.data().to_vec())
        .map_err(|e| Error::Parse(format!("tensor: {e}")))?;
    if let Some(b) = &file.basis {
        b.validate().map_err(|e| Error::Parse(format!("basis: {e}")))?;
        for (k, v) in b.elements.iter().enumerate() {
            if v.shape() != [b.dim, b.dim] {
                return Err(Error::Parse(format!("basis element {k} has shape {:?}", v.shape())));
            }
        }
    }
    Ok(TensorFile { tensor, basis: file.basis })
}

pub fn read_tensor_file(path: &Path) -> Result<TensorFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("reading {}: {e}", path.display())))?;
    parse_tensor_file(&text)
}

/// One CSV line with floats in `{:.16e}`.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| format_f64(v)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_f64(1.0 / 3.0), "3.3333333333333331e-1");
        let s = to_json(&vec![0.1f64, -2.5]).unwrap();
        assert!(s.contains("1.0000000000000001e-1") && s.contains("-2.5000000000000000e0"));
        let back: Vec<f64> = from_json(&s).unwrap();
        assert_eq!(back, vec![0.1, -2.5]);
    }

    #[test]
    fn complex_round_trip_is_exact() {
        let z = vec![C64::new(std::f64::consts::PI, -1e-300), C64::new(0.1 + 0.2, 7.0)];
        let s = to_json(&z).unwrap();
        let back: Vec<C64> = from_json(&s).unwrap();
        assert_eq!(back, z);
        assert!(s.contains('['));
    }

    #[test]
    fn tensor_file_round_trip_and_validation() {
        let a = crate::mps::tetrahedron_tensor(&crate::mps::SimplexWeights::from_pauli([0.1, 0.2, 0.3, 0.4]).unwrap()).unwrap();
        let f = TensorFile { tensor: a.clone(), basis: Some(crate::bases::pauli_basis()) };
        let back = parse_tensor_file(&to_json(&f).unwrap()).unwrap();
        assert_eq!(back.tensor, a);
        let bare = parse_tensor_file(&to_json(&a).unwrap()).unwrap();
        assert!(bare.basis.is_none());
        let bad = r#"{"d": 2, "chi_left": 2, "chi_right": 2, "data": [[1.0, 0.0]]}"#;
        assert!(matches!(parse_tensor_file(bad), Err(Error::Parse(_))));
        assert!(matches!(parse_tensor_file("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("mprep-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(&dir).unwrap().count(), 1);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
