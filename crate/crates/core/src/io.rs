//! JSON formats shared with the command-line tool.
//!
//! Matrices are `{"dims": [...], "re": [[...]], "im": [[...]]}` in row-major
//! order. Floats are written with 17 significant digits and parsed with
//! correct rounding, so every written matrix reads back bit-identically.

use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::matfun::{CMat, C64};
use crate::measurements::{self, Pvm};
use crate::states::{self, DensityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat, dims: Option<Vec<usize>>) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        Self { dims, re: rows(|z| z.re), im: rows(|z| z.im) }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.re.len();
        let m = self.re.first().map_or(0, Vec::len);
        let rect = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == m);
        if n == 0 || m == 0 || !rect(&self.re) || !rect(&self.im) {
            return Err(Error::Parse("\"re\" and \"im\" must be equal-shape non-empty matrices".into()));
        }
        let mat = CMat::from_fn(n, m, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(mat)
    }
}

pub fn state_to_json(rho: &DensityMatrix) -> MatrixJson {
    MatrixJson::from_matrix(rho.matrix(), Some(rho.dims().to_vec()))
}

/// Checks every state invariant without modifying the stored entries.
pub fn state_from_json(j: &MatrixJson) -> Result<DensityMatrix> {
    let mat = j.to_matrix()?;
    let dims = j.dims.clone().unwrap_or_else(|| vec![mat.nrows()]);
    states::check_density(mat, dims)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixJson>,
}

pub fn channel_to_json(ch: &KrausChannel) -> ChannelJson {
    ChannelJson {
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        kraus: ch.kraus().iter().map(|k| MatrixJson::from_matrix(k, None)).collect(),
    }
}

pub fn channel_from_json(j: &ChannelJson) -> Result<KrausChannel> {
    let kraus = j.kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
    let ch = KrausChannel::new(kraus)?;
    if ch.dim_in() != j.dim_in || ch.dim_out() != j.dim_out {
        return Err(Error::DimMismatch(format!(
            "declared {}→{}, Kraus operators are {}→{}",
            j.dim_in,
            j.dim_out,
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    Ok(ch)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvmJson {
    pub dim: usize,
    pub ranks: Vec<usize>,
    pub projectors: Vec<MatrixJson>,
}

pub fn pvm_to_json(pvm: &Pvm) -> PvmJson {
    PvmJson {
        dim: pvm.dim(),
        ranks: pvm.ranks().to_vec(),
        projectors: pvm.projectors().iter().map(|p| MatrixJson::from_matrix(p, None)).collect(),
    }
}

pub fn pvm_from_json(j: &PvmJson) -> Result<Pvm> {
    let projectors = j.projectors.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
    let pvm = measurements::validate_pvm(projectors)?;
    if pvm.dim() != j.dim || pvm.ranks() != j.ranks.as_slice() {
        return Err(Error::NotPvm(format!(
            "declared dim {} ranks {:?}, projectors give dim {} ranks {:?}",
            j.dim,
            j.ranks,
            pvm.dim(),
            pvm.ranks()
        )));
    }
    Ok(pvm)
}

/// `serialize_with` adapter for measurement lists.
pub fn serialize_pvms<S: Serializer>(pvms: &[Pvm], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(pvms.iter().map(pvm_to_json))
}

/// Pretty printer that writes finite floats as `d.dddddddddddddddde±x`
/// and non-finite floats as `null`.
struct FixedDigits<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Canonical JSON text: fixed key order, 17 significant digits, trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json_str(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    state_from_json(&read_json(path)?)
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_text(path, &to_json_string(&state_to_json(rho))?)
}
