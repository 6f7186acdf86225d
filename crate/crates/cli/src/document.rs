//! JSON channel documents.
//!
//! Complex entries are `[re, im]` pairs; matrices are arrays of rows.

use nszcap::matrix::{c, ComplexMatrix};
use nszcap::KrausChannel;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ChannelDocument {
    Kraus { d_in: usize, d_out: usize, kraus: Vec<JsonMatrix> },
    /// Output density matrices of a classical-quantum channel.
    Cq { outputs: Vec<JsonMatrix> },
    Builtin {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
}

impl ChannelDocument {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("channel document: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_channel(ch: &KrausChannel) -> Self {
        ChannelDocument::Kraus { d_in: ch.d_in(), d_out: ch.d_out(), kraus: ch.kraus().iter().map(to_json_matrix).collect() }
    }
}

pub fn to_json_matrix(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

/// Converts a nested array to a `rows × cols` matrix, naming `field` on
/// shape errors.
pub fn from_json_matrix(field: &str, m: &JsonMatrix, rows: usize, cols: usize) -> Result<ComplexMatrix, CliError> {
    if m.len() != rows {
        return Err(CliError::Input(format!("{field}: expected {rows} rows, found {}", m.len())));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::Input(format!("{field}[{i}]: expected {cols} columns, found {}", row.len())));
        }
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| c(m[i][j][0], m[i][j][1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nszcap::builtin;

    #[test]
    fn kraus_round_trip_is_exact() {
        let ch = builtin::prop11_channel();
        let doc = ChannelDocument::from_channel(&ch);
        let back = ChannelDocument::parse(&doc.to_json()).unwrap();
        assert_eq!(doc, back);
    }

    #[test]
    fn errors_name_the_field() {
        let e = ChannelDocument::parse(r#"{"type": "kraus", "d_out": 2, "kraus": []}"#).unwrap_err();
        assert!(e.to_string().contains("d_in"), "{e}");
        let e = ChannelDocument::parse(r#"{"type": "qubit"}"#).unwrap_err();
        assert!(e.to_string().contains("qubit"), "{e}");
        let m: JsonMatrix = vec![vec![[1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]];
        let e = from_json_matrix("kraus[0]", &m, 2, 2).unwrap_err();
        assert!(e.to_string().contains("kraus[0][0]"), "{e}");
    }
}
