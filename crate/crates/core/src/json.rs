//! JSON wire formats.
//!
//! Complex matrices are arrays of rows whose entries are `[re, im]` pairs.
//! Block maps (intertwiner blocks, Choi blocks, Kraus lists) are objects
//! keyed by zero-based `"i,j"` block-pair strings; for intertwiners a key is
//! absent exactly when the block has zero size. NaN and infinite values are
//! rejected on input.

use crate::algebra::{Algebra, AlgebraElement};
use crate::bimodule::{Bimodule, Intertwiner};
use crate::cpmap::CpMap;
use crate::dilation::{GeneratingModule, Representation};
use crate::extremal::ExtremalityReport;
use crate::linalg::CMatrix;
use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::ser::Error as SerError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

type WireMatrix = Vec<Vec<[f64; 2]>>;

fn matrix_to_wire(m: &CMatrix) -> WireMatrix {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn matrix_from_wire(w: &WireMatrix) -> Result<CMatrix, String> {
    let rows = w.len();
    let cols = w.first().map(|r| r.len()).unwrap_or(0);
    for row in w {
        if row.len() != cols {
            return Err("matrix rows have unequal lengths".into());
        }
        for &[re, im] in row {
            if !re.is_finite() || !im.is_finite() {
                return Err("matrix entries must be finite".into());
            }
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        Complex64::new(w[r][c][0], w[r][c][1])
    }))
}

fn block_key(i: usize, j: usize) -> String {
    format!("{i},{j}")
}

fn parse_block_key(key: &str) -> Result<(usize, usize), String> {
    let (i, j) = key.split_once(',').ok_or_else(|| format!("malformed block key {key:?}"))?;
    let i = i.trim().parse::<usize>().map_err(|_| format!("malformed block key {key:?}"))?;
    let j = j.trim().parse::<usize>().map_err(|_| format!("malformed block key {key:?}"))?;
    Ok((i, j))
}

#[derive(Serialize, Deserialize)]
struct AlgebraWire {
    blocks: Vec<u64>,
}

impl Serialize for Algebra {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        AlgebraWire {
            blocks: self.blocks().iter().map(|&n| n as u64).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Algebra {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = AlgebraWire::deserialize(d)?;
        Algebra::new(w.blocks.iter().map(|&n| n as usize).collect()).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct ElementWire {
    algebra: Algebra,
    data: Vec<WireMatrix>,
}

impl Serialize for AlgebraElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ElementWire {
            algebra: self.parent().clone(),
            data: self.data().iter().map(matrix_to_wire).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlgebraElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = ElementWire::deserialize(d)?;
        let data = w
            .data
            .iter()
            .map(|m| matrix_from_wire(m).map_err(DeError::custom))
            .collect::<Result<Vec<_>, _>>()?;
        AlgebraElement::new(w.algebra, data).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct BimoduleWire {
    left: Algebra,
    right: Algebra,
    mult: Vec<Vec<u64>>,
}

impl Serialize for Bimodule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BimoduleWire {
            left: self.left().clone(),
            right: self.right().clone(),
            mult: self
                .mult()
                .iter()
                .map(|row| row.iter().map(|&x| x as u64).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bimodule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = BimoduleWire::deserialize(d)?;
        let mult = w
            .mult
            .iter()
            .map(|row| row.iter().map(|&x| x as usize).collect())
            .collect();
        Bimodule::new(w.left, w.right, mult).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct IntertwinerWire {
    source: Bimodule,
    target: Bimodule,
    blocks: BTreeMap<String, WireMatrix>,
}

impl Serialize for Intertwiner {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut blocks = BTreeMap::new();
        for (i, j) in self.source().block_pairs() {
            let b = self.block(i, j);
            if b.nrows() > 0 && b.ncols() > 0 {
                blocks.insert(block_key(i, j), matrix_to_wire(b));
            }
        }
        IntertwinerWire {
            source: self.source().clone(),
            target: self.target().clone(),
            blocks,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Intertwiner {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = IntertwinerWire::deserialize(d)?;
        let mut parsed: BTreeMap<(usize, usize), CMatrix> = BTreeMap::new();
        for (key, wire) in &w.blocks {
            let pos = parse_block_key(key).map_err(DeError::custom)?;
            parsed.insert(pos, matrix_from_wire(wire).map_err(DeError::custom)?);
        }
        let mut blocks = Vec::new();
        for (i, j) in w.source.block_pairs() {
            let (nu, mu) = (w.target.mult_at(i, j), w.source.mult_at(i, j));
            match parsed.remove(&(i, j)) {
                Some(b) => blocks.push(b),
                None if nu == 0 || mu == 0 => blocks.push(CMatrix::zeros(nu, mu)),
                None => {
                    return Err(DeError::custom(format!(
                        "missing intertwiner block ({i},{j}) of size {nu}×{mu}"
                    )))
                }
            }
        }
        if let Some(((i, j), _)) = parsed.into_iter().next() {
            return Err(DeError::custom(format!("unexpected intertwiner block ({i},{j})")));
        }
        Intertwiner::new(w.source, w.target, blocks).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CpMapWire {
    source: Algebra,
    target: Algebra,
    #[serde(skip_serializing_if = "Option::is_none")]
    choi: Option<BTreeMap<String, WireMatrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kraus: Option<BTreeMap<String, Vec<WireMatrix>>>,
}

impl Serialize for CpMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut choi = BTreeMap::new();
        for i in 0..self.source().block_count() {
            for j in 0..self.target().block_count() {
                choi.insert(block_key(i, j), matrix_to_wire(self.choi_block(i, j)));
            }
        }
        CpMapWire {
            source: self.source().clone(),
            target: self.target().clone(),
            choi: Some(choi),
            kraus: None,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CpMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = CpMapWire::deserialize(d)?;
        let rows = w.source.block_count();
        let cols = w.target.block_count();
        match (&w.choi, &w.kraus) {
            (Some(choi), None) => {
                let mut blocks = Vec::with_capacity(rows * cols);
                for i in 0..rows {
                    for j in 0..cols {
                        let wire = choi.get(&block_key(i, j)).ok_or_else(|| {
                            DeError::custom(format!("missing Choi block ({i},{j})"))
                        })?;
                        blocks.push(matrix_from_wire(wire).map_err(DeError::custom)?);
                    }
                }
                if choi.len() != rows * cols {
                    return Err(DeError::custom("unexpected Choi block key"));
                }
                CpMap::new(w.source, w.target, blocks).map_err(DeError::custom)
            }
            (None, Some(kraus)) => {
                let mut table: Vec<Vec<Vec<CMatrix>>> = vec![vec![Vec::new(); cols]; rows];
                for (key, ops) in kraus {
                    let (i, j) = parse_block_key(key).map_err(DeError::custom)?;
                    if i >= rows || j >= cols {
                        return Err(DeError::custom(format!("Kraus key ({i},{j}) out of range")));
                    }
                    table[i][j] = ops
                        .iter()
                        .map(|m| matrix_from_wire(m).map_err(DeError::custom))
                        .collect::<Result<_, _>>()?;
                }
                CpMap::from_kraus(w.source, w.target, &table).map_err(DeError::custom)
            }
            _ => Err(DeError::custom("a map needs exactly one of \"choi\" or \"kraus\"")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GeneratingModuleWire {
    base: Algebra,
    mult: Vec<u64>,
}

impl Serialize for GeneratingModule {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GeneratingModuleWire {
            base: self.base().clone(),
            mult: self.mult().iter().map(|&x| x as u64).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneratingModule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = GeneratingModuleWire::deserialize(d)?;
        GeneratingModule::new(w.base, w.mult.iter().map(|&x| x as usize).collect()).map_err(DeError::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RepresentationWire {
    environment: Bimodule,
    #[serde(rename = "V")]
    v: Intertwiner,
}

impl Serialize for Representation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RepresentationWire {
            environment: self.environment.clone(),
            v: self.v.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Representation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = RepresentationWire::deserialize(d)?;
        Ok(Representation {
            environment: w.environment,
            v: w.v,
        })
    }
}

impl Serialize for ExtremalityReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct ReportWire<'a> {
            extremal: bool,
            kernel_dimension: usize,
            unit_image: &'a AlgebraElement,
            environment_mult: Vec<Vec<u64>>,
            witness: &'a Option<AlgebraElement>,
        }
        if false {
            return Err(S::Error::custom("unreachable"));
        }
        ReportWire {
            extremal: self.extremal,
            kernel_dimension: self.kernel_dimension,
            unit_image: &self.unit_image,
            environment_mult: self
                .environment
                .mult()
                .iter()
                .map(|row| row.iter().map(|&x| x as u64).collect())
                .collect(),
            witness: &self.witness,
        }
        .serialize(s)
    }
}

/// Parses a value of any supported type from a JSON string.
pub fn from_str<T: serde::de::DeserializeOwned>(s: &str) -> crate::error::Result<T> {
    serde_json::from_str(s).map_err(|e| crate::error::Error::Json(e.to_string()))
}

/// Serializes a value to a compact JSON string.
pub fn to_string<T: Serialize>(v: &T) -> crate::error::Result<String> {
    serde_json::to_string(v).map_err(|e| crate::error::Error::Json(e.to_string()))
}

/// Serializes a value to human-readable JSON.
pub fn to_string_pretty<T: Serialize>(v: &T) -> crate::error::Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| crate::error::Error::Json(e.to_string()))
}
