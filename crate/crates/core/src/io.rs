//! File formats: JSON field files, the thermodynamic CSV, orbit JSON and the
//! verification report. Floats are written in shortest round-trip form, so
//! reading a file back reproduces every value bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{PhaseGrid, ScalarField, VectorField};
use crate::orbit::ClassicalOrbit;
use crate::td::ThermoCurve;

pub const FIELD_SCHEMA: &str = "wigner-flow/field/v1";
pub const ORBITS_SCHEMA: &str = "wigner-flow/orbits/v1";
pub const THERMO_HEADER: [&str; 9] =
    ["beta", "z_cl", "z_q", "purity_cl", "purity_q", "energy_cl", "energy_q", "heat_cl", "heat_q"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_x: usize,
    pub n_k: usize,
    pub periodic: [bool; 2],
}

impl GridSpec {
    pub fn to_grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new((self.x_min, self.x_max), (self.k_min, self.k_max), (self.n_x, self.n_k), (self.periodic[0], self.periodic[1]))
    }
}

impl From<&PhaseGrid> for GridSpec {
    fn from(g: &PhaseGrid) -> Self {
        GridSpec {
            x_min: g.x_min(),
            x_max: g.x_max(),
            k_min: g.k_min(),
            k_max: g.k_max(),
            n_x: g.n_x(),
            n_k: g.n_k(),
            periodic: g.periodic(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldParams {
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorValues {
    #[serde(serialize_with = "ser_values", deserialize_with = "de_values")]
    pub x: Vec<f64>,
    #[serde(serialize_with = "ser_values", deserialize_with = "de_values")]
    pub k: Vec<f64>,
}

/// One sampled field. `values` is row-major with `x` as the outer index; for
/// vector fields it holds `|J|` and the components go in `vector_values`.
/// Undefined samples (NaN) are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFileV1 {
    pub schema: String,
    pub field_name: String,
    pub grid: GridSpec,
    pub params: FieldParams,
    #[serde(serialize_with = "ser_values", deserialize_with = "de_values")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_values: Option<VectorValues>,
}

fn ser_values<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| if x.is_finite() { Some(*x) } else { None }))
}

fn de_values<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
    Ok(raw.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
}

impl FieldFileV1 {
    pub fn scalar(name: &str, field: &ScalarField, params: FieldParams) -> Self {
        FieldFileV1 {
            schema: FIELD_SCHEMA.to_string(),
            field_name: name.to_string(),
            grid: field.grid().into(),
            params,
            values: field.values().to_vec(),
            vector_values: None,
        }
    }

    pub fn vector(name: &str, field: &VectorField, params: FieldParams) -> Self {
        FieldFileV1 {
            schema: FIELD_SCHEMA.to_string(),
            field_name: name.to_string(),
            grid: field.grid().into(),
            params,
            values: field.magnitude().into_values(),
            vector_values: Some(VectorValues { x: field.x_values().to_vec(), k: field.k_values().to_vec() }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != FIELD_SCHEMA {
            return Err(Error::Format(format!("schema '{}', expected '{FIELD_SCHEMA}'", self.schema)));
        }
        let n = self.grid.to_grid()?.len();
        let check = |what: &str, len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(Error::Format(format!("{}: {what} has {len} entries, grid has {n}", self.field_name)))
            }
        };
        check("values", self.values.len())?;
        if let Some(v) = &self.vector_values {
            check("vector_values.x", v.x.len())?;
            check("vector_values.k", v.k.len())?;
        }
        Ok(())
    }

    pub fn to_scalar_field(&self) -> Result<ScalarField> {
        self.validate()?;
        ScalarField::from_values(self.grid.to_grid()?, self.values.clone())
    }

    pub fn to_vector_field(&self) -> Result<VectorField> {
        self.validate()?;
        let v = self
            .vector_values
            .as_ref()
            .ok_or_else(|| Error::Format(format!("{} carries no vector_values", self.field_name)))?;
        VectorField::from_components(self.grid.to_grid()?, v.x.clone(), v.k.clone())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut s)?;
    Ok(s)
}

/// Writes a set of fields as one JSON array.
pub fn write_fields(path: &Path, fields: &[FieldFileV1]) -> Result<()> {
    for f in fields {
        f.validate()?;
    }
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, fields)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a field file holding either one field object or an array of them.
pub fn read_fields(path: &Path) -> Result<Vec<FieldFileV1>> {
    let text = read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let fields: Vec<FieldFileV1> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    for f in &fields {
        f.validate()?;
    }
    Ok(fields)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFileV1 {
    pub schema: String,
    pub model: String,
    pub nu2: f64,
    pub orbits: Vec<ClassicalOrbit>,
}

impl OrbitFileV1 {
    pub fn new(model: &str, nu2: f64, orbits: Vec<ClassicalOrbit>) -> Self {
        OrbitFileV1 { schema: ORBITS_SCHEMA.to_string(), model: model.to_string(), nu2, orbits }
    }
}

pub fn write_orbits(path: &Path, file: &OrbitFileV1) -> Result<()> {
    write_json(path, file)
}

pub fn read_orbits(path: &Path) -> Result<OrbitFileV1> {
    let file: OrbitFileV1 = serde_json::from_str(&read_to_string(path)?)?;
    if file.schema != ORBITS_SCHEMA {
        return Err(Error::Format(format!("schema '{}', expected '{ORBITS_SCHEMA}'", file.schema)));
    }
    Ok(file)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Decimal form that parses back to the same `f64`.
fn decimal(v: f64) -> Result<String> {
    if !v.is_finite() {
        return Err(Error::Format(format!("non-finite value {v} in thermodynamic curve")));
    }
    Ok(format!("{v}"))
}

pub fn write_thermo<W: Write>(out: W, curve: &ThermoCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(THERMO_HEADER).map_err(csv_err)?;
    for i in 0..curve.betas.len() {
        let row = [
            curve.betas[i],
            curve.z_classical[i],
            curve.z_corrected[i],
            curve.purity_cl[i],
            curve.purity_q[i],
            curve.energy_cl[i],
            curve.energy_q[i],
            curve.heat_cl[i],
            curve.heat_q[i],
        ];
        let fields = row.iter().map(|&v| decimal(v)).collect::<Result<Vec<_>>>()?;
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_thermo_file(path: &Path, curve: &ThermoCurve) -> Result<()> {
    write_thermo(create(path)?, curve)
}

pub fn read_thermo<R: Read>(input: R) -> Result<ThermoCurve> {
    let mut r = csv::Reader::from_reader(input);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(THERMO_HEADER.iter().copied()) {
        return Err(Error::Format(format!("thermo header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut cols: [Vec<f64>; 9] = Default::default();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != 9 {
            return Err(Error::Format(format!("row with {} fields", record.len())));
        }
        for (col, field) in cols.iter_mut().zip(record.iter()) {
            col.push(field.parse().map_err(|_| Error::Format(format!("bad number '{field}'")))?);
        }
    }
    if cols[0].windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Format("beta column is not ascending".into()));
    }
    let [betas, z_classical, z_corrected, purity_cl, purity_q, energy_cl, energy_q, heat_cl, heat_q] = cols;
    Ok(ThermoCurve { betas, z_classical, z_corrected, purity_cl, purity_q, energy_cl, energy_q, heat_cl, heat_q })
}

pub fn read_thermo_file(path: &Path) -> Result<ThermoCurve> {
    read_thermo(BufReader::new(File::open(path)?))
}
