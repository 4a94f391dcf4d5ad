//! Reading algebras and coefficient profiles from files.

use std::io::Read;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::abnormal::CoefficientProfile;
use crate::algebra::{BracketTable, DistributionData, Orientation};
use crate::{EngelError, Result, Vec4};

fn default_d1() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

fn default_d2() -> [f64; 4] {
    [0.0, 1.0, 0.0, 0.0]
}

fn identity() -> [[f64; 2]; 2] {
    [[1.0, 0.0], [0.0, 1.0]]
}

fn positive() -> i32 {
    1
}

/// JSON form of a bracket table with distribution data. `c[i][j][k]` is the
/// `e_k` component of `[e_i, e_j]`, all indices 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraInput {
    pub c: [[[f64; 4]; 4]; 4],
    #[serde(default = "default_d1")]
    pub d1: [f64; 4],
    #[serde(default = "default_d2")]
    pub d2: [f64; 4],
    #[serde(default = "identity")]
    pub metric: [[f64; 2]; 2],
    #[serde(rename = "orient_M", default = "positive")]
    pub orient_m: i32,
    #[serde(rename = "orient_D", default = "positive")]
    pub orient_d: i32,
}

impl AlgebraInput {
    pub fn from_table(table: &BracketTable) -> Self {
        AlgebraInput {
            c: *table.coefficients(),
            d1: default_d1(),
            d2: default_d2(),
            metric: identity(),
            orient_m: 1,
            orient_d: 1,
        }
    }

    pub fn parse(self) -> Result<(BracketTable, DistributionData)> {
        let table = BracketTable::new(self.c)?;
        let m = self.metric;
        let dist = DistributionData::new(
            Vec4::from(self.d1),
            Vec4::from(self.d2),
            Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]),
            Orientation::from_sign(self.orient_m)?,
            Orientation::from_sign(self.orient_d)?,
        )?;
        Ok((table, dist))
    }
}

pub fn algebra_from_json(text: &str) -> Result<(BracketTable, DistributionData)> {
    let input: AlgebraInput = serde_json::from_str(text)
        .map_err(|e| EngelError::InvalidInput(format!("algebra JSON: {e}")))?;
    input.parse()
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    t: f64,
    #[serde(rename = "T2")]
    t2: f64,
    #[serde(rename = "T6")]
    t6: f64,
}

/// Reads a sampled profile from CSV with header columns `t,T2,T6`.
pub fn profile_from_csv<R: Read>(reader: R) -> Result<CoefficientProfile> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let (mut times, mut t2, mut t6) = (Vec::new(), Vec::new(), Vec::new());
    for row in rdr.deserialize::<ProfileRow>() {
        let row = row.map_err(|e| EngelError::InvalidInput(format!("profile CSV: {e}")))?;
        times.push(row.t);
        t2.push(row.t2);
        t6.push(row.t6);
    }
    CoefficientProfile::sampled(times, t2, t6)
}
