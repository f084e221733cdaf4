//! Precomputed leg-energy grid over `(X_f, Z_f)` with bilinear lookups.

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};
use crate::leg::{LegDisplacement, LegSimulator};
use crate::scalar::{from_usize, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GridSpec<T> {
    #[serde(default)]
    pub x_min: T,
    pub x_max: T,
    pub x_step: T,
    pub z_min: T,
    pub z_max: T,
    pub z_step: T,
}

impl<T: Scalar> GridSpec<T> {
    /// `X_f` in `[0, 120]` and `Z_f` in `[-60, 60]`, 2 m steps.
    pub fn default_grid() -> Self {
        Self {
            x_min: T::zero(),
            x_max: T::lit(120.0),
            x_step: T::lit(2.0),
            z_min: T::lit(-60.0),
            z_max: T::lit(60.0),
            z_step: T::lit(2.0),
        }
    }

    fn axis_count(min: T, max: T, step: T, name: &str) -> Result<usize> {
        if !(step > T::zero()) || !min.is_finite() || !max.is_finite() || !(max > min) {
            return Err(Error::InvalidParams(format!("{name} axis needs min < max and step > 0")));
        }
        let spans = (max - min) / step;
        let rounded = spans.round();
        if (spans - rounded).abs() > T::lit(1e-6) * rounded.max(T::one()) {
            return Err(Error::InvalidParams(format!(
                "{name} axis range is not a whole number of steps"
            )));
        }
        Ok(rounded.to_usize().expect("axis size fits") + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_min < T::zero() {
            return Err(Error::InvalidParams("x_min must be non-negative".into()));
        }
        self.x_count()?;
        self.z_count()?;
        Ok(())
    }

    pub fn x_count(&self) -> Result<usize> {
        Self::axis_count(self.x_min, self.x_max, self.x_step, "x")
    }

    pub fn z_count(&self) -> Result<usize> {
        Self::axis_count(self.z_min, self.z_max, self.z_step, "z")
    }

    pub fn x_node(&self, i: usize) -> T {
        self.x_min + from_usize::<T>(i) * self.x_step
    }

    pub fn z_node(&self, j: usize) -> T {
        self.z_min + from_usize::<T>(j) * self.z_step
    }

    /// Whether a leg lies inside the node hull.
    pub fn contains(&self, leg: &LegDisplacement<T>) -> bool {
        match (self.x_count(), self.z_count()) {
            (Ok(nx), Ok(nz)) => {
                leg.x_f >= self.x_min
                    && leg.x_f <= self.x_node(nx - 1)
                    && leg.z_f >= self.z_min
                    && leg.z_f <= self.z_node(nz - 1)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    /// Integration step used for every cell (s).
    pub dt: f64,
    pub code_version: String,
    #[serde(default)]
    pub vehicle_label: String,
}

/// Row-major energy grid: `values[i * z_count + j]` is the energy (J) of
/// the leg `(x_node(i), z_node(j))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EnergyTable<T> {
    pub spec: GridSpec<T>,
    pub vehicle_fingerprint: String,
    pub metadata: TableMetadata,
    pub values: Vec<T>,
}

/// Whether [`EnergyTable::load`] checks the vehicle fingerprint.
#[derive(Debug, Clone, Copy)]
pub enum FingerprintCheck<'a> {
    Require(&'a str),
    Skip,
}

impl<T: Scalar> EnergyTable<T> {
    /// Simulates every grid cell. Cells are independent and evaluated in
    /// parallel; the result does not depend on the number of workers.
    pub fn build(spec: GridSpec<T>, vehicle: &VehicleParams<T>, dt: T) -> Result<Self> {
        spec.validate()?;
        let nx = spec.x_count()?;
        let nz = spec.z_count()?;
        let sim = LegSimulator::new(vehicle.clone(), dt)?;
        log::info!("building {nx} x {nz} energy table");

        let cells: Vec<Result<T>> = (0..nx * nz)
            .into_par_iter()
            .map(|idx| {
                let leg = LegDisplacement::new(spec.x_node(idx / nz), spec.z_node(idx % nz));
                sim.simulate(&leg).map(|r| r.energy).map_err(|e| Error::TableCell {
                    x_f: leg.x_f.as_f64(),
                    z_f: leg.z_f.as_f64(),
                    source: Box::new(e),
                })
            })
            .collect();
        let values = cells.into_iter().collect::<Result<Vec<T>>>()?;

        Ok(Self {
            spec,
            vehicle_fingerprint: vehicle.fingerprint(),
            metadata: TableMetadata {
                dt: dt.as_f64(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                vehicle_label: vehicle.label.clone(),
            },
            values,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (
            self.spec.x_count().unwrap_or(0),
            self.spec.z_count().unwrap_or(0),
        )
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        let (_, nz) = self.shape();
        self.values[i * nz + j]
    }

    /// Bilinear interpolation; exact at grid nodes, no extrapolation.
    pub fn interpolate(&self, leg: &LegDisplacement<T>) -> Result<T> {
        let spec = &self.spec;
        let (nx, nz) = self.shape();
        if !spec.contains(leg) {
            return Err(Error::OutOfHull {
                x_f: leg.x_f.as_f64(),
                z_f: leg.z_f.as_f64(),
                x_min: spec.x_min.as_f64(),
                x_max: spec.x_node(nx - 1).as_f64(),
                z_min: spec.z_min.as_f64(),
                z_max: spec.z_node(nz - 1).as_f64(),
            });
        }
        let locate = |v: T, min: T, step: T, n: usize| {
            let cell = ((v - min) / step).floor().to_usize().unwrap_or(0).min(n - 2);
            let frac = (v - (min + from_usize::<T>(cell) * step)) / step;
            (cell, frac)
        };
        let (i, fx) = locate(leg.x_f, spec.x_min, spec.x_step, nx);
        let (j, fz) = locate(leg.z_f, spec.z_min, spec.z_step, nz);
        let one = T::one();
        let v00 = self.value(i, j);
        let v10 = self.value(i + 1, j);
        let v01 = self.value(i, j + 1);
        let v11 = self.value(i + 1, j + 1);
        Ok((one - fx) * (one - fz) * v00 + fx * (one - fz) * v10 + (one - fx) * fz * v01 + fx * fz * v11)
    }

    /// Validates shape, finiteness and the zero-length cell.
    pub fn check(&self) -> Result<()> {
        self.spec
            .validate()
            .map_err(|e| Error::MalformedTable(e.to_string()))?;
        let (nx, nz) = self.shape();
        if self.values.len() != nx * nz {
            return Err(Error::MalformedTable(format!(
                "expected {} values for a {nx} x {nz} grid, found {}",
                nx * nz,
                self.values.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::MalformedTable("values must be finite and non-negative".into()));
        }
        if let (Some(i), Some(j)) = (self.node_index_x(T::zero()), self.node_index_z(T::zero())) {
            if self.value(i, j) != T::zero() {
                return Err(Error::MalformedTable("null leg must cost zero".into()));
            }
        }
        Ok(())
    }

    fn node_index_x(&self, x: T) -> Option<usize> {
        (0..self.shape().0).find(|&i| self.spec.x_node(i) == x)
    }

    fn node_index_z(&self, z: T) -> Option<usize> {
        (0..self.shape().1).find(|&j| self.spec.z_node(j) == z)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer(&mut w, self).map_err(|e| Error::json(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, fingerprint: FingerprintCheck<'_>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let table: Self = serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::json(path, e))?;
        table.check()?;
        if let FingerprintCheck::Require(expected) = fingerprint {
            if table.vehicle_fingerprint != expected {
                return Err(Error::FingerprintMismatch {
                    expected: expected.to_string(),
                    found: table.vehicle_fingerprint,
                });
            }
        }
        Ok(table)
    }
}
