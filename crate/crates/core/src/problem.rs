//! The discrete problem shared by both solvers: the collision operator on a
//! phase grid, the time slab it runs on, and the constants of the
//! near-vacuum theory for its `(alpha, beta, d)`.

use serde::{Deserialize, Serialize};

use crate::bounds::{compute_constants, BoundConstants};
use crate::error::{Error, Result};
use crate::phase::{InitialDataSpec, MaxwellianParams, PhaseField, PhaseGrid, SlabGeometry, TimeSlab};
use crate::resonance::{CollisionOperator, Reconstruction, SphereRule};

#[derive(Clone, Debug)]
pub struct Problem {
    op: CollisionOperator,
    geometry: SlabGeometry,
    constants: BoundConstants,
}

impl Problem {
    pub fn new(op: CollisionOperator, horizon: f64, nt: usize) -> Result<Self> {
        let geometry = SlabGeometry::new(*op.grid(), horizon, nt)?;
        let constants = compute_constants(op.params())?;
        Ok(Problem {
            op,
            geometry,
            constants,
        })
    }

    /// Builds the operator from its parts; `sphere_order` is passed to
    /// [`SphereRule::for_dim`].
    pub fn build(
        params: MaxwellianParams,
        grid: PhaseGrid,
        sphere_order: usize,
        reconstruction: Reconstruction,
        horizon: f64,
        nt: usize,
    ) -> Result<Self> {
        let rule = SphereRule::for_dim(grid.dim, sphere_order)?;
        let op = CollisionOperator::new(grid, params, rule, reconstruction)?;
        Problem::new(op, horizon, nt)
    }

    pub fn op(&self) -> &CollisionOperator {
        &self.op
    }

    pub fn geometry(&self) -> &SlabGeometry {
        &self.geometry
    }

    pub fn constants(&self) -> &BoundConstants {
        &self.constants
    }

    pub fn params(&self) -> &MaxwellianParams {
        self.op.params()
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.op.grid()
    }

    pub fn sample(&self, f0: &InitialDataSpec) -> PhaseField {
        f0.sample(self.grid())
    }

    /// The time-independent sharp-frame slab `c e^{-alpha|x|^2 - beta|v|^2}`.
    pub fn envelope_slab(&self, c: f64) -> TimeSlab {
        let p = *self.params();
        let field = PhaseField::from_fn(*self.grid(), |x, v| c * p.envelope(x, v));
        TimeSlab::constant(&field, &self.geometry)
    }

    /// Grid norm of the data, rejected above `R_max`.
    pub fn admissible_norm(&self, f0: &PhaseField) -> Result<f64> {
        let norm = f0.maxwellian_norm(self.params());
        if norm > self.constants.r_max {
            return Err(Error::Admissibility {
                norm,
                r_max: self.constants.r_max,
            });
        }
        Ok(norm)
    }
}

/// One asserted inequality `value <= limit`, kept for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed {
            Ok(())
        } else {
            Err(Error::BoundViolation {
                check: self.name,
                value: self.value,
                limit: self.limit,
            })
        }
    }
}

/// The first failing check as an error.
pub fn all_passed(checks: &[Check]) -> Result<()> {
    match checks.iter().find(|c| !c.passed) {
        Some(c) => c.clone().into_result(),
        None => Ok(()),
    }
}
