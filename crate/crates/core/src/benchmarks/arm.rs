//! Planar robotic arm reaching for the point (1, 1).
//!
//! A genotype `α ∈ [0, 1]^d` maps to joint angles
//! `α'_i = 2π · α_max · (α_i − 0.5)`. Every link has length `L / d`. Each
//! joint rotates by its angle and then extends the link along the rotated
//! axis, so link `i` points along the cumulative angle `α'_1 + … + α'_i`.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::types::{Bounds, Genotype, Sense, Space, Task};

pub const TARGET_POINT: (f64, f64) = (1.0, 1.0);

/// Weight on the total distance of joints outside `[0, 1]`.
pub const BOUND_PENALTY: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ArmTask {
    length: f64,
    max_angle: f64,
    space: Space,
}

impl ArmTask {
    /// Arm of total `length` in `(0, √2]`, angle scale `max_angle` in `(0, 1]`.
    pub fn new(length: f64, max_angle: f64, joints: usize) -> Result<Self> {
        if !(length > 0.0 && length <= SQRT_2) {
            return Err(Error::InvalidInput(format!("arm length {length} outside (0, √2]")));
        }
        if !(max_angle > 0.0 && max_angle <= 1.0) {
            return Err(Error::InvalidInput(format!("max angle {max_angle} outside (0, 1]")));
        }
        if joints == 0 {
            return Err(Error::InvalidInput("arm needs at least one joint".into()));
        }
        Ok(ArmTask {
            length,
            max_angle,
            space: Space::Real {
                bounds: Bounds::uniform(joints, 0.0, 1.0)?,
            },
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn max_angle(&self) -> f64 {
        self.max_angle
    }

    pub fn joints(&self) -> usize {
        self.space.dim()
    }

    pub fn tip(&self, alpha: &[f64]) -> (f64, f64) {
        arm_tip(alpha, self.length, self.max_angle)
    }

    /// `−‖tip − (1, 1)‖`, without the bound penalty.
    pub fn fitness(&self, alpha: &[f64]) -> f64 {
        let (x, y) = self.tip(alpha);
        -((x - TARGET_POINT.0).hypot(y - TARGET_POINT.1))
    }
}

/// End-effector position from the chained homogeneous transforms.
pub fn arm_tip(alpha: &[f64], length: f64, max_angle: f64) -> (f64, f64) {
    let link = length / alpha.len() as f64;
    let mut frame = Matrix3::identity();
    for &a in alpha {
        let angle = 2.0 * PI * max_angle * (a - 0.5);
        let (s, c) = angle.sin_cos();
        #[rustfmt::skip]
        let joint = Matrix3::new(
            c, -s, link * c,
            s,  c, link * s,
            0.0, 0.0, 1.0,
        );
        frame *= joint;
    }
    (frame[(0, 2)], frame[(1, 2)])
}

fn bound_violation(alpha: &[f64]) -> f64 {
    alpha.iter().map(|&a| (a - 1.0).max(-a).max(0.0)).sum()
}

impl Task for ArmTask {
    fn space(&self) -> &Space {
        &self.space
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn objective(&self, g: &Genotype) -> f64 {
        let alpha = g.as_real().expect("arm genotypes are real");
        -self.fitness(alpha) + BOUND_PENALTY * bound_violation(alpha)
    }

    fn fitness_lower_bound(&self) -> Option<f64> {
        Some(-2.0 * SQRT_2)
    }

    fn describe(&self) -> String {
        format!("arm-L{}-a{}-d{}", self.length, self.max_angle, self.joints())
    }
}
