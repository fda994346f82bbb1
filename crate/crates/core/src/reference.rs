//! Small reference systems with known properties.

use nalgebra::DMatrix;

use crate::sysmodel::{Dimensions, StandardSystem};

/// One damped cavity mode driven by one field: `A = -½I`, `B = I`, `C = -I`,
/// `D = I`. Fully quantum and realizable.
pub fn damped_cavity() -> StandardSystem {
    let i2 = DMatrix::<f64>::identity(2, 2);
    StandardSystem::new(
        Dimensions::new(1, 0, 1, 1, 0),
        &i2 * -0.5,
        i2.clone(),
        -&i2,
        i2,
    )
}

/// A realizable mixed system with one quantum mode, one classical state,
/// three field channels, one quantum output pair and one classical output.
pub fn mixed_feedback() -> StandardSystem {
    let a = DMatrix::from_row_slice(
        3,
        3,
        &[-9.0, -3.0, -1.0, 1.0, -7.0, -3.0, -0.72, -0.6, -12.0],
    );
    let b = DMatrix::from_row_slice(
        3,
        6,
        &[
            1.0, 2.0, -7.0, 0.0, -3.0, 5.0, //
            2.0, 5.0, 1.0, -3.0, 6.0, -8.0, //
            0.0, 0.12, 0.0, 0.0, 0.0, -0.16,
        ],
    );
    let c = DMatrix::from_row_slice(3, 3, &[38.0, 46.0, -42.0, 0.31, 0.4, 0.35, 4.2, -6.0, 5.0]);
    let d = DMatrix::from_row_slice(
        3,
        6,
        &[
            8.0, 0.0, 10.0, 0.0, 6.0, 0.0, //
            0.0, 0.04, 0.0, 0.05, 0.0, 0.03, //
            0.0, 0.8, 0.0, -1.0, 0.0, 0.6,
        ],
    );
    StandardSystem::new(Dimensions::new(1, 1, 3, 1, 1), a, b, c, d)
}
