//! Pseudohermitian second fundamental form, shape operator and umbilicity of
//! hypersurfaces in the Heisenberg group `H_n`, with the curve flows, phase
//! plane and level-set checks that accompany them.

pub mod catalog;
pub mod dual;
pub mod error;
pub mod field;
pub mod flows;
pub mod heisenberg;
pub mod linalg;
pub mod ode;
pub mod output;
pub mod phaseplane;
pub mod surface;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Derivatives, Expr, SurfaceDef};
pub use heisenberg::{HorizontalVector, Point, TangentVector};
pub use surface::{build_frame, report, shape_matrix, FrameBundle, SurfaceReport};
