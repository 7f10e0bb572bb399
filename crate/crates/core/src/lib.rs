//! Exterior calculus over moving frames, with G2 and Spin(7) structure tools
//! and an S¹-quotient toolkit.

pub mod expr;
pub mod frame;
pub mod check;
pub mod g2;
pub mod linalg;
pub mod spin7;
pub mod curvature;
pub mod quotient;
pub mod catalog;
pub mod verify;
