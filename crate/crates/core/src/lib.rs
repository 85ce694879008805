pub mod error;
pub mod jet;
pub mod linalg;
pub mod tensor;
pub mod fields;
pub mod manifold;
pub mod contact;
pub mod catalog;
pub mod submanifold;
pub mod geometry;
pub mod tachibana;
pub mod harness;
pub mod report;
