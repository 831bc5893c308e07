pub mod analysis;
pub mod characterize;
pub mod instance;
pub mod linalg;
pub mod linegeom;
pub mod oracle;
pub mod scalar;
pub mod pgraph;
pub mod rigidity;
