pub mod error;
pub mod linalg;
pub mod symmetric;
pub mod haar;
pub mod hamming;
pub mod certifier;
