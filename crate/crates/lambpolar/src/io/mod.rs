pub mod checkpoint;
pub mod pgm;
pub mod svg;
pub mod tables;
