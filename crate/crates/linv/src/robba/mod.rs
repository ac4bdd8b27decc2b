pub mod series;
pub mod ops;
pub mod oracle;
