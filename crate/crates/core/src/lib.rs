pub mod algebra;
pub mod coeff;
pub mod error;
pub mod cdga;
pub mod text;
pub mod module;
pub mod linalg;
pub mod par;
pub mod builders;
pub mod courant;
pub mod jets;
pub mod variational;
pub mod contact;
pub mod linfinity;
pub mod constructions;
pub mod bcov;
pub mod model;
pub mod report;
pub mod suite;
pub mod fixtures;
