pub mod analytic;
pub mod assets;
pub mod coeffs;
pub mod lowerbound;
pub mod lp;
pub mod manifest;
pub mod numeric;
pub mod report;
pub mod search;
pub mod stepfn;
