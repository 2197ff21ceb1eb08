//! Coefficient lists and expectations shipped with the crate.

/// `G(x) = sum_{j=1}^{119} a_j cos(2 pi j x / u)` for `delta = 0.138`.
pub const G_DELTA0138_N119: &str = include_str!("../assets/g_delta0138_n119.txt");
pub const STEP_N10: &str = include_str!("../assets/step_n10.txt");
pub const STEP_N20_C: &str = include_str!("../assets/step_n20_c.txt");
pub const STEP_N150_SIGNED: &str = include_str!("../assets/step_n150_signed.txt");
pub const STEP_N208: &str = include_str!("../assets/step_n208.txt");
pub const EXPECTATIONS_MANIFEST: &str = include_str!("../assets/expectations.manifest");

/// `(file name, contents)` for every bundled asset.
pub const ALL: [(&str, &str); 6] = [
    ("g_delta0138_n119.txt", G_DELTA0138_N119),
    ("step_n10.txt", STEP_N10),
    ("step_n20_c.txt", STEP_N20_C),
    ("step_n150_signed.txt", STEP_N150_SIGNED),
    ("step_n208.txt", STEP_N208),
    ("expectations.manifest", EXPECTATIONS_MANIFEST),
];

pub fn by_name(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Coefficients of a bundled list. Panics only if the shipped file is broken.
pub fn coefficients(text: &str) -> Vec<f64> {
    crate::coeffs::parse(text).expect("bundled coefficient file parses")
}
