//! Output documents and number formatting.
//!
//! Structured documents are JSON with every real printed at 17 significant
//! digits; tables meant for reading use 9.

use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::entanglement::{Bipartition, ModeSpectrum};
use crate::oscillator::{Angles, Excitation};
use crate::schmidt::SchmidtMatrix;

/// `v` with 17 significant digits in scientific notation, or `null` when not finite.
pub fn fmt17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_owned()
    }
}

/// `v` rounded to 9 significant digits, fixed-point when the magnitude allows.
pub fn fmt9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_owned();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-3..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.8e}")
    }
}

fn raw(v: f64) -> Box<RawValue> {
    RawValue::from_string(fmt17(v)).expect("formatted float is valid JSON")
}

pub(crate) fn sig17<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw(*v).serialize(s)
}

pub(crate) fn sig17_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => raw(*v).serialize(s),
        None => s.serialize_none(),
    }
}

pub(crate) fn sig17_seq<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for &x in v {
        seq.serialize_element(&raw(x))?;
    }
    seq.end()
}

fn sig17_angles<S: Serializer>(a: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
    sig17_seq(a, s)
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("documents always serialize");
    out.push('\n');
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub k: u32,
    pub l: u32,
    pub m: u32,
    #[serde(serialize_with = "sig17")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientDocument {
    pub n: [u32; 3],
    #[serde(serialize_with = "sig17_angles")]
    pub angles: [f64; 3],
    pub route: String,
    pub entries: Vec<CoefficientEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "sig17_opt")]
    pub discrepancy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback_entries: Option<usize>,
}

impl CoefficientDocument {
    /// Every entry of the triangle, zeros included, in `(k, l)` lexicographic order.
    pub fn new(a: &SchmidtMatrix, angles: &Angles, route: &str) -> Self {
        Self {
            n: a.excitation().as_array(),
            angles: angles.as_array(),
            route: route.to_owned(),
            entries: a
                .iter()
                .map(|(k, l, m, value)| CoefficientEntry { k, l, m, value })
                .collect(),
            discrepancy: None,
            fallback_entries: None,
        }
    }

    pub fn to_matrix(&self) -> crate::Result<SchmidtMatrix> {
        let n = Excitation::try_from(self.n)?;
        SchmidtMatrix::from_entries(n, self.entries.iter().map(|e| (e.k, e.l, e.value)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,l,m,value\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{},{}\n", e.k, e.l, e.m, fmt17(e.value)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDocument {
    pub n: [u32; 3],
    #[serde(serialize_with = "sig17_angles")]
    pub angles: [f64; 3],
    pub bipartition: Bipartition,
    pub method: String,
    #[serde(serialize_with = "sig17_seq")]
    pub spectrum: Vec<f64>,
    #[serde(serialize_with = "sig17")]
    pub purity: f64,
    #[serde(serialize_with = "sig17")]
    pub entropy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "sig17_opt")]
    pub closed_form_purity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", serialize_with = "sig17_opt")]
    pub difference: Option<f64>,
}

impl SpectrumDocument {
    pub fn new(n: &Excitation, angles: &Angles, spectrum: &ModeSpectrum, method: &str) -> Self {
        Self {
            n: n.as_array(),
            angles: angles.as_array(),
            bipartition: spectrum.bipartition,
            method: method.to_owned(),
            spectrum: spectrum.values.clone(),
            purity: spectrum.purity(),
            entropy: spectrum.von_neumann_entropy(),
            closed_form_purity: None,
            difference: None,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,index,value\n");
        for (i, v) in self.spectrum.iter().enumerate() {
            out.push_str(&format!("eigenvalue,{i},{}\n", fmt17(*v)));
        }
        out.push_str(&format!("purity,,{}\n", fmt17(self.purity)));
        out.push_str(&format!("entropy,,{}\n", fmt17(self.entropy)));
        if let Some(c) = self.closed_form_purity {
            out.push_str(&format!("closed_form_purity,,{}\n", fmt17(c)));
        }
        if let Some(d) = self.difference {
            out.push_str(&format!("difference,,{}\n", fmt17(d)));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "n = {:?}  bipartition {}  method {}\n",
            self.n, self.bipartition, self.method
        );
        for (i, v) in self.spectrum.iter().enumerate() {
            out.push_str(&format!("  lambda[{i}] = {}\n", fmt9(*v)));
        }
        out.push_str(&format!("  purity = {}\n", fmt9(self.purity)));
        if let Some(c) = self.closed_form_purity {
            out.push_str(&format!("  closed-form purity = {}\n", fmt9(c)));
        }
        if let Some(d) = self.difference {
            out.push_str(&format!("  difference = {}\n", fmt9(d)));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionDocument {
    pub n1: u32,
    pub n2: u32,
    #[serde(serialize_with = "sig17")]
    pub phi: f64,
    #[serde(serialize_with = "sig17_seq")]
    pub coefficients: Vec<f64>,
    #[serde(serialize_with = "sig17_seq")]
    pub lambda: Vec<f64>,
    #[serde(serialize_with = "sig17")]
    pub lambda_sum: f64,
    /// Largest `|A^{k,l} - A^k delta_{l, n1+n2-k}|` over the tripartite triangle.
    #[serde(serialize_with = "sig17")]
    pub deviation: f64,
}

impl ReductionDocument {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,coefficient,lambda\n");
        for (k, (a, l)) in self.coefficients.iter().zip(&self.lambda).enumerate() {
            out.push_str(&format!("{k},{},{}\n", fmt17(*a), fmt17(*l)));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("n1 = {}  n2 = {}  phi = {}\n", self.n1, self.n2, fmt9(self.phi));
        for (k, (a, l)) in self.coefficients.iter().zip(&self.lambda).enumerate() {
            out.push_str(&format!("  k = {k}  A = {}  lambda = {}\n", fmt9(*a), fmt9(*l)));
        }
        out.push_str(&format!("  sum lambda = {}\n", fmt9(self.lambda_sum)));
        out.push_str(&format!("  deviation from tripartite = {}\n", fmt9(self.deviation)));
        out
    }
}

/// A purity surface as a structured document; `purity` is theta-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDocument {
    pub bipartition: Bipartition,
    pub n: [u32; 3],
    #[serde(serialize_with = "sig17")]
    pub vphi: f64,
    #[serde(serialize_with = "sig17")]
    pub min: f64,
    #[serde(serialize_with = "sig17")]
    pub max: f64,
    #[serde(serialize_with = "sig17_seq")]
    pub thetas: Vec<f64>,
    #[serde(serialize_with = "sig17_seq")]
    pub phis: Vec<f64>,
    #[serde(serialize_with = "sig17_seq")]
    pub purity: Vec<f64>,
}

impl From<&crate::surface::Surface> for SurfaceDocument {
    fn from(s: &crate::surface::Surface) -> Self {
        Self {
            bipartition: s.request.bipartition,
            n: s.request.excitation.as_array(),
            vphi: s.request.vphi,
            min: s.min(),
            max: s.max(),
            thetas: s.thetas.clone(),
            phis: s.phis.clone(),
            purity: s.values.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::mixing_matrix;
    use crate::schmidt::coefficients_sum;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [1.0, -0.1, std::f64::consts::PI, 1e-300, 6.02214076e23, -0.0] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt17(f64::NAN), "null");
    }

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(0.5), "0.500000000");
        assert_eq!(fmt9(1.0), "1.00000000");
        assert_eq!(fmt9(123.456), "123.456000");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(1.5e-12), "1.50000000e-12");
    }

    #[test]
    fn coefficient_document_round_trip() {
        let angles = Angles::new(0.3, -0.2, 0.9);
        let n = Excitation::new(1, 0, 2).unwrap();
        let a = coefficients_sum(&n, &mixing_matrix(&angles));
        let mut doc = CoefficientDocument::new(&a, &angles, "both");
        doc.discrepancy = Some(1.25e-16);
        let text = to_json(&doc);
        let back: CoefficientDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_matrix().unwrap(), a);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], serde_json::json!([1, 0, 2]));
        assert_eq!(v["entries"].as_array().unwrap().len(), 10);
    }

    #[test]
    fn ground_state_document() {
        let doc = CoefficientDocument::new(
            &coefficients_sum(&Excitation::ground(), &mixing_matrix(&Angles::default())),
            &Angles::default(),
            "sum",
        );
        let text = to_json(&doc);
        assert!(text.contains("\"value\": 1.0000000000000000e0"));
        assert!(!text.contains("discrepancy"));
        assert_eq!(doc.to_csv(), "k,l,m,value\n0,0,0,1.0000000000000000e0\n");
    }
}
