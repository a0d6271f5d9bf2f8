//! Potential sampling rules `x -> v(x + iy)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::dynamics::{stream_value, BaseSystem, Phase};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialForm {
    /// `sum_k c_k e^{2 pi i k x}`; keys are the frequencies `k`.
    Fourier {
        coeffs: BTreeMap<i32, C64>,
    },
    /// `2 lambda cos 2 pi x`.
    Cosine {
        lambda: f64,
    },
    /// `lambda e^{2 pi i x}`.
    SingleExponential {
        lambda: C64,
    },
    Constant {
        c: C64,
    },
    /// Reads the value of an i.i.d. base stream.
    IidDiagonal,
}

/// A sampling rule together with its imaginary shift.
///
/// Serialized flat: `{"form": "cosine", "lambda": 2.0, "imag_shift": 0.0}`.
/// Complex numbers are written as a number or as `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPotential", into = "RawPotential")]
pub struct Potential {
    pub form: PotentialForm,
    /// Imaginary shift `y`: the potential is sampled at `x + iy`.
    pub imag_shift: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum CNum {
    Real(f64),
    Pair([f64; 2]),
}

impl From<CNum> for C64 {
    fn from(c: CNum) -> C64 {
        match c {
            CNum::Real(r) => C64::new(r, 0.0),
            CNum::Pair([r, i]) => C64::new(r, i),
        }
    }
}

impl From<C64> for CNum {
    fn from(c: C64) -> CNum {
        CNum::Pair([c.re, c.im])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum FormTag {
    Fourier,
    Cosine,
    SingleExponential,
    Constant,
    IidDiagonal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    form: FormTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<CNum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<CNum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coeffs: Option<BTreeMap<i32, CNum>>,
    #[serde(default)]
    imag_shift: f64,
}

impl TryFrom<RawPotential> for Potential {
    type Error = String;

    fn try_from(raw: RawPotential) -> std::result::Result<Self, String> {
        let need = |v: Option<CNum>, name: &str| {
            v.map(C64::from).ok_or_else(|| format!("potential form {:?} requires field `{name}`", raw.form))
        };
        let form = match raw.form {
            FormTag::Cosine => {
                let l = need(raw.lambda, "lambda")?;
                if l.im != 0.0 {
                    return Err("cosine amplitude `lambda` must be real".into());
                }
                PotentialForm::Cosine { lambda: l.re }
            }
            FormTag::SingleExponential => PotentialForm::SingleExponential { lambda: need(raw.lambda, "lambda")? },
            FormTag::Constant => PotentialForm::Constant { c: need(raw.c, "c")? },
            FormTag::Fourier => PotentialForm::Fourier {
                coeffs: raw
                    .coeffs
                    .ok_or("potential form Fourier requires field `coeffs`")?
                    .into_iter()
                    .map(|(k, v)| (k, v.into()))
                    .collect(),
            },
            FormTag::IidDiagonal => PotentialForm::IidDiagonal,
        };
        if !raw.imag_shift.is_finite() {
            return Err("imag_shift must be finite".into());
        }
        Ok(Potential { form, imag_shift: raw.imag_shift })
    }
}

impl From<Potential> for RawPotential {
    fn from(p: Potential) -> RawPotential {
        let mut raw =
            RawPotential { form: FormTag::Constant, lambda: None, c: None, coeffs: None, imag_shift: p.imag_shift };
        match p.form {
            PotentialForm::Cosine { lambda } => {
                raw.form = FormTag::Cosine;
                raw.lambda = Some(CNum::Real(lambda));
            }
            PotentialForm::SingleExponential { lambda } => {
                raw.form = FormTag::SingleExponential;
                raw.lambda = Some(lambda.into());
            }
            PotentialForm::Constant { c } => raw.c = Some(c.into()),
            PotentialForm::Fourier { coeffs } => {
                raw.form = FormTag::Fourier;
                raw.coeffs = Some(coeffs.into_iter().map(|(k, v)| (k, v.into())).collect());
            }
            PotentialForm::IidDiagonal => raw.form = FormTag::IidDiagonal,
        }
        raw
    }
}

impl From<PotentialForm> for Potential {
    fn from(form: PotentialForm) -> Self {
        Potential { form, imag_shift: 0.0 }
    }
}

impl Potential {
    pub fn zero() -> Self {
        PotentialForm::Constant { c: C64::new(0.0, 0.0) }.into()
    }

    pub fn constant(c: C64) -> Self {
        PotentialForm::Constant { c }.into()
    }

    pub fn cosine(lambda: f64) -> Self {
        PotentialForm::Cosine { lambda }.into()
    }

    pub fn single_exponential(lambda: C64) -> Self {
        PotentialForm::SingleExponential { lambda }.into()
    }

    pub fn fourier(coeffs: impl IntoIterator<Item = (i32, C64)>) -> Self {
        PotentialForm::Fourier { coeffs: coeffs.into_iter().collect() }.into()
    }

    pub fn with_shift(mut self, y: f64) -> Self {
        self.imag_shift = y;
        self
    }

    /// `v(x + iy)` for a circle coordinate `x`.
    #[inline]
    pub fn eval_circle(&self, x: f64) -> C64 {
        let y = self.imag_shift;
        match &self.form {
            PotentialForm::Cosine { lambda } => {
                if y == 0.0 {
                    C64::new(2.0 * lambda * (2.0 * PI * x).cos(), 0.0)
                } else {
                    let z = C64::new(2.0 * PI * x, 2.0 * PI * y);
                    2.0 * lambda * z.cos()
                }
            }
            PotentialForm::SingleExponential { lambda } => {
                let damp = (-2.0 * PI * y).exp();
                lambda * C64::from_polar(damp, 2.0 * PI * x)
            }
            PotentialForm::Constant { c } => *c,
            PotentialForm::Fourier { coeffs } => coeffs
                .iter()
                .map(|(&k, &ck)| {
                    let k = k as f64;
                    ck * C64::from_polar((-2.0 * PI * k * y).exp(), 2.0 * PI * k * x)
                })
                .sum(),
            PotentialForm::IidDiagonal => C64::new(0.0, 0.0),
        }
    }

    /// Whether this rule can be paired with `base`.
    pub fn check_compatible(&self, base: &BaseSystem) -> Result<()> {
        let iid_base = matches!(base, BaseSystem::Iid { .. });
        let iid_pot = matches!(self.form, PotentialForm::IidDiagonal);
        if iid_base != iid_pot {
            return Err(Error::InvalidArgument(format!(
                "potential form {:?} cannot be paired with base {}",
                self.form_name(),
                base.name()
            )));
        }
        Ok(())
    }

    pub fn form_name(&self) -> &'static str {
        match self.form {
            PotentialForm::Fourier { .. } => "fourier",
            PotentialForm::Cosine { .. } => "cosine",
            PotentialForm::SingleExponential { .. } => "single_exponential",
            PotentialForm::Constant { .. } => "constant",
            PotentialForm::IidDiagonal => "iid_diagonal",
        }
    }

    /// True when `v` takes real values on the real phase space.
    pub fn is_real_valued(&self) -> bool {
        let y0 = self.imag_shift == 0.0;
        match &self.form {
            PotentialForm::Cosine { .. } => y0,
            PotentialForm::SingleExponential { lambda } => lambda.norm() == 0.0,
            PotentialForm::Constant { c } => c.im == 0.0,
            PotentialForm::IidDiagonal => true,
            PotentialForm::Fourier { coeffs } => {
                y0 && coeffs.iter().all(|(&k, &ck)| {
                    let partner = coeffs.get(&-k).copied().unwrap_or_default();
                    (partner - ck.conj()).norm() <= 1e-14 * (1.0 + ck.norm())
                })
            }
        }
    }

    /// Crude bound on `sup |v|`, used for sizing windows.
    pub fn sup_bound(&self, base: &BaseSystem) -> f64 {
        let y = self.imag_shift;
        match &self.form {
            PotentialForm::Cosine { lambda } => 2.0 * lambda.abs() * (2.0 * PI * y).cosh(),
            PotentialForm::SingleExponential { lambda } => lambda.norm() * (-2.0 * PI * y).exp(),
            PotentialForm::Constant { c } => c.norm(),
            PotentialForm::Fourier { coeffs } => {
                coeffs.iter().map(|(&k, ck)| ck.norm() * (-2.0 * PI * k as f64 * y).exp()).sum()
            }
            PotentialForm::IidDiagonal => match base {
                BaseSystem::Iid { half_width, .. } => *half_width,
                _ => 0.0,
            },
        }
    }
}

/// `v(phase + i y)`.
pub fn sample_potential(p: &Potential, phase: &Phase) -> C64 {
    match *phase {
        Phase::Stream { seed, half_width, index } => match p.form {
            PotentialForm::IidDiagonal => C64::new(stream_value(seed, half_width, index), 0.0),
            _ => p.eval_circle(0.0),
        },
        _ => p.eval_circle(phase.circle_coordinate().expect("circle phase")),
    }
}

/// The potential sequence `V(from + j) = v(T^{from + j} x0)` for `j < len`.
pub fn potential_sequence(base: &BaseSystem, p: &Potential, x0: &Phase, from: i64, len: usize) -> Result<Vec<C64>> {
    let mut cur = base.step(x0, from)?;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(sample_potential(p, &cur));
        cur = base.step_unchecked(&cur, 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::golden_mean;

    fn torus(x: f64) -> Phase {
        BaseSystem::Rotation { alpha: 0.1 }.phase(&[x])
    }

    #[test]
    fn cosine_at_zero() {
        assert_eq!(sample_potential(&Potential::cosine(1.0), &torus(0.0)), C64::new(2.0, 0.0));
    }

    #[test]
    fn single_exponential_quarter_turn() {
        let v = sample_potential(&Potential::single_exponential(C64::new(2.0, 0.0)), &torus(0.25));
        assert!((v - C64::new(0.0, 2.0)).norm() < 1e-15);
    }

    #[test]
    fn fourier_direct_sum() {
        let p = Potential::fourier([(1, C64::new(1.0, 0.0)), (-1, C64::new(1.0, 0.0))]);
        let v = sample_potential(&p, &torus(1.0 / 3.0));
        let direct = C64::from_polar(1.0, 2.0 * PI / 3.0) + C64::from_polar(1.0, -2.0 * PI / 3.0);
        assert!((v - direct).norm() < 1e-15);
        assert!((v.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_cosine_matches_fourier_form() {
        let y = 0.13;
        let a = Potential::cosine(1.7).with_shift(y);
        let b = Potential::fourier([(1, C64::new(1.7, 0.0)), (-1, C64::new(1.7, 0.0))]).with_shift(y);
        for x in [0.0, 0.2, 0.77] {
            assert!((a.eval_circle(x) - b.eval_circle(x)).norm() < 1e-12);
        }
    }

    #[test]
    fn real_symmetric_fourier_is_real() {
        let p = Potential::fourier([
            (0, C64::new(0.3, 0.0)),
            (2, C64::new(0.5, -1.2)),
            (-2, C64::new(0.5, 1.2)),
            (3, C64::new(-0.1, 0.4)),
            (-3, C64::new(-0.1, -0.4)),
        ]);
        assert!(p.is_real_valued());
        for j in 0..50 {
            assert!(p.eval_circle(j as f64 * 0.0173).im.abs() < 1e-12);
        }
    }

    #[test]
    fn single_exponential_has_constant_modulus() {
        let p = Potential::single_exponential(C64::new(1.2, -0.7));
        for j in 0..50 {
            let x = (j as f64 * golden_mean()).fract();
            assert!((p.eval_circle(x).norm() - C64::new(1.2, -0.7).norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn iid_requires_iid_base() {
        let iid = Potential::from(PotentialForm::IidDiagonal);
        assert!(iid.check_compatible(&BaseSystem::Rotation { alpha: 0.1 }).is_err());
        let base = BaseSystem::Iid { seed: 3, half_width: 2.0 };
        assert!(iid.check_compatible(&base).is_ok());
        let seq = potential_sequence(&base, &iid, &base.phase(&[0.0]), -4, 8).unwrap();
        assert_eq!(seq[4].re, stream_value(3, 2.0, 0));
    }

    #[test]
    fn serde_round_trip() {
        let p = Potential::fourier([(1, C64::new(1.0, 0.5)), (-2, C64::new(0.0, 1.0))]).with_shift(0.1);
        let s = serde_json::to_string(&p).unwrap();
        let q: Potential = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let c: Potential = serde_json::from_str(r#"{"form":"cosine","lambda":2.0}"#).unwrap();
        assert_eq!(c, Potential::cosine(2.0));
        let e: Potential = serde_json::from_str(r#"{"form":"single_exponential","lambda":[0,2]}"#).unwrap();
        assert_eq!(e, Potential::single_exponential(C64::new(0.0, 2.0)));
        assert!(serde_json::from_str::<Potential>(r#"{"form":"cosine"}"#).is_err());
        assert!(serde_json::from_str::<Potential>(r#"{"form":"cosine","lambda":1,"x":1}"#).is_err());
    }

    #[test]
    fn birkhoff_averages_agree_across_phases() {
        let base = BaseSystem::Rotation { alpha: golden_mean() };
        let p = Potential::cosine(1.0);
        let avg = |x0: f64| {
            let s = potential_sequence(&base, &p, &base.phase(&[x0]), 0, 100_000).unwrap();
            s.iter().map(|v| v.re).sum::<f64>() / s.len() as f64
        };
        assert!((avg(0.0) - avg(0.371)).abs() < 5e-3);
    }
}
