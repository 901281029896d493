//! Closed-form sample-complexity and sampling-parameter calculators.
//!
//! All asymptotic expressions are evaluated with their hidden constants set
//! to 1 and natural logarithms throughout. The outputs are meant for
//! comparing shapes across parameters, not as literal step counts.
//!
//! The sub-MDP volume term `B = (log_γ(ε(1-γ)))^A` reads the `log^A`
//! notation as the radius raised to the A-th power (a lattice ball volume
//! bound). Reports carry the `radius^A` flag wherever it enters.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::util::{ceil_tol, in_open_unit, log_base};

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
}

/// `(ε, δ, γ, S, A)` for every bound in this module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundInputs {
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub states: u64,
    pub actions: u64,
}

impl BoundInputs {
    pub fn new(
        epsilon: f64,
        delta: f64,
        gamma: f64,
        states: u64,
        actions: u64,
    ) -> Result<Self, BoundError> {
        let inputs = Self {
            epsilon,
            delta,
            gamma,
            states,
            actions,
        };
        inputs.check()?;
        Ok(inputs)
    }

    pub fn check(&self) -> Result<(), BoundError> {
        for (name, value) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("gamma", self.gamma),
        ] {
            if !in_open_unit(value) {
                return Err(BoundError::Domain {
                    name,
                    value,
                    domain: "(0, 1)",
                });
            }
        }
        for (name, value) in [("states", self.states), ("actions", self.actions)] {
            if value == 0 {
                return Err(BoundError::Domain {
                    name,
                    value: 0.0,
                    domain: ">= 1",
                });
            }
        }
        Ok(())
    }

    fn sa(&self) -> f64 {
        self.states as f64 * self.actions as f64
    }

    /// Unceiled `log_γ(ε(1-γ))`.
    pub fn radius_term(&self) -> f64 {
        log_base(self.epsilon * (1.0 - self.gamma), self.gamma)
    }

    /// `B = (log_γ(ε(1-γ)))^A`.
    pub fn volume_term(&self) -> f64 {
        self.radius_term().powf(self.actions as f64)
    }
}

/// Why a value was clamped instead of evaluated literally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Saturation {
    /// The formula's argument fell below its meaningful range; clamped to 1.
    Degenerate,
    /// The value does not fit the output type.
    Overflow,
}

impl fmt::Display for Saturation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Saturation::Degenerate => write!(f, "degenerate"),
            Saturation::Overflow => write!(f, "overflow"),
        }
    }
}

/// A positive integer bound, or a clamp with the reason.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntBound {
    pub value: u64,
    /// The unrounded formula value.
    pub raw: f64,
    pub saturation: Option<Saturation>,
}

impl IntBound {
    fn from_raw(raw: f64) -> Self {
        if !raw.is_finite() || raw >= u64::MAX as f64 {
            return Self {
                value: u64::MAX,
                raw,
                saturation: Some(Saturation::Overflow),
            };
        }
        let c = ceil_tol(raw);
        if raw < 1.0 {
            Self {
                value: 1,
                raw,
                saturation: Some(Saturation::Degenerate),
            }
        } else {
            Self {
                value: c as u64,
                raw,
                saturation: None,
            }
        }
    }

    /// True when the bound is at least `states` (or saturated high).
    pub fn exceeds(&self, states: u64) -> bool {
        self.saturation == Some(Saturation::Overflow) || self.value > states
    }
}

/// Sampling parameter `q`: the smallest batch for which a batched Q estimate
/// sits within ε of its expectation for every pair and timestep with
/// confidence `1 - δ`.
///
/// `q >= ln((2SA/ε) ln(2/δ) (1/B + A/(ε(1-γ)))) / (2 ε² (1-γ)²)`
pub fn q_lower_bound(inp: &BoundInputs) -> Result<IntBound, BoundError> {
    inp.check()?;
    let (e, g, a) = (inp.epsilon, inp.gamma, inp.actions as f64);
    let inner = (2.0 * inp.sa() / e)
        * (2.0 / inp.delta).ln()
        * (1.0 / inp.volume_term() + a / (e * (1.0 - g)));
    if inner <= 1.0 {
        return Ok(IntBound {
            value: 1,
            raw: 0.0,
            saturation: Some(Saturation::Degenerate),
        });
    }
    Ok(IntBound::from_raw(
        inner.ln() / (2.0 * e * e * (1.0 - g).powi(2)),
    ))
}

/// Per-state overlap `N = ceil((2/ε) ln(2S/δ))`.
pub fn overlap_bound(inp: &BoundInputs) -> Result<IntBound, BoundError> {
    inp.check()?;
    Ok(IntBound::from_raw(
        (2.0 / inp.epsilon) * (2.0 * inp.states as f64 / inp.delta).ln(),
    ))
}

/// Number of sub-MDPs `L = max(1, ceil((2S / (ε B)) ln(2/δ)))`.
pub fn submdp_count_bound(inp: &BoundInputs) -> Result<IntBound, BoundError> {
    inp.check()?;
    let raw =
        (2.0 * inp.states as f64 / (inp.epsilon * inp.volume_term())) * (2.0 / inp.delta).ln();
    Ok(IntBound::from_raw(raw))
}

/// Per-sub-MDP sample complexity, pre-simplification form:
/// `(A B / (ε² (1-γ)³)) ln(A B / (δ (1-γ))) ln(1/ε)`.
pub fn submdp_sample_complexity(inp: &BoundInputs) -> Result<f64, BoundError> {
    inp.check()?;
    let (e, g) = (inp.epsilon, inp.gamma);
    let ab = inp.actions as f64 * inp.volume_term();
    Ok(ab / (e * e * (1.0 - g).powi(3)) * (ab / (inp.delta * (1.0 - g))).ln() * (1.0 / e).ln())
}

/// One sub-MDP per state: `S` times the per-sub-MDP complexity.
pub fn naive_total_bound(inp: &BoundInputs) -> Result<f64, BoundError> {
    Ok(inp.states as f64 * submdp_sample_complexity(inp)?)
}

/// `(SA / (ε³ (1-γ)³)) ln(A / (δ (1-γ))) ln(1/ε) ln(1/δ)`.
pub fn sample_complexity_bound(inp: &BoundInputs) -> Result<f64, BoundError> {
    inp.check()?;
    let (e, g, d) = (inp.epsilon, inp.gamma, inp.delta);
    Ok(inp.sa() / (e.powi(3) * (1.0 - g).powi(3))
        * (inp.actions as f64 / (d * (1.0 - g))).ln()
        * (1.0 / e).ln()
        * (1.0 / d).ln())
}

/// The same bound assembled as (sub-MDP count) x (per-sub-MDP complexity),
/// using the raw (unclamped) count.
pub fn sample_complexity_compositional(inp: &BoundInputs) -> Result<f64, BoundError> {
    Ok(submdp_count_bound(inp)?.raw * submdp_sample_complexity(inp)?)
}

/// Hoeffding tail for the fused estimate with the range sum unsquared.
pub fn fusion_tail_unsquared(n: usize, epsilon: f64, error_bounds: &[f64]) -> f64 {
    let denom: f64 = error_bounds.iter().map(|e| 2.0 * e).sum();
    2.0 * (-2.0 * (n * n) as f64 * epsilon * epsilon / denom).exp()
}

/// Hoeffding tail with squared ranges `(2 ε_i)²`.
pub fn fusion_tail_squared(n: usize, epsilon: f64, error_bounds: &[f64]) -> f64 {
    let denom: f64 = error_bounds.iter().map(|e| (2.0 * e).powi(2)).sum();
    2.0 * (-2.0 * (n * n) as f64 * epsilon * epsilon / denom).exp()
}

/// Rows of the model-free comparison table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ComparisonRow {
    DelayedQ,
    SpeedyQ,
    Vrql,
    QUcb,
    UcbMultistage,
    PhasedQ,
    Pdql,
}

impl ComparisonRow {
    pub const ALL: [ComparisonRow; 7] = [
        ComparisonRow::DelayedQ,
        ComparisonRow::SpeedyQ,
        ComparisonRow::Vrql,
        ComparisonRow::QUcb,
        ComparisonRow::UcbMultistage,
        ComparisonRow::PhasedQ,
        ComparisonRow::Pdql,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ComparisonRow::DelayedQ => "compare.delayed_q",
            ComparisonRow::SpeedyQ => "compare.speedy_q",
            ComparisonRow::Vrql => "compare.vrql",
            ComparisonRow::QUcb => "compare.q_ucb",
            ComparisonRow::UcbMultistage => "compare.ucb_multistage",
            ComparisonRow::PhasedQ => "compare.phased_q",
            ComparisonRow::Pdql => "compare.pdql",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            ComparisonRow::DelayedQ => "SA/(e^4(1-g)^8) ln(SA/(d e(1-g))) ln(1/d) ln(1/(e(1-g)))",
            ComparisonRow::SpeedyQ => "SA/(e^2(1-g)^4) ln(SA/d)",
            ComparisonRow::Vrql => "SA/(e^2(1-g)^3) ln(SA/(d(1-g))) ln(1/e)",
            ComparisonRow::QUcb => "SA/(e^2(1-g)^7) ln(SA) ln(1/d) ln(1/e) ln(1/(1-g))",
            ComparisonRow::UcbMultistage => "SA/(e^2(1-g)^5.5) ln(SA) ln(1/d) ln(1/(e(1-g)))",
            ComparisonRow::PhasedQ => "SA/e^2 ln((SA/d) ln(1/e)) ln(1/e)",
            ComparisonRow::Pdql => "SA/(e^3(1-g)^3) ln(A/(d(1-g))) ln(1/e) ln(1/d)",
        }
    }

    /// The polynomial (non-logarithmic) factor.
    pub fn prefactor(self, inp: &BoundInputs) -> f64 {
        let (e, g, sa) = (inp.epsilon, inp.gamma, inp.sa());
        let h = 1.0 - g;
        match self {
            ComparisonRow::DelayedQ => sa / (e.powi(4) * h.powi(8)),
            ComparisonRow::SpeedyQ => sa / (e * e * h.powi(4)),
            ComparisonRow::Vrql => sa / (e * e * h.powi(3)),
            ComparisonRow::QUcb => sa / (e * e * h.powi(7)),
            ComparisonRow::UcbMultistage => sa / (e * e * h.powf(5.5)),
            ComparisonRow::PhasedQ => sa / (e * e),
            ComparisonRow::Pdql => sa / (e.powi(3) * h.powi(3)),
        }
    }

    /// The product of logarithmic factors.
    pub fn log_factor(self, inp: &BoundInputs) -> f64 {
        let (e, g, d, sa) = (inp.epsilon, inp.gamma, inp.delta, inp.sa());
        let h = 1.0 - g;
        let a = inp.actions as f64;
        match self {
            ComparisonRow::DelayedQ => {
                (sa / (d * e * h)).ln() * (1.0 / d).ln() * (1.0 / (e * h)).ln()
            }
            ComparisonRow::SpeedyQ => (sa / d).ln(),
            ComparisonRow::Vrql => (sa / (d * h)).ln() * (1.0 / e).ln(),
            ComparisonRow::QUcb => sa.ln() * (1.0 / d).ln() * (1.0 / e).ln() * (1.0 / h).ln(),
            ComparisonRow::UcbMultistage => sa.ln() * (1.0 / d).ln() * (1.0 / (e * h)).ln(),
            ComparisonRow::PhasedQ => ((sa / d) * (1.0 / e).ln()).ln() * (1.0 / e).ln(),
            ComparisonRow::Pdql => (a / (d * h)).ln() * (1.0 / e).ln() * (1.0 / d).ln(),
        }
    }

    pub fn evaluate(self, inp: &BoundInputs) -> Result<f64, BoundError> {
        inp.check()?;
        Ok(self.prefactor(inp) * self.log_factor(inp))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundEntry {
    pub id: String,
    pub value: f64,
    pub formula: String,
    pub flags: Vec<String>,
}

/// Labelled bound values for one input point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub entries: Vec<BoundEntry>,
}

impl BoundReport {
    pub fn get(&self, id: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bound_id,value,formula,flags\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},\"{}\",{}\n",
                e.id,
                e.value,
                e.formula,
                e.flags.join(";")
            ));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let id_w = self
            .entries
            .iter()
            .map(|e| e.id.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = format!(
            "eps={} delta={} gamma={} S={} A={}  (constants suppressed, natural logs)\n",
            self.inputs.epsilon,
            self.inputs.delta,
            self.inputs.gamma,
            self.inputs.states,
            self.inputs.actions
        );
        out.push_str(&format!(
            "{:<id_w$}  {:>14}  {}\n",
            "bound", "value", "flags"
        ));
        for e in &self.entries {
            out.push_str(&format!(
                "{:<id_w$}  {:>14.6e}  {}\n",
                e.id,
                e.value,
                e.flags.join(";")
            ));
        }
        out
    }
}

/// Evaluates every comparison-table row plus the local-approximation bounds.
pub fn comparison_bounds(inp: &BoundInputs) -> Result<BoundReport, BoundError> {
    inp.check()?;
    const ASYMPTOTIC: &str = "constants-suppressed";
    let sat_flags = |b: &IntBound| {
        let mut f = Vec::new();
        if let Some(s) = b.saturation {
            f.push(format!("saturated:{s}"));
        }
        f
    };
    let mut entries: Vec<BoundEntry> = ComparisonRow::ALL
        .iter()
        .map(|row| BoundEntry {
            id: row.id().into(),
            value: row.evaluate(inp).expect("inputs checked"),
            formula: row.formula().into(),
            flags: vec![ASYMPTOTIC.into()],
        })
        .collect();

    let q = q_lower_bound(inp)?;
    let mut flags = sat_flags(&q);
    flags.push("radius^A".into());
    entries.push(BoundEntry {
        id: "pdql.q_lower_bound".into(),
        value: q.value as f64,
        formula: "ln((2SA/e) ln(2/d) (1/B + A/(e(1-g)))) / (2 e^2 (1-g)^2)".into(),
        flags,
    });
    let n = overlap_bound(inp)?;
    entries.push(BoundEntry {
        id: "submdp.overlap".into(),
        value: n.value as f64,
        formula: "(2/e) ln(2S/d)".into(),
        flags: sat_flags(&n),
    });
    let l = submdp_count_bound(inp)?;
    let mut flags = sat_flags(&l);
    flags.push("radius^A".into());
    entries.push(BoundEntry {
        id: "submdp.count".into(),
        value: l.value as f64,
        formula: "max(1, (2S/(e B)) ln(2/d))".into(),
        flags,
    });
    let b = IntBound::from_raw(inp.volume_term());
    let mut flags = sat_flags(&b);
    flags.push("radius^A".into());
    if b.exceeds(inp.states) {
        flags.push("exceeds_S".into());
    }
    entries.push(BoundEntry {
        id: "submdp.size".into(),
        value: b.value as f64,
        formula: "(log_g(e(1-g)))^A".into(),
        flags,
    });
    for (id, value, formula) in [
        (
            "submdp.sample_complexity",
            submdp_sample_complexity(inp)?,
            "(AB/(e^2(1-g)^3)) ln(AB/(d(1-g))) ln(1/e)",
        ),
        (
            "naive.total",
            naive_total_bound(inp)?,
            "S (AB/(e^2(1-g)^3)) ln(AB/(d(1-g))) ln(1/e)",
        ),
        (
            "pdql.closed_form",
            sample_complexity_bound(inp)?,
            "SA/(e^3(1-g)^3) ln(A/(d(1-g))) ln(1/e) ln(1/d)",
        ),
        (
            "pdql.compositional",
            sample_complexity_compositional(inp)?,
            "L x submdp.sample_complexity",
        ),
    ] {
        entries.push(BoundEntry {
            id: id.into(),
            value,
            formula: formula.into(),
            flags: vec![ASYMPTOTIC.into(), "radius^A".into()],
        });
    }
    Ok(BoundReport {
        inputs: *inp,
        entries,
    })
}
