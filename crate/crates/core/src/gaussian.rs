//! Two-mode Gaussian states in normal form, lossy channels acting on them,
//! and the entanglement and teleportation figures of merit.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fading::{expect2, FadingParams};

/// Normal-form covariance matrix with blocks a·1, b·1 and c·Z. The vacuum
/// has unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCM {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TwoModeCM {
    pub const VACUUM: TwoModeCM = TwoModeCM {
        a: 1.0,
        b: 1.0,
        c: 0.0,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// Smallest symplectic eigenvalue of the partial transpose.
    pub fn pt_symplectic_eig(&self) -> f64 {
        let d = self.a - self.b;
        0.5 * (self.a + self.b - (d * d + 4.0 * self.c * self.c).sqrt())
    }

    pub fn negativity(&self) -> f64 {
        let nu = self.pt_symplectic_eig();
        ((1.0 - nu) / (2.0 * nu)).max(0.0)
    }

    /// Braunstein-Kimble fidelity for teleporting a coherent state.
    pub fn fidelity(&self) -> f64 {
        1.0 / (1.0 + 0.5 * (self.a + self.b - 2.0 * self.c))
    }

    pub fn is_entangled(&self) -> bool {
        self.pt_symplectic_eig() < 1.0
    }

    /// Smallest symplectic eigenvalue of the state itself.
    pub fn symplectic_eig(&self) -> f64 {
        let det = self.a * self.b - self.c * self.c;
        let delta = self.a * self.a + self.b * self.b - 2.0 * self.c * self.c;
        let disc = (delta * delta - 4.0 * det * det).max(0.0);
        (0.5 * (delta - disc.sqrt())).max(0.0).sqrt()
    }

    /// Satisfies the uncertainty principle to within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.a >= 1.0 - tol
            && self.b >= 1.0 - tol
            && self.a * self.b - self.c * self.c >= 0.0
            && self.symplectic_eig() >= 1.0 - tol
    }

    /// A state with variances `a`, `b` whose partial transpose has smallest
    /// symplectic eigenvalue `nu`, if one exists.
    pub fn with_pt_eig(a: f64, b: f64, nu: f64) -> Option<Self> {
        let s = a + b - 2.0 * nu;
        let d = a - b;
        let c2 = 0.25 * (s * s - d * d);
        if s < 0.0 || c2 < 0.0 {
            return None;
        }
        Some(Self { a, b, c: c2.sqrt() })
    }
}

/// Two-mode squeezed vacuum.
pub fn tmsv(r: f64) -> TwoModeCM {
    let (s, c) = ((2.0 * r).sinh(), (2.0 * r).cosh());
    TwoModeCM { a: c, b: c, c: s }
}

/// Two-mode squeezed thermal state with `n` photons per mode.
pub fn tmst(r: f64, n: f64) -> TwoModeCM {
    let v = 1.0 + 2.0 * n;
    let base = tmsv(r);
    TwoModeCM {
        a: v * base.a,
        b: v * base.b,
        c: v * base.c,
    }
}

/// First and amplitude moments ⟨τ⟩, ⟨√τ⟩ of a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMoments {
    pub t1: f64,
    pub t2: f64,
}

impl ChannelMoments {
    pub const IDENTITY: ChannelMoments = ChannelMoments { t1: 1.0, t2: 1.0 };

    pub fn deterministic(tau: f64) -> Self {
        Self {
            t1: tau,
            t2: tau.sqrt(),
        }
    }

    pub fn of(fading: &FadingParams) -> Result<Self> {
        let (t1, t2) = fading.moments()?;
        Ok(Self { t1, t2 })
    }
}

/// Mode B through a lossy channel with environment variance `m`.
pub fn apply_one_sided(cm: &TwoModeCM, mom: ChannelMoments, m: f64) -> TwoModeCM {
    TwoModeCM {
        a: cm.a,
        b: mom.t1 * cm.b + (1.0 - mom.t1) * m,
        c: mom.t2 * cm.c,
    }
}

/// Both modes through independent lossy channels.
pub fn apply_two_sided(
    cm: &TwoModeCM,
    mom_d: ChannelMoments,
    mom_u: ChannelMoments,
    m_d: f64,
    m_u: f64,
) -> TwoModeCM {
    TwoModeCM {
        a: mom_d.t1 * cm.a + (1.0 - mom_d.t1) * m_d,
        b: mom_u.t1 * cm.b + (1.0 - mom_u.t1) * m_u,
        c: mom_d.t2 * mom_u.t2 * cm.c,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    Negativity,
    Fidelity,
}

impl Observable {
    pub fn of(self, cm: &TwoModeCM) -> f64 {
        match self {
            Observable::Negativity => cm.negativity(),
            Observable::Fidelity => cm.fidelity(),
        }
    }
}

/// Fading regime relative to the detector response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Turbulence faster than detection: observables see ⟨τ⟩ and ⟨√τ⟩.
    Fast,
    /// Detection faster than turbulence: observables are averaged over P(τ).
    Slow,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Fast => "fast",
            Regime::Slow => "slow",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Regime::Fast),
            "slow" => Ok(Regime::Slow),
            _ => Err(Error::domain(format!("unknown regime `{s}`"))),
        }
    }
}

/// How the two modes of a shared state reach their receivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    /// Mode A stays home, mode B crosses a fading link.
    OneSided { link: FadingParams, m: f64 },
    /// Mode B crosses two fading links in series; their transmissivities
    /// multiply.
    Relayed {
        first: FadingParams,
        second: FadingParams,
        m: f64,
    },
    /// Both modes cross independent fading links.
    TwoSided {
        down: FadingParams,
        up: FadingParams,
        m_down: f64,
        m_up: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Averaged {
    pub value: f64,
    /// The two-dimensional average needed the adaptive fallback.
    pub fallback: bool,
}

impl Channel {
    /// Output state for fixed moments (fast regime).
    pub fn output_state(&self, cm: &TwoModeCM) -> Result<TwoModeCM> {
        Ok(match self {
            Channel::OneSided { link, m } => apply_one_sided(cm, ChannelMoments::of(link)?, *m),
            Channel::Relayed { first, second, m } => {
                let (a, b) = (ChannelMoments::of(first)?, ChannelMoments::of(second)?);
                apply_one_sided(
                    cm,
                    ChannelMoments {
                        t1: a.t1 * b.t1,
                        t2: a.t2 * b.t2,
                    },
                    *m,
                )
            }
            Channel::TwoSided {
                down,
                up,
                m_down,
                m_up,
            } => apply_two_sided(
                cm,
                ChannelMoments::of(down)?,
                ChannelMoments::of(up)?,
                *m_down,
                *m_up,
            ),
        })
    }

    /// Observable after the channel in the given regime.
    pub fn average(&self, cm: &TwoModeCM, obs: Observable, regime: Regime) -> Result<Averaged> {
        if regime == Regime::Fast {
            return Ok(Averaged {
                value: obs.of(&self.output_state(cm)?),
                fallback: false,
            });
        }
        match self {
            Channel::OneSided { link, m } => Ok(Averaged {
                value: link.expect(|t| {
                    obs.of(&apply_one_sided(cm, ChannelMoments::deterministic(t), *m))
                })?,
                fallback: false,
            }),
            Channel::Relayed { first, second, m } => {
                let avg = expect2(first, second, |t1, t2| {
                    obs.of(&apply_one_sided(
                        cm,
                        ChannelMoments::deterministic(t1 * t2),
                        *m,
                    ))
                })?;
                Ok(Averaged {
                    value: avg.value,
                    fallback: avg.fallback,
                })
            }
            Channel::TwoSided {
                down,
                up,
                m_down,
                m_up,
            } => {
                let avg = expect2(down, up, |td, tu| {
                    obs.of(&apply_two_sided(
                        cm,
                        ChannelMoments::deterministic(td),
                        ChannelMoments::deterministic(tu),
                        *m_down,
                        *m_up,
                    ))
                })?;
                Ok(Averaged {
                    value: avg.value,
                    fallback: avg.fallback,
                })
            }
        }
    }
}

fn threshold_ratio(num: f64, den: f64) -> Result<f64> {
    if !(den > 0.0) || !(num >= 0.0) {
        return Err(Error::domain(format!(
            "entanglement condition is not a lower bound on the transmissivity here ({num} / {den})"
        )));
    }
    Ok(num / den)
}

/// Minimum transmissivity keeping a state with variances `c` and
/// correlation `s` entangled when one mode crosses a channel with
/// environment variance `m`.
pub fn entanglement_threshold_asym(c: f64, s: f64, m: f64) -> Result<f64> {
    threshold_ratio((m - 1.0) * (c - 1.0), (m - c) * (c - 1.0) + s * s)
}

/// As [`entanglement_threshold_asym`] with both modes crossing identical
/// channels.
pub fn entanglement_threshold_sym(c: f64, s: f64, m: f64) -> Result<f64> {
    threshold_ratio(m - 1.0, m - c + s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preferred {
    First,
    Second,
    Tie,
}

fn preferred(x: f64, y: f64) -> Preferred {
    match x.partial_cmp(&y) {
        Some(Ordering::Greater) => Preferred::First,
        Some(Ordering::Less) => Preferred::Second,
        _ => Preferred::Tie,
    }
}

/// Teleportation fidelities of two states with equal negativity, and how
/// well the asymmetry-based predictors anticipate the ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    pub fidelity1: f64,
    pub fidelity2: f64,
    /// Which state teleports better.
    pub exact: Preferred,
    /// Prediction from |α1−β1| < √(γ1/γ2)|α2−β2| (first order in the
    /// asymmetries).
    pub first_order: Preferred,
    /// √((α1−β1)² + (α2−β2)²) < 4γ with γ the mean correlation; when it
    /// holds, the smaller asymmetry should win beyond first order.
    pub higher_order_holds: bool,
}

impl SymmetryReport {
    pub fn first_order_agrees(&self) -> bool {
        self.first_order == self.exact
    }
}

pub fn symmetry_fidelity_compare(cm1: &TwoModeCM, cm2: &TwoModeCM) -> SymmetryReport {
    let f1 = cm1.fidelity();
    let f2 = cm2.fidelity();
    let d1 = (cm1.a - cm1.b).abs();
    let d2 = (cm2.a - cm2.b).abs();
    let scaled = (cm1.c / cm2.c).sqrt() * d2;
    let gamma = 0.5 * (cm1.c + cm2.c);
    SymmetryReport {
        fidelity1: f1,
        fidelity2: f2,
        exact: if cm1 == cm2 {
            Preferred::Tie
        } else {
            preferred(f1, f2)
        },
        first_order: preferred(scaled, d1),
        higher_order_holds: (d1 * d1 + d2 * d2).sqrt() < 4.0 * gamma,
    }
}
