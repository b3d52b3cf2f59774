//! Cell geometry and spreading-factor allocation.
//!
//! Every scheme assigns each SF a radial support `[inner, outer]` and a
//! density that is uniform by area on that support,
//! `g_m(r) = 2r / (outer^2 - inner^2)`. The schemes differ only in supports
//! and population fractions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phy::{PhyConfig, SpreadingFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Uniform,
    Distance,
    EqLoad,
    Custom,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Uniform => "uniform",
            Scheme::Distance => "distance",
            Scheme::EqLoad => "eqload",
            Scheme::Custom => "custom",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "uni" => Ok(Scheme::Uniform),
            "distance" | "dist" => Ok(Scheme::Distance),
            "eqload" | "eq-load" | "equal-load" => Ok(Scheme::EqLoad),
            other => Err(Error::param("scheme", format!("unknown scheme `{other}`"))),
        }
    }
}

/// Radial interval `[inner, outer]` on which an SF's devices live.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Support {
    pub inner: f64,
    pub outer: f64,
}

impl Support {
    pub fn width(&self) -> f64 {
        self.outer - self.inner
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.inner && r <= self.outer
    }

    fn area_factor(&self) -> f64 {
        self.outer * self.outer - self.inner * self.inner
    }
}

/// The mapping `{delta_m}, {l_m}, {g_m}` of one allocation scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationSet {
    scheme: Scheme,
    radius: f64,
    fractions: [f64; 6],
    supports: [Support; 6],
}

impl AllocationSet {
    /// Builds an arbitrary allocation. Fractions must sum to one and every
    /// populated support must lie inside `[0, radius]`.
    pub fn custom(radius: f64, fractions: [f64; 6], supports: [Support; 6]) -> Result<Self> {
        let set = AllocationSet {
            scheme: Scheme::Custom,
            radius,
            fractions,
            supports,
        };
        set.validate()?;
        Ok(set)
    }

    /// Every device on one SF, spread over the whole cell.
    pub fn single_sf(radius: f64, sf: SpreadingFactor) -> Result<Self> {
        let mut fractions = [0.0; 6];
        fractions[sf.index()] = 1.0;
        let whole = Support {
            inner: 0.0,
            outer: radius,
        };
        Self::custom(radius, fractions, [whole; 6])
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        if self.fractions.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::param("fractions", "each fraction must lie in [0, 1]"));
        }
        let total: f64 = self.fractions.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param("fractions", format!("sum to {total}, not 1")));
        }
        for (support, &delta) in self.supports.iter().zip(&self.fractions) {
            if delta == 0.0 {
                continue;
            }
            let ok = support.inner >= 0.0
                && support.outer > support.inner
                && support.outer <= self.radius * (1.0 + 1e-12);
            if !ok {
                return Err(Error::param(
                    "supports",
                    format!("[{}, {}] is not a proper sub-interval of [0, {}]", support.inner, support.outer, self.radius),
                ));
            }
        }
        Ok(())
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `delta_m`.
    pub fn fraction(&self, sf: SpreadingFactor) -> f64 {
        self.fractions[sf.index()]
    }

    pub fn fractions(&self) -> [f64; 6] {
        self.fractions
    }

    pub fn support(&self, sf: SpreadingFactor) -> Support {
        self.supports[sf.index()]
    }

    /// Annulus outer borders `l_7..l_12`. For the uniform scheme every SF
    /// covers the whole cell, so each border is `R`.
    pub fn borders(&self) -> [f64; 6] {
        self.supports.map(|s| s.outer)
    }

    /// SFs with a non-zero population share.
    pub fn populated(&self) -> impl Iterator<Item = SpreadingFactor> + '_ {
        SpreadingFactor::ALL
            .into_iter()
            .filter(|&sf| self.fraction(sf) > 0.0)
    }

    /// `g_m(r)`.
    pub fn density(&self, sf: SpreadingFactor, r: f64) -> f64 {
        let s = self.support(sf);
        if s.contains(r) && s.area_factor() > 0.0 {
            2.0 * r / s.area_factor()
        } else {
            0.0
        }
    }

    pub fn cdf(&self, sf: SpreadingFactor, r: f64) -> f64 {
        let s = self.support(sf);
        if r <= s.inner {
            0.0
        } else if r >= s.outer {
            1.0
        } else {
            (r * r - s.inner * s.inner) / s.area_factor()
        }
    }

    pub fn inverse_cdf(&self, sf: SpreadingFactor, u: f64) -> f64 {
        let s = self.support(sf);
        (s.inner * s.inner + u * s.area_factor()).sqrt()
    }

    /// Population-weighted density `sum_m delta_m g_m(r)`.
    pub fn mixture_density(&self, r: f64) -> f64 {
        SpreadingFactor::ALL
            .iter()
            .map(|&sf| self.fraction(sf) * self.density(sf, r))
            .sum()
    }

    /// Draws an SF with probability `delta_m`, then a distance from `g_m`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (SpreadingFactor, f64) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = None;
        for sf in self.populated() {
            acc += self.fraction(sf);
            chosen = Some(sf);
            if u < acc {
                break;
            }
        }
        let sf = chosen.expect("validated allocation has a populated SF");
        let r = self.inverse_cdf(sf, rng.gen());
        (sf, r)
    }
}

/// One placed device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DevicePlacement {
    pub id: u32,
    pub sf: SpreadingFactor,
    pub distance: f64,
    pub rate: f64,
}

pub fn sample_device<R: Rng + ?Sized>(
    alloc: &AllocationSet,
    id: u32,
    rate: f64,
    rng: &mut R,
) -> DevicePlacement {
    let (sf, distance) = alloc.sample(rng);
    DevicePlacement {
        id,
        sf,
        distance,
        rate,
    }
}

/// Uniform placement density over a disc of radius `radius`.
pub fn cell_pdf(r: f64, radius: f64) -> f64 {
    if (0.0..=radius).contains(&r) {
        2.0 * r / (radius * radius)
    } else {
        0.0
    }
}

pub fn uniform_allocation(radius: f64) -> Result<AllocationSet> {
    let whole = Support {
        inner: 0.0,
        outer: radius,
    };
    let set = AllocationSet {
        scheme: Scheme::Uniform,
        radius,
        fractions: [1.0 / 6.0; 6],
        supports: [whole; 6],
    };
    set.validate()?;
    Ok(set)
}

/// Sensitivity-derived annulus borders scaled so the SF12 border is `R`.
fn annuli(phy: &PhyConfig) -> Result<[Support; 6]> {
    phy.validate()?;
    let raw = SpreadingFactor::ALL.map(|sf| phy.sensitivity_range(sf));
    let scale = phy.radius() / raw[5];
    let mut supports = [Support {
        inner: 0.0,
        outer: 0.0,
    }; 6];
    let mut inner = 0.0;
    for (support, l) in supports.iter_mut().zip(raw) {
        let outer = l * scale;
        *support = Support { inner, outer };
        inner = outer;
    }
    // pin the edge exactly
    supports[5].outer = phy.radius();
    Ok(supports)
}

pub fn distance_allocation(phy: &PhyConfig) -> Result<AllocationSet> {
    let supports = annuli(phy)?;
    let radius = phy.radius();
    let mut fractions = supports.map(|s| s.area_factor() / (radius * radius));
    // absorb rounding so the fractions sum to one
    let total: f64 = fractions.iter().sum();
    fractions.iter_mut().for_each(|d| *d /= total);
    let set = AllocationSet {
        scheme: Scheme::Distance,
        radius,
        fractions,
        supports,
    };
    set.validate()?;
    Ok(set)
}

/// Same annuli as [`distance_allocation`], populations chosen so every SF
/// offers the same load: `delta_m` proportional to `1 / T_f_m`.
pub fn eqload_allocation(phy: &PhyConfig) -> Result<AllocationSet> {
    let supports = annuli(phy)?;
    let inverse = phy.timings().map(|t| 1.0 / t.airtime);
    let total: f64 = inverse.iter().sum();
    let set = AllocationSet {
        scheme: Scheme::EqLoad,
        radius: phy.radius(),
        fractions: inverse.map(|x| x / total),
        supports,
    };
    set.validate()?;
    Ok(set)
}

pub fn allocation(scheme: Scheme, phy: &PhyConfig) -> Result<AllocationSet> {
    match scheme {
        Scheme::Uniform => uniform_allocation(phy.radius()),
        Scheme::Distance => distance_allocation(phy),
        Scheme::EqLoad => eqload_allocation(phy),
        Scheme::Custom => Err(Error::param(
            "scheme",
            "custom allocations are built with AllocationSet::custom",
        )),
    }
}
