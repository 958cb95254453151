use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::model::{CalibratedScenario, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ppcs {
    Mrp,
    Rps,
    Conwip,
}

impl Ppcs {
    pub const ALL: [Ppcs; 3] = [Ppcs::Mrp, Ppcs::Rps, Ppcs::Conwip];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mrp => "mrp",
            Self::Rps => "rps",
            Self::Conwip => "conwip",
        }
    }

    /// Parameter names in grid order; the component-level ones only apply
    /// when the structure plans components.
    pub fn parameter_names(self, with_components: bool) -> Vec<&'static str> {
        let (items, comps): (&[&str], &[&str]) = match self {
            Self::Mrp => (
                &["planned_lead_time_items", "fop_lot_size_items", "safety_stock_items"],
                &[
                    "planned_lead_time_components",
                    "fop_lot_size_components",
                    "safety_stock_components",
                ],
            ),
            Self::Rps => (
                &["reorder_point_items", "foq_lot_size_items"],
                &["reorder_point_components", "foq_lot_size_components"],
            ),
            Self::Conwip => (
                &["mps_foq_lot_size", "wip_cap", "estimated_lead_time_items"],
                &["estimated_lead_time_components", "work_ahead_window_buffer"],
            ),
        };
        let mut out = items.to_vec();
        if with_components {
            out.extend_from_slice(comps);
        }
        out
    }
}

impl fmt::Display for Ppcs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Ppcs {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mrp" => Ok(Self::Mrp),
            "rps" | "rop" => Ok(Self::Rps),
            "conwip" => Ok(Self::Conwip),
            other => Err(SimError::InvalidParams(format!("unknown ppcs `{other}`"))),
        }
    }
}

/// MRP parameters. Lead times and FOP periods are in days; safety stocks are
/// multiples of mean daily demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrpParams {
    pub planned_lead_time_items: f64,
    pub fop_lot_size_items: f64,
    pub safety_stock_items: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planned_lead_time_components: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fop_lot_size_components: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety_stock_components: Option<f64>,
}

impl MrpParams {
    pub fn lead_time(&self, is_item: bool) -> i64 {
        let v = if is_item {
            self.planned_lead_time_items
        } else {
            self.planned_lead_time_components.unwrap_or(self.planned_lead_time_items)
        };
        v.round() as i64
    }

    pub fn lot_periods(&self, is_item: bool) -> i64 {
        let v = if is_item {
            self.fop_lot_size_items
        } else {
            self.fop_lot_size_components.unwrap_or(self.fop_lot_size_items)
        };
        v.round() as i64
    }

    /// Absolute safety stock: the proportion times the mean daily demand of
    /// the sku (for components, the summed demand of the items requiring it).
    pub fn safety_stock_abs(&self, cal: &CalibratedScenario, sku: usize) -> f64 {
        let info = &cal.skus[sku];
        let prop = if info.is_item() {
            self.safety_stock_items
        } else {
            self.safety_stock_components.unwrap_or(0.0)
        };
        prop * info.mean_daily_demand
    }
}

/// Reorder point system parameters as multiples of mean daily demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpsParams {
    pub reorder_point_items: f64,
    pub foq_lot_size_items: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reorder_point_components: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foq_lot_size_components: Option<f64>,
}

impl RpsParams {
    pub fn reorder_point_abs(&self, cal: &CalibratedScenario, sku: usize) -> f64 {
        let info = &cal.skus[sku];
        let prop = if info.is_item() {
            self.reorder_point_items
        } else {
            self.reorder_point_components.unwrap_or(0.0)
        };
        prop * info.mean_daily_demand
    }

    pub fn lot_abs(&self, cal: &CalibratedScenario, sku: usize) -> f64 {
        let info = &cal.skus[sku];
        let prop = if info.is_item() {
            self.foq_lot_size_items
        } else {
            self.foq_lot_size_components.unwrap_or(self.foq_lot_size_items)
        };
        prop * info.mean_daily_demand
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LotPolicy {
    #[default]
    Foq,
    Fop,
}

impl LotPolicy {
    fn is_default(&self) -> bool {
        *self == LotPolicy::Foq
    }
}

/// ConWIP parameters. The lot size is a multiple of mean daily demand (or a
/// period count in days under the FOP switch); the WIP-cap is standard
/// workload minutes and applies to both loops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConwipParams {
    pub mps_foq_lot_size: f64,
    pub wip_cap: f64,
    pub estimated_lead_time_items: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_lead_time_components: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work_ahead_window_buffer: Option<f64>,
    #[serde(default, skip_serializing_if = "LotPolicy::is_default")]
    pub mps_lot_policy: LotPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ppcs", rename_all = "snake_case")]
pub enum ControllerParams {
    Mrp(MrpParams),
    Rps(RpsParams),
    Conwip(ConwipParams),
}

fn get(map: &BTreeMap<String, f64>, key: &str) -> Result<f64> {
    map.get(key)
        .copied()
        .ok_or_else(|| SimError::InvalidParams(format!("missing parameter `{key}`")))
}

impl ControllerParams {
    pub fn ppcs(&self) -> Ppcs {
        match self {
            Self::Mrp(_) => Ppcs::Mrp,
            Self::Rps(_) => Ppcs::Rps,
            Self::Conwip(_) => Ppcs::Conwip,
        }
    }

    /// Builds parameters from `name = value` pairs; component entries are
    /// optional and only read when present.
    pub fn from_named(ppcs: Ppcs, map: &BTreeMap<String, f64>) -> Result<Self> {
        let known = Ppcs::parameter_names(ppcs, true);
        if let Some(k) = map.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(SimError::InvalidParams(format!("unknown {ppcs} parameter `{k}`")));
        }
        let opt = |k: &str| map.get(k).copied();
        Ok(match ppcs {
            Ppcs::Mrp => Self::Mrp(MrpParams {
                planned_lead_time_items: get(map, "planned_lead_time_items")?,
                fop_lot_size_items: get(map, "fop_lot_size_items")?,
                safety_stock_items: get(map, "safety_stock_items")?,
                planned_lead_time_components: opt("planned_lead_time_components"),
                fop_lot_size_components: opt("fop_lot_size_components"),
                safety_stock_components: opt("safety_stock_components"),
            }),
            Ppcs::Rps => Self::Rps(RpsParams {
                reorder_point_items: get(map, "reorder_point_items")?,
                foq_lot_size_items: get(map, "foq_lot_size_items")?,
                reorder_point_components: opt("reorder_point_components"),
                foq_lot_size_components: opt("foq_lot_size_components"),
            }),
            Ppcs::Conwip => Self::Conwip(ConwipParams {
                mps_foq_lot_size: get(map, "mps_foq_lot_size")?,
                wip_cap: get(map, "wip_cap")?,
                estimated_lead_time_items: get(map, "estimated_lead_time_items")?,
                estimated_lead_time_components: opt("estimated_lead_time_components"),
                work_ahead_window_buffer: opt("work_ahead_window_buffer"),
                mps_lot_policy: LotPolicy::Foq,
            }),
        })
    }

    pub fn to_named(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: Option<f64>| {
            if let Some(v) = v {
                out.insert(k.to_string(), v);
            }
        };
        match self {
            Self::Mrp(p) => {
                put("planned_lead_time_items", Some(p.planned_lead_time_items));
                put("fop_lot_size_items", Some(p.fop_lot_size_items));
                put("safety_stock_items", Some(p.safety_stock_items));
                put("planned_lead_time_components", p.planned_lead_time_components);
                put("fop_lot_size_components", p.fop_lot_size_components);
                put("safety_stock_components", p.safety_stock_components);
            }
            Self::Rps(p) => {
                put("reorder_point_items", Some(p.reorder_point_items));
                put("foq_lot_size_items", Some(p.foq_lot_size_items));
                put("reorder_point_components", p.reorder_point_components);
                put("foq_lot_size_components", p.foq_lot_size_components);
            }
            Self::Conwip(p) => {
                put("mps_foq_lot_size", Some(p.mps_foq_lot_size));
                put("wip_cap", Some(p.wip_cap));
                put("estimated_lead_time_items", Some(p.estimated_lead_time_items));
                put("estimated_lead_time_components", p.estimated_lead_time_components);
                put("work_ahead_window_buffer", p.work_ahead_window_buffer);
            }
        }
        out
    }

    /// Checks value ranges and that component parameters are present exactly
    /// when the structure plans components.
    pub fn validate(&self, structure: &Structure) -> Result<()> {
        let comps = structure.has_planned_components();
        let bad = |m: String| Err(SimError::InvalidParams(m));
        let whole_days = |name: &str, v: f64, min: f64| -> Result<()> {
            if v < min || (v - v.round()).abs() > 1e-9 {
                return Err(SimError::InvalidParams(format!(
                    "{name} must be a whole number of days >= {min}, got {v}"
                )));
            }
            Ok(())
        };
        let named = self.to_named();
        for name in self.ppcs().parameter_names(true) {
            let is_comp = !self.ppcs().parameter_names(false).contains(&name);
            match (is_comp, comps, named.contains_key(name)) {
                (true, true, false) => return bad(format!("{name} is required for {}", structure.name)),
                (true, false, true) => {
                    return bad(format!("{name} does not apply to {}", structure.name))
                }
                _ => {}
            }
        }
        if named.values().any(|v| !v.is_finite()) {
            return bad("parameters must be finite".into());
        }
        match self {
            Self::Mrp(p) => {
                whole_days("planned_lead_time_items", p.planned_lead_time_items, 1.0)?;
                whole_days("fop_lot_size_items", p.fop_lot_size_items, 1.0)?;
                if let Some(v) = p.planned_lead_time_components {
                    whole_days("planned_lead_time_components", v, 1.0)?;
                }
                if let Some(v) = p.fop_lot_size_components {
                    whole_days("fop_lot_size_components", v, 1.0)?;
                }
                if p.safety_stock_items < 0.0 || p.safety_stock_components.unwrap_or(0.0) < 0.0 {
                    return bad("safety stocks must be non-negative".into());
                }
            }
            Self::Rps(p) => {
                if p.reorder_point_items < 0.0 || p.reorder_point_components.unwrap_or(0.0) < 0.0 {
                    return bad("reorder points must be non-negative".into());
                }
                if p.foq_lot_size_items <= 0.0 || p.foq_lot_size_components.unwrap_or(1.0) <= 0.0 {
                    return bad("lot sizes must be positive".into());
                }
            }
            Self::Conwip(p) => {
                if p.wip_cap <= 0.0 {
                    return bad("wip_cap must be positive".into());
                }
                if p.mps_foq_lot_size <= 0.0 {
                    return bad("mps_foq_lot_size must be positive".into());
                }
                if p.mps_lot_policy == LotPolicy::Fop {
                    whole_days("mps_foq_lot_size", p.mps_foq_lot_size, 1.0)?;
                }
                whole_days("estimated_lead_time_items", p.estimated_lead_time_items, 1.0)?;
                if let Some(v) = p.estimated_lead_time_components {
                    whole_days("estimated_lead_time_components", v, 1.0)?;
                }
                if let Some(v) = p.work_ahead_window_buffer {
                    whole_days("work_ahead_window_buffer", v, 0.0)?;
                }
            }
        }
        Ok(())
    }
}
