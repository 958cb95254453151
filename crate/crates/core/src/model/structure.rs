use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const STRUCTURE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SkuId(pub u32);

impl fmt::Display for SkuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    FlowShop,
    HybridShop,
    JobShop,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [Self::FlowShop, Self::HybridShop, Self::JobShop];

    pub fn short_name(self) -> &'static str {
        match self {
            Self::FlowShop => "flow",
            Self::HybridShop => "hybrid",
            Self::JobShop => "job",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for StructureKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flow" | "flow_shop" | "flowshop" => Ok(Self::FlowShop),
            "hybrid" | "hybrid_shop" | "hybridshop" => Ok(Self::HybridShop),
            "job" | "job_shop" | "jobshop" => Ok(Self::JobShop),
            other => Err(SimError::InvalidStructure(format!("unknown structure `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkuKind {
    Item,
    Component,
    /// Always available and never planned.
    RawMaterial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sku {
    pub id: SkuId,
    pub kind: SkuKind,
    pub bom_level: u32,
    /// The single component required from the next BoM level, one unit per unit.
    pub child: Option<SkuId>,
    /// Share of total item demand; only set for items.
    pub demand_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingStep {
    pub machine: String,
    /// Relative processing weight; calibration rescales it per machine.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Routing {
    pub sku: SkuId,
    pub steps: Vec<RoutingStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Structure {
    pub version: u32,
    pub name: StructureKind,
    pub machines: Vec<String>,
    pub skus: Vec<Sku>,
    pub routings: Vec<Routing>,
    pub planned_bom_levels: u32,
}

const FLOW_SHOP_JSON: &str = include_str!("../../data/flow_shop.json");
const HYBRID_SHOP_JSON: &str = include_str!("../../data/hybrid_shop.json");
const JOB_SHOP_JSON: &str = include_str!("../../data/job_shop.json");

/// Default structure shipped with the crate.
pub fn build_structure(kind: StructureKind) -> Structure {
    let text = match kind {
        StructureKind::FlowShop => FLOW_SHOP_JSON,
        StructureKind::HybridShop => HYBRID_SHOP_JSON,
        StructureKind::JobShop => JOB_SHOP_JSON,
    };
    Structure::from_json(text).expect("bundled structure file is valid")
}

/// Sum of demand shares of the items whose component chain contains `component`.
pub fn component_demand_share(structure: &Structure, component: SkuId) -> Result<f64> {
    structure.demand_share_of(component)
}

#[cfg(test)]
pub(crate) const ITEM_SHARES: [f64; 8] = [0.100, 0.075, 0.200, 0.125, 0.075, 0.150, 0.150, 0.125];

impl Structure {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Structure = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("structure serializes");
        out.push('\n');
        out
    }

    pub fn sku(&self, id: SkuId) -> Option<&Sku> {
        self.skus.iter().find(|s| s.id == id)
    }

    pub fn routing(&self, id: SkuId) -> Option<&Routing> {
        self.routings.iter().find(|r| r.sku == id)
    }

    pub fn items(&self) -> impl Iterator<Item = &Sku> {
        self.skus.iter().filter(|s| s.kind == SkuKind::Item)
    }

    pub fn bom_levels(&self) -> u32 {
        self.skus.iter().map(|s| s.bom_level).max().map_or(0, |l| l + 1)
    }

    /// True when some component level is planned, i.e. two ConWIP loops apply.
    pub fn has_planned_components(&self) -> bool {
        self.planned_bom_levels > 1
    }

    /// Items whose child chain passes through `id` (an item counts itself).
    pub fn items_requiring(&self, id: SkuId) -> Result<Vec<SkuId>> {
        if self.sku(id).is_none() {
            return Err(SimError::UnknownSku(id));
        }
        let mut out = Vec::new();
        for item in self.items() {
            let mut cur = Some(item.id);
            while let Some(c) = cur {
                if c == id {
                    out.push(item.id);
                    break;
                }
                cur = self.sku(c).and_then(|s| s.child);
            }
        }
        Ok(out)
    }

    pub fn demand_share_of(&self, id: SkuId) -> Result<f64> {
        let items = self.items_requiring(id)?;
        Ok(items
            .iter()
            .filter_map(|i| self.sku(*i).and_then(|s| s.demand_share))
            .sum())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::InvalidStructure(m));
        if self.version != STRUCTURE_FORMAT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        let machines: BTreeSet<&str> = self.machines.iter().map(String::as_str).collect();
        if machines.len() != self.machines.len() {
            return bad("duplicate machine name".into());
        }
        let mut ids = BTreeMap::new();
        for s in &self.skus {
            if ids.insert(s.id, s).is_some() {
                return bad(format!("duplicate sku {}", s.id));
            }
        }
        let mut share_sum = 0.0;
        for s in &self.skus {
            match s.kind {
                SkuKind::Item => {
                    if s.bom_level != 0 {
                        return bad(format!("item {} must sit on BoM level 0", s.id));
                    }
                    match s.demand_share {
                        Some(x) if x > 0.0 && x < 1.0 + 1e-12 => share_sum += x,
                        _ => return bad(format!("item {} needs a demand share in (0,1]", s.id)),
                    }
                }
                _ if s.demand_share.is_some() => {
                    return bad(format!("only items carry demand shares ({})", s.id))
                }
                SkuKind::Component if s.bom_level == 0 => {
                    return bad(format!("component {} cannot sit on level 0", s.id))
                }
                _ => {}
            }
            match (s.kind, s.child) {
                (SkuKind::RawMaterial, Some(_)) => {
                    return bad(format!("raw material {} cannot have a child", s.id))
                }
                (SkuKind::RawMaterial, None) => {}
                (_, None) => return bad(format!("{} has no child component", s.id)),
                (_, Some(c)) => match ids.get(&c) {
                    None => return bad(format!("{} references unknown child {c}", s.id)),
                    Some(child) if child.bom_level != s.bom_level + 1 => {
                        return bad(format!("child {c} of {} is not on the next BoM level", s.id))
                    }
                    Some(_) => {}
                },
            }
            let routing = self.routing(s.id);
            match (s.kind, routing) {
                (SkuKind::RawMaterial, Some(_)) => {
                    return bad(format!("raw material {} is not produced", s.id))
                }
                (SkuKind::RawMaterial, None) => {}
                (_, None) => return bad(format!("{} has no routing", s.id)),
                (_, Some(r)) => {
                    if r.steps.is_empty() {
                        return bad(format!("routing of {} is empty", s.id));
                    }
                    for step in &r.steps {
                        if !machines.contains(step.machine.as_str()) {
                            return bad(format!("{} routes to unknown machine {}", s.id, step.machine));
                        }
                        if !(step.weight > 0.0) {
                            return bad(format!("{} has a non-positive weight", s.id));
                        }
                    }
                }
            }
        }
        if (share_sum - 1.0).abs() > 1e-9 {
            return bad(format!("item demand shares sum to {share_sum}, not 1"));
        }
        if self.routings.iter().any(|r| !ids.contains_key(&r.sku)) {
            return bad("routing for unknown sku".into());
        }
        let planned_levels: BTreeSet<u32> = self
            .skus
            .iter()
            .filter(|s| s.kind != SkuKind::RawMaterial)
            .map(|s| s.bom_level)
            .collect();
        if planned_levels.len() as u32 != self.planned_bom_levels {
            return bad(format!(
                "planned_bom_levels is {} but {} levels carry produced skus",
                self.planned_bom_levels,
                planned_levels.len()
            ));
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn data_path(name: &str) -> std::path::PathBuf {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
    }

    /// Set `PPCS_REGEN_DATA=1` to rewrite the bundled files from the builders.
    #[test]
    fn bundled_files_match_builders() {
        let cases = [
            ("flow_shop.json", builders::flow_shop()),
            ("hybrid_shop.json", builders::hybrid_shop()),
            ("job_shop.json", builders::job_shop()),
        ];
        for (file, built) in cases {
            built.validate().unwrap();
            let text = built.to_json();
            if std::env::var_os("PPCS_REGEN_DATA").is_some() {
                std::fs::write(data_path(file), &text).unwrap();
            }
            let on_disk = std::fs::read_to_string(data_path(file)).unwrap();
            assert_eq!(on_disk, text, "{file} is stale");
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for kind in StructureKind::ALL {
            let s = build_structure(kind);
            let once = s.to_json();
            let again = Structure::from_json(&once).unwrap();
            assert_eq!(again, s);
            assert_eq!(again.to_json(), once);
        }
    }

    #[test]
    fn flow_shop_shape() {
        let s = build_structure(StructureKind::FlowShop);
        assert_eq!(s.machines.len(), 4);
        assert_eq!(s.bom_levels(), 4);
        assert_eq!(s.items().count(), 8);
        assert_eq!(s.planned_bom_levels, 3);
        assert_eq!(s.routing(SkuId(201)).unwrap().steps.len(), 2);
        let global = ["M1", "M2", "M3", "M4"];
        let pos = |m: &str| global.iter().position(|g| *g == m).unwrap();
        for item in s.items() {
            let mut chain = Vec::new();
            let mut cur = Some(item.id);
            while let Some(id) = cur {
                if let Some(r) = s.routing(id) {
                    chain.splice(0..0, r.steps.iter().map(|st| pos(&st.machine)));
                }
                cur = s.sku(id).unwrap().child;
            }
            assert!(chain.windows(2).all(|w| w[0] < w[1]), "{chain:?}");
        }
    }

    #[test]
    fn job_shop_shape() {
        let s = build_structure(StructureKind::JobShop);
        assert_eq!(s.machines.len(), 4);
        assert_eq!(s.bom_levels(), 2);
        assert_eq!(s.planned_bom_levels, 1);
        assert!(!s.has_planned_components());
        let raw = s.skus.iter().find(|k| k.bom_level == 1).unwrap();
        assert_eq!(raw.kind, SkuKind::RawMaterial);
        let differ = s.items().any(|i| s.routing(i.id).unwrap().steps.len() < 4);
        assert!(differ, "some item must skip a machine");
    }

    #[test]
    fn hybrid_shop_shape() {
        let s = build_structure(StructureKind::HybridShop);
        assert_eq!(s.machines.len(), 6);
        assert_eq!(s.bom_levels(), 4);
        let r201 = s.routing(SkuId(201)).unwrap();
        let r202 = s.routing(SkuId(202)).unwrap();
        let names = |r: &Routing| r.steps.iter().map(|x| x.machine.clone()).collect::<Vec<_>>();
        assert_eq!(names(r201), names(r202));
        let paths: BTreeSet<Vec<String>> =
            s.items().map(|i| names(s.routing(i.id).unwrap())).collect();
        assert_eq!(paths.len(), 8, "level-0 routings are item specific");
    }

    #[test]
    fn component_shares() {
        let s = build_structure(StructureKind::FlowShop);
        assert!((component_demand_share(&s, SkuId(301)).unwrap() - 1.0).abs() < 1e-12);
        let a = component_demand_share(&s, SkuId(201)).unwrap();
        let b = component_demand_share(&s, SkuId(202)).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
        assert!(matches!(
            component_demand_share(&s, SkuId(999)),
            Err(SimError::UnknownSku(_))
        ));
    }

    #[test]
    fn share_additivity_over_two_items() {
        let mut s = builders::flow_shop();
        // route items 101 and 102 alone through a fresh component
        s.skus.push(Sku {
            id: SkuId(203),
            kind: SkuKind::Component,
            bom_level: 1,
            child: Some(SkuId(301)),
            demand_share: None,
        });
        for sku in s.skus.iter_mut().filter(|k| k.id.0 == 101 || k.id.0 == 102) {
            sku.child = Some(SkuId(203));
        }
        let share = component_demand_share(&s, SkuId(203)).unwrap();
        assert!((share - 0.175).abs() < 1e-12);
    }

    #[test]
    fn shares_partition_every_level() {
        for kind in StructureKind::ALL {
            let s = build_structure(kind);
            let mut by_level: BTreeMap<u32, f64> = BTreeMap::new();
            for sku in &s.skus {
                *by_level.entry(sku.bom_level).or_default() += s.demand_share_of(sku.id).unwrap();
            }
            for (level, total) in by_level {
                assert!((total - 1.0).abs() < 1e-12, "{kind} level {level}: {total}");
            }
        }
    }

    #[test]
    fn validation_rejects_broken_files() {
        let mut s = builders::flow_shop();
        s.routings.retain(|r| r.sku != SkuId(301));
        assert!(s.validate().is_err());

        let mut s = builders::flow_shop();
        s.skus[0].demand_share = Some(0.5);
        assert!(s.validate().is_err());

        let mut s = builders::flow_shop();
        s.routings[0].steps[0].machine = "M9".into();
        assert!(s.validate().is_err());
    }
}
