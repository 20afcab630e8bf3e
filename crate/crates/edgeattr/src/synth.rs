//! Labeled synthetic rating graphs with injected fraud patterns.
//!
//! Each user is assigned a behavior archetype, draws an edge count from the
//! archetype's activity law, rates uniformly chosen products with stars drawn
//! from the archetype's mass vector, and spaces the ratings by interarrival
//! times drawn from its IAT law. Labels follow the archetype's fraud flag.

use std::collections::BTreeMap;

use edgeattr_core::eval::Label;
use edgeattr_core::graph::{AttrValue, AttributeDef, AttributeSchema, AttributedMultigraph, GraphSchema, RelationType};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::LogNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Interarrival-time law, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IatLaw {
    LogNormal { mu: f64, sigma: f64 },
    Fixed { seconds: f64 },
    /// Each gap picks a component by weight.
    Mixture { components: Vec<(f64, IatLaw)> },
}

/// Law of the number of edges per user; draws are clamped to at least 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityLaw {
    Fixed { edges: usize },
    /// Uniform over `min..=max`.
    Uniform { min: usize, max: usize },
    /// Rounded lognormal, capped at `max`.
    LogNormal { mu: f64, sigma: f64, max: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archetype {
    pub name: String,
    pub fraud: bool,
    pub proportion: f64,
    /// Mass over 1..=5 stars.
    pub stars: [f64; 5],
    pub iat: IatLaw,
    pub activity: ActivityLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_products: usize,
    pub seed: u64,
    /// Assign archetypes in exact proportion (largest remainder, then
    /// shuffled) instead of drawing each user independently.
    #[serde(default)]
    pub exact_counts: bool,
    /// Earliest first-rating time; first ratings are spread over the following year.
    #[serde(default = "default_start")]
    pub start_time: f64,
    pub archetypes: Vec<Archetype>,
}

fn default_start() -> f64 {
    1.5e9
}

const DAY: f64 = 86_400.0;
const YEAR: f64 = 365.0 * DAY;

/// Honest J-shaped raters with IATs from hours to months.
pub fn regular(proportion: f64) -> Archetype {
    Archetype {
        name: "regular".into(),
        fraud: false,
        proportion,
        stars: [0.15, 0.05, 0.05, 0.20, 0.55],
        iat: IatLaw::LogNormal { mu: (5.0 * DAY).ln(), sigma: 1.5 },
        activity: ActivityLaw::LogNormal { mu: 1.5, sigma: 0.9, max: 150 },
    }
}

/// Honest raters who mostly rate in sessions of minutes, weeks apart.
pub fn bursty(proportion: f64) -> Archetype {
    Archetype {
        name: "bursty".into(),
        fraud: false,
        proportion,
        stars: [0.10, 0.05, 0.10, 0.30, 0.45],
        iat: IatLaw::Mixture {
            components: vec![
                (0.6, IatLaw::LogNormal { mu: (10.0 * 60.0f64).ln(), sigma: 1.0 }),
                (0.4, IatLaw::LogNormal { mu: (20.0 * DAY).ln(), sigma: 1.0 }),
            ],
        },
        activity: ActivityLaw::LogNormal { mu: 2.0, sigma: 0.7, max: 100 },
    }
}

/// Fraud: only 5-star ratings, 5 seconds apart, 200 to 500 of them.
pub fn rapid_fire(proportion: f64) -> Archetype {
    Archetype {
        name: "rapid_fire".into(),
        fraud: true,
        proportion,
        stars: [0.0, 0.0, 0.0, 0.0, 1.0],
        iat: IatLaw::Fixed { seconds: 5.0 },
        activity: ActivityLaw::Uniform { min: 200, max: 500 },
    }
}

/// Fraud: bursts of 1-star ratings a few seconds to minutes apart.
pub fn defamer(proportion: f64) -> Archetype {
    Archetype {
        name: "defamer".into(),
        fraud: true,
        proportion,
        stars: [1.0, 0.0, 0.0, 0.0, 0.0],
        iat: IatLaw::LogNormal { mu: 30.0f64.ln(), sigma: 1.0 },
        activity: ActivityLaw::Uniform { min: 20, max: 100 },
    }
}

impl Default for SynthConfig {
    /// 7,000 regular and 3,000 bursty honest users, 100 rapid-fire
    /// fraudsters and 1,000 products.
    fn default() -> Self {
        let n = 10_100;
        let share = |k: usize| k as f64 / n as f64;
        SynthConfig {
            n_users: n,
            n_products: 1_000,
            seed: 0,
            exact_counts: true,
            start_time: default_start(),
            archetypes: vec![regular(share(7_000)), bursty(share(3_000)), rapid_fire(share(100))],
        }
    }
}

/// Schema of generated graphs: users rate products (undirected) with
/// categorical stars 1..5 and a timestamp.
pub fn rating_schema() -> GraphSchema {
    GraphSchema::new(
        vec!["user".into(), "product".into()],
        vec![RelationType {
            name: "rates".into(),
            source: "user".into(),
            target: "product".into(),
            directed: false,
            attributes: AttributeSchema::new(vec![
                AttributeDef::categorical("stars", (1..=5).map(|s| s.to_string()).collect()),
                AttributeDef::temporal("ts"),
            ]),
        }],
    )
    .expect("valid schema")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub graph: AttributedMultigraph,
    /// Every user, by id.
    pub labels: BTreeMap<String, Label>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Synth(msg.into())
}

fn check_iat(law: &IatLaw, name: &str) -> Result<()> {
    match law {
        IatLaw::LogNormal { mu, sigma } => {
            if !mu.is_finite() || !(sigma.is_finite() && *sigma >= 0.0) {
                return Err(invalid(format!("archetype \"{name}\": lognormal IAT needs finite mu and sigma >= 0")));
            }
        }
        IatLaw::Fixed { seconds } => {
            if !(seconds.is_finite() && *seconds >= 0.0) {
                return Err(invalid(format!("archetype \"{name}\": fixed IAT must be >= 0")));
            }
        }
        IatLaw::Mixture { components } => {
            if components.is_empty() {
                return Err(invalid(format!("archetype \"{name}\": empty IAT mixture")));
            }
            if components.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) || components.iter().all(|(w, _)| *w == 0.0) {
                return Err(invalid(format!("archetype \"{name}\": mixture weights must be >= 0 with a positive sum")));
            }
            for (_, c) in components {
                check_iat(c, name)?;
            }
        }
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_users == 0 || self.archetypes.is_empty() {
            return Err(invalid("empty population"));
        }
        if self.n_products == 0 {
            return Err(invalid("no products"));
        }
        if !self.start_time.is_finite() || self.start_time < 0.0 {
            return Err(invalid("start_time must be finite and >= 0"));
        }
        let mut total = 0.0;
        for a in &self.archetypes {
            if !(a.proportion.is_finite() && a.proportion >= 0.0) {
                return Err(invalid(format!("archetype \"{}\": proportion must be >= 0", a.name)));
            }
            total += a.proportion;
            let mass: f64 = a.stars.iter().sum();
            if a.stars.iter().any(|m| !(*m >= 0.0)) || (mass - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("archetype \"{}\": star masses must be >= 0 and sum to 1", a.name)));
            }
            check_iat(&a.iat, &a.name)?;
            let ok = match a.activity {
                ActivityLaw::Fixed { edges } => edges >= 1,
                ActivityLaw::Uniform { min, max } => min >= 1 && min <= max,
                ActivityLaw::LogNormal { mu, sigma, max } => mu.is_finite() && sigma.is_finite() && sigma >= 0.0 && max >= 1,
            };
            if !ok {
                return Err(invalid(format!("archetype \"{}\": activity law must yield at least 1 edge", a.name)));
            }
        }
        if (total - 1.0).abs() > 1e-6 {
            return Err(invalid(format!("archetype proportions sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Largest-remainder allocation of `n` users to proportions; ties go to the
/// earlier archetype.
fn exact_counts(proportions: &[f64], n: usize) -> Vec<usize> {
    let quotas: Vec<f64> = proportions.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

fn draw_iat<R: Rng>(law: &IatLaw, rng: &mut R) -> f64 {
    match law {
        IatLaw::LogNormal { mu, sigma } => LogNormal::new(*mu, *sigma).expect("validated").sample(rng),
        IatLaw::Fixed { seconds } => *seconds,
        IatLaw::Mixture { components } => {
            let pick = WeightedIndex::new(components.iter().map(|(w, _)| *w)).expect("validated");
            draw_iat(&components[pick.sample(rng)].1, rng)
        }
    }
}

fn draw_activity<R: Rng>(law: &ActivityLaw, rng: &mut R) -> usize {
    match *law {
        ActivityLaw::Fixed { edges } => edges,
        ActivityLaw::Uniform { min, max } => rng.random_range(min..=max),
        ActivityLaw::LogNormal { mu, sigma, max } => {
            let x: f64 = LogNormal::new(mu, sigma).expect("validated").sample(rng);
            (x.round() as usize).clamp(1, max)
        }
    }
}

/// Generates a labeled graph; the same config always yields the same graph.
///
/// Users are `u000000, u000001, ...` and products `p00000, ...`. Timestamps
/// are whole seconds.
pub fn generate(config: &SynthConfig) -> Result<LabeledGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let proportions: Vec<f64> = config.archetypes.iter().map(|a| a.proportion).collect();
    let assignment: Vec<usize> = if config.exact_counts {
        let mut v: Vec<usize> = exact_counts(&proportions, config.n_users)
            .into_iter()
            .enumerate()
            .flat_map(|(i, c)| std::iter::repeat_n(i, c))
            .collect();
        v.shuffle(&mut rng);
        v
    } else {
        let pick = WeightedIndex::new(&proportions).map_err(|e| invalid(e.to_string()))?;
        (0..config.n_users).map(|_| pick.sample(&mut rng)).collect()
    };

    let mut graph = AttributedMultigraph::new(rating_schema());
    let mut labels = BTreeMap::new();
    let products: Vec<String> = (0..config.n_products).map(|p| format!("p{p:05}")).collect();
    let star_laws: Vec<WeightedIndex<f64>> =
        config.archetypes.iter().map(|a| WeightedIndex::new(a.stars).expect("validated")).collect();
    for (u, &ai) in assignment.iter().enumerate() {
        let a = &config.archetypes[ai];
        let user = format!("u{u:06}");
        labels.insert(user.clone(), if a.fraud { Label::Fraud(a.name.clone()) } else { Label::Honest });
        let edges = draw_activity(&a.activity, &mut rng);
        let mut t = config.start_time + rng.random_range(0.0..YEAR);
        for e in 0..edges {
            if e > 0 {
                t += draw_iat(&a.iat, &mut rng);
            }
            let product = &products[rng.random_range(0..products.len())];
            let star = star_laws[ai].sample(&mut rng) as u32;
            graph
                .add_edge("rates", &user, product, vec![AttrValue::Category(star), AttrValue::Number(t.round())])
                .map_err(|e| invalid(e.to_string()))?;
        }
    }
    Ok(LabeledGraph { graph, labels })
}

pub fn parse_config(text: &str) -> std::result::Result<SynthConfig, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn config_to_json(config: &SynthConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}
