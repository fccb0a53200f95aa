//! Simulation models: per-group component distributions, the group-size
//! designs, and the multiplicity-weighted average distribution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, Error, Result};
use crate::numerics::{find_root_increasing, normal_cdf, normal_quantile, RandomStream};
use crate::sample::GroupedSample;

/// Distribution shared by every observation of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ComponentDistribution {
    /// `N(mu, 1)`.
    NormalUnitVar { mu: f64 },
    /// Exponential with the given rate: CDF `1 − exp(−rate·x)`, mean `1/rate`.
    Exponential { rate: f64 },
    /// Uniform on `[lo, hi]`.
    UniformInterval { lo: f64, hi: f64 },
}

impl ComponentDistribution {
    pub fn normal(mu: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain(format!("normal mean must be finite, got {mu}")));
        }
        Ok(Self::NormalUnitVar { mu })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Domain(format!(
                "exponential rate must be positive and finite, got {rate}"
            )));
        }
        Ok(Self::Exponential { rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Domain(format!(
                "uniform needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::UniformInterval { lo, hi })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::NormalUnitVar { mu } => normal_cdf(x - mu),
            Self::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Self::UniformInterval { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// Left-continuous inverse of [`cdf`](Self::cdf) on `[0, 1]`.
    ///
    /// The normal component maps 0 and 1 to `∓∞`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::NormalUnitVar { mu } => {
                if u <= 0.0 {
                    f64::NEG_INFINITY
                } else if u >= 1.0 {
                    f64::INFINITY
                } else {
                    mu + normal_quantile(u).expect("u checked to be in (0, 1)")
                }
            }
            Self::Exponential { rate } => {
                if u >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-u.max(0.0)).ln_1p() / rate
                }
            }
            Self::UniformInterval { lo, hi } => lo + u.clamp(0.0, 1.0) * (hi - lo),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::NormalUnitVar { mu } => mu,
            Self::Exponential { rate } => 1.0 / rate,
            Self::UniformInterval { lo, hi } => 0.5 * (lo + hi),
        }
    }
}

/// The three simulation families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// `N(μ_j, 1)` with `μ_j = (log j)^{γ/2}`.
    I,
    /// Exponential with rate `λ_j = j^{−γ}`.
    II,
    /// `Unif(x*_j/2, x*_j)` with `x*_j = 1 + e^γ·j/g`.
    III,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::I, Family::II, Family::III];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(Family::I),
            "II" | "ii" | "2" => Ok(Family::II),
            "III" | "iii" | "3" => Ok(Family::III),
            other => Err(Error::Domain(format!(
                "unknown family '{other}', expected I, II or III"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    /// Every group has two observations.
    Twin,
    /// Group `j` has `j + 1` observations.
    Triangular,
}

impl DesignKind {
    pub const ALL: [DesignKind; 2] = [DesignKind::Twin, DesignKind::Triangular];

    pub fn as_str(&self) -> &'static str {
        match self {
            DesignKind::Twin => "twin",
            DesignKind::Triangular => "triangular",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "twin" => Ok(DesignKind::Twin),
            "triangular" => Ok(DesignKind::Triangular),
            other => Err(Error::Domain(format!(
                "unknown design '{other}', expected twin or triangular"
            ))),
        }
    }
}

/// Group sizes `m_1..m_g` for a design at total size `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupDesign {
    pub kind: DesignKind,
    pub n: usize,
    pub sizes: Vec<usize>,
}

impl GroupDesign {
    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }
}

fn triangular_total(g: usize) -> usize {
    g * (g + 3) / 2
}

pub fn make_design(kind: DesignKind, n: usize) -> Result<GroupDesign> {
    match kind {
        DesignKind::Twin => {
            if n >= 2 && n.is_multiple_of(2) {
                Ok(GroupDesign {
                    kind,
                    n,
                    sizes: vec![2; n / 2],
                })
            } else {
                let nearest = if n < 2 { vec![2] } else { vec![n - 1, n + 1] };
                Err(Error::Design {
                    message: format!(
                        "twin design needs an even n >= 2, got {n}; nearest admissible: {}",
                        join(&nearest)
                    ),
                    nearest,
                })
            }
        }
        DesignKind::Triangular => {
            let mut g = 1;
            while triangular_total(g) < n {
                g += 1;
            }
            if triangular_total(g) == n {
                return Ok(GroupDesign {
                    kind,
                    n,
                    sizes: (2..=g + 1).collect(),
                });
            }
            let mut nearest = Vec::new();
            if g > 1 {
                nearest.push(triangular_total(g - 1));
            }
            nearest.push(triangular_total(g));
            Err(Error::Design {
                message: format!(
                    "triangular design needs n = g(g+3)/2, got {n}; nearest admissible: {}",
                    join(&nearest)
                ),
                nearest,
            })
        }
    }
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" or ")
}

/// Components with multiplicities; induces the average distribution
/// `F̄(x) = n⁻¹ Σ_j m_j F_j(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    components: Vec<ComponentDistribution>,
    multiplicities: Vec<usize>,
    n: usize,
}

impl MixtureModel {
    /// Every multiplicity must be at least 2 so that samples drawn from the
    /// model form valid groups.
    pub fn new(components: Vec<ComponentDistribution>, multiplicities: Vec<usize>) -> Result<Self> {
        if components.is_empty() || components.len() != multiplicities.len() {
            return Err(Error::Assumption(format!(
                "{} components but {} multiplicities",
                components.len(),
                multiplicities.len()
            )));
        }
        if let Some(j) = multiplicities.iter().position(|&m| m < 2) {
            return Err(Error::Assumption(format!(
                "component {j} has multiplicity {}; every group needs at least 2",
                multiplicities[j]
            )));
        }
        let n = multiplicities.iter().sum();
        Ok(Self {
            components,
            multiplicities,
            n,
        })
    }

    /// A single component repeated `n` times, the i.i.d. case.
    pub fn homogeneous(component: ComponentDistribution, n: usize) -> Result<Self> {
        Self::new(vec![component], vec![n])
    }

    pub fn components(&self) -> &[ComponentDistribution] {
        &self.components
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_groups(&self) -> usize {
        self.components.len()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let total: f64 = self
            .components
            .iter()
            .zip(&self.multiplicities)
            .map(|(c, &m)| m as f64 * c.cdf(x))
            .sum();
        total / self.n as f64
    }

    pub fn quantile(&self, tau: f64) -> Result<f64> {
        check_open_unit("tau", tau)?;
        let (lo, hi) = self
            .components
            .iter()
            .map(|c| c.quantile(tau))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
                (lo.min(q), hi.max(q))
            });
        find_root_increasing(|x| self.cdf(x), tau, lo, hi)
    }
}

/// Builds the model for `family` at heterogeneity level `gamma` over the
/// groups of `design`. Group `j` (1-based) gets component `j`.
pub fn make_dgm(family: Family, gamma: f64, design: &GroupDesign) -> Result<MixtureModel> {
    if !gamma.is_finite() {
        return Err(Error::Domain(format!("gamma must be finite, got {gamma}")));
    }
    let g = design.num_groups() as f64;
    let components = (1..=design.num_groups())
        .map(|j| {
            let j = j as f64;
            match family {
                Family::I => ComponentDistribution::normal(j.ln().powf(gamma / 2.0)),
                Family::II => ComponentDistribution::exponential(j.powf(-gamma)),
                Family::III => {
                    let endpoint = 1.0 + gamma.exp() * j / g;
                    ComponentDistribution::uniform(endpoint / 2.0, endpoint)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(components, design.sizes.clone())
}

/// `F̄(x)`.
pub fn mixture_cdf(model: &MixtureModel, x: f64) -> f64 {
    model.cdf(x)
}

/// `Q̄(τ)`, by bisection between the smallest and largest component quantiles.
pub fn mixture_quantile(model: &MixtureModel, tau: f64) -> Result<f64> {
    model.quantile(tau)
}

/// Draws `m_j` observations from component `j`, group by group.
///
/// Consumes exactly `n` open-interval uniforms: group-major, index-minor.
pub fn sample_heterogeneous(model: &MixtureModel, stream: &mut RandomStream) -> GroupedSample {
    let mut values = Vec::with_capacity(model.n);
    let mut group_of = Vec::with_capacity(model.n);
    for (j, (component, &m)) in model.components.iter().zip(&model.multiplicities).enumerate() {
        for _ in 0..m {
            values.push(component.quantile(stream.uniform_open01()));
            group_of.push(j);
        }
    }
    GroupedSample::new(values, group_of).expect("model multiplicities are at least 2")
}

/// Draws `n` i.i.d. observations from `F̄` by composition, labeled as one group.
///
/// Each draw consumes two uniforms: `u₁` picks observation slot `⌊u₁·n⌋`,
/// whose group `j` has probability `m_j/n`; `u₂` is inverted through
/// component `j`.
pub fn sample_iid_average(model: &MixtureModel, stream: &mut RandomStream) -> GroupedSample {
    let bounds: Vec<usize> = model
        .multiplicities
        .iter()
        .scan(0, |acc, &m| {
            *acc += m;
            Some(*acc)
        })
        .collect();
    let n = model.n;
    let values = (0..n)
        .map(|_| {
            let slot = ((stream.uniform01() * n as f64) as usize).min(n - 1);
            let j = bounds.partition_point(|&b| b <= slot);
            model.components[j].quantile(stream.uniform_open01())
        })
        .collect();
    GroupedSample::single_group(values).expect("model has n >= 2")
}

/// `V_n(τ) = n⁻¹ Σ_j m_j p_j (1 − p_j)` with `p_j = F_j(Q̄(τ))`.
pub fn population_variance(model: &MixtureModel, tau: f64) -> Result<f64> {
    let q = mixture_quantile(model, tau)?;
    Ok(population_variance_at(model, q))
}

pub(crate) fn population_variance_at(model: &MixtureModel, q: f64) -> f64 {
    let total: f64 = model
        .components
        .iter()
        .zip(&model.multiplicities)
        .map(|(c, &m)| {
            let p = c.cdf(q);
            m as f64 * p * (1.0 - p)
        })
        .sum();
    total / model.n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::derive_stream;

    #[test]
    fn default_designs() {
        let twin = make_design(DesignKind::Twin, 350).unwrap();
        assert_eq!(twin.num_groups(), 175);
        assert!(twin.sizes.iter().all(|&m| m == 2));
        let tri = make_design(DesignKind::Triangular, 350).unwrap();
        assert_eq!(tri.num_groups(), 25);
        assert_eq!(tri.sizes, (2..=26).collect::<Vec<_>>());
    }

    #[test]
    fn inadmissible_designs() {
        match make_design(DesignKind::Twin, 7) {
            Err(Error::Design { nearest, .. }) => assert_eq!(nearest, vec![6, 8]),
            other => panic!("{other:?}"),
        }
        match make_design(DesignKind::Triangular, 351) {
            Err(Error::Design { nearest, message }) => {
                assert_eq!(nearest, vec![350, 377]);
                assert!(message.contains("350"));
            }
            other => panic!("{other:?}"),
        }
        assert!(make_design(DesignKind::Twin, 0).is_err());
        assert_eq!(make_design(DesignKind::Triangular, 2).unwrap().sizes, vec![2]);
    }

    #[test]
    fn dgm_parameters() {
        let design = make_design(DesignKind::Triangular, 350).unwrap();
        let m = make_dgm(Family::I, 2.0, &design).unwrap();
        assert_eq!(m.components()[0], ComponentDistribution::NormalUnitVar { mu: 0.0 });

        let m = make_dgm(Family::II, 1.0, &design).unwrap();
        for (j, c) in m.components().iter().enumerate() {
            assert!((c.mean() - (j + 1) as f64).abs() < 1e-12);
        }

        let m = make_dgm(Family::III, 1.0, &design).unwrap();
        match m.components()[24] {
            ComponentDistribution::UniformInterval { lo, hi } => {
                assert!((hi - (1.0 + std::f64::consts::E)).abs() < 1e-12);
                assert!((hi - 3.718_28).abs() < 1e-5);
                assert!((lo - hi / 2.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(m.multiplicities(), design.sizes.as_slice());
    }

    #[test]
    fn unknown_family_rejected() {
        assert!("IV".parse::<Family>().is_err());
        assert_eq!("ii".parse::<Family>().unwrap(), Family::II);
        assert!("square".parse::<DesignKind>().is_err());
    }

    #[test]
    fn mixture_cdf_cases() {
        let std_normal = MixtureModel::homogeneous(ComponentDistribution::normal(0.0).unwrap(), 2).unwrap();
        assert_eq!(mixture_cdf(&std_normal, 0.0), 0.5);

        let two = MixtureModel::new(
            vec![
                ComponentDistribution::uniform(0.0, 1.0).unwrap(),
                ComponentDistribution::uniform(1.0, 2.0).unwrap(),
            ],
            vec![3, 3],
        )
        .unwrap();
        assert_eq!(mixture_cdf(&two, 1.0), 0.5);
        assert_eq!(mixture_cdf(&two, -5.0), 0.0);
        assert_eq!(mixture_cdf(&two, 5.0), 1.0);
    }

    #[test]
    fn weighting_uses_multiplicities() {
        let a = ComponentDistribution::uniform(0.0, 1.0).unwrap();
        let b = ComponentDistribution::uniform(0.5, 1.5).unwrap();
        let model = MixtureModel::new(vec![a, b], vec![2, 6]).unwrap();
        for x in [0.25, 0.6, 0.9, 1.2] {
            let weighted = (2.0 * a.cdf(x) + 6.0 * b.cdf(x)) / 8.0;
            let equal = 0.5 * (a.cdf(x) + b.cdf(x));
            assert!((mixture_cdf(&model, x) - weighted).abs() < 1e-15);
            assert!((mixture_cdf(&model, x) - equal).abs() > 1e-3);
        }
    }

    #[test]
    fn mixture_quantile_symmetric_cases() {
        let std_normal = MixtureModel::homogeneous(ComponentDistribution::normal(0.0).unwrap(), 4).unwrap();
        assert!(mixture_quantile(&std_normal, 0.5).unwrap().abs() < 1e-12);
        for a in [0.1, 1.0, 2.0, 3.0] {
            let model = MixtureModel::new(
                vec![
                    ComponentDistribution::normal(-a).unwrap(),
                    ComponentDistribution::normal(a).unwrap(),
                ],
                vec![5, 5],
            )
            .unwrap();
            assert!(mixture_quantile(&model, 0.5).unwrap().abs() < 1e-11, "a={a}");
        }
    }

    #[test]
    fn component_galois_relation() {
        let comps = [
            ComponentDistribution::normal(1.5).unwrap(),
            ComponentDistribution::exponential(0.01).unwrap(),
            ComponentDistribution::uniform(-2.0, 3.0).unwrap(),
        ];
        let mut s = derive_stream(11, 0);
        for c in comps {
            for _ in 0..2000 {
                let u = s.uniform_open01();
                let x = c.quantile(s.uniform_open01());
                // Q(u) <= x  ⇔  u <= F(x), allowing for rounding at the boundary
                let lhs = c.quantile(u) <= x;
                let rhs = u <= c.cdf(x);
                if lhs != rhs {
                    assert!((c.cdf(x) - u).abs() < 1e-12, "{c:?} u={u} x={x}");
                }
            }
        }
    }

    #[test]
    fn population_variance_cases() {
        let single = MixtureModel::homogeneous(ComponentDistribution::exponential(2.0).unwrap(), 10).unwrap();
        for tau in [0.1, 0.5, 0.8] {
            let v = population_variance(&single, tau).unwrap();
            assert!((v - tau * (1.0 - tau)).abs() < 1e-12);
        }
        let disjoint = MixtureModel::new(
            vec![
                ComponentDistribution::uniform(0.0, 1.0).unwrap(),
                ComponentDistribution::uniform(2.0, 3.0).unwrap(),
            ],
            vec![2, 2],
        )
        .unwrap();
        assert!(population_variance(&disjoint, 0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn heterogeneous_sample_structure() {
        let model = MixtureModel::new(
            vec![
                ComponentDistribution::normal(0.0).unwrap(),
                ComponentDistribution::normal(5.0).unwrap(),
            ],
            vec![2, 3],
        )
        .unwrap();
        let mut a = derive_stream(1, 0);
        let mut b = derive_stream(1, 0);
        let s = sample_heterogeneous(&model, &mut a);
        assert_eq!(s.n(), 5);
        assert_eq!(s.group_sizes(), &[2, 3]);
        assert_eq!(s, sample_heterogeneous(&model, &mut b));
        // exactly n uniforms consumed
        let mut c = derive_stream(1, 0);
        for _ in 0..5 {
            c.uniform01();
        }
        assert_eq!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn iid_sample_is_single_group() {
        let design = make_design(DesignKind::Triangular, 14).unwrap();
        let model = make_dgm(Family::III, 2.0, &design).unwrap();
        let mut s = derive_stream(9, 3);
        let sample = sample_iid_average(&model, &mut s);
        assert_eq!(sample.group_sizes(), &[14]);
    }
}
