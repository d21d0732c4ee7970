//! Combinatorial models of connected curves with multicross singularities.
//!
//! A curve is a list of smooth components (genus, punctures, named marked
//! points) plus a list of singular points, each of which glues together a
//! set of marked-point branches. The incidence graph (components and
//! singular points as vertices, branches as edges) must be connected. The
//! fundamental group is the discrete surrogate: the free product of the
//! component surface groups and a free group on the edges outside a
//! spanning tree of the incidence graph. For n invertible this has the same
//! finite quotients as the tame étale fundamental group, which is all the
//! cohomology pipelines consume.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpgroups::{commutator, concat, Presentation, Word};
use crate::linalg::LambdaModule;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub genus: u64,
    pub punctures: u64,
    /// labels of marked points available for gluing
    pub marked: Vec<String>,
}

/// One branch of a singular point: a marked point on a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchRef {
    pub component: usize,
    pub point: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub branches: Vec<BranchRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseKind {
    SeparablyClosed,
    FiniteField,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveModel {
    pub components: Vec<Component>,
    pub singular: Vec<SingularPoint>,
    pub base: BaseKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub components: usize,
    pub singular_points: usize,
    /// branch count mᵢ per singular point
    pub branch_counts: Vec<usize>,
    pub connected: bool,
    pub betti: usize,
    pub euler_characteristic: i64,
}

/// Incidence graph of components and singular points.
#[derive(Debug, Clone)]
pub struct DualGraph {
    pub n_components: usize,
    pub n_singular: usize,
    /// edges as (singular point index, branch position, component index)
    pub edges: Vec<(usize, usize, usize)>,
    pub betti: usize,
}

impl DualGraph {
    pub fn vertices(&self) -> usize {
        self.n_components + self.n_singular
    }
}

/// How the generators of the fundamental group presentation are laid out.
#[derive(Debug, Clone)]
pub struct Pi1Layout {
    /// per component: (a, b) generator index pairs, one per genus handle
    pub handles: Vec<Vec<(usize, usize)>>,
    /// per component: puncture loop generators (p-1 of them when p > 0)
    pub punctures: Vec<Vec<usize>>,
    /// non-tree incidence edges carrying a free generator:
    /// (singular point, branch position, generator index)
    pub edge_gens: Vec<(usize, usize, usize)>,
    /// spanning tree edges as (singular point, branch position)
    pub tree_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Pi1Presentation {
    pub pres: Presentation,
    pub layout: Pi1Layout,
}

impl CurveModel {
    pub fn new(components: Vec<Component>, singular: Vec<SingularPoint>, base: BaseKind) -> Self {
        CurveModel {
            components,
            singular,
            base,
        }
    }

    /// Smooth proper curve of the given genus, no marked points.
    pub fn smooth_proper(genus: u64) -> Self {
        CurveModel {
            components: vec![Component {
                id: "c0".into(),
                genus,
                punctures: 0,
                marked: vec![],
            }],
            singular: vec![],
            base: BaseKind::SeparablyClosed,
        }
    }

    /// One rational component with two branches glued at a single point.
    pub fn nodal_cubic() -> Self {
        CurveModel {
            components: vec![Component {
                id: "c0".into(),
                genus: 0,
                punctures: 0,
                marked: vec!["p".into(), "q".into()],
            }],
            singular: vec![SingularPoint {
                branches: vec![
                    BranchRef { component: 0, point: 0 },
                    BranchRef { component: 0, point: 1 },
                ],
            }],
            base: BaseKind::SeparablyClosed,
        }
    }

    /// Genus-1 curve with `nodes` self-gluings.
    pub fn genus_one_with_nodes(nodes: usize) -> Self {
        let marked: Vec<String> = (0..2 * nodes).map(|i| format!("m{i}")).collect();
        CurveModel {
            components: vec![Component {
                id: "c0".into(),
                genus: 1,
                punctures: 0,
                marked,
            }],
            singular: (0..nodes)
                .map(|i| SingularPoint {
                    branches: vec![
                        BranchRef { component: 0, point: 2 * i },
                        BranchRef { component: 0, point: 2 * i + 1 },
                    ],
                })
                .collect(),
            base: BaseKind::SeparablyClosed,
        }
    }

    /// Two genus-1 components glued at `points` multicross points (each
    /// with one branch on either component).
    pub fn two_tori_glued(points: usize) -> Self {
        let marked: Vec<String> = (0..points).map(|i| format!("m{i}")).collect();
        CurveModel {
            components: vec![
                Component {
                    id: "c0".into(),
                    genus: 1,
                    punctures: 0,
                    marked: marked.clone(),
                },
                Component {
                    id: "c1".into(),
                    genus: 1,
                    punctures: 0,
                    marked,
                },
            ],
            singular: (0..points)
                .map(|i| SingularPoint {
                    branches: vec![
                        BranchRef { component: 0, point: i },
                        BranchRef { component: 1, point: i },
                    ],
                })
                .collect(),
            base: BaseKind::SeparablyClosed,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.components.len() == 1
    }

    pub fn is_proper(&self) -> bool {
        self.components.iter().all(|c| c.punctures == 0)
    }

    pub fn dual_graph(&self) -> DualGraph {
        let mut edges = Vec::new();
        for (si, s) in self.singular.iter().enumerate() {
            for (bi, b) in s.branches.iter().enumerate() {
                edges.push((si, bi, b.component));
            }
        }
        let v = self.components.len() + self.singular.len();
        let e = edges.len();
        let betti = (e + 1).saturating_sub(v);
        DualGraph {
            n_components: self.components.len(),
            n_singular: self.singular.len(),
            edges,
            betti,
        }
    }

    /// χ_top = Σⱼ (2 - 2gⱼ - pⱼ) - Σᵢ (mᵢ - 1)
    pub fn euler_characteristic(&self) -> i64 {
        let comp: i64 = self
            .components
            .iter()
            .map(|c| 2 - 2 * c.genus as i64 - c.punctures as i64)
            .sum();
        let sing: i64 = self
            .singular
            .iter()
            .map(|s| s.branches.len() as i64 - 1)
            .sum();
        comp - sing
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        if self.components.is_empty() {
            return Err(Error::invalid("curve has no components"));
        }
        for (ci, c) in self.components.iter().enumerate() {
            let mut sorted = c.marked.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != c.marked.len() {
                return Err(Error::invalid(format!(
                    "component '{}' (index {ci}) has duplicate marked point labels",
                    c.id
                )));
            }
        }
        let mut used = std::collections::BTreeSet::new();
        for (si, s) in self.singular.iter().enumerate() {
            if s.branches.len() < 2 {
                return Err(Error::invalid(format!(
                    "singular point #{si} has {} branch(es); multicross needs at least 2",
                    s.branches.len()
                )));
            }
            for b in &s.branches {
                let c = self.components.get(b.component).ok_or_else(|| {
                    Error::invalid(format!(
                        "singular point #{si} references missing component {}",
                        b.component
                    ))
                })?;
                if b.point >= c.marked.len() {
                    return Err(Error::invalid(format!(
                        "singular point #{si} references missing marked point {} on '{}'",
                        b.point, c.id
                    )));
                }
                if !used.insert((b.component, b.point)) {
                    return Err(Error::invalid(format!(
                        "marked point '{}' on component '{}' is used by more than one \
                         singular point",
                        c.marked[b.point], c.id
                    )));
                }
            }
        }
        // connectivity of the incidence graph
        let g = self.dual_graph();
        let v = g.vertices();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); v];
        for &(si, _, ci) in &g.edges {
            let sv = self.components.len() + si;
            adj[ci].push(sv);
            adj[sv].push(ci);
        }
        let mut seen = vec![false; v];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        let connected = count == v;
        if !connected {
            let missing = seen.iter().position(|&s| !s).unwrap();
            let what = if missing < self.components.len() {
                format!("component '{}'", self.components[missing].id)
            } else {
                format!("singular point #{}", missing - self.components.len())
            };
            return Err(Error::invalid(format!(
                "curve is disconnected: {what} is not reachable from component '{}'",
                self.components[0].id
            )));
        }
        Ok(ValidationReport {
            components: self.components.len(),
            singular_points: self.singular.len(),
            branch_counts: self.singular.iter().map(|s| s.branches.len()).collect(),
            connected,
            betti: g.betti,
            euler_characteristic: self.euler_characteristic(),
        })
    }

    /// Spanning tree of the incidence graph, breadth-first from component 0
    /// with edges in (singular point, branch) order. Returns (tree edges,
    /// non-tree edges).
    pub fn spanning_tree(&self) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
        let nc = self.components.len();
        let v = nc + self.singular.len();
        let mut adj: Vec<Vec<((usize, usize), usize)>> = vec![Vec::new(); v];
        for (si, s) in self.singular.iter().enumerate() {
            for (bi, b) in s.branches.iter().enumerate() {
                let sv = nc + si;
                adj[b.component].push(((si, bi), sv));
                adj[sv].push(((si, bi), b.component));
            }
        }
        for a in &mut adj {
            a.sort();
        }
        let mut tree = Vec::new();
        let mut in_tree = std::collections::BTreeSet::new();
        let mut seen = vec![false; v];
        seen[0] = true;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &(edge, y) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    tree.push(edge);
                    in_tree.insert(edge);
                    queue.push_back(y);
                }
            }
        }
        let mut rest = Vec::new();
        for (si, s) in self.singular.iter().enumerate() {
            for bi in 0..s.branches.len() {
                if !in_tree.contains(&(si, bi)) {
                    rest.push((si, bi));
                }
            }
        }
        (tree, rest)
    }

    /// Fundamental group of the graph of surfaces: free product of the
    /// component groups and a free group on the non-tree edges.
    pub fn pi1_presentation(&self) -> Result<Pi1Presentation> {
        self.validate()?;
        let mut names: Vec<String> = Vec::new();
        let mut relators: Vec<Word> = Vec::new();
        let mut handles = Vec::new();
        let mut puncture_gens = Vec::new();
        for (ci, c) in self.components.iter().enumerate() {
            let mut pairs = Vec::new();
            let mut rel: Word = Vec::new();
            for s in 1..=c.genus {
                let a = names.len();
                names.push(format!("a{ci}_{s}"));
                let b = names.len();
                names.push(format!("b{ci}_{s}"));
                pairs.push((a, b));
                rel = concat(&rel, &commutator(&[(a + 1) as i32], &[(b + 1) as i32]));
            }
            if c.punctures == 0 {
                if !rel.is_empty() {
                    relators.push(rel);
                }
                puncture_gens.push(Vec::new());
            } else {
                // punctured surface groups are free: p-1 explicit loops, the
                // last one is a consequence of the boundary relation
                let mut punct = Vec::new();
                for t in 1..c.punctures {
                    let idx = names.len();
                    names.push(format!("c{ci}_{t}"));
                    punct.push(idx);
                }
                puncture_gens.push(punct);
            }
            handles.push(pairs);
        }
        let (tree, rest) = self.spanning_tree();
        let mut edge_gens = Vec::new();
        for (k, &(si, bi)) in rest.iter().enumerate() {
            let idx = names.len();
            names.push(format!("e{k}"));
            edge_gens.push((si, bi, idx));
        }
        let pres = Presentation::new(names, relators)?;
        Ok(Pi1Presentation {
            pres,
            layout: Pi1Layout {
                handles,
                punctures: puncture_gens,
                edge_gens,
                tree_edges: tree,
            },
        })
    }

    /// H¹(X, Λ) as a Λ-module, from the incidence-graph rank formula,
    /// cross-checked against the abelianization of the fundamental group
    /// mod n. A mismatch is a hard verification failure.
    pub fn h1_module(&self, n: u64) -> Result<LambdaModule> {
        self.validate()?;
        let g = self.dual_graph();
        let rank_formula: usize = self
            .components
            .iter()
            .map(|c| 2 * c.genus as usize + (c.punctures as usize).saturating_sub(1))
            .sum::<usize>()
            + g.betti;
        let pi1 = self.pi1_presentation()?;
        let rows: Vec<Vec<u64>> = pi1
            .pres
            .abelianized_relators()
            .iter()
            .map(|r| r.iter().map(|&v| v.rem_euclid(n as i64) as u64).collect())
            .collect();
        let ab = LambdaModule::from_relations(n, pi1.pres.ngens(), &rows);
        if ab.orders() != vec![n; rank_formula].as_slice() {
            return Err(Error::verification(
                "h1-rank-cross-check",
                format!(
                    "incidence formula gives Λ^{rank_formula}, abelianization mod {n} gives {:?}",
                    ab.orders()
                ),
            ));
        }
        // Picard-sequence decomposition for proper integral curves:
        // rank = Σ (mᵢ - 1) + 2·genus
        if self.is_integral() && self.is_proper() {
            let pic: usize = self
                .singular
                .iter()
                .map(|s| s.branches.len() - 1)
                .sum::<usize>()
                + 2 * self.components[0].genus as usize;
            if pic != rank_formula {
                return Err(Error::verification(
                    "h1-picard-cross-check",
                    format!("Picard rank {pic} != incidence rank {rank_formula}"),
                ));
            }
        }
        Ok(ab)
    }

    /// The genus hypothesis for degree-2 effaceability: every component
    /// must have nonzero genus.
    pub fn kpi1_eligibility(&self) -> (bool, String) {
        for c in &self.components {
            if c.genus == 0 {
                return (false, format!("component '{}' has genus 0", c.id));
            }
        }
        (true, "all components have nonzero genus".into())
    }
}
