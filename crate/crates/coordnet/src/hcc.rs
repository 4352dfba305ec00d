//! Highly coordinating community extraction.
//!
//! The operational method is edge-weight threshold filtering followed by
//! connected components. The extractor sits behind [`HccExtractor`] so
//! alternative community definitions can slot in later.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::network::{CoordinationNetwork, EdgeEvidence};

/// A node whose maximum-degree share reaches this value marks the
/// community as star-shaped.
pub const STAR_COEFFICIENT_THRESHOLD: f64 = 0.9;

/// One extracted highly coordinating community.
#[derive(Debug, Clone, PartialEq)]
pub struct Hcc {
    pub id: usize,
    pub accounts: BTreeSet<String>,
    /// Exactly the filtered-network edges among `accounts`.
    pub edges: BTreeMap<(String, String), EdgeEvidence>,
    pub total_weight: f64,
    /// The unique maximum-degree account, present when the community is
    /// star-shaped and the hub is unambiguous.
    pub star_hub: Option<String>,
    /// Degree of the busiest node over `|accounts| - 1`.
    pub star_coefficient: f64,
}

/// Keep edges with weight strictly greater than `theta` and their adjacent
/// nodes; everything else, including newly isolated nodes, is dropped.
pub fn filter_edges(cn: &CoordinationNetwork, theta: f64) -> CoordinationNetwork {
    let mut filtered = CoordinationNetwork::new();
    for ((a, b), evidence) in cn.edges() {
        if evidence.weight > theta {
            filtered
                .insert_edge(a, b, evidence.clone())
                .expect("edges from a valid network stay valid");
        }
    }
    filtered
}

/// Split a network into connected components. Components are ordered by
/// their smallest member and each is a sorted node set; two nodes share a
/// component exactly when a path of edges links them.
pub fn connected_components(cn: &CoordinationNetwork) -> Vec<BTreeSet<String>> {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for node in &cn.nodes {
        adjacency.entry(node).or_default();
    }
    for ((a, b), _) in cn.edges() {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }

    let mut components = Vec::new();
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    for &start in adjacency.keys() {
        if visited.contains(start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        visited.insert(start);
        while let Some(node) = queue.pop_front() {
            component.insert(node.to_string());
            for &next in &adjacency[node] {
                if visited.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        components.push(component);
    }
    components
}

/// Community extraction strategy over a coordination network.
pub trait HccExtractor {
    fn extract(&self, cn: &CoordinationNetwork) -> Vec<Hcc>;
}

/// Edge-weight threshold plus connected components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdComponents {
    /// Edges must weigh strictly more than this to survive.
    pub theta: f64,
    /// Communities smaller than this are discarded.
    pub min_size: usize,
}

impl HccExtractor for ThresholdComponents {
    fn extract(&self, cn: &CoordinationNetwork) -> Vec<Hcc> {
        let filtered = filter_edges(cn, self.theta);
        let mut communities: Vec<Hcc> = connected_components(&filtered)
            .into_iter()
            .filter(|component| component.len() >= self.min_size)
            .map(|component| annotate(component, &filtered))
            .collect();
        // Heaviest first; smallest member breaks ties deterministically.
        communities.sort_by(|x, y| {
            y.total_weight
                .total_cmp(&x.total_weight)
                .then_with(|| x.accounts.iter().next().cmp(&y.accounts.iter().next()))
        });
        for (id, community) in communities.iter_mut().enumerate() {
            community.id = id;
        }
        communities
    }
}

fn annotate(accounts: BTreeSet<String>, filtered: &CoordinationNetwork) -> Hcc {
    let mut edges = BTreeMap::new();
    let mut degrees: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total_weight = 0.0;
    for ((a, b), evidence) in filtered.edges() {
        if accounts.contains(a) && accounts.contains(b) {
            edges.insert((a.clone(), b.clone()), evidence.clone());
            total_weight += evidence.weight;
            *degrees.entry(a).or_insert(0) += 1;
            *degrees.entry(b).or_insert(0) += 1;
        }
    }
    let max_degree = degrees.values().copied().max().unwrap_or(0);
    let star_coefficient = if accounts.len() > 1 {
        max_degree as f64 / (accounts.len() - 1) as f64
    } else {
        0.0
    };
    let at_max: Vec<&str> = degrees
        .iter()
        .filter(|(_, &d)| d == max_degree)
        .map(|(&n, _)| n)
        .collect();
    // A star needs one unambiguous hub; under a degree tie no hub is
    // declared.
    let star_hub = if star_coefficient >= STAR_COEFFICIENT_THRESHOLD && at_max.len() == 1 {
        Some(at_max[0].to_string())
    } else {
        None
    };
    Hcc {
        id: 0,
        accounts,
        edges,
        total_weight,
        star_hub,
        star_coefficient,
    }
}

/// Extract communities: filter by `theta`, split into components, keep
/// those with at least `min_size` accounts, ordered by total weight
/// descending.
pub fn extract_hccs(cn: &CoordinationNetwork, theta: f64, min_size: usize) -> Vec<Hcc> {
    ThresholdComponents { theta, min_size }.extract(cn)
}

/// Diagnostic for threshold filtering: accounts that the filter removed
/// even though they had two or more neighbours beforehand. Such accounts
/// may be genuine coordinators whose individual edges stayed under the
/// threshold.
pub fn filtered_out_connectors(cn: &CoordinationNetwork, theta: f64) -> Vec<String> {
    let mut pre_degree: BTreeMap<&str, usize> = BTreeMap::new();
    for ((a, b), _) in cn.edges() {
        *pre_degree.entry(a).or_insert(0) += 1;
        *pre_degree.entry(b).or_insert(0) += 1;
    }
    let surviving = filter_edges(cn, theta);
    pre_degree
        .into_iter()
        .filter(|&(node, degree)| degree >= 2 && !surviving.nodes.contains(node))
        .map(|(node, _)| node.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coaction::CoActionPair;
    use crate::post::ActionType;

    fn network_with(weights: &[(&str, &str, f64)]) -> CoordinationNetwork {
        let mut cn = CoordinationNetwork::new();
        for &(a, b, w) in weights {
            let mut evidence = EdgeEvidence {
                weight: w,
                pair_count: w.round() as u64,
                ..EdgeEvidence::default()
            };
            evidence
                .reasons
                .insert((ActionType::CoRetweet, "T".to_string()), 1);
            cn.insert_edge(a, b, evidence).unwrap();
        }
        cn
    }

    #[test]
    fn filter_is_strictly_greater() {
        let cn = network_with(&[("A", "B", 5.0), ("C", "D", 10.0), ("E", "F", 11.0)]);
        let filtered = filter_edges(&cn, 10.0);
        assert_eq!(filtered.edge_count(), 1);
        assert!(filtered.edge("E", "F").is_some());
        assert!(!filtered.nodes.contains("C"), "isolated nodes are dropped");
    }

    #[test]
    fn filter_at_zero_is_identity() {
        let cn = network_with(&[("A", "B", 0.5), ("C", "D", 10.0)]);
        assert_eq!(filter_edges(&cn, 0.0), cn);
    }

    #[test]
    fn components_split_correctly() {
        let cn = network_with(&[("A", "B", 1.0), ("B", "C", 1.0), ("D", "E", 1.0)]);
        let components = connected_components(&cn);
        assert_eq!(components.len(), 2);
        let abc: BTreeSet<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let de: BTreeSet<String> = ["D", "E"].iter().map(|s| s.to_string()).collect();
        assert_eq!(components[0], abc);
        assert_eq!(components[1], de);
    }

    #[test]
    fn components_of_empty_network() {
        assert!(connected_components(&CoordinationNetwork::new()).is_empty());
    }

    #[test]
    fn star_topology_names_its_hub() {
        let spokes: Vec<(String, String, f64)> = (0..5)
            .map(|i| ("hub".to_string(), format!("s{i}"), 12.0))
            .collect();
        let edges: Vec<(&str, &str, f64)> = spokes
            .iter()
            .map(|(a, b, w)| (a.as_str(), b.as_str(), *w))
            .collect();
        let cn = network_with(&edges);
        let hccs = extract_hccs(&cn, 10.0, 2);
        assert_eq!(hccs.len(), 1);
        let hcc = &hccs[0];
        assert_eq!(hcc.star_coefficient, 1.0);
        assert_eq!(hcc.star_hub.as_deref(), Some("hub"));
        assert_eq!(hcc.total_weight, 60.0);
    }

    #[test]
    fn triangle_has_no_hub_under_tie_rule() {
        let cn = network_with(&[("A", "B", 12.0), ("B", "C", 12.0), ("A", "C", 12.0)]);
        let hccs = extract_hccs(&cn, 10.0, 2);
        assert_eq!(hccs.len(), 1);
        assert_eq!(hccs[0].star_coefficient, 1.0);
        assert_eq!(hccs[0].star_hub, None);
    }

    #[test]
    fn min_size_filters_small_components() {
        let cn = network_with(&[("A", "B", 12.0), ("C", "D", 12.0), ("D", "E", 12.0)]);
        let hccs = extract_hccs(&cn, 10.0, 3);
        assert_eq!(hccs.len(), 1);
        assert_eq!(hccs[0].accounts.len(), 3);
    }

    #[test]
    fn hccs_ordered_by_total_weight() {
        let cn = network_with(&[("A", "B", 11.0), ("C", "D", 30.0)]);
        let hccs = extract_hccs(&cn, 10.0, 2);
        assert_eq!(hccs[0].id, 0);
        assert!(hccs[0].accounts.contains("C"));
        assert_eq!(hccs[1].id, 1);
        assert!(hccs[1].accounts.contains("A"));
    }

    #[test]
    fn hcc_account_sets_are_disjoint_and_edges_exceed_theta() {
        let cn = network_with(&[
            ("A", "B", 15.0),
            ("B", "C", 11.0),
            ("C", "X", 2.0),
            ("D", "E", 12.0),
        ]);
        let theta = 10.0;
        let hccs = extract_hccs(&cn, theta, 2);
        let mut seen: BTreeSet<&String> = BTreeSet::new();
        for hcc in &hccs {
            for account in &hcc.accounts {
                assert!(seen.insert(account), "account sets must be disjoint");
            }
            for evidence in hcc.edges.values() {
                assert!(evidence.weight > theta);
            }
            // Every member retains at least one incident surviving edge.
            for account in &hcc.accounts {
                let incident = hcc
                    .edges
                    .keys()
                    .any(|(a, b)| a == account || b == account);
                assert!(incident);
            }
        }
    }

    #[test]
    fn filtering_then_components_commutes_with_per_component_filtering() {
        // Confluence on a fixed random-ish graph.
        let mut edges = Vec::new();
        let names: Vec<String> = (0..20).map(|i| format!("n{i:02}")).collect();
        let mut w = 1.0;
        for i in 0..20usize {
            for j in (i + 1)..20 {
                if (i * 7 + j * 13) % 5 == 0 {
                    edges.push((names[i].clone(), names[j].clone(), w));
                    w = (w * 1.7) % 23.0 + 0.5;
                }
            }
        }
        let edge_refs: Vec<(&str, &str, f64)> = edges
            .iter()
            .map(|(a, b, w)| (a.as_str(), b.as_str(), *w))
            .collect();
        let cn = network_with(&edge_refs);
        let theta = 8.0;

        // Route 1: filter, then split.
        let route1 = connected_components(&filter_edges(&cn, theta));

        // Route 2: split, then filter inside each component, then re-split.
        let mut route2 = Vec::new();
        for component in connected_components(&cn) {
            let mut sub = CoordinationNetwork::new();
            for ((a, b), evidence) in cn.edges() {
                if component.contains(a) && component.contains(b) {
                    sub.insert_edge(a, b, evidence.clone()).unwrap();
                }
            }
            route2.extend(connected_components(&filter_edges(&sub, theta)));
        }
        route2.sort_by(|x, y| x.iter().next().cmp(&y.iter().next()));
        assert_eq!(route1, route2);
    }

    #[test]
    fn connector_diagnostic_reports_removed_bridges() {
        // B bridges two weak edges: filtering drops it despite degree 2.
        let cn = network_with(&[("A", "B", 3.0), ("B", "C", 4.0), ("D", "E", 12.0)]);
        let removed = filtered_out_connectors(&cn, 10.0);
        assert_eq!(removed, vec!["B".to_string()]);
    }

    #[test]
    fn extractor_trait_object_works() {
        let cn = network_with(&[("A", "B", 12.0)]);
        let extractor: Box<dyn HccExtractor> = Box::new(ThresholdComponents {
            theta: 10.0,
            min_size: 2,
        });
        assert_eq!(extractor.extract(&cn).len(), 1);
    }

    #[test]
    fn components_match_pair_derived_network() {
        // Sanity against a network built through the pairing path.
        let pairs: Vec<CoActionPair> = vec![CoActionPair {
            account_a: "A".into(),
            account_b: "B".into(),
            action_type: ActionType::CoRetweet,
            reason: "T1".into(),
            t_a: 0,
            t_b: 1,
            window_index: 0,
        }];
        let cn = crate::network::build_window_cn(&pairs);
        assert_eq!(connected_components(&cn).len(), 1);
    }
}
