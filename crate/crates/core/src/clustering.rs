//! OPTICS ordering over (lat, lon) in degrees, eps-threshold extraction and
//! mean aggregation of cluster members.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Observation;

/// Result of an OPTICS run. `reachability` and `core_distance` are indexed
/// by the original point index; `order` is the processing order.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticsOrdering {
    pub order: Vec<usize>,
    pub reachability: Vec<f64>,
    pub core_distance: Vec<f64>,
}

impl OpticsOrdering {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `(position, point_id, reachability)` rows in processing order.
    pub fn reachability_plot(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.order
            .iter()
            .enumerate()
            .map(|(i, &p)| (i, p, self.reachability[p]))
    }
}

/// Per-point cluster label; `None` is noise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabels {
    pub labels: Vec<Option<usize>>,
}

impl ClusterLabels {
    pub fn n_clusters(&self) -> usize {
        self.labels.iter().flatten().max().map_or(0, |m| m + 1)
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    /// Number of sound sources after aggregation: clusters plus singleton
    /// noise points.
    pub fn n_sources(&self) -> usize {
        self.n_clusters() + self.n_noise()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub cluster_id: usize,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub depth_m: f64,
    pub bleach_pct: f64,
    pub par: f64,
    pub member_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterParams {
    pub min_samples: usize,
    pub eps: f64,
    /// `None` means unbounded neighbourhoods.
    pub max_eps: Option<f64>,
    /// When set, `eps` is replaced by the threshold whose source count is
    /// closest to this target.
    pub target_sources: Option<usize>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            min_samples: 2,
            eps: 0.05,
            max_eps: None,
            target_sources: None,
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[derive(PartialEq)]
struct Seed {
    reach: f64,
    idx: usize,
}

impl Eq for Seed {}

impl Ord for Seed {
    // Reversed so the max-heap pops the smallest reachability, then the
    // lowest index.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .reach
            .total_cmp(&self.reach)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Seed {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Runs OPTICS; `min_samples` counts the point itself, so with 2 the core
/// distance is the nearest-neighbour distance.
pub fn optics_run(points: &[(f64, f64)], min_samples: usize, max_eps: f64) -> Result<OpticsOrdering> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if min_samples < 2 {
        return Err(Error::config("min_samples", "must be >= 2"));
    }
    let n = points.len();
    let mut core_distance = vec![f64::INFINITY; n];
    let mut scratch = Vec::with_capacity(n);
    for (i, &p) in points.iter().enumerate() {
        scratch.clear();
        scratch.extend(
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| dist(p, q))
                .filter(|&d| d <= max_eps),
        );
        let k = min_samples - 2;
        if scratch.len() > k {
            let (_, kth, _) = scratch.select_nth_unstable_by(k, f64::total_cmp);
            core_distance[i] = *kth;
        }
    }

    let mut reachability = vec![f64::INFINITY; n];
    let mut processed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut seeds = BinaryHeap::new();

    let expand = |p: usize, processed: &[bool], reach: &mut [f64], seeds: &mut BinaryHeap<Seed>| {
        let cd = core_distance[p];
        if !cd.is_finite() {
            return;
        }
        for q in 0..n {
            if processed[q] {
                continue;
            }
            let d = dist(points[p], points[q]);
            if d > max_eps {
                continue;
            }
            let r = cd.max(d);
            if r < reach[q] {
                reach[q] = r;
                seeds.push(Seed { reach: r, idx: q });
            }
        }
    };

    for start in 0..n {
        if processed[start] {
            continue;
        }
        processed[start] = true;
        order.push(start);
        expand(start, &processed, &mut reachability, &mut seeds);
        while let Some(Seed { reach, idx }) = seeds.pop() {
            // stale heap entries
            if processed[idx] || reach > reachability[idx] {
                continue;
            }
            processed[idx] = true;
            order.push(idx);
            expand(idx, &processed, &mut reachability, &mut seeds);
        }
    }

    Ok(OpticsOrdering {
        order,
        reachability,
        core_distance,
    })
}

/// DBSCAN-equivalent labelling at threshold `eps`.
pub fn extract_clusters(ordering: &OpticsOrdering, eps: f64) -> ClusterLabels {
    let mut labels = vec![None; ordering.len()];
    let mut current: Option<usize> = None;
    let mut next = 0;
    for &p in &ordering.order {
        let far = ordering.reachability[p] > eps;
        let near_core = ordering.core_distance[p] <= eps;
        if far {
            if near_core {
                current = Some(next);
                next += 1;
                labels[p] = current;
            }
        } else {
            labels[p] = current;
        }
    }
    ClusterLabels { labels }
}

/// Picks the extraction threshold whose source count is closest to
/// `target`; ties resolve to the smaller threshold.
pub fn eps_for_source_count(ordering: &OpticsOrdering, target: usize) -> f64 {
    let mut candidates: Vec<f64> = ordering
        .reachability
        .iter()
        .chain(&ordering.core_distance)
        .copied()
        .filter(|r| r.is_finite() && *r > 0.0)
        .collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = (usize::MAX, f64::MIN_POSITIVE);
    for eps in std::iter::once(f64::MIN_POSITIVE).chain(candidates) {
        let gap = extract_clusters(ordering, eps).n_sources().abs_diff(target);
        if gap < best.0 {
            best = (gap, eps);
        }
    }
    best.1
}

/// Arithmetic means per label, then one singleton per noise point in
/// original index order. Member values are summed in sorted order so the
/// result does not depend on input order.
pub fn aggregate(obs: &[Observation], labels: &ClusterLabels) -> Result<Vec<ClusterPoint>> {
    if obs.len() != labels.labels.len() {
        return Err(Error::LengthMismatch {
            what: "observations vs labels",
            left: obs.len(),
            right: labels.labels.len(),
        });
    }
    let mut groups: Vec<Vec<&Observation>> = vec![Vec::new(); labels.n_clusters()];
    let mut noise = Vec::new();
    for (o, l) in obs.iter().zip(&labels.labels) {
        match l {
            Some(l) => groups[*l].push(o),
            None => noise.push(o),
        }
    }
    let mean = |members: &[&Observation], f: fn(&Observation) -> f64| {
        let mut v: Vec<f64> = members.iter().map(|o| f(o)).collect();
        v.sort_by(f64::total_cmp);
        v.iter().sum::<f64>() / v.len() as f64
    };
    let points = groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(Vec::as_slice)
        .chain(noise.iter().map(std::slice::from_ref))
        .enumerate()
        .map(|(cluster_id, members)| ClusterPoint {
            cluster_id,
            lat_deg: mean(members, |o| o.lat_deg),
            lon_deg: mean(members, |o| o.lon_deg),
            depth_m: mean(members, |o| o.depth_m),
            bleach_pct: mean(members, |o| o.bleach_pct),
            par: mean(members, |o| o.par),
            member_count: members.len(),
        })
        .collect();
    Ok(points)
}

/// Full clustering stage on observation positions.
pub fn cluster_observations(
    obs: &[Observation],
    params: &ClusterParams,
) -> Result<(OpticsOrdering, f64, Vec<ClusterPoint>)> {
    let points: Vec<(f64, f64)> = obs.iter().map(|o| (o.lat_deg, o.lon_deg)).collect();
    let ordering = optics_run(&points, params.min_samples, params.max_eps.unwrap_or(f64::INFINITY))?;
    let eps = match params.target_sources {
        Some(t) => eps_for_source_count(&ordering, t),
        None => params.eps,
    };
    if !(eps > 0.0) {
        return Err(Error::config("clustering.eps", "must be > 0"));
    }
    let labels = extract_clusters(&ordering, eps);
    let clusters = aggregate(obs, &labels)?;
    Ok((ordering, eps, clusters))
}

pub fn write_clusters_csv(clusters: &[ClusterPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cluster_id", "lat", "lon", "depth", "bleach", "par", "member_count"])?;
    for c in clusters {
        w.write_record(&[
            c.cluster_id.to_string(),
            c.lat_deg.to_string(),
            c.lon_deg.to_string(),
            c.depth_m.to_string(),
            c.bleach_pct.to_string(),
            c.par.to_string(),
            c.member_count.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_clusters_csv(text: &str) -> Result<Vec<ClusterPoint>> {
    #[derive(Deserialize)]
    struct Row {
        cluster_id: usize,
        lat: f64,
        lon: f64,
        depth: f64,
        bleach: f64,
        par: f64,
        member_count: usize,
    }
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        out.push(ClusterPoint {
            cluster_id: row.cluster_id,
            lat_deg: row.lat,
            lon_deg: row.lon,
            depth_m: row.depth,
            bleach_pct: row.bleach,
            par: row.par,
            member_count: row.member_count,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(out)
}

pub fn write_reachability_csv(ordering: &OpticsOrdering) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "point_id", "reachability"])?;
    for (i, p, r) in ordering.reachability_plot() {
        w.write_record(&[i.to_string(), p.to_string(), r.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
