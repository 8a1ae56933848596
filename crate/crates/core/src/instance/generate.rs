use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, Node, SchoolSpec, StopSpec};
use crate::error::{Error, Result};

/// Knobs for the random instance generator. Defaults describe a 20-mile
/// square, 66-seat buses at 20 mph, 1..=20 students per stop, and bell
/// times on quarter hours between 12:00 and 16:00 inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub square_side: i64,
    pub capacity: u32,
    pub speed_mph: f64,
    pub max_students: u32,
    pub bell_earliest: i64,
    pub bell_latest: i64,
    pub bell_step: i64,
    pub kmeans_max_iterations: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            square_side: 105_600,
            capacity: 66,
            speed_mph: 20.0,
            max_students: 20,
            bell_earliest: 12 * 3600,
            bell_latest: 16 * 3600,
            bell_step: 15 * 60,
            kmeans_max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Centroid {
    x: f64,
    y: f64,
}

impl Centroid {
    fn dist2(&self, n: Node) -> f64 {
        let dx = n.x as f64 - self.x;
        let dy = n.y as f64 - self.y;
        dx * dx + dy * dy
    }
}

fn nearest_centroid(centroids: &[Centroid], n: Node) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = centroid.dist2(n);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

fn kmeans_plus_plus(points: &[Node], k: usize, rng: &mut ChaCha8Rng) -> Vec<Centroid> {
    let mut chosen = vec![rng.gen_range(0..points.len())];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| p.squared_distance(&points[chosen[0]]) as f64)
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight has a positive entry")
        } else {
            // All remaining points coincide with chosen centers.
            (0..points.len()).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(p.squared_distance(&points[next]) as f64);
        }
    }
    chosen
        .into_iter()
        .map(|i| Centroid {
            x: points[i].x as f64,
            y: points[i].y as f64,
        })
        .collect()
}

/// Lloyd iterations from k-means++ seeds. Returns the cluster of each point
/// and the final centroids.
fn kmeans(
    points: &[Node],
    k: usize,
    max_iterations: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<Centroid>) {
    let mut centroids = kmeans_plus_plus(points, k, rng);
    let mut labels: Vec<usize> = points.iter().map(|&p| nearest_centroid(&centroids, p)).collect();
    for _ in 0..max_iterations {
        let mut sums = vec![(0.0f64, 0.0f64, 0usize); k];
        for (p, &c) in points.iter().zip(&labels) {
            sums[c].0 += p.x as f64;
            sums[c].1 += p.y as f64;
            sums[c].2 += 1;
        }
        for (c, (sx, sy, n)) in sums.into_iter().enumerate() {
            if n > 0 {
                centroids[c] = Centroid {
                    x: sx / n as f64,
                    y: sy / n as f64,
                };
            }
        }
        let next: Vec<usize> = points.iter().map(|&p| nearest_centroid(&centroids, p)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    (labels, centroids)
}

/// Every cluster needs a school plus at least one stop. Undersized clusters
/// take the closest point from clusters that can spare one.
fn repair_small_clusters(points: &[Node], labels: &mut [usize], centroids: &[Centroid]) {
    let k = centroids.len();
    loop {
        let mut sizes = vec![0usize; k];
        for &c in labels.iter() {
            sizes[c] += 1;
        }
        let Some(needy) = (0..k).find(|&c| sizes[c] < 2) else {
            return;
        };
        let donor_point = (0..points.len())
            .filter(|&i| sizes[labels[i]] > 2)
            .min_by(|&a, &b| {
                centroids[needy]
                    .dist2(points[a])
                    .total_cmp(&centroids[needy].dist2(points[b]))
                    .then(a.cmp(&b))
            })
            .expect("n_points >= 2k guarantees a donor");
        labels[donor_point] = needy;
    }
}

fn padded(prefix: &str, i: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len();
    format!("{prefix}{i:0width$}")
}

/// Draws a random instance. Deterministic for a fixed seed and parameters.
///
/// Node coordinates are uniform in the square; k-means with one cluster per
/// school groups them, the node nearest each centroid becomes the school and
/// the rest of its cluster become that school's stops. The depot sits at the
/// center of the square.
pub fn generate_instance(
    n_schools: usize,
    n_stops: usize,
    seed: u64,
    params: &GeneratorParams,
) -> Result<Instance> {
    if n_schools == 0 {
        return Err(Error::InvalidArgument("at least one school is required".into()));
    }
    if n_stops < n_schools {
        return Err(Error::InvalidArgument(format!(
            "need at least one stop per school: {n_stops} stops < {n_schools} schools"
        )));
    }
    if params.max_students == 0 || params.max_students > params.capacity {
        return Err(Error::InvalidArgument(format!(
            "max_students {} must be in 1..=capacity {}",
            params.max_students, params.capacity
        )));
    }
    if params.bell_step <= 0 || params.bell_latest < params.bell_earliest {
        return Err(Error::InvalidArgument("empty bell-time window".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = params.square_side;
    let points: Vec<Node> = (0..n_schools + n_stops)
        .map(|_| Node::new(rng.gen_range(0..=side), rng.gen_range(0..=side)))
        .collect();

    let (mut labels, centroids) = kmeans(&points, n_schools, params.kmeans_max_iterations, &mut rng);
    repair_small_clusters(&points, &mut labels, &centroids);

    let school_points: Vec<usize> = (0..n_schools)
        .map(|c| {
            (0..points.len())
                .filter(|&i| labels[i] == c)
                .min_by(|&a, &b| {
                    centroids[c]
                        .dist2(points[a])
                        .total_cmp(&centroids[c].dist2(points[b]))
                        .then(a.cmp(&b))
                })
                .expect("repaired clusters are non-empty")
        })
        .collect();

    let bell_slots = (params.bell_latest - params.bell_earliest) / params.bell_step + 1;
    let schools: Vec<SchoolSpec> = school_points
        .iter()
        .enumerate()
        .map(|(c, &i)| SchoolSpec {
            id: padded("S", c, n_schools),
            node: points[i],
            bell_time: params.bell_earliest + rng.gen_range(0..bell_slots) * params.bell_step,
        })
        .collect();

    let mut stops = Vec::with_capacity(n_stops);
    for (i, &p) in points.iter().enumerate() {
        if school_points[labels[i]] == i {
            continue;
        }
        stops.push(StopSpec {
            id: padded("P", stops.len(), n_stops),
            node: p,
            students: rng.gen_range(1..=params.max_students),
            school: schools[labels[i]].id.clone(),
        });
    }

    let half = side / 2;
    Instance::new(
        schools,
        stops,
        Node::new(half, half),
        params.capacity,
        params.speed_mph,
        side,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::io::instance_to_json;

    #[test]
    fn two_school_example() {
        let inst = generate_instance(2, 20, 42, &GeneratorParams::default()).unwrap();
        assert_eq!(inst.schools().len(), 2);
        assert_eq!(inst.stops().len(), 20);
        assert_eq!(inst.depot(), Node::new(52_800, 52_800));
        for s in inst.stops() {
            assert!((1..=20).contains(&s.students));
            assert!((0..=105_600).contains(&s.node.x) && (0..=105_600).contains(&s.node.y));
        }
    }

    #[test]
    fn seeded_determinism() {
        let p = GeneratorParams::default();
        let a = instance_to_json(&generate_instance(4, 40, 7, &p).unwrap());
        let b = instance_to_json(&generate_instance(4, 40, 7, &p).unwrap());
        assert_eq!(a, b);
        let c = instance_to_json(&generate_instance(4, 40, 8, &p).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_single_stop() {
        let inst = generate_instance(1, 1, 0, &GeneratorParams::default()).unwrap();
        assert_eq!(inst.schools().len(), 1);
        assert_eq!(inst.stops().len(), 1);
        assert_eq!(inst.school(0).stops, vec![0]);
    }

    #[test]
    fn rejects_fewer_stops_than_schools() {
        assert!(generate_instance(3, 2, 0, &GeneratorParams::default()).is_err());
    }

    #[test]
    fn every_school_gets_a_stop_when_tight() {
        for seed in 0..50 {
            let inst = generate_instance(5, 5, seed, &GeneratorParams::default()).unwrap();
            assert!(inst.schools().iter().all(|k| k.stops.len() == 1));
        }
    }
}
