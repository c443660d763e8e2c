//! Sensor-node placement on a disk and the spatial constants of the link.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Default receiver elevation angle (radians).
pub const DEFAULT_THETA0: f64 = std::f64::consts::FRAC_PI_3;

/// Polar position of one sensor node on the deployment plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarNode {
    /// Radius from the field center, meters.
    pub r: f64,
    /// Azimuth in [-pi, pi], radians.
    pub phi: f64,
}

/// Node placements plus the geometry constants of the system:
/// field radius `r_max`, receiver elevation `theta0` and receiver
/// distance `d`. Immutable after construction; safe to share.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    nodes: Vec<PolarNode>,
    r_max: f64,
    theta0: f64,
    d: f64,
    seed: Option<u64>,
}

/// One finding from [`validate_layout`]. `FarField` is advisory: such a
/// layout is accepted, the others indicate real invariant breaches.
#[derive(Debug, Clone, PartialEq)]
pub enum LayoutIssue {
    RadiusOutOfRange {
        node: usize,
        r: f64,
        r_max: f64,
    },
    AzimuthOutOfRange {
        node: usize,
        phi: f64,
    },
    NonFiniteCoordinate {
        node: usize,
    },
    /// Receiver closer than 10 * r_max; far-field modelling is doubtful.
    FarField {
        d: f64,
        r_max: f64,
    },
}

impl fmt::Display for LayoutIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayoutIssue::RadiusOutOfRange { node, r, r_max } => {
                write!(f, "node {node}: radius {r} outside [0, {r_max}]")
            }
            LayoutIssue::AzimuthOutOfRange { node, phi } => {
                write!(f, "node {node}: azimuth {phi} outside [-pi, pi]")
            }
            LayoutIssue::NonFiniteCoordinate { node } => {
                write!(f, "node {node}: non-finite coordinate")
            }
            LayoutIssue::FarField { d, r_max } => {
                write!(
                    f,
                    "far-field warning: receiver distance {d} <= 10 * r_max ({r_max})"
                )
            }
        }
    }
}

impl LayoutIssue {
    /// True if the layout is still usable (warning, not an error).
    pub fn is_warning(&self) -> bool {
        matches!(self, LayoutIssue::FarField { .. })
    }
}

impl NetworkLayout {
    /// Builds a layout from explicit node positions.
    pub fn from_nodes(nodes: Vec<PolarNode>, r_max: f64, theta0: f64, d: f64) -> Result<Self> {
        if r_max <= 0.0 {
            return Err(Error::invalid("r_max", "must be positive"));
        }
        if nodes.is_empty() {
            return Err(Error::invalid("nodes", "layout needs at least one node"));
        }
        Ok(NetworkLayout {
            nodes,
            r_max,
            theta0,
            d,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[PolarNode] {
        &self.nodes
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_theta0(mut self, theta0: f64) -> Self {
        self.theta0 = theta0;
        self
    }

    pub fn with_distance(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    /// Writes the layout as CSV: one metadata comment line, a header,
    /// then one row per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(
            w,
            "# r_max={} theta0={} d={}",
            self.r_max, self.theta0, self.d
        )?;
        if let Some(seed) = self.seed {
            write!(w, " seed={seed}")?;
        }
        writeln!(w)?;
        writeln!(w, "node_id,r_m,phi_rad")?;
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(w, "{},{},{}", i, n.r, n.phi)?;
        }
        Ok(())
    }

    /// Reads a layout previously written by [`NetworkLayout::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let meta = lines.next().ok_or_else(|| Error::Parse {
            what: "layout csv".into(),
            reason: "empty file".into(),
        })??;
        let meta = meta.strip_prefix('#').ok_or_else(|| Error::Parse {
            what: "layout csv".into(),
            reason: "missing `# r_max=... theta0=... d=...` metadata line".into(),
        })?;
        let mut r_max = None;
        let mut theta0 = None;
        let mut d = None;
        let mut seed = None;
        for tok in meta.split_whitespace() {
            let (key, value) = tok.split_once('=').ok_or_else(|| Error::Parse {
                what: "layout csv".into(),
                reason: format!("bad metadata token `{tok}`"),
            })?;
            let parse = |v: &str| -> Result<f64> {
                v.parse().map_err(|_| Error::Parse {
                    what: "layout csv".into(),
                    reason: format!("bad number `{v}` for `{key}`"),
                })
            };
            match key {
                "r_max" => r_max = Some(parse(value)?),
                "theta0" => theta0 = Some(parse(value)?),
                "d" => d = Some(parse(value)?),
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| Error::Parse {
                        what: "layout csv".into(),
                        reason: format!("bad seed `{value}`"),
                    })?)
                }
                other => {
                    return Err(Error::Parse {
                        what: "layout csv".into(),
                        reason: format!("unknown metadata key `{other}`"),
                    })
                }
            }
        }
        let (r_max, theta0, d) = match (r_max, theta0, d) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    what: "layout csv".into(),
                    reason: "metadata must define r_max, theta0 and d".into(),
                })
            }
        };

        let header = lines.next().ok_or_else(|| Error::Parse {
            what: "layout csv".into(),
            reason: "missing header".into(),
        })??;
        if header.trim() != "node_id,r_m,phi_rad" {
            return Err(Error::Parse {
                what: "layout csv".into(),
                reason: format!("unexpected header `{header}`"),
            });
        }
        let mut nodes = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (id, rr, pp) = (cols.next(), cols.next(), cols.next());
            let (id, rr, pp) = match (id, rr, pp, cols.next()) {
                (Some(a), Some(b), Some(c), None) => (a, b, c),
                _ => {
                    return Err(Error::Parse {
                        what: "layout csv".into(),
                        reason: format!("expected 3 columns in `{line}`"),
                    })
                }
            };
            let expect: usize = id.parse().map_err(|_| Error::Parse {
                what: "layout csv".into(),
                reason: format!("bad node_id `{id}`"),
            })?;
            if expect != nodes.len() {
                return Err(Error::Parse {
                    what: "layout csv".into(),
                    reason: format!("node_id `{id}` out of order"),
                });
            }
            let r: f64 = rr.parse().map_err(|_| Error::Parse {
                what: "layout csv".into(),
                reason: format!("bad radius `{rr}`"),
            })?;
            let phi: f64 = pp.parse().map_err(|_| Error::Parse {
                what: "layout csv".into(),
                reason: format!("bad azimuth `{pp}`"),
            })?;
            nodes.push(PolarNode { r, phi });
        }
        let mut layout = NetworkLayout::from_nodes(nodes, r_max, theta0, d)?;
        layout.seed = seed;
        Ok(layout)
    }
}

/// Places `l` nodes i.i.d. uniform on the disk of radius `r_max`.
///
/// Radius uses the inverse-CDF transform `r = r_max * sqrt(u)`, azimuth is
/// uniform on [-pi, pi]. The receiver defaults to elevation pi/3 at distance
/// `100 * r_max` (comfortably far-field); adjust with
/// [`NetworkLayout::with_theta0`] / [`NetworkLayout::with_distance`].
pub fn place_nodes(l: usize, r_max: f64, seed: u64) -> Result<NetworkLayout> {
    if l == 0 {
        return Err(Error::invalid("l", "node count must be at least 1"));
    }
    if !r_max.is_finite() || r_max <= 0.0 {
        return Err(Error::invalid("r_max", "field radius must be positive"));
    }
    let mut rng = StreamRng::new(seed, &[b'p' as u64]);
    let nodes = (0..l)
        .map(|_| {
            let r = r_max * rng.next_f64().sqrt();
            let phi = -std::f64::consts::PI + std::f64::consts::TAU * rng.next_f64();
            PolarNode { r, phi }
        })
        .collect();
    Ok(NetworkLayout {
        nodes,
        r_max,
        theta0: DEFAULT_THETA0,
        d: 100.0 * r_max,
        seed: Some(seed),
    })
}

/// Checks every layout invariant; returns an empty list when all hold.
/// Far-field placement (`d > 10 * r_max`) is advisory: a breach shows up
/// as a [`LayoutIssue::FarField`] warning entry.
pub fn validate_layout(layout: &NetworkLayout) -> Vec<LayoutIssue> {
    let mut issues = Vec::new();
    for (i, n) in layout.nodes.iter().enumerate() {
        if !n.r.is_finite() || !n.phi.is_finite() {
            issues.push(LayoutIssue::NonFiniteCoordinate { node: i });
            continue;
        }
        if n.r < 0.0 || n.r > layout.r_max {
            issues.push(LayoutIssue::RadiusOutOfRange {
                node: i,
                r: n.r,
                r_max: layout.r_max,
            });
        }
        if n.phi < -std::f64::consts::PI || n.phi > std::f64::consts::PI {
            issues.push(LayoutIssue::AzimuthOutOfRange {
                node: i,
                phi: n.phi,
            });
        }
    }
    if layout.d <= 10.0 * layout.r_max {
        issues.push(LayoutIssue::FarField {
            d: layout.d,
            r_max: layout.r_max,
        });
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_node_in_range() {
        let layout = place_nodes(1, 100.0, 42).unwrap();
        let n = layout.nodes()[0];
        assert!((0.0..=100.0).contains(&n.r));
        assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&n.phi));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(place_nodes(0, 100.0, 1).is_err());
        assert!(place_nodes(4, 0.0, 1).is_err());
        assert!(place_nodes(4, -5.0, 1).is_err());
    }

    #[test]
    fn mean_square_radius_matches_uniform_disk() {
        // E[r^2] = R^2/2 for the uniform disk.
        let l = 10_000;
        let r_max = 100.0f64;
        let layout = place_nodes(l, r_max, 7).unwrap();
        let mean_r2 = layout.nodes().iter().map(|n| n.r * n.r).sum::<f64>() / l as f64;
        // var(r^2) = R^4/12 for r^2 ~ U(0, R^2)
        let se = (r_max.powi(4) / 12.0 / l as f64).sqrt();
        assert!(
            (mean_r2 - r_max * r_max / 2.0).abs() < 3.0 * se,
            "mean r^2 = {mean_r2}"
        );
    }

    #[test]
    fn uniformity_inner_disk_fraction() {
        let n = 100_000;
        let layout = place_nodes(n, 100.0, 2024).unwrap();
        let inside = layout.nodes().iter().filter(|p| p.r < 50.0).count();
        let frac = inside as f64 / n as f64;
        let tol = 3.0 * (0.25 * 0.75 / n as f64).sqrt();
        assert!((frac - 0.25).abs() < tol, "fraction inside R/2: {frac}");
    }

    #[test]
    fn determinism_and_seed_sensitivity() {
        let a = place_nodes(128, 100.0, 7).unwrap();
        let b = place_nodes(128, 100.0, 7).unwrap();
        let c = place_nodes(128, 100.0, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn validate_flags_radius_breach() {
        let mut nodes = place_nodes(4, 100.0, 1).unwrap().nodes().to_vec();
        nodes[2].r = 101.0;
        let layout = NetworkLayout::from_nodes(nodes, 100.0, DEFAULT_THETA0, 10_000.0).unwrap();
        let issues = validate_layout(&layout);
        assert_eq!(issues.len(), 1);
        assert_eq!(
            issues[0],
            LayoutIssue::RadiusOutOfRange {
                node: 2,
                r: 101.0,
                r_max: 100.0
            }
        );
    }

    #[test]
    fn validate_clean_layout_is_empty() {
        let layout = place_nodes(32, 100.0, 3).unwrap();
        assert!(validate_layout(&layout).is_empty());
    }

    #[test]
    fn validate_far_field_warning() {
        let layout = place_nodes(4, 100.0, 1).unwrap().with_distance(100.0);
        let issues = validate_layout(&layout);
        assert_eq!(issues.len(), 1);
        assert!(issues[0].is_warning());
        assert!(matches!(issues[0], LayoutIssue::FarField { .. }));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let layout = place_nodes(16, 250.0, 99).unwrap().with_distance(5000.0);
        let mut buf = Vec::new();
        layout.write_csv(&mut buf).unwrap();
        let back = NetworkLayout::read_csv(buf.as_slice()).unwrap();
        assert_eq!(layout, back);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(NetworkLayout::read_csv("nope".as_bytes()).is_err());
        let missing_d = "# r_max=1 theta0=1\nnode_id,r_m,phi_rad\n0,0.5,0.1\n";
        assert!(NetworkLayout::read_csv(missing_d.as_bytes()).is_err());
    }
}
