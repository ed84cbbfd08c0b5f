//! Adjacency between mesh leaves, labelled with compass case codes.

use serde::{Deserialize, Serialize};

use super::quadtree::{CellBox, EDGE_EPS};
use crate::error::{Error, Result};

/// Compass direction from a source cell to a neighbour. Opposite
/// directions carry opposite codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseCode {
    NorthEast,
    East,
    SouthEast,
    South,
    SouthWest,
    West,
    NorthWest,
    North,
}

impl CaseCode {
    pub const ALL: [CaseCode; 8] = [
        CaseCode::NorthEast,
        CaseCode::East,
        CaseCode::SouthEast,
        CaseCode::South,
        CaseCode::SouthWest,
        CaseCode::West,
        CaseCode::NorthWest,
        CaseCode::North,
    ];

    pub fn code(self) -> i8 {
        match self {
            CaseCode::NorthEast => 1,
            CaseCode::East => 2,
            CaseCode::SouthEast => 3,
            CaseCode::South => 4,
            CaseCode::SouthWest => -1,
            CaseCode::West => -2,
            CaseCode::NorthWest => -3,
            CaseCode::North => -4,
        }
    }

    pub fn from_code(c: i8) -> Option<Self> {
        CaseCode::ALL.into_iter().find(|k| k.code() == c)
    }

    pub fn opposite(self) -> Self {
        CaseCode::from_code(-self.code()).expect("codes are closed under negation")
    }

    pub fn is_diagonal(self) -> bool {
        self.code().abs() % 2 == 1
    }

    /// East/west neighbours share a meridian segment.
    pub fn is_horizontal(self) -> bool {
        self.code().abs() == 2
    }

    pub fn is_vertical(self) -> bool {
        self.code().abs() == 4
    }

    /// Unit compass step `(east, north)` from source to target.
    pub fn step(self) -> (i8, i8) {
        match self {
            CaseCode::NorthEast => (1, 1),
            CaseCode::East => (1, 0),
            CaseCode::SouthEast => (1, -1),
            CaseCode::South => (0, -1),
            CaseCode::SouthWest => (-1, -1),
            CaseCode::West => (-1, 0),
            CaseCode::NorthWest => (-1, 1),
            CaseCode::North => (0, 1),
        }
    }
}

impl Serialize for CaseCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.code())
    }
}

impl<'de> Deserialize<'de> for CaseCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = i8::deserialize(d)?;
        CaseCode::from_code(c).ok_or_else(|| serde::de::Error::custom(format!("invalid case code {c}")))
    }
}

/// How two rectangles touch, if at all.
pub fn relation(a: &CellBox, b: &CellBox) -> Result<Option<CaseCode>> {
    let ox = a.lon_hi().min(b.lon_hi()) - a.lon_lo().max(b.lon_lo());
    let oy = a.lat_hi().min(b.lat_hi()) - a.lat_lo().max(b.lat_lo());
    if ox > EDGE_EPS && oy > EDGE_EPS {
        return Err(Error::Structural(format!("cells {} and {} overlap", a.id, b.id)));
    }
    if ox < -EDGE_EPS || oy < -EDGE_EPS {
        return Ok(None);
    }
    let east = b.centre.lon > a.centre.lon;
    let north = b.centre.lat > a.centre.lat;
    let code = match (ox > EDGE_EPS, oy > EDGE_EPS) {
        (false, true) => {
            if east {
                CaseCode::East
            } else {
                CaseCode::West
            }
        }
        (true, false) => {
            if north {
                CaseCode::North
            } else {
                CaseCode::South
            }
        }
        (false, false) => match (east, north) {
            (true, true) => CaseCode::NorthEast,
            (true, false) => CaseCode::SouthEast,
            (false, false) => CaseCode::SouthWest,
            (false, true) => CaseCode::NorthWest,
        },
        (true, true) => unreachable!("handled as overlap"),
    };
    Ok(Some(code))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub code: CaseCode,
}

/// Pruned adjacency over a leaf cover. Blocked cells keep their slot but
/// have no edges.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighbourGraph {
    blocked: Vec<bool>,
    adjacency: Vec<Vec<(usize, CaseCode)>>,
}

impl NeighbourGraph {
    pub fn neighbours(&self, id: usize) -> &[(usize, CaseCode)] {
        &self.adjacency[id]
    }

    pub fn code(&self, src: usize, dst: usize) -> Option<CaseCode> {
        let adj = &self.adjacency[src];
        adj.binary_search_by_key(&dst, |(d, _)| *d).ok().map(|k| adj[k].1)
    }

    pub fn is_blocked(&self, id: usize) -> bool {
        self.blocked[id]
    }

    pub fn blocked(&self) -> &[bool] {
        &self.blocked
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// All directed edges, ordered by source then target id.
    pub fn edges(&self) -> Vec<Edge> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(src, adj)| adj.iter().map(move |&(dst, code)| Edge { src, dst, code }))
            .collect()
    }
}

/// Every touching pair of cells, regardless of blocking, as
/// `(a, b, code from a to b)` with `a < b`.
pub fn touching_pairs(cells: &[CellBox]) -> Result<Vec<(usize, usize, CaseCode)>> {
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| cells[a].lon_lo().total_cmp(&cells[b].lon_lo()).then(a.cmp(&b)));
    let mut pairs = Vec::new();
    for (k, &a) in order.iter().enumerate() {
        let ca = &cells[a];
        for &b in &order[k + 1..] {
            let cb = &cells[b];
            if cb.lon_lo() > ca.lon_hi() + EDGE_EPS {
                break;
            }
            if let Some(code) = relation(ca, cb)? {
                if a < b {
                    pairs.push((a, b, code));
                } else {
                    pairs.push((b, a, code.opposite()));
                }
            }
        }
    }
    pairs.sort_by_key(|&(a, b, _)| (a, b));
    Ok(pairs)
}

/// Links every pair of unblocked cells that share an edge segment of
/// positive length or exactly one corner.
pub fn build_neighbour_graph(cells: &[CellBox], blocked: impl Fn(&CellBox) -> bool) -> Result<NeighbourGraph> {
    for (k, c) in cells.iter().enumerate() {
        if c.id != k {
            return Err(Error::Structural(format!("cell at position {k} has id {}", c.id)));
        }
    }
    let flags: Vec<bool> = cells.iter().map(&blocked).collect();
    let mut adjacency = vec![Vec::new(); cells.len()];
    for (a, b, code) in touching_pairs(cells)? {
        if flags[a] || flags[b] {
            continue;
        }
        adjacency[a].push((b, code));
        adjacency[b].push((a, code.opposite()));
    }
    for adj in &mut adjacency {
        adj.sort_by_key(|(d, _)| *d);
    }
    Ok(NeighbourGraph {
        blocked: flags,
        adjacency,
    })
}
