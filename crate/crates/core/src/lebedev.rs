//! Lebedev–Laikov quadrature on the unit sphere.
//!
//! Each rule is assembled from octahedrally invariant orbits. Weights are
//! normalized so that they sum to one, i.e. a rule approximates the angular
//! *mean* `(1/4π)∮ f dΩ`.

// Table entries carry every digit of the published rules.
#![allow(clippy::excessive_precision)]

use std::fmt;
use std::sync::OnceLock;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported Lebedev order {0}; supported point counts are {SUPPORTED_DISPLAY}")]
pub struct UnsupportedOrder(pub usize);

const SUPPORTED_DISPLAY: &str = "6, 14, 26, 38, 50, 86, 110, 146, 194";

/// Supported rules, identified by their point count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum LebedevOrder {
    N6,
    N14,
    N26,
    N38,
    N50,
    N86,
    N110,
    N146,
    N194,
}

impl LebedevOrder {
    pub const ALL: [LebedevOrder; 9] = [
        LebedevOrder::N6,
        LebedevOrder::N14,
        LebedevOrder::N26,
        LebedevOrder::N38,
        LebedevOrder::N50,
        LebedevOrder::N86,
        LebedevOrder::N110,
        LebedevOrder::N146,
        LebedevOrder::N194,
    ];

    pub fn points(self) -> usize {
        match self {
            LebedevOrder::N6 => 6,
            LebedevOrder::N14 => 14,
            LebedevOrder::N26 => 26,
            LebedevOrder::N38 => 38,
            LebedevOrder::N50 => 50,
            LebedevOrder::N86 => 86,
            LebedevOrder::N110 => 110,
            LebedevOrder::N146 => 146,
            LebedevOrder::N194 => 194,
        }
    }

    /// Highest polynomial degree integrated exactly.
    pub fn precision(self) -> u32 {
        match self {
            LebedevOrder::N6 => 3,
            LebedevOrder::N14 => 5,
            LebedevOrder::N26 => 7,
            LebedevOrder::N38 => 9,
            LebedevOrder::N50 => 11,
            LebedevOrder::N86 => 15,
            LebedevOrder::N110 => 17,
            LebedevOrder::N146 => 19,
            LebedevOrder::N194 => 23,
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&o| o == self).unwrap()
    }

    pub fn grid(self) -> &'static LebedevGrid {
        static GRIDS: [OnceLock<LebedevGrid>; 9] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        GRIDS[self.index()].get_or_init(|| LebedevGrid::build(self))
    }
}

impl TryFrom<usize> for LebedevOrder {
    type Error = UnsupportedOrder;

    fn try_from(points: usize) -> Result<Self, Self::Error> {
        Self::ALL
            .iter()
            .copied()
            .find(|o| o.points() == points)
            .ok_or(UnsupportedOrder(points))
    }
}

impl From<LebedevOrder> for usize {
    fn from(order: LebedevOrder) -> Self {
        order.points()
    }
}

impl fmt::Display for LebedevOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.points())
    }
}

#[derive(Debug, Clone, Copy)]
enum Orbit {
    /// (±1, 0, 0): 6 points
    A1,
    /// (0, ±1/√2, ±1/√2): 12 points
    A2,
    /// (±1/√3, ±1/√3, ±1/√3): 8 points
    A3,
    /// (±a, ±a, ±b), b = √(1 − 2a²): 24 points
    B(f64),
    /// (±a, ±b, 0), b = √(1 − a²): 24 points
    C(f64),
    /// (±a, ±b, ±c), c = √(1 − a² − b²): 48 points
    D(f64, f64),
}

fn rule_table(order: LebedevOrder) -> &'static [(Orbit, f64)] {
    use Orbit::*;
    match order {
        LebedevOrder::N6 => &[(A1, 0.16666666666666667)],
        LebedevOrder::N14 => &[(A1, 0.066666666666666667), (A3, 0.075)],
        LebedevOrder::N26 => &[
            (A1, 0.047619047619047619),
            (A2, 0.038095238095238095),
            (A3, 0.032142857142857143),
        ],
        LebedevOrder::N38 => &[
            (A1, 0.0095238095238095238),
            (A3, 0.032142857142857143),
            (C(0.45970084338098306), 0.028571428571428571),
        ],
        LebedevOrder::N50 => &[
            (A1, 0.012698412698412698),
            (A2, 0.022574955908289242),
            (A3, 0.02109375),
            (B(0.30151134457776362), 0.020173335537918871),
        ],
        LebedevOrder::N86 => &[
            (A1, 0.011544011544011544),
            (A3, 0.011943909085856282),
            (B(0.36960284645415025), 0.011110555710603403),
            (B(0.69435400660266636), 0.011876501294537142),
            (C(0.37424303909034117), 0.011812303746904475),
        ],
        LebedevOrder::N110 => &[
            (A1, 0.0038282704949371616),
            (A3, 0.0097937375124875125),
            (B(0.18511563534473617), 0.008211737283191111),
            (B(0.69042104838229218), 0.0099428148911781033),
            (B(0.39568947305594191), 0.0095954713360709628),
            (C(0.4783690288121502), 0.0096949963616630283),
        ],
        LebedevOrder::N146 => &[
            (A1, 0.00059963136886213809),
            (A2, 0.0073729997186207564),
            (A3, 0.0072105153601444878),
            (B(0.67644104001142637), 0.0071163554931175554),
            (B(0.41749612279654534), 0.0067538294863144774),
            (B(0.15746766720390818), 0.0075743941590540337),
            (D(0.14035538117131833, 0.44933283232695573), 0.0069910873533032624),
        ],
        LebedevOrder::N194 => &[
            (A1, 0.0017823404472446112),
            (A2, 0.0057169059499771019),
            (A3, 0.005573383178848738),
            (B(0.67129734426952263), 0.0056087040825879968),
            (B(0.28924656275754386), 0.0051582377118053831),
            (B(0.44469331787174373), 0.0055187714672736137),
            (B(0.12993354476500669), 0.0041067770281693941),
            (C(0.34577021976112827), 0.0050518460646148085),
            (D(0.15904171053835295, 0.83603601548245889), 0.0055302489162330937),
        ],
    }
}

/// All signed permutations of `base`, without duplicates, in a fixed order.
fn expand(base: [f64; 3], out: &mut Vec<Vector3<f64>>) {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let start = out.len();
    for perm in PERMS {
        for signs in 0..8u8 {
            let mut v = Vector3::zeros();
            for (axis, &src) in perm.iter().enumerate() {
                let s = if signs & (1 << axis) != 0 { -1.0 } else { 1.0 };
                v[axis] = s * base[src];
            }
            // -0.0 and 0.0 compare equal, so zero coordinates collapse
            if !out[start..].contains(&v) {
                out.push(v);
            }
        }
    }
}

/// Points and weights of one rule; weights sum to one.
#[derive(Debug, Clone)]
pub struct LebedevGrid {
    pub order: LebedevOrder,
    pub points: Vec<Vector3<f64>>,
    pub weights: Vec<f64>,
}

impl LebedevGrid {
    fn build(order: LebedevOrder) -> Self {
        let mut points = Vec::with_capacity(order.points());
        let mut weights = Vec::with_capacity(order.points());
        let s2 = 0.5f64.sqrt();
        let s3 = (1.0f64 / 3.0).sqrt();
        for &(orbit, w) in rule_table(order) {
            let base = match orbit {
                Orbit::A1 => [1.0, 0.0, 0.0],
                Orbit::A2 => [0.0, s2, s2],
                Orbit::A3 => [s3, s3, s3],
                Orbit::B(a) => [a, a, (1.0 - 2.0 * a * a).sqrt()],
                Orbit::C(a) => [a, (1.0 - a * a).sqrt(), 0.0],
                Orbit::D(a, b) => [a, b, (1.0 - a * a - b * b).sqrt()],
            };
            let before = points.len();
            expand(base, &mut points);
            weights.resize(points.len(), w);
            debug_assert!(points.len() > before);
        }
        debug_assert_eq!(points.len(), order.points());
        Self {
            order,
            points,
            weights,
        }
    }

    /// Angular mean of `f` over the unit sphere.
    pub fn mean<F: FnMut(&Vector3<f64>) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}
