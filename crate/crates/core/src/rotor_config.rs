//! Rotor distribution matrices, the good-children law and the recurrence test.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fraction::{is_probability, parse_fraction, to_f64};
use crate::gw_tree::{NodeId, OffspringDistribution, TreeArena};

/// Lower-triangular matrix of row laws `Q_k = (q_{k,0}, ..., q_{k,k})`, `k = 1..=k_max`.
///
/// `q_{k,l}` is the probability that a vertex with `k` children has `l` good
/// children, i.e. starts with rotor `k - l`.
#[derive(Clone, Debug)]
pub struct RotorMatrix {
    rows: Vec<Vec<f64>>,
    cumulative: Vec<Vec<f64>>,
    exact: Option<Vec<Vec<BigRational>>>,
}

impl RotorMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidMatrix("no rows given".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            let k = i + 1;
            if row.len() != k + 1 {
                return Err(Error::InvalidMatrix(format!("row {k} has {} entries, expected {}", row.len(), k + 1)));
            }
            if row.iter().any(|q| !q.is_finite() || *q < 0.0 || *q > 1.0) {
                return Err(Error::InvalidMatrix(format!("row {k} has an entry outside [0, 1]")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("row {k} sums to {total}")));
            }
        }
        let cumulative = rows
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                let mut c: Vec<f64> = row
                    .iter()
                    .map(|q| {
                        acc += q;
                        acc
                    })
                    .collect();
                *c.last_mut().expect("nonempty row") = 1.0;
                c
            })
            .collect();
        Ok(Self { rows, cumulative, exact: None })
    }

    pub fn from_fractions(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.iter().any(|q| !is_probability(q)) {
                return Err(Error::InvalidMatrix(format!("row {} has an entry outside [0, 1]", i + 1)));
            }
        }
        let mut matrix = Self::new(rows.iter().map(|r| r.iter().map(to_f64).collect()).collect())?;
        let exact_rows = rows.iter().all(|r| r.iter().cloned().fold(BigRational::zero(), |a, b| a + b).is_one());
        if exact_rows {
            matrix.exact = Some(rows);
        }
        Ok(matrix)
    }

    /// Uniform rows `q_{k,l} = 1/(k+1)`.
    pub fn uniform(k_max: u32) -> Self {
        let rows =
            (1..=k_max as i64).map(|k| vec![BigRational::new(1.into(), (k + 1).into()); k as usize + 1]).collect();
        Self::from_fractions(rows).expect("uniform rows are valid")
    }

    /// Rows with all mass at `l = k`: every rotor starts at the parent.
    pub fn all_good(k_max: u32) -> Self {
        let rows = (1..=k_max as usize)
            .map(|k| {
                let mut row = vec![BigRational::zero(); k + 1];
                row[k] = BigRational::one();
                row
            })
            .collect();
        Self::from_fractions(rows).expect("point-mass rows are valid")
    }

    /// Parses `uniform` (sized to `k_max`) or `rows:` followed by `;`-separated
    /// rows of `,`-separated entries, starting with row `k = 1`.
    pub fn parse(text: &str, k_max: u32) -> Result<Self> {
        let text = text.trim();
        if text == "uniform" {
            return Ok(Self::uniform(k_max));
        }
        let body = text
            .strip_prefix("rows:")
            .ok_or_else(|| Error::Parse(format!("expected `uniform` or `rows:...`, got `{text}`")))?;
        let rows = body
            .split(';')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(|row| row.split(',').map(parse_fraction).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_fractions(rows)
    }

    pub fn k_max(&self) -> u32 {
        self.rows.len() as u32
    }

    /// Row `Q_k`, `k >= 1`.
    pub fn row(&self, k: u32) -> Option<&[f64]> {
        self.rows.get((k as usize).checked_sub(1)?).map(Vec::as_slice)
    }

    pub fn q(&self, k: u32, l: u32) -> f64 {
        self.row(k).and_then(|r| r.get(l as usize)).copied().unwrap_or(0.0)
    }

    pub fn exact(&self) -> Option<&[Vec<BigRational>]> {
        self.exact.as_deref()
    }

    pub fn describe(&self) -> String {
        let uniform = (1..=self.k_max()).all(|k| self.row(k).unwrap().iter().all(|&q| q == 1.0 / f64::from(k + 1)));
        if uniform {
            return "uniform".into();
        }
        let fmt_row = |i: usize| -> String {
            match &self.exact {
                Some(rows) => rows[i].iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
                None => self.rows[i].iter().map(|q| q.to_string()).collect::<Vec<_>>().join(","),
            }
        };
        let rows: Vec<String> = (0..self.rows.len()).map(fmt_row).collect();
        format!("rows:{}", rows.join(";"))
    }
}

/// Draws an initial rotor for a vertex with `d` children: `d - l` with probability `q_{d,l}`.
pub fn sample_rotor<R: Rng + ?Sized>(d: u32, q: &RotorMatrix, rng: &mut R) -> Result<u32> {
    let cumulative = d
        .checked_sub(1)
        .and_then(|i| q.cumulative.get(i as usize))
        .ok_or(Error::OutOfSupport { count: d, k_max: q.k_max() })?;
    let u: f64 = rng.random();
    let l = cumulative.partition_point(|&c| c <= u).min(d as usize) as u32;
    Ok(d - l)
}

/// Planar indices of the good children of `id`: those `k` with `rho(x) < k`.
pub fn good_children(arena: &TreeArena, id: NodeId) -> Result<std::ops::RangeInclusive<u32>> {
    let node = arena.node(id)?;
    let d = node.child_count.ok_or(Error::NotExpanded(id))?;
    let rho = node.rotor.ok_or(Error::RotorUnset(id))?;
    Ok(rho + 1..=d)
}

/// Law `nu = xi . Q` of the number of good children.
#[derive(Clone, Debug)]
pub struct GoodChildrenLaw {
    pub probs: Vec<f64>,
    pub mean: f64,
    /// `E[nu]` in exact arithmetic when both inputs were given as fractions.
    pub exact_mean: Option<BigRational>,
}

pub fn good_children_law(xi: &OffspringDistribution, q: &RotorMatrix) -> Result<GoodChildrenLaw> {
    let k_max = xi.k_max();
    if q.k_max() < k_max {
        return Err(Error::InvalidMatrix(format!(
            "matrix covers offspring counts up to {} but the law reaches {k_max}",
            q.k_max()
        )));
    }
    let probs: Vec<f64> = (0..=k_max).map(|l| (l.max(1)..=k_max).map(|k| xi.p(k) * q.q(k, l)).sum()).collect();
    let mean = probs.iter().enumerate().map(|(l, p)| l as f64 * p).sum();
    let exact_mean = match (xi.exact(), q.exact()) {
        (Some(p), Some(rows)) => {
            let mut total = BigRational::zero();
            for (i, pk) in p.iter().enumerate() {
                for (l, qkl) in rows[i].iter().enumerate() {
                    total += pk * qkl * BigRational::from_integer(l.into());
                }
            }
            Some(total)
        }
        _ => None,
    };
    Ok(GoodChildrenLaw { probs, mean, exact_mean })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recurrence {
    Recurrent,
    Transient,
}

impl fmt::Display for Recurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Recurrence::Recurrent => "recurrent",
            Recurrence::Transient => "transient",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Recurrence,
    pub law: GoodChildrenLaw,
    /// Whether the verdict came from exact rational arithmetic.
    pub exact: bool,
}

/// Recurrent iff `E[nu] <= 1`; the boundary `E[nu] = 1` is recurrent.
pub fn classify(xi: &OffspringDistribution, q: &RotorMatrix) -> Result<Classification> {
    let law = good_children_law(xi, q)?;
    let (transient, exact) = match &law.exact_mean {
        Some(mean) => (mean > &BigRational::one(), true),
        None => (law.mean > 1.0 + 1e-12, false),
    };
    let verdict = if transient { Recurrence::Transient } else { Recurrence::Recurrent };
    Ok(Classification { verdict, law, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gw_tree::{RotorSource, ROOT};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn xi(text: &str) -> OffspringDistribution {
        OffspringDistribution::parse(text).unwrap()
    }

    #[test]
    fn matrix_validation() {
        assert!(RotorMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).is_err());
        assert!(RotorMatrix::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(RotorMatrix::new(vec![vec![1.5, -0.5]]).is_err());
        assert!(RotorMatrix::parse("rows:1/2,1/2;1/3,1/3,1/3", 2).unwrap().exact().is_some());
        assert!(RotorMatrix::parse("rows:1/2,1/2;1/3,1/3", 2).is_err());
        assert!(RotorMatrix::parse("diagonal", 2).is_err());
        assert_eq!(RotorMatrix::parse("uniform", 4).unwrap().k_max(), 4);
    }

    #[test]
    fn describe_round_trips() {
        let q = RotorMatrix::parse("rows:1/2,1/2;0,1/4,3/4", 2).unwrap();
        assert_eq!(q.describe(), "rows:1/2,1/2;0,1/4,3/4");
        assert_eq!(RotorMatrix::uniform(3).describe(), "uniform");
    }

    #[test]
    fn sample_rotor_point_mass_row() {
        let q = RotorMatrix::parse("rows:0,1;0,0,1;0,0,0,1", 3).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(sample_rotor(3, &q, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn sample_rotor_out_of_support() {
        let q = RotorMatrix::uniform(3);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
        assert_eq!(sample_rotor(5, &q, &mut rng), Err(Error::OutOfSupport { count: 5, k_max: 3 }));
        assert!(sample_rotor(0, &q, &mut rng).is_err());
    }

    #[test]
    fn sample_rotor_uniform_frequencies() {
        // Three-sided multinomial, 1e5 draws: sd of each frequency is 0.0015,
        // so +-0.01 is more than six standard deviations.
        let q = RotorMatrix::uniform(2);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(2024);
        let mut counts = [0u32; 3];
        let draws = 100_000;
        for _ in 0..draws {
            counts[sample_rotor(2, &q, &mut rng).unwrap() as usize] += 1;
        }
        for c in counts {
            let freq = f64::from(c) / f64::from(draws);
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn good_children_examples() {
        let mut arena = TreeArena::with_rotors(xi("p3=1"), 0, RotorSource::Explicit);
        arena.expand(ROOT).unwrap();
        assert_eq!(good_children(&arena, ROOT), Err(Error::RotorUnset(ROOT)));
        arena.set_rotor(ROOT, 0).unwrap();
        assert_eq!(good_children(&arena, ROOT).unwrap().collect::<Vec<_>>(), vec![1, 2, 3]);
        arena.set_rotor(ROOT, 3).unwrap();
        assert_eq!(good_children(&arena, ROOT).unwrap().count(), 0);

        let mut arena = TreeArena::with_rotors(xi("p4=1"), 0, RotorSource::Explicit);
        arena.expand(ROOT).unwrap();
        arena.set_rotor(ROOT, 2).unwrap();
        assert_eq!(good_children(&arena, ROOT).unwrap().collect::<Vec<_>>(), vec![3, 4]);
    }

    #[test]
    fn good_children_law_binary_uniform() {
        let law = good_children_law(&xi("p2=1"), &RotorMatrix::uniform(2)).unwrap();
        for p in &law.probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(law.exact_mean, Some(BigRational::one()));
    }

    #[test]
    fn good_children_law_mixed_uniform() {
        let law = good_children_law(&xi("p2=1/2,p3=1/2"), &RotorMatrix::uniform(3)).unwrap();
        assert_eq!(law.exact_mean, Some(BigRational::new(5.into(), 4.into())));
        assert!((law.mean - 1.25).abs() < 1e-15);
        assert!((law.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_good_rows_reproduce_xi() {
        let x = xi("p1=1/5,p2=2/5,p4=2/5");
        let law = good_children_law(&x, &RotorMatrix::all_good(4)).unwrap();
        assert_eq!(law.probs[0], 0.0);
        for k in 1..=4 {
            assert!((law.probs[k as usize] - x.p(k)).abs() < 1e-15);
        }
        assert_eq!(law.exact_mean.unwrap(), BigRational::new(13.into(), 5.into()));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(good_children_law(&xi("p4=1"), &RotorMatrix::uniform(3)), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn classification_examples() {
        let c = classify(&xi("p2=1"), &RotorMatrix::uniform(2)).unwrap();
        assert_eq!(c.verdict, Recurrence::Recurrent);
        assert!(c.exact);
        assert_eq!(classify(&xi("p3=1"), &RotorMatrix::uniform(3)).unwrap().verdict, Recurrence::Transient);
        let any = RotorMatrix::parse("rows:1/10,9/10", 1).unwrap();
        assert_eq!(classify(&xi("p1=1"), &any).unwrap().verdict, Recurrence::Recurrent);
        assert_eq!(classify(&xi("p1=1"), &RotorMatrix::all_good(1)).unwrap().verdict, Recurrence::Recurrent);
    }

    #[test]
    fn float_boundary_is_recurrent() {
        // m = 2 given in floats whose sum is not exactly representable
        let x = OffspringDistribution::new(vec![0.1, 0.8, 0.1]).unwrap();
        let c = classify(&x, &RotorMatrix::uniform(3)).unwrap();
        assert!(!c.exact);
        assert_eq!(c.verdict, Recurrence::Recurrent);
    }
}
