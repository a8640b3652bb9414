use rand::Rng;

use crate::{AdfSpec, Error, Result, RngStream, Subfunction};

/// 3D ±J spin glass on an L×L×L lattice with periodic boundaries.
///
/// Site `(x, y, z)` has index `x + L*(y + L*z)`. Each site owns one coupling
/// per positive axis direction, so there are exactly `3n` couplings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinGlass3D {
    side: usize,
    // couplings[3 * site + axis]
    couplings: Vec<i8>,
}

impl SpinGlass3D {
    pub fn from_couplings(side: usize, couplings: Vec<i8>) -> Result<Self> {
        if side < 3 {
            return Err(Error::invalid(format!("lattice side {side} < 3")));
        }
        let n = side * side * side;
        if couplings.len() != 3 * n {
            return Err(Error::invalid(format!(
                "{} couplings for {n} sites",
                couplings.len()
            )));
        }
        if couplings.iter().any(|&j| j != 1 && j != -1) {
            return Err(Error::invalid("couplings must be +1 or -1"));
        }
        Ok(Self { side, couplings })
    }

    /// All couplings +1.
    pub fn ferromagnetic(side: usize) -> Result<Self> {
        let n = side * side * side;
        Self::from_couplings(side, vec![1; 3 * n])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn n(&self) -> usize {
        self.side.pow(3)
    }

    pub fn coupling(&self, site: usize, axis: usize) -> i8 {
        self.couplings[3 * site + axis]
    }

    pub fn couplings(&self) -> &[i8] {
        &self.couplings
    }

    pub fn site(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.side * (y + self.side * z)
    }

    pub fn coords(&self, site: usize) -> (usize, usize, usize) {
        let l = self.side;
        (site % l, (site / l) % l, site / (l * l))
    }

    /// Neighbor of `site` one step along `axis` in the positive direction.
    pub fn neighbor(&self, site: usize, axis: usize) -> usize {
        let l = self.side;
        let (mut x, mut y, mut z) = self.coords(site);
        match axis {
            0 => x = (x + 1) % l,
            1 => y = (y + 1) % l,
            _ => z = (z + 1) % l,
        }
        self.site(x, y, z)
    }

    /// Edges `(i, j, J)` in site-then-axis order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.n()).flat_map(move |s| (0..3).map(move |a| (s, self.neighbor(s, a), self.coupling(s, a))))
    }

    /// `Σ J_ij s_i s_j` with `s = 2b - 1`; the quantity being maximized.
    pub fn energy_score(&self, bits: &[u8]) -> i64 {
        self.edges()
            .map(|(i, j, c)| {
                let si = 2 * bits[i] as i64 - 1;
                let sj = 2 * bits[j] as i64 - 1;
                c as i64 * si * sj
            })
            .sum()
    }

    pub fn to_adf(&self) -> AdfSpec {
        let terms = self
            .edges()
            .map(|(i, j, c)| {
                let c = c as f64;
                // index = b_i + 2 b_j; equal spins contribute +J
                Subfunction::new(vec![i, j], vec![c, -c, -c, c]).unwrap()
            })
            .collect();
        AdfSpec::new(self.n(), terms).unwrap()
    }
}

/// Random instance with each coupling independently ±1.
pub fn gen_spin_glass(side: usize, rng: &mut RngStream) -> Result<SpinGlass3D> {
    if side < 3 {
        return Err(Error::invalid(format!(
            "lattice side {side} < 3 would duplicate periodic edges"
        )));
    }
    let n = side.pow(3);
    let couplings = (0..3 * n)
        .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
        .collect();
    SpinGlass3D::from_couplings(side, couplings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Solution;

    #[test]
    fn l3_counts() {
        let mut rng = RngStream::new(1);
        let sg = gen_spin_glass(3, &mut rng).unwrap();
        assert_eq!(sg.n(), 27);
        assert_eq!(sg.couplings().len(), 81);
        assert!(sg.couplings().iter().all(|&j| j == 1 || j == -1));
        assert_eq!(sg.to_adf().m(), 81);
    }

    #[test]
    fn side_two_rejected() {
        let mut rng = RngStream::new(1);
        assert!(gen_spin_glass(2, &mut rng).is_err());
    }

    #[test]
    fn ferromagnet_ground_state() {
        let sg = SpinGlass3D::ferromagnetic(3).unwrap();
        let adf = sg.to_adf();
        let mut s = Solution::new(vec![1; 27]);
        assert_eq!(adf.evaluate(&mut s).unwrap(), 81.0);
        assert_eq!(sg.energy_score(&[1; 27]), 81);
    }

    #[test]
    fn adf_matches_energy() {
        let mut rng = RngStream::new(2);
        let sg = gen_spin_glass(4, &mut rng).unwrap();
        let adf = sg.to_adf();
        for _ in 0..20 {
            let bits: Vec<u8> = (0..64).map(|_| rng.gen_range(0..2)).collect();
            assert_eq!(adf.value(&bits), sg.energy_score(&bits) as f64);
        }
    }

    #[test]
    fn every_site_has_six_bonds() {
        let sg = SpinGlass3D::ferromagnetic(3).unwrap();
        let mut deg = vec![0; 27];
        for (i, j, _) in sg.edges() {
            assert_ne!(i, j);
            deg[i] += 1;
            deg[j] += 1;
        }
        assert!(deg.iter().all(|&d| d == 6));
    }
}
