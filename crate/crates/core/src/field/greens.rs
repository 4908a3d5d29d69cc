use crate::error::{Error, Result};

/// Im{G(r, r_e, ω)}·n sampled on a common frequency grid at a set of
/// observation points. Coordinates in nm, ω in eV, Im G in 1/m.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensFunctionTable {
    point_ids: Vec<String>,
    coords: Vec<[f64; 3]>,
    omega: Vec<f64>,
    /// `[point][frequency]`
    im_g: Vec<Vec<[f64; 3]>>,
}

impl GreensFunctionTable {
    pub fn new(
        point_ids: Vec<String>,
        coords: Vec<[f64; 3]>,
        omega: Vec<f64>,
        im_g: Vec<Vec<[f64; 3]>>,
    ) -> Result<Self> {
        if point_ids.is_empty() {
            return Err(Error::InvalidTable("Green's function table has no points".into()));
        }
        if coords.len() != point_ids.len() || im_g.len() != point_ids.len() {
            return Err(Error::Dimension(format!(
                "{} point ids, {} coordinates, {} Im G blocks",
                point_ids.len(),
                coords.len(),
                im_g.len()
            )));
        }
        if omega.len() < 2 {
            return Err(Error::InvalidTable("Green's function table needs at least two frequencies".into()));
        }
        for (k, &w) in omega.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidTable(format!("omega[{k}] = {w} must be finite and > 0")));
            }
            if k > 0 && w <= omega[k - 1] {
                return Err(Error::InvalidTable(format!("omega grid not strictly increasing at index {k}")));
            }
        }
        for (p, block) in im_g.iter().enumerate() {
            if block.len() != omega.len() {
                return Err(Error::Dimension(format!(
                    "point '{}' has {} frequencies, expected {}",
                    point_ids[p],
                    block.len(),
                    omega.len()
                )));
            }
            if block.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidTable(format!("non-finite Im G at point '{}'", point_ids[p])));
            }
        }
        if coords.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable("non-finite point coordinate".into()));
        }
        for (i, id) in point_ids.iter().enumerate() {
            if point_ids[..i].contains(id) {
                return Err(Error::InvalidTable(format!("duplicate point id '{id}'")));
            }
        }
        Ok(Self { point_ids, coords, omega, im_g })
    }

    pub fn point_ids(&self) -> &[String] {
        &self.point_ids
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn im_g(&self, point: usize) -> &[[f64; 3]] {
        &self.im_g[point]
    }

    pub fn n_points(&self) -> usize {
        self.point_ids.len()
    }

    /// Sub-table with the given point ids, in the order given.
    pub fn select(&self, ids: &[&str]) -> Result<Self> {
        let mut idx = Vec::with_capacity(ids.len());
        for id in ids {
            let k = self
                .point_ids
                .iter()
                .position(|p| p == id)
                .ok_or_else(|| Error::Precondition(format!("unknown point id '{id}'")))?;
            idx.push(k);
        }
        Self::new(
            idx.iter().map(|&k| self.point_ids[k].clone()).collect(),
            idx.iter().map(|&k| self.coords[k]).collect(),
            self.omega.clone(),
            idx.iter().map(|&k| self.im_g[k].clone()).collect(),
        )
    }
}
