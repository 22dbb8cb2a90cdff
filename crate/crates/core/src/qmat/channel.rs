use super::linalg::{self, ComplexMatrix};
use super::operator::{gamma_projector, DensityOperator, HermitianOperator};
use crate::{Error, Result};

/// Tolerance on `‖Σ K†K − I‖` for trace-preserving maps.
pub const TP_TOL: f64 = 1e-9;

/// A completely positive map given by Kraus operators, not necessarily trace preserving.
#[derive(Debug, Clone, PartialEq)]
pub struct CpMap {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl CpMap {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::domain("a map needs at least one Kraus operator"));
        }
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::domain("map dimensions must be positive"));
        }
        for (j, k) in kraus.iter().enumerate() {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::domain(format!(
                    "Kraus operator {j} is {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::domain(format!("Kraus operator {j} has non-finite entries")));
            }
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Σ K†K`.
    pub fn dual_identity(&self) -> ComplexMatrix {
        self.kraus.iter().map(|k| k.adjoint() * k).fold(
            ComplexMatrix::zeros(self.dim_in, self.dim_in),
            |acc, m| acc + m,
        )
    }

    /// Applies the map to tensor factor `acting_on` of `h`, identity elsewhere.
    pub fn apply(&self, h: &HermitianOperator, acting_on: usize) -> Result<HermitianOperator> {
        let dims = h.dims();
        if acting_on >= dims.len() {
            return Err(Error::domain(format!(
                "subsystem {acting_on} out of range for {} subsystems",
                dims.len()
            )));
        }
        if dims[acting_on] != self.dim_in {
            return Err(Error::domain(format!(
                "map expects input dimension {}, subsystem {acting_on} has {}",
                self.dim_in, dims[acting_on]
            )));
        }
        let left: usize = dims[..acting_on].iter().product();
        let right: usize = dims[acting_on + 1..].iter().product();
        let mut out_dims = dims.to_vec();
        out_dims[acting_on] = self.dim_out;
        let d_out = left * self.dim_out * right;
        let mut acc = ComplexMatrix::zeros(d_out, d_out);
        for k in &self.kraus {
            let full = embed(k, left, right);
            acc += &full * h.matrix() * full.adjoint();
        }
        Ok(HermitianOperator::from_raw(linalg::hermitian_part(&acc), out_dims))
    }

    /// Choi operator `(id ⊗ Φ)(Γ)` on `A' ⊗ B`, with unnormalized `Γ`.
    pub fn choi(&self) -> HermitianOperator {
        self.apply(&gamma_projector(self.dim_in), 1)
            .expect("gamma projector has matching dimension")
    }

    /// `A Φ(·) A†`.
    pub fn then_conjugate(&self, a: &ComplexMatrix) -> Result<Self> {
        if a.ncols() != self.dim_out {
            return Err(Error::domain("conjugating matrix has the wrong number of columns"));
        }
        Self::new(self.dim_in, a.nrows(), self.kraus.iter().map(|k| a * k).collect())
    }
}

/// `I_left ⊗ K ⊗ I_right`.
pub(crate) fn embed(k: &ComplexMatrix, left: usize, right: usize) -> ComplexMatrix {
    let mut m = k.clone();
    if right > 1 {
        m = m.kronecker(&ComplexMatrix::identity(right, right));
    }
    if left > 1 {
        m = ComplexMatrix::identity(left, left).kronecker(&m);
    }
    m
}

/// A quantum channel (CPTP map) in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel(CpMap);

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let map = CpMap::new(dim_in, dim_out, kraus)?;
        let residual = tp_residual(&map);
        if residual > TP_TOL {
            return Err(Error::domain(format!(
                "Kraus operators are not trace preserving (residual {residual:.3e})"
            )));
        }
        Ok(Self(map))
    }

    pub fn dim_in(&self) -> usize {
        self.0.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.0.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.0.kraus
    }

    pub fn as_cp(&self) -> &CpMap {
        &self.0
    }

    /// `max |Σ K†K − I|` over entries.
    pub fn tp_residual(&self) -> f64 {
        tp_residual(&self.0)
    }

    pub fn apply(&self, h: &HermitianOperator, acting_on: usize) -> Result<HermitianOperator> {
        self.0.apply(h, acting_on)
    }

    /// Applies the channel to a state; the output is again a state.
    pub fn apply_state(&self, rho: &DensityOperator, acting_on: usize) -> Result<DensityOperator> {
        let out = self.0.apply(rho, acting_on)?;
        let dims = out.dims().to_vec();
        Ok(DensityOperator::from_raw(out.into_matrix(), dims))
    }

    pub fn choi(&self) -> HermitianOperator {
        self.0.choi()
    }
}

fn tp_residual(map: &CpMap) -> f64 {
    let id = ComplexMatrix::identity(map.dim_in, map.dim_in);
    linalg::max_abs_diff(&map.dual_identity(), &id)
}

/// Same as [`KrausChannel::apply`], as a free function.
pub fn apply_channel(ch: &KrausChannel, h: &HermitianOperator, acting_on: usize) -> Result<HermitianOperator> {
    ch.apply(h, acting_on)
}

/// The replacer channel `X ↦ Tr(X) σ`, identified by its output state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplacerSpec {
    sigma: DensityOperator,
}

impl ReplacerSpec {
    pub fn new(sigma: DensityOperator) -> Result<Self> {
        if sigma.dims().len() != 1 {
            let d = sigma.dim();
            return Ok(Self { sigma: sigma.with_dims(vec![d])? });
        }
        Ok(Self { sigma })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { sigma: DensityOperator::maximally_mixed(d) }
    }

    pub fn sigma(&self) -> &DensityOperator {
        &self.sigma
    }

    pub fn dim_out(&self) -> usize {
        self.sigma.dim()
    }

    /// Kraus form `K_{ij} = √s_i |v_i⟩⟨j|` with `σ = Σ s_i |v_i⟩⟨v_i|`.
    pub fn to_channel(&self, dim_in: usize) -> KrausChannel {
        let e = self.sigma.eigh();
        let d_out = self.dim_out();
        let mut kraus = Vec::new();
        for (i, &s) in e.values.iter().enumerate() {
            if s <= 0.0 {
                continue;
            }
            let v = e.vectors.column(i).scale(s.sqrt());
            for j in 0..dim_in {
                let mut k = ComplexMatrix::zeros(d_out, dim_in);
                k.set_column(j, &v);
                kraus.push(k);
            }
        }
        KrausChannel::new(dim_in, d_out, kraus).expect("replacer Kraus operators are trace preserving")
    }
}
