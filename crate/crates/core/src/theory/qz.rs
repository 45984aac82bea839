//! Ordered generalized Schur decomposition through LAPACK `dgges`.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Output of an ordered QZ: `Q' A Z = S`, `Q' B Z = T` with the eigenvalues
/// `α/β` inside the unit circle moved to the leading block.
pub struct OrderedQz {
    pub z: DMatrix<f64>,
    pub n_stable: usize,
}

pub const STABLE_CUTOFF: f64 = 1.0 + 1e-6;

extern "C" fn select_stable(ar: *const f64, ai: *const f64, b: *const f64) -> i32 {
    // SAFETY: LAPACK passes valid pointers to scalars.
    let (ar, ai, b) = unsafe { (*ar, *ai, *b) };
    ((ar * ar + ai * ai).sqrt() < STABLE_CUTOFF * b.abs()) as i32
}

/// Ordered QZ of the pencil `(a, b)`: generalized eigenvalues are `λ` with
/// `a v = λ b v`.
pub fn ordered_qz(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<OrderedQz> {
    let n = a.nrows();
    let ni = n as i32;
    // nalgebra is column-major, as LAPACK expects
    let mut am: Vec<f64> = a.as_slice().to_vec();
    let mut bm: Vec<f64> = b.as_slice().to_vec();
    let (mut sdim, mut info) = (0i32, 0i32);
    let mut ar = vec![0.0; n];
    let mut ai = vec![0.0; n];
    let mut be = vec![0.0; n];
    let mut vsl = vec![0.0; n * n];
    let mut vsr = vec![0.0; n * n];
    let lwork = (8 * n + 16).max(64 * n);
    let mut work = vec![0.0; lwork];
    let mut bwork = vec![0i32; n];
    unsafe {
        lapack::dgges(
            b'V',
            b'V',
            b'S',
            Some(select_stable),
            ni,
            &mut am,
            ni,
            &mut bm,
            ni,
            &mut sdim,
            &mut ar,
            &mut ai,
            &mut be,
            &mut vsl,
            ni,
            &mut vsr,
            ni,
            &mut work,
            lwork as i32,
            &mut bwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::NoStableSolution(format!(
            "QZ failed (info = {info})"
        )));
    }
    Ok(OrderedQz {
        z: DMatrix::from_column_slice(n, n, &vsr),
        n_stable: sdim as usize,
    })
}
