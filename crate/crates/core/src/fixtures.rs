//! Small named dual pairs used throughout the tests and by `framebridge gen`.

use crate::frames::{DualFramePair, Frame};
use crate::numerics::{CMatrix, Tolerance};

/// `F = {(1,1), (−1,1), (−1,−1), (1,−1)}` with the alternate dual
/// `G = {(1,0), (½,½), (½,−½), (1,0)}`.
pub fn paper_2d() -> DualFramePair {
    let f = Frame::from_real(&[&[1.0, 1.0], &[-1.0, 1.0], &[-1.0, -1.0], &[1.0, -1.0]])
        .expect("static frame");
    let g = Frame::from_real(&[&[1.0, 0.0], &[0.5, 0.5], &[0.5, -0.5], &[1.0, 0.0]])
        .expect("static frame");
    DualFramePair::new(f, g, &Tolerance::default()).expect("static dual pair")
}

/// `F = {e₁, −e₁, e₁, e₂}`, `G = {e₂, e₂, e₁, e₂}`: erasing the first
/// coefficient leaves a nilpotent error operator.
pub fn example_3_3() -> DualFramePair {
    let f = Frame::from_real(&[&[1.0, 0.0], &[-1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]])
        .expect("static frame");
    let g = Frame::from_real(&[&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]])
        .expect("static frame");
    DualFramePair::new(f, g, &Tolerance::default()).expect("static dual pair")
}

/// The three-vector Parseval "Mercedes-Benz" frame of `R²` paired with itself.
pub fn mercedes() -> DualFramePair {
    let scale = (2.0f64 / 3.0).sqrt();
    let vectors: Vec<[f64; 2]> = (0..3)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            [scale * theta.cos(), scale * theta.sin()]
        })
        .collect();
    let refs: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    let f = Frame::from_real(&refs).expect("static frame");
    DualFramePair::new(f.clone(), f, &Tolerance::default()).expect("Parseval frame")
}

/// Triples a dual pair: `f_{j+N} = f_{j+2N} = f_j`, `g_{j+N} = −g_j`,
/// `g_{j+2N} = g_j`. Erasing the first `N` indices leaves `R_Λ = 0`.
pub fn tripled(pair: &DualFramePair) -> DualFramePair {
    let f = pair.synthesis().as_matrix();
    let g = pair.analysis().as_matrix();
    let big_f = stack(&[f.clone(), f.clone(), f.clone()]);
    let big_g = stack(&[g.clone(), -g.clone(), g.clone()]);
    DualFramePair::new(
        Frame::from_columns(big_f).expect("finite"),
        Frame::from_columns(big_g).expect("finite"),
        &Tolerance::default(),
    )
    .expect("tripling preserves duality")
}

fn stack(blocks: &[CMatrix]) -> CMatrix {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}
