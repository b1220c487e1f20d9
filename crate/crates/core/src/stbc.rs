//! Alamouti block coding and the reshapes between its three signal layouts.
//!
//! A burst of `N` blocks can be written as
//!
//! * `Ỹ = C·G + Z`, with `C` the `2N×2` stack of code matrices and `G` the
//!   2×2 physical channel (rows are time slots, columns receive antennas);
//! * `Y = H·S + N`, with `S` the `2×N` symbol matrix and `H` the `4×2`
//!   equivalent channel, where the second-slot samples appear conjugated.
//!
//! Both layouts carry the same numbers up to conjugation, so norms agree.

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::linalg::{c, Complex, ComplexMatrix};

/// The `2×N` matrix of symbol pairs, one column per Alamouti block.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix(ComplexMatrix);

impl SymbolMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.rows() != 2 || m.cols() == 0 {
            return Err(Error::DimensionMismatch {
                op: "SymbolMatrix::new",
                lhs: m.shape(),
                rhs: (2, 1),
            });
        }
        Ok(Self(m))
    }

    /// Packs a serial symbol stream `s1, s2, s3, ...` into blocks.
    pub fn from_stream(symbols: &[Complex]) -> Result<Self> {
        if symbols.is_empty() || !symbols.len().is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "symbol stream length {} is not a positive even number",
                symbols.len()
            )));
        }
        let n = symbols.len() / 2;
        Self::new(ComplexMatrix::from_fn(2, n, |i, j| symbols[2 * j + i]))
    }

    pub fn random<R: rand::Rng + ?Sized>(
        cons: &Constellation,
        blocks: usize,
        rng: &mut R,
    ) -> Result<Self> {
        Self::from_stream(&cons.random_symbols(2 * blocks, rng))
    }

    pub fn blocks(&self) -> usize {
        self.0.cols()
    }

    pub fn block(&self, n: usize) -> (Complex, Complex) {
        (self.0[(0, n)], self.0[(1, n)])
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// The 2×2 code matrix `[[s1, s2], [-s2*, s1*]]`.
pub fn encode_block(s1: Complex, s2: Complex) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[[s1, s2], [-s2.conj(), s1.conj()]])
}

/// Vertical stack of the code matrices of every block (`2N×2`).
pub fn stack_codes(s: &SymbolMatrix) -> ComplexMatrix {
    let n = s.blocks();
    let mut out = ComplexMatrix::zeros(2 * n, 2);
    for k in 0..n {
        let (s1, s2) = s.block(k);
        out[(2 * k, 0)] = s1;
        out[(2 * k, 1)] = s2;
        out[(2 * k + 1, 0)] = -s2.conj();
        out[(2 * k + 1, 1)] = s1.conj();
    }
    out
}

/// The `4×2` equivalent channel built from `G = [[h11, h12], [h21, h22]]`.
pub fn equivalent_channel(g: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(g.shape(), (2, 2));
    let (h11, h12, h21, h22) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    ComplexMatrix::from_rows(&[
        [h11, h21],
        [h21.conj(), -h11.conj()],
        [h12, h22],
        [h22.conj(), -h12.conj()],
    ])
}

/// One received burst in both layouts. The two matrices always describe the
/// same samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBurst {
    /// `4×N`, column `n` is `[y11, y12*, y21, y22*]`.
    pub y: ComplexMatrix,
    /// `2N×2`, the stacked per-block matrices `Ỹ(n)`.
    pub y_tilde: ComplexMatrix,
}

impl ReceivedBurst {
    pub fn from_stacked(y_tilde: ComplexMatrix) -> Result<Self> {
        let y = stacked_to_equivalent(&y_tilde)?;
        Ok(Self { y, y_tilde })
    }

    pub fn from_equivalent(y: ComplexMatrix) -> Result<Self> {
        let y_tilde = equivalent_to_stacked(&y)?;
        Ok(Self { y, y_tilde })
    }

    pub fn blocks(&self) -> usize {
        self.y.cols()
    }
}

/// Assembles a burst from the per-block 2×2 receive matrices `Ỹ(n)`.
pub fn stack_received(blocks: &[ComplexMatrix]) -> Result<ReceivedBurst> {
    if blocks.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one block is required".into(),
        ));
    }
    let mut y_tilde = ComplexMatrix::zeros(2 * blocks.len(), 2);
    for (n, b) in blocks.iter().enumerate() {
        if b.shape() != (2, 2) {
            return Err(Error::DimensionMismatch {
                op: "stack_received",
                lhs: b.shape(),
                rhs: (2, 2),
            });
        }
        for i in 0..2 {
            for j in 0..2 {
                y_tilde[(2 * n + i, j)] = b[(i, j)];
            }
        }
    }
    ReceivedBurst::from_stacked(y_tilde)
}

/// `Ỹ (2N×2) → Y (4×N)`.
pub fn stacked_to_equivalent(y_tilde: &ComplexMatrix) -> Result<ComplexMatrix> {
    if y_tilde.cols() != 2 || y_tilde.rows() == 0 || !y_tilde.rows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            op: "stacked_to_equivalent",
            lhs: y_tilde.shape(),
            rhs: (2, 2),
        });
    }
    let n = y_tilde.rows() / 2;
    Ok(ComplexMatrix::from_fn(4, n, |i, k| {
        let (slot, ant) = (i % 2, i / 2);
        let v = y_tilde[(2 * k + slot, ant)];
        if slot == 1 {
            v.conj()
        } else {
            v
        }
    }))
}

/// `Y (4×N) → Ỹ (2N×2)`.
pub fn equivalent_to_stacked(y: &ComplexMatrix) -> Result<ComplexMatrix> {
    if y.rows() != 4 || y.cols() == 0 {
        return Err(Error::DimensionMismatch {
            op: "equivalent_to_stacked",
            lhs: y.shape(),
            rhs: (4, 1),
        });
    }
    Ok(ComplexMatrix::from_fn(2 * y.cols(), 2, |r, ant| {
        let (k, slot) = (r / 2, r % 2);
        let v = y[(2 * ant + slot, k)];
        if slot == 1 {
            v.conj()
        } else {
            v
        }
    }))
}

/// A right multiplication `C(s) ↦ C(s)·U` by an Alamouti-form unitary
/// `U = [[u1, u2], [-u2*, u1*]]`, applied to every block of a burst.
///
/// If `U` maps the alphabet pairs onto themselves, the pair `(U⁻¹G, S·U)`
/// produces exactly the same received signal as `(G, S)`, so blind detection
/// can only recover `S` up to such a transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTransform {
    pub u1: Complex,
    pub u2: Complex,
}

impl BlockTransform {
    pub const IDENTITY: BlockTransform = BlockTransform {
        u1: Complex::new(1.0, 0.0),
        u2: Complex::new(0.0, 0.0),
    };

    #[inline]
    pub fn apply(&self, s1: Complex, s2: Complex) -> (Complex, Complex) {
        (
            s1 * self.u1 - s2 * self.u2.conj(),
            s1 * self.u2 + s2 * self.u1.conj(),
        )
    }

    pub fn matrix(&self) -> ComplexMatrix {
        encode_block(self.u1, self.u2)
    }
}

/// Symbol and bit errors of a blind decision after the best ambiguity fix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    pub transform: usize,
    pub symbol_errors: usize,
    pub bit_errors: usize,
}

/// All block transforms that leave the Alamouti-coded alphabet invariant.
///
/// Always contains the identity (first) and the sign flip. BPSK yields four
/// elements since `(s1, s2) ↦ (-s2, s1)` is also invisible at the receiver.
#[derive(Debug, Clone)]
pub struct AmbiguityGroup {
    transforms: Vec<BlockTransform>,
}

impl AmbiguityGroup {
    const MATCH_TOL: f64 = 1e-9;

    pub fn new(cons: &Constellation) -> Self {
        let pts = cons.points();
        let pairs: Vec<(Complex, Complex)> = pts
            .iter()
            .flat_map(|&a| pts.iter().map(move |&b| (a, b)))
            .collect();
        let (r1, r2) = (pts[0], pts[pts.len() - 1]);
        let energy = r1.norm_sqr() + r2.norm_sqr();
        let reference_h = encode_block(r1, r2).hermitian();

        let on_alphabet = |z: Complex| (cons.slice(z) - z).norm() < Self::MATCH_TOL;
        let mut transforms = vec![BlockTransform::IDENTITY];
        for &(t1, t2) in &pairs {
            // U = C(ref)⁻¹ C(target) = C(ref)ᴴ C(target) / ‖ref‖²
            let u = reference_h
                .matmul(&encode_block(t1, t2))
                .expect("2x2 product")
                .scale_real(1.0 / energy);
            let t = BlockTransform {
                u1: u[(0, 0)],
                u2: u[(0, 1)],
            };
            let is_identity =
                (t.u1 - c(1.0, 0.0)).norm() < Self::MATCH_TOL && t.u2.norm() < Self::MATCH_TOL;
            if is_identity {
                continue;
            }
            let closed = pairs.iter().all(|&(s1, s2)| {
                let (a, b) = t.apply(s1, s2);
                on_alphabet(a) && on_alphabet(b)
            });
            if closed {
                transforms.push(t);
            }
        }
        Self { transforms }
    }

    pub fn transforms(&self) -> &[BlockTransform] {
        &self.transforms
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    pub fn apply(&self, index: usize, s: &SymbolMatrix) -> SymbolMatrix {
        let t = self.transforms[index];
        let m = s.as_matrix();
        let mut out = m.clone();
        for k in 0..m.cols() {
            let (a, b) = t.apply(m[(0, k)], m[(1, k)]);
            out[(0, k)] = a;
            out[(1, k)] = b;
        }
        SymbolMatrix(out)
    }

    /// Picks the transform of `s_hat` with the fewest symbol mismatches
    /// against `s_true` (first one on ties) and reports its bit errors too.
    pub fn align(
        &self,
        cons: &Constellation,
        s_hat: &SymbolMatrix,
        s_true: &SymbolMatrix,
    ) -> Alignment {
        assert_eq!(s_hat.blocks(), s_true.blocks(), "block count mismatch");
        let truth: Vec<usize> = s_true
            .as_matrix()
            .as_slice()
            .iter()
            .map(|&z| cons.nearest_index(z))
            .collect();
        let labels = cons.labels();
        let n = s_hat.blocks();
        let mut best = Alignment {
            transform: 0,
            symbol_errors: usize::MAX,
            bit_errors: 0,
        };
        for (ti, t) in self.transforms.iter().enumerate() {
            let mut sym = 0;
            let mut bits = 0;
            for k in 0..n {
                let (a, b) = s_hat.block(k);
                let (a, b) = t.apply(a, b);
                for (row, z) in [a, b].into_iter().enumerate() {
                    let got = cons.nearest_index(z);
                    let want = truth[row * n + k];
                    if got != want {
                        sym += 1;
                        bits += (labels[got] ^ labels[want]).count_ones() as usize;
                    }
                }
            }
            if sym < best.symbol_errors {
                best = Alignment {
                    transform: ti,
                    symbol_errors: sym,
                    bit_errors: bits,
                };
            }
        }
        best
    }
}

/// Symbol and bit errors without any ambiguity correction.
pub fn raw_errors(
    cons: &Constellation,
    s_hat: &SymbolMatrix,
    s_true: &SymbolMatrix,
) -> (usize, usize) {
    let labels = cons.labels();
    s_hat
        .as_matrix()
        .as_slice()
        .iter()
        .zip(s_true.as_matrix().as_slice())
        .fold((0, 0), |(sym, bits), (&a, &b)| {
            let (ia, ib) = (cons.nearest_index(a), cons.nearest_index(b));
            if ia == ib {
                (sym, bits)
            } else {
                (
                    sym + 1,
                    bits + (labels[ia] ^ labels[ib]).count_ones() as usize,
                )
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Modulation;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(x: f64) -> Complex {
        c(x, 0.0)
    }

    fn gaussian_g(rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        a.shape() == b.shape()
            && a.as_slice()
                .iter()
                .zip(b.as_slice())
                .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn encode_bpsk_block() {
        let expected = ComplexMatrix::from_real_rows(&[[1.0, -1.0], [1.0, 1.0]]);
        assert_eq!(encode_block(r(1.0), r(-1.0)), expected);
        assert_eq!(encode_block(r(0.0), r(0.0)), ComplexMatrix::zeros(2, 2));
    }

    #[test]
    fn code_matrix_is_scaled_unitary() {
        let qpsk = Modulation::Qpsk.constellation();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let s = qpsk.random_symbols(2, &mut rng);
            let cm = encode_block(s[0], s[1]);
            let gram = cm.hermitian().matmul(&cm).unwrap();
            let k = s[0].norm_sqr() + s[1].norm_sqr();
            assert!(close(
                &gram,
                &ComplexMatrix::identity(2).scale_real(k),
                1e-14
            ));
        }
    }

    #[test]
    fn stacking_examples() {
        let s1 = SymbolMatrix::new(ComplexMatrix::from_real_rows(&[[1.0], [-1.0]])).unwrap();
        assert_eq!(stack_codes(&s1), encode_block(r(1.0), r(-1.0)));

        let s =
            SymbolMatrix::new(ComplexMatrix::from_real_rows(&[[1.0, 1.0], [1.0, -1.0]])).unwrap();
        let expected =
            ComplexMatrix::from_real_rows(&[[1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]]);
        assert_eq!(stack_codes(&s), expected);
    }

    #[test]
    fn stacked_gram_is_norm_times_identity() {
        let qam = Modulation::Qam16.constellation();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in 1..12 {
            let s = SymbolMatrix::random(&qam, n, &mut rng).unwrap();
            let cm = stack_codes(&s);
            let gram = cm.hermitian().matmul(&cm).unwrap();
            let k = s.as_matrix().frobenius_sq();
            assert!(close(
                &gram,
                &ComplexMatrix::identity(2).scale_real(k),
                1e-12 * (1.0 + k)
            ));
        }
    }

    #[test]
    fn equivalent_channel_examples() {
        let h = equivalent_channel(&ComplexMatrix::identity(2));
        let expected =
            ComplexMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [1.0, 0.0]]);
        assert_eq!(h, expected);
        assert_eq!(
            equivalent_channel(&ComplexMatrix::zeros(2, 2)),
            ComplexMatrix::zeros(4, 2)
        );
    }

    #[test]
    fn equivalent_channel_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let g = gaussian_g(&mut rng);
            let h = equivalent_channel(&g);
            let k = g.frobenius_sq();
            let diff = h
                .hermitian()
                .matmul(&h)
                .unwrap()
                .sub(&ComplexMatrix::identity(2).scale_real(k))
                .unwrap();
            assert!(diff.frobenius_sq().sqrt() <= 1e-12 * (1.0 + k));
        }
    }

    #[test]
    fn received_single_block() {
        // Ỹ(1) = C(1)·I with s = (1, 1); the second-slot samples get conjugated.
        let cm = encode_block(r(1.0), r(1.0));
        let rx = stack_received(std::slice::from_ref(&cm)).unwrap();
        assert_eq!(rx.y_tilde, cm);
        let expected = ComplexMatrix::from_real_rows(&[[1.0], [-1.0], [1.0], [1.0]]);
        assert_eq!(rx.y, expected);
        // same column through the equivalent-channel route
        let hs = equivalent_channel(&ComplexMatrix::identity(2))
            .matmul(&ComplexMatrix::from_real_rows(&[[1.0], [1.0]]))
            .unwrap();
        assert_eq!(rx.y, hs);

        let zero = stack_received(&[ComplexMatrix::zeros(2, 2)]).unwrap();
        assert_eq!(zero.y.frobenius_sq(), 0.0);
        assert_eq!(zero.y_tilde.frobenius_sq(), 0.0);
        assert!(stack_received(&[]).is_err());
    }

    #[test]
    fn model_consistency_between_layouts() {
        let qpsk = Modulation::Qpsk.constellation();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for n in 1..10 {
            let g = gaussian_g(&mut rng);
            let s = SymbolMatrix::random(&qpsk, n, &mut rng).unwrap();
            let y_direct = equivalent_channel(&g).matmul(s.as_matrix()).unwrap();
            let y_tilde = stack_codes(&s).matmul(&g).unwrap();
            let rx = ReceivedBurst::from_stacked(y_tilde).unwrap();
            assert!(close(&rx.y, &y_direct, 1e-12));
        }
    }

    #[test]
    fn ambiguity_group_sizes() {
        let sizes: Vec<usize> = [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16]
            .iter()
            .map(|m| AmbiguityGroup::new(&m.constellation()).len())
            .collect();
        assert_eq!(sizes, vec![4, 8, 8]);
    }

    #[test]
    fn ambiguity_group_is_closed_and_invisible() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for m in [Modulation::Bpsk, Modulation::Qpsk, Modulation::Qam16] {
            let cons = m.constellation();
            let group = AmbiguityGroup::new(&cons);
            assert_eq!(group.transforms()[0], BlockTransform::IDENTITY);
            // contains the sign flip
            assert!(group
                .transforms()
                .iter()
                .any(|t| (t.u1 + c(1.0, 0.0)).norm() < 1e-12 && t.u2.norm() < 1e-12));
            for a in group.transforms() {
                for b in group.transforms() {
                    let ab = a.matrix().matmul(&b.matrix()).unwrap();
                    assert!(group
                        .transforms()
                        .iter()
                        .any(|t| close(&t.matrix(), &ab, 1e-9)));
                }
            }
            // (U⁻¹G, S·U) yields the same received samples as (G, S)
            let g = gaussian_g(&mut rng);
            let s = SymbolMatrix::random(&cons, 6, &mut rng).unwrap();
            let y = stack_codes(&s).matmul(&g).unwrap();
            for i in 0..group.len() {
                let u = group.transforms()[i].matrix();
                let g2 = u.hermitian().matmul(&g).unwrap();
                let y2 = stack_codes(&group.apply(i, &s)).matmul(&g2).unwrap();
                assert!(close(&y, &y2, 1e-12));
            }
        }
    }

    #[test]
    fn scalar_quarter_turn_is_not_a_qpsk_ambiguity() {
        let cons = Modulation::Qpsk.constellation();
        let group = AmbiguityGroup::new(&cons);
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let s = SymbolMatrix::random(&cons, 20, &mut rng).unwrap();
        let rotated = SymbolMatrix::new(s.as_matrix().scale(c(0.0, 1.0))).unwrap();
        assert!(group.align(&cons, &rotated, &s).symbol_errors > 0);
    }

    #[test]
    fn align_examples() {
        let cons = Modulation::Bpsk.constellation();
        let group = AmbiguityGroup::new(&cons);
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let s = SymbolMatrix::random(&cons, 20, &mut rng).unwrap();
        let a = group.align(&cons, &s, &s);
        assert_eq!((a.transform, a.symbol_errors, a.bit_errors), (0, 0, 0));
        let swapped = group.apply(2, &s);
        assert_eq!(group.align(&cons, &swapped, &s).symbol_errors, 0);
        assert!(raw_errors(&cons, &swapped, &s).0 > 0);
    }

    proptest! {
        #[test]
        fn layouts_round_trip_and_keep_norm(
            vals in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4..40)
        ) {
            let n = vals.len() / 4;
            prop_assume!(n >= 1);
            let y = ComplexMatrix::from_fn(4, n, |i, j| { let (a, b) = vals[i * n + j]; c(a, b) });
            let rx = ReceivedBurst::from_equivalent(y.clone()).unwrap();
            prop_assert_eq!(stacked_to_equivalent(&rx.y_tilde).unwrap(), y);
            prop_assert!((rx.y.frobenius_sq() - rx.y_tilde.frobenius_sq()).abs() < 1e-9);
        }
    }
}
