//! Dense building blocks: GEMM and the im2col/col2im pair for 3-D
//! convolutions.

/// `C = alpha * op(A) * op(B) + beta * C` for row-major buffers.
///
/// `a` is `m x k` (or `k x m` when `trans_a`), `b` is `k x n` (or `n x k`
/// when `trans_b`), `c` is `m x n`.
#[allow(clippy::too_many_arguments)]
pub fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: &[f64],
    trans_a: bool,
    b: &[f64],
    trans_b: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if trans_a { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if trans_b { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above bound every access made with these strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// Geometry of a zero-padded 3-D convolution over one sample
/// `[channels, T, H, W]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvGeom {
    pub channels: usize,
    pub kernel: usize,
    pub stride: [usize; 3],
    pub pad: usize,
    pub in_dims: [usize; 3],
    pub out_dims: [usize; 3],
}

impl ConvGeom {
    pub fn new(channels: usize, kernel: usize, stride: [usize; 3], in_dims: [usize; 3]) -> Self {
        let pad = kernel / 2;
        let out = |i: usize| (in_dims[i] + 2 * pad - kernel) / stride[i] + 1;
        Self {
            channels,
            kernel,
            stride,
            pad,
            in_dims,
            out_dims: [out(0), out(1), out(2)],
        }
    }

    pub fn in_len(&self) -> usize {
        self.in_dims.iter().product()
    }

    pub fn out_len(&self) -> usize {
        self.out_dims.iter().product()
    }

    /// Rows of the column matrix: `channels * kernel^3`.
    pub fn col_rows(&self) -> usize {
        self.channels * self.kernel.pow(3)
    }

    /// Visits every (column row, output position, input position) triple
    /// that lies inside the unpadded input.
    #[inline]
    fn for_each(&self, mut f: impl FnMut(usize, usize, usize)) {
        let k = self.kernel;
        let [it, ih, iw] = self.in_dims;
        let [ot, oh, ow] = self.out_dims;
        let [st, sh, sw] = self.stride;
        let p = self.pad as isize;
        let out_n = self.out_len();
        for c in 0..self.channels {
            for kt in 0..k {
                for ky in 0..k {
                    for kx in 0..k {
                        let row = ((c * k + kt) * k + ky) * k + kx;
                        for t in 0..ot {
                            let ti = (t * st) as isize - p + kt as isize;
                            if ti < 0 || ti >= it as isize {
                                continue;
                            }
                            for y in 0..oh {
                                let yi = (y * sh) as isize - p + ky as isize;
                                if yi < 0 || yi >= ih as isize {
                                    continue;
                                }
                                let in_base = ((c * it + ti as usize) * ih + yi as usize) * iw;
                                let out_base = row * out_n + (t * oh + y) * ow;
                                for x in 0..ow {
                                    let xi = (x * sw) as isize - p + kx as isize;
                                    if xi < 0 || xi >= iw as isize {
                                        continue;
                                    }
                                    f(out_base + x, in_base + xi as usize, row);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// Fills `cols` (`col_rows x out_len`) from `x` (`channels x in_len`).
    pub fn im2col(&self, x: &[f64], cols: &mut [f64]) {
        debug_assert_eq!(x.len(), self.channels * self.in_len());
        cols.fill(0.0);
        self.for_each(|ci, xi, _| cols[ci] = x[xi]);
    }

    /// Scatter-adds `cols` back onto `x`; the adjoint of [`Self::im2col`].
    pub fn col2im(&self, cols: &[f64], x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.channels * self.in_len());
        self.for_each(|ci, xi, _| x[xi] += cols[ci]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn naive_gemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool) -> Vec<f64> {
        let mut c = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                for l in 0..k {
                    let av = if ta { a[l * m + i] } else { a[i * k + l] };
                    let bv = if tb { b[j * k + l] } else { b[l * n + j] };
                    c[i * n + j] += av * bv;
                }
            }
        }
        c
    }

    #[test]
    fn gemm_matches_naive_for_all_transposes() {
        let mut rng = crate::rng::seeded(1, 0);
        let (m, k, n) = (5, 7, 3);
        let a: Vec<f64> = (0..m * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..k * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for ta in [false, true] {
            for tb in [false, true] {
                let mut c = vec![1.0; m * n];
                gemm(m, k, n, 1.0, &a, ta, &b, tb, 0.0, &mut c);
                for (x, y) in c.iter().zip(naive_gemm(m, k, n, &a, ta, &b, tb)) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    /// Direct strided convolution for one output channel with all-ones
    /// weights, compared against the column sums.
    #[test]
    fn im2col_matches_direct_convolution() {
        let mut rng = crate::rng::seeded(2, 0);
        let g = ConvGeom::new(2, 3, [2, 1, 2], [6, 5, 4]);
        assert_eq!(g.out_dims, [3, 5, 2]);
        let x: Vec<f64> = (0..2 * g.in_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..g.col_rows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut cols = vec![0.0; g.col_rows() * g.out_len()];
        g.im2col(&x, &mut cols);
        let mut y = vec![0.0; g.out_len()];
        gemm(1, g.col_rows(), g.out_len(), 1.0, &w, false, &cols, false, 0.0, &mut y);
        let [it, ih, iw] = g.in_dims;
        let [ot, oh, ow] = g.out_dims;
        for t in 0..ot {
            for yy in 0..oh {
                for xx in 0..ow {
                    let mut acc = 0.0;
                    for c in 0..2 {
                        for kt in 0..3 {
                            for ky in 0..3 {
                                for kx in 0..3 {
                                    let ti = (t * 2 + kt) as isize - 1;
                                    let yi = (yy + ky) as isize - 1;
                                    let xi = (xx * 2 + kx) as isize - 1;
                                    if ti < 0 || yi < 0 || xi < 0 || ti >= it as isize || yi >= ih as isize || xi >= iw as isize {
                                        continue;
                                    }
                                    let wi = ((c * 3 + kt) * 3 + ky) * 3 + kx;
                                    acc += w[wi] * x[((c * it + ti as usize) * ih + yi as usize) * iw + xi as usize];
                                }
                            }
                        }
                    }
                    assert!((y[(t * oh + yy) * ow + xx] - acc).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), c> == <x, col2im(c)>
        let mut rng = crate::rng::seeded(3, 0);
        let g = ConvGeom::new(3, 3, [1, 2, 2], [4, 6, 6]);
        let x: Vec<f64> = (0..3 * g.in_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..g.col_rows() * g.out_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut cols = vec![0.0; c.len()];
        g.im2col(&x, &mut cols);
        let lhs: f64 = cols.iter().zip(&c).map(|(a, b)| a * b).sum();
        let mut back = vec![0.0; x.len()];
        g.col2im(&c, &mut back);
        let rhs: f64 = x.iter().zip(&back).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-10);
    }
}
