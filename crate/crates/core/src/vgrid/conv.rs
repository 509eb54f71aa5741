//! Linear (non-periodic) convolution of grid fields with kernel components by
//! zero-padded FFT on a `(2n)³` box.

use super::{GridField, VelocityGrid};
use crate::kernel::{eval_a, eval_b, eval_c, CollisionKernel, Vec3};
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// A scalar component of the Landau kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    A(usize, usize),
    B(usize),
    C,
}

/// The components entering `Q`: the six `a_ij` with `i ≤ j`, then `c`.
pub const COMPONENTS: [Component; 7] = [
    Component::A(0, 0),
    Component::A(0, 1),
    Component::A(0, 2),
    Component::A(1, 1),
    Component::A(1, 2),
    Component::A(2, 2),
    Component::C,
];

impl Component {
    fn eval(&self, z: &Vec3, k: &CollisionKernel) -> f64 {
        match *self {
            Component::A(i, j) => eval_a(z, k)[i][j],
            Component::B(i) => eval_b(z, k)[i],
            Component::C => eval_c(z, k),
        }
    }
}

/// `a_ij * g` for the six pairs and `c * g` on the grid nodes.
#[derive(Clone, Debug)]
pub struct ConvolvedFields {
    pub a: [Vec<f64>; 6],
    pub c: Vec<f64>,
}

type Spectrum = Vec<Complex<f64>>;

/// Transform of a kernel component. Every component has a definite parity in
/// each coordinate, so its spectrum is purely real or purely imaginary.
#[derive(Clone, Debug)]
struct KernelSpectrum {
    values: Vec<f64>,
    imaginary: bool,
}

/// FFT plans and cached kernel spectra for one grid and kernel.
#[derive(Clone)]
pub struct Convolver {
    grid: VelocityGrid,
    kernel: CollisionKernel,
    m: usize,
    mh: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    spectra: Vec<KernelSpectrum>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("grid", &self.grid).field("m", &self.m).finish()
    }
}

/// Moves `rows` rows of length `mh` (row `t` starting at `start(t)`) into
/// column-major lines of length `m` inside `buf`.
#[inline]
fn gather(buf: &mut [Complex<f64>], m: usize, mh: usize, src: &[Complex<f64>], rows: usize, start: impl Fn(usize) -> usize) {
    for t in 0..rows {
        let row = &src[start(t)..start(t) + mh];
        for (k, x) in row.iter().enumerate() {
            buf[k * m + t] = *x;
        }
    }
}

#[inline]
fn scatter(buf: &[Complex<f64>], m: usize, mh: usize, dst: &mut [Complex<f64>], rows: usize, start: impl Fn(usize) -> usize) {
    for t in 0..rows {
        let s = start(t);
        let row = &mut dst[s..s + mh];
        for (k, x) in row.iter_mut().enumerate() {
            *x = buf[k * m + t];
        }
    }
}

impl Convolver {
    pub fn new(grid: VelocityGrid, kernel: CollisionKernel) -> Self {
        let m = 2 * grid.n();
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        let mut conv = Self {
            grid,
            kernel,
            m,
            mh: m / 2 + 1,
            r2c: rp.plan_fft_forward(m),
            c2r: rp.plan_fft_inverse(m),
            fwd: cp.plan_fft_forward(m),
            inv: cp.plan_fft_inverse(m),
            spectra: Vec::new(),
        };
        conv.spectra = COMPONENTS.iter().map(|c| conv.kernel_spectrum(c)).collect();
        conv
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &CollisionKernel {
        &self.kernel
    }

    /// Offset of wrapped index `p` on the difference lattice; the plane `p = n`
    /// is never reached by a node difference and is left out.
    #[inline]
    fn offset(&self, p: usize) -> Option<f64> {
        let n = self.grid.n();
        match p.cmp(&n) {
            std::cmp::Ordering::Less => Some(p as f64 * self.grid.h()),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some((p as f64 - self.m as f64) * self.grid.h()),
        }
    }

    /// Kernel sampled on the difference lattice, scaled by `h³/m³`, transformed.
    fn kernel_spectrum(&self, comp: &Component) -> KernelSpectrum {
        let (m, mh) = (self.m, self.mh);
        let mut stage = vec![Complex::new(0.0, 0.0); m * m * mh];
        let mut row = vec![0.0; m];
        let mut out = vec![Complex::new(0.0, 0.0); mh];
        let mut scratch = self.r2c.make_scratch_vec();
        for p in 0..m {
            for q in 0..m {
                let (Some(x), Some(y)) = (self.offset(p), self.offset(q)) else { continue };
                for (r, v) in row.iter_mut().enumerate() {
                    *v = self.offset(r).map_or(0.0, |z| comp.eval(&[x, y, z], &self.kernel));
                }
                self.r2c.process_with_scratch(&mut row, &mut out, &mut scratch).expect("r2c");
                stage[(p * m + q) * mh..(p * m + q + 1) * mh].copy_from_slice(&out);
            }
        }
        let mut spec = vec![Complex::new(0.0, 0.0); m * m * mh];
        self.forward_axes(&mut stage, &mut spec, m);
        let scale = self.grid.cell() / (m * m * m) as f64;
        let odd = match comp {
            Component::B(_) => true,
            Component::A(..) | Component::C => false,
        };
        let values = spec.iter().map(|x| scale * if odd { x.im } else { x.re }).collect();
        KernelSpectrum { values, imaginary: odd }
    }

    /// Axis-1 and axis-0 forward passes. `stage` holds the first `rows` planes
    /// along axis 0 (the rest are zero); the full spectrum goes to `spec`.
    fn forward_axes(&self, stage: &mut [Complex<f64>], spec: &mut [Complex<f64>], rows: usize) {
        let (m, mh) = (self.m, self.mh);
        let mut buf = vec![Complex::new(0.0, 0.0); m * mh];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        let plane = m * mh;
        for i in 0..rows {
            let slab = &mut stage[i * plane..(i + 1) * plane];
            gather(&mut buf, m, mh, slab, m, |t| t * mh);
            self.fwd.process_with_scratch(&mut buf, &mut scratch);
            scatter(&buf, m, mh, slab, m, |t| t * mh);
        }
        for j in 0..m {
            buf.iter_mut().for_each(|x| *x = Complex::new(0.0, 0.0));
            gather(&mut buf, m, mh, stage, rows, |t| (t * m + j) * mh);
            self.fwd.process_with_scratch(&mut buf, &mut scratch);
            scatter(&buf, m, mh, spec, m, |t| (t * m + j) * mh);
        }
    }

    /// Transform of an `n³` field zero-padded to `m³`.
    fn forward(&self, g: &[f64]) -> Spectrum {
        let (n, m, mh) = (self.grid.n(), self.m, self.mh);
        let mut stage = vec![Complex::new(0.0, 0.0); n * m * mh];
        let mut row = vec![0.0; m];
        let mut out = vec![Complex::new(0.0, 0.0); mh];
        let mut scratch = self.r2c.make_scratch_vec();
        for i in 0..n {
            for j in 0..n {
                let src = &g[(i * n + j) * n..(i * n + j + 1) * n];
                if src.iter().all(|x| *x == 0.0) {
                    continue;
                }
                row[..n].copy_from_slice(src);
                row[n..].iter_mut().for_each(|x| *x = 0.0);
                self.r2c.process_with_scratch(&mut row, &mut out, &mut scratch).expect("r2c");
                let dst = (i * m + j) * mh;
                stage[dst..dst + mh].copy_from_slice(&out);
            }
        }
        let mut spec = vec![Complex::new(0.0, 0.0); m * m * mh];
        self.forward_axes(&mut stage, &mut spec, n);
        spec
    }

    /// Inverse transform of `spec · K` restricted to the `n³` output block;
    /// `kernel = None` means `K = 1`. `work` must hold `n·m·mh` values.
    fn inverse(&self, spec: &[Complex<f64>], kernel: Option<&KernelSpectrum>, work: &mut [Complex<f64>]) -> Vec<f64> {
        let (n, m, mh) = (self.grid.n(), self.m, self.mh);
        let plane = m * mh;
        let mut buf = vec![Complex::new(0.0, 0.0); m * mh];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.inv.get_inplace_scratch_len()];
        for j in 0..m {
            match kernel {
                None => gather(&mut buf, m, mh, spec, m, |t| (t * m + j) * mh),
                Some(ks) => {
                    for t in 0..m {
                        let s = (t * m + j) * mh;
                        let row = &spec[s..s + mh];
                        let kr = &ks.values[s..s + mh];
                        if ks.imaginary {
                            for (k, (x, w)) in row.iter().zip(kr).enumerate() {
                                buf[k * m + t] = Complex::new(-x.im * w, x.re * w);
                            }
                        } else {
                            for (k, (x, w)) in row.iter().zip(kr).enumerate() {
                                buf[k * m + t] = x * *w;
                            }
                        }
                    }
                }
            }
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            scatter(&buf, m, mh, work, n, |t| (t * m + j) * mh);
        }
        for i in 0..n {
            let slab = &mut work[i * plane..(i + 1) * plane];
            gather(&mut buf, m, mh, slab, m, |t| t * mh);
            self.inv.process_with_scratch(&mut buf, &mut scratch);
            scatter(&buf, m, mh, slab, n, |t| t * mh);
        }
        let mut out = vec![0.0; n * n * n];
        let mut row = vec![0.0; m];
        let mut inp = vec![Complex::new(0.0, 0.0); mh];
        let mut rscratch = self.c2r.make_scratch_vec();
        for i in 0..n {
            for j in 0..n {
                let src = (i * m + j) * mh;
                inp.copy_from_slice(&work[src..src + mh]);
                inp[0].im = 0.0;
                inp[mh - 1].im = 0.0;
                self.c2r.process_with_scratch(&mut inp, &mut row, &mut rscratch).expect("c2r");
                out[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(&row[..n]);
            }
        }
        out
    }

    fn work(&self) -> Spectrum {
        vec![Complex::new(0.0, 0.0); self.grid.n() * self.m * self.mh]
    }

    /// `(comp * g)(v)` at every node.
    pub fn convolve_kernel(&self, g: &GridField, comp: Component) -> GridField {
        let spec = self.forward(g.data());
        let mut work = self.work();
        let out = match COMPONENTS.iter().position(|c| *c == comp) {
            Some(q) => self.inverse(&spec, Some(&self.spectra[q]), &mut work),
            None => self.inverse(&spec, Some(&self.kernel_spectrum(&comp)), &mut work),
        };
        GridField::from_vec_unchecked(self.grid, out)
    }

    /// All seven components of `Q` for one field, sharing the forward transform.
    pub fn convolve_all(&self, g: &[f64]) -> ConvolvedFields {
        let spec = self.forward(g);
        let mut work = self.work();
        let mut outs: Vec<Vec<f64>> = self.spectra.iter().map(|k| self.inverse(&spec, Some(k), &mut work)).collect();
        let c = outs.pop().expect("c component");
        let a: [Vec<f64>; 6] = outs.try_into().expect("six a components");
        ConvolvedFields { a, c }
    }

    /// `Σ_q K_q * g_q` over the cached components, with one inverse transform.
    pub fn convolve_sum(&self, inputs: &[(usize, &[f64])]) -> Vec<f64> {
        let mut acc: Spectrum = vec![Complex::new(0.0, 0.0); self.m * self.m * self.mh];
        for (q, g) in inputs {
            let spec = self.forward(g);
            let ks = &self.spectra[*q];
            for ((a, s), k) in acc.iter_mut().zip(&spec).zip(&ks.values) {
                *a += if ks.imaginary { Complex::new(-s.im * k, s.re * k) } else { s * *k };
            }
        }
        let mut work = self.work();
        self.inverse(&acc, None, &mut work)
    }

    /// Kernel component sampled at lattice offset `(di, dj, dk)` (in cells).
    pub fn sample(&self, comp: Component, d: [isize; 3]) -> f64 {
        let h = self.grid.h();
        let z = [d[0] as f64 * h, d[1] as f64 * h, d[2] as f64 * h];
        comp.eval(&z, &self.kernel)
    }
}
