//! Generating functions and their kernels `V(q, p) = <phi, phi_{q,p}>` with
//! `phi_{q,p}(x) = e^{2 pi i p x} phi(x - q)`.

mod canonical;
mod gaussian;
mod painless;
mod sampled;
mod table;
mod tightness;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use canonical::{canonical_tight, GridParams};
pub use gaussian::{GaussAtom, GaussianWindow};
pub use painless::PainlessWindow;
pub use sampled::SampledWindow;
pub(crate) use sampled::{bin_frequency, fft, ifft};
pub use table::{condition_phi_sum, kernel_table, kernel_table_with, KernelTable, TableOptions};
pub use tightness::{verify_tightness, TestFunction, TightnessReport};

use crate::error::{Error, Result};
use crate::lattice::Lattice2D;

#[derive(Debug, Clone, PartialEq)]
pub enum WindowKind {
    Painless(PainlessWindow),
    Gaussian(GaussianWindow),
    Sampled(SampledWindow),
}

/// A window together with its squared norm and, if known, the lattice on
/// which its Gabor system is a tight frame with bound 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    kind: WindowKind,
    norm_sq: f64,
    tight_on: Option<Lattice2D>,
}

impl Window {
    pub fn kind(&self) -> &WindowKind {
        &self.kind
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn tight_lattice(&self) -> Option<&Lattice2D> {
        self.tight_on.as_ref()
    }

    /// True if the window carries a tightness certificate for `lattice`.
    pub fn is_tight_on(&self, lattice: &Lattice2D) -> bool {
        self.tight_on.as_ref().is_some_and(|t| t.approx_eq(lattice, 1e-12))
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            WindowKind::Painless(_) => "painless",
            WindowKind::Gaussian(_) => "gaussian",
            WindowKind::Sampled(_) => "sampled",
        }
    }

    /// `phi(x)`. Sampled windows are evaluated by band-limited interpolation.
    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.kind {
            WindowKind::Painless(w) => Complex64::new(w.eval(x), 0.0),
            WindowKind::Gaussian(w) => w.eval(x),
            WindowKind::Sampled(w) => w.interpolate(x),
        }
    }

    /// Interval outside which `|phi|` is negligible (exactly zero for painless windows).
    pub fn effective_support(&self) -> (f64, f64) {
        match &self.kind {
            WindowKind::Painless(w) => (0.0, w.support_len()),
            WindowKind::Gaussian(w) => w.effective_support(),
            WindowKind::Sampled(w) => w.effective_support(),
        }
    }

    /// `<phi, phi_{q,p}> = int phi(x) conj(e^{2 pi i p x} phi(x - q)) dx`.
    pub fn kernel_value(&self, q: f64, p: f64) -> Result<Complex64> {
        match &self.kind {
            WindowKind::Painless(w) => w.kernel_value(q, p),
            WindowKind::Gaussian(w) => Ok(w.kernel_value(q, p)),
            WindowKind::Sampled(w) => Ok(w.kernel_value(q, p)),
        }
    }

    pub fn to_spec(&self) -> WindowSpec {
        match &self.kind {
            WindowKind::Painless(w) => WindowSpec::Painless { a: w.a, b: w.b, support: w.l, ramp: w.ramp },
            WindowKind::Gaussian(w) => WindowSpec::Gaussian { w: [w.w.re, w.w.im], norm_sq: self.norm_sq },
            WindowKind::Sampled(w) => WindowSpec::Sampled {
                x0: w.x0(),
                step: w.step(),
                re: w.values().iter().map(|z| z.re).collect(),
                im: w.values().iter().map(|z| z.im).collect(),
                tight_on: self.tight_on.clone(),
            },
        }
    }

    pub(crate) fn from_parts(kind: WindowKind, norm_sq: f64, tight_on: Option<Lattice2D>) -> Self {
        Window { kind, norm_sq, tight_on }
    }

    /// Drops any tightness certificate.
    pub fn without_certificate(mut self) -> Self {
        self.tight_on = None;
        self
    }
}

/// Painless bump on `a Z x b Z`: support `[0, a + ramp]` inside `[0, support]`,
/// with `support <= 1/b`. The Gabor system is tight with bound 1.
pub fn painless_window(a: f64, b: f64, support: f64, ramp: f64) -> Result<Window> {
    let w = PainlessWindow::new(a, b, support, ramp)?;
    let lattice = Lattice2D::rectangular(a, b)?;
    let norm_sq = w.norm_sq();
    Ok(Window::from_parts(WindowKind::Painless(w), norm_sq, Some(lattice)))
}

/// `phi(x) = N exp(i pi w x^2)` with `||phi||^2 = norm_sq`.
pub fn gaussian_window(w: Complex64, norm_sq: f64) -> Result<Window> {
    let g = GaussianWindow::new(w, norm_sq)?;
    Ok(Window::from_parts(WindowKind::Gaussian(g), norm_sq, None))
}

/// Samples `values[j] = phi(x0 + j * step)` of a function periodized over `len * step`.
pub fn sampled_window(x0: f64, step: f64, values: Vec<Complex64>) -> Result<Window> {
    let s = SampledWindow::new(x0, step, values)?;
    let norm_sq = s.norm_sq();
    Ok(Window::from_parts(WindowKind::Sampled(s), norm_sq, None))
}

/// Serialized window description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum WindowSpec {
    Painless {
        a: f64,
        b: f64,
        support: f64,
        ramp: f64,
    },
    Gaussian {
        /// `[Re w, Im w]`.
        w: [f64; 2],
        #[serde(default = "one")]
        norm_sq: f64,
    },
    Sampled {
        x0: f64,
        step: f64,
        re: Vec<f64>,
        im: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tight_on: Option<Lattice2D>,
    },
}

fn one() -> f64 {
    1.0
}

impl WindowSpec {
    pub fn build(&self) -> Result<Window> {
        match self {
            WindowSpec::Painless { a, b, support, ramp } => painless_window(*a, *b, *support, *ramp),
            WindowSpec::Gaussian { w, norm_sq } => gaussian_window(Complex64::new(w[0], w[1]), *norm_sq),
            WindowSpec::Sampled { x0, step, re, im, tight_on } => {
                if re.len() != im.len() {
                    return Err(Error::ParameterViolation("sample arrays differ in length".into()));
                }
                let values = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
                let mut w = sampled_window(*x0, *step, values)?;
                w.tight_on = tight_on.clone();
                Ok(w)
            }
        }
    }
}
