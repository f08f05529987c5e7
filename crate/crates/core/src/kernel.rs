//! Spectral smoothing kernels supported on [−π, π] with (2π)⁻¹∫K = 1.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SpecError};
use crate::quadrature::piecewise_simpson;

const INNER_TOL: f64 = 1e-12;
const OUTER_TOL: f64 = 1e-10;

type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// K(x) = (3/2)(1 − (x/π)²).
    BartlettPriestley,
    /// K(x) = 2(1 − |x|/π).
    Triangular,
    Custom(KernelFn),
}

/// Integrals of the kernel that enter the centering and variance of the test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConstants {
    /// ∫ K²(x) dx over [−π, π].
    pub int_k2: f64,
    /// ∫ (K∗K)(y) dy over [−2π, 2π]; equals (∫K)² = 4π².
    pub int_kk: f64,
    /// ∫ (K∗K)²(y) dy over [−2π, 2π].
    pub int_kk2: f64,
}

struct Inner {
    name: String,
    shape: Shape,
    constants: KernelConstants,
}

/// A smoothing kernel with its constants computed once at construction.
/// Cloning is cheap.
#[derive(Clone)]
pub struct Kernel {
    inner: Arc<Inner>,
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.inner.name)
            .field("constants", &self.inner.constants)
            .finish()
    }
}

impl Kernel {
    pub fn bartlett_priestley() -> Self {
        Self::build("bartlett-priestley".into(), Shape::BartlettPriestley)
    }

    pub fn triangular() -> Self {
        Self::build("triangular".into(), Shape::Triangular)
    }

    /// A user-supplied kernel. It is evaluated only on [−π, π] and must be
    /// symmetric, bounded and normalised so that (2π)⁻¹∫K = 1.
    pub fn custom<F>(name: impl Into<String>, k: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let k: KernelFn = Arc::new(k);
        for i in 0..=1000 {
            let x = PI * i as f64 / 1000.0;
            let (a, b) = (k(x), k(-x));
            if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(SpecError::invalid(format!(
                    "kernel {name} is not symmetric at {x}"
                )));
            }
        }
        let kk = k.clone();
        let mass = piecewise_simpson(move |x| kk(x), -PI, PI, &[0.0], INNER_TOL) / (2.0 * PI);
        if (mass - 1.0).abs() > 1e-8 {
            return Err(SpecError::invalid(format!(
                "kernel {name} has (2π)⁻¹∫K = {mass}, expected 1"
            )));
        }
        Ok(Self::build(name, Shape::Custom(k)))
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "bartlett-priestley" | "bp" | "epanechnikov" => Ok(Self::bartlett_priestley()),
            "triangular" | "bartlett" => Ok(Self::triangular()),
            other => Err(SpecError::invalid(format!(
                "unknown kernel {other:?}; expected bartlett-priestley or triangular"
            ))),
        }
    }

    fn build(name: String, shape: Shape) -> Self {
        let placeholder = KernelConstants {
            int_k2: f64::NAN,
            int_kk: f64::NAN,
            int_kk2: f64::NAN,
        };
        let mut kernel = Kernel {
            inner: Arc::new(Inner {
                name: name.clone(),
                shape: shape.clone(),
                constants: placeholder,
            }),
        };
        let constants = kernel.integrate_constants();
        kernel.inner = Arc::new(Inner {
            name,
            shape,
            constants,
        });
        kernel
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// K(x), zero outside [−π, π].
    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() > PI {
            return 0.0;
        }
        match &self.inner.shape {
            Shape::BartlettPriestley => {
                let r = x / PI;
                1.5 * (1.0 - r * r)
            }
            Shape::Triangular => 2.0 * (1.0 - x.abs() / PI),
            Shape::Custom(k) => k(x),
        }
    }

    /// K_h(x) = h⁻¹ K(x/h).
    pub fn scaled(&self, x: f64, bandwidth: f64) -> f64 {
        self.eval(x / bandwidth) / bandwidth
    }

    /// Σ_k K_h(x + 2πk), the kernel folded onto the circle.
    pub fn wrapped(&self, x: f64, bandwidth: f64) -> f64 {
        let two_pi = 2.0 * PI;
        let reach = PI * bandwidth;
        let lo = ((-reach - x) / two_pi).ceil() as i64;
        let hi = ((reach - x) / two_pi).floor() as i64;
        (lo..=hi)
            .map(|k| self.scaled(x + two_pi * k as f64, bandwidth))
            .sum()
    }

    /// (K∗K)(y) = ∫ K(x) K(y − x) dx.
    pub fn self_convolution(&self, y: f64) -> f64 {
        if y.abs() >= 2.0 * PI {
            return 0.0;
        }
        let lo = (-PI).max(y - PI);
        let hi = PI.min(y + PI);
        piecewise_simpson(
            |x| self.eval(x) * self.eval(y - x),
            lo,
            hi,
            &[0.0, y],
            INNER_TOL,
        )
    }

    pub fn constants(&self) -> KernelConstants {
        self.inner.constants
    }

    fn integrate_constants(&self) -> KernelConstants {
        let breaks = [-PI, 0.0, PI];
        let int_k2 = piecewise_simpson(|x| self.eval(x).powi(2), -PI, PI, &[0.0], INNER_TOL);
        let int_kk = piecewise_simpson(
            |y| self.self_convolution(y),
            -2.0 * PI,
            2.0 * PI,
            &breaks,
            OUTER_TOL,
        );
        let int_kk2 = piecewise_simpson(
            |y| self.self_convolution(y).powi(2),
            -2.0 * PI,
            2.0 * PI,
            &breaks,
            OUTER_TOL,
        );
        KernelConstants {
            int_k2,
            int_kk,
            int_kk2,
        }
    }
}

/// Kernel constants together with an evaluator for K∗K.
pub fn kernel_constants(kernel: &Kernel) -> (KernelConstants, impl Fn(f64) -> f64 + '_) {
    (kernel.constants(), move |y| kernel.self_convolution(y))
}
