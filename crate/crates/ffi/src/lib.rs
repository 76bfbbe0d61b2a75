//! C interface to the `rheoflow` library.
//!
//! Objects are exposed as opaque handles created by `rheoflow_*_new`-style
//! constructors and released with the matching `*_free` function. Every
//! fallible call returns a [`RheoflowStatus`]; on failure a description is
//! available from [`rheoflow_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rheoflow::fem::{self, DiscreteFields, FeSpace, NewtonConfig};
use rheoflow::icnn::{self, TrainConfig};
use rheoflow::{CarreauParams, Error, PowerLawParams, VerifierConfig, ViscosityModel};

/// Result codes of the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RheoflowStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    IoError = 3,
    TrainingDiverged = 4,
    NonConvergence = 5,
    ModelRange = 6,
    LinearSolver = 7,
    Panic = 8,
}

/// A viscosity law: Carreau, power law or network.
pub struct RheoflowModel {
    inner: ViscosityModel,
}

/// A discrete Stokes solution together with its finite element space.
pub struct RheoflowSolution {
    space: FeSpace,
    x: Vec<f64>,
}

/// Constants and verdict of a well-posedness check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RheoflowCertificate {
    pub c: f64,
    pub alpha: f64,
    pub r: f64,
    pub m: f64,
    pub objective: f64,
    pub worst_f1: f64,
    pub worst_f2: f64,
    pub worst_f3: f64,
    pub satisfied: bool,
}

/// Errors of a solve against the manufactured solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RheoflowSolveReport {
    pub h: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub newton_iterations: usize,
    pub residual_norm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RheoflowStatus {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } => RheoflowStatus::InvalidArgument,
        Error::Parse { .. } => RheoflowStatus::ParseError,
        Error::Io { .. } => RheoflowStatus::IoError,
        Error::TrainingDiverged { .. } => RheoflowStatus::TrainingDiverged,
        Error::NonConvergence { .. } => RheoflowStatus::NonConvergence,
        Error::ModelRange { .. } => RheoflowStatus::ModelRange,
        Error::LinearSolver(_) => RheoflowStatus::LinearSolver,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Error>) -> RheoflowStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RheoflowStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RheoflowStatus::Panic
        }
    }
}

fn null_arg(name: &str) -> Error {
    Error::InvalidInput(format!("{name} is null"))
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Error> {
    if path.is_null() {
        return Err(null_arg("path"));
    }
    // SAFETY: the caller passes a nul-terminated string.
    let s = unsafe { CStr::from_ptr(path) };
    s.to_str().map(str::to_owned).map_err(|_| Error::InvalidInput("path is not valid UTF-8".into()))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Error> {
    if out.is_null() {
        return Err(null_arg("output pointer"));
    }
    // SAFETY: `out` is non-null and points to writable storage.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rheoflow_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a Carreau law `k_inf + (k0 - k_inf)(1 + lambda t^2)^((n-2)/2)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_carreau(
    k0: f64,
    k_inf: f64,
    lambda: f64,
    n: f64,
    out: *mut *mut RheoflowModel,
) -> RheoflowStatus {
    guard(|| {
        let inner = ViscosityModel::carreau(CarreauParams::new(k0, k_inf, lambda, n)?);
        unsafe { store(out, RheoflowModel { inner }) }
    })
}

/// Creates a power law `k0 t^(n-2)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_power_law(k0: f64, n: f64, out: *mut *mut RheoflowModel) -> RheoflowStatus {
    guard(|| {
        let inner = ViscosityModel::power_law(PowerLawParams::new(k0, n)?);
        unsafe { store(out, RheoflowModel { inner }) }
    })
}

/// Loads a network model file.
///
/// # Safety
/// `path` must be a nul-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_load(path: *const c_char, out: *mut *mut RheoflowModel) -> RheoflowStatus {
    guard(|| {
        let path = unsafe { path_arg(path)? };
        let inner = ViscosityModel::icnn(icnn::load_model(path)?);
        unsafe { store(out, RheoflowModel { inner }) }
    })
}

/// Fits a convex or concave network with layer widths 1, 120, 56, 1 to
/// `len` samples.
///
/// # Safety
/// `shear_rate` and `viscosity` must point to `len` readable values and
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_fit(
    shear_rate: *const f64,
    viscosity: *const f64,
    len: usize,
    epochs: usize,
    seed: u64,
    out: *mut *mut RheoflowModel,
) -> RheoflowStatus {
    guard(|| {
        if shear_rate.is_null() || viscosity.is_null() {
            return Err(null_arg("data"));
        }
        // SAFETY: the caller guarantees `len` readable values in each array.
        let (t, k) = unsafe { (std::slice::from_raw_parts(shear_rate, len), std::slice::from_raw_parts(viscosity, len)) };
        let data = rheoflow::RheologyDataset::from_pairs("ffi", t.iter().copied().zip(k.iter().copied()))?;
        let (inputs, targets) = data.as_points();
        let cfg = TrainConfig::with_epochs(epochs, seed);
        let sel = icnn::select_convex_concave(&inputs, &targets, &rheoflow::experiments::FIT_ARCHITECTURE, &cfg)?;
        unsafe { store(out, RheoflowModel { inner: ViscosityModel::icnn(sel.model) }) }
    })
}

/// Writes a network model to `path`. Analytic laws are rejected.
///
/// # Safety
/// `model` must come from this library and `path` be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_save(model: *const RheoflowModel, path: *const c_char) -> RheoflowStatus {
    guard(|| {
        // SAFETY: a non-null handle was created by this library.
        let model = unsafe { model.as_ref() }.ok_or_else(|| null_arg("model"))?;
        let path = unsafe { path_arg(path)? };
        match &model.inner.law {
            rheoflow::rheology::ViscosityLaw::Icnn(m) => icnn::save_model(m, path),
            _ => Err(Error::InvalidInput("only network models can be saved".into())),
        }
    })
}

/// Evaluates `k(t)` and `k'(t)`. Either output pointer may be null.
///
/// # Safety
/// `model` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_eval(
    model: *const RheoflowModel,
    t: f64,
    value: *mut f64,
    derivative: *mut f64,
) -> RheoflowStatus {
    guard(|| {
        let model = unsafe { model.as_ref() }.ok_or_else(|| null_arg("model"))?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput(format!("shear rate must be finite and non-negative, got {t}")));
        }
        let (k, dk) = model.inner.eval_with_deriv(t);
        // SAFETY: non-null outputs are writable per the contract.
        unsafe {
            if let Some(v) = value.as_mut() {
                *v = k;
            }
            if let Some(d) = derivative.as_mut() {
                *d = dk;
            }
        }
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_model_free(model: *mut RheoflowModel) {
    if !model.is_null() {
        // SAFETY: created by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Searches constants certifying `model` on `(0, t_max]` with the default
/// search settings.
///
/// # Safety
/// `model` must come from this library and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_verify(
    model: *const RheoflowModel,
    t_max: f64,
    seed: u64,
    out: *mut RheoflowCertificate,
) -> RheoflowStatus {
    guard(|| {
        let model = unsafe { model.as_ref() }.ok_or_else(|| null_arg("model"))?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null_arg("output pointer"))?;
        let cfg = VerifierConfig { t_max, seed, ..VerifierConfig::default() };
        let cert = rheoflow::verifier::verify(&model.inner, &cfg)?;
        let k = cert.constants;
        *out = RheoflowCertificate {
            c: k.c,
            alpha: k.alpha,
            r: k.r,
            m: k.m,
            objective: cert.objective,
            worst_f1: cert.worst_residuals.f1,
            worst_f2: cert.worst_residuals.f2,
            worst_f3: cert.worst_residuals.f3,
            satisfied: cert.satisfied,
        };
        Ok(())
    })
}

/// Solves the manufactured Stokes problem on an `mesh × mesh` grid of the
/// unit square with velocity degree `degree`. The load is built from the
/// exact solution for `forcing`; errors use the exponent `r`.
///
/// # Safety
/// Handles must come from this library; `report` and `out` must be
/// writable. `out` may be null when the solution is not needed.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_solve(
    viscosity: *const RheoflowModel,
    forcing: *const RheoflowModel,
    mesh: usize,
    degree: usize,
    r: f64,
    report: *mut RheoflowSolveReport,
    out: *mut *mut RheoflowSolution,
) -> RheoflowStatus {
    guard(|| {
        let viscosity = unsafe { viscosity.as_ref() }.ok_or_else(|| null_arg("viscosity"))?;
        let forcing = unsafe { forcing.as_ref() }.ok_or_else(|| null_arg("forcing"))?;
        let report = unsafe { report.as_mut() }.ok_or_else(|| null_arg("report"))?;
        if !(r > 1.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("r must exceed 1, got {r}")));
        }
        let space = FeSpace::new(fem::build_mesh(mesh)?, degree)?;
        let case = fem::ManufacturedCase::reference();
        let (x, newton) =
            fem::newton_solve(&space, &viscosity.inner, &forcing.inner, &case, &NewtonConfig::default(), None)?;
        let errors = fem::compute_errors(&space, &x, &case, r)?;
        *report = RheoflowSolveReport {
            h: space.mesh.h,
            err_u: errors.err_u,
            err_p: errors.err_p,
            newton_iterations: newton.iterations,
            residual_norm: newton.residual_norm,
        };
        if out.is_null() {
            Ok(())
        } else {
            unsafe { store(out, RheoflowSolution { space, x }) }
        }
    })
}

/// Evaluates the discrete velocity and pressure at `(x, y)` in the unit
/// square. Either output pointer may be null.
///
/// # Safety
/// `solution` must come from this library; `velocity` must point to two
/// writable values when non-null.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_solution_eval(
    solution: *const RheoflowSolution,
    x: f64,
    y: f64,
    velocity: *mut f64,
    pressure: *mut f64,
) -> RheoflowStatus {
    guard(|| {
        let sol = unsafe { solution.as_ref() }.ok_or_else(|| null_arg("solution"))?;
        let (t, local) = sol
            .space
            .mesh
            .locate([x, y])
            .ok_or_else(|| Error::InvalidInput(format!("point ({x}, {y}) is outside the domain")))?;
        let v = DiscreteFields { space: &sol.space, x: &sol.x }.eval_in(t, local);
        // SAFETY: non-null outputs are writable per the contract.
        unsafe {
            if !velocity.is_null() {
                *velocity = v.u[0];
                *velocity.add(1) = v.u[1];
            }
            if let Some(p) = pressure.as_mut() {
                *p = v.p;
            }
        }
        Ok(())
    })
}

/// Number of unknowns of the discrete system behind `solution`, or 0 for
/// null.
///
/// # Safety
/// `solution` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_solution_len(solution: *const RheoflowSolution) -> usize {
    unsafe { solution.as_ref() }.map_or(0, |s| s.x.len())
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `solution` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rheoflow_solution_free(solution: *mut RheoflowSolution) {
    if !solution.is_null() {
        // SAFETY: created by `Box::into_raw` in this library.
        drop(unsafe { Box::from_raw(solution) });
    }
}
