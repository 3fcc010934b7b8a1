use super::matrix::Matrix;
use super::tape::{Tape, Var};
use super::NumError;

/// Outcome of a finite-difference comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// `(parameter index, flat entry index)` of the worst coordinate.
    pub worst: Option<(usize, usize)>,
}

/// Checks tape gradients of `build` against central differences.
///
/// `build` receives a fresh tape and one `param` var per entry of `params`
/// and must return a `1×1` output.
pub fn grad_check<F>(build: F, params: &[Matrix], h: f64) -> Result<GradCheck, NumError>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, NumError>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|p| tape.param(p.clone())).collect();
    let out = build(&mut tape, &vars)?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Matrix> = vars
        .iter()
        .zip(params)
        .map(|(&v, p)| grads.get_or_zeros(v, p.shape()))
        .collect();
    compare_with_fd(
        &analytic,
        |ps| {
            let mut t = Tape::new();
            let vs: Vec<Var> = ps.iter().map(|p| t.constant(p.clone())).collect();
            let o = build(&mut t, &vs)?;
            Ok(t.scalar(o))
        },
        params,
        h,
    )
}

/// Compares a supplied gradient with central differences of `value`.
///
/// The error per coordinate is `|a - fd| / (|a| + |fd| + 1e-12)`.
pub fn compare_with_fd<F>(
    analytic: &[Matrix],
    mut value: F,
    params: &[Matrix],
    h: f64,
) -> Result<GradCheck, NumError>
where
    F: FnMut(&[Matrix]) -> Result<f64, NumError>,
{
    if !(h > 0.0 && h <= 1e-2) {
        return Err(NumError::BadStep(h));
    }
    if analytic.len() != params.len() {
        return Err(NumError::Shape {
            op: "grad_check",
            left: (analytic.len(), 0),
            right: (params.len(), 0),
        });
    }
    for (a, p) in analytic.iter().zip(params) {
        a.check_same(p, "grad_check")?;
    }
    let mut work: Vec<Matrix> = params.to_vec();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst: None,
    };
    for pi in 0..params.len() {
        for k in 0..params[pi].len() {
            let orig = params[pi].data()[k];
            work[pi].data_mut()[k] = orig + h;
            let up = value(&work)?;
            work[pi].data_mut()[k] = orig - h;
            let down = value(&work)?;
            work[pi].data_mut()[k] = orig;
            if !up.is_finite() || !down.is_finite() {
                return Err(NumError::NonFinite {
                    param: pi,
                    index: k,
                });
            }
            let fd = (up - down) / (2.0 * h);
            let a = analytic[pi].data()[k];
            let rel = (a - fd).abs() / (a.abs() + fd.abs() + 1e-12);
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = rel;
                report.worst = Some((pi, k));
            }
        }
    }
    Ok(report)
}
