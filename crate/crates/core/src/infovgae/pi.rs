/// Proportional–integral controller that steers the KL weight β toward a KL
/// set-point.
///
/// The proportional part is `k_p / (1 + exp(e))` with `e = target - observed`,
/// so it saturates at `k_p` when the KL overshoots and vanishes when it
/// undershoots. The integral accumulates `-k_i · e` and is frozen while β sits
/// on a bound and the new error would push it further past that bound.
#[derive(Clone, Debug, PartialEq)]
pub struct PiController {
    pub k_p: f64,
    pub k_i: f64,
    pub kl_target: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    integral: f64,
    beta: f64,
}

impl PiController {
    pub fn new(k_p: f64, k_i: f64, kl_target: f64, beta_min: f64, beta_max: f64) -> Self {
        Self {
            k_p,
            k_i,
            kl_target,
            beta_min,
            beta_max,
            integral: 0.0,
            beta: beta_min,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    /// Proportional term for a given error.
    pub fn proportional(&self, error: f64) -> f64 {
        // exp overflows to inf for large errors, giving exactly 0
        self.k_p / (1.0 + error.exp())
    }

    /// Feeds one KL observation and returns the new β.
    pub fn update(&mut self, observed_kl: f64) -> f64 {
        let e = self.kl_target - observed_kl;
        let p = self.proportional(e);
        let delta = -self.k_i * e;
        let at_min = self.beta <= self.beta_min;
        let at_max = self.beta >= self.beta_max;
        let inside = !at_min && !at_max;
        if inside || (at_min && delta > 0.0) || (at_max && delta < 0.0) {
            self.integral += delta;
        }
        self.beta = (p + self.integral + self.beta_min).clamp(self.beta_min, self.beta_max);
        self.beta
    }
}
