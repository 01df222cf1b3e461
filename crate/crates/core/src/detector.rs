use crate::error::{invalid, Result};

/// Efficiency and mean noise counts of a single detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    eta: f64,
    noise: f64,
}

impl DetectorParams {
    pub fn new(eta: f64, noise: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", format!("{eta} is outside [0, 1]")));
        }
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(invalid("noise", format!("{noise} must be finite and >= 0")));
        }
        Ok(Self { eta, noise })
    }

    /// A lossless, noiseless detector.
    pub fn ideal() -> Self {
        Self {
            eta: 1.0,
            noise: 0.0,
        }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectionMode {
    /// Photon-number resolving: a click means exactly one count.
    Pnr,
    /// Threshold detector: a click means one or more counts.
    OnOff,
}

/// Output port of a polarization analyzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Transmitted,
    Reflected,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Transmitted, Arm::Reflected];

    pub fn index(self) -> usize {
        match self {
            Arm::Transmitted => 0,
            Arm::Reflected => 1,
        }
    }

    pub fn other(self) -> Arm {
        match self {
            Arm::Transmitted => Arm::Reflected,
            Arm::Reflected => Arm::Transmitted,
        }
    }
}

/// The clicking detector at each site in a postselected coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub a: Arm,
    pub b: Arm,
}

impl Pair {
    pub const TT: Pair = Pair {
        a: Arm::Transmitted,
        b: Arm::Transmitted,
    };
    pub const TR: Pair = Pair {
        a: Arm::Transmitted,
        b: Arm::Reflected,
    };
    pub const RT: Pair = Pair {
        a: Arm::Reflected,
        b: Arm::Transmitted,
    };
    pub const RR: Pair = Pair {
        a: Arm::Reflected,
        b: Arm::Reflected,
    };
    /// Table order used throughout: TT, RR, TR, RT.
    pub const ALL: [Pair; 4] = [Pair::TT, Pair::RR, Pair::TR, Pair::RT];

    pub fn is_same(self) -> bool {
        self.a == self.b
    }
}

/// The four detectors behind the two analyzers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorBank {
    pub t_a: DetectorParams,
    pub r_a: DetectorParams,
    pub t_b: DetectorParams,
    pub r_b: DetectorParams,
    pub mode: DetectionMode,
}

impl DetectorBank {
    pub fn equal(detector: DetectorParams, mode: DetectionMode) -> Self {
        Self {
            t_a: detector,
            r_a: detector,
            t_b: detector,
            r_b: detector,
            mode,
        }
    }

    pub fn with_mode(mut self, mode: DetectionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn total_noise(&self) -> f64 {
        self.t_a.noise + self.r_a.noise + self.t_b.noise + self.r_b.noise
    }

    pub fn is_equal(&self) -> bool {
        self.r_a == self.t_a && self.t_b == self.t_a && self.r_b == self.t_a
    }

    pub fn site_a(&self, arm: Arm) -> DetectorParams {
        match arm {
            Arm::Transmitted => self.t_a,
            Arm::Reflected => self.r_a,
        }
    }

    pub fn site_b(&self, arm: Arm) -> DetectorParams {
        match arm {
            Arm::Transmitted => self.t_b,
            Arm::Reflected => self.r_b,
        }
    }

    /// Detectors in (T_A, R_A, T_B, R_B) order.
    pub fn as_array(&self) -> [DetectorParams; 4] {
        [self.t_a, self.r_a, self.t_b, self.r_b]
    }

    /// Exchanges the roles of the two sites.
    pub fn swapped(&self) -> Self {
        Self {
            t_a: self.t_b,
            r_a: self.r_b,
            t_b: self.t_a,
            r_b: self.r_a,
            mode: self.mode,
        }
    }
}
