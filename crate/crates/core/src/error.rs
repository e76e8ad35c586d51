use thiserror::Error;

/// Every failure the certifiers and constructors can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coefficient and pole lists differ in length ({a} vs {w})")]
    LengthMismatch { a: usize, w: usize },
    #[error("window has no terms")]
    EmptyWindow,
    #[error("coefficient a[{index}] is zero")]
    ZeroCoefficient { index: usize },
    #[error("pole w[{index}] lies on the real axis")]
    RealPole { index: usize },
    #[error("poles w[{i}] and w[{j}] coincide")]
    DuplicatePole { i: usize, j: usize },
    #[error("lattice parameters must be positive and finite (alpha={alpha}, beta={beta})")]
    InvalidLattice { alpha: f64, beta: f64 },
    #[error("exponent {exponent:.1} exceeds the representable range")]
    Overflow { exponent: f64 },
    #[error("z hits a pole of the Zak transform")]
    PoleHit,
    #[error("normalized alpha {alpha} is outside the supported range")]
    AlphaOutOfRange { alpha: f64 },
    #[error("profile is undefined at xi = 0 for windows with poles in both half-planes")]
    UndefinedAtZero,
    #[error("leading multiplier vanishes at xi = {xi}")]
    LeadingVanishes { xi: f64 },
    #[error("interlacing nodes too close (gap {gap:e})")]
    NearDegenerate { gap: f64 },
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("window is not of Herglotz type")]
    NotHerglotz,
    #[error("alpha*beta = {density} > 1: no frame is possible")]
    DensityTooLow { density: f64 },
    #[error("alpha*beta = {density} exceeds 1/N")]
    DensityTooHigh { density: f64 },
    #[error("positivity not decided: grid minimum {min:e}, slack {slack:e}")]
    InconclusivePositivity { min: f64, slack: f64 },
    #[error("cosine series diverges: some |u_k| >= 1")]
    DivergentSeries,
    #[error("profile is not real: need real coefficients and real negative poles")]
    NotRealProfile,
    #[error("Re Z is not positive on the torus")]
    PositivityFails,
    #[error("poles lie in both half-planes")]
    MixedHalfPlanes,
    #[error("alpha*beta = {density} is not critical")]
    NotCritical { density: f64 },
    #[error("orbit returns to {value} (rational collision)")]
    RationalCollision { value: f64 },
    #[error("orbit start {xi} is outside (1, 1/alpha)")]
    InvalidStart { xi: f64 },
    #[error("alpha is effectively rational ({p}/{q})")]
    EffectivelyRational { p: i64, q: i64 },
    #[error("m0 vanishes on the positive half-axis (near xi = {xi:?})")]
    M0Vanishes { xi: Option<f64> },
    #[error("no full-rank orbit window found")]
    NotFound,
    #[error("two poles share a real part")]
    DegenerateRe,
    #[error("theta = {theta} is below N-1")]
    ThetaOutOfRange { theta: f64 },
    #[error("root continuation lost at alpha = {alpha}")]
    ContinuationLost { alpha: f64 },
    #[error("obstruction construction requires |alpha - 6/7| < 1e-3 (got {alpha})")]
    ObstructionRange { alpha: f64 },
    #[error("condition matrix has numerical rank {rank}, expected {expected}")]
    NullspaceRankMismatch { rank: usize, expected: usize },
    #[error("vanishing conditions are rank deficient for every tried theta")]
    RankDeficient,
    #[error("test function support is unbounded")]
    UnboundedSupport,
    #[error("configuration limit: {0}")]
    ConfigLimit(String),
    #[error("sum of coefficients is {sum:e}, window is not in the amalgam space")]
    NotAmalgam { sum: f64 },
    #[error("integer shifts are not stable (margin {margin:e})")]
    Unstable { margin: f64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("certifiers disagree: {0}")]
    Conflict(String),
}

impl Error {
    /// Errors caused by malformed input rather than unmet hypotheses.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::LengthMismatch { .. }
                | Error::EmptyWindow
                | Error::ZeroCoefficient { .. }
                | Error::RealPole { .. }
                | Error::DuplicatePole { .. }
                | Error::InvalidLattice { .. }
                | Error::ConfigLimit(_)
                | Error::Input(_)
                | Error::Conflict(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
