# Operator families.
CONSTANT_TWO = "constant-two"
POWER = "power"
P_AND_Q = "p-and-q"
ELASTICITY = "elasticity"
ELASTICITY_SQRT = "elasticity-sqrt"
PLASTICITY_LOG = "plasticity-log"
CUSTOM = "custom"

PHI_FAMILIES = [
    CONSTANT_TWO,
    POWER,
    P_AND_Q,
    ELASTICITY,
    ELASTICITY_SQRT,
    PLASTICITY_LOG,
    CUSTOM,
]

# Nonlinearity families.
EXPONENTIAL = "exponential"

NONLINEARITY_FAMILIES = [POWER, EXPONENTIAL, CUSTOM]

# Weight families.
CONSTANT = "constant"
SATURATING = "saturating"
ALGEBRAIC_DECAY = "algebraic-decay"
EXPONENTIAL_DECAY = "exponential-decay"

WEIGHT_FAMILIES = [CONSTANT, SATURATING, ALGEBRAIC_DECAY, EXPONENTIAL_DECAY, CUSTOM]

# Weight components.
LOWER = "lower"
UPPER = "upper"
OSC = "osc"
BALL_LOWER = "ball-lower"
BALL_UPPER = "ball-upper"

WEIGHT_COMPONENTS = [LOWER, UPPER, OSC, BALL_LOWER, BALL_UPPER]

# Sandwich functions.
XI_ETA_TAGS = ["xi1", "xi2", "xi3", "xi4", "eta1", "eta2", "eta3", "eta4"]

# Condition identifiers.
KO = "KO"
A_RHO = "A-rho"
H_BAR = "H-bar"
H_TILDE = "H-tilde"
H_INV_SUBADDITIVE = "h-inv-subadditive"

# Verdicts.
CONVERGES = "converges"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"
HOLDS = "holds"
FAILS = "fails"

# Confidence levels.
ANALYTIC = "analytic"
FITTED = "fitted"
SAMPLED = "sampled"

# Profile statuses.
COMPLETED = "completed"
BLOW_UP = "blow-up"
GLOBAL = "global"
GLOBAL_UNCONFIRMED = "global-unconfirmed"

# Hypothesis tags used by guards.
KELLER_OSSERMAN = "keller-osserman"
GROWTH_LOWER_WEIGHT = "growth-lower-weight"
OSCILLATION_BUDGET = "oscillation-budget"
SUBADDITIVITY = "subadditivity"

# Existence results whose hypotheses the guards enforce.
BOUNDARY_BLOW_UP_EXISTENCE = "boundary-blow-up-existence"
ENTIRE_EXISTENCE = "entire-large-solution-existence"

RESULTS = [BOUNDARY_BLOW_UP_EXISTENCE, ENTIRE_EXISTENCE]

# Profile sources.
SHOOTING = "shooting"
FD = "fd"

# CLI commands.
COMMANDS = [
    "indices",
    "check-ko",
    "check-arho",
    "budget",
    "subadd",
    "solve-ivp",
    "blowup-radius",
    "solve-ball",
    "verify-bounds",
    "sweep",
    "entire",
    "fd-check",
]

# Exit codes.
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_REJECTED = 3
EXIT_NUMERIC_FAILURE = 4

OUT_DIR_ENV = "LARGESOL_OUT_DIR"
