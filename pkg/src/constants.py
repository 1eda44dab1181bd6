"""Constants and defaults for the mode-splitter simulator."""

# Numerical defaults (time in units of 1/J)
DEFAULT_DT = 1e-3
DEFAULT_GRID_STEP = 1e-2
DEFAULT_T_MAX = 10.0
DEFAULT_TRAJECTORIES = 100_000
FULL_SCALE_TRAJECTORIES = 1_080_000
DEFAULT_SEED = 0
DEFAULT_SCHEME = 'midpoint'
SCHEMES = ('euler', 'midpoint')

# Semi-implicit midpoint fixed-point iterations
MIDPOINT_ITERATIONS = 4

# Ensemble reduction: trajectories per block, blocks per kernel call.
# Both are fixed so results never depend on the thread count.
TRAJECTORY_BLOCK_SIZE = 128
BLOCKS_PER_CHUNK = 64

# A trajectory is flagged once a component exceeds this factor times sqrt(max(N, 1))
DIVERGENCE_FACTOR = 1e6
MAX_DIVERGED_FRACTION = 0.01

# Conditioning variance below which the Reid estimator is undefined
DEGENERATE_VARIANCE = 1e-12

# Separability floor for Duan-Simon sums with X = a + a^dag
DUAN_SIMON_FLOOR = 4.0

# Exact oracle
DENSE_DIMENSION_LIMIT = 2000
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
BS_TAIL_TOLERANCE = 1e-10

# Central-difference step used for delta-method error propagation
DELTA_METHOD_STEP = 1e-6

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_DIVERGENCE = 3
EXIT_IO_ERROR = 4

# Output schema for time-series tables (stochastic mode adds "<col>_se")
SERIES_COLUMNS = [
    't',
    'N1', 'N2', 'N3',
    'VN1', 'VN2', 'VN3', 'VN1m3',
    'xi13', 'sigma13', 'sigma31', 'zeta13',
    'VX1', 'VY1', 'VX2', 'VY2', 'VX3', 'VY3',
    'DSp13', 'DSm13', 'DSp12', 'DSm12',
    'gamma13', 'gamma12',
]

BEAMSPLITTER_COLUMNS = [
    'xi_ab', 'sigma_ab', 'sigma_ba', 'DSp', 'DSm', 'gamma',
    'VXa_out', 'VYa_out', 'VXb_out', 'VYb_out', 'VXaXb_out', 'VYaYb_out',
]

CSV_FLOAT_FORMAT = '%.17g'

# Named experiment presets (J=1, chi=1e-3, N2(0)=200)
PRESETS = {
    'fig1': {
        'mode': 'stochastic',
        'description': 'Populations in each well, Fock input',
        'J': 1.0, 'chi': 1e-3, 'n_atoms': 200, 'initial_state': 'fock',
    },
    'fig2': {
        'mode': 'analytic',
        'description': 'Non-interacting number variances, Fock input',
        'J': 1.0, 'chi': 0.0, 'n_atoms': 200, 'initial_state': 'fock',
    },
    'fig3': {
        'mode': 'analytic',
        'description': 'Non-interacting number variances, coherent input',
        'J': 1.0, 'chi': 0.0, 'n_atoms': 200, 'initial_state': 'coherent',
    },
    'fig4': {
        'mode': 'stochastic',
        'description': 'Hillery-Zubairy correlation, Fock and coherent inputs',
        'J': 1.0, 'chi': 1e-3, 'n_atoms': 200,
        'initial_state': ('fock', 'coherent'),
    },
    'fig5': {
        'mode': 'stochastic',
        'description': 'Duan-Simon sums, coherent input',
        'J': 1.0, 'chi': 1e-3, 'n_atoms': 200, 'initial_state': 'coherent',
    },
}
